//! Problem instance parameters.

use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};

/// Parameters of a budgeted multiple-play bandit instance.
///
/// `confidence` is only read by the high-probability policies and `horizon`
/// only by the fixed-horizon one; both carry defaults so that stochastic
/// configurations do not have to spell them out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BanditConfig {
    pub n_arms: usize,
    pub plays: usize,
    pub budget: f64,
    pub c_min: f64,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
    #[serde(default)]
    pub horizon: Option<usize>,
}

fn default_confidence() -> f64 {
    0.1
}

impl BanditConfig {
    pub fn new(n_arms: usize, plays: usize, budget: f64, c_min: f64) -> Self {
        Self {
            n_arms,
            plays,
            budget,
            c_min,
            confidence: default_confidence(),
            horizon: None,
        }
    }

    pub fn with_confidence(mut self, confidence: f64) -> Self {
        self.confidence = confidence;
        self
    }

    pub fn with_horizon(mut self, horizon: usize) -> Self {
        self.horizon = Some(horizon);
        self
    }

    /// Largest number of rounds any policy can afford: every round costs at
    /// least `plays * c_min`.
    pub fn max_rounds(&self) -> usize {
        (self.budget / (self.plays as f64 * self.c_min)).ceil() as usize
    }

    /// Returns the config unchanged when every constraint holds.
    pub fn validate(self) -> Result<Self> {
        validate_config(self)
    }
}

pub fn validate_config(cfg: BanditConfig) -> Result<BanditConfig> {
    if cfg.n_arms == 0 {
        return config_err("N must be at least 1");
    }
    if cfg.plays < 1 {
        return config_err("K must be at least 1");
    }
    if cfg.plays > cfg.n_arms {
        return config_err(format!("K exceeds N ({} > {})", cfg.plays, cfg.n_arms));
    }
    if !(cfg.c_min > 0.0) {
        return config_err("c_min must be > 0");
    }
    if !(cfg.c_min < 1.0) {
        return config_err("c_min must be < 1");
    }
    if !(cfg.budget > 0.0) || !cfg.budget.is_finite() {
        return config_err("B must be a positive finite number");
    }
    if !(cfg.confidence > 0.0 && cfg.confidence < 1.0) {
        return config_err("delta must lie in (0, 1)");
    }
    if let Some(t) = cfg.horizon {
        if t == 0 {
            return config_err("T must be at least 1");
        }
    }
    Ok(cfg)
}
