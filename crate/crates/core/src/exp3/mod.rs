//! The adversarial policies: Exp3.M.B with a fixed exploration rate, the
//! epoch-restarting Exp3.1.M.B, and the high-probability variants Exp3.P.M
//! (fixed horizon) and Exp3.P.M.B (budget).

mod epoch;
mod high_prob;

pub use epoch::{
    epoch_count_bound, epoch_threshold, exp31mb_epoch_done, exp31mb_run, exp31mb_run_with_state,
    EpochThreshold,
};
pub use high_prob::{
    exp3pm_init_update_spec, exp3pm_run, exp3pm_run_with_state, exp3pmb_init_update_spec,
    exp3pmb_run, exp3pmb_run_with_state, HighProbSetup,
};

use std::f64::consts::E;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::BanditConfig;
use crate::env::{ArmSet, Environment, RoundOutcome};
use crate::error::{config_err, BanditError, Result};
use crate::sampling::{
    compute_cap, compute_probabilities, dependent_rounding, CapResult, ProbabilityVector,
    WeightVector,
};
use crate::trace::{EpisodeTrace, TraceRecorder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exp3Variant {
    /// Updates uncapped arms with `r^ - c^`.
    Mb,
    /// Epoch subroutine: updates played arms with `r^ - c^`.
    OneMb,
    /// Fixed horizon, rewards only, with a confidence bonus.
    Pm,
    /// Budgeted, rewards and costs, with a confidence bonus.
    Pmb,
}

impl Exp3Variant {
    fn observes_costs(self) -> bool {
        !matches!(self, Self::Pm)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Exp3State {
    pub log_weights: WeightVector,
    pub gamma: f64,
    pub variant: Exp3Variant,
    pub alpha: Option<f64>,
    /// Cumulative reward estimates.
    pub gain_acc: Vec<f64>,
    /// Cumulative cost estimates.
    pub loss_acc: Vec<f64>,
    /// Confidence widths of the high-probability variants.
    pub sigma_acc: Vec<f64>,
    /// Number of updates applied so far.
    pub t: usize,
    pub epoch: Option<u32>,
    n: usize,
    k: usize,
    /// `1/sqrt(NT)` or `sqrt(K c_min)/sqrt(NB)`; the bonus and the sigma
    /// increment of arm `i` are this divided by `p_i` (times alpha for the bonus).
    sigma_step: f64,
}

impl Exp3State {
    pub fn new(n: usize, k: usize, gamma: f64, variant: Exp3Variant) -> Result<Self> {
        if k == 0 || k > n {
            return config_err(format!("need 1 <= K <= N, got K = {k}, N = {n}"));
        }
        if !(gamma > 0.0 && gamma <= 1.0) {
            return config_err(format!("gamma = {gamma} outside (0, 1]"));
        }
        Ok(Self {
            log_weights: WeightVector::uniform(n),
            gamma,
            variant,
            alpha: None,
            gain_acc: vec![0.0; n],
            loss_acc: vec![0.0; n],
            sigma_acc: vec![0.0; n],
            t: 0,
            epoch: None,
            n,
            k,
            sigma_step: 0.0,
        })
    }

    pub fn n_arms(&self) -> usize {
        self.n
    }

    pub fn plays(&self) -> usize {
        self.k
    }

    /// Multiplier of the exponent in the weight update: `K gamma / N` for the
    /// plain variants, `gamma K / (3N)` for the high-probability ones.
    pub fn learning_rate(&self) -> f64 {
        let base = self.k as f64 * self.gamma / self.n as f64;
        match self.variant {
            Exp3Variant::Mb | Exp3Variant::OneMb => base,
            Exp3Variant::Pm | Exp3Variant::Pmb => base / 3.0,
        }
    }

    /// Capping and inclusion probabilities for the current weights.
    pub fn distribution(&self) -> Result<(CapResult, ProbabilityVector)> {
        let cap = compute_cap(&self.log_weights, self.gamma, self.k, self.n)?;
        let p = compute_probabilities(&cap, self.gamma, self.k);
        Ok((cap, p))
    }

    /// Restarts the weights at `w_i = 1`, keeping the accumulators.
    pub(crate) fn restart(&mut self, gamma: f64) {
        self.gamma = gamma;
        self.log_weights.reset(0.0);
    }

    /// Applies one round of feedback according to the variant.
    pub fn update(&mut self, outcome: &RoundOutcome, p: &ProbabilityVector, capped: &ArmSet) -> Result<()> {
        let (rhat, chat) = estimate(outcome, p)?;
        let chat = if self.variant.observes_costs() {
            chat
        } else {
            vec![0.0; self.n]
        };
        for i in 0..self.n {
            self.gain_acc[i] += rhat[i];
            self.loss_acc[i] += chat[i];
        }
        match self.variant {
            Exp3Variant::Mb => exp3mb_weight_update(self, &rhat, &chat, capped),
            Exp3Variant::OneMb => {
                let eta = self.learning_rate();
                for i in outcome.arms.iter() {
                    self.log_weights.add(i, eta * (rhat[i] - chat[i]));
                }
            }
            Exp3Variant::Pm | Exp3Variant::Pmb => {
                let eta = self.learning_rate();
                let alpha = self.alpha.unwrap_or(0.0);
                for i in 0..self.n {
                    let width = self.sigma_step / p[i];
                    self.sigma_acc[i] += width;
                    if !capped.contains(i) {
                        self.log_weights
                            .add(i, eta * (rhat[i] - chat[i] + alpha * width));
                    }
                }
            }
        }
        self.t += 1;
        Ok(())
    }
}

/// Importance-weighted estimates `r_i / p_i`, `c_i / p_i` for played arms,
/// zero elsewhere.
pub fn estimate(outcome: &RoundOutcome, p: &ProbabilityVector) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rhat = vec![0.0; p.len()];
    let mut chat = vec![0.0; p.len()];
    for (i, r, c) in outcome.iter() {
        let pi = p[i];
        if !(pi > 0.0) {
            return Err(BanditError::Probability(format!(
                "arm {i} played with probability {pi}"
            )));
        }
        rhat[i] = r / pi;
        chat[i] = c / pi;
    }
    Ok((rhat, chat))
}

/// Multiplies the weight of every uncapped arm by
/// `exp(K gamma / N * (r^_i - c^_i))`.
pub fn exp3mb_weight_update(state: &mut Exp3State, rhat: &[f64], chat: &[f64], capped: &ArmSet) {
    let eta = state.k as f64 * state.gamma / state.n as f64;
    for i in 0..state.n {
        if !capped.contains(i) {
            state.log_weights.add(i, eta * (rhat[i] - chat[i]));
        }
    }
}

/// One round of play together with the distribution it was drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct Exp3Round {
    pub outcome: RoundOutcome,
    pub probabilities: ProbabilityVector,
    pub capped: ArmSet,
    /// The round cost more than the remaining budget; nothing was updated.
    pub terminated: bool,
}

/// Draws arms for round `t`, observes them and, if the round is affordable,
/// updates the state. The caller settles the budget.
pub fn exp3mb_round<R: Rng + ?Sized>(
    state: &mut Exp3State,
    env: &Environment,
    t: usize,
    budget_remaining: f64,
    rng: &mut R,
) -> Result<Exp3Round> {
    let (cap, p) = state.distribution()?;
    let arms = dependent_rounding(state.k, p.as_slice(), rng)?;
    let outcome = env.observe(t, &arms, rng)?;
    let terminated = outcome.cost_sum() > budget_remaining;
    if !terminated {
        state.update(&outcome, &p, &cap.capped)?;
    }
    Ok(Exp3Round {
        outcome,
        probabilities: p,
        capped: cap.capped,
        terminated,
    })
}

/// Plays `state` until the budget is exhausted.
pub(crate) fn run_budgeted<R: Rng + ?Sized>(
    state: &mut Exp3State,
    cfg: &BanditConfig,
    env: &Environment,
    rng: &mut R,
) -> Result<EpisodeTrace> {
    let mut rec = TraceRecorder::new(cfg.budget);
    loop {
        let round = exp3mb_round(state, env, rec.next_round(), rec.remaining(), rng)?;
        if round.terminated || !rec.settle(&round.outcome, Some(round.probabilities.as_slice())) {
            return Ok(rec.finish(Some(round.outcome)));
        }
    }
}

/// Runs Exp3.M.B with a fixed exploration rate.
pub fn exp3mb_run<R: Rng + ?Sized>(
    cfg: &BanditConfig,
    env: &Environment,
    gamma: f64,
    rng: &mut R,
) -> Result<EpisodeTrace> {
    exp3mb_run_with_state(cfg, env, gamma, rng).map(|(trace, _)| trace)
}

pub fn exp3mb_run_with_state<R: Rng + ?Sized>(
    cfg: &BanditConfig,
    env: &Environment,
    gamma: f64,
    rng: &mut R,
) -> Result<(EpisodeTrace, Exp3State)> {
    let mut state = Exp3State::new(cfg.n_arms, cfg.plays, gamma, Exp3Variant::Mb)?;
    let trace = run_budgeted(&mut state, cfg, env, rng)?;
    Ok((trace, state))
}

/// Exploration rate for a known gain bound `g >= G_max`:
/// `min(1, sqrt(N ln(N/K) / (g (e - 1) (1 + B / (g c_min)))))`.
pub fn tune_gamma_mb(g: f64, budget: f64, n: usize, k: usize, c_min: f64) -> Result<f64> {
    if !(g > 0.0) {
        return config_err(format!("gain bound g = {g} must be positive"));
    }
    if k >= n {
        return Err(BanditError::Degenerate(
            "N = K makes the tuned rate zero; supply gamma manually".into(),
        ));
    }
    let n_f = n as f64;
    let log_term = n_f * (n_f / k as f64).ln();
    let denom = g * (E - 1.0) * (1.0 + budget / (g * c_min));
    Ok((log_term / denom).sqrt().min(1.0))
}
