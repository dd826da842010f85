use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::thm3_tuned_eps;
use crate::env::{AdversarialEnv, ArmSet};
use crate::error::{config_err, Result};

/// Parameters of the hard instance; everything else comes from the run
/// configuration.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundSpec {
    /// Reward bias of the good arms; the tuned value when absent.
    #[serde(default)]
    pub eps: Option<f64>,
    /// The `K` good arms; drawn uniformly when absent.
    #[serde(default)]
    pub good_set: Option<Vec<usize>>,
}

/// Samples the hard oblivious instance once.
///
/// Good arms pay 1 with probability `1/2 + eps` and cost `c_min` with the same
/// probability (else 1). The other arms pay `{0, 1}` and cost `{c_min, 1}`
/// uniformly. `rows` is normally `ceil(B/(K c_min)) + 1`.
pub fn make_lower_bound_env<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    budget: f64,
    c_min: f64,
    spec: &LowerBoundSpec,
    rows: Option<usize>,
    rng: &mut R,
) -> Result<(AdversarialEnv, ArmSet, f64)> {
    if k == 0 || k >= n {
        return config_err(format!("lower-bound instance needs 1 <= K < N, got K = {k}, N = {n}"));
    }
    if !(c_min > 0.0 && c_min < 1.0) {
        return config_err("c_min must lie in (0, 1)");
    }
    if !(budget > 0.0) {
        return config_err("B must be positive");
    }
    let eps = spec.eps.unwrap_or_else(|| thm3_tuned_eps(budget, n, k, c_min));
    if !(eps > 0.0 && eps <= 0.25) {
        return config_err(format!("eps = {eps} outside (0, 1/4]"));
    }
    let rows = rows.unwrap_or((budget / (k as f64 * c_min)).ceil() as usize + 1);
    build(n, k, c_min, eps, spec.good_set.clone(), rows, rng)
}

fn build<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    c_min: f64,
    eps: f64,
    good_set: Option<Vec<usize>>,
    rows: usize,
    rng: &mut R,
) -> Result<(AdversarialEnv, ArmSet, f64)> {
    let good = match good_set {
        Some(g) => {
            let set = ArmSet::new(g)?;
            set.check_bounds(n)?;
            if set.len() != k {
                return config_err(format!("good_set must hold exactly K = {k} arms"));
            }
            set
        }
        None => ArmSet::new(sample(rng, n, k).into_vec())?,
    };
    let env = AdversarialEnv::from_fn(rows, n, |_, i| {
        let bias = if good.contains(i) { 0.5 + eps } else { 0.5 };
        let reward = if rng.random::<f64>() < bias { 1.0 } else { 0.0 };
        let cost = if rng.random::<f64>() < bias { c_min } else { 1.0 };
        (reward, cost)
    })?;
    Ok((env, good, eps))
}
