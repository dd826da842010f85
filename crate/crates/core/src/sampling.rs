//! Weight capping, the capped-weight probability map and the dependent
//! rounding sampler used by every exponential-weights policy.
//!
//! Weights are kept in the log domain. All ratio computations shift by the
//! largest log-weight first, so the working weights lie in `(0, 1]`.

use std::cmp::Ordering;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::ArmSet;
use crate::error::{config_err, BanditError, Result};

/// Coordinates this close to 0 or 1 are treated as integral by the rounding.
const FROZEN_EPS: f64 = 1e-9;
/// Largest tolerated deviation of `sum p` from `K` on input to the sampler.
const SIMPLEX_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    log_weights: Vec<f64>,
}

impl WeightVector {
    pub fn uniform(n: usize) -> Self {
        Self {
            log_weights: vec![0.0; n],
        }
    }

    pub fn from_log(log_weights: Vec<f64>) -> Result<Self> {
        if log_weights.is_empty() {
            return config_err("weight vector must not be empty");
        }
        if log_weights.iter().any(|w| !w.is_finite()) {
            return config_err("log-weights must be finite");
        }
        Ok(Self { log_weights })
    }

    /// From positive linear-scale weights.
    pub fn from_linear(weights: &[f64]) -> Result<Self> {
        if weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return config_err("weights must be positive and finite");
        }
        Self::from_log(weights.iter().map(|w| w.ln()).collect())
    }

    pub fn len(&self) -> usize {
        self.log_weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_weights.is_empty()
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn max_log(&self) -> f64 {
        self.log_weights
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Weights divided by the largest one.
    pub fn normalized(&self) -> Vec<f64> {
        let m = self.max_log();
        self.log_weights.iter().map(|w| (w - m).exp()).collect()
    }

    pub(crate) fn add(&mut self, i: usize, delta: f64) {
        self.log_weights[i] += delta;
    }

    pub(crate) fn reset(&mut self, log_value: f64) {
        self.log_weights.iter_mut().for_each(|w| *w = log_value);
    }
}

/// The capping threshold `(1/K - gamma/N) / (1 - gamma)`: the largest share
/// of the total effective weight a single arm may hold.
pub fn cap_ratio(gamma: f64, k: usize, n: usize) -> f64 {
    (1.0 / k as f64 - gamma / n as f64) / (1.0 - gamma)
}

/// Output of [`compute_cap`]. Weights are on the normalized scale (largest
/// raw weight = 1); `log_scale` restores the raw scale.
#[derive(Debug, Clone, PartialEq)]
pub struct CapResult {
    /// Cap on the normalized scale, `None` when no arm was capped.
    pub cap: Option<f64>,
    /// Arms whose weight reached the cap.
    pub capped: ArmSet,
    pub effective_weights: Vec<f64>,
    pub log_scale: f64,
}

impl CapResult {
    /// The cap on the raw weight scale.
    pub fn v(&self) -> Option<f64> {
        self.cap.map(|c| c * self.log_scale.exp())
    }

    pub fn is_capped(&self, arm: usize) -> bool {
        self.capped.contains(arm)
    }

    pub fn effective_sum(&self) -> f64 {
        self.effective_weights.iter().sum()
    }
}

/// Caps the largest weights so that no inclusion probability exceeds one.
///
/// With `ratio = cap_ratio(gamma, K, N)`, capping happens when the largest
/// weight is at least `ratio` times the total. The cap `v` then solves
/// `v / (|S| v + sum_{i not in S} w_i) = ratio` with `S = {i : w_i >= v}`.
pub fn compute_cap(weights: &WeightVector, gamma: f64, k: usize, n: usize) -> Result<CapResult> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return config_err(format!("gamma = {gamma} outside (0, 1]"));
    }
    if k == 0 || k > n {
        return config_err(format!("need 1 <= K <= N, got K = {k}, N = {n}"));
    }
    if weights.len() != n {
        return config_err(format!("{} weights for {n} arms", weights.len()));
    }
    let w = weights.normalized();
    let log_scale = weights.max_log();

    if k == n {
        // every arm is played; equal effective weights give p_i = 1
        return Ok(CapResult {
            cap: Some(1.0),
            capped: ArmSet::first(n),
            effective_weights: vec![1.0; n],
            log_scale,
        });
    }
    let uncapped = |w: Vec<f64>| CapResult {
        cap: None,
        capped: ArmSet::first(0),
        effective_weights: w,
        log_scale,
    };
    if gamma == 1.0 {
        return Ok(uncapped(w));
    }

    let ratio = cap_ratio(gamma, k, n);
    let total: f64 = w.iter().sum();
    // the largest normalized weight is exactly 1
    if 1.0 < ratio * total {
        return Ok(uncapped(w));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| w[b].total_cmp(&w[a]).then(a.cmp(&b)));
    // below[m] = sum of the n - m smallest weights, accumulated from the bottom
    let mut below = vec![0.0; n + 1];
    for m in (0..n).rev() {
        below[m] = below[m + 1] + w[order[m]];
    }

    let mut solution = None;
    for m in 1..n {
        let denom = 1.0 - ratio * m as f64;
        if denom <= 0.0 {
            break;
        }
        let v = ratio * below[m] / denom;
        let lowest_capped = w[order[m - 1]];
        let highest_free = w[order[m]];
        if lowest_capped >= v * (1.0 - 1e-12) && v > highest_free {
            solution = Some((m, v.min(lowest_capped)));
            break;
        }
    }
    let (m, v) = solution.ok_or_else(|| {
        BanditError::Degenerate(format!("no consistent cap for weights {w:?}"))
    })?;

    let capped = ArmSet::new(order[..m].to_vec())?;
    let mut effective = w;
    for &i in &order[..m] {
        effective[i] = v;
    }
    Ok(CapResult {
        cap: Some(v),
        capped,
        effective_weights: effective,
        log_scale,
    })
}

/// Per-arm inclusion probabilities; they sum to `K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    /// Validates entries in `[0, 1]` and `|sum - K| <= 1e-6`.
    pub fn new(p: Vec<f64>, k: usize) -> Result<Self> {
        if let Some(x) = p
            .iter()
            .find(|&&x| !(-FROZEN_EPS..=1.0 + FROZEN_EPS).contains(&x))
        {
            return Err(BanditError::Probability(format!("entry {x} outside [0, 1]")));
        }
        let sum: f64 = p.iter().sum();
        if (sum - k as f64).abs() > SIMPLEX_TOL {
            return Err(BanditError::Probability(format!("entries sum to {sum}, expected {k}")));
        }
        Ok(Self(p))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Index<usize> for ProbabilityVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// `p_i = K((1 - gamma) w~_i / sum w~ + gamma / N)`; capped arms get exactly 1.
pub fn compute_probabilities(cap: &CapResult, gamma: f64, k: usize) -> ProbabilityVector {
    let n = cap.effective_weights.len();
    let total = cap.effective_sum();
    let kf = k as f64;
    let p = cap
        .effective_weights
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            if cap.is_capped(i) {
                1.0
            } else {
                (kf * ((1.0 - gamma) * w / total + gamma / n as f64)).min(1.0)
            }
        })
        .collect();
    ProbabilityVector(p)
}

/// Draws exactly `K` distinct arms whose inclusion probabilities are `p`.
///
/// Pairwise rounding: two fractional coordinates `i, j` move to
/// `(p_i + a, p_j - a)` with probability `b / (a + b)` and to
/// `(p_i - b, p_j + b)` otherwise, where `a = min(1 - p_i, p_j)` and
/// `b = min(p_i, 1 - p_j)`. Each step keeps every expectation and the sum,
/// and fixes at least one coordinate, so a single pass suffices.
pub fn dependent_rounding<R: Rng + ?Sized>(
    k: usize,
    p: &[f64],
    rng: &mut R,
) -> Result<ArmSet> {
    let sum: f64 = p.iter().sum();
    if (sum - k as f64).abs() > SIMPLEX_TOL {
        return Err(BanditError::Probability(format!(
            "entries sum to {sum}, expected {k}"
        )));
    }
    if let Some(x) = p.iter().find(|&&x| !(-SIMPLEX_TOL..=1.0 + SIMPLEX_TOL).contains(&x)) {
        return Err(BanditError::Probability(format!("entry {x} outside [0, 1]")));
    }

    let mut x: Vec<f64> = p.to_vec();
    let fractional = |v: f64| v > FROZEN_EPS && v < 1.0 - FROZEN_EPS;
    let mut pending: Option<usize> = None;
    for j in 0..x.len() {
        if !fractional(x[j]) {
            continue;
        }
        let Some(i) = pending else {
            pending = Some(j);
            continue;
        };
        let up = (1.0 - x[i]).min(x[j]);
        let down = x[i].min(1.0 - x[j]);
        if rng.random::<f64>() * (up + down) < down {
            x[i] += up;
            x[j] -= up;
        } else {
            x[i] -= down;
            x[j] += down;
        }
        pending = match (fractional(x[i]), fractional(x[j])) {
            (true, _) => Some(i),
            (false, true) => Some(j),
            (false, false) => None,
        };
    }

    let chosen: Vec<usize> = x
        .iter()
        .enumerate()
        .filter(|(_, &v)| v >= 0.5)
        .map(|(i, _)| i)
        .collect();
    if chosen.len() != k {
        return Err(BanditError::Probability(format!(
            "rounding produced {} arms instead of {k}",
            chosen.len()
        )));
    }
    ArmSet::new(chosen)
}

/// Sum of the `k` largest values; equals the maximum over all `k`-subsets.
pub fn top_k_sum(values: &[f64], k: usize) -> f64 {
    let mut v = values.to_vec();
    v.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    v[..k.min(v.len())].iter().sum()
}
