//! Closed-form regret bounds and the hard adversarial instance.
//!
//! All logarithms are natural.

mod lower_env;

use std::collections::BTreeMap;
use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::env::StochasticEnv;
use crate::error::{config_err, BanditError, Result};
use crate::subsets::{binomial, k_subsets, top_k_indices, EXACT_SUBSET_LIMIT};

pub use lower_env::{make_lower_bound_env, LowerBoundSpec};

/// Instance constants needed by the stochastic bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StochasticBoundParams {
    pub n_arms: usize,
    pub plays: usize,
    pub c_min: f64,
    /// Gap in summed bang-per-buck ratio between `a*` and the runner-up subset.
    pub delta_min: f64,
    /// Gap between `a*` and the worst subset.
    pub delta_max: f64,
    pub opt_cost_sum: f64,
    pub opt_reward_sum: f64,
}

impl StochasticBoundParams {
    /// Derives the gaps and the `a*` sums from a stochastic environment.
    ///
    /// Subset ratio sums are separable, so the sorted-ratio shortcut is exact;
    /// full enumeration is still used whenever it is affordable.
    pub fn from_env(env: &StochasticEnv, plays: usize) -> Result<Self> {
        let n = env.n_arms();
        if plays == 0 || plays >= n {
            return Err(BanditError::Degenerate(
                "gaps need at least one subset other than a*".into(),
            ));
        }
        let ratios = env.ratios();
        let a_star = top_k_indices(&ratios, plays);
        let best: f64 = a_star.iter().map(|i| ratios[i]).sum();

        let (runner_up, worst) = if binomial(n, plays) <= EXACT_SUBSET_LIMIT {
            let mut runner_up = f64::NEG_INFINITY;
            let mut worst = f64::INFINITY;
            for s in k_subsets(n, plays).filter(|s| *s != a_star) {
                let v: f64 = s.iter().map(|i| ratios[i]).sum();
                runner_up = runner_up.max(v);
                worst = worst.min(v);
            }
            (runner_up, worst)
        } else {
            let mut sorted = ratios.clone();
            sorted.sort_by(|a, b| b.total_cmp(a));
            let head: f64 = sorted[..plays].iter().sum();
            let swap = head - sorted[plays - 1] + sorted[plays];
            let tail: f64 = sorted[n - plays..].iter().sum();
            (swap, tail)
        };

        Ok(Self {
            n_arms: n,
            plays,
            c_min: env.c_min,
            delta_min: best - runner_up,
            delta_max: best - worst,
            opt_cost_sum: a_star.iter().map(|i| env.mean_costs[i]).sum(),
            opt_reward_sum: a_star.iter().map(|i| env.mean_rewards[i]).sum(),
        })
    }
}

/// A bound together with its named sub-terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub value: f64,
    pub constituents: BTreeMap<String, f64>,
}

impl BoundValue {
    fn from_terms(terms: &[(&str, f64)]) -> Self {
        Self {
            value: terms.iter().map(|(_, v)| v).sum(),
            constituents: terms.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.constituents.get(name).copied()
    }
}

/// `(N - K)/(N - 1)`, zero at `K = N`.
fn spread(n: usize, k: usize) -> Result<f64> {
    if n < 2 {
        return config_err("bound needs N >= 2");
    }
    if k == 0 || k > n {
        return config_err(format!("need 1 <= K <= N, got K = {k}, N = {n}"));
    }
    Ok((n - k) as f64 / (n - 1) as f64)
}

fn check_plays(n: usize, k: usize) -> Result<()> {
    if k == 0 || k > n {
        return config_err(format!("need 1 <= K <= N, got K = {k}, N = {n}"));
    }
    Ok(())
}

fn check_c_min(c_min: f64) -> Result<()> {
    if !(c_min > 0.0 && c_min <= 1.0) {
        return config_err("c_min must lie in (0, 1]");
    }
    Ok(())
}

/// UCB-MB: `c1 + c2 ln(B + c3)`.
///
/// Also reports `assembled`, the longer expression the constants come from:
/// `Sr/Sc + Sr (c2 + c3 ln(2B/Sc + c1)) + N D_max (gamma ln(2B/Sc + c1) + delta)`
/// with `Sr`, `Sc` the reward and cost sums of `a*`.
pub fn thm1_bound(p: &StochasticBoundParams, budget: f64) -> Result<BoundValue> {
    if !(p.delta_min > 0.0) {
        return Err(BanditError::Degenerate(format!(
            "delta_min = {} must be positive",
            p.delta_min
        )));
    }
    if p.delta_max < p.delta_min {
        return config_err("delta_max must be at least delta_min");
    }
    check_plays(p.n_arms, p.plays)?;
    check_c_min(p.c_min)?;
    if !(p.opt_cost_sum > 0.0) {
        return config_err("opt_cost_sum must be positive");
    }
    let (n, k, c) = (p.n_arms as f64, p.plays as f64, p.c_min);
    let ratio = (p.delta_min + 2.0 * k * (1.0 + 1.0 / c)) / (c * p.delta_min);
    let gamma = (k + 1.0) * ratio * ratio;
    let delta = 1.0 + k * PI * PI / 3.0;
    let c1 = 2.0 * n / (k * c) * (gamma * ((2.0 * n * gamma / (k * c)).ln() - 1.0) + delta);
    let c2 = n * k * delta / p.opt_cost_sum + 1.0;
    let c3 = n * k * gamma / p.opt_cost_sum;
    let value = c1 + c2 * (budget + c3).ln();

    let (sr, sc) = (p.opt_reward_sum, p.opt_cost_sum);
    let log_tau = (2.0 * budget / sc + c1).ln();
    let assembled = sr / sc + sr * (c2 + c3 * log_tau) + n * p.delta_max * (gamma * log_tau + delta);

    let constituents = [
        ("gamma_const", gamma),
        ("delta_const", delta),
        ("c1", c1),
        ("c2", c2),
        ("c3", c3),
        ("assembled", assembled),
    ];
    Ok(BoundValue {
        value,
        constituents: constituents.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
    })
}

/// Exp3.M.B with tuned `gamma`:
/// `2.63 sqrt(1 + B/(g c)) sqrt(g N ln(N/K)) + K`.
///
/// The guarantee needs `g >= G_max`; any positive `g` is accepted.
pub fn thm2_bound(g: f64, budget: f64, n: usize, k: usize, c_min: f64) -> Result<BoundValue> {
    if !(g > 0.0) {
        return config_err(format!("gain bound g = {g} must be positive"));
    }
    check_plays(n, k)?;
    check_c_min(c_min)?;
    let (n_f, k_f) = (n as f64, k as f64);
    let main = 2.63 * (1.0 + budget / (g * c_min)).sqrt() * (g * n_f * (n_f / k_f).ln()).sqrt();
    Ok(BoundValue::from_terms(&[("main", main), ("plays", k_f)]))
}

/// Exp3.1.M.B:
/// `8 a N/K + 2N ln(N/K) + K + 8 sqrt(a (G_max - B + K) N ln(N/K))`
/// with `a = (e - 1) - (e - 2) c_min`.
pub fn prop1_bound(g_max: f64, budget: f64, n: usize, k: usize, c_min: f64) -> Result<BoundValue> {
    check_plays(n, k)?;
    check_c_min(c_min)?;
    let (n_f, k_f) = (n as f64, k as f64);
    let a = (E - 1.0) - (E - 2.0) * c_min;
    let slack = g_max - budget + k_f;
    if slack < 0.0 {
        return config_err(format!("G_max - B + K = {slack} is negative"));
    }
    let log_nk = (n_f / k_f).ln();
    Ok(BoundValue::from_terms(&[
        ("epoch_overhead", 8.0 * a * n_f / k_f),
        ("entropy", 2.0 * n_f * log_nk),
        ("plays", k_f),
        ("main", 8.0 * (a * slack * n_f * log_nk).sqrt()),
    ]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBound {
    pub value: f64,
    pub eps: f64,
    /// Set when `K = N`, where no algorithm can have positive regret.
    pub degenerate: bool,
}

fn sqrt_log_four_thirds() -> f64 {
    (4f64 / 3.0).ln().sqrt()
}

/// Tuned bias `min(1/4, ((1 - K/N) c^{3/2} / (4 sqrt ln(4/3))) sqrt(N/(BK)))`.
pub fn thm3_tuned_eps(budget: f64, n: usize, k: usize, c_min: f64) -> f64 {
    let (n_f, k_f) = (n as f64, k as f64);
    let raw = (1.0 - k_f / n_f) * c_min.powf(1.5) / (4.0 * sqrt_log_four_thirds())
        * (n_f / (budget * k_f)).sqrt();
    raw.min(0.25)
}

/// Minimax lower bound. Without `eps`, the tuned closed form
/// `min(c^{3/2}(1 - K/N)^2 / (8 sqrt ln(4/3)) sqrt(NB/K), B(1 - K/N)/8)`;
/// with `eps`, `eps (B - BK/N - 2B c^{-3/2} eps sqrt(BK ln(4/3)/N))`.
pub fn thm3_lower_bound(
    budget: f64,
    n: usize,
    k: usize,
    c_min: f64,
    eps: Option<f64>,
) -> Result<LowerBound> {
    check_plays(n, k)?;
    check_c_min(c_min)?;
    if !(budget > 0.0) {
        return config_err("B must be positive");
    }
    if let Some(e) = eps {
        if !(0.0..=0.25).contains(&e) {
            return config_err(format!("eps = {e} outside [0, 1/4]"));
        }
    }
    if k == n {
        return Ok(LowerBound {
            value: 0.0,
            eps: eps.unwrap_or(0.0),
            degenerate: true,
        });
    }
    let (n_f, k_f) = (n as f64, k as f64);
    let gap = 1.0 - k_f / n_f;
    let (value, eps_used) = match eps {
        Some(e) => {
            let penalty = 2.0 * budget * c_min.powf(-1.5) * e
                * (budget * k_f * (4f64 / 3.0).ln() / n_f).sqrt();
            (e * (budget - budget * k_f / n_f - penalty), e)
        }
        None => {
            let first = c_min.powf(1.5) * gap * gap / (8.0 * sqrt_log_four_thirds())
                * (n_f * budget / k_f).sqrt();
            let second = budget * gap / 8.0;
            (first.min(second), thm3_tuned_eps(budget, n, k, c_min))
        }
    };
    Ok(LowerBound {
        value,
        eps: eps_used,
        degenerate: false,
    })
}

/// Exp3.P.M, probability `1 - delta`:
/// `2 sqrt5 sqrt(NKT ln(N/K)) + 8 f ln(NT/delta) + 2(1 + K^2) sqrt(NT f ln(NT/delta))`
/// with `f = (N - K)/(N - 1)`. Exactly zero at `K = N`.
pub fn thm4_bound(n: usize, k: usize, horizon: usize, delta: f64) -> Result<BoundValue> {
    let f = spread(n, k)?;
    if horizon == 0 {
        return config_err("T must be at least 1");
    }
    if !(delta > 0.0 && delta < 1.0) {
        return config_err("delta must lie in (0, 1)");
    }
    let (n_f, k_f, t_f) = (n as f64, k as f64, horizon as f64);
    let log_conf = (n_f * t_f / delta).ln();
    Ok(BoundValue::from_terms(&[
        ("exploration", 2.0 * 5f64.sqrt() * (n_f * k_f * t_f * (n_f / k_f).ln()).sqrt()),
        ("confidence", 8.0 * f * log_conf),
        ("deviation", 2.0 * (1.0 + k_f * k_f) * (n_f * t_f * f * log_conf).sqrt()),
    ]))
}

/// Exp3.P.M.B, probability `1 - delta`:
/// `2 sqrt3 sqrt((NB(1-c)/c) ln(N/K)) + 4 sqrt6 f ln(NB/(Kc delta))
///  + 2 sqrt6 (1 + K^2) sqrt(f (NB/(Kc)) ln(NB/(Kc delta)))`.
pub fn thm5_bound(n: usize, k: usize, budget: f64, c_min: f64, delta: f64) -> Result<BoundValue> {
    let f = spread(n, k)?;
    check_c_min(c_min)?;
    if !(budget > 0.0) {
        return config_err("B must be positive");
    }
    if !(delta > 0.0 && delta < 1.0) {
        return config_err("delta must lie in (0, 1)");
    }
    let (n_f, k_f) = (n as f64, k as f64);
    let scale = n_f * budget / (k_f * c_min);
    let log_conf = (scale / delta).ln();
    let s6 = 6f64.sqrt();
    Ok(BoundValue::from_terms(&[
        (
            "exploration",
            2.0 * 3f64.sqrt()
                * (n_f * budget * (1.0 - c_min) / c_min * (n_f / k_f).ln()).sqrt(),
        ),
        ("confidence", 4.0 * s6 * f * log_conf),
        ("deviation", 2.0 * s6 * (1.0 + k_f * k_f) * (f * scale * log_conf).sqrt()),
    ]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::DistributionFamily;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn thm1_constants() {
        let p = StochasticBoundParams {
            n_arms: 2,
            plays: 1,
            c_min: 1.0,
            delta_min: 1.0,
            delta_max: 1.0,
            opt_cost_sum: 1.0,
            opt_reward_sum: 1.0,
        };
        let b = thm1_bound(&p, 100.0).unwrap();
        assert_eq!(b.get("gamma_const").unwrap(), 50.0);
        assert!((b.get("delta_const").unwrap() - 4.2899).abs() < 1e-4);
        assert!((b.get("c2").unwrap() - 9.5798).abs() < 1e-4);
        assert_eq!(b.get("c3").unwrap(), 100.0);
        let c1 = b.get("c1").unwrap();
        assert!(rel(b.value, c1 + b.get("c2").unwrap() * 200f64.ln()) < 1e-12);
        // log growth
        let big = thm1_bound(&p, 1e9).unwrap().value;
        let bigger = thm1_bound(&p, 2e9).unwrap().value;
        assert!(rel(bigger - big, b.get("c2").unwrap() * 2f64.ln()) < 1e-5);

        let mut bad = p;
        bad.delta_min = 0.0;
        assert!(thm1_bound(&bad, 10.0).is_err());
    }

    #[test]
    fn thm2_hand_value() {
        let b = thm2_bound(200.0, 100.0, 10, 2, 0.5).unwrap();
        let expect = 2.63 * 2f64.sqrt() * (2000.0 * 5f64.ln()).sqrt() + 2.0;
        assert!(rel(b.value, expect) < 1e-12);
        assert!((b.value - 213.0).abs() < 0.05);
        assert_eq!(thm2_bound(50.0, 10.0, 3, 3, 0.5).unwrap().value, 3.0);
        assert!(thm2_bound(0.0, 10.0, 4, 2, 0.5).is_err());
    }

    #[test]
    fn thm2_single_play_scaling() {
        let scaled: Vec<f64> = [4usize, 8, 16, 32]
            .iter()
            .map(|&n| {
                let b = thm2_bound(300.0, 100.0, n, 1, 0.5).unwrap().value - 1.0;
                b / (n as f64 * (n as f64).ln()).sqrt()
            })
            .collect();
        for s in &scaled {
            assert!(rel(*s, scaled[0]) < 0.01);
        }
    }

    #[test]
    fn prop1_hand_value() {
        let b = prop1_bound(30.0, 20.0, 4, 2, 0.5).unwrap();
        assert!((b.value - 83.10).abs() < 0.02);
        assert!(prop1_bound(10.0, 20.0, 4, 2, 0.5).is_err());
        let looser = prop1_bound(30.0, 25.0, 4, 2, 0.5).unwrap();
        assert!(looser.value < b.value);
    }

    #[test]
    fn thm3_hand_value_and_forms() {
        let lb = thm3_lower_bound(1000.0, 10, 2, 1.0, None).unwrap();
        assert!((lb.value - 10.55).abs() < 0.005);
        assert!(!lb.degenerate);
        let at_eps = thm3_lower_bound(1000.0, 10, 2, 1.0, Some(lb.eps)).unwrap();
        assert!(rel(at_eps.value, lb.value) < 1e-9);
        let edge = thm3_lower_bound(1000.0, 4, 4, 0.5, None).unwrap();
        assert_eq!(edge.value, 0.0);
        assert!(edge.degenerate);
        assert!(thm3_lower_bound(1000.0, 10, 2, 1.0, Some(0.3)).is_err());
    }

    #[test]
    fn thm4_values() {
        let b = thm4_bound(10, 2, 1000, 0.1).unwrap();
        let f = 8.0 / 9.0;
        let l = 1e5f64.ln();
        let expect = 2.0 * 5f64.sqrt() * (20000.0 * 5f64.ln()).sqrt()
            + 8.0 * f * l
            + 10.0 * (1e4 * f * l).sqrt();
        assert!(rel(b.value, expect) < 1e-12);
        assert!((b.value - 4083.24).abs() < 0.01);
        assert_eq!(thm4_bound(6, 6, 1000, 0.1).unwrap().value, 0.0);
        assert!(thm4_bound(1, 1, 10, 0.1).is_err());
        assert!(thm4_bound(10, 2, 2000, 0.1).unwrap().value > b.value);
    }

    #[test]
    fn thm5_values() {
        let b = thm5_bound(10, 2, 100.0, 0.5, 0.1).unwrap();
        assert!((b.get("exploration").unwrap() - 138.97).abs() < 0.01);
        assert!((b.get("confidence").unwrap() - 80.21).abs() < 0.01);
        assert!((b.get("deviation").unwrap() - 2216.3).abs() < 0.1);
        assert_eq!(thm5_bound(10, 2, 100.0, 1.0, 0.1).unwrap().get("exploration"), Some(0.0));
        assert_eq!(thm5_bound(5, 5, 100.0, 0.5, 0.1).unwrap().value, 0.0);
    }

    #[test]
    fn gaps_from_env() {
        let env = StochasticEnv::new(
            vec![0.9, 0.75, 0.5, 0.4],
            vec![0.5, 0.5, 0.5, 0.5],
            DistributionFamily::BernoulliScaled,
            0.5,
        )
        .unwrap();
        let p = StochasticBoundParams::from_env(&env, 2).unwrap();
        assert!((p.delta_min - 0.5).abs() < 1e-12);
        assert!((p.delta_max - (3.3 - 1.8)).abs() < 1e-12);
        assert!((p.opt_cost_sum - 1.0).abs() < 1e-12);
        assert!((p.opt_reward_sum - 1.65).abs() < 1e-12);
        assert!(StochasticBoundParams::from_env(&env, 4).is_err());
    }
}
