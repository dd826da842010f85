#![allow(dead_code)]

use budgeted_bandits::{
    compute_cap, compute_probabilities, AdversarialEnv, BanditConfig, BanditRng, WeightVector,
};
use rand::Rng;

/// Costs uniform on `[c_min, 1]`; rewards uniform on `[0, 1]`, or on
/// `[c, 1]` above each cost when `dominant` is set.
pub fn random_adversarial(
    rng: &mut BanditRng,
    n: usize,
    rows: usize,
    c_min: f64,
    dominant: bool,
) -> AdversarialEnv {
    AdversarialEnv::from_fn(rows, n, |_, _| {
        let c = rng.random_range(c_min..=1.0);
        let r = if dominant {
            rng.random_range(c..=1.0)
        } else {
            rng.random::<f64>()
        };
        (r, c)
    })
    .unwrap()
}

pub fn adversarial_for(rng: &mut BanditRng, cfg: &BanditConfig, dominant: bool) -> AdversarialEnv {
    let rows = AdversarialEnv::default_rows(cfg).max(cfg.horizon.unwrap_or(0));
    random_adversarial(rng, cfg.n_arms, rows, cfg.c_min, dominant)
}

/// `G_max` by trying every bitmask with `k` set bits. Costs and rewards are
/// summed in ascending arm order, as a round's outcome is.
pub fn brute_force_gmax(env: &AdversarialEnv, k: usize, budget: f64) -> f64 {
    let n = env.n_arms();
    let mut best = f64::NEG_INFINITY;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let arms: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let mut remaining = budget;
        let mut gain = 0.0;
        for t in 1..=env.rows() {
            let cost: f64 = arms.iter().map(|&i| env.cost(t, i)).sum();
            let reward: f64 = arms.iter().map(|&i| env.reward(t, i)).sum();
            if cost > remaining {
                break;
            }
            remaining -= cost;
            gain += reward;
        }
        best = best.max(gain);
    }
    best
}

/// A valid inclusion-probability vector from random log-weights pushed
/// through the capping step.
pub fn random_probabilities(rng: &mut BanditRng, n: usize, k: usize) -> Vec<f64> {
    let spread = rng.random_range(0.0..6.0);
    let logs: Vec<f64> = (0..n).map(|_| rng.random_range(-spread..=spread)).collect();
    let gamma = rng.random_range(0.05..0.95);
    let w = WeightVector::from_log(logs).unwrap();
    let cap = compute_cap(&w, gamma, k, n).unwrap();
    compute_probabilities(&cap, gamma, k).into_inner()
}
