use serde::{Deserialize, Serialize};

use crate::config::BanditConfig;
use crate::env::{AdversarialEnv, ArmSet, StochasticEnv};
use crate::error::{BanditError, Result};
use crate::subsets::{binomial, k_subsets, top_k_indices, EXACT_SUBSET_LIMIT};
use crate::trace::BudgetLedger;

/// Best fixed subset and its gain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleGain {
    pub a_star: ArmSet,
    pub gain: f64,
    /// False for the greedy adversarial fallback and the stochastic proxy.
    pub exact: bool,
    /// `(lower, upper)` bracket on the expected optimal gain, stochastic only.
    pub bracket: Option<(f64, f64)>,
}

/// Gain of playing `arms` every round until the budget runs out. The round
/// that cannot be paid for earns nothing.
pub fn fixed_subset_gain(env: &AdversarialEnv, arms: &ArmSet, budget: f64) -> Result<f64> {
    let mut ledger = BudgetLedger::new(budget);
    for t in 1.. {
        let outcome = env.lookup_round(t, arms)?;
        if !ledger.settle(outcome.cost_sum(), outcome.reward_sum()) {
            break;
        }
    }
    Ok(ledger.gain())
}

/// Exact `G_max` by simulating every `K`-subset. Ties go to the
/// lexicographically smallest subset.
pub fn oracle_gain_adversarial(env: &AdversarialEnv, cfg: &BanditConfig) -> Result<OracleGain> {
    let count = binomial(env.n_arms(), cfg.plays);
    if count > EXACT_SUBSET_LIMIT {
        return Err(BanditError::Combinatorial { count });
    }
    let mut best: Option<(ArmSet, f64)> = None;
    for arms in k_subsets(env.n_arms(), cfg.plays) {
        let gain = fixed_subset_gain(env, &arms, cfg.budget)?;
        if best.as_ref().is_none_or(|(_, g)| gain > *g) {
            best = Some((arms, gain));
        }
    }
    let (a_star, gain) = best.ok_or_else(|| BanditError::Config("no K-subsets".into()))?;
    Ok(OracleGain {
        a_star,
        gain,
        exact: true,
        bracket: None,
    })
}

/// Approximate `G_max`: the top `K` arms by total reward over total cost.
pub fn oracle_gain_adversarial_greedy(
    env: &AdversarialEnv,
    cfg: &BanditConfig,
) -> Result<OracleGain> {
    let ratios: Vec<f64> = (0..env.n_arms())
        .map(|i| {
            let (r, c) = (1..=env.rows()).fold((0.0, 0.0), |(r, c), t| {
                (r + env.reward(t, i), c + env.cost(t, i))
            });
            r / c
        })
        .collect();
    let a_star = top_k_indices(&ratios, cfg.plays);
    let gain = fixed_subset_gain(env, &a_star, cfg.budget)?;
    Ok(OracleGain {
        a_star,
        gain,
        exact: false,
        bracket: None,
    })
}

/// Exact when affordable, greedy otherwise.
pub fn oracle_gain_adversarial_auto(env: &AdversarialEnv, cfg: &BanditConfig) -> Result<OracleGain> {
    match oracle_gain_adversarial(env, cfg) {
        Err(BanditError::Combinatorial { .. }) => oracle_gain_adversarial_greedy(env, cfg),
        other => other,
    }
}

/// Best fixed subset over the first `horizon` rounds, ignoring costs.
pub fn oracle_gain_horizon(env: &AdversarialEnv, plays: usize, horizon: usize) -> Result<OracleGain> {
    if horizon > env.rows() {
        return Err(BanditError::SequenceExhausted {
            round: horizon,
            rows: env.rows(),
        });
    }
    let totals: Vec<f64> = (0..env.n_arms())
        .map(|i| (1..=horizon).map(|t| env.reward(t, i)).sum())
        .collect();
    let a_star = top_k_indices(&totals, plays);
    let mut gain = 0.0;
    for t in 1..=horizon {
        gain += env.lookup_round(t, &a_star)?.reward_sum();
    }
    Ok(OracleGain {
        a_star,
        gain,
        exact: true,
        bracket: None,
    })
}

/// `a*` by bang-per-buck ratio with the proxy `(Sr/Sc) B`.
///
/// The bracket `((B - K) Sr/Sc, (B + 1) Sr/Sc)` holds for the expected gain
/// of playing `a*` until the budget runs out. By Wald's identity the gain is
/// `Sr/Sc` times the spend, and the spend is more than `B - K` because no
/// round costs more than `K`.
pub fn oracle_gain_stochastic(env: &StochasticEnv, cfg: &BanditConfig) -> OracleGain {
    let a_star = top_k_indices(&env.ratios(), cfg.plays);
    let sr: f64 = a_star.iter().map(|i| env.mean_rewards[i]).sum();
    let sc: f64 = a_star.iter().map(|i| env.mean_costs[i]).sum();
    let b = cfg.budget;
    OracleGain {
        a_star,
        gain: sr / sc * b,
        exact: false,
        bracket: Some(((b - cfg.plays as f64).max(0.0) * sr / sc, sr / sc * (b + 1.0))),
    }
}

/// Expected reward of the best fixed subset over `horizon` rounds.
pub fn oracle_gain_stochastic_horizon(env: &StochasticEnv, plays: usize, horizon: usize) -> OracleGain {
    let a_star = top_k_indices(&env.mean_rewards, plays);
    let per_round: f64 = a_star.iter().map(|i| env.mean_rewards[i]).sum();
    let gain = per_round * horizon as f64;
    OracleGain {
        a_star,
        gain,
        exact: true,
        bracket: Some((gain, gain)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::DistributionFamily;

    #[test]
    fn two_arm_hand_case() {
        let cfg = BanditConfig::new(2, 1, 3.0, 0.5);
        let env = AdversarialEnv::from_fn(10, 2, |_, i| (if i == 0 { 1.0 } else { 0.0 }, 1.0)).unwrap();
        let o = oracle_gain_adversarial(&env, &cfg).unwrap();
        assert_eq!(o.a_star.as_slice(), &[0]);
        assert_eq!(o.gain, 3.0);
    }

    #[test]
    fn identical_arms_pick_first_subset() {
        let cfg = BanditConfig::new(4, 2, 5.0, 0.5);
        let env = AdversarialEnv::from_fn(20, 4, |t, _| ((t % 3) as f64 / 2.0, 0.6)).unwrap();
        let o = oracle_gain_adversarial(&env, &cfg).unwrap();
        assert_eq!(o.a_star.as_slice(), &[0, 1]);
        for s in k_subsets(4, 2) {
            assert_eq!(fixed_subset_gain(&env, &s, 5.0).unwrap(), o.gain);
        }
    }

    #[test]
    fn all_arms_single_subset() {
        let cfg = BanditConfig::new(3, 3, 4.0, 0.5);
        let env = AdversarialEnv::from_fn(10, 3, |_, i| (0.5, 0.5 + 0.1 * i as f64)).unwrap();
        let o = oracle_gain_adversarial(&env, &cfg).unwrap();
        // 1.8 per round: two rounds affordable, the third is not
        assert_eq!(o.gain, 3.0);
        assert_eq!(o.a_star.len(), 3);
    }

    #[test]
    fn short_sequence_errors() {
        let cfg = BanditConfig::new(2, 1, 100.0, 0.5);
        let env = AdversarialEnv::from_fn(3, 2, |_, _| (1.0, 0.5)).unwrap();
        assert!(matches!(
            oracle_gain_adversarial(&env, &cfg),
            Err(BanditError::SequenceExhausted { .. })
        ));
    }

    #[test]
    fn stochastic_proxy_and_brackets() {
        let env = StochasticEnv::new(
            vec![0.9, 0.5],
            vec![0.9, 1.0],
            DistributionFamily::BernoulliScaled,
            0.5,
        )
        .unwrap();
        let cfg = BanditConfig::new(2, 1, 50.0, 0.5);
        let o = oracle_gain_stochastic(&env, &cfg);
        assert_eq!(o.a_star.as_slice(), &[0]);
        assert!((o.gain - 50.0).abs() < 1e-12);
        let (lo, hi) = o.bracket.unwrap();
        assert!(lo <= o.gain && o.gain <= hi);
    }

    #[test]
    fn greedy_matches_exact_on_stationary_columns() {
        let cfg = BanditConfig::new(5, 2, 20.0, 0.5);
        let env =
            AdversarialEnv::from_fn(60, 5, |_, i| (0.2 * i as f64, 1.0 - 0.1 * i as f64)).unwrap();
        let exact = oracle_gain_adversarial(&env, &cfg).unwrap();
        let greedy = oracle_gain_adversarial_greedy(&env, &cfg).unwrap();
        assert_eq!(exact.a_star, greedy.a_star);
        assert_eq!(exact.gain, greedy.gain);
        assert!(!greedy.exact);
    }
}
