//! Reward/cost generators: i.i.d. stochastic arms and oblivious adversarial
//! sequences.

use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::config::BanditConfig;
use crate::error::{config_err, BanditError, Result};

/// A set of distinct arm indices, kept sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct ArmSet(Vec<usize>);

impl ArmSet {
    /// Sorts the indices; fails on duplicates.
    pub fn new(mut arms: Vec<usize>) -> Result<Self> {
        arms.sort_unstable();
        if arms.windows(2).any(|w| w[0] == w[1]) {
            return config_err(format!("arm set contains duplicates: {arms:?}"));
        }
        Ok(Self(arms))
    }

    /// `0..k`.
    pub fn first(k: usize) -> Self {
        Self((0..k).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, arm: usize) -> bool {
        self.0.binary_search(&arm).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub(crate) fn check_bounds(&self, n_arms: usize) -> Result<()> {
        match self.0.last() {
            Some(&index) if index >= n_arms => Err(BanditError::ArmIndex { index, n_arms }),
            _ => Ok(()),
        }
    }
}

impl TryFrom<Vec<usize>> for ArmSet {
    type Error = BanditError;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ArmSet> for Vec<usize> {
    fn from(s: ArmSet) -> Self {
        s.0
    }
}

/// Semi-bandit feedback of a single round, aligned with `arms`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundOutcome {
    pub arms: ArmSet,
    pub rewards: Vec<f64>,
    pub costs: Vec<f64>,
}

impl RoundOutcome {
    pub fn reward_sum(&self) -> f64 {
        self.rewards.iter().sum()
    }

    pub fn cost_sum(&self) -> f64 {
        self.costs.iter().sum()
    }

    /// `(arm, reward, cost)` triples.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        self.arms
            .iter()
            .zip(self.rewards.iter().zip(&self.costs))
            .map(|(a, (&r, &c))| (a, r, c))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DistributionFamily {
    /// Reward in {0, 1}, cost in {c_min, 1}.
    #[default]
    BernoulliScaled,
    /// Beta draws mapped affinely onto the supports.
    BetaScaled,
}

fn default_concentration() -> f64 {
    4.0
}

/// Arms with i.i.d. rewards in `[0, 1]` and costs in `[c_min, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StochasticEnv {
    pub mean_rewards: Vec<f64>,
    pub mean_costs: Vec<f64>,
    #[serde(default)]
    pub family: DistributionFamily,
    /// Beta shape concentration (a + b); only used by `BetaScaled`.
    #[serde(default = "default_concentration")]
    pub concentration: f64,
    pub c_min: f64,
}

impl StochasticEnv {
    pub fn new(
        mean_rewards: Vec<f64>,
        mean_costs: Vec<f64>,
        family: DistributionFamily,
        c_min: f64,
    ) -> Result<Self> {
        let env = Self {
            mean_rewards,
            mean_costs,
            family,
            concentration: default_concentration(),
            c_min,
        };
        env.check()?;
        Ok(env)
    }

    pub fn with_concentration(mut self, concentration: f64) -> Result<Self> {
        self.concentration = concentration;
        self.check()?;
        Ok(self)
    }

    pub fn n_arms(&self) -> usize {
        self.mean_rewards.len()
    }

    /// Bang-per-buck ratio `mu_r / mu_c` of every arm.
    pub fn ratios(&self) -> Vec<f64> {
        self.mean_rewards
            .iter()
            .zip(&self.mean_costs)
            .map(|(r, c)| r / c)
            .collect()
    }

    fn check(&self) -> Result<()> {
        if self.mean_rewards.len() != self.mean_costs.len() {
            return config_err("mean_rewards and mean_costs differ in length");
        }
        if !(self.c_min > 0.0 && self.c_min < 1.0) {
            return config_err("c_min must lie in (0, 1)");
        }
        if let Some(r) = self.mean_rewards.iter().find(|&&r| !(r > 0.0 && r <= 1.0)) {
            return config_err(format!("mean reward {r} outside (0, 1]"));
        }
        if let Some(c) = self
            .mean_costs
            .iter()
            .find(|&&c| !(c >= self.c_min && c <= 1.0))
        {
            return config_err(format!("mean cost {c} outside [c_min, 1]"));
        }
        if self.family == DistributionFamily::BetaScaled && !(self.concentration > 0.0) {
            return config_err("Beta concentration must be positive");
        }
        Ok(())
    }

    /// Checks the environment against a problem configuration.
    pub fn validate(&self, cfg: &BanditConfig) -> Result<()> {
        self.check()?;
        if self.n_arms() != cfg.n_arms {
            return config_err(format!(
                "environment has {} arms but N = {}",
                self.n_arms(),
                cfg.n_arms
            ));
        }
        if (self.c_min - cfg.c_min).abs() > 0.0 {
            return config_err("environment c_min differs from configuration c_min");
        }
        Ok(())
    }

    /// Draws one reward and one cost for each arm in `arms`.
    pub fn sample_round<R: Rng + ?Sized>(&self, arms: &ArmSet, rng: &mut R) -> Result<RoundOutcome> {
        arms.check_bounds(self.n_arms())?;
        let mut rewards = Vec::with_capacity(arms.len());
        let mut costs = Vec::with_capacity(arms.len());
        for arm in arms.iter() {
            let (r, c) = self.sample_arm(arm, rng);
            rewards.push(r);
            costs.push(c);
        }
        Ok(RoundOutcome {
            arms: arms.clone(),
            rewards,
            costs,
        })
    }

    fn sample_arm<R: Rng + ?Sized>(&self, arm: usize, rng: &mut R) -> (f64, f64) {
        let mu_r = self.mean_rewards[arm];
        let span = 1.0 - self.c_min;
        // mean of the cost on the unit interval before the affine map
        let mix = ((self.mean_costs[arm] - self.c_min) / span).clamp(0.0, 1.0);
        match self.family {
            DistributionFamily::BernoulliScaled => {
                let r = if rng.random::<f64>() < mu_r { 1.0 } else { 0.0 };
                let c = if rng.random::<f64>() < mix { 1.0 } else { self.c_min };
                (r, c)
            }
            DistributionFamily::BetaScaled => {
                let r = beta_draw(mu_r, self.concentration, rng);
                let c = self.c_min + span * beta_draw(mix, self.concentration, rng);
                (r, c.clamp(self.c_min, 1.0))
            }
        }
    }
}

fn beta_draw<R: Rng + ?Sized>(mean: f64, concentration: f64, rng: &mut R) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    if mean >= 1.0 {
        return 1.0;
    }
    // shape parameters are positive here, so construction cannot fail
    let beta = Beta::new(mean * concentration, (1.0 - mean) * concentration)
        .expect("positive Beta shapes");
    beta.sample(rng).clamp(0.0, 1.0)
}

#[derive(Serialize, Deserialize)]
struct AdversarialRepr {
    rewards: Vec<Vec<f64>>,
    costs: Vec<Vec<f64>>,
}

/// Reward and cost sequences fixed before play, stored row-major
/// (`rows x n_arms`). Rounds are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AdversarialRepr", into = "AdversarialRepr")]
pub struct AdversarialEnv {
    n_arms: usize,
    rows: usize,
    rewards: Vec<f64>,
    costs: Vec<f64>,
}

impl TryFrom<AdversarialRepr> for AdversarialEnv {
    type Error = BanditError;

    fn try_from(repr: AdversarialRepr) -> Result<Self> {
        Self::from_rows(&repr.rewards, &repr.costs)
    }
}

impl From<AdversarialEnv> for AdversarialRepr {
    fn from(env: AdversarialEnv) -> Self {
        let split = |v: &[f64]| v.chunks(env.n_arms).map(<[f64]>::to_vec).collect();
        AdversarialRepr {
            rewards: split(&env.rewards),
            costs: split(&env.costs),
        }
    }
}

impl AdversarialEnv {
    pub fn from_rows(rewards: &[Vec<f64>], costs: &[Vec<f64>]) -> Result<Self> {
        if rewards.len() != costs.len() {
            return config_err("reward and cost matrices have different row counts");
        }
        let n_arms = rewards.first().map_or(0, Vec::len);
        if n_arms == 0 {
            return config_err("adversarial matrices must have at least one row and column");
        }
        if rewards.iter().chain(costs).any(|row| row.len() != n_arms) {
            return config_err("ragged adversarial matrix");
        }
        let env = Self {
            n_arms,
            rows: rewards.len(),
            rewards: rewards.concat(),
            costs: costs.concat(),
        };
        env.check_ranges()?;
        Ok(env)
    }

    /// Builds `rows` rounds from `f(round_index_0based, arm) -> (reward, cost)`.
    pub fn from_fn(
        rows: usize,
        n_arms: usize,
        mut f: impl FnMut(usize, usize) -> (f64, f64),
    ) -> Result<Self> {
        let mut rewards = Vec::with_capacity(rows * n_arms);
        let mut costs = Vec::with_capacity(rows * n_arms);
        for t in 0..rows {
            for i in 0..n_arms {
                let (r, c) = f(t, i);
                rewards.push(r);
                costs.push(c);
            }
        }
        if rows == 0 || n_arms == 0 {
            return config_err("adversarial matrices must have at least one row and column");
        }
        let env = Self {
            n_arms,
            rows,
            rewards,
            costs,
        };
        env.check_ranges()?;
        Ok(env)
    }

    fn check_ranges(&self) -> Result<()> {
        if let Some(r) = self.rewards.iter().find(|&&r| !(0.0..=1.0).contains(&r)) {
            return config_err(format!("reward {r} outside [0, 1]"));
        }
        if let Some(c) = self.costs.iter().find(|&&c| !(c > 0.0 && c <= 1.0)) {
            return config_err(format!("cost {c} outside (0, 1]"));
        }
        Ok(())
    }

    pub fn n_arms(&self) -> usize {
        self.n_arms
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn reward(&self, t: usize, arm: usize) -> f64 {
        self.rewards[(t - 1) * self.n_arms + arm]
    }

    pub fn cost(&self, t: usize, arm: usize) -> f64 {
        self.costs[(t - 1) * self.n_arms + arm]
    }

    /// Row-`t` entries for `arms`. Pure.
    pub fn lookup_round(&self, t: usize, arms: &ArmSet) -> Result<RoundOutcome> {
        arms.check_bounds(self.n_arms)?;
        if t == 0 || t > self.rows {
            return Err(BanditError::SequenceExhausted {
                round: t,
                rows: self.rows,
            });
        }
        Ok(RoundOutcome {
            arms: arms.clone(),
            rewards: arms.iter().map(|i| self.reward(t, i)).collect(),
            costs: arms.iter().map(|i| self.cost(t, i)).collect(),
        })
    }

    /// Default sequence length for a configuration: one more row than the
    /// longest affordable episode.
    pub fn default_rows(cfg: &BanditConfig) -> usize {
        cfg.max_rounds() + 1
    }

    pub fn validate(&self, cfg: &BanditConfig) -> Result<()> {
        if self.n_arms != cfg.n_arms {
            return config_err(format!(
                "environment has {} arms but N = {}",
                self.n_arms, cfg.n_arms
            ));
        }
        if let Some(c) = self.costs.iter().find(|&&c| c < cfg.c_min) {
            return config_err(format!("cost {c} below c_min = {}", cfg.c_min));
        }
        let needed = match cfg.horizon {
            Some(t) => t.max(cfg.max_rounds()),
            None => cfg.max_rounds(),
        };
        if self.rows < needed {
            return config_err(format!(
                "sequence has {} rows but the configuration may need {needed}",
                self.rows
            ));
        }
        Ok(())
    }

    /// Rounds (1-based) in which some K-subset has total reward below its
    /// total cost. The minimising subset takes the K largest `c - r`.
    pub fn rationality_violations(&self, k: usize) -> Vec<usize> {
        let mut gaps = vec![0.0; self.n_arms];
        (1..=self.rows)
            .filter(|&t| {
                for (i, g) in gaps.iter_mut().enumerate() {
                    *g = self.cost(t, i) - self.reward(t, i);
                }
                gaps.sort_unstable_by(|a, b| b.total_cmp(a));
                gaps[..k].iter().sum::<f64>() > 0.0
            })
            .collect()
    }
}

/// Either environment kind behind one observation interface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Environment {
    Stochastic(StochasticEnv),
    Adversarial(AdversarialEnv),
}

impl Environment {
    pub fn n_arms(&self) -> usize {
        match self {
            Self::Stochastic(e) => e.n_arms(),
            Self::Adversarial(e) => e.n_arms(),
        }
    }

    /// Outcome of playing `arms` in round `t` (1-based).
    pub fn observe<R: Rng + ?Sized>(
        &self,
        t: usize,
        arms: &ArmSet,
        rng: &mut R,
    ) -> Result<RoundOutcome> {
        match self {
            Self::Stochastic(e) => e.sample_round(arms, rng),
            Self::Adversarial(e) => e.lookup_round(t, arms),
        }
    }

    pub fn validate(&self, cfg: &BanditConfig) -> Result<()> {
        match self {
            Self::Stochastic(e) => e.validate(cfg),
            Self::Adversarial(e) => e.validate(cfg),
        }
    }
}

impl From<StochasticEnv> for Environment {
    fn from(e: StochasticEnv) -> Self {
        Self::Stochastic(e)
    }
}

impl From<AdversarialEnv> for Environment {
    fn from(e: AdversarialEnv) -> Self {
        Self::Adversarial(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn arms(v: &[usize]) -> ArmSet {
        ArmSet::new(v.to_vec()).unwrap()
    }

    #[test]
    fn arm_set_rejects_duplicates() {
        assert!(ArmSet::new(vec![1, 1]).is_err());
        assert_eq!(arms(&[3, 0, 2]).as_slice(), &[0, 2, 3]);
    }

    #[test]
    fn point_mass_rewards() {
        let env = StochasticEnv::new(
            vec![1.0; 3],
            vec![0.5; 3],
            DistributionFamily::BernoulliScaled,
            0.5,
        )
        .unwrap();
        let mut rng = stream(1, 0);
        for _ in 0..200 {
            let o = env.sample_round(&arms(&[0, 2]), &mut rng).unwrap();
            assert_eq!(o.rewards, vec![1.0, 1.0]);
            assert_eq!(o.costs, vec![0.5, 0.5]);
        }
    }

    #[test]
    fn supports_respected() {
        for family in [DistributionFamily::BernoulliScaled, DistributionFamily::BetaScaled] {
            let env = StochasticEnv::new(vec![0.3, 0.9], vec![0.7, 0.25], family, 0.25).unwrap();
            let mut rng = stream(2, 0);
            for _ in 0..2000 {
                let o = env.sample_round(&arms(&[0, 1]), &mut rng).unwrap();
                assert!(o.rewards.iter().all(|r| (0.0..=1.0).contains(r)));
                assert!(o.costs.iter().all(|c| (0.25..=1.0).contains(c)));
            }
        }
    }

    #[test]
    fn sample_means_converge() {
        for family in [DistributionFamily::BernoulliScaled, DistributionFamily::BetaScaled] {
            let env = StochasticEnv::new(vec![0.7], vec![0.6], family, 0.3).unwrap();
            let mut rng = stream(3, 1);
            let n = 100_000;
            let (mut sr, mut sc) = (0.0, 0.0);
            for _ in 0..n {
                let o = env.sample_round(&arms(&[0]), &mut rng).unwrap();
                sr += o.rewards[0];
                sc += o.costs[0];
            }
            assert!((sr / n as f64 - 0.7).abs() < 0.01, "{family:?} reward");
            assert!((sc / n as f64 - 0.6).abs() < 0.01, "{family:?} cost");
        }
    }

    #[test]
    fn stochastic_rejects_bad_means() {
        let f = DistributionFamily::BernoulliScaled;
        assert!(StochasticEnv::new(vec![0.0], vec![0.5], f, 0.5).is_err());
        assert!(StochasticEnv::new(vec![0.5], vec![0.4], f, 0.5).is_err());
        assert!(StochasticEnv::new(vec![0.5, 0.5], vec![0.5], f, 0.5).is_err());
    }

    #[test]
    fn index_out_of_range() {
        let env =
            StochasticEnv::new(vec![0.5], vec![0.5], DistributionFamily::BernoulliScaled, 0.5)
                .unwrap();
        let err = env.sample_round(&arms(&[1]), &mut stream(0, 0)).unwrap_err();
        assert_eq!(err, BanditError::ArmIndex { index: 1, n_arms: 1 });
    }

    #[test]
    fn constant_lookup_is_pure() {
        let env = AdversarialEnv::from_fn(5, 3, |_, _| (0.5, 0.2)).unwrap();
        let a = env.lookup_round(3, &arms(&[0, 2])).unwrap();
        assert_eq!(a.rewards, vec![0.5, 0.5]);
        assert_eq!(a.costs, vec![0.2, 0.2]);
        assert_eq!(a, env.lookup_round(3, &arms(&[0, 2])).unwrap());
    }

    #[test]
    fn lookup_past_end() {
        let env = AdversarialEnv::from_fn(5, 3, |_, _| (0.5, 0.2)).unwrap();
        assert_eq!(
            env.lookup_round(6, &arms(&[0])).unwrap_err(),
            BanditError::SequenceExhausted { round: 6, rows: 5 }
        );
    }

    #[test]
    fn rows_must_cover_budget() {
        let cfg = BanditConfig::new(2, 1, 10.0, 0.5);
        let short = AdversarialEnv::from_fn(20, 2, |_, _| (0.5, 0.5)).unwrap();
        assert!(short.validate(&cfg).is_ok());
        let shorter = AdversarialEnv::from_fn(19, 2, |_, _| (0.5, 0.5)).unwrap();
        assert!(shorter.validate(&cfg).is_err());
        assert_eq!(AdversarialEnv::default_rows(&cfg), 21);
    }

    #[test]
    fn rationality_scan() {
        // row 1: every pair pays off; row 2: arms 0 and 1 together cost more than they earn
        let env = AdversarialEnv::from_rows(
            &[vec![0.9, 0.9, 0.9], vec![0.1, 0.5, 1.0]],
            &[vec![0.5, 0.5, 0.5], vec![0.5, 0.5, 0.5]],
        )
        .unwrap();
        assert_eq!(env.rationality_violations(2), vec![2]);
    }

    #[test]
    fn json_shape() {
        let env: Environment = serde_json::from_str(
            r#"{"type":"adversarial","rewards":[[0.1,0.2],[0.3,0.4]],"costs":[[0.5,0.5],[1,1]]}"#,
        )
        .unwrap();
        let Environment::Adversarial(a) = &env else {
            panic!("wrong variant")
        };
        assert_eq!(a.reward(2, 1), 0.4);
        assert_eq!(a.cost(2, 0), 1.0);
        let back = serde_json::to_value(&env).unwrap();
        assert_eq!(back["type"], "adversarial");
        assert_eq!(back["rewards"][1][0], 0.3);
    }
}
