//! UCB-MB: play the `K` arms with the largest optimistic bang-per-buck
//! estimates until the budget runs out.

use std::cmp::Ordering;

use rand::Rng;

use crate::config::BanditConfig;
use crate::env::{ArmSet, Environment, RoundOutcome};
use crate::error::Result;
use crate::rng::{stream, BanditRng};
use crate::trace::{EpisodeTrace, TraceRecorder};

/// Exploration bonus of one arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Optimism {
    Finite(f64),
    /// Too few samples for the confidence radius to be meaningful; the arm
    /// outranks every arm with a finite bonus.
    Infinite,
}

impl Optimism {
    pub fn value(self) -> f64 {
        match self {
            Self::Finite(e) => e,
            Self::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Self::Infinite)
    }
}

/// `e = x (1 + 1/c_min) / (c_min - x)` with `x = sqrt((K + 1) ln t / n)`,
/// or [`Optimism::Infinite`] when `x >= c_min`.
pub fn exploration_term(n: u64, t: usize, k: usize, c_min: f64) -> Optimism {
    let x = ((k as f64 + 1.0) * (t as f64).ln() / n as f64).sqrt();
    if c_min > x {
        Optimism::Finite(x * (1.0 + 1.0 / c_min) / (c_min - x))
    } else {
        Optimism::Infinite
    }
}

/// Suboptimal-choice counters. Each round that does not play the oracle set
/// increments the smallest counter among the played arms.
#[derive(Debug, Clone)]
pub struct SuboptimalCounters {
    pub a_star: ArmSet,
    pub counts: Vec<u64>,
    pub suboptimal_rounds: u64,
    rng: BanditRng,
}

impl SuboptimalCounters {
    pub fn new(a_star: ArmSet, n_arms: usize, seed: u64) -> Self {
        Self {
            a_star,
            counts: vec![0; n_arms],
            suboptimal_rounds: 0,
            rng: stream(seed, u64::MAX),
        }
    }

    fn record(&mut self, played: &ArmSet) {
        if *played == self.a_star {
            return;
        }
        self.suboptimal_rounds += 1;
        let min = played.iter().map(|i| self.counts[i]).min().unwrap_or(0);
        let ties: Vec<usize> = played.iter().filter(|&i| self.counts[i] == min).collect();
        let pick = ties[self.rng.random_range(0..ties.len())];
        self.counts[pick] += 1;
    }
}

#[derive(Debug, Clone)]
pub struct UcbState {
    /// Index of the next round to be played (the initial round is round 1).
    pub t: usize,
    pub plays: usize,
    pub c_min: f64,
    pub pull_counts: Vec<u64>,
    pub mean_reward: Vec<f64>,
    pub mean_cost: Vec<f64>,
    pub exploration: Vec<Optimism>,
    pub counters: Option<SuboptimalCounters>,
}

impl UcbState {
    /// State after observing the joint initial round in which every arm was
    /// played once.
    pub fn from_initial(cfg: &BanditConfig, init: &RoundOutcome) -> Self {
        let n = cfg.n_arms;
        let mut mean_reward = vec![0.0; n];
        let mut mean_cost = vec![cfg.c_min; n];
        for (i, r, c) in init.iter() {
            mean_reward[i] = r;
            mean_cost[i] = c;
        }
        Self {
            t: 2,
            plays: cfg.plays,
            c_min: cfg.c_min,
            pull_counts: vec![1; n],
            mean_reward,
            mean_cost,
            exploration: vec![Optimism::Infinite; n],
            counters: None,
        }
    }

    pub fn instrument(&mut self, counters: SuboptimalCounters) {
        self.counters = Some(counters);
    }

    /// Empirical bang-per-buck ratio of arm `i`.
    pub fn ratio(&self, i: usize) -> f64 {
        self.mean_reward[i] / self.mean_cost[i]
    }

    /// `U_i = ratio_i + e_i` (infinite for sentinel arms).
    pub fn upper_bound(&self, i: usize) -> f64 {
        self.ratio(i) + self.exploration[i].value()
    }
}

/// Plays every arm once (round 1) and builds the initial state.
pub fn ucb_init<R: Rng + ?Sized>(
    cfg: &BanditConfig,
    env: &Environment,
    rng: &mut R,
) -> Result<(UcbState, RoundOutcome)> {
    let all = ArmSet::first(cfg.n_arms);
    let outcome = env.observe(1, &all, rng)?;
    Ok((UcbState::from_initial(cfg, &outcome), outcome))
}

fn rank(state: &UcbState, a: usize, b: usize) -> Ordering {
    // descending by optimism, then by U; ascending index on ties
    let (ea, eb) = (state.exploration[a], state.exploration[b]);
    match (ea.is_infinite(), eb.is_infinite()) {
        (true, false) => Ordering::Less,
        (false, true) => Ordering::Greater,
        (true, true) => a.cmp(&b),
        (false, false) => state
            .upper_bound(b)
            .total_cmp(&state.upper_bound(a))
            .then(a.cmp(&b)),
    }
}

/// The `K` arms with the largest upper confidence bounds.
pub fn ucb_select(state: &UcbState) -> ArmSet {
    let mut order: Vec<usize> = (0..state.pull_counts.len()).collect();
    order.sort_by(|&a, &b| rank(state, a, b));
    order.truncate(state.plays);
    ArmSet::new(order).expect("distinct indices")
}

/// Folds a paid round into the running means and advances the round counter.
pub fn ucb_update(state: &mut UcbState, outcome: &RoundOutcome) {
    for (i, r, c) in outcome.iter() {
        state.pull_counts[i] += 1;
        let n = state.pull_counts[i] as f64;
        state.mean_reward[i] += (r - state.mean_reward[i]) / n;
        state.mean_cost[i] += (c - state.mean_cost[i]) / n;
    }
    if let Some(counters) = state.counters.as_mut() {
        counters.record(&outcome.arms);
    }
    state.t += 1;
    let (t, k, c_min) = (state.t, state.plays, state.c_min);
    for (e, &n) in state.exploration.iter_mut().zip(&state.pull_counts) {
        *e = exploration_term(n, t, k, c_min);
    }
}

/// Runs one UCB-MB episode and returns the trace with the final state.
pub fn ucb_run_episode_with_state<R: Rng + ?Sized>(
    cfg: &BanditConfig,
    env: &Environment,
    rng: &mut R,
    counters: Option<SuboptimalCounters>,
) -> Result<(EpisodeTrace, UcbState)> {
    let mut rec = TraceRecorder::new(cfg.budget);
    let (mut state, init) = ucb_init(cfg, env, rng)?;
    if !rec.settle(&init, None) {
        return Ok((rec.finish(Some(init)), state));
    }
    if let Some(c) = counters {
        state.instrument(c);
    }
    loop {
        let arms = ucb_select(&state);
        let outcome = env.observe(state.t, &arms, rng)?;
        if !rec.settle(&outcome, None) {
            return Ok((rec.finish(Some(outcome)), state));
        }
        ucb_update(&mut state, &outcome);
    }
}

pub fn ucb_run_episode<R: Rng + ?Sized>(
    cfg: &BanditConfig,
    env: &Environment,
    rng: &mut R,
) -> Result<EpisodeTrace> {
    ucb_run_episode_with_state(cfg, env, rng, None).map(|(trace, _)| trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{AdversarialEnv, DistributionFamily, StochasticEnv};

    fn state_with(ratios: &[f64], e: &[Optimism], k: usize) -> UcbState {
        let n = ratios.len();
        UcbState {
            t: 10,
            plays: k,
            c_min: 0.5,
            pull_counts: vec![5; n],
            mean_reward: ratios.iter().map(|r| r / 2.0).collect(),
            mean_cost: vec![0.5; n],
            exploration: e.to_vec(),
            counters: None,
        }
    }

    #[test]
    fn exploration_hand_value() {
        let t_e = std::f64::consts::E;
        // t must be an integer round index; evaluate the formula at ln t = 1 directly
        let x = (2.0f64 * t_e.ln() / 32.0).sqrt();
        assert!((x - 0.25).abs() < 1e-15);
        let e = x * (1.0 + 1.0 / 0.5) / (0.5 - x);
        assert!((e - 3.0).abs() < 1e-12);
        // and through the function at a nearby integer round
        match exploration_term(32, 3, 1, 0.5) {
            Optimism::Finite(v) => {
                let x = (2.0 * 3f64.ln() / 32.0).sqrt();
                assert!((v - x * 3.0 / (0.5 - x)).abs() < 1e-12);
            }
            Optimism::Infinite => panic!("expected finite"),
        }
    }

    #[test]
    fn exploration_sentinel_and_limit() {
        assert!(exploration_term(1, 100, 2, 0.5).is_infinite());
        let mut last = f64::INFINITY;
        for n in [100u64, 1_000, 10_000, 100_000, 1_000_000] {
            let e = exploration_term(n, 50, 2, 0.5).value();
            assert!(e < last);
            last = e;
        }
        assert!(last < 0.05);
    }

    #[test]
    fn select_all_sentinel_picks_lowest() {
        let s = state_with(&[0.2, 0.9, 0.5, 0.7], &[Optimism::Infinite; 4], 2);
        assert_eq!(ucb_select(&s).as_slice(), &[0, 1]);
    }

    #[test]
    fn select_by_upper_bound() {
        let s = state_with(&[0.9, 1.5, 1.1], &[Optimism::Finite(0.0); 3], 2);
        assert_eq!(ucb_select(&s).as_slice(), &[1, 2]);
    }

    #[test]
    fn select_tie_lower_index() {
        let s = state_with(&[1.0, 1.2, 1.0], &[Optimism::Finite(0.1); 3], 2);
        assert_eq!(ucb_select(&s).as_slice(), &[0, 1]);
        let s = state_with(&[1.0, 1.0, 1.0], &[Optimism::Finite(0.1); 3], 1);
        assert_eq!(ucb_select(&s).as_slice(), &[0]);
    }

    #[test]
    fn sentinel_beats_finite() {
        let e = [
            Optimism::Finite(100.0),
            Optimism::Infinite,
            Optimism::Finite(5.0),
        ];
        let s = state_with(&[3.0, 0.1, 2.0], &e, 1);
        assert_eq!(ucb_select(&s).as_slice(), &[1]);
    }

    #[test]
    fn update_incremental_mean() {
        let mut s = state_with(&[1.0, 1.0], &[Optimism::Infinite; 2], 1);
        s.pull_counts = vec![1, 1];
        s.mean_reward = vec![0.5, 0.5];
        let o = RoundOutcome {
            arms: ArmSet::new(vec![0]).unwrap(),
            rewards: vec![1.0],
            costs: vec![0.5],
        };
        ucb_update(&mut s, &o);
        assert_eq!(s.mean_reward, vec![0.75, 0.5]);
        assert_eq!(s.pull_counts, vec![2, 1]);
        assert_eq!(s.t, 11);
    }

    #[test]
    fn counters_skip_optimal_rounds() {
        let mut s = state_with(&[1.0, 1.0, 1.0], &[Optimism::Infinite; 3], 2);
        s.instrument(SuboptimalCounters::new(ArmSet::new(vec![0, 1]).unwrap(), 3, 1));
        let o = |a: Vec<usize>| RoundOutcome {
            arms: ArmSet::new(a).unwrap(),
            rewards: vec![0.5, 0.5],
            costs: vec![0.5, 0.5],
        };
        ucb_update(&mut s, &o(vec![0, 1]));
        assert_eq!(s.counters.as_ref().unwrap().counts, vec![0, 0, 0]);
        ucb_update(&mut s, &o(vec![1, 2]));
        ucb_update(&mut s, &o(vec![1, 2]));
        let c = s.counters.as_ref().unwrap();
        assert_eq!(c.counts.iter().sum::<u64>(), 2);
        assert_eq!(c.suboptimal_rounds, 2);
        // the second increment must go to whichever of {1, 2} is still zero
        assert_eq!(c.counts[1] + c.counts[2], 2);
        assert!(c.counts[1] == 1 && c.counts[2] == 1);
    }

    fn point_env(n: usize, c: f64) -> Environment {
        StochasticEnv::new(vec![1.0; n], vec![c; n], DistributionFamily::BernoulliScaled, c)
            .unwrap()
            .into()
    }

    #[test]
    fn init_from_point_mass() {
        let cfg = BanditConfig::new(3, 1, 10.0, 0.5);
        let (s, o) = ucb_init(&cfg, &point_env(3, 0.5), &mut stream(1, 0)).unwrap();
        assert_eq!(o.arms.len(), 3);
        assert_eq!(s.mean_reward, vec![1.0; 3]);
        assert_eq!(s.mean_cost, vec![0.5; 3]);
        assert_eq!(s.pull_counts, vec![1; 3]);
        assert!(s.exploration.iter().all(|e| e.is_infinite()));
    }

    #[test]
    fn hand_simulated_episode() {
        let cfg = BanditConfig::new(1, 1, 2.0, 0.5);
        let trace = ucb_run_episode(&cfg, &point_env(1, 0.5), &mut stream(0, 0)).unwrap();
        assert_eq!(trace.gain, 4.0);
        assert_eq!(trace.rounds.len(), 4);
        assert_eq!(trace.stopping_time, 5);
        assert_eq!(trace.remaining_budget(), 0.0);
        assert!(trace.terminal.is_some());
    }

    #[test]
    fn unaffordable_init_ends_immediately() {
        let cfg = BanditConfig::new(3, 1, 1.0, 0.5);
        let trace = ucb_run_episode(&cfg, &point_env(3, 0.5), &mut stream(0, 0)).unwrap();
        assert_eq!(trace.gain, 0.0);
        assert_eq!(trace.stopping_time, 1);
        assert_eq!(trace.budget_spent, 0.0);
    }

    #[test]
    fn budget_just_past_init() {
        // init costs 1.5, one more round costs 0.5
        let cfg = BanditConfig::new(3, 1, 2.0, 0.5);
        let trace = ucb_run_episode(&cfg, &point_env(3, 0.5), &mut stream(0, 0)).unwrap();
        assert_eq!(trace.gain, 4.0);
        assert_eq!(trace.stopping_time, 3);
    }

    #[test]
    fn selection_deterministic_given_observations() {
        let env: Environment =
            AdversarialEnv::from_fn(400, 3, |t, i| (((t * 7 + i * 3) % 10) as f64 / 10.0, 0.5))
                .unwrap()
                .into();
        let cfg = BanditConfig::new(3, 2, 100.0, 0.5);
        let a = ucb_run_episode(&cfg, &env, &mut stream(1, 0)).unwrap();
        let b = ucb_run_episode(&cfg, &env, &mut stream(2, 0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fixed_seed_reproducible() {
        let env: Environment = StochasticEnv::new(
            vec![0.9, 0.4, 0.6],
            vec![0.5, 0.8, 0.6],
            DistributionFamily::BetaScaled,
            0.5,
        )
        .unwrap()
        .into();
        let cfg = BanditConfig::new(3, 2, 50.0, 0.5);
        let a = ucb_run_episode(&cfg, &env, &mut stream(9, 3)).unwrap();
        let b = ucb_run_episode(&cfg, &env, &mut stream(9, 3)).unwrap();
        assert_eq!(a, b);
    }
}
