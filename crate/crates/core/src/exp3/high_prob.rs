use rand::Rng;

use super::{exp3mb_round, run_budgeted, Exp3State, Exp3Variant};
use crate::config::BanditConfig;
use crate::env::Environment;
use crate::error::{config_err, Result};
use crate::trace::{EpisodeTrace, TraceRecorder};

/// Parameters of Exp3.P.M / Exp3.P.M.B fixed before the first round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HighProbSetup {
    pub gamma: f64,
    pub alpha: f64,
    /// Common initial log-weight of every arm.
    pub log_w_init: f64,
    /// Initial confidence width of every arm.
    pub sigma_init: f64,
    /// Arm `i` gains `sigma_step / p_i` of width per round; its weight bonus
    /// is `alpha` times that.
    pub sigma_step: f64,
}

impl HighProbSetup {
    pub fn state(&self, n: usize, k: usize, variant: Exp3Variant) -> Result<Exp3State> {
        let mut state = Exp3State::new(n, k, self.gamma, variant)?;
        state.alpha = Some(self.alpha);
        state.log_weights.reset(self.log_w_init);
        state.sigma_acc = vec![self.sigma_init; n];
        state.sigma_step = self.sigma_step;
        Ok(state)
    }
}

/// `(N - K) / (N - 1)`, zero when every arm is played.
fn spread_fraction(n: usize, k: usize) -> f64 {
    if k >= n {
        0.0
    } else {
        (n - k) as f64 / (n - 1) as f64
    }
}

fn check_common(n: usize, k: usize, delta: f64) -> Result<()> {
    if k == 0 || k > n {
        return config_err(format!("need 1 <= K <= N, got K = {k}, N = {n}"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return config_err("delta must lie in (0, 1)");
    }
    Ok(())
}

/// Fixed-horizon tuning: `gamma = min(3/5, (3/sqrt 5) sqrt(N ln(N/K) / (K T)))`,
/// `alpha = 2 sqrt((N-K)/(N-1) ln(NT/delta))`,
/// `w_i(1) = exp(alpha gamma K^2 sqrt(T/N) / 3)`.
///
/// With `K = N` the tuned rate is zero; every arm is played regardless, so
/// the `3/5` clamp is used instead.
pub fn exp3pm_init_update_spec(n: usize, k: usize, horizon: usize, delta: f64) -> Result<HighProbSetup> {
    check_common(n, k, delta)?;
    if horizon < 2 {
        return config_err("T must be at least 2");
    }
    let (n_f, k_f, t_f) = (n as f64, k as f64, horizon as f64);
    let alpha = 2.0 * (spread_fraction(n, k) * (n_f * t_f / delta).ln()).sqrt();
    let tuned = 3.0 / 5f64.sqrt() * (n_f * (n_f / k_f).ln() / (k_f * t_f)).sqrt();
    let gamma = if tuned > 0.0 { tuned.min(0.6) } else { 0.6 };
    let root_nt = (n_f * t_f).sqrt();
    Ok(HighProbSetup {
        gamma,
        alpha,
        log_w_init: alpha * gamma * k_f * k_f * (t_f / n_f).sqrt() / 3.0,
        sigma_init: k_f * root_nt,
        sigma_step: 1.0 / root_nt,
    })
}

/// Budget tuning with `G_max` replaced by `B / c_min`:
/// `gamma = min(1/(1 + 2(1-c)/(3c)), sqrt(3N ln(N/K) / ((G_max - B)(1 + 2(1-c)/(3c)))))`,
/// `alpha = 2 sqrt 6 sqrt((N-K)/(N-1) ln(NB/(K c delta)))`,
/// `w_i(1) = exp(alpha gamma K^2 sqrt(B/(N K c)) / 3)`.
pub fn exp3pmb_init_update_spec(
    n: usize,
    k: usize,
    budget: f64,
    c_min: f64,
    delta: f64,
) -> Result<HighProbSetup> {
    check_common(n, k, delta)?;
    if !(budget > 0.0) {
        return config_err("B must be positive");
    }
    if !(c_min > 0.0 && c_min <= 1.0) {
        return config_err("c_min must lie in (0, 1]");
    }
    let (n_f, k_f) = (n as f64, k as f64);
    let log_arg = n_f * budget / (k_f * c_min * delta);
    let alpha = 2.0 * 6f64.sqrt() * (spread_fraction(n, k) * log_arg.ln()).sqrt();

    let correction = 1.0 + 2.0 * (1.0 - c_min) / (3.0 * c_min);
    let g_max_minus_b = budget / c_min - budget;
    let tuned = (3.0 * n_f * (n_f / k_f).ln() / (g_max_minus_b * correction)).sqrt();
    let clamp = 1.0 / correction;
    // tuned is +inf at c_min = 1 and 0 at K = N; both fall back to the clamp
    let gamma = if tuned > 0.0 { tuned.min(clamp) } else { clamp };

    let scale = (budget / (n_f * k_f * c_min)).sqrt();
    Ok(HighProbSetup {
        gamma,
        alpha,
        log_w_init: alpha * gamma * k_f * k_f * scale / 3.0,
        sigma_init: k_f * scale,
        sigma_step: (k_f * c_min).sqrt() / (n_f * budget).sqrt(),
    })
}

fn horizon_of(cfg: &BanditConfig) -> Result<usize> {
    cfg.horizon
        .ok_or_else(|| crate::error::BanditError::Config("Exp3.P.M needs a horizon T".into()))
}

/// Exp3.P.M for `T` rounds: rewards only, no budget.
pub fn exp3pm_run<R: Rng + ?Sized>(
    cfg: &BanditConfig,
    env: &Environment,
    rng: &mut R,
) -> Result<EpisodeTrace> {
    exp3pm_run_with_state(cfg, env, rng).map(|(trace, _)| trace)
}

pub fn exp3pm_run_with_state<R: Rng + ?Sized>(
    cfg: &BanditConfig,
    env: &Environment,
    rng: &mut R,
) -> Result<(EpisodeTrace, Exp3State)> {
    let horizon = horizon_of(cfg)?;
    let setup = exp3pm_init_update_spec(cfg.n_arms, cfg.plays, horizon, cfg.confidence)?;
    let mut state = setup.state(cfg.n_arms, cfg.plays, Exp3Variant::Pm)?;
    let mut rec = TraceRecorder::new(cfg.budget);
    for t in 1..=horizon {
        let round = exp3mb_round(&mut state, env, t, f64::INFINITY, rng)?;
        rec.credit(&round.outcome, Some(round.probabilities.as_slice()));
    }
    Ok((rec.finish(None), state))
}

/// Exp3.P.M.B: budgeted play with the confidence-augmented update and the
/// fixed tuning above.
pub fn exp3pmb_run<R: Rng + ?Sized>(
    cfg: &BanditConfig,
    env: &Environment,
    rng: &mut R,
) -> Result<EpisodeTrace> {
    exp3pmb_run_with_state(cfg, env, rng).map(|(trace, _)| trace)
}

pub fn exp3pmb_run_with_state<R: Rng + ?Sized>(
    cfg: &BanditConfig,
    env: &Environment,
    rng: &mut R,
) -> Result<(EpisodeTrace, Exp3State)> {
    let setup = exp3pmb_init_update_spec(
        cfg.n_arms,
        cfg.plays,
        cfg.budget,
        cfg.c_min,
        cfg.confidence,
    )?;
    let mut state = setup.state(cfg.n_arms, cfg.plays, Exp3Variant::Pmb)?;
    let trace = run_budgeted(&mut state, cfg, env, rng)?;
    Ok((trace, state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::AdversarialEnv;
    use crate::rng::stream;

    #[test]
    fn pm_alpha_hand_value() {
        let s = exp3pm_init_update_spec(10, 2, 1000, 0.1).unwrap();
        let expect = 2.0 * ((8.0 / 9.0) * (1e5f64).ln()).sqrt();
        assert!((s.alpha - expect).abs() < 1e-12);
        assert!((s.alpha - 6.398).abs() < 1e-3);
        let gamma = 3.0 / 5f64.sqrt() * (10.0 * 5f64.ln() / 2000.0).sqrt();
        assert!((s.gamma - gamma).abs() < 1e-15);
        assert!((s.sigma_init - 2.0 * 10_000f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn pm_degenerate_and_clamp() {
        let s = exp3pm_init_update_spec(4, 4, 100, 0.1).unwrap();
        assert_eq!(s.alpha, 0.0);
        // the tuned rate drops below 3/5 once T > 5 N ln(N/K) / K = 40.2
        let small = exp3pm_init_update_spec(10, 2, 40, 0.1).unwrap();
        assert_eq!(small.gamma, 0.6);
        let large = exp3pm_init_update_spec(10, 2, 41, 0.1).unwrap();
        assert!(large.gamma < 0.6);
        assert!(exp3pm_init_update_spec(4, 2, 100, 1.0).is_err());
    }

    #[test]
    fn pmb_alpha_hand_value() {
        let s = exp3pmb_init_update_spec(10, 2, 100.0, 0.5, 0.1).unwrap();
        let expect = 2.0 * 6f64.sqrt() * ((8.0 / 9.0) * (1e4f64).ln()).sqrt();
        assert!((s.alpha - expect).abs() < 1e-12);
        assert!((s.alpha - 14.02).abs() < 1e-2);
        let correction = 1.0 + 2.0 / 3.0;
        let tuned = (30.0 * 5f64.ln() / (100.0 * correction)).sqrt();
        assert!((s.gamma - tuned.min(1.0 / correction)).abs() < 1e-15);
    }

    #[test]
    fn pmb_clamp_near_unit_cost() {
        let s = exp3pmb_init_update_spec(10, 2, 100.0, 0.999_999_9, 0.1).unwrap();
        assert!((s.gamma - 1.0).abs() < 1e-6);
        let s = exp3pmb_init_update_spec(10, 2, 100.0, 1.0, 0.1).unwrap();
        assert_eq!(s.gamma, 1.0);
    }

    fn env(cfg: &BanditConfig) -> Environment {
        let rows = cfg.horizon.unwrap_or(0).max(AdversarialEnv::default_rows(cfg));
        AdversarialEnv::from_fn(rows, cfg.n_arms, |t, i| {
            (if (t + i) % 4 == 0 { 1.0 } else { 0.2 }, 0.5 + 0.05 * i as f64)
        })
        .unwrap()
        .into()
    }

    #[test]
    fn pm_plays_full_horizon() {
        let cfg = BanditConfig::new(5, 2, 1.0, 0.5).with_horizon(300);
        let (trace, state) = exp3pm_run_with_state(&cfg, &env(&cfg), &mut stream(1, 1)).unwrap();
        assert_eq!(trace.rounds.len(), 300);
        assert_eq!(state.t, 300);
        assert!(state.loss_acc.iter().all(|&l| l == 0.0));
        // every width grows by at least sigma_step per round (p <= 1)
        let setup = exp3pm_init_update_spec(5, 2, 300, 0.1).unwrap();
        for s in &state.sigma_acc {
            assert!(*s >= setup.sigma_init + 300.0 * setup.sigma_step - 1e-9);
        }
    }

    #[test]
    fn pm_needs_horizon() {
        let cfg = BanditConfig::new(5, 2, 10.0, 0.5);
        assert!(exp3pm_run(&cfg, &env(&cfg), &mut stream(1, 1)).is_err());
    }

    #[test]
    fn pmb_respects_budget() {
        let cfg = BanditConfig::new(5, 2, 80.0, 0.5);
        let trace = exp3pmb_run(&cfg, &env(&cfg), &mut stream(3, 1)).unwrap();
        assert!(trace.budget_spent <= 80.0);
        assert!(trace.remaining_budget() < 2.0);
        let t = trace.terminal.as_ref().unwrap();
        assert!(t.cost_sum() > trace.remaining_budget());
    }
}
