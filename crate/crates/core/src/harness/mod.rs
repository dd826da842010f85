//! Replicated runs, regret against the matching oracle, and bound attachment.

mod oracle;
pub mod output;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    make_lower_bound_env, prop1_bound, thm1_bound, thm2_bound, thm3_lower_bound, thm4_bound,
    thm5_bound, BoundValue, LowerBoundSpec, StochasticBoundParams,
};
use crate::config::BanditConfig;
use crate::env::{AdversarialEnv, ArmSet, Environment, StochasticEnv};
use crate::error::{config_err, BanditError, Result};
use crate::exp3::{exp31mb_run, exp3mb_run, exp3pm_run, exp3pmb_run, tune_gamma_mb};
use crate::rng::stream;
use crate::trace::EpisodeTrace;
use crate::ucb::ucb_run_episode;

pub use oracle::{
    fixed_subset_gain, oracle_gain_adversarial, oracle_gain_adversarial_auto,
    oracle_gain_adversarial_greedy, oracle_gain_horizon, oracle_gain_stochastic,
    oracle_gain_stochastic_horizon, OracleGain,
};

/// Stream index reserved for sampling the lower-bound instance.
const LOWER_BOUND_STREAM: u64 = u64::MAX - 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PolicySpec {
    UcbMb,
    /// Fixed `gamma`, or tuned from the gain bound `g` (the oracle gain when
    /// neither is given).
    Exp3Mb {
        #[serde(default)]
        gamma: Option<f64>,
        #[serde(default)]
        g: Option<f64>,
    },
    Exp31Mb,
    Exp3Pm,
    Exp3Pmb,
}

impl PolicySpec {
    pub fn name(&self) -> &'static str {
        match self {
            Self::UcbMb => "ucb_mb",
            Self::Exp3Mb { .. } => "exp3_mb",
            Self::Exp31Mb => "exp31_mb",
            Self::Exp3Pm => "exp3_pm",
            Self::Exp3Pmb => "exp3_pmb",
        }
    }

    fn uses_horizon(&self) -> bool {
        matches!(self, Self::Exp3Pm)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EnvSpec {
    Stochastic(StochasticEnv),
    Adversarial(AdversarialEnv),
    LowerBound(LowerBoundSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub config: BanditConfig,
    pub policy: PolicySpec,
    pub environment: EnvSpec,
    pub replications: usize,
    #[serde(default)]
    pub base_seed: u64,
    /// Worker threads; the global rayon pool when absent.
    #[serde(default)]
    pub workers: Option<usize>,
}

/// A lower-bound instance as sampled for a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundInstance {
    pub good_set: ArmSet,
    pub eps: f64,
    pub environment: Environment,
}

/// Everything fixed before the first replication.
#[derive(Debug, Clone)]
pub struct PreparedRun {
    pub spec: RunSpec,
    pub env: Environment,
    pub oracle: OracleGain,
    /// Resolved exploration rate for `Exp3Mb`, with the `g` it was tuned from.
    pub gamma: Option<f64>,
    pub tuned_from: Option<f64>,
    pub lower_bound: Option<LowerBoundInstance>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Replication {
    pub gain: f64,
    pub stopping_time: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretReport {
    pub policy: String,
    pub budget: f64,
    pub mean_gain: f64,
    pub mean_regret: f64,
    pub regret_std_error: f64,
    pub oracle_gain: f64,
    pub oracle_exact: bool,
    pub oracle_a_star: ArmSet,
    pub oracle_bracket: Option<(f64, f64)>,
    pub gamma: Option<f64>,
    pub per_replication: Vec<Replication>,
    pub bound_values: BTreeMap<String, f64>,
    pub violation_fraction: Option<f64>,
}

/// Samples the lower-bound instance for `cfg` from the seed's reserved stream.
pub fn materialize_lower_bound(
    cfg: &BanditConfig,
    spec: &LowerBoundSpec,
    seed: u64,
) -> Result<LowerBoundInstance> {
    let rows = AdversarialEnv::default_rows(cfg).max(cfg.horizon.unwrap_or(0));
    let mut rng = stream(seed, LOWER_BOUND_STREAM);
    let (env, good_set, eps) = make_lower_bound_env(
        cfg.n_arms,
        cfg.plays,
        cfg.budget,
        cfg.c_min,
        spec,
        Some(rows),
        &mut rng,
    )?;
    Ok(LowerBoundInstance {
        good_set,
        eps,
        environment: env.into(),
    })
}

fn horizon(cfg: &BanditConfig) -> Result<usize> {
    cfg.horizon
        .ok_or_else(|| BanditError::Config("this policy needs config.horizon".into()))
}

/// Validates the `RunSpec`, samples any generated environment and computes the
/// oracle.
pub fn prepare(spec: &RunSpec) -> Result<PreparedRun> {
    let cfg = spec.config.clone().validate()?;
    if spec.replications == 0 {
        return config_err("replications must be at least 1");
    }
    if spec.workers == Some(0) {
        return config_err("workers must be at least 1");
    }
    if spec.policy.uses_horizon() {
        horizon(&cfg)?;
    }
    if matches!(spec.policy, PolicySpec::Exp31Mb) && cfg.plays == cfg.n_arms {
        return config_err("Exp3.1.M.B needs K < N");
    }

    let (env, lower_bound) = match &spec.environment {
        EnvSpec::Stochastic(e) => (Environment::from(e.clone()), None),
        EnvSpec::Adversarial(e) => (Environment::from(e.clone()), None),
        EnvSpec::LowerBound(lb) => {
            let inst = materialize_lower_bound(&cfg, lb, spec.base_seed)?;
            (inst.environment.clone(), Some(inst))
        }
    };
    env.validate(&cfg)?;

    let oracle = match (&env, spec.policy.uses_horizon()) {
        (Environment::Stochastic(e), false) => oracle_gain_stochastic(e, &cfg),
        (Environment::Stochastic(e), true) => {
            oracle_gain_stochastic_horizon(e, cfg.plays, horizon(&cfg)?)
        }
        (Environment::Adversarial(e), false) => oracle_gain_adversarial_auto(e, &cfg)?,
        (Environment::Adversarial(e), true) => oracle_gain_horizon(e, cfg.plays, horizon(&cfg)?)?,
    };

    let (gamma, tuned_from) = match &spec.policy {
        PolicySpec::Exp3Mb { gamma: Some(g), .. } => {
            if !(*g > 0.0 && *g <= 1.0) {
                return config_err(format!("gamma = {g} outside (0, 1]"));
            }
            (Some(*g), None)
        }
        PolicySpec::Exp3Mb { gamma: None, g } => {
            let g = g.unwrap_or(oracle.gain);
            let gamma = tune_gamma_mb(g, cfg.budget, cfg.n_arms, cfg.plays, cfg.c_min)?;
            (Some(gamma), Some(g))
        }
        _ => (None, None),
    };

    Ok(PreparedRun {
        spec: RunSpec {
            config: cfg,
            ..spec.clone()
        },
        env,
        oracle,
        gamma,
        tuned_from,
        lower_bound,
    })
}

/// Runs replication `index` of a prepared run.
pub fn run_single(prep: &PreparedRun, index: u64) -> Result<EpisodeTrace> {
    let cfg = &prep.spec.config;
    let env = &prep.env;
    let mut rng = stream(prep.spec.base_seed, index);
    match &prep.spec.policy {
        PolicySpec::UcbMb => ucb_run_episode(cfg, env, &mut rng),
        PolicySpec::Exp3Mb { .. } => {
            let gamma = prep.gamma.expect("gamma resolved during prepare");
            exp3mb_run(cfg, env, gamma, &mut rng)
        }
        PolicySpec::Exp31Mb => exp31mb_run(cfg, env, &mut rng),
        PolicySpec::Exp3Pm => exp3pm_run(cfg, env, &mut rng),
        PolicySpec::Exp3Pmb => exp3pmb_run(cfg, env, &mut rng),
    }
}

/// Every bound computable for the prepared instance, keyed `thm1` ... `thm5`,
/// `prop1`. Bounds whose preconditions fail are left out.
pub fn all_bounds(prep: &PreparedRun) -> BTreeMap<String, BoundValue> {
    let cfg = &prep.spec.config;
    let (n, k, b, c, delta) = (cfg.n_arms, cfg.plays, cfg.budget, cfg.c_min, cfg.confidence);
    let mut out = BTreeMap::new();
    if let Environment::Stochastic(e) = &prep.env {
        if let Ok(v) = StochasticBoundParams::from_env(e, k).and_then(|p| thm1_bound(&p, b)) {
            out.insert("thm1".into(), v);
        }
    }
    let g = prep.tuned_from.unwrap_or(prep.oracle.gain);
    if let Ok(v) = thm2_bound(g, b, n, k, c) {
        out.insert("thm2".into(), v);
    }
    if let Ok(v) = prop1_bound(prep.oracle.gain, b, n, k, c) {
        out.insert("prop1".into(), v);
    }
    let eps = match &prep.spec.environment {
        EnvSpec::LowerBound(lb) => lb.eps,
        _ => None,
    };
    if let Ok(lb) = thm3_lower_bound(b, n, k, c, eps) {
        let mut constituents = BTreeMap::new();
        constituents.insert("eps".to_string(), lb.eps);
        constituents.insert("degenerate".to_string(), if lb.degenerate { 1.0 } else { 0.0 });
        out.insert(
            "thm3".into(),
            BoundValue {
                value: lb.value,
                constituents,
            },
        );
    }
    if let Some(t) = cfg.horizon {
        if let Ok(v) = thm4_bound(n, k, t, delta) {
            out.insert("thm4".into(), v);
        }
    }
    if let Ok(v) = thm5_bound(n, k, b, c, delta) {
        out.insert("thm5".into(), v);
    }
    out
}

/// The upper bound that speaks to the configured policy.
pub fn policy_bound_key(policy: &PolicySpec) -> &'static str {
    match policy {
        PolicySpec::UcbMb => "thm1",
        PolicySpec::Exp3Mb { .. } => "thm2",
        PolicySpec::Exp31Mb => "prop1",
        PolicySpec::Exp3Pm => "thm4",
        PolicySpec::Exp3Pmb => "thm5",
    }
}

fn run_all(prep: &PreparedRun) -> Result<Vec<Replication>> {
    let work = || {
        (0..prep.spec.replications as u64)
            .into_par_iter()
            .map(|i| {
                run_single(prep, i).map(|t| Replication {
                    gain: t.gain,
                    stopping_time: t.stopping_time,
                })
            })
            .collect::<Result<Vec<_>>>()
    };
    match prep.spec.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| BanditError::Config(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    }
}

/// Runs every replication and aggregates in index order, so the report does
/// not depend on scheduling.
pub fn run_prepared(prep: &PreparedRun) -> Result<RegretReport> {
    let reps = run_all(prep)?;
    let n = reps.len() as f64;
    let mean_gain = reps.iter().map(|r| r.gain).sum::<f64>() / n;
    let std_error = if reps.len() > 1 {
        let ss: f64 = reps.iter().map(|r| (r.gain - mean_gain).powi(2)).sum();
        (ss / (n - 1.0)).sqrt() / n.sqrt()
    } else {
        0.0
    };

    let bounds = all_bounds(prep);
    let key = policy_bound_key(&prep.spec.policy);
    let mut bound_values = BTreeMap::new();
    if let Some(v) = bounds.get(key) {
        bound_values.insert(key.to_string(), v.value);
    }
    if prep.lower_bound.is_some() {
        if let Some(v) = bounds.get("thm3") {
            bound_values.insert("thm3".into(), v.value);
        }
    }

    let violation_fraction = match prep.spec.policy {
        PolicySpec::Exp3Pm | PolicySpec::Exp3Pmb => bounds.get(key).map(|b| {
            let over = reps
                .iter()
                .filter(|r| prep.oracle.gain - r.gain > b.value)
                .count();
            over as f64 / n
        }),
        _ => None,
    };

    Ok(RegretReport {
        policy: prep.spec.policy.name().to_string(),
        budget: prep.spec.config.budget,
        mean_gain,
        mean_regret: prep.oracle.gain - mean_gain,
        regret_std_error: std_error,
        oracle_gain: prep.oracle.gain,
        oracle_exact: prep.oracle.exact,
        oracle_a_star: prep.oracle.a_star.clone(),
        oracle_bracket: prep.oracle.bracket,
        gamma: prep.gamma,
        per_replication: reps,
        bound_values,
        violation_fraction,
    })
}

pub fn run_replications(spec: &RunSpec) -> Result<RegretReport> {
    run_prepared(&prepare(spec)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub budget: f64,
    pub policy: String,
    pub mean_gain: f64,
    pub oracle_gain: f64,
    pub mean_regret: f64,
    pub std_error: f64,
    pub bound: Option<f64>,
}

/// Repeats the run at each budget. Generated environments are re-sampled
/// for every budget from the same seed.
pub fn sweep(spec: &RunSpec, budgets: &[f64]) -> Result<Vec<SweepRow>> {
    budgets
        .iter()
        .map(|&b| {
            let mut s = spec.clone();
            s.config.budget = b;
            let report = run_replications(&s)?;
            let key = policy_bound_key(&s.policy);
            Ok(SweepRow {
                budget: b,
                policy: report.policy,
                mean_gain: report.mean_gain,
                oracle_gain: report.oracle_gain,
                mean_regret: report.mean_regret,
                std_error: report.regret_std_error,
                bound: report.bound_values.get(key).copied(),
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    use output::fmt_f64_csv as f;
    let mut out = String::from("budget,policy,mean_gain,oracle_gain,mean_regret,std_error,bound\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            f(r.budget),
            r.policy,
            f(r.mean_gain),
            f(r.oracle_gain),
            f(r.mean_regret),
            f(r.std_error),
            r.bound.map(f).unwrap_or_default(),
        ));
    }
    out
}
