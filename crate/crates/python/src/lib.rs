//! Python module `pybandits`.
//!
//! Configurations and environments are small wrapper classes; whole
//! experiments take the same JSON run file (`RunSpec`) as the `bbandit` CLI.

use std::collections::BTreeMap;

use budgeted_bandits::harness::output::{to_json_string, trace_csv};
use budgeted_bandits::harness::{
    self, materialize_lower_bound, prepare, run_prepared, sweep_csv, RunSpec,
};
use budgeted_bandits::{self as core, BanditError};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: BanditError) -> PyErr {
    match e {
        BanditError::Probability(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse_spec(spec_json: &str) -> PyResult<RunSpec> {
    serde_json::from_str(spec_json).map_err(|e| PyValueError::new_err(format!("bad run spec: {e}")))
}

/// A bound value with its named terms.
type NamedBound = (f64, BTreeMap<String, f64>);

#[pyclass(name = "Config", module = "pybandits", from_py_object)]
#[derive(Clone)]
struct PyConfig {
    inner: core::BanditConfig,
}

#[pymethods]
impl PyConfig {
    #[new]
    #[pyo3(signature = (n_arms, plays, budget, c_min, confidence = 0.1, horizon = None))]
    fn new(
        n_arms: usize,
        plays: usize,
        budget: f64,
        c_min: f64,
        confidence: f64,
        horizon: Option<usize>,
    ) -> PyResult<Self> {
        let mut cfg = core::BanditConfig::new(n_arms, plays, budget, c_min).with_confidence(confidence);
        cfg.horizon = horizon;
        Ok(Self {
            inner: cfg.validate().map_err(to_py)?,
        })
    }

    #[getter]
    fn n_arms(&self) -> usize {
        self.inner.n_arms
    }

    #[getter]
    fn plays(&self) -> usize {
        self.inner.plays
    }

    #[getter]
    fn budget(&self) -> f64 {
        self.inner.budget
    }

    #[getter]
    fn c_min(&self) -> f64 {
        self.inner.c_min
    }

    #[getter]
    fn confidence(&self) -> f64 {
        self.inner.confidence
    }

    #[getter]
    fn horizon(&self) -> Option<usize> {
        self.inner.horizon
    }

    fn __repr__(&self) -> String {
        let c = &self.inner;
        format!(
            "Config(n_arms={}, plays={}, budget={}, c_min={}, confidence={}, horizon={:?})",
            c.n_arms, c.plays, c.budget, c.c_min, c.confidence, c.horizon
        )
    }
}

/// A stochastic or adversarial environment.
#[pyclass(name = "Environment", module = "pybandits", from_py_object)]
#[derive(Clone)]
struct PyEnvironment {
    inner: core::Environment,
}

#[pymethods]
impl PyEnvironment {
    /// Arms with i.i.d. outcomes; `family` is "bernoulli_scaled" or "beta_scaled".
    #[staticmethod]
    #[pyo3(signature = (mean_rewards, mean_costs, c_min, family = "bernoulli_scaled"))]
    fn stochastic(
        mean_rewards: Vec<f64>,
        mean_costs: Vec<f64>,
        c_min: f64,
        family: &str,
    ) -> PyResult<Self> {
        let family = match family {
            "bernoulli_scaled" => core::DistributionFamily::BernoulliScaled,
            "beta_scaled" => core::DistributionFamily::BetaScaled,
            other => return Err(PyValueError::new_err(format!("unknown family {other:?}"))),
        };
        let env = core::StochasticEnv::new(mean_rewards, mean_costs, family, c_min).map_err(to_py)?;
        Ok(Self { inner: env.into() })
    }

    /// A fixed sequence; `rewards[t][i]` and `costs[t][i]` for round `t + 1`.
    #[staticmethod]
    fn adversarial(rewards: Vec<Vec<f64>>, costs: Vec<Vec<f64>>) -> PyResult<Self> {
        let env = core::AdversarialEnv::from_rows(&rewards, &costs).map_err(to_py)?;
        Ok(Self { inner: env.into() })
    }

    /// Samples the hard instance for `config`. Returns `(env, good_set, eps)`.
    #[staticmethod]
    #[pyo3(signature = (config, eps = None, good_set = None, seed = 0))]
    fn lower_bound(
        config: &PyConfig,
        eps: Option<f64>,
        good_set: Option<Vec<usize>>,
        seed: u64,
    ) -> PyResult<(Self, Vec<usize>, f64)> {
        let spec = core::LowerBoundSpec { eps, good_set };
        let inst = materialize_lower_bound(&config.inner, &spec, seed).map_err(to_py)?;
        Ok((
            Self {
                inner: inst.environment,
            },
            inst.good_set.into(),
            inst.eps,
        ))
    }

    #[getter]
    fn n_arms(&self) -> usize {
        self.inner.n_arms()
    }

    fn to_json(&self) -> PyResult<String> {
        to_json_string(&self.inner).map_err(to_py)
    }
}

/// One episode: the credited rounds and where it stopped.
#[pyclass(name = "Episode", module = "pybandits", frozen)]
struct PyEpisode {
    trace: core::EpisodeTrace,
}

#[pymethods]
impl PyEpisode {
    #[getter]
    fn gain(&self) -> f64 {
        self.trace.gain
    }

    #[getter]
    fn stopping_time(&self) -> usize {
        self.trace.stopping_time
    }

    #[getter]
    fn budget_spent(&self) -> f64 {
        self.trace.budget_spent
    }

    #[getter]
    fn epochs(&self) -> usize {
        self.trace.epochs()
    }

    /// Arms played in each credited round.
    #[getter]
    fn arms(&self) -> Vec<Vec<usize>> {
        self.trace
            .rounds
            .iter()
            .map(|r| r.outcome.arms.as_slice().to_vec())
            .collect()
    }

    #[getter]
    fn rewards(&self) -> Vec<f64> {
        self.trace.rounds.iter().map(|r| r.outcome.reward_sum()).collect()
    }

    fn to_csv(&self) -> String {
        trace_csv(&self.trace)
    }
}

#[pyclass(name = "Report", module = "pybandits", frozen)]
struct PyReport {
    report: core::RegretReport,
}

#[pymethods]
impl PyReport {
    #[getter]
    fn policy(&self) -> String {
        self.report.policy.clone()
    }

    #[getter]
    fn mean_gain(&self) -> f64 {
        self.report.mean_gain
    }

    #[getter]
    fn mean_regret(&self) -> f64 {
        self.report.mean_regret
    }

    #[getter]
    fn std_error(&self) -> f64 {
        self.report.regret_std_error
    }

    #[getter]
    fn oracle_gain(&self) -> f64 {
        self.report.oracle_gain
    }

    #[getter]
    fn gamma(&self) -> Option<f64> {
        self.report.gamma
    }

    #[getter]
    fn gains(&self) -> Vec<f64> {
        self.report.per_replication.iter().map(|r| r.gain).collect()
    }

    #[getter]
    fn bound_values(&self) -> BTreeMap<String, f64> {
        self.report.bound_values.clone()
    }

    #[getter]
    fn violation_fraction(&self) -> Option<f64> {
        self.report.violation_fraction
    }

    fn to_json(&self) -> PyResult<String> {
        to_json_string(&self.report).map_err(to_py)
    }
}

/// Runs one episode of `policy` ("ucb_mb", "exp3_mb", "exp31_mb", "exp3_pm"
/// or "exp3_pmb"). `gamma` is required by "exp3_mb" only.
#[pyfunction]
#[pyo3(signature = (policy, config, env, seed = 0, gamma = None))]
fn run_episode(
    py: Python<'_>,
    policy: &str,
    config: &PyConfig,
    env: &PyEnvironment,
    seed: u64,
    gamma: Option<f64>,
) -> PyResult<PyEpisode> {
    let (cfg, env) = (&config.inner, &env.inner);
    env.validate(cfg).map_err(to_py)?;
    let mut rng = core::stream(seed, 0);
    let trace = match policy {
        "ucb_mb" => py.detach(|| core::ucb_run_episode(cfg, env, &mut rng)),
        "exp3_mb" => {
            let gamma = gamma.ok_or_else(|| PyValueError::new_err("exp3_mb needs gamma"))?;
            py.detach(|| core::exp3mb_run(cfg, env, gamma, &mut rng))
        }
        "exp31_mb" => py.detach(|| core::exp31mb_run(cfg, env, &mut rng)),
        "exp3_pm" => py.detach(|| core::exp3pm_run(cfg, env, &mut rng)),
        "exp3_pmb" => py.detach(|| core::exp3pmb_run(cfg, env, &mut rng)),
        other => return Err(PyValueError::new_err(format!("unknown policy {other:?}"))),
    }
    .map_err(to_py)?;
    Ok(PyEpisode { trace })
}

/// Runs the replications described by a JSON `RunSpec`.
#[pyfunction]
fn run(py: Python<'_>, spec_json: &str) -> PyResult<PyReport> {
    let spec = parse_spec(spec_json)?;
    let report = py
        .detach(|| prepare(&spec).and_then(|p| run_prepared(&p)))
        .map_err(to_py)?;
    Ok(PyReport { report })
}

/// Regret against budget as CSV text, one row per budget.
#[pyfunction]
fn sweep(py: Python<'_>, spec_json: &str, budgets: Vec<f64>) -> PyResult<String> {
    let spec = parse_spec(spec_json)?;
    let rows = py.detach(|| harness::sweep(&spec, &budgets)).map_err(to_py)?;
    Ok(sweep_csv(&rows))
}

/// Every bound that applies to a JSON `RunSpec`, as
/// `{name: (value, constituents)}`.
#[pyfunction]
fn bounds(spec_json: &str) -> PyResult<BTreeMap<String, NamedBound>> {
    let prep = prepare(&parse_spec(spec_json)?).map_err(to_py)?;
    Ok(harness::all_bounds(&prep)
        .into_iter()
        .map(|(k, b)| (k, (b.value, b.constituents)))
        .collect())
}

/// Best fixed subset: `(a_star, gain)`. Exact for adversarial environments,
/// the `(Sr/Sc) B` proxy for stochastic ones.
#[pyfunction]
fn oracle_gain(config: &PyConfig, env: &PyEnvironment) -> PyResult<(Vec<usize>, f64)> {
    let o = match &env.inner {
        core::Environment::Adversarial(e) => {
            harness::oracle_gain_adversarial_auto(e, &config.inner).map_err(to_py)?
        }
        core::Environment::Stochastic(e) => core::oracle_gain_stochastic(e, &config.inner),
    };
    Ok((o.a_star.into(), o.gain))
}

#[pyfunction]
fn tune_gamma_mb(g: f64, budget: f64, n_arms: usize, plays: usize, c_min: f64) -> PyResult<f64> {
    core::tune_gamma_mb(g, budget, n_arms, plays, c_min).map_err(to_py)
}

/// Inclusion probabilities (summing to `plays`) for the given log-weights.
#[pyfunction]
fn probabilities(log_weights: Vec<f64>, gamma: f64, plays: usize) -> PyResult<Vec<f64>> {
    let n = log_weights.len();
    let w = core::WeightVector::from_log(log_weights).map_err(to_py)?;
    let cap = core::compute_cap(&w, gamma, plays, n).map_err(to_py)?;
    Ok(core::compute_probabilities(&cap, gamma, plays).into_inner())
}

/// Draws `plays` distinct arms with the given inclusion probabilities.
#[pyfunction]
#[pyo3(signature = (p, plays, seed = 0))]
fn dependent_rounding(p: Vec<f64>, plays: usize, seed: u64) -> PyResult<Vec<usize>> {
    let mut rng = core::stream(seed, 0);
    Ok(core::dependent_rounding(plays, &p, &mut rng).map_err(to_py)?.into())
}

#[pyfunction]
fn thm2_bound(g: f64, budget: f64, n_arms: usize, plays: usize, c_min: f64) -> PyResult<f64> {
    Ok(core::thm2_bound(g, budget, n_arms, plays, c_min).map_err(to_py)?.value)
}

#[pyfunction]
#[pyo3(signature = (budget, n_arms, plays, c_min, eps = None))]
fn thm3_lower_bound(
    budget: f64,
    n_arms: usize,
    plays: usize,
    c_min: f64,
    eps: Option<f64>,
) -> PyResult<f64> {
    Ok(core::thm3_lower_bound(budget, n_arms, plays, c_min, eps).map_err(to_py)?.value)
}

#[pyfunction]
fn thm4_bound(n_arms: usize, plays: usize, horizon: usize, delta: f64) -> PyResult<f64> {
    Ok(core::thm4_bound(n_arms, plays, horizon, delta).map_err(to_py)?.value)
}

#[pyfunction]
fn thm5_bound(n_arms: usize, plays: usize, budget: f64, c_min: f64, delta: f64) -> PyResult<f64> {
    Ok(core::thm5_bound(n_arms, plays, budget, c_min, delta).map_err(to_py)?.value)
}

#[pymodule]
fn pybandits(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConfig>()?;
    m.add_class::<PyEnvironment>()?;
    m.add_class::<PyEpisode>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(run_episode, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(bounds, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_gain, m)?)?;
    m.add_function(wrap_pyfunction!(tune_gamma_mb, m)?)?;
    m.add_function(wrap_pyfunction!(probabilities, m)?)?;
    m.add_function(wrap_pyfunction!(dependent_rounding, m)?)?;
    m.add_function(wrap_pyfunction!(thm2_bound, m)?)?;
    m.add_function(wrap_pyfunction!(thm3_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(thm4_bound, m)?)?;
    m.add_function(wrap_pyfunction!(thm5_bound, m)?)?;
    Ok(())
}
