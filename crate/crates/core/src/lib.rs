//! Budget-constrained multi-armed bandits with multiple plays.
//!
//! Each round a policy plays `K` of `N` arms, observes their rewards and
//! costs, and pays the cost sum out of a budget `B`. The first round whose
//! cost exceeds what is left ends the episode; that round earns nothing.
//!
//! * [`ucb`]: UCB-MB for i.i.d. arms.
//! * [`exp3`]: Exp3.M.B, Exp3.1.M.B, Exp3.P.M and Exp3.P.M.B for oblivious
//!   adversaries.
//! * [`bounds`]: closed-form regret bounds and the hard lower-bound instance.
//! * [`harness`]: replicated runs, oracles and regret reports.
//!
//! ```
//! use budgeted_bandits::{exp3mb_run, stream, AdversarialEnv, BanditConfig, Environment};
//!
//! let cfg = BanditConfig::new(4, 2, 20.0, 0.5);
//! let env: Environment =
//!     AdversarialEnv::from_fn(AdversarialEnv::default_rows(&cfg), 4, |_, i| (0.25 * i as f64, 0.5))
//!         .unwrap()
//!         .into();
//! let trace = exp3mb_run(&cfg, &env, 0.2, &mut stream(1, 0)).unwrap();
//! assert_eq!(trace.budget_spent, 20.0);
//! ```
// float guards are written as `!(x > 0.0)` on purpose so that NaN fails them
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod config;
pub mod env;
pub mod error;
pub mod exp3;
pub mod harness;
pub mod rng;
pub mod sampling;
pub mod subsets;
pub mod trace;
pub mod ucb;

pub use bounds::{
    make_lower_bound_env, prop1_bound, thm1_bound, thm2_bound, thm3_lower_bound, thm3_tuned_eps,
    thm4_bound, thm5_bound, BoundValue, LowerBound, LowerBoundSpec, StochasticBoundParams,
};
pub use config::{validate_config, BanditConfig};
pub use env::{
    AdversarialEnv, ArmSet, DistributionFamily, Environment, RoundOutcome, StochasticEnv,
};
pub use error::{BanditError, Result};
pub use exp3::{
    estimate, exp31mb_run, exp31mb_run_with_state, exp3mb_round, exp3mb_run,
    exp3mb_run_with_state, exp3mb_weight_update, exp3pm_init_update_spec, exp3pm_run,
    exp3pm_run_with_state, exp3pmb_init_update_spec, exp3pmb_run, exp3pmb_run_with_state,
    tune_gamma_mb, Exp3State, Exp3Variant,
};
pub use harness::{
    oracle_gain_adversarial, oracle_gain_stochastic, prepare, run_replications, sweep,
    EnvSpec, OracleGain, PolicySpec, RegretReport, RunSpec,
};
pub use rng::{stream, BanditRng};
pub use sampling::{
    cap_ratio, compute_cap, compute_probabilities, dependent_rounding, CapResult,
    ProbabilityVector, WeightVector,
};
pub use trace::{BudgetLedger, EpisodeTrace, RoundRecord};
pub use ucb::{ucb_init, ucb_run_episode, ucb_run_episode_with_state, ucb_select, ucb_update, UcbState};
