use std::f64::consts::E;

use rand::Rng;

use super::{exp3mb_round, Exp3State, Exp3Variant};
use crate::config::BanditConfig;
use crate::env::Environment;
use crate::error::{BanditError, Result};
use crate::sampling::top_k_sum;
use crate::trace::{EpisodeTrace, TraceRecorder};

/// Guard against configurations whose thresholds never open an epoch.
const MAX_EPOCHS: u32 = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochThreshold {
    /// Gain threshold `g_r`.
    pub gain: f64,
    /// Exploration rate `min(1, 2^-r)`.
    pub gamma: f64,
}

/// `N ln(N/K) / ((e - 1) - (e - 2) c_min)`, the epoch-0 threshold.
fn base_threshold(n: usize, k: usize, c_min: f64) -> Result<f64> {
    if k >= n {
        return Err(BanditError::Degenerate(
            "epoch thresholds vanish when N = K".into(),
        ));
    }
    let n_f = n as f64;
    Ok(n_f * (n_f / k as f64).ln() / ((E - 1.0) - (E - 2.0) * c_min))
}

/// Threshold and exploration rate of epoch `r`.
pub fn epoch_threshold(r: u32, n: usize, k: usize, c_min: f64) -> Result<EpochThreshold> {
    let base = base_threshold(n, k, c_min)?;
    Ok(EpochThreshold {
        gain: base * 4f64.powi(r as i32),
        gamma: 2f64.powi(-(r as i32)).min(1.0),
    })
}

/// Whether the epoch must end: the best `K`-subset of `G^ - L^` exceeds
/// `g_r - N(1 - c_min)/(K gamma_r)`.
pub fn exp31mb_epoch_done(
    gain_acc: &[f64],
    loss_acc: &[f64],
    g_r: f64,
    gamma_r: f64,
    n: usize,
    k: usize,
    c_min: f64,
) -> bool {
    let net: Vec<f64> = gain_acc.iter().zip(loss_acc).map(|(g, l)| g - l).collect();
    let threshold = g_r - n as f64 * (1.0 - c_min) / (k as f64 * gamma_r);
    top_k_sum(&net, k) > threshold
}

/// Right-hand side of the epoch-count bound: with `R` the index of the last
/// epoch entered, `2^(R-1) <= N(1 - c_min)/(K c) + sqrt(net_max / c) + 1/2`,
/// where `net_max` is the best `K`-subset of `G^ - L^` at the end.
/// Negative `net_max` contributes zero.
pub fn epoch_count_bound(net_max: f64, n: usize, k: usize, c_min: f64) -> Result<f64> {
    let c = base_threshold(n, k, c_min)?;
    Ok(n as f64 * (1.0 - c_min) / (k as f64 * c) + (net_max.max(0.0) / c).sqrt() + 0.5)
}

/// Runs Exp3.1.M.B: Exp3.M.B restarted with `gamma_r = min(1, 2^-r)` each
/// time the estimated net gain crosses `g_r`. The reward and cost estimates
/// accumulate across epochs.
pub fn exp31mb_run<R: Rng + ?Sized>(
    cfg: &BanditConfig,
    env: &Environment,
    rng: &mut R,
) -> Result<EpisodeTrace> {
    exp31mb_run_with_state(cfg, env, rng).map(|(trace, _)| trace)
}

pub fn exp31mb_run_with_state<R: Rng + ?Sized>(
    cfg: &BanditConfig,
    env: &Environment,
    rng: &mut R,
) -> Result<(EpisodeTrace, Exp3State)> {
    let (n, k, c_min) = (cfg.n_arms, cfg.plays, cfg.c_min);
    let mut state = Exp3State::new(n, k, 1.0, Exp3Variant::OneMb)?;
    let mut rec = TraceRecorder::new(cfg.budget);
    for r in 0..MAX_EPOCHS {
        let th = epoch_threshold(r, n, k, c_min)?;
        state.restart(th.gamma);
        state.epoch = Some(r);
        rec.mark_epoch();
        while !exp31mb_epoch_done(
            &state.gain_acc,
            &state.loss_acc,
            th.gain,
            th.gamma,
            n,
            k,
            c_min,
        ) {
            let round = exp3mb_round(&mut state, env, rec.next_round(), rec.remaining(), rng)?;
            if round.terminated
                || !rec.settle(&round.outcome, Some(round.probabilities.as_slice()))
            {
                return Ok((rec.finish(Some(round.outcome)), state));
            }
        }
    }
    Err(BanditError::Degenerate(format!(
        "no epoch admitted a round within {MAX_EPOCHS} restarts"
    )))
}
