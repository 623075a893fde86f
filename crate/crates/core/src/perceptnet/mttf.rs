use ndarray::{Array2, ArrayView2};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::data::StateScaling;
use super::net::PerceptionNet;
use crate::error::Result;
use crate::pendulum::{control, render_frame, step, PendulumParams, PendulumState, RenderConfig};
use crate::stats::mean_and_se;

/// Anything that maps a batch of observations to state estimates. The true
/// states are passed so oracles can be expressed through the same interface.
pub trait StateEstimator: Sync {
    fn estimate(&self, obs: ArrayView2<f64>, truth: &[PendulumState]) -> Result<Vec<PendulumState>>;
}

pub struct NetEstimator<'a> {
    pub net: &'a PerceptionNet,
    pub scaling: StateScaling,
}

impl StateEstimator for NetEstimator<'_> {
    fn estimate(&self, obs: ArrayView2<f64>, _: &[PendulumState]) -> Result<Vec<PendulumState>> {
        let y = self.net.forward_batch(obs)?;
        Ok(y
            .rows()
            .into_iter()
            .map(|r| {
                let s = self.scaling.from_label(r.as_slice().unwrap());
                PendulumState::new(s[0], s[1])
            })
            .collect())
    }
}

pub struct PerfectEstimator;

impl StateEstimator for PerfectEstimator {
    fn estimate(&self, _: ArrayView2<f64>, truth: &[PendulumState]) -> Result<Vec<PendulumState>> {
        Ok(truth.to_vec())
    }
}

pub struct ConstantEstimator(pub PendulumState);

impl StateEstimator for ConstantEstimator {
    fn estimate(&self, _: ArrayView2<f64>, truth: &[PendulumState]) -> Result<Vec<PendulumState>> {
        Ok(vec![self.0; truth.len()])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MttfConfig {
    pub n_traj: usize,
    pub horizon: usize,
    pub n_trials: usize,
    pub seed: u64,
    pub render: RenderConfig,
    pub params: PendulumParams,
}

impl Default for MttfConfig {
    fn default() -> Self {
        Self {
            n_traj: 100,
            horizon: 500,
            n_trials: 5,
            seed: 0,
            render: RenderConfig::default(),
            params: PendulumParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MttfReport {
    pub trial_means: Vec<f64>,
    pub mean: f64,
    pub std_error: f64,
}

impl MttfReport {
    pub fn from_trials(trial_means: Vec<f64>) -> Self {
        let (mean, std_error) = mean_and_se(&trial_means);
        Self {
            trial_means,
            mean,
            std_error,
        }
    }
}

/// Closed-loop mean time to failure: render, estimate, control, step until
/// the angle leaves the safe set or the horizon ends.
pub fn evaluate_mttf(est: &dyn StateEstimator, cfg: &MttfConfig) -> Result<MttfReport> {
    let mut trials = Vec::with_capacity(cfg.n_trials);
    for trial in 0..cfg.n_trials {
        let seed = cfg.seed.wrapping_add((trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let times = run_trial(est, cfg, seed)?;
        trials.push(times.iter().sum::<f64>() / times.len() as f64);
    }
    Ok(MttfReport::from_trials(trials))
}

struct Rollout {
    id: usize,
    state: PendulumState,
    rng: ChaCha8Rng,
    prev: Vec<f64>,
    cur: Vec<f64>,
}

/// Time to failure of each trajectory in one trial.
pub fn run_trial(est: &dyn StateEstimator, cfg: &MttfConfig, seed: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let frame = cfg.render.frame_len();
    let mut live: Vec<Rollout> = (0..cfg.n_traj)
        .map(|id| Rollout {
            id,
            state: PendulumState::new(rng.random_range(-0.3..=0.3), rng.random_range(-0.5..=0.5)),
            rng: ChaCha8Rng::seed_from_u64(rng.next_u64()),
            prev: vec![0.0; frame],
            cur: vec![0.0; frame],
        })
        .collect();
    live.par_iter_mut()
        .for_each(|r| render_frame(r.state.theta, &cfg.render, &mut r.rng, &mut r.prev));
    let mut ttf = vec![cfg.horizon as f64; cfg.n_traj];
    let mut obs = Vec::with_capacity(cfg.n_traj * 2 * frame);
    for k in 0..cfg.horizon {
        if live.is_empty() {
            break;
        }
        live.par_iter_mut()
            .for_each(|r| render_frame(r.state.theta, &cfg.render, &mut r.rng, &mut r.cur));
        obs.clear();
        for r in &live {
            obs.extend_from_slice(&r.prev);
            obs.extend_from_slice(&r.cur);
        }
        let batch = ArrayView2::from_shape((live.len(), 2 * frame), &obs).unwrap();
        let truth: Vec<PendulumState> = live.iter().map(|r| r.state).collect();
        let estimates = est.estimate(batch, &truth)?;
        for (r, e) in live.iter_mut().zip(estimates) {
            std::mem::swap(&mut r.prev, &mut r.cur);
            r.state = step(r.state, control(e, &cfg.params), &cfg.params);
            if r.state.has_failed() {
                ttf[r.id] = k as f64;
            }
        }
        live.retain(|r| !r.state.has_failed());
    }
    Ok(ttf)
}

/// Renders the two-frame observation batch for `states`, previous states first.
pub fn observation_batch(
    states: &[PendulumState],
    previous: &[PendulumState],
    cfg: &RenderConfig,
    seed: u64,
) -> Array2<f64> {
    let rows: Vec<f64> = states
        .par_iter()
        .zip(previous)
        .enumerate()
        .flat_map_iter(|(i, (s, p))| {
            crate::pendulum::render(*s, *p, cfg, seed.wrapping_add(i as u64)).pixels
        })
        .collect();
    Array2::from_shape_vec((states.len(), cfg.observation_len()), rows).unwrap()
}
