use ndarray::Array2;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::distdp::{rejection_sample_states, RiskSurface};
use crate::error::{Error, Result};
use crate::pendulum::{
    control, render, PendulumParams, PendulumState, RenderConfig, OMEGA_RANGE, FAILURE_ANGLE,
    RISK_SLICE,
};

/// Affine map between states and network labels in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateScaling {
    pub scale: Vec<f64>,
}

impl StateScaling {
    /// Angle by the failure angle, angular rate by the speed limit.
    pub fn pendulum(params: &PendulumParams) -> Self {
        Self {
            scale: vec![FAILURE_ANGLE, params.max_speed],
        }
    }

    pub fn to_label(&self, s: &[f64]) -> Vec<f64> {
        s.iter().zip(&self.scale).map(|(x, k)| x / k).collect()
    }

    pub fn from_label(&self, y: &[f64]) -> Vec<f64> {
        y.iter().zip(&self.scale).map(|(x, k)| x * k).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataKind {
    Uniform,
    RiskWeighted,
}

/// Rendered observations with their true states and scaled labels, one row
/// per example.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub kind: DataKind,
    pub scaling: StateScaling,
    pub observations: Array2<f64>,
    pub states: Array2<f64>,
    pub labels: Array2<f64>,
}

impl LabeledDataset {
    pub fn len(&self) -> usize {
        self.states.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// State one step earlier under the balancing controller with perfect
/// perception, found by fixed-point iteration of the inverse Euler step.
pub fn previous_state(s: PendulumState, p: &PendulumParams) -> PendulumState {
    let mut prev = s;
    for _ in 0..30 {
        let a = control(prev, p);
        let accel = 3.0 * p.gravity / (2.0 * p.length) * prev.theta.sin()
            + 3.0 * a / (p.mass * p.length * p.length);
        let omega = s.omega - accel * p.dt;
        prev = PendulumState::new(s.theta - omega * p.dt, omega);
    }
    prev
}

/// Draws `n` states, uniformly over the grid ranges or proportionally to the
/// risk weight, and renders each to a pair of frames.
pub fn generate_dataset(
    kind: DataKind,
    n: usize,
    surface: Option<&RiskSurface>,
    render_cfg: &RenderConfig,
    params: &PendulumParams,
    seed: u64,
) -> Result<LabeledDataset> {
    if n == 0 {
        return Err(Error::EmptySamples);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states: Vec<PendulumState> = match kind {
        DataKind::Uniform => (0..n)
            .map(|_| {
                PendulumState::new(
                    rng.random_range(-FAILURE_ANGLE..=FAILURE_ANGLE),
                    rng.random_range(-OMEGA_RANGE..=OMEGA_RANGE),
                )
            })
            .collect(),
        DataKind::RiskWeighted => {
            let surface = surface.ok_or_else(|| {
                Error::InvalidState("risk-weighted data needs a risk surface".into())
            })?;
            rejection_sample_states(surface, n, rng.next_u64(), &[Some(RISK_SLICE as f64), None, None])?
                .into_iter()
                .map(|x| PendulumState::new(x[1], x[2]))
                .collect()
        }
    };
    let seeds: Vec<u64> = (0..n).map(|_| rng.next_u64()).collect();
    let rows: Vec<Vec<f64>> = states
        .par_iter()
        .zip(&seeds)
        .map(|(s, sd)| render(*s, previous_state(*s, params), render_cfg, *sd).pixels)
        .collect();
    let obs_len = render_cfg.observation_len();
    let observations =
        Array2::from_shape_vec((n, obs_len), rows.into_iter().flatten().collect()).unwrap();
    let scaling = StateScaling::pendulum(params);
    let states_arr =
        Array2::from_shape_fn((n, 2), |(i, j)| if j == 0 { states[i].theta } else { states[i].omega });
    let labels = Array2::from_shape_fn((n, 2), |(i, j)| states_arr[[i, j]] / scaling.scale[j]);
    Ok(LabeledDataset {
        kind,
        scaling,
        observations,
        states: states_arr,
        labels,
    })
}
