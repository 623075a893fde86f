use std::f64::consts::FRAC_PI_4;

use super::dynamics::{control, step, PendulumParams, PendulumState, FAILURE_ANGLE};
use crate::distdp::{
    solve_with, symmetric_log_space, AbstractedPerceptionMdp, Axis, Grid, KeepSlices,
    SolveOptions, Solved,
};
use crate::error::Result;

/// Episode length in steps; the time axis runs over `0..TIME_STEPS`.
pub const TIME_STEPS: usize = 20;
/// Time slice queried for risk at the start of an episode.
pub const RISK_SLICE: usize = TIME_STEPS - 1;
pub const SIGMA_THETA: f64 = 0.2;
pub const SIGMA_OMEGA: f64 = 0.5;
pub const OMEGA_RANGE: f64 = 2.0;

/// Discretized additive error model: atoms and their Gaussian weights.
#[derive(Debug, Clone)]
pub struct PendulumErrorModel {
    pub atoms: Grid,
    /// Weight per flat atom index, summing to one.
    pub weights: Vec<f64>,
}

/// 11 x 11 joint error grid, each axis log-spaced and symmetric about zero
/// out to two standard deviations, weighted by the normalized product of
/// zero-mean Gaussian densities.
pub fn pendulum_error_model() -> PendulumErrorModel {
    let theta = symmetric_log_space(2.0 * SIGMA_THETA, 5, 20.0);
    let omega = symmetric_log_space(2.0 * SIGMA_OMEGA, 5, 20.0);
    let density = |x: f64, s: f64| (-0.5 * (x / s).powi(2)).exp();
    let mut weights = Vec::with_capacity(theta.len() * omega.len());
    for et in &theta {
        for eo in &omega {
            weights.push(density(*et, SIGMA_THETA) * density(*eo, SIGMA_OMEGA));
        }
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let atoms = Grid::new(vec![
        Axis::continuous("eps_theta", theta).unwrap(),
        Axis::continuous("eps_omega", omega).unwrap(),
    ])
    .unwrap();
    PendulumErrorModel { atoms, weights }
}

pub fn pendulum_state_grid() -> Grid {
    Grid::new(vec![
        Axis::continuous("theta", symmetric_log_space(FRAC_PI_4, 20, 50.0)).unwrap(),
        Axis::continuous("omega", symmetric_log_space(OMEGA_RANGE, 20, 50.0)).unwrap(),
    ])
    .unwrap()
}

/// Zero plus 49 log-spaced atoms up to the failure angle.
pub fn pendulum_cost_support() -> Vec<f64> {
    let max = FAILURE_ANGLE;
    let min = max * 1e-3;
    let n = 49;
    let step = (max / min).ln() / (n - 1) as f64;
    let mut s = vec![0.0];
    s.extend((0..n).map(|i| if i == n - 1 { max } else { min * (step * i as f64).exp() }));
    s
}

/// Final-step cost: absolute angle, capped at the failure angle.
pub fn pendulum_cost(t: usize, theta: f64) -> f64 {
    if t == 0 {
        theta.abs().min(FAILURE_ANGLE)
    } else {
        0.0
    }
}

pub fn build_pendulum_mdp(params: PendulumParams) -> Result<AbstractedPerceptionMdp> {
    let model = pendulum_error_model();
    let weights = model.weights.clone();
    let mdp = AbstractedPerceptionMdp::new(
        pendulum_state_grid(),
        model.atoms,
        TIME_STEPS,
        move |_, _| weights.clone(),
        move |_, s, e| {
            let state = PendulumState::new(s[0], s[1]);
            let perceived = PendulumState::new(s[0] + e[0], s[1] + e[1]);
            let next = step(state, control(perceived, &params), &params);
            vec![(vec![next.theta, next.omega], 1.0)]
        },
        |t, s, _| pendulum_cost(t, s[0]),
    )?
    .with_terminal(|s| (s[0].abs() >= FAILURE_ANGLE).then_some(FAILURE_ANGLE));
    Ok(mdp)
}

/// Solves the pendulum risk MDP, keeping only the episode-start slice.
pub fn solve_pendulum_risk(params: PendulumParams) -> Result<Solved> {
    let mdp = build_pendulum_mdp(params)?;
    solve_with(
        &mdp,
        &pendulum_cost_support(),
        &SolveOptions {
            keep: KeepSlices::Only(vec![RISK_SLICE]),
        },
    )
}

/// Full query point `[t, theta, omega]` at the episode-start slice.
pub fn risk_query(theta: f64, omega: f64) -> [f64; 3] {
    [RISK_SLICE as f64, theta, omega]
}
