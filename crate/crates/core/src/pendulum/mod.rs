//! Vision-based inverted pendulum: dynamics, balancing controller, frame
//! renderer, additive error model and the abstracted-perception MDP.

mod dynamics;
mod mdp;
mod render;

pub use dynamics::{control, step, PendulumParams, PendulumState, FAILURE_ANGLE};
pub use mdp::{
    build_pendulum_mdp, pendulum_cost, pendulum_cost_support, pendulum_error_model,
    pendulum_state_grid, risk_query, solve_pendulum_risk, PendulumErrorModel, OMEGA_RANGE,
    RISK_SLICE, SIGMA_OMEGA, SIGMA_THETA, TIME_STEPS,
};
pub use render::{render, render_frame, ObservationFrames, RenderConfig};
