use std::f64::consts::PI;

/// Angle beyond which the pendulum counts as fallen.
pub const FAILURE_ANGLE: f64 = PI / 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendulumState {
    /// Radians from vertical.
    pub theta: f64,
    /// Radians per second.
    pub omega: f64,
}

impl PendulumState {
    pub fn new(theta: f64, omega: f64) -> Self {
        Self { theta, omega }
    }

    pub fn has_failed(&self) -> bool {
        self.theta.abs() > FAILURE_ANGLE
    }

    pub fn to_vec(self) -> [f64; 2] {
        [self.theta, self.omega]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendulumParams {
    pub gravity: f64,
    pub length: f64,
    pub mass: f64,
    pub dt: f64,
    pub max_torque: f64,
    pub max_speed: f64,
}

impl Default for PendulumParams {
    fn default() -> Self {
        Self {
            gravity: 10.0,
            length: 1.0,
            mass: 1.0,
            dt: 0.05,
            max_torque: 2.0,
            max_speed: 8.0,
        }
    }
}

/// One explicit Euler step. The time step scales both the gravity and the
/// torque contributions to the angular acceleration.
pub fn step(s: PendulumState, torque: f64, p: &PendulumParams) -> PendulumState {
    let a = torque.clamp(-p.max_torque, p.max_torque);
    let accel = (3.0 * p.gravity / (2.0 * p.length)) * s.theta.sin()
        + 3.0 * a / (p.mass * p.length * p.length);
    PendulumState {
        theta: s.theta + s.omega * p.dt,
        omega: (s.omega + accel * p.dt).clamp(-p.max_speed, p.max_speed),
    }
}

/// Rule-based balancing controller acting on a state estimate.
pub fn control(s_hat: PendulumState, p: &PendulumParams) -> f64 {
    let target = if s_hat.theta == 0.0 {
        0.0
    } else {
        s_hat.theta.signum() * (60.0 * (1.0 - s_hat.theta.cos())).sqrt()
    };
    let torque = -2.0 * s_hat.omega + (s_hat.omega - target);
    torque.clamp(-p.max_torque, p.max_torque)
}
