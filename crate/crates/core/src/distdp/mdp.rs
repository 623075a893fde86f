use std::fmt;

use super::grid::Grid;
use crate::error::{Error, Result};

type ErrorPolicyFn = dyn Fn(usize, &[f64]) -> Vec<f64> + Send + Sync;
type TransitionFn = dyn Fn(usize, &[f64], &[f64]) -> Vec<(Vec<f64>, f64)> + Send + Sync;
type CostFn = dyn Fn(usize, &[f64], &[f64]) -> f64 + Send + Sync;
type TerminalFn = dyn Fn(&[f64]) -> Option<f64> + Send + Sync;

/// An MDP whose actions are perception errors.
///
/// The controller is folded into the transition: `transition(t, s, e)` returns
/// the successor distribution of `s` when the controller acts on the state as
/// perceived with error `e`. Time `t` counts steps remaining in the episode;
/// successors are evaluated at `t - 1` and `t = 0` is the final step, where
/// only the cost applies.
pub struct AbstractedPerceptionMdp {
    /// Non-time state grid.
    pub grid: Grid,
    /// Error atoms as a product grid; a flat index identifies one atom.
    pub errors: Grid,
    /// Number of time slices, `t` in `0..time_steps`.
    pub time_steps: usize,
    pub discount: f64,
    error_policy: Box<ErrorPolicyFn>,
    transition: Box<TransitionFn>,
    cost: Box<CostFn>,
    terminal: Option<Box<TerminalFn>>,
}

impl fmt::Debug for AbstractedPerceptionMdp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AbstractedPerceptionMdp")
            .field("grid", &self.grid)
            .field("errors", &self.errors)
            .field("time_steps", &self.time_steps)
            .field("discount", &self.discount)
            .finish_non_exhaustive()
    }
}

impl AbstractedPerceptionMdp {
    pub fn new(
        grid: Grid,
        errors: Grid,
        time_steps: usize,
        error_policy: impl Fn(usize, &[f64]) -> Vec<f64> + Send + Sync + 'static,
        transition: impl Fn(usize, &[f64], &[f64]) -> Vec<(Vec<f64>, f64)> + Send + Sync + 'static,
        cost: impl Fn(usize, &[f64], &[f64]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if time_steps == 0 {
            return Err(Error::MalformedMdp("time_steps must be positive".into()));
        }
        Ok(Self {
            grid,
            errors,
            time_steps,
            discount: 1.0,
            error_policy: Box::new(error_policy),
            transition: Box::new(transition),
            cost: Box::new(cost),
            terminal: None,
        })
    }

    pub fn with_discount(mut self, discount: f64) -> Result<Self> {
        if !(discount > 0.0 && discount <= 1.0) {
            return Err(Error::MalformedMdp(format!("discount {discount} not in (0, 1]")));
        }
        self.discount = discount;
        Ok(self)
    }

    /// Marks absorbing states. A state for which `terminal` returns `Some(c)`
    /// has a point-mass return at `c` for every error and time.
    pub fn with_terminal(
        mut self,
        terminal: impl Fn(&[f64]) -> Option<f64> + Send + Sync + 'static,
    ) -> Self {
        self.terminal = Some(Box::new(terminal));
        self
    }

    pub fn error_atom(&self, index: usize) -> Vec<f64> {
        self.errors.point(index)
    }

    pub fn n_errors(&self) -> usize {
        self.errors.len()
    }

    pub fn error_weights(&self, t: usize, s: &[f64]) -> Vec<f64> {
        (self.error_policy)(t, s)
    }

    pub fn transition(&self, t: usize, s: &[f64], e: &[f64]) -> Vec<(Vec<f64>, f64)> {
        (self.transition)(t, s, e)
    }

    pub fn cost(&self, t: usize, s: &[f64], e: &[f64]) -> f64 {
        (self.cost)(t, s, e)
    }

    pub fn terminal_cost(&self, s: &[f64]) -> Option<f64> {
        self.terminal.as_ref().and_then(|f| f(s))
    }
}
