//! Abstracted-perception MDPs and their distributional dynamic-programming
//! solution: return distributions per (state, error), CVaR risk queries and
//! the risk weighting function used for data generation.

mod grid;
mod io;
mod mdp;
mod sampling;
mod solver;
mod table;

pub use grid::{symmetric_log_space, Axis, AxisKind, Grid};
pub use io::{ContainerReader, ContainerWriter};
pub use mdp::AbstractedPerceptionMdp;
pub use sampling::rejection_sample_states;
pub use solver::{solve, solve_with, KeepSlices, SolveOptions, SolveReport, Solved};
pub use table::{ErrorRef, RiskSurface, RiskTable};
