//! Risk-driven design of perception systems for closed-loop control.
//!
//! The crate computes CVaR risk functions over MDPs whose actions are
//! perception errors, then uses them to shape perception training through a
//! risk-sensitive loss and risk-weighted data generation. Two case studies
//! are included: a vision-based inverted pendulum and an aircraft
//! detect-and-avoid system evaluated on a Monte Carlo encounter set.

pub mod daa;
pub mod distdp;
pub mod encounters;
pub mod error;
pub mod experiment;
pub mod pendulum;
pub mod perceptnet;
pub mod stats;
pub mod risk;

pub use error::{Error, Result};
