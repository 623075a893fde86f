//! Small dense networks with explicit backpropagation, the risk-sensitive
//! loss, pendulum dataset generation, training and closed-loop evaluation.

mod data;
mod loss;
mod mttf;
mod net;
mod train;

pub use data::{generate_dataset, previous_state, DataKind, LabeledDataset, StateScaling};
pub use loss::{loss_baseline, loss_baseline_grad, LossParts, RiskPenalty};
pub use mttf::{
    evaluate_mttf, observation_batch, run_trial, ConstantEstimator, MttfConfig, MttfReport,
    NetEstimator, PerfectEstimator, StateEstimator,
};
pub use net::{Adam, Gradients, Head, PerceptionNet, Trace};
pub use train::{batch_gradient, estimator_loss, train, train_with, TrainConfig, TrainReport};
