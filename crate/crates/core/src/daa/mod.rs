//! Detect and avoid: vertical collision-avoidance controller, detection
//! error model, risk MDP with marginalization, and the synthetic detector
//! pipeline.

mod controller;
mod detection;
mod detector;
mod dynamics;
mod risk;
mod sky;

pub use controller::{
    a_prev_axis, h_axis, hdot_axis, solve_controller, tau_axis, ControllerCosts, ControllerSolve,
    DaaPolicy, H_LIMIT, NMAC_VERTICAL, TAU_MAX,
};
pub use detection::DetectionModel;
pub use dynamics::{daa_step, next_rate, Advisory, DaaParams, DaaState, RATE_NOISE};
pub use risk::{
    build_daa_risk_mdp, daa_cost_support, daa_risk_weight_field, detection_errors, marginalize,
    objectness_risk, objectness_risk_slope, separation_cost, solve_daa_risk, MarginalWeights,
    MAX_SEPARATION_COST,
};
pub use detector::{
    detection_metrics, detector_loss, generate_detector_data, DetectionMetrics, Detector,
    DetectorDataset, DetectorLoss, Prediction, StateSampling, CENTRE_TOLERANCE_PX,
    DETECTION_THRESHOLD,
};
pub use sky::{project, render_sky, sample_geometry, BlobLabel, RelativeGeometry, SkyConfig, SkyImage};
