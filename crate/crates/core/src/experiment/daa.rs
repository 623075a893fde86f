use crate::daa::{
    detection_metrics, generate_detector_data, marginalize, solve_controller, solve_daa_risk,
    ControllerCosts, DaaParams, DaaPolicy, DetectionMetrics, DetectionModel, Detector,
    DetectorDataset, DetectorLoss, MarginalWeights, SkyConfig, StateSampling,
};
use crate::distdp::{RiskSurface, RiskTable};
use crate::encounters::{occupancy_weights, run_encounters, Perceiver, TrialOutcome};
use crate::error::Result;
use crate::perceptnet::{TrainConfig, TrainReport};

use super::config::{ExperimentConfig, Variant};

/// Everything needed to build the DAA artifacts and train detectors.
#[derive(Debug, Clone, PartialEq)]
pub struct DaaSetup {
    pub params: DaaParams,
    pub costs: ControllerCosts,
    pub detection: DetectionModel,
    pub sky: SkyConfig,
    pub hidden: Vec<usize>,
    pub train: TrainConfig,
    pub dataset_size: usize,
    pub empty_fraction: f64,
    pub lambda: f64,
    pub encounters: usize,
    pub occupancy_encounters: usize,
    pub validation_size: usize,
}

impl DaaSetup {
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        let t = cfg.training();
        let d = &cfg.daa;
        Self {
            params: DaaParams::default(),
            costs: d.controller,
            detection: d.detection,
            sky: d.sky,
            hidden: t.hidden.clone(),
            train: TrainConfig {
                epochs: t.epochs,
                batch_size: t.batch_size,
                lr: t.learning_rate,
                seed: cfg.seeds.base,
            },
            dataset_size: t.dataset_size,
            empty_fraction: d.empty_fraction,
            lambda: cfg.lambda,
            encounters: d.encounters,
            occupancy_encounters: d.occupancy_encounters,
            validation_size: d.validation_size,
        }
    }
}

/// Controller policy and the marginal `[tau, h]` risk table.
#[derive(Debug, Clone, PartialEq)]
pub struct DaaArtifacts {
    pub policy: DaaPolicy,
    pub weights: MarginalWeights,
    pub table: RiskTable,
}

/// Seed of the occupancy encounters used to marginalize the risk table.
pub const OCCUPANCY_SEED: u64 = 0x0CC0;

pub fn build_daa_artifacts(setup: &DaaSetup) -> Result<DaaArtifacts> {
    let policy = solve_controller(&setup.costs, &setup.params)?.policy;
    let full = solve_daa_risk(policy.clone(), setup.detection, setup.params)?.table;
    let weights = occupancy_weights(&policy, &setup.params, setup.occupancy_encounters, OCCUPANCY_SEED)?;
    let table = marginalize(&full, &weights)?;
    Ok(DaaArtifacts {
        policy,
        weights,
        table,
    })
}

pub fn train_detector_variant(
    setup: &DaaSetup,
    variant: Variant,
    surface: Option<&RiskSurface>,
    seed: u64,
) -> Result<(Detector, TrainReport)> {
    let sampling = if variant.uses_risk_data() {
        StateSampling::RiskWeighted
    } else {
        StateSampling::Uniform
    };
    let data = generate_detector_data(
        sampling,
        setup.dataset_size,
        surface,
        &setup.sky,
        setup.empty_fraction,
        seed,
    )?;
    let mut det = Detector::new(setup.sky, &setup.hidden, seed)?;
    let loss = match (variant.uses_risk_loss(), surface) {
        (true, Some(surface)) => DetectorLoss::Risk {
            surface,
            lambda: setup.lambda,
        },
        (true, None) => {
            return Err(crate::Error::InvalidState(
                "risk-sensitive loss needs a risk surface".into(),
            ))
        }
        (false, _) => DetectorLoss::Baseline,
    };
    let report = det.train(&data, &TrainConfig { seed, ..setup.train }, loss)?;
    Ok((det, report))
}

/// Seed of the uniform validation images.
pub const VALIDATION_SEED: u64 = 0x7A11D;

pub fn validation_set(setup: &DaaSetup) -> Result<DetectorDataset> {
    generate_detector_data(
        StateSampling::Uniform,
        setup.validation_size,
        None,
        &setup.sky,
        setup.empty_fraction,
        VALIDATION_SEED,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorEvaluation {
    pub metrics: DetectionMetrics,
    pub outcome: TrialOutcome,
}

/// Closed-loop encounters flown with the detector plus image-level metrics.
pub fn evaluate_detector(
    setup: &DaaSetup,
    artifacts: &DaaArtifacts,
    surface: Option<&RiskSurface>,
    detector: &Detector,
    validation: &DetectorDataset,
    seed: u64,
) -> Result<DetectorEvaluation> {
    let metrics = detection_metrics(detector, validation)?;
    let outcome = run_encounters(
        &artifacts.policy,
        Perceiver::Detector(detector),
        surface,
        &setup.params,
        setup.encounters,
        seed,
    )?;
    Ok(DetectorEvaluation { metrics, outcome })
}
