use crate::distdp::{RiskSurface, RiskTable};
use crate::error::Result;
use crate::pendulum::{
    solve_pendulum_risk, PendulumParams, RenderConfig, FAILURE_ANGLE, RISK_SLICE,
};
use crate::perceptnet::{
    evaluate_mttf, generate_dataset, train, DataKind, Head, MttfConfig, NetEstimator,
    PerceptionNet, RiskPenalty, StateScaling, TrainConfig, TrainReport,
};
use crate::risk::RiskLevel;

use super::config::{ExperimentConfig, Variant};

/// Everything needed to train and evaluate pendulum state estimators.
#[derive(Debug, Clone, PartialEq)]
pub struct PendulumSetup {
    pub params: PendulumParams,
    pub render: RenderConfig,
    pub hidden: Vec<usize>,
    pub train: TrainConfig,
    pub small_epochs: usize,
    pub dataset_size: usize,
    pub small_dataset_size: usize,
    pub lambda: f64,
    pub n_traj: usize,
    pub horizon: usize,
}

impl PendulumSetup {
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        let t = cfg.training();
        Self {
            params: PendulumParams::default(),
            render: RenderConfig {
                resolution: cfg.pendulum.resolution,
                noise_sigma: cfg.pendulum.noise_sigma,
                ..RenderConfig::default()
            },
            hidden: t.hidden.clone(),
            train: TrainConfig {
                epochs: t.epochs,
                batch_size: t.batch_size,
                lr: t.learning_rate,
                seed: cfg.seeds.base,
            },
            small_epochs: t.small_epochs,
            dataset_size: t.dataset_size,
            small_dataset_size: t.small_dataset_size,
            lambda: cfg.lambda,
            n_traj: cfg.pendulum.n_traj,
            horizon: cfg.pendulum.horizon,
        }
    }

    pub fn new_net(&self, seed: u64) -> Result<PerceptionNet> {
        let mut sizes = vec![self.render.observation_len()];
        sizes.extend_from_slice(&self.hidden);
        sizes.push(2);
        PerceptionNet::new(&sizes, &[Head::Tanh; 2], seed)
    }

    pub fn mttf_config(&self, seed: u64) -> MttfConfig {
        MttfConfig {
            n_traj: self.n_traj,
            horizon: self.horizon,
            n_trials: 1,
            seed,
            render: self.render,
            params: self.params,
        }
    }
}

impl Default for PendulumSetup {
    fn default() -> Self {
        Self::from_config(&ExperimentConfig::from_toml("problem = \"pendulum\"").unwrap())
    }
}

pub fn pendulum_risk_table(params: &PendulumParams) -> Result<RiskTable> {
    Ok(solve_pendulum_risk(*params)?.table)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedEstimator {
    pub net: PerceptionNet,
    pub scaling: StateScaling,
    pub report: TrainReport,
}

/// Trains one estimator for `variant` with data, initialization and batch
/// order all derived from `seed`. `surface` is needed by risk-driven variants.
pub fn train_pendulum_variant(
    setup: &PendulumSetup,
    variant: Variant,
    surface: Option<&RiskSurface>,
    seed: u64,
) -> Result<TrainedEstimator> {
    let kind = if variant.uses_risk_data() {
        DataKind::RiskWeighted
    } else {
        DataKind::Uniform
    };
    let (n, epochs) = if variant.small_budget() {
        (setup.small_dataset_size, setup.small_epochs)
    } else {
        (setup.dataset_size, setup.train.epochs)
    };
    let data = generate_dataset(kind, n, surface, &setup.render, &setup.params, seed)?;
    let mut net = setup.new_net(seed)?;
    let cfg = TrainConfig {
        epochs,
        seed,
        ..setup.train
    };
    let penalty = if variant.uses_risk_loss() {
        let surface = surface.ok_or_else(|| {
            crate::Error::InvalidState("risk-sensitive loss needs a risk surface".into())
        })?;
        Some(RiskPenalty::new(
            surface.clone(),
            vec![RISK_SLICE as f64],
            setup.lambda,
            FAILURE_ANGLE,
        )?)
    } else {
        None
    };
    let report = train(&mut net, &data, &cfg, penalty.as_ref())?;
    Ok(TrainedEstimator {
        net,
        scaling: data.scaling,
        report,
    })
}

/// Mean time to failure of one trained estimator over one evaluation trial.
pub fn pendulum_mttf(setup: &PendulumSetup, est: &TrainedEstimator, seed: u64) -> Result<f64> {
    let e = NetEstimator {
        net: &est.net,
        scaling: est.scaling.clone(),
    };
    Ok(evaluate_mttf(&e, &setup.mttf_config(seed))?.mean)
}

/// Seed of trial `k` for a given base seed.
pub fn trial_seed(base: u64, k: usize) -> u64 {
    base.wrapping_add(k as u64)
}

/// Seed used to evaluate trial `k`, disjoint from the training seeds.
pub fn evaluation_seed(base: u64, k: usize) -> u64 {
    trial_seed(base, k) ^ 0xE7A1_0000
}

/// Retrains and evaluates `variant` over `trials` seeded trials, returning
/// the per-trial MTTF.
pub fn pendulum_trials(
    setup: &PendulumSetup,
    variant: Variant,
    table: Option<&RiskTable>,
    alpha: f64,
    trials: usize,
    base_seed: u64,
) -> Result<Vec<f64>> {
    let surface = match table {
        Some(t) if variant.needs_risk() => Some(t.surface(RiskLevel::new(alpha)?)),
        _ => None,
    };
    (0..trials)
        .map(|k| {
            let est = train_pendulum_variant(setup, variant, surface.as_ref(), trial_seed(base_seed, k))?;
            pendulum_mttf(setup, &est, evaluation_seed(base_seed, k))
        })
        .collect()
}
