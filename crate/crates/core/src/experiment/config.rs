use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::daa::{ControllerCosts, DetectionModel, SkyConfig};

/// Environment variable holding the default output root.
pub const OUTPUT_ROOT_ENV: &str = "RISKPERC_OUT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Problem {
    Pendulum,
    Daa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    SolveRisk,
    Train,
    Evaluate,
    Encounters,
    ExportField,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::SolveRisk => "solve-risk",
            Stage::Train => "train",
            Stage::Evaluate => "evaluate",
            Stage::Encounters => "encounters",
            Stage::ExportField => "export-field",
        }
    }
}

/// A perception design: which loss and which data distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Baseline loss on the full uniform dataset.
    Baseline,
    /// Risk-sensitive loss on the full uniform dataset.
    RiskLoss,
    /// Baseline loss on the small uniform dataset.
    UniformData,
    /// Baseline loss on risk-weighted data.
    RiskData,
    /// Risk-sensitive loss on risk-weighted data.
    Combined,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Baseline => "baseline",
            Variant::RiskLoss => "risk-loss",
            Variant::UniformData => "uniform-data",
            Variant::RiskData => "risk-data",
            Variant::Combined => "combined",
        }
    }

    pub fn uses_risk_loss(self) -> bool {
        matches!(self, Variant::RiskLoss | Variant::Combined)
    }

    pub fn uses_risk_data(self) -> bool {
        matches!(self, Variant::RiskData | Variant::Combined)
    }

    pub fn needs_risk(self) -> bool {
        self.uses_risk_loss() || self.uses_risk_data()
    }

    /// Whether the pendulum variant trains on the small data budget.
    pub fn small_budget(self) -> bool {
        matches!(self, Variant::UniformData | Variant::RiskData)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Seeds {
    pub base: u64,
    pub trials: usize,
}

impl Default for Seeds {
    fn default() -> Self {
        Self { base: 0, trials: 5 }
    }
}

/// Training settings; unset fields take the problem's defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epochs: Option<usize>,
    /// Epochs for the small-data pendulum variants.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub small_epochs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub small_dataset_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hidden: Option<Vec<usize>>,
}

/// [`TrainingSection`] with every field resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct Training {
    pub epochs: usize,
    pub small_epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub dataset_size: usize,
    pub small_dataset_size: usize,
    pub hidden: Vec<usize>,
}

impl Training {
    pub fn defaults(problem: Problem) -> Self {
        match problem {
            Problem::Pendulum => Self {
                epochs: 200,
                small_epochs: 1000,
                batch_size: 32,
                learning_rate: 1e-3,
                dataset_size: 10_000,
                small_dataset_size: 50,
                hidden: vec![64, 64],
            },
            Problem::Daa => Self {
                epochs: 20,
                small_epochs: 20,
                batch_size: 32,
                learning_rate: 1e-3,
                dataset_size: 20_000,
                small_dataset_size: 20_000,
                hidden: vec![16],
            },
        }
    }
}

impl TrainingSection {
    pub fn resolve(&self, problem: Problem) -> Training {
        let d = Training::defaults(problem);
        Training {
            epochs: self.epochs.unwrap_or(d.epochs),
            small_epochs: self.small_epochs.unwrap_or(d.small_epochs),
            batch_size: self.batch_size.unwrap_or(d.batch_size),
            learning_rate: self.learning_rate.unwrap_or(d.learning_rate),
            dataset_size: self.dataset_size.unwrap_or(d.dataset_size),
            small_dataset_size: self.small_dataset_size.unwrap_or(d.small_dataset_size),
            hidden: self.hidden.clone().unwrap_or(d.hidden),
        }
    }

    fn fill(t: Training) -> Self {
        Self {
            epochs: Some(t.epochs),
            small_epochs: Some(t.small_epochs),
            batch_size: Some(t.batch_size),
            learning_rate: Some(t.learning_rate),
            dataset_size: Some(t.dataset_size),
            small_dataset_size: Some(t.small_dataset_size),
            hidden: Some(t.hidden),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PendulumSection {
    pub resolution: usize,
    pub noise_sigma: f64,
    pub n_traj: usize,
    pub horizon: usize,
}

impl Default for PendulumSection {
    fn default() -> Self {
        Self {
            resolution: 16,
            noise_sigma: 0.25,
            n_traj: 100,
            horizon: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DaaSection {
    pub controller: ControllerCosts,
    pub detection: DetectionModel,
    pub sky: SkyConfig,
    pub encounters: usize,
    pub occupancy_encounters: usize,
    pub validation_size: usize,
    pub empty_fraction: f64,
}

impl Default for DaaSection {
    fn default() -> Self {
        Self {
            controller: ControllerCosts::default(),
            detection: DetectionModel::default(),
            sky: SkyConfig::default(),
            encounters: 1000,
            occupancy_encounters: 1000,
            validation_size: 1000,
            empty_fraction: 0.7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: Problem,
    /// Optional; when present it must match the command being run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage: Option<Stage>,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default)]
    pub variants: Vec<Variant>,
    #[serde(default)]
    pub seeds: Seeds,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub training: TrainingSection,
    #[serde(default)]
    pub pendulum: PendulumSection,
    #[serde(default)]
    pub daa: DaaSection,
}

fn default_alphas() -> Vec<f64> {
    vec![0.0]
}

fn default_lambda() -> f64 {
    1.0
}

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn training(&self) -> Training {
        self.training.resolve(self.problem)
    }

    /// The config with every default written out, as TOML.
    pub fn to_toml(&self) -> String {
        let mut full = self.clone();
        full.training = TrainingSection::fill(self.training());
        full.variants = self.variants();
        if full.output_dir.is_none() {
            full.output_dir = Some(self.output_dir());
        }
        toml::to_string_pretty(&full).expect("config serializes")
    }

    /// Variants to run; defaults depend on the problem.
    pub fn variants(&self) -> Vec<Variant> {
        if !self.variants.is_empty() {
            return self.variants.clone();
        }
        match self.problem {
            Problem::Pendulum => vec![
                Variant::Baseline,
                Variant::RiskLoss,
                Variant::UniformData,
                Variant::RiskData,
            ],
            Problem::Daa => vec![
                Variant::Baseline,
                Variant::RiskLoss,
                Variant::RiskData,
                Variant::Combined,
            ],
        }
    }

    /// Output directory: the configured one, else `$RISKPERC_OUT/<problem>`,
    /// else `runs/<problem>`.
    pub fn output_dir(&self) -> PathBuf {
        if let Some(d) = &self.output_dir {
            return d.clone();
        }
        let root = std::env::var_os(OUTPUT_ROOT_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("runs"));
        root.join(match self.problem {
            Problem::Pendulum => "pendulum",
            Problem::Daa => "daa",
        })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError(m));
        if self.alphas.is_empty() {
            return bad("alphas must not be empty".into());
        }
        if let Some(a) = self.alphas.iter().find(|a| !(0.0..1.0).contains(*a)) {
            return bad(format!("alpha must satisfy 0 <= alpha < 1, got {a}"));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return bad(format!("lambda must be a finite value >= 0, got {}", self.lambda));
        }
        if self.seeds.trials == 0 {
            return bad("seeds.trials must be at least 1".into());
        }
        let t = &self.training();
        if t.epochs == 0 || t.small_epochs == 0 || t.batch_size == 0 {
            return bad("training epochs and batch size must be at least 1".into());
        }
        if t.dataset_size == 0 || t.small_dataset_size == 0 {
            return bad("dataset sizes must be at least 1".into());
        }
        if !(t.learning_rate > 0.0) {
            return bad(format!("learning_rate must be > 0, got {}", t.learning_rate));
        }
        if t.hidden.contains(&0) {
            return bad("hidden layer widths must be positive".into());
        }
        let p = &self.pendulum;
        if p.resolution < 4 || p.noise_sigma < 0.0 || p.n_traj == 0 || p.horizon == 0 {
            return bad("pendulum section has a non-positive size or negative noise".into());
        }
        let d = &self.daa;
        if d.sky.resolution < 4 || d.sky.noise_sigma < 0.0 || !(d.sky.fov_half_angle_deg > 0.0) {
            return bad("daa.sky has an invalid resolution, noise or field of view".into());
        }
        if d.encounters == 0 || d.occupancy_encounters == 0 || d.validation_size == 0 {
            return bad("daa encounter and validation counts must be at least 1".into());
        }
        if !(0.0..1.0).contains(&d.empty_fraction) {
            return bad("daa.empty_fraction must lie in [0, 1)".into());
        }
        if !(d.controller.nmac > 0.0) || d.controller.alert < 0.0 || d.controller.reversal < 0.0 {
            return bad("daa.controller costs must be non-negative with a positive nmac cost".into());
        }
        let m = &d.detection;
        if !(0.0..=1.0).contains(&m.max_probability) || !(m.range_scale > 0.0) || m.cone_slope < 0.0 {
            return bad("daa.detection parameters are out of range".into());
        }
        Ok(())
    }
}
