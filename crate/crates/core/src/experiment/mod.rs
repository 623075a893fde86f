//! Reproducible experiment pipelines driven by an [`ExperimentConfig`].
//!
//! Each stage reads its prerequisites from the output directory, writes its
//! artifacts and CSV rows there, and records the resolved config beside them.

mod config;
mod daa;
mod pendulum;

use std::path::{Path, PathBuf};

pub use config::{
    ConfigError, DaaSection, ExperimentConfig, PendulumSection, Problem, Seeds, Stage,
    Training, TrainingSection, Variant, OUTPUT_ROOT_ENV,
};
pub use daa::{
    build_daa_artifacts, evaluate_detector, train_detector_variant, validation_set, DaaArtifacts,
    DaaSetup, DetectorEvaluation, OCCUPANCY_SEED, VALIDATION_SEED,
};
pub use pendulum::{
    evaluation_seed, pendulum_mttf, pendulum_risk_table, pendulum_trials, train_pendulum_variant,
    trial_seed, PendulumSetup, TrainedEstimator,
};

use crate::daa::{Advisory, DaaPolicy, Detector};
use crate::distdp::RiskTable;
use crate::encounters::{
    run_encounters, sample_encounter, simulate, encounter_seed, Perceiver, PerceiverReport,
};
use crate::pendulum::{risk_query, FAILURE_ANGLE, RISK_SLICE};
use crate::perceptnet::{PerceptionNet, StateScaling};
use crate::risk::RiskLevel;
use crate::stats::mean_and_se;

pub const RISK_TABLE_FILE: &str = "risk_table.rpct";
pub const POLICY_FILE: &str = "policy.dpol";
pub const CHECKPOINT_DIR: &str = "checkpoints";

/// Failure classes of a pipeline run, each with its own exit code.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(String),
    #[error("missing prerequisite: {0}")]
    Prerequisite(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Prerequisite(_) => 3,
            RunError::Runtime(_) => 4,
        }
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e.0)
    }
}

impl From<crate::Error> for RunError {
    fn from(e: crate::Error) -> Self {
        RunError::Runtime(e.to_string())
    }
}

impl From<csv::Error> for RunError {
    fn from(e: csv::Error) -> Self {
        RunError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Runtime(e.to_string())
    }
}

pub type RunResult<T> = std::result::Result<T, RunError>;

/// Runs one stage and returns human-readable summary lines.
pub fn run_stage(cfg: &ExperimentConfig, stage: Stage) -> RunResult<Vec<String>> {
    cfg.validate()?;
    if let Some(s) = cfg.stage {
        if s != stage {
            return Err(RunError::Config(format!(
                "config is for stage `{}` but `{}` was requested",
                s.name(),
                stage.name()
            )));
        }
    }
    let out = cfg.output_dir();
    std::fs::create_dir_all(&out)?;
    std::fs::write(out.join(format!("config.{}.toml", stage.name())), cfg.to_toml())?;
    match (cfg.problem, stage) {
        (Problem::Pendulum, Stage::SolveRisk) => pendulum_solve(cfg, &out),
        (Problem::Pendulum, Stage::Train) => pendulum_train(cfg, &out),
        (Problem::Pendulum, Stage::Evaluate) => pendulum_evaluate(cfg, &out),
        (Problem::Pendulum, Stage::ExportField) => pendulum_export(cfg, &out),
        (Problem::Daa, Stage::SolveRisk) => daa_solve(cfg, &out),
        (Problem::Daa, Stage::Train) => daa_train(cfg, &out),
        (Problem::Daa, Stage::Evaluate) => daa_evaluate(cfg, &out),
        (Problem::Daa, Stage::Encounters) => daa_encounters(cfg, &out),
        (Problem::Daa, Stage::ExportField) => daa_export(cfg, &out),
        (Problem::Pendulum, Stage::Encounters) => Err(RunError::Config(
            "the encounters stage applies to the daa problem only".into(),
        )),
    }
}

/// One trained model: which variant, risk level and trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunKey {
    pub variant: Variant,
    /// `None` for variants that do not use the risk function.
    pub alpha: Option<f64>,
    pub trial: usize,
}

impl RunKey {
    pub fn checkpoint_name(&self) -> String {
        match self.alpha {
            Some(a) => format!("{}-a{a}-t{}.pnet", self.variant.name(), self.trial),
            None => format!("{}-t{}.pnet", self.variant.name(), self.trial),
        }
    }

    pub fn alpha_label(&self) -> String {
        self.alpha.map(|a| a.to_string()).unwrap_or_default()
    }
}

/// All models a config asks for, in a fixed order.
pub fn run_keys(cfg: &ExperimentConfig) -> Vec<RunKey> {
    let mut keys = Vec::new();
    for variant in cfg.variants() {
        let alphas: Vec<Option<f64>> = if variant.needs_risk() {
            cfg.alphas.iter().map(|a| Some(*a)).collect()
        } else {
            vec![None]
        };
        for alpha in alphas {
            for trial in 0..cfg.seeds.trials {
                keys.push(RunKey {
                    variant,
                    alpha,
                    trial,
                });
            }
        }
    }
    keys
}

fn needs_risk(cfg: &ExperimentConfig) -> bool {
    cfg.variants().iter().any(|v| v.needs_risk())
}

fn load_table(out: &Path) -> RunResult<RiskTable> {
    let path = out.join(RISK_TABLE_FILE);
    if !path.exists() {
        return Err(RunError::Prerequisite(format!(
            "{} not found; run `solve-risk` first",
            path.display()
        )));
    }
    Ok(RiskTable::load(path)?)
}

fn load_policy(out: &Path) -> RunResult<DaaPolicy> {
    let path = out.join(POLICY_FILE);
    if !path.exists() {
        return Err(RunError::Prerequisite(format!(
            "{} not found; run `solve-risk` first",
            path.display()
        )));
    }
    Ok(DaaPolicy::load(path)?)
}

fn load_checkpoint(out: &Path, key: &RunKey) -> RunResult<PerceptionNet> {
    let path = out.join(CHECKPOINT_DIR).join(key.checkpoint_name());
    if !path.exists() {
        return Err(RunError::Prerequisite(format!(
            "{} not found; run `train` first",
            path.display()
        )));
    }
    Ok(PerceptionNet::load(path)?)
}

fn alpha_level(a: f64) -> RunResult<RiskLevel> {
    RiskLevel::new(a).map_err(|e| RunError::Config(e.to_string()))
}

fn writer(path: PathBuf, header: &[&str]) -> RunResult<csv::Writer<std::fs::File>> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    Ok(w)
}

fn summary_rows<'a>(
    rows: impl Iterator<Item = (String, String, f64)> + 'a,
) -> Vec<(String, String, Vec<f64>)> {
    let mut groups: Vec<(String, String, Vec<f64>)> = Vec::new();
    for (v, a, x) in rows {
        match groups.iter_mut().find(|g| g.0 == v && g.1 == a) {
            Some(g) => g.2.push(x),
            None => groups.push((v, a, vec![x])),
        }
    }
    groups
}

fn pendulum_solve(cfg: &ExperimentConfig, out: &Path) -> RunResult<Vec<String>> {
    let setup = PendulumSetup::from_config(cfg);
    let solved = crate::pendulum::solve_pendulum_risk(setup.params)?;
    solved.table.save(out.join(RISK_TABLE_FILE))?;
    let r = &solved.report;
    let mut lines = vec![format!(
        "pendulum risk table: {} cells, solved in {:.2?}",
        solved.table.grid().len(),
        r.elapsed
    )];
    if r.clamped_returns > 0 {
        lines.push(format!("warning: {} returns clamped to the cost support", r.clamped_returns));
    }
    Ok(lines)
}

fn pendulum_train(cfg: &ExperimentConfig, out: &Path) -> RunResult<Vec<String>> {
    let setup = PendulumSetup::from_config(cfg);
    let table = if needs_risk(cfg) { Some(load_table(out)?) } else { None };
    let dir = out.join(CHECKPOINT_DIR);
    std::fs::create_dir_all(&dir)?;
    let mut w = writer(out.join("train_loss.csv"), &["variant", "alpha", "trial", "epoch", "loss"])?;
    let mut lines = Vec::new();
    for key in run_keys(cfg) {
        let surface = match (&table, key.alpha) {
            (Some(t), Some(a)) => Some(t.surface(alpha_level(a)?)),
            _ => None,
        };
        let seed = trial_seed(cfg.seeds.base, key.trial);
        let est = train_pendulum_variant(&setup, key.variant, surface.as_ref(), seed)?;
        est.net.save(dir.join(key.checkpoint_name()))?;
        for (epoch, loss) in est.report.epoch_loss.iter().enumerate() {
            w.write_record([
                key.variant.name().to_string(),
                key.alpha_label(),
                key.trial.to_string(),
                epoch.to_string(),
                loss.to_string(),
            ])?;
        }
        lines.push(format!(
            "{}: final loss {:.5}",
            key.checkpoint_name(),
            est.report.final_loss()
        ));
    }
    w.flush()?;
    Ok(lines)
}

fn pendulum_evaluate(cfg: &ExperimentConfig, out: &Path) -> RunResult<Vec<String>> {
    let setup = PendulumSetup::from_config(cfg);
    let mut w = writer(out.join("mttf.csv"), &["variant", "alpha", "trial", "mttf"])?;
    let mut rows = Vec::new();
    for key in run_keys(cfg) {
        let net = load_checkpoint(out, &key)?;
        let est = TrainedEstimator {
            net,
            scaling: StateScaling::pendulum(&setup.params),
            report: crate::perceptnet::TrainReport { epoch_loss: vec![] },
        };
        let mttf = pendulum_mttf(&setup, &est, evaluation_seed(cfg.seeds.base, key.trial))?;
        w.write_record([
            key.variant.name().to_string(),
            key.alpha_label(),
            key.trial.to_string(),
            mttf.to_string(),
        ])?;
        rows.push((key.variant.name().to_string(), key.alpha_label(), mttf));
    }
    w.flush()?;
    let mut s = writer(out.join("mttf_summary.csv"), &["variant", "alpha", "trials", "mean", "se"])?;
    let mut lines = vec![format!("{:<14} {:>6} {:>16}", "variant", "alpha", "MTTF")];
    for (v, a, xs) in summary_rows(rows.into_iter()) {
        let (m, se) = mean_and_se(&xs);
        s.write_record([v.clone(), a.clone(), xs.len().to_string(), m.to_string(), se.to_string()])?;
        lines.push(format!("{v:<14} {a:>6} {m:>9.1} ± {se:<5.1}"));
    }
    s.flush()?;
    Ok(lines)
}

fn pendulum_export(cfg: &ExperimentConfig, out: &Path) -> RunResult<Vec<String>> {
    let table = load_table(out)?;
    let grid = crate::pendulum::pendulum_state_grid();
    let mut w = writer(out.join("weight_field.csv"), &["alpha", "theta", "omega", "weight"])?;
    let mut p = writer(
        out.join("risk_profile.csv"),
        &["alpha", "theta", "omega", "eps_theta", "eps_omega", "risk"],
    )?;
    for &a in &cfg.alphas {
        let surface = table.surface(alpha_level(a)?);
        for s in grid.points() {
            let weight = surface.weight(&risk_query(s[0], s[1]));
            w.write_record([a, s[0], s[1], weight].map(|x| x.to_string()))?;
        }
        for theta in [-0.2, 0.0, 0.2] {
            let q = risk_query(theta, 0.0);
            let profile = surface.profile(&q);
            for (i, e) in surface.errors().points().enumerate() {
                p.write_record([a, theta, 0.0, e[0], e[1], profile[i]].map(|x| x.to_string()))?;
            }
        }
    }
    w.flush()?;
    p.flush()?;
    Ok(vec![format!(
        "exported weight field and risk profiles at slice {RISK_SLICE} for {} alpha values (failure angle {FAILURE_ANGLE:.4})",
        cfg.alphas.len()
    )])
}

fn daa_solve(cfg: &ExperimentConfig, out: &Path) -> RunResult<Vec<String>> {
    let setup = DaaSetup::from_config(cfg);
    let start = std::time::Instant::now();
    let artifacts = build_daa_artifacts(&setup)?;
    artifacts.policy.save(out.join(POLICY_FILE))?;
    artifacts.table.save(out.join(RISK_TABLE_FILE))?;
    Ok(vec![format!(
        "daa policy and marginal risk table ({} cells) built in {:.2?}",
        artifacts.table.grid().len(),
        start.elapsed()
    )])
}

fn daa_train(cfg: &ExperimentConfig, out: &Path) -> RunResult<Vec<String>> {
    let setup = DaaSetup::from_config(cfg);
    let table = if needs_risk(cfg) { Some(load_table(out)?) } else { None };
    let dir = out.join(CHECKPOINT_DIR);
    std::fs::create_dir_all(&dir)?;
    let mut w = writer(out.join("train_loss.csv"), &["variant", "alpha", "trial", "epoch", "loss"])?;
    let mut lines = Vec::new();
    for key in run_keys(cfg) {
        let surface = match (&table, key.alpha) {
            (Some(t), Some(a)) => Some(t.surface(alpha_level(a)?)),
            _ => None,
        };
        let seed = trial_seed(cfg.seeds.base, key.trial);
        let (det, report) = train_detector_variant(&setup, key.variant, surface.as_ref(), seed)?;
        det.net.save(dir.join(key.checkpoint_name()))?;
        for (epoch, loss) in report.epoch_loss.iter().enumerate() {
            w.write_record([
                key.variant.name().to_string(),
                key.alpha_label(),
                key.trial.to_string(),
                epoch.to_string(),
                loss.to_string(),
            ])?;
        }
        lines.push(format!("{}: final loss {:.5}", key.checkpoint_name(), report.final_loss()));
    }
    w.flush()?;
    Ok(lines)
}

const CDF_THRESHOLDS: [f64; 16] = [
    0.0, 5.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0, 100.0, 110.0, 120.0, 135.0,
    150.0,
];

fn write_cdf(
    w: &mut csv::Writer<std::fs::File>,
    name: &str,
    alpha: &str,
    report: &PerceiverReport,
) -> RunResult<()> {
    for (x, f) in CDF_THRESHOLDS.iter().zip(report.risk_cdf(&CDF_THRESHOLDS)) {
        w.write_record([name.to_string(), alpha.to_string(), x.to_string(), f.to_string()])?;
    }
    Ok(())
}

fn daa_evaluate(cfg: &ExperimentConfig, out: &Path) -> RunResult<Vec<String>> {
    let setup = DaaSetup::from_config(cfg);
    let policy = load_policy(out)?;
    let table = load_table(out)?;
    let log_surface = table.surface(alpha_level(cfg.alphas[0])?);
    let artifacts = DaaArtifacts {
        policy,
        weights: crate::daa::MarginalWeights::uniform(),
        table,
    };
    let validation = validation_set(&setup)?;
    let mut w = writer(
        out.join("detectors.csv"),
        &["variant", "alpha", "trial", "nmac", "precision", "recall", "top_decile_risk"],
    )?;
    let mut cdf = writer(out.join("risk_cdf.csv"), &["perceiver", "alpha", "risk", "cdf"])?;
    let mut outcomes: Vec<((String, String), Vec<crate::encounters::TrialOutcome>, Vec<f64>)> =
        Vec::new();
    for key in run_keys(cfg) {
        let det = Detector {
            net: load_checkpoint(out, &key)?,
            sky: setup.sky,
        };
        let eval = evaluate_detector(
            &setup,
            &artifacts,
            Some(&log_surface),
            &det,
            &validation,
            evaluation_seed(cfg.seeds.base, key.trial),
        )?;
        let single = PerceiverReport::from_trials("", std::slice::from_ref(&eval.outcome));
        w.write_record([
            key.variant.name().to_string(),
            key.alpha_label(),
            key.trial.to_string(),
            eval.outcome.nmac_count().to_string(),
            eval.metrics.precision.to_string(),
            eval.metrics.recall.to_string(),
            single.top_decile_risk().to_string(),
        ])?;
        let id = (key.variant.name().to_string(), key.alpha_label());
        match outcomes.iter_mut().find(|o| o.0 == id) {
            Some(o) => {
                o.1.push(eval.outcome);
                o.2.push(eval.metrics.precision);
            }
            None => outcomes.push((id, vec![eval.outcome], vec![eval.metrics.precision])),
        }
    }
    w.flush()?;
    let mut s = writer(
        out.join("detectors_summary.csv"),
        &["variant", "alpha", "trials", "nmac_mean", "nmac_se", "precision_mean", "top_decile_risk"],
    )?;
    let mut lines = vec![format!(
        "{:<12} {:>6} {:>16} {:>10} {:>10}",
        "variant", "alpha", "NMAC", "precision", "top risk"
    )];
    for ((v, a), trials, precision) in &outcomes {
        let report = PerceiverReport::from_trials(v.clone(), trials);
        let (p, _) = mean_and_se(precision);
        s.write_record([
            v.clone(),
            a.clone(),
            trials.len().to_string(),
            report.nmac_mean.to_string(),
            report.nmac_se.to_string(),
            p.to_string(),
            report.top_decile_risk().to_string(),
        ])?;
        write_cdf(&mut cdf, v, a, &report)?;
        lines.push(format!(
            "{v:<12} {a:>6} {:>8.1} ± {:<5.1} {p:>10.3} {:>10.2}",
            report.nmac_mean,
            report.nmac_se,
            report.top_decile_risk()
        ));
    }
    s.flush()?;
    cdf.flush()?;
    Ok(lines)
}

/// Number of encounters per reference perceiver written as full traces.
pub const TRACE_ENCOUNTERS: usize = 5;

fn daa_encounters(cfg: &ExperimentConfig, out: &Path) -> RunResult<Vec<String>> {
    let setup = DaaSetup::from_config(cfg);
    let policy = load_policy(out)?;
    let table = load_table(out)?;
    let surface = table.surface(alpha_level(cfg.alphas[0])?);
    let perceivers = [
        Perceiver::Never,
        Perceiver::Stochastic(&setup.detection),
        Perceiver::Perfect,
    ];
    let mut w = writer(out.join("encounters.csv"), &["perceiver", "trial", "encounter", "nmac"])?;
    let mut cdf = writer(out.join("risk_cdf_reference.csv"), &["perceiver", "alpha", "risk", "cdf"])?;
    let mut traces = writer(
        out.join("traces.csv"),
        &["perceiver", "encounter", "t", "own_z", "intruder_z", "detected", "advisory"],
    )?;
    let mut lines = Vec::new();
    let alpha = cfg.alphas[0].to_string();
    for p in perceivers {
        let outcomes = (0..cfg.seeds.trials)
            .map(|k| {
                run_encounters(
                    &policy,
                    p,
                    Some(&surface),
                    &setup.params,
                    setup.encounters,
                    evaluation_seed(cfg.seeds.base, k),
                )
            })
            .collect::<crate::Result<Vec<_>>>()?;
        for (k, o) in outcomes.iter().enumerate() {
            for (i, nmac) in o.nmac.iter().enumerate() {
                w.write_record([p.name().to_string(), k.to_string(), i.to_string(), (*nmac as u8).to_string()])?;
            }
        }
        for i in 0..TRACE_ENCOUNTERS.min(setup.encounters) {
            let seed = encounter_seed(evaluation_seed(cfg.seeds.base, 0), i);
            let r = simulate(&sample_encounter(seed), &policy, p, None, &setup.params, seed ^ 0x5EED)?;
            for t in 0..r.advisories.len() {
                traces.write_record([
                    p.name().to_string(),
                    i.to_string(),
                    t.to_string(),
                    r.own_altitude[t].to_string(),
                    r.intruder_altitude[t].to_string(),
                    (r.detections[t] as u8).to_string(),
                    r.advisories[t].name().to_string(),
                ])?;
            }
        }
        let report = PerceiverReport::from_trials(p.name(), &outcomes);
        write_cdf(&mut cdf, p.name(), &alpha, &report)?;
        lines.push(format!(
            "{:<10} NMAC {:>7.1} ± {:<5.1} of {} encounters",
            p.name(),
            report.nmac_mean,
            report.nmac_se,
            setup.encounters
        ));
    }
    w.flush()?;
    cdf.flush()?;
    traces.flush()?;
    Ok(lines)
}

fn daa_export(cfg: &ExperimentConfig, out: &Path) -> RunResult<Vec<String>> {
    let table = load_table(out)?;
    let mut w = writer(
        out.join("weight_field.csv"),
        &["alpha", "tau", "h", "weight", "risk_detected", "risk_missed"],
    )?;
    for &a in &cfg.alphas {
        let surface = table.surface(alpha_level(a)?);
        for (c, s) in table.grid().points().enumerate() {
            let q = surface.cell_values(c);
            w.write_record([a, s[0], s[1], surface.cell_weight(c), q[0], q[1]].map(|x| x.to_string()))?;
        }
    }
    w.flush()?;
    let mut lines = vec![format!("exported weight field for {} alpha values", cfg.alphas.len())];
    let policy_path = out.join(POLICY_FILE);
    if policy_path.exists() {
        let policy = DaaPolicy::load(policy_path)?;
        let mut p = writer(out.join("policy_slice.csv"), &["tau", "h", "advisory"])?;
        let h = crate::daa::h_axis();
        for (tau, row) in policy.slice(0.0, Advisory::Coc).iter().enumerate() {
            for (hi, adv) in row.iter().enumerate() {
                p.write_record([tau.to_string(), h.points()[hi].to_string(), adv.name().to_string()])?;
            }
        }
        p.flush()?;
        lines.push("exported policy slice at hdot = 0, a_prev = COC".into());
    }
    Ok(lines)
}
