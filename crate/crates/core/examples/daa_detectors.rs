//! Trains intruder detectors on synthetic sky images with uniform and
//! risk-weighted data and compares them in closed loop.

use risk_perception::experiment::{
    build_daa_artifacts, evaluate_detector, train_detector_variant, validation_set, DaaSetup,
    ExperimentConfig, Variant,
};
use risk_perception::risk::RiskLevel;

fn main() -> anyhow::Result<()> {
    let cfg = ExperimentConfig::from_toml("problem = \"daa\"")?;
    let setup = DaaSetup::from_config(&cfg);
    let artifacts = build_daa_artifacts(&setup)?;
    let surface = artifacts.table.surface(RiskLevel::new(0.0)?);
    let validation = validation_set(&setup)?;
    println!("{:<10} {:>6} {:>10} {:>8} {:>10}", "variant", "NMAC", "precision", "recall", "top risk");
    for variant in [Variant::Baseline, Variant::RiskLoss, Variant::RiskData, Variant::Combined] {
        let (det, _) = train_detector_variant(&setup, variant, Some(&surface), 3)?;
        let eval = evaluate_detector(&setup, &artifacts, Some(&surface), &det, &validation, 5)?;
        let mut risks = eval.outcome.risks.clone();
        risks.sort_by(|a, b| b.total_cmp(a));
        let top = &risks[..(risks.len() / 10).max(1)];
        println!(
            "{:<10} {:>6} {:>10.3} {:>8.3} {:>10.2}",
            variant.name(),
            eval.outcome.nmac_count(),
            eval.metrics.precision,
            eval.metrics.recall,
            top.iter().sum::<f64>() / top.len() as f64
        );
    }
    Ok(())
}
