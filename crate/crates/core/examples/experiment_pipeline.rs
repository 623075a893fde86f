//! Runs the DAA pipeline stages from a config, as the command-line tool
//! does, into a temporary output directory.

use risk_perception::experiment::{run_stage, ExperimentConfig, Stage};

fn main() -> anyhow::Result<()> {
    let out = std::env::temp_dir().join("riskperc-example");
    let mut cfg = ExperimentConfig::from_toml(
        r#"
        problem = "daa"
        variants = ["baseline", "risk-data"]
        [seeds]
        trials = 1
        [training]
        epochs = 5
        dataset_size = 4000
        "#,
    )?;
    cfg.output_dir = Some(out.clone());
    for stage in [Stage::SolveRisk, Stage::Train, Stage::Evaluate, Stage::ExportField] {
        println!("== {}", stage.name());
        for line in run_stage(&cfg, stage)? {
            println!("{line}");
        }
    }
    println!("outputs in {}", out.display());
    Ok(())
}
