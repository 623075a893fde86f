//! Trains a baseline and a risk-sensitive state estimator on rendered
//! pendulum frames and compares their closed-loop mean time to failure.
//!
//! Pass a dataset size and epoch count to scale the run, e.g.
//! `cargo run --release --example pendulum_training -- 10000 200`.

use risk_perception::experiment::{
    pendulum_mttf, pendulum_risk_table, train_pendulum_variant, PendulumSetup, Variant,
};
use risk_perception::risk::RiskLevel;

fn main() -> anyhow::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).map(|a| a.parse()).collect::<Result<_, _>>()?;
    let mut setup = PendulumSetup::default();
    setup.dataset_size = args.first().copied().unwrap_or(3000);
    setup.train.epochs = args.get(1).copied().unwrap_or(30);
    let table = pendulum_risk_table(&setup.params)?;
    let surface = table.surface(RiskLevel::new(0.0)?);
    for variant in [Variant::Baseline, Variant::RiskLoss] {
        let est = train_pendulum_variant(&setup, variant, Some(&surface), 1)?;
        let mttf = pendulum_mttf(&setup, &est, 2)?;
        println!(
            "{:<10} final loss {:.4}  MTTF {:.1} / {}",
            variant.name(),
            est.report.final_loss(),
            mttf,
            setup.horizon
        );
    }
    Ok(())
}
