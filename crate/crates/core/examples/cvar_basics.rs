//! Mean, VaR and CVaR of a categorical cost distribution, and projection of
//! weighted samples onto a fixed support.

use risk_perception::risk::{project, CategoricalDistribution, RiskLevel};

fn main() -> anyhow::Result<()> {
    // A mostly benign cost with a small chance of a large loss.
    let z = CategoricalDistribution::new(vec![0.0, 1.0, 2.0, 10.0], vec![0.6, 0.25, 0.1, 0.05])?;
    println!("mean {:.3}, worst case {:.1}", z.mean(), z.worst_case());
    println!("{:>6} {:>8} {:>8}", "alpha", "VaR", "CVaR");
    for a in [0.0, 0.5, 0.8, 0.9, 0.95, 0.99] {
        let alpha = RiskLevel::new(a)?;
        println!("{a:>6} {:>8.3} {:>8.3}", z.var(alpha), z.cvar(alpha));
    }

    let samples = [(0.3, 0.3), (1.7, 0.5), (12.0, 0.2)];
    let projected = project(&[0.0, 1.0, 2.0, 5.0], &samples)?;
    println!("projected probs {:?}", projected.probs());
    println!("projected mean {:.3}", projected.mean());

    assert!(RiskLevel::new(1.0).is_err());
    Ok(())
}
