//! Solves the pendulum risk table and prints the risk of angle errors at
//! s = [0.2, 0] for several risk levels.

use risk_perception::distdp::ErrorRef;
use risk_perception::pendulum::{risk_query, solve_pendulum_risk, PendulumParams};
use risk_perception::risk::RiskLevel;

fn main() -> anyhow::Result<()> {
    let solved = solve_pendulum_risk(PendulumParams::default())?;
    println!(
        "solved {} cells x {} slices in {:.2?} ({} clamped returns)",
        solved.report.cells, solved.report.time_steps, solved.report.elapsed, solved.report.clamped_returns
    );
    let table = &solved.table;
    let s = risk_query(0.2, 0.0);
    println!("{:>6} {:>10} {:>10} {:>10} {:>10}", "alpha", "eps=-0.2", "eps=0", "eps=+0.2", "mean");
    for a in [0.0, 0.5, 0.9, 0.99] {
        let alpha = RiskLevel::new(a)?;
        let at = |e: f64| table.risk_at(&s, &[e, 0.0], alpha);
        let profile = table.risk_over_errors(&s, alpha)?;
        let mean = profile.iter().sum::<f64>() / profile.len() as f64;
        println!(
            "{a:>6} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
            at(-0.2)?,
            table.risk(&s, ErrorRef::Atom(&[0.0, 0.0]), alpha)?,
            at(0.2)?,
            mean
        );
    }
    Ok(())
}
