//! Builds a small abstracted-perception MDP from closures and solves it: a
//! cart on a 1D track that a proportional controller steers toward zero from
//! a noisy position estimate. Leaving the track ends the episode with cost 1.

use risk_perception::distdp::{solve, Axis, ErrorRef, Grid};
use risk_perception::distdp::AbstractedPerceptionMdp;
use risk_perception::risk::RiskLevel;

fn main() -> anyhow::Result<()> {
    let positions: Vec<f64> = (-10..=10).map(f64::from).collect();
    let grid = Grid::new(vec![Axis::continuous("x", positions)?])?;
    let errors = Grid::new(vec![Axis::continuous("dx", vec![-6.0, 0.0, 6.0])?])?;
    let mdp = AbstractedPerceptionMdp::new(
        grid,
        errors,
        15,
        |_, _| vec![0.15, 0.7, 0.15],
        |_, s, e| {
            let x = s[0] - 0.3 * (s[0] + e[0]);
            vec![(vec![x + 2.0], 0.25), (vec![x], 0.5), (vec![x - 2.0], 0.25)]
        },
        |_, _, _| 0.0,
    )?
    .with_terminal(|s| (s[0].abs() >= 9.0).then_some(1.0));
    let solved = solve(&mdp, &[0.0, 1.0])?;
    let table = &solved.table;
    let t = 14.0;
    for a in [0.0, 0.9] {
        let alpha = RiskLevel::new(a)?;
        print!("alpha {a}:");
        for x in [0.0, 4.0, 7.0] {
            let r = table.risk(&[t, x], ErrorRef::Atom(&[-6.0]), alpha)?;
            let w = table.risk_weight(&[t, x], alpha)?;
            print!("  x={x}: risk(-6) {r:.3} weight {w:.3}");
        }
        println!();
    }
    Ok(())
}
