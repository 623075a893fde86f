//! Solves the detect-and-avoid controller and prints its advisories over
//! time to conflict and relative altitude, for level flight with no prior
//! advisory.

use risk_perception::daa::{h_axis, solve_controller, Advisory, ControllerCosts, DaaParams, DaaState};

fn main() -> anyhow::Result<()> {
    let solve = solve_controller(&ControllerCosts::default(), &DaaParams::default())?;
    println!("solved in {:.2?}; rows tau 41..0, columns h -300..300 m", solve.elapsed);
    let slice = solve.policy.slice(0.0, Advisory::Coc);
    for (tau, row) in slice.iter().enumerate().rev() {
        let line: String = row
            .iter()
            .map(|a| match a {
                Advisory::Coc => '.',
                Advisory::Climb => 'C',
                Advisory::Descend => 'D',
            })
            .collect();
        println!("{tau:>3} {line}");
    }
    let h = h_axis();
    println!("h grid: {:?}", h.points().iter().map(|x| x.round()).collect::<Vec<_>>());
    let s = DaaState::new(true, 20.0, 0.0, Advisory::Coc, 15);
    println!("advisory at h=20, tau=15: {}", solve.policy.advise(&s).name());
    println!("q values: {:?}", solve.policy.q_values(&s));
    Ok(())
}
