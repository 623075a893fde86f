//! Flies the encounter set with perfect, model-based and absent perception
//! and reports NMAC counts and the logged risk of each perception outcome.

use risk_perception::daa::{
    marginalize, solve_controller, solve_daa_risk, ControllerCosts, DaaParams, DetectionModel,
};
use risk_perception::encounters::{evaluate_suite, occupancy_weights, Perceiver};
use risk_perception::risk::RiskLevel;

fn main() -> anyhow::Result<()> {
    let params = DaaParams::default();
    let model = DetectionModel::default();
    let policy = solve_controller(&ControllerCosts::default(), &params)?.policy;
    let full = solve_daa_risk(policy.clone(), model, params)?.table;
    let weights = occupancy_weights(&policy, &params, 1000, 7)?;
    let surface = marginalize(&full, &weights)?.surface(RiskLevel::new(0.0)?);
    let perceivers = vec![
        ("never".to_string(), Perceiver::Never),
        ("stochastic".to_string(), Perceiver::Stochastic(&model)),
        ("perfect".to_string(), Perceiver::Perfect),
    ];
    let reports = evaluate_suite(&policy, &perceivers, Some(&surface), &params, 1000, 3, 11)?;
    let thresholds = [10.0, 50.0, 100.0];
    println!("{:<11} {:>14} {:>10}  P(risk <= 10, 50, 100)", "perceiver", "NMAC", "top risk");
    for r in &reports {
        let cdf = r.risk_cdf(&thresholds);
        println!(
            "{:<11} {:>7.1} ± {:<4.1} {:>10.2}  {:.3} {:.3} {:.3}",
            r.name,
            r.nmac_mean,
            r.nmac_se,
            r.top_decile_risk(),
            cdf[0],
            cdf[1],
            cdf[2]
        );
    }
    Ok(())
}
