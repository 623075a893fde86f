//! Computes the pendulum risk weight field, prints a coarse map and draws a
//! risk-weighted state sample from it.

use risk_perception::distdp::rejection_sample_states;
use risk_perception::pendulum::{solve_pendulum_risk, PendulumParams, RISK_SLICE};
use risk_perception::risk::RiskLevel;

fn main() -> anyhow::Result<()> {
    let alpha = RiskLevel::new(std::env::args().nth(1).map_or(Ok(0.0), |a| a.parse())?)?;
    let table = solve_pendulum_risk(PendulumParams::default())?.table;
    let surface = table.surface(alpha);
    let field = surface.weight_field();
    let mut sorted = field.clone();
    sorted.sort_by(f64::total_cmp);
    let pct = |q: f64| sorted[((sorted.len() - 1) as f64 * q) as usize];
    println!("weight percentiles p10={:.4} p25={:.4} p50={:.4} max={:.4}", pct(0.1), pct(0.25), pct(0.5), pct(1.0));

    let t = RISK_SLICE as f64;
    println!("rows: omega from 2 to -2, columns: theta from -pi/4 to pi/4");
    let shades = [' ', '.', ':', '-', '=', '+', '*', '#', '%', '@'];
    let max = pct(1.0);
    for i in 0..21 {
        let omega = 2.0 - 4.0 * i as f64 / 20.0;
        let row: String = (0..41)
            .map(|j| {
                let theta = std::f64::consts::FRAC_PI_4 * (-1.0 + 2.0 * j as f64 / 40.0);
                let w = surface.weight(&[t, theta, omega]) / max;
                shades[((w * 9.0).round() as usize).min(9)]
            })
            .collect();
        println!("|{row}|");
    }
    for (k, (th, om)) in [(0.9, 0.9), (-0.9, -0.9), (0.9, -0.9), (0.0, 0.0)].iter().enumerate() {
        let s = [t, th * std::f64::consts::FRAC_PI_4, om * 2.0];
        println!("probe {k}: theta={:.3} omega={:.3} w={:.4}", s[1], s[2], surface.weight(&s));
    }
    let samples = rejection_sample_states(&surface, 5, 7, &[Some(t), None, None])?;
    for s in samples {
        println!("sample theta={:.3} omega={:.3}", s[1], s[2]);
    }
    Ok(())
}
