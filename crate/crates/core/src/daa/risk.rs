use super::controller::{a_prev_axis, h_axis, hdot_axis, DaaPolicy, TAU_MAX};
use super::detection::DetectionModel;
use super::dynamics::{daa_step, Advisory, DaaParams, DaaState, RATE_NOISE};
use crate::distdp::{
    solve, AbstractedPerceptionMdp, Axis, Grid, RiskSurface, RiskTable, Solved,
};
use crate::error::{Error, Result};
use crate::risk::RiskLevel;

/// Largest separation cost, reached when the aircraft are co-altitude.
pub const MAX_SEPARATION_COST: f64 = 150.0;

pub fn separation_cost(h: f64) -> f64 {
    (MAX_SEPARATION_COST - h.abs()).max(0.0)
}

/// 50 evenly spaced cost atoms on `[0, 150]`.
pub fn daa_cost_support() -> Vec<f64> {
    (0..50).map(|i| MAX_SEPARATION_COST * i as f64 / 49.0).collect()
}

/// Error axis: 0 detected, 1 missed.
pub fn detection_errors() -> Grid {
    Grid::new(vec![Axis::discrete("missed", vec![0.0, 1.0]).unwrap()]).unwrap()
}

/// Abstracted-perception MDP over `[h, hdot, a_prev]` with tau as time. A
/// missed detection makes the controller see no intruder.
pub fn build_daa_risk_mdp(
    policy: DaaPolicy,
    model: DetectionModel,
    params: DaaParams,
) -> Result<AbstractedPerceptionMdp> {
    let grid = Grid::new(vec![h_axis(), hdot_axis(), a_prev_axis()])?;
    AbstractedPerceptionMdp::new(
        grid,
        detection_errors(),
        TAU_MAX as usize + 1,
        move |t, s| {
            let p = model.probability(s[0], t as f64);
            vec![p, 1.0 - p]
        },
        move |t, s, e| {
            let a_prev = Advisory::from_label(s[2]).unwrap();
            let truth = DaaState::new(true, s[0], s[1], a_prev, t as u32);
            let perceived = DaaState {
                present: e[0] == 0.0,
                ..truth
            };
            let u = policy.advise(&perceived);
            RATE_NOISE
                .iter()
                .map(|(w, p)| {
                    let n = daa_step(truth, u, *w, &params).unwrap();
                    (vec![n.h, n.hdot, n.a_prev.label()], *p)
                })
                .collect()
        },
        |t, s, _| if t == 0 { separation_cost(s[0]) } else { 0.0 },
    )
}

pub fn solve_daa_risk(policy: DaaPolicy, model: DetectionModel, params: DaaParams) -> Result<Solved> {
    let mdp = build_daa_risk_mdp(policy, model, params)?;
    solve(&mdp, &daa_cost_support())
}

/// Occupancy weights over `(hdot index, a_prev index)`, row-major with
/// `a_prev` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalWeights {
    pub weights: Vec<f64>,
}

impl MarginalWeights {
    /// Normalizes occupancy counts binned to the nearest grid rate.
    pub fn from_samples(samples: impl IntoIterator<Item = (f64, Advisory)>) -> Result<Self> {
        let hdot = hdot_axis();
        let mut counts = vec![0.0; hdot.len() * 3];
        for (r, a) in samples {
            counts[hdot.nearest(r) * 3 + a.index()] += 1.0;
        }
        let total: f64 = counts.iter().sum();
        if total == 0.0 {
            return Err(Error::DegenerateWeights);
        }
        Ok(Self {
            weights: counts.into_iter().map(|c| c / total).collect(),
        })
    }

    pub fn uniform() -> Self {
        let n = hdot_axis().len() * 3;
        Self {
            weights: vec![1.0 / n as f64; n],
        }
    }
}

/// Mixes the full table's distributions over `(hdot, a_prev)` with the
/// occupancy weights, giving a table over `[tau, h]` and the two errors.
pub fn marginalize(table: &RiskTable, weights: &MarginalWeights) -> Result<RiskTable> {
    let g = table.grid();
    if g.ndim() != 4 || weights.weights.len() != g.axis(2).len() * g.axis(3).len() {
        return Err(Error::DimensionMismatch {
            expected: g.axis(2).len() * g.axis(3).len(),
            got: weights.weights.len(),
        });
    }
    let out_grid = Grid::new(vec![g.axis(0).clone(), g.axis(1).clone()])?;
    let k = table.cost_support().len();
    let n_err = table.n_errors();
    let mut probs = vec![0.0; out_grid.len() * n_err * k];
    for ti in 0..g.axis(0).len() {
        for hi in 0..g.axis(1).len() {
            let out_cell = out_grid.flat_index(&[ti, hi]);
            for (m, w) in weights.weights.iter().enumerate() {
                if *w == 0.0 {
                    continue;
                }
                let cell = g.flat_index(&[ti, hi, m / 3, m % 3]);
                for e in 0..n_err {
                    let dst = &mut probs[(out_cell * n_err + e) * k..][..k];
                    for (d, p) in dst.iter_mut().zip(table.probs(cell, e)) {
                        *d += w * p;
                    }
                }
            }
        }
    }
    RiskTable::new(out_grid, table.errors().clone(), table.cost_support().to_vec(), probs)
}

/// Risk of a detector reporting objectness `p_hat` at `[tau, h]`:
/// `p_hat Q(s, detected) + (1 - p_hat) Q(s, missed)`.
pub fn objectness_risk(surface: &RiskSurface, s: &[f64], p_hat: f64) -> f64 {
    let p = p_hat.clamp(0.0, 1.0);
    p * surface.risk(s, 0) + (1.0 - p) * surface.risk(s, 1)
}

/// Derivative of [`objectness_risk`] with respect to `p_hat`.
pub fn objectness_risk_slope(surface: &RiskSurface, s: &[f64]) -> f64 {
    surface.risk(s, 0) - surface.risk(s, 1)
}

/// Weight field over the marginal grid `[tau, h]`, in grid order.
pub fn daa_risk_weight_field(table: &RiskTable, alpha: RiskLevel) -> Vec<f64> {
    table.surface(alpha).weight_field()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cost_endpoints() {
        assert_eq!(separation_cost(0.0), 150.0);
        assert_eq!(separation_cost(150.0), 0.0);
        assert_eq!(separation_cost(-220.0), 0.0);
        let s = daa_cost_support();
        assert_eq!((s.len(), s[0], s[49]), (50, 0.0, 150.0));
    }

    #[test]
    fn occupancy_weights_normalize() {
        let w = MarginalWeights::from_samples([
            (0.2, Advisory::Coc),
            (0.0, Advisory::Coc),
            (7.7, Advisory::Climb),
            (-3.4, Advisory::Descend),
        ])
        .unwrap();
        assert!((w.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(w.weights[10 * 3], 0.5);
        assert_eq!(w.weights[18 * 3 + 1], 0.25);
        assert!(MarginalWeights::from_samples([]).is_err());
    }
}
