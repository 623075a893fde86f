use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::grid::{Axis, Grid};
use super::mdp::AbstractedPerceptionMdp;
use super::table::RiskTable;
use crate::error::{Error, Result};
use crate::risk::{project_into, validate_support};

const MASS_TOL: f64 = 1e-9;

/// Which time slices the returned table retains.
#[derive(Debug, Clone, Default, PartialEq)]
pub enum KeepSlices {
    #[default]
    All,
    /// Only these values of `t` (steps remaining), in increasing order.
    Only(Vec<usize>),
}

#[derive(Debug, Clone, Default)]
pub struct SolveOptions {
    pub keep: KeepSlices,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    /// Number of returns that fell outside the cost support and were clamped.
    pub clamped_returns: usize,
    pub cells: usize,
    pub time_steps: usize,
    pub elapsed: Duration,
}

#[derive(Debug)]
pub struct Solved {
    pub table: RiskTable,
    pub report: SolveReport,
}

pub fn solve(mdp: &AbstractedPerceptionMdp, cost_support: &[f64]) -> Result<Solved> {
    solve_with(mdp, cost_support, &SolveOptions::default())
}

/// Distributional dynamic programming over the time-augmented grid.
///
/// Slice `t = 0` holds the projected immediate cost. Each later slice mixes
/// the error-policy-weighted return distributions of slice `t - 1` at the
/// interpolation neighbours of every successor, shifts the mixture by the
/// immediate cost, and projects back onto `cost_support`.
pub fn solve_with(
    mdp: &AbstractedPerceptionMdp,
    cost_support: &[f64],
    opts: &SolveOptions,
) -> Result<Solved> {
    let start = Instant::now();
    validate_support(cost_support)?;
    let keep: Vec<usize> = match &opts.keep {
        KeepSlices::All => (0..mdp.time_steps).collect(),
        KeepSlices::Only(ts) => {
            if ts.is_empty() || ts.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::MalformedMdp("kept slices must be increasing".into()));
            }
            if let Some(t) = ts.iter().find(|t| **t >= mdp.time_steps) {
                return Err(Error::MalformedMdp(format!("slice {t} beyond horizon")));
            }
            ts.clone()
        }
    };

    let n_cells = mdp.grid.len();
    let n_err = mdp.n_errors();
    let k = cost_support.len();
    let span = cost_support[k - 1] - cost_support[0];
    let clamp_tol = 1e-9 * span.max(1.0);
    let errors: Vec<Vec<f64>> = (0..n_err).map(|e| mdp.error_atom(e)).collect();
    let states: Vec<Vec<f64>> = mdp.grid.points().collect();
    let terminal: Vec<Option<f64>> = states.iter().map(|s| mdp.terminal_cost(s)).collect();

    let mut kept: Vec<f64> = Vec::with_capacity(keep.len() * n_cells * n_err * k);
    let mut clamped = 0usize;
    // error-policy mixture of the previous slice, one distribution per cell
    let mut prev_mix: Vec<f64> = Vec::new();

    for t in 0..mdp.time_steps {
        let cells: Vec<Result<(Vec<f64>, Vec<f64>, usize)>> = (0..n_cells)
            .into_par_iter()
            .map(|c| {
                let s = &states[c];
                let mut z = vec![0.0; n_err * k];
                let mut clamps = 0;
                if let Some(tc) = terminal[c] {
                    for e in 0..n_err {
                        if shift_clamped(cost_support, tc, clamp_tol) {
                            clamps += 1;
                        }
                        project_into(cost_support, tc, 1.0, &mut z[e * k..(e + 1) * k]);
                    }
                } else {
                    let mut interp = Vec::new();
                    let mut mix = vec![0.0; k];
                    for (e, eps) in errors.iter().enumerate() {
                        let cost = mdp.cost(t, s, eps);
                        let out = &mut z[e * k..(e + 1) * k];
                        if t == 0 {
                            if shift_clamped(cost_support, cost, clamp_tol) {
                                clamps += 1;
                            }
                            project_into(cost_support, cost, 1.0, out);
                            continue;
                        }
                        let next = mdp.transition(t, s, eps);
                        let total: f64 = next.iter().map(|(_, p)| p).sum();
                        if next.is_empty() || (total - 1.0).abs() > MASS_TOL {
                            return Err(Error::MalformedMdp(format!(
                                "transition mass {total} at t={t}, s={s:?}, e={eps:?}"
                            )));
                        }
                        mix.iter_mut().for_each(|m| *m = 0.0);
                        for (sp, p) in &next {
                            mdp.grid.check_dim(sp)?;
                            mdp.grid.interpolants(sp, &mut interp);
                            for &(j, w) in &interp {
                                let pw = p * w;
                                let src = &prev_mix[j * k..(j + 1) * k];
                                mix.iter_mut().zip(src).for_each(|(m, q)| *m += pw * q);
                            }
                        }
                        if cost == 0.0 && mdp.discount == 1.0 {
                            out.copy_from_slice(&mix);
                        } else {
                            for (zk, &m) in cost_support.iter().zip(&mix) {
                                if m > 0.0 {
                                    let v = cost + mdp.discount * zk;
                                    if shift_clamped(cost_support, v, clamp_tol) {
                                        clamps += 1;
                                    }
                                    project_into(cost_support, v, m, out);
                                }
                            }
                        }
                    }
                }
                let weights = mdp.error_weights(t, s);
                if weights.len() != n_err
                    || (weights.iter().sum::<f64>() - 1.0).abs() > MASS_TOL
                    || weights.iter().any(|w| *w < 0.0)
                {
                    return Err(Error::MalformedMdp(format!(
                        "error policy at t={t}, s={s:?} is not a distribution over {n_err} errors"
                    )));
                }
                let mut m = vec![0.0; k];
                for (e, w) in weights.iter().enumerate() {
                    if *w > 0.0 {
                        m.iter_mut()
                            .zip(&z[e * k..(e + 1) * k])
                            .for_each(|(a, b)| *a += w * b);
                    }
                }
                Ok((z, m, clamps))
            })
            .collect();

        let mut mix = Vec::with_capacity(n_cells * k);
        let keep_t = keep.binary_search(&t).is_ok();
        for cell in cells {
            let (z, m, c) = cell?;
            clamped += c;
            mix.extend_from_slice(&m);
            if keep_t {
                kept.extend_from_slice(&z);
            }
        }
        prev_mix = mix;
    }

    let mut axes = vec![Axis::discrete(
        "t",
        keep.iter().map(|t| *t as f64).collect(),
    )?];
    axes.extend(mdp.grid.axes().iter().cloned());
    let grid = Grid::new(axes)?;
    let table = RiskTable::new(grid, mdp.errors.clone(), cost_support.to_vec(), kept)?;
    Ok(Solved {
        table,
        report: SolveReport {
            clamped_returns: clamped,
            cells: n_cells,
            time_steps: mdp.time_steps,
            elapsed: start.elapsed(),
        },
    })
}

fn shift_clamped(support: &[f64], v: f64, tol: f64) -> bool {
    v < support[0] - tol || v > support[support.len() - 1] + tol
}
