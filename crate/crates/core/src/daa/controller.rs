use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dynamics::{next_rate, Advisory, DaaParams, DaaState, RATE_NOISE};
use crate::distdp::{symmetric_log_space, Axis, ContainerReader, ContainerWriter, Grid};
use crate::error::{Error, Result};

const KIND: &[u8; 4] = b"DPOL";
const TIE_TOL: f64 = 1e-12;

pub const H_LIMIT: f64 = 300.0;
pub const TAU_MAX: u32 = 41;
/// Relative altitude below which the aircraft are vertically too close.
pub const NMAC_VERTICAL: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerCosts {
    /// Cost of ending within the vertical NMAC band at tau = 0.
    pub nmac: f64,
    /// Per-step cost of any advisory other than clear of conflict.
    pub alert: f64,
    /// Cost of switching directly between climb and descend.
    pub reversal: f64,
}

impl Default for ControllerCosts {
    fn default() -> Self {
        Self {
            nmac: 1.0,
            alert: 0.005,
            reversal: 0.01,
        }
    }
}

/// Relative altitude axis: 0 plus 20 log-spaced points per side from 3 m to
/// 300 m.
pub fn h_axis() -> Axis {
    Axis::continuous("h", symmetric_log_space(H_LIMIT, 20, 100.0)).unwrap()
}

/// 21 evenly spaced rates over `[-10, 10]` m/s.
pub fn hdot_axis() -> Axis {
    Axis::continuous("hdot", (0..21).map(|i| -10.0 + i as f64).collect()).unwrap()
}

pub fn a_prev_axis() -> Axis {
    Axis::discrete("a_prev", Advisory::ALL.iter().map(|a| a.label()).collect()).unwrap()
}

pub fn tau_axis() -> Axis {
    Axis::discrete("tau", (0..=TAU_MAX).map(f64::from).collect()).unwrap()
}

/// Greedy advisory table from finite-horizon value iteration, with the
/// action values kept for off-grid queries.
#[derive(Debug, Clone, PartialEq)]
pub struct DaaPolicy {
    /// Axes `[tau, h, hdot, a_prev]`.
    grid: Grid,
    /// Action values per cell in [`Advisory::ALL`] order.
    q: Vec<[f64; 3]>,
}

#[derive(Debug, Clone)]
pub struct ControllerSolve {
    pub policy: DaaPolicy,
    pub elapsed: Duration,
}

pub fn solve_controller(costs: &ControllerCosts, params: &DaaParams) -> Result<ControllerSolve> {
    if !(costs.nmac > 0.0) || costs.alert < 0.0 || costs.reversal < 0.0 {
        return Err(Error::InvalidState(format!("bad controller costs {costs:?}")));
    }
    let start = Instant::now();
    let slice = Grid::new(vec![h_axis(), hdot_axis(), a_prev_axis()])?;
    let grid = Grid::new(vec![tau_axis(), h_axis(), hdot_axis(), a_prev_axis()])?;
    let n = slice.len();
    let terminal: Vec<f64> = (0..n)
        .map(|c| {
            let h = slice.point(c)[0];
            if h.abs() < NMAC_VERTICAL {
                costs.nmac
            } else {
                0.0
            }
        })
        .collect();
    let mut q = Vec::with_capacity(grid.len());
    q.extend(terminal.iter().map(|v| [*v; 3]));
    let mut value = terminal;
    for _tau in 1..=TAU_MAX {
        let qs: Vec<[f64; 3]> = (0..n)
            .into_par_iter()
            .map(|c| {
                let x = slice.point(c);
                let (h, hdot) = (x[0], x[1]);
                let a_prev = Advisory::from_label(x[2]).unwrap();
                let mut out = [0.0; 3];
                let mut w = Vec::with_capacity(8);
                for u in Advisory::ALL {
                    let mut v = 0.0;
                    if u != Advisory::Coc {
                        v += costs.alert;
                    }
                    if u.is_reversal_of(a_prev) {
                        v += costs.reversal;
                    }
                    for (noise, p) in RATE_NOISE {
                        let next = [h + hdot * params.dt, next_rate(hdot, u, noise, params), u.label()];
                        slice.interpolants(&next, &mut w);
                        v += p * w.iter().map(|(c, wc)| wc * value[*c]).sum::<f64>();
                    }
                    out[u.index()] = v;
                }
                out
            })
            .collect();
        value = qs.iter().map(|row| row.iter().cloned().fold(f64::INFINITY, f64::min)).collect();
        q.extend(qs);
    }
    Ok(ControllerSolve {
        policy: DaaPolicy { grid, q },
        elapsed: start.elapsed(),
    })
}

fn greedy(q: &[f64; 3]) -> Advisory {
    let best = q.iter().cloned().fold(f64::INFINITY, f64::min);
    Advisory::ALL
        .into_iter()
        .find(|a| q[a.index()] <= best + TIE_TOL * best.abs().max(1.0))
        .unwrap()
}

impl DaaPolicy {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn cell_q(&self, cell: usize) -> &[f64; 3] {
        &self.q[cell]
    }

    pub fn cell_advisory(&self, cell: usize) -> Advisory {
        greedy(&self.q[cell])
    }

    /// Action values at an arbitrary state, interpolated over `h` and
    /// `hdot`; tau is clamped to the grid.
    pub fn q_values(&self, s: &DaaState) -> [f64; 3] {
        let x = [
            f64::from(s.tau.min(TAU_MAX)),
            s.h,
            s.hdot,
            s.a_prev.label(),
        ];
        let mut w = Vec::with_capacity(8);
        self.grid.interpolants(&x, &mut w);
        let mut out = [0.0; 3];
        for (c, wc) in w {
            for (o, v) in out.iter_mut().zip(&self.q[c]) {
                *o += wc * v;
            }
        }
        out
    }

    /// Advisory for a perceived state; clear of conflict when no intruder is
    /// perceived.
    pub fn advise(&self, s: &DaaState) -> Advisory {
        if !s.present {
            return Advisory::Coc;
        }
        greedy(&self.q_values(s))
    }

    /// Advisories over `h` at fixed `hdot`, `a_prev`, for every tau, as
    /// `slice[tau][h_index]`.
    pub fn slice(&self, hdot: f64, a_prev: Advisory) -> Vec<Vec<Advisory>> {
        let hs = self.grid.axis(1).points().to_vec();
        (0..=TAU_MAX)
            .map(|tau| {
                hs.iter()
                    .map(|h| self.advise(&DaaState::new(true, *h, hdot, a_prev, tau)))
                    .collect()
            })
            .collect()
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut w = ContainerWriter::new(Vec::new(), KIND)?;
        w.grid(&self.grid)?;
        w.floats(&self.q.iter().flatten().cloned().collect::<Vec<_>>())?;
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = ContainerReader::new(bytes, KIND)?;
        let grid = r.grid()?;
        let flat = r.floats()?;
        r.finish()?;
        if flat.len() != grid.len() * 3 {
            return Err(Error::DimensionMismatch {
                expected: grid.len() * 3,
                got: flat.len(),
            });
        }
        let q = flat.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        Ok(Self { grid, q })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn greedy_breaks_ties_toward_coc() {
        assert_eq!(greedy(&[1.0, 1.0, 1.0]), Advisory::Coc);
        assert_eq!(greedy(&[1.0, 0.5, 0.5]), Advisory::Climb);
        assert_eq!(greedy(&[1.0, 0.6, 0.5]), Advisory::Descend);
    }

    #[test]
    fn axes_cover_the_state_space() {
        let h = h_axis();
        assert_eq!(h.len(), 41);
        assert_eq!((h.min(), h.max()), (-300.0, 300.0));
        assert_eq!(h.points()[21], 3.0);
        assert_eq!(hdot_axis().len(), 21);
        assert_eq!(tau_axis().len(), 42);
    }
}
