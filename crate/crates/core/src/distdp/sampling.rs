use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::grid::AxisKind;
use super::table::RiskSurface;
use crate::error::{Error, Result};

const MAX_ATTEMPTS_PER_SAMPLE: usize = 1_000_000;

/// Draws `n` states with density proportional to the weighting function,
/// by rejection from a uniform proposal over the grid ranges.
///
/// `pins[k] = Some(v)` fixes axis `k` at `v` (e.g. the time axis); free
/// continuous axes are proposed uniformly over their range and free discrete
/// axes uniformly over their labels. The acceptance envelope is the largest
/// grid-point weight in the region the proposal can reach, which bounds the
/// multilinear interpolant.
pub fn rejection_sample_states(
    surface: &RiskSurface,
    n: usize,
    seed: u64,
    pins: &[Option<f64>],
) -> Result<Vec<Vec<f64>>> {
    let grid = surface.grid();
    if pins.len() != grid.ndim() {
        return Err(Error::DimensionMismatch {
            expected: grid.ndim(),
            got: pins.len(),
        });
    }
    let envelope = envelope(surface, pins);
    if !(envelope > 0.0) {
        return Err(Error::DegenerateWeights);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0usize;
    let budget = MAX_ATTEMPTS_PER_SAMPLE.saturating_mul(n.max(1));
    let mut x = vec![0.0; grid.ndim()];
    while out.len() < n {
        attempts += 1;
        if attempts > budget {
            return Err(Error::DegenerateWeights);
        }
        for (k, axis) in grid.axes().iter().enumerate() {
            x[k] = match (pins[k], axis.kind) {
                (Some(v), _) => v,
                (None, AxisKind::Continuous) => rng.random_range(axis.min()..=axis.max()),
                (None, AxisKind::Discrete) => axis.points()[rng.random_range(0..axis.len())],
            };
        }
        let w = surface.weight(&x);
        if rng.random::<f64>() * envelope < w {
            out.push(x.clone());
        }
    }
    Ok(out)
}

fn envelope(surface: &RiskSurface, pins: &[Option<f64>]) -> f64 {
    let grid = surface.grid();
    let allowed: Vec<Vec<usize>> = grid
        .axes()
        .iter()
        .zip(pins)
        .map(|(axis, pin)| match (pin, axis.kind) {
            (None, _) => (0..axis.len()).collect(),
            (Some(v), AxisKind::Discrete) => vec![axis.nearest(*v)],
            (Some(v), AxisKind::Continuous) => {
                let (lo, _, _) = axis.locate(*v);
                vec![lo, lo + 1]
            }
        })
        .collect();
    (0..grid.len())
        .filter(|c| {
            grid.multi_index(*c)
                .iter()
                .zip(&allowed)
                .all(|(i, ok)| ok.contains(i))
        })
        .map(|c| surface.cell_weight(c))
        .fold(0.0, f64::max)
}
