use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisKind {
    /// Interpolated multilinearly between points, clamped at the ends.
    Continuous,
    /// Finite label set; queries snap to the nearest label.
    Discrete,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: String,
    pub kind: AxisKind,
    points: Vec<f64>,
}

impl Axis {
    pub fn continuous(name: impl Into<String>, points: Vec<f64>) -> Result<Self> {
        Self::new(name.into(), AxisKind::Continuous, points)
    }

    pub fn discrete(name: impl Into<String>, labels: Vec<f64>) -> Result<Self> {
        Self::new(name.into(), AxisKind::Discrete, labels)
    }

    pub fn new(name: String, kind: AxisKind, points: Vec<f64>) -> Result<Self> {
        let min_len = match kind {
            AxisKind::Continuous => 2,
            AxisKind::Discrete => 1,
        };
        if points.len() < min_len {
            return Err(Error::InvalidGrid(format!(
                "axis {name} needs at least {min_len} points"
            )));
        }
        if points.iter().any(|p| !p.is_finite()) || points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid(format!(
                "axis {name} must be finite and strictly increasing"
            )));
        }
        Ok(Self { name, kind, points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.points[0]
    }

    pub fn max(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    pub fn nearest(&self, x: f64) -> usize {
        let hi = self.points.partition_point(|p| *p < x);
        if hi == 0 {
            0
        } else if hi == self.points.len() || x - self.points[hi - 1] <= self.points[hi] - x {
            hi - 1
        } else {
            hi
        }
    }

    /// Lower cell index and fractional position of `x` within the cell, after
    /// clamping to the axis range. A point on an interior knot belongs to the
    /// cell to its right.
    pub(crate) fn locate(&self, x: f64) -> (usize, f64, bool) {
        let n = self.points.len();
        if x <= self.points[0] {
            return (0, 0.0, x < self.points[0]);
        }
        if x >= self.points[n - 1] {
            return (n - 2, 1.0, x > self.points[n - 1]);
        }
        let lo = (self.points.partition_point(|p| *p <= x) - 1).min(n - 2);
        let frac = (x - self.points[lo]) / (self.points[lo + 1] - self.points[lo]);
        (lo, frac, false)
    }
}

/// Symmetric grid on `[-max, max]` with an exact zero and `per_side`
/// geometrically spaced points on each side, the smallest being
/// `max / ratio`. Points concentrate around zero.
pub fn symmetric_log_space(max: f64, per_side: usize, ratio: f64) -> Vec<f64> {
    assert!(max > 0.0 && ratio > 1.0 && per_side >= 1);
    let positive: Vec<f64> = if per_side == 1 {
        vec![max]
    } else {
        let min = max / ratio;
        let step = (max / min).ln() / (per_side - 1) as f64;
        (0..per_side)
            .map(|i| {
                if i == per_side - 1 {
                    max
                } else {
                    min * (step * i as f64).exp()
                }
            })
            .collect()
    };
    let mut pts: Vec<f64> = positive.iter().rev().map(|x| -x).collect();
    pts.push(0.0);
    pts.extend(positive);
    pts
}

/// Row-major product grid; the first axis varies slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    axes: Vec<Axis>,
    strides: Vec<usize>,
    len: usize,
}

impl Grid {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidGrid("grid needs at least one axis".into()));
        }
        let mut strides = vec![1; axes.len()];
        for i in (0..axes.len() - 1).rev() {
            strides[i] = strides[i + 1] * axes[i + 1].len();
        }
        let len = strides[0] * axes[0].len();
        Ok(Self { axes, strides, len })
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, i: usize) -> &Axis {
        &self.axes[i]
    }

    pub fn ndim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        self.strides
            .iter()
            .map(|s| {
                let i = flat / s;
                flat %= s;
                i
            })
            .collect()
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat)
            .iter()
            .zip(&self.axes)
            .map(|(i, a)| a.points[*i])
            .collect()
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len).map(|i| self.point(i))
    }

    pub fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.axes.len() {
            return Err(Error::DimensionMismatch {
                expected: self.axes.len(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Multilinear interpolation weights of `x` over grid points, appended to
    /// `out` as `(flat index, weight)`. Zero weights are dropped, so a query on
    /// a grid point yields exactly one entry. Returns whether any coordinate
    /// was clamped.
    pub fn interpolants(&self, x: &[f64], out: &mut Vec<(usize, f64)>) -> bool {
        debug_assert_eq!(x.len(), self.axes.len());
        out.clear();
        out.push((0, 1.0));
        let mut clamped = false;
        for ((axis, &xi), &stride) in self.axes.iter().zip(x).zip(&self.strides) {
            match axis.kind {
                AxisKind::Discrete => {
                    let k = axis.nearest(xi);
                    out.iter_mut().for_each(|(idx, _)| *idx += k * stride);
                }
                AxisKind::Continuous => {
                    let (lo, frac, c) = axis.locate(xi);
                    clamped |= c;
                    if frac == 0.0 {
                        out.iter_mut().for_each(|(idx, _)| *idx += lo * stride);
                    } else if frac == 1.0 {
                        out.iter_mut().for_each(|(idx, _)| *idx += (lo + 1) * stride);
                    } else {
                        let n = out.len();
                        for j in 0..n {
                            let (idx, w) = out[j];
                            out[j] = (idx + lo * stride, w * (1.0 - frac));
                            out.push((idx + (lo + 1) * stride, w * frac));
                        }
                    }
                }
            }
        }
        clamped
    }

    /// Interpolated value of a field stored in grid order.
    pub fn interpolate(&self, field: &[f64], x: &[f64]) -> f64 {
        let mut w = Vec::with_capacity(1 << self.axes.len());
        self.interpolants(x, &mut w);
        w.iter().map(|(i, wi)| field[*i] * wi).sum()
    }

    /// Gradient of the multilinear interpolant of `field` at `x`.
    ///
    /// Inside a cell the gradient is exact; on an interior knot the right cell
    /// is used. Clamped coordinates and discrete axes get zero slope.
    pub fn interpolate_gradient(&self, field: &[f64], x: &[f64]) -> Vec<f64> {
        let d = self.axes.len();
        let mut lo = vec![0usize; d];
        let mut frac = vec![0.0; d];
        let mut live = vec![false; d];
        for (k, axis) in self.axes.iter().enumerate() {
            match axis.kind {
                AxisKind::Discrete => lo[k] = axis.nearest(x[k]),
                AxisKind::Continuous => {
                    let (l, f, c) = axis.locate(x[k]);
                    lo[k] = l;
                    frac[k] = f;
                    live[k] = !c;
                }
            }
        }
        let mut grad = vec![0.0; d];
        for (a, g) in grad.iter_mut().enumerate() {
            if !live[a] {
                continue;
            }
            let width = self.axes[a].points[lo[a] + 1] - self.axes[a].points[lo[a]];
            // iterate over the corners of the cell, spanning only continuous axes
            let corners = 1usize << d;
            let mut slope = 0.0;
            for mask in 0..corners {
                let mut weight = 1.0;
                let mut flat = 0;
                let mut skip = false;
                for k in 0..d {
                    let upper = mask >> k & 1 == 1;
                    if self.axes[k].kind == AxisKind::Discrete {
                        if upper {
                            skip = true;
                            break;
                        }
                        flat += lo[k] * self.strides[k];
                        continue;
                    }
                    flat += (lo[k] + upper as usize) * self.strides[k];
                    if k == a {
                        weight *= if upper { 1.0 / width } else { -1.0 / width };
                    } else {
                        weight *= if upper { frac[k] } else { 1.0 - frac[k] };
                    }
                }
                if !skip {
                    slope += weight * field[flat];
                }
            }
            *g = slope;
        }
        grad
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid2() -> Grid {
        Grid::new(vec![
            Axis::continuous("x", vec![0.0, 1.0, 3.0]).unwrap(),
            Axis::continuous("y", vec![-1.0, 1.0]).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn axes_must_be_increasing() {
        assert!(Axis::continuous("a", vec![0.0]).is_err());
        assert!(Axis::continuous("a", vec![0.0, 0.0]).is_err());
        assert!(Axis::discrete("a", vec![3.0]).is_ok());
    }

    #[test]
    fn flat_index_round_trip() {
        let g = grid2();
        for i in 0..g.len() {
            assert_eq!(g.flat_index(&g.multi_index(i)), i);
        }
        assert_eq!(g.point(3), vec![1.0, 1.0]);
    }

    #[test]
    fn interpolation_reproduces_grid_values() {
        let g = grid2();
        let field: Vec<f64> = (0..g.len()).map(|i| (i * i) as f64).collect();
        for i in 0..g.len() {
            let mut w = Vec::new();
            g.interpolants(&g.point(i), &mut w);
            assert_eq!(w, vec![(i, 1.0)]);
        }
        // midway along x between grid points 1 and 3
        let v = g.interpolate(&field, &[2.0, -1.0]);
        assert_abs_diff_eq!(v, 0.5 * (field[2] + field[4]), epsilon = 1e-12);
    }

    #[test]
    fn clamps_outside_range() {
        let g = grid2();
        let field: Vec<f64> = (0..g.len()).map(|i| i as f64).collect();
        let mut w = Vec::new();
        assert!(g.interpolants(&[10.0, 5.0], &mut w));
        assert_eq!(g.interpolate(&field, &[10.0, 5.0]), field[5]);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let g = grid2();
        let field = [0.3, -1.2, 2.0, 0.5, 4.0, 1.0];
        let x = [1.7, 0.2];
        let grad = g.interpolate_gradient(&field, &x);
        let h = 1e-6;
        for k in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[k] += h;
            xm[k] -= h;
            let fd = (g.interpolate(&field, &xp) - g.interpolate(&field, &xm)) / (2.0 * h);
            assert_abs_diff_eq!(grad[k], fd, epsilon = 1e-6);
        }
    }

    #[test]
    fn knot_gradient_uses_right_cell() {
        let g = Grid::new(vec![Axis::continuous("e", vec![0.0, 0.1, 0.2]).unwrap()]).unwrap();
        let field = [1.0, 2.0, 2.0];
        assert_abs_diff_eq!(g.interpolate_gradient(&field, &[0.05])[0], 10.0, epsilon = 1e-9);
        assert_abs_diff_eq!(g.interpolate_gradient(&field, &[0.1])[0], 0.0, epsilon = 1e-9);
        assert_eq!(g.interpolate_gradient(&field, &[0.5])[0], 0.0);
    }

    #[test]
    fn log_space_is_symmetric_with_zero() {
        let pts = symmetric_log_space(0.4, 5, 20.0);
        assert_eq!(pts.len(), 11);
        assert_eq!(pts[5], 0.0);
        assert_eq!(pts[10], 0.4);
        for i in 0..11 {
            assert_eq!(pts[i], -pts[10 - i]);
        }
        assert!(pts[6] - pts[5] < pts[10] - pts[9]);
    }

    #[test]
    fn discrete_axes_snap() {
        let g = Grid::new(vec![
            Axis::discrete("t", vec![0.0, 1.0, 2.0]).unwrap(),
            Axis::continuous("x", vec![0.0, 1.0]).unwrap(),
        ])
        .unwrap();
        let field = [0.0, 1.0, 10.0, 11.0, 20.0, 21.0];
        assert_abs_diff_eq!(g.interpolate(&field, &[1.2, 0.5]), 10.5, epsilon = 1e-12);
    }
}
