use std::path::Path;

use super::grid::Grid;
use super::io::{ContainerReader, ContainerWriter};
use crate::error::{Error, Result};
use crate::risk::{self, CategoricalDistribution, RiskLevel};

const KIND: &[u8; 4] = b"RISK";

/// Selects a stored error atom.
#[derive(Debug, Clone, Copy)]
pub enum ErrorRef<'a> {
    Index(usize),
    /// Must coincide with one of the table's atoms.
    Atom(&'a [f64]),
}

/// Return distributions `Z(s, e)` for every grid state and error atom.
///
/// The first grid axis is time (steps remaining), restricted to the slices
/// retained by the solver. Distributions are stored contiguously in
/// `(cell, error, atom)` order.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskTable {
    grid: Grid,
    errors: Grid,
    cost_support: Vec<f64>,
    probs: Vec<f64>,
}

impl RiskTable {
    pub fn new(grid: Grid, errors: Grid, cost_support: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        risk::validate_support(&cost_support)?;
        let k = cost_support.len();
        let expected = grid.len() * errors.len() * k;
        if probs.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: probs.len(),
            });
        }
        for (i, chunk) in probs.chunks_exact(k).enumerate() {
            let total: f64 = chunk.iter().sum();
            if (total - 1.0).abs() > 1e-6 || chunk.iter().any(|p| !(*p >= 0.0)) {
                return Err(Error::InvalidDistribution(format!(
                    "entry {i} has mass {total}"
                )));
            }
        }
        Ok(Self {
            grid,
            errors,
            cost_support,
            probs,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn errors(&self) -> &Grid {
        &self.errors
    }

    pub fn cost_support(&self) -> &[f64] {
        &self.cost_support
    }

    pub fn n_errors(&self) -> usize {
        self.errors.len()
    }

    pub fn raw_probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn probs(&self, cell: usize, error: usize) -> &[f64] {
        let k = self.cost_support.len();
        let start = (cell * self.errors.len() + error) * k;
        &self.probs[start..start + k]
    }

    pub fn distribution(&self, cell: usize, error: usize) -> CategoricalDistribution {
        CategoricalDistribution::new(self.cost_support.clone(), self.probs(cell, error).to_vec())
            .expect("table entries are validated on construction")
    }

    pub fn error_index(&self, e: ErrorRef<'_>) -> Result<usize> {
        match e {
            ErrorRef::Index(i) if i < self.errors.len() => Ok(i),
            ErrorRef::Index(i) => Err(Error::ErrorIndexOutOfRange {
                index: i,
                count: self.errors.len(),
            }),
            ErrorRef::Atom(atom) => {
                self.errors.check_dim(atom)?;
                (0..self.errors.len())
                    .find(|i| {
                        self.errors
                            .point(*i)
                            .iter()
                            .zip(atom)
                            .all(|(a, b)| (a - b).abs() <= 1e-12)
                    })
                    .ok_or_else(|| Error::UnknownErrorAtom(atom.to_vec()))
            }
        }
    }

    pub fn cell_cvar(&self, cell: usize, error: usize, alpha: RiskLevel) -> f64 {
        risk::cvar(&self.cost_support, self.probs(cell, error), alpha.value())
    }

    /// CVaR of the return after committing error `e` in state `s`,
    /// interpolated multilinearly across neighbouring grid states.
    pub fn risk(&self, s: &[f64], e: ErrorRef<'_>, alpha: RiskLevel) -> Result<f64> {
        self.grid.check_dim(s)?;
        let e = self.error_index(e)?;
        let mut w = Vec::new();
        self.grid.interpolants(s, &mut w);
        Ok(w.iter().map(|(c, wc)| wc * self.cell_cvar(*c, e, alpha)).sum())
    }

    /// Risk profile over all error atoms at state `s`.
    pub fn risk_over_errors(&self, s: &[f64], alpha: RiskLevel) -> Result<Vec<f64>> {
        self.grid.check_dim(s)?;
        let mut w = Vec::new();
        self.grid.interpolants(s, &mut w);
        Ok((0..self.errors.len())
            .map(|e| w.iter().map(|(c, wc)| wc * self.cell_cvar(*c, e, alpha)).sum())
            .collect())
    }

    /// Risk of a continuous error, interpolated between error atoms.
    pub fn risk_at(&self, s: &[f64], eps: &[f64], alpha: RiskLevel) -> Result<f64> {
        self.errors.check_dim(eps)?;
        let profile = self.risk_over_errors(s, alpha)?;
        Ok(self.errors.interpolate(&profile, eps))
    }

    /// Gradient of [`RiskTable::risk_at`] with respect to the error.
    pub fn risk_gradient(&self, s: &[f64], eps: &[f64], alpha: RiskLevel) -> Result<Vec<f64>> {
        self.errors.check_dim(eps)?;
        let profile = self.risk_over_errors(s, alpha)?;
        Ok(self.errors.interpolate_gradient(&profile, eps))
    }

    /// Largest risk over error atoms minus the risk of zero error.
    pub fn risk_weight(&self, s: &[f64], alpha: RiskLevel) -> Result<f64> {
        let profile = self.risk_over_errors(s, alpha)?;
        Ok(weight_of(&self.errors, &profile))
    }

    /// Precomputes CVaR for every cell and error at one risk level.
    pub fn surface(&self, alpha: RiskLevel) -> RiskSurface {
        let n_err = self.errors.len();
        let values = (0..self.grid.len() * n_err)
            .map(|i| self.cell_cvar(i / n_err, i % n_err, alpha))
            .collect();
        RiskSurface {
            grid: self.grid.clone(),
            errors: self.errors.clone(),
            alpha,
            values,
        }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut w = ContainerWriter::new(Vec::new(), KIND)?;
        w.grid(&self.grid)?;
        w.grid(&self.errors)?;
        w.floats(&self.cost_support)?;
        w.floats(&self.probs)?;
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = ContainerReader::new(bytes, KIND)?;
        let grid = r.grid()?;
        let errors = r.grid()?;
        let support = r.floats()?;
        let probs = r.floats()?;
        r.finish()?;
        Self::new(grid, errors, support, probs)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

fn weight_of(errors: &Grid, profile: &[f64]) -> f64 {
    let zero = vec![0.0; errors.ndim()];
    let at_zero = errors.interpolate(profile, &zero);
    let worst = profile.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (worst - at_zero).max(0.0)
}

/// CVaR values of a [`RiskTable`] at a fixed risk level, for fast repeated
/// queries during training and sampling.
#[derive(Debug, Clone)]
pub struct RiskSurface {
    grid: Grid,
    errors: Grid,
    alpha: RiskLevel,
    values: Vec<f64>,
}

impl RiskSurface {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn errors(&self) -> &Grid {
        &self.errors
    }

    pub fn alpha(&self) -> RiskLevel {
        self.alpha
    }

    pub fn cell_values(&self, cell: usize) -> &[f64] {
        let n = self.errors.len();
        &self.values[cell * n..(cell + 1) * n]
    }

    pub fn profile(&self, s: &[f64]) -> Vec<f64> {
        let n = self.errors.len();
        let mut w = Vec::with_capacity(8);
        self.grid.interpolants(s, &mut w);
        let mut out = vec![0.0; n];
        for (c, wc) in w {
            out.iter_mut()
                .zip(self.cell_values(c))
                .for_each(|(o, v)| *o += wc * v);
        }
        out
    }

    pub fn risk(&self, s: &[f64], error: usize) -> f64 {
        let mut w = Vec::with_capacity(8);
        self.grid.interpolants(s, &mut w);
        w.iter()
            .map(|(c, wc)| wc * self.cell_values(*c)[error])
            .sum()
    }

    pub fn risk_at(&self, s: &[f64], eps: &[f64]) -> f64 {
        self.errors.interpolate(&self.profile(s), eps)
    }

    pub fn risk_gradient(&self, s: &[f64], eps: &[f64]) -> Vec<f64> {
        self.errors.interpolate_gradient(&self.profile(s), eps)
    }

    pub fn weight(&self, s: &[f64]) -> f64 {
        weight_of(&self.errors, &self.profile(s))
    }

    pub fn cell_weight(&self, cell: usize) -> f64 {
        weight_of(&self.errors, self.cell_values(cell))
    }

    /// Weighting function at every grid point, in grid order.
    pub fn weight_field(&self) -> Vec<f64> {
        (0..self.grid.len()).map(|c| self.cell_weight(c)).collect()
    }
}
