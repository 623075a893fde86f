use crate::distdp::RiskSurface;
use crate::error::{Error, Result};

/// Mean squared error over state dimensions.
pub fn loss_baseline(s: &[f64], s_hat: &[f64]) -> f64 {
    s.iter().zip(s_hat).map(|(a, b)| (b - a).powi(2)).sum::<f64>() / s.len() as f64
}

pub fn loss_baseline_grad(s: &[f64], s_hat: &[f64]) -> Vec<f64> {
    let n = s.len() as f64;
    s.iter().zip(s_hat).map(|(a, b)| 2.0 * (b - a) / n).collect()
}

/// Risk term of the risk-sensitive loss, backed by a precomputed risk
/// surface. Query states are `prefix ++ s`, where the prefix pins leading
/// grid axes such as time.
#[derive(Debug, Clone)]
pub struct RiskPenalty {
    surface: RiskSurface,
    prefix: Vec<f64>,
    lambda: f64,
    /// Risk values are divided by this before weighting.
    normalizer: f64,
}

/// Pieces of one risk-sensitive loss evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossParts {
    pub baseline: f64,
    /// Normalized, unweighted risk of the error `s_hat - s`.
    pub risk: f64,
    pub total: f64,
}

impl RiskPenalty {
    pub fn new(surface: RiskSurface, prefix: Vec<f64>, lambda: f64, normalizer: f64) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidState(format!("lambda must be >= 0, got {lambda}")));
        }
        if !(normalizer > 0.0) {
            return Err(Error::InvalidState(format!("normalizer must be > 0, got {normalizer}")));
        }
        let want = surface.grid().ndim() - prefix.len();
        if surface.errors().ndim() != want {
            return Err(Error::DimensionMismatch {
                expected: surface.errors().ndim(),
                got: want,
            });
        }
        Ok(Self {
            surface,
            prefix,
            lambda,
            normalizer,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn surface(&self) -> &RiskSurface {
        &self.surface
    }

    fn query(&self, s: &[f64]) -> Vec<f64> {
        let mut q = self.prefix.clone();
        q.extend_from_slice(s);
        q
    }

    /// Normalized risk of committing error `s_hat - s` at `s`. Errors outside
    /// the atom hull are clamped to it.
    pub fn risk(&self, s: &[f64], s_hat: &[f64]) -> f64 {
        let eps: Vec<f64> = s_hat.iter().zip(s).map(|(h, t)| h - t).collect();
        self.surface.risk_at(&self.query(s), &eps) / self.normalizer
    }

    pub fn risk_grad(&self, s: &[f64], s_hat: &[f64]) -> Vec<f64> {
        let eps: Vec<f64> = s_hat.iter().zip(s).map(|(h, t)| h - t).collect();
        self.surface
            .risk_gradient(&self.query(s), &eps)
            .into_iter()
            .map(|g| g / self.normalizer)
            .collect()
    }

    pub fn loss(&self, s: &[f64], s_hat: &[f64]) -> LossParts {
        let baseline = loss_baseline(s, s_hat);
        let risk = self.risk(s, s_hat);
        LossParts {
            baseline,
            risk,
            total: baseline + self.lambda * risk,
        }
    }

    /// Gradient of the total loss with respect to `s_hat`.
    pub fn loss_grad(&self, s: &[f64], s_hat: &[f64]) -> Vec<f64> {
        let mut g = loss_baseline_grad(s, s_hat);
        for (gi, ri) in g.iter_mut().zip(self.risk_grad(s, s_hat)) {
            *gi += self.lambda * ri;
        }
        g
    }
}
