//! Categorical cost distributions and the risk measures defined over them.
//!
//! CVaR here is the superquantile: the expected value of the worst `1 - alpha`
//! probability mass, with the atom that straddles the quantile split so that
//! the measure is continuous in `alpha`. At `alpha = 0` it is the mean and as
//! `alpha -> 1` it tends to the largest atom carrying positive mass.

use std::fmt;

use crate::error::{Error, Result};

/// Probabilities must sum to one within this tolerance once constructed.
pub const NORMALIZATION_TOL: f64 = 1e-9;
/// Drift beyond this is rejected rather than renormalized.
pub const RENORMALIZE_LIMIT: f64 = 1e-6;

/// A CVaR level `alpha` in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct RiskLevel(f64);

impl RiskLevel {
    pub const EXPECTATION: RiskLevel = RiskLevel(0.0);

    pub fn new(alpha: f64) -> Result<Self> {
        if (0.0..1.0).contains(&alpha) {
            Ok(Self(alpha))
        } else {
            Err(Error::InvalidRiskLevel(alpha))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for RiskLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Probability mass over a fixed, strictly increasing set of scalar costs.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalDistribution {
    support: Vec<f64>,
    probs: Vec<f64>,
}

impl CategoricalDistribution {
    pub fn new(support: Vec<f64>, mut probs: Vec<f64>) -> Result<Self> {
        validate_support(&support)?;
        if probs.len() != support.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} probabilities for {} atoms",
                probs.len(),
                support.len()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidDistribution(format!("bad probability {p}")));
        }
        let total: f64 = probs.iter().sum();
        let drift = (total - 1.0).abs();
        if drift > RENORMALIZE_LIMIT {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}"
            )));
        }
        if drift > 0.0 {
            probs.iter_mut().for_each(|p| *p /= total);
        }
        Ok(Self { support, probs })
    }

    pub fn point_mass(value: f64) -> Self {
        Self {
            support: vec![value],
            probs: vec![1.0],
        }
    }

    /// Point mass at `value` projected onto `support`.
    pub fn point_on(support: &[f64], value: f64) -> Result<Self> {
        project(support, &[(value, 1.0)])
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn mean(&self) -> f64 {
        mean(&self.support, &self.probs)
    }

    pub fn var(&self, alpha: RiskLevel) -> f64 {
        value_at_risk(&self.support, &self.probs, alpha.value())
    }

    pub fn cvar(&self, alpha: RiskLevel) -> f64 {
        cvar(&self.support, &self.probs, alpha.value())
    }

    pub fn worst_case(&self) -> f64 {
        worst_case(&self.support, &self.probs)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.support
            .iter()
            .zip(&self.probs)
            .take_while(|(s, _)| **s <= x)
            .map(|(_, p)| p)
            .sum()
    }
}

pub(crate) fn validate_support(support: &[f64]) -> Result<()> {
    if support.is_empty() {
        return Err(Error::InvalidDistribution("empty support".into()));
    }
    if support.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidDistribution("non-finite atom".into()));
    }
    if support.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidDistribution(
            "support must be strictly increasing".into(),
        ));
    }
    Ok(())
}

pub fn mean(support: &[f64], probs: &[f64]) -> f64 {
    support.iter().zip(probs).map(|(x, p)| x * p).sum()
}

/// `min { x : F(x) >= alpha }` over atoms with positive mass.
pub fn value_at_risk(support: &[f64], probs: &[f64], alpha: f64) -> f64 {
    let mut cum = 0.0;
    let mut last = support[0];
    for (&x, &p) in support.iter().zip(probs) {
        if p <= 0.0 {
            continue;
        }
        cum += p;
        last = x;
        if cum >= alpha {
            return x;
        }
    }
    // only reachable through rounding when alpha is within ulps of the total mass
    last
}

/// Superquantile with atom splitting; `alpha` must lie in `[0, 1)`.
pub fn cvar(support: &[f64], probs: &[f64], alpha: f64) -> f64 {
    let tail = 1.0 - alpha;
    if alpha <= 0.0 {
        return mean(support, probs);
    }
    let mut remaining = tail;
    let mut acc = 0.0;
    for (&x, &p) in support.iter().zip(probs).rev() {
        if p <= 0.0 {
            continue;
        }
        let take = p.min(remaining);
        acc += take * x;
        remaining -= take;
        if remaining <= 0.0 {
            break;
        }
    }
    acc / (tail - remaining.max(0.0))
}

pub fn worst_case(support: &[f64], probs: &[f64]) -> f64 {
    support
        .iter()
        .zip(probs)
        .rev()
        .find(|(_, p)| **p > 0.0)
        .map(|(x, _)| *x)
        .unwrap_or(support[support.len() - 1])
}

/// Adds `weight` of mass at `value` onto `out`, split linearly between the
/// two nearest atoms of `support`. Returns `true` if the value was clamped.
pub(crate) fn project_into(support: &[f64], value: f64, weight: f64, out: &mut [f64]) -> bool {
    let n = support.len();
    if value <= support[0] {
        out[0] += weight;
        return value < support[0];
    }
    if value >= support[n - 1] {
        out[n - 1] += weight;
        return value > support[n - 1];
    }
    let hi = support.partition_point(|s| *s <= value);
    let lo = hi - 1;
    let frac = (value - support[lo]) / (support[hi] - support[lo]);
    out[lo] += weight * (1.0 - frac);
    out[hi] += weight * frac;
    false
}

/// Projects weighted samples onto `target` by linear splitting between
/// neighbouring atoms. Values outside the support are clamped to its ends.
pub fn project(target: &[f64], samples: &[(f64, f64)]) -> Result<CategoricalDistribution> {
    validate_support(target)?;
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut probs = vec![0.0; target.len()];
    for &(value, weight) in samples {
        if !value.is_finite() || !weight.is_finite() || weight < 0.0 {
            return Err(Error::InvalidDistribution(format!(
                "bad sample ({value}, {weight})"
            )));
        }
        project_into(target, value, weight, &mut probs);
    }
    CategoricalDistribution::new(target.to_vec(), probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn d(support: &[f64], probs: &[f64]) -> CategoricalDistribution {
        CategoricalDistribution::new(support.to_vec(), probs.to_vec()).unwrap()
    }

    fn a(x: f64) -> RiskLevel {
        RiskLevel::new(x).unwrap()
    }

    #[test]
    fn mean_examples() {
        assert_eq!(CategoricalDistribution::point_mass(3.0).mean(), 3.0);
        assert_abs_diff_eq!(d(&[0.0, 10.0], &[0.9, 0.1]).mean(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d(&[-1.0, 1.0], &[0.5, 0.5]).mean(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn var_examples() {
        let x = d(&[1.0, 2.0], &[0.5, 0.5]);
        assert_eq!(x.var(a(0.5)), 1.0);
        assert_eq!(x.var(a(0.75)), 2.0);
        assert_eq!(x.var(a(0.0)), 1.0);
    }

    #[test]
    fn cvar_examples() {
        let pm = CategoricalDistribution::point_mass(3.0);
        for alpha in [0.0, 0.3, 0.99] {
            assert_abs_diff_eq!(pm.cvar(a(alpha)), 3.0, epsilon = 1e-12);
        }
        let x = d(&[0.0, 10.0], &[0.9, 0.1]);
        assert_abs_diff_eq!(x.cvar(a(0.8)), 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(x.cvar(a(0.95)), 10.0, epsilon = 1e-12);
    }

    #[test]
    fn worst_case_ignores_zero_mass() {
        assert_eq!(d(&[0.0, 10.0], &[0.9, 0.1]).worst_case(), 10.0);
        assert_eq!(d(&[0.0, 10.0], &[1.0, 0.0]).worst_case(), 0.0);
        assert_eq!(CategoricalDistribution::point_mass(-2.0).worst_case(), -2.0);
    }

    #[test]
    fn project_examples() {
        let s = [0.0, 1.0, 2.0];
        assert_eq!(project(&s, &[(1.0, 1.0)]).unwrap().probs(), &[0.0, 1.0, 0.0]);
        assert_eq!(project(&s, &[(0.5, 1.0)]).unwrap().probs(), &[0.5, 0.5, 0.0]);
        assert_eq!(project(&s, &[(5.0, 1.0)]).unwrap().probs(), &[0.0, 0.0, 1.0]);
        assert!(matches!(project(&s, &[]), Err(Error::EmptySamples)));
    }

    #[test]
    fn constructor_rejects_bad_input() {
        assert!(CategoricalDistribution::new(vec![1.0, 1.0], vec![0.5, 0.5]).is_err());
        assert!(CategoricalDistribution::new(vec![0.0, 1.0], vec![0.5]).is_err());
        assert!(CategoricalDistribution::new(vec![0.0, 1.0], vec![-0.1, 1.1]).is_err());
        assert!(CategoricalDistribution::new(vec![0.0, 1.0], vec![0.5, 0.6]).is_err());
        let x = CategoricalDistribution::new(vec![0.0, 1.0], vec![0.5, 0.5 + 1e-8]).unwrap();
        assert_abs_diff_eq!(x.probs().iter().sum::<f64>(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn risk_level_bounds() {
        assert!(RiskLevel::new(1.0).is_err());
        assert!(RiskLevel::new(-0.1).is_err());
        assert!(RiskLevel::new(1.5).is_err());
        assert!(RiskLevel::new(0.99).is_ok());
    }

    fn arb_dist() -> impl Strategy<Value = CategoricalDistribution> {
        (1usize..12)
            .prop_flat_map(|n| {
                (
                    proptest::collection::vec(0.01f64..5.0, n),
                    proptest::collection::vec(0.0f64..1.0, n),
                    -10.0f64..10.0,
                )
            })
            .prop_filter_map("all-zero weights", |(gaps, w, start)| {
                let total: f64 = w.iter().sum();
                if total <= 1e-6 {
                    return None;
                }
                let mut x = start;
                let support = gaps
                    .iter()
                    .map(|g| {
                        x += g;
                        x
                    })
                    .collect();
                let probs = w.iter().map(|p| p / total).collect();
                CategoricalDistribution::new(support, probs).ok()
            })
    }

    proptest! {
        #[test]
        fn cvar_at_zero_is_mean(x in arb_dist()) {
            prop_assert!((x.cvar(RiskLevel::EXPECTATION) - x.mean()).abs() <= 1e-9);
        }

        #[test]
        fn cvar_is_monotone_and_bounded(x in arb_dist(), a1 in 0.0f64..0.999, a2 in 0.0f64..0.999) {
            let (lo, hi) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
            let c_lo = x.cvar(a(lo));
            let c_hi = x.cvar(a(hi));
            prop_assert!(c_lo <= c_hi + 1e-12);
            prop_assert!(x.mean() <= c_lo + 1e-9);
            prop_assert!(c_hi <= x.worst_case() + 1e-9);
        }

        #[test]
        fn zero_mass_atoms_do_not_change_risk(x in arb_dist(), alpha in 0.0f64..0.999) {
            let mut support = vec![x.support()[0] - 1.0];
            let mut probs = vec![0.0];
            support.extend_from_slice(x.support());
            probs.extend_from_slice(x.probs());
            support.push(x.support()[x.support().len() - 1] + 1.0);
            probs.push(0.0);
            let y = CategoricalDistribution::new(support, probs).unwrap();
            prop_assert!((y.cvar(a(alpha)) - x.cvar(a(alpha))).abs() < 1e-12);
            prop_assert_eq!(y.var(a(alpha)), x.var(a(alpha)));
            prop_assert_eq!(y.worst_case(), x.worst_case());
        }

        #[test]
        fn projection_preserves_mass_and_mean(
            samples in proptest::collection::vec((0.0f64..4.0, 0.01f64..1.0), 1..20)
        ) {
            let total: f64 = samples.iter().map(|s| s.1).sum();
            let samples: Vec<_> = samples.iter().map(|(v, w)| (*v, w / total)).collect();
            let support = [0.0, 0.5, 1.3, 2.0, 3.1, 4.0];
            let p = project(&support, &samples).unwrap();
            let sample_mean: f64 = samples.iter().map(|(v, w)| v * w).sum();
            prop_assert!((p.probs().iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!((p.mean() - sample_mean).abs() < 1e-9);
        }
    }
}
