use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::model::{is_nmac, sample_encounter, Encounter, CPA_TIME, DURATION};
use crate::daa::{
    next_rate, Advisory, DaaParams, DaaPolicy, DaaState, DetectionModel, Detector, MarginalWeights,
    RATE_NOISE,
};
use crate::distdp::RiskSurface;
use crate::error::Result;
use crate::stats::mean_and_se;

/// Source of intruder detections inside the simulation loop.
#[derive(Debug, Clone, Copy)]
pub enum Perceiver<'a> {
    Perfect,
    Never,
    /// Bernoulli detections from a detection model.
    Stochastic(&'a DetectionModel),
    /// Trained detector applied to rendered sky images.
    Detector(&'a Detector),
}

impl Perceiver<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            Perceiver::Perfect => "perfect",
            Perceiver::Never => "never",
            Perceiver::Stochastic(_) => "stochastic",
            Perceiver::Detector(_) => "detector",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    /// True controller state at every second before the last.
    pub states: Vec<DaaState>,
    pub detections: Vec<bool>,
    pub advisories: Vec<Advisory>,
    pub own_altitude: Vec<f64>,
    pub intruder_altitude: Vec<f64>,
    /// Risk of the realized perception error at each step, when a risk
    /// surface was supplied.
    pub risks: Vec<f64>,
    pub nmac: bool,
}

/// Runs one encounter at 1 Hz. The ownship follows the encounter's vertical
/// profile until its first alert and flies the advisories afterwards.
pub fn simulate(
    enc: &Encounter,
    policy: &DaaPolicy,
    perceiver: Perceiver<'_>,
    risk: Option<&RiskSurface>,
    params: &DaaParams,
    seed: u64,
) -> Result<SimResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z_int = enc.intruder[0][2];
    let mut z = enc.own[0][2];
    let mut rate = enc.own_rate[0];
    let mut alerted = false;
    let mut a_prev = Advisory::Coc;
    let mut out = SimResult {
        states: Vec::with_capacity(DURATION),
        detections: Vec::with_capacity(DURATION),
        advisories: Vec::with_capacity(DURATION),
        own_altitude: vec![z],
        intruder_altitude: vec![z_int],
        risks: Vec::new(),
        nmac: false,
    };
    for t in 0..DURATION {
        let tau = CPA_TIME.saturating_sub(t) as u32;
        let state = DaaState::new(true, z - z_int, rate, a_prev, tau);
        let detected = match perceiver {
            Perceiver::Perfect => true,
            Perceiver::Never => false,
            Perceiver::Stochastic(m) => rng.random::<f64>() < m.probability(state.h, f64::from(tau)),
            Perceiver::Detector(d) => {
                let rel = enc.relative_horizontal(t);
                d.detects(rel, -state.h, &mut rng)
            }
        };
        if let Some(surface) = risk {
            let e = if detected { 0 } else { 1 };
            out.risks.push(surface.risk(&[f64::from(tau), state.h], e));
        }
        let u = if tau == 0 {
            Advisory::Coc
        } else {
            policy.advise(&DaaState {
                present: detected,
                ..state
            })
        };
        alerted |= u != Advisory::Coc;
        z += rate * params.dt;
        rate = if alerted {
            let r: f64 = rng.random();
            let mut acc = 0.0;
            let w = RATE_NOISE
                .iter()
                .find(|(_, p)| {
                    acc += p;
                    r < acc
                })
                .map_or(0.0, |x| x.0);
            next_rate(rate, u, w, params)
        } else {
            enc.own_rate.get(t + 1).copied().unwrap_or(rate)
        };
        if !alerted {
            z = enc.own[t + 1][2];
        }
        a_prev = u;
        out.states.push(state);
        out.detections.push(detected);
        out.advisories.push(u);
        out.own_altitude.push(z);
        out.intruder_altitude.push(enc.intruder[t + 1][2]);
    }
    out.nmac = (0..=DURATION).any(|t| {
        is_nmac(
            (out.own_altitude[t] - out.intruder_altitude[t]).abs(),
            enc.horizontal_separation(t),
        )
    });
    Ok(out)
}

/// Outcome of one batch of encounters for one perceiver.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub nmac: Vec<bool>,
    /// Every logged per-step risk, pooled over encounters.
    pub risks: Vec<f64>,
}

impl TrialOutcome {
    pub fn nmac_count(&self) -> usize {
        self.nmac.iter().filter(|x| **x).count()
    }
}

/// Seed of encounter `i` in a batch started from `seed`.
pub fn encounter_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_mul(1_000_003).wrapping_add(i as u64)
}

/// Simulates `n` encounters in parallel with per-encounter seeds.
pub fn run_encounters(
    policy: &DaaPolicy,
    perceiver: Perceiver<'_>,
    risk: Option<&RiskSurface>,
    params: &DaaParams,
    n: usize,
    seed: u64,
) -> Result<TrialOutcome> {
    let results: Vec<SimResult> = (0..n)
        .into_par_iter()
        .map(|i| {
            let s = encounter_seed(seed, i);
            simulate(&sample_encounter(s), policy, perceiver, risk, params, s ^ 0x5EED)
        })
        .collect::<Result<_>>()?;
    Ok(TrialOutcome {
        nmac: results.iter().map(|r| r.nmac).collect(),
        risks: results.into_iter().flat_map(|r| r.risks).collect(),
    })
}

/// Occupancy of `(hdot, a_prev)` under perfect perception, pooled over all
/// steps of `n` encounters.
pub fn occupancy_weights(
    policy: &DaaPolicy,
    params: &DaaParams,
    n: usize,
    seed: u64,
) -> Result<MarginalWeights> {
    let samples: Vec<(f64, Advisory)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let s = encounter_seed(seed, i);
            simulate(&sample_encounter(s), policy, Perceiver::Perfect, None, params, s ^ 0x5EED)
                .map(|r| r.states.iter().map(|x| (x.hdot, x.a_prev)).collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    MarginalWeights::from_samples(samples)
}

/// Per-perceiver summary over trials.
#[derive(Debug, Clone, PartialEq)]
pub struct PerceiverReport {
    pub name: String,
    pub nmac_counts: Vec<usize>,
    pub nmac_mean: f64,
    pub nmac_se: f64,
    pub risks: Vec<f64>,
}

impl PerceiverReport {
    pub fn from_trials(name: impl Into<String>, trials: &[TrialOutcome]) -> Self {
        let counts: Vec<usize> = trials.iter().map(|t| t.nmac_count()).collect();
        let (nmac_mean, nmac_se) =
            mean_and_se(&counts.iter().map(|c| *c as f64).collect::<Vec<_>>());
        Self {
            name: name.into(),
            nmac_counts: counts,
            nmac_mean,
            nmac_se,
            risks: trials.iter().flat_map(|t| t.risks.iter().cloned()).collect(),
        }
    }

    /// Mean of the largest tenth of logged risks.
    pub fn top_decile_risk(&self) -> f64 {
        let mut r = self.risks.clone();
        r.sort_by(|a, b| b.total_cmp(a));
        let k = (r.len() / 10).max(1).min(r.len());
        r[..k].iter().sum::<f64>() / k as f64
    }

    /// Empirical CDF of logged risks at the given thresholds.
    pub fn risk_cdf(&self, thresholds: &[f64]) -> Vec<f64> {
        let n = self.risks.len().max(1) as f64;
        thresholds
            .iter()
            .map(|x| self.risks.iter().filter(|r| **r <= *x).count() as f64 / n)
            .collect()
    }
}

/// Evaluates each perceiver over `trials` batches of `n` encounters, batch
/// `k` seeded with `seed + k`.
pub fn evaluate_suite(
    policy: &DaaPolicy,
    perceivers: &[(String, Perceiver<'_>)],
    risk: Option<&RiskSurface>,
    params: &DaaParams,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<PerceiverReport>> {
    perceivers
        .iter()
        .map(|(name, p)| {
            let outcomes = (0..trials)
                .map(|k| run_encounters(policy, *p, risk, params, n, seed + k as u64))
                .collect::<Result<Vec<_>>>()?;
            Ok(PerceiverReport::from_trials(name.clone(), &outcomes))
        })
        .collect()
}
