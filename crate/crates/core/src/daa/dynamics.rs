use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Advisory {
    Coc,
    Climb,
    Descend,
}

impl Advisory {
    /// Tie-break order: earlier entries win.
    pub const ALL: [Advisory; 3] = [Advisory::Coc, Advisory::Climb, Advisory::Descend];

    /// Commanded vertical rate in m/s, `None` for clear of conflict.
    pub fn commanded_rate(self) -> Option<f64> {
        match self {
            Advisory::Coc => None,
            Advisory::Climb => Some(8.0),
            Advisory::Descend => Some(-8.0),
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// Grid label used on the discrete `a_prev` axis.
    pub fn label(self) -> f64 {
        self.index() as f64
    }

    pub fn from_label(x: f64) -> Option<Self> {
        (x >= 0.0 && x.fract() == 0.0).then(|| Self::from_index(x as usize)).flatten()
    }

    pub fn is_reversal_of(self, other: Advisory) -> bool {
        matches!(
            (self, other),
            (Advisory::Climb, Advisory::Descend) | (Advisory::Descend, Advisory::Climb)
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            Advisory::Coc => "COC",
            Advisory::Climb => "CLIMB",
            Advisory::Descend => "DESCEND",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DaaState {
    /// Whether an intruder is perceived as present.
    pub present: bool,
    /// Relative altitude, ownship minus intruder, in meters.
    pub h: f64,
    /// Relative vertical rate in m/s.
    pub hdot: f64,
    pub a_prev: Advisory,
    /// Seconds to loss of horizontal separation.
    pub tau: u32,
}

impl DaaState {
    pub fn new(present: bool, h: f64, hdot: f64, a_prev: Advisory, tau: u32) -> Self {
        Self {
            present,
            h,
            hdot,
            a_prev,
            tau,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DaaParams {
    /// Largest change in vertical rate per step, m/s^2.
    pub max_accel: f64,
    pub dt: f64,
    /// Vertical rates are clamped to `[-hdot_limit, hdot_limit]`.
    pub hdot_limit: f64,
}

impl Default for DaaParams {
    fn default() -> Self {
        Self {
            max_accel: 3.0,
            dt: 1.0,
            hdot_limit: 10.0,
        }
    }
}

/// Vertical-rate noise as `(w, probability)`.
pub const RATE_NOISE: [(f64, f64); 3] = [(0.0, 0.8), (0.5, 0.1), (-0.5, 0.1)];

/// Vertical rate after one step under advisory `u`. Clear of conflict holds
/// the current rate; maneuvers move toward the commanded rate at no more
/// than the acceleration limit.
pub fn next_rate(hdot: f64, u: Advisory, w: f64, p: &DaaParams) -> f64 {
    let accel = match u.commanded_rate() {
        None => 0.0,
        Some(target) => {
            let lim = p.max_accel * p.dt;
            (target - hdot).clamp(-lim, lim)
        }
    };
    (hdot + accel + w).clamp(-p.hdot_limit, p.hdot_limit)
}

pub fn daa_step(s: DaaState, u: Advisory, w: f64, p: &DaaParams) -> Result<DaaState> {
    if s.tau == 0 {
        return Err(Error::InvalidState("cannot step a state with tau = 0".into()));
    }
    Ok(DaaState {
        present: s.present,
        h: s.h + s.hdot * p.dt,
        hdot: next_rate(s.hdot, u, w, p),
        a_prev: u,
        tau: s.tau - 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_examples() {
        let p = DaaParams::default();
        let s = DaaState::new(true, 100.0, 0.0, Advisory::Coc, 10);
        assert_eq!(
            daa_step(s, Advisory::Coc, 0.0, &p).unwrap(),
            DaaState::new(true, 100.0, 0.0, Advisory::Coc, 9)
        );
        assert_eq!(daa_step(s, Advisory::Climb, 0.0, &p).unwrap().hdot, 3.0);
        let s = DaaState::new(true, 100.0, 5.0, Advisory::Coc, 10);
        let next = daa_step(s, Advisory::Climb, 0.5, &p).unwrap();
        assert_eq!(next.hdot, 8.5);
        assert_eq!(next.h, 105.0);
        assert_eq!(next.a_prev, Advisory::Climb);
        assert!(daa_step(DaaState::new(true, 0.0, 0.0, Advisory::Coc, 0), Advisory::Coc, 0.0, &p).is_err());
    }

    #[test]
    fn rate_is_clamped() {
        let p = DaaParams::default();
        assert_eq!(next_rate(10.0, Advisory::Coc, 0.5, &p), 10.0);
        assert_eq!(next_rate(-9.8, Advisory::Coc, -0.5, &p), -10.0);
        assert_eq!(next_rate(-9.8, Advisory::Descend, -0.5, &p), -8.5);
    }

    #[test]
    fn noise_is_a_distribution() {
        assert_eq!(RATE_NOISE.iter().map(|x| x.1).sum::<f64>(), 1.0);
    }

    #[test]
    fn labels_round_trip() {
        for a in Advisory::ALL {
            assert_eq!(Advisory::from_label(a.label()), Some(a));
        }
        assert!(Advisory::Climb.is_reversal_of(Advisory::Descend));
        assert!(!Advisory::Coc.is_reversal_of(Advisory::Climb));
    }
}
