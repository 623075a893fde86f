use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Time of closest approach, seconds after the encounter starts.
pub const CPA_TIME: usize = 40;
/// Encounter length in seconds; positions are sampled at 1 Hz, inclusive.
pub const DURATION: usize = 50;
/// Standard deviation of the ownship's pre-alert vertical rate, m/s.
pub const PRE_ALERT_RATE_SIGMA: f64 = 0.5;
pub const HORIZONTAL_NMAC: f64 = 100.0;
pub const VERTICAL_NMAC: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncounterFeatures {
    pub own_speed: f64,
    pub intruder_speed: f64,
    /// Horizontal miss distance, m.
    pub hmd: f64,
    /// Vertical miss distance, ownship minus intruder, m.
    pub vmd: f64,
    /// Intruder heading relative to the ownship, degrees.
    pub heading_deg: f64,
}

impl EncounterFeatures {
    pub fn sample(rng: &mut impl Rng) -> Self {
        Self {
            own_speed: rng.random_range(45.0..=55.0),
            intruder_speed: rng.random_range(45.0..=55.0),
            hmd: rng.random_range(0.0..=100.0),
            vmd: rng.random_range(-50.0..=50.0),
            heading_deg: rng.random_range(120.0..=240.0),
        }
    }

    /// Intruder velocity minus ownship velocity in the horizontal plane,
    /// ownship flying along +x.
    pub fn relative_velocity(&self) -> [f64; 2] {
        let psi = self.heading_deg.to_radians();
        [
            self.intruder_speed * psi.cos() - self.own_speed,
            self.intruder_speed * psi.sin(),
        ]
    }
}

/// Straight-line pairwise encounter. Positions are `[x, y, z]` per second.
#[derive(Debug, Clone, PartialEq)]
pub struct Encounter {
    pub features: EncounterFeatures,
    pub own: Vec<[f64; 3]>,
    pub intruder: Vec<[f64; 3]>,
    /// Ownship vertical rate during each second, before any alert.
    pub own_rate: Vec<f64>,
}

impl Encounter {
    pub fn horizontal_separation(&self, t: usize) -> f64 {
        let (a, b) = (self.own[t], self.intruder[t]);
        (a[0] - b[0]).hypot(a[1] - b[1])
    }

    pub fn vertical_separation(&self, t: usize) -> f64 {
        (self.own[t][2] - self.intruder[t][2]).abs()
    }

    /// Intruder position relative to the ownship, horizontal only.
    pub fn relative_horizontal(&self, t: usize) -> [f64; 2] {
        [
            self.intruder[t][0] - self.own[t][0],
            self.intruder[t][1] - self.own[t][1],
        ]
    }
}

pub fn sample_encounter(seed: u64) -> Encounter {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = EncounterFeatures::sample(&mut rng);
    build_encounter(f, &mut rng)
}

/// Builds tracks with closest approach at [`CPA_TIME`]. The ownship follows
/// a noisy vertical rate centred on zero; the intruder flies level at the
/// altitude that gives the sampled vertical miss distance at closest
/// approach.
pub fn build_encounter(f: EncounterFeatures, rng: &mut impl Rng) -> Encounter {
    let vr = f.relative_velocity();
    let speed = vr[0].hypot(vr[1]);
    let perp = [-vr[1] / speed, vr[0] / speed];
    let noise = Normal::new(0.0, PRE_ALERT_RATE_SIGMA).unwrap();
    let own_rate: Vec<f64> = (0..DURATION).map(|_| noise.sample(rng)).collect();
    let mut z = vec![0.0; DURATION + 1];
    for t in 0..DURATION {
        z[t + 1] = z[t] + own_rate[t];
    }
    let z_int = z[CPA_TIME] - f.vmd;
    let mut own = Vec::with_capacity(DURATION + 1);
    let mut intruder = Vec::with_capacity(DURATION + 1);
    for (t, zt) in z.iter().enumerate() {
        let ox = f.own_speed * t as f64;
        let dt = t as f64 - CPA_TIME as f64;
        own.push([ox, 0.0, *zt]);
        intruder.push([
            ox + f.hmd * perp[0] + vr[0] * dt,
            f.hmd * perp[1] + vr[1] * dt,
            z_int,
        ]);
    }
    Encounter {
        features: f,
        own,
        intruder,
        own_rate,
    }
}

/// Strict simultaneous loss of vertical and horizontal separation.
pub fn is_nmac(vertical: f64, horizontal: f64) -> bool {
    vertical < VERTICAL_NMAC && horizontal < HORIZONTAL_NMAC
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nmac_examples() {
        assert!(is_nmac(30.0, 80.0));
        assert!(!is_nmac(60.0, 80.0));
        assert!(is_nmac(49.99, 99.99));
        assert!(!is_nmac(50.0, 100.0));
        assert!(!is_nmac(10.0, 100.0));
    }

    #[test]
    fn closest_approach_is_at_forty_seconds() {
        for seed in 0..10_000 {
            let e = sample_encounter(seed);
            let f = e.features;
            assert!((45.0..=55.0).contains(&f.own_speed) && (45.0..=55.0).contains(&f.intruder_speed));
            assert!((0.0..=100.0).contains(&f.hmd) && (-50.0..=50.0).contains(&f.vmd));
            assert!((120.0..=240.0).contains(&f.heading_deg));
            assert!((e.horizontal_separation(CPA_TIME) - f.hmd).abs() < 1e-6);
            assert!((e.vertical_separation(CPA_TIME) - f.vmd.abs()).abs() < 1e-9);
            let d = e.horizontal_separation(CPA_TIME);
            assert!(d <= e.horizontal_separation(CPA_TIME - 1) && d <= e.horizontal_separation(CPA_TIME + 1));
            assert_eq!(e.own.len(), DURATION + 1);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        assert_eq!(sample_encounter(5), sample_encounter(5));
        assert_ne!(sample_encounter(5), sample_encounter(6));
    }
}
