use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// Synthetic forward-looking camera: the intruder appears as a dark blob on
/// a uniform sky with pixel noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkyConfig {
    pub resolution: usize,
    /// Half-angle of the square field of view, degrees.
    pub fov_half_angle_deg: f64,
    /// Apparent blob size in pixels times slant range in meters.
    pub size_scale: f64,
    pub background: f64,
    /// Darkening of a blob that covers at least one pixel.
    pub contrast: f64,
    pub noise_sigma: f64,
}

impl Default for SkyConfig {
    fn default() -> Self {
        Self {
            resolution: 16,
            fov_half_angle_deg: 40.0,
            size_scale: 1000.0,
            background: 0.7,
            contrast: 0.5,
            noise_sigma: 0.1,
        }
    }
}

/// Intruder position relative to the ownship, which flies along +x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeGeometry {
    /// Horizontal offset `[along track, cross track]`, meters.
    pub horizontal: [f64; 2],
    /// Intruder altitude minus ownship altitude, meters.
    pub dz: f64,
}

impl RelativeGeometry {
    pub fn slant_range(&self) -> f64 {
        (self.horizontal[0].powi(2) + self.horizontal[1].powi(2) + self.dz.powi(2)).sqrt()
    }

    /// `(azimuth, elevation)` in radians.
    pub fn angles(&self) -> (f64, f64) {
        let range_h = self.horizontal[0].hypot(self.horizontal[1]);
        (self.horizontal[1].atan2(self.horizontal[0]), self.dz.atan2(range_h))
    }
}

/// Blob label: centre in `[-1, 1]` image coordinates `(y, x)`, `y` down.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlobLabel {
    pub y: f64,
    pub x: f64,
    /// Blob standard deviation in pixels.
    pub sigma_px: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkyImage {
    pub pixels: Vec<f64>,
    /// `None` when the intruder is outside the field of view or absent.
    pub label: Option<BlobLabel>,
}

/// Where the intruder falls in the image, if it is in view.
pub fn project(geom: &RelativeGeometry, cfg: &SkyConfig) -> Option<BlobLabel> {
    let fov = cfg.fov_half_angle_deg.to_radians();
    let (az, el) = geom.angles();
    if geom.horizontal[0] <= 0.0 || az.abs() > fov || el.abs() > fov {
        return None;
    }
    let size = cfg.size_scale / geom.slant_range().max(1.0);
    Some(BlobLabel {
        y: -el / fov,
        x: az / fov,
        sigma_px: (size / 2.0).max(0.5),
    })
}

pub fn render_sky(geom: Option<&RelativeGeometry>, cfg: &SkyConfig, rng: &mut impl Rng) -> SkyImage {
    let r = cfg.resolution;
    let half = r as f64 / 2.0;
    let label = geom.and_then(|g| project(g, cfg));
    let mut pixels = vec![cfg.background; r * r];
    if let (Some(l), Some(g)) = (label, geom) {
        let size = cfg.size_scale / g.slant_range().max(1.0);
        let amp = cfg.contrast * size.min(1.0).powi(2);
        let (cy, cx) = ((l.y + 1.0) * half, (l.x + 1.0) * half);
        let s2 = 2.0 * l.sigma_px * l.sigma_px;
        for row in 0..r {
            for col in 0..r {
                let d2 = (row as f64 + 0.5 - cy).powi(2) + (col as f64 + 0.5 - cx).powi(2);
                pixels[row * r + col] -= amp * (-d2 / s2).exp();
            }
        }
    }
    if cfg.noise_sigma > 0.0 {
        let n = Normal::new(0.0, cfg.noise_sigma).unwrap();
        pixels.iter_mut().for_each(|p| *p += n.sample(rng));
    }
    pixels.iter_mut().for_each(|p| *p = p.clamp(0.0, 1.0));
    SkyImage { pixels, label }
}

/// Samples speeds, heading and miss distance for a state `(tau, h)` and
/// returns the implied geometry at tau seconds before closest approach.
pub fn sample_geometry(tau: f64, h: f64, rng: &mut impl Rng) -> RelativeGeometry {
    let own: f64 = rng.random_range(45.0..=55.0);
    let int: f64 = rng.random_range(45.0..=55.0);
    let psi = rng.random_range(120.0f64..=240.0).to_radians();
    let hmd: f64 = rng.random_range(0.0..=100.0);
    let vr = [int * psi.cos() - own, int * psi.sin()];
    let speed = vr[0].hypot(vr[1]);
    let perp = [-vr[1] / speed, vr[0] / speed];
    RelativeGeometry {
        horizontal: [hmd * perp[0] - vr[0] * tau, hmd * perp[1] - vr[1] * tau],
        dz: -h,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn head_on(tau: f64, h: f64) -> RelativeGeometry {
        RelativeGeometry {
            horizontal: [100.0 * tau, 0.0],
            dz: -h,
        }
    }

    #[test]
    fn far_blobs_are_smaller() {
        let cfg = SkyConfig::default();
        let near = project(&head_on(5.0, 50.0), &cfg).unwrap();
        let far = project(&head_on(40.0, 50.0), &cfg).unwrap();
        assert!(far.sigma_px < near.sigma_px || far.sigma_px == 0.5);
        let noiseless = SkyConfig {
            noise_sigma: 0.0,
            ..cfg
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut dark = |g| {
            render_sky(Some(&g), &noiseless, &mut rng)
                .pixels
                .iter()
                .map(|p| cfg.background - p)
                .sum::<f64>()
        };
        assert!(dark(head_on(40.0, 50.0)) < dark(head_on(5.0, 50.0)));
    }

    #[test]
    fn level_intruder_is_vertically_centred() {
        let cfg = SkyConfig::default();
        let l = project(&head_on(10.0, 0.0), &cfg).unwrap();
        assert!((l.y * cfg.resolution as f64 / 2.0).abs() <= 1.0);
        assert_eq!(l.x, 0.0);
    }

    #[test]
    fn out_of_view_has_no_label() {
        let cfg = SkyConfig::default();
        assert!(project(&head_on(1.0, 290.0), &cfg).is_none());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let img = render_sky(None, &cfg, &mut rng);
        assert!(img.label.is_none());
        assert_eq!(img.pixels.len(), 256);
    }

    #[test]
    fn sampled_geometry_matches_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let g = sample_geometry(20.0, 80.0, &mut rng);
            assert_eq!(g.dz, -80.0);
            let range = g.horizontal[0].hypot(g.horizontal[1]);
            assert!(range > 20.0 * 60.0 && range < 20.0 * 115.0);
            assert!(g.horizontal[0] > 0.0);
        }
    }
}
