use serde::{Deserialize, Serialize};

/// Parametric detection probability over `(|h|, tau)`: zero outside a
/// field-of-view cone, logistic in slant range inside it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionModel {
    /// Cone half-width growth in meters of `|h|` per second of tau.
    pub cone_slope: f64,
    /// Tau offset of the cone apex.
    pub cone_offset: f64,
    /// Detection probability at zero range.
    pub max_probability: f64,
    /// Horizontal closure rate used to turn tau into range, m/s.
    pub closure_speed: f64,
    /// Slant range with half of the maximum detection probability, m.
    pub half_range: f64,
    /// Logistic width in meters.
    pub range_scale: f64,
}

impl Default for DetectionModel {
    fn default() -> Self {
        Self {
            cone_slope: 84.0,
            cone_offset: 0.0,
            max_probability: 0.99,
            closure_speed: 100.0,
            half_range: 2200.0,
            range_scale: 500.0,
        }
    }
}

impl DetectionModel {
    pub fn in_view(&self, h: f64, tau: f64) -> bool {
        h.abs() <= self.cone_slope * (tau + self.cone_offset)
    }

    pub fn probability(&self, h: f64, tau: f64) -> f64 {
        if !self.in_view(h, tau) {
            return 0.0;
        }
        let range = (h * h + (self.closure_speed * tau).powi(2)).sqrt();
        let p = self.max_probability / (1.0 + ((range - self.half_range) / self.range_scale).exp());
        p.clamp(0.0, 1.0)
    }
}
