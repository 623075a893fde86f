use ndarray::{Array2, ArrayView2};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::controller::{H_LIMIT, TAU_MAX};
use super::risk::{objectness_risk, objectness_risk_slope, MAX_SEPARATION_COST};
use super::sky::{render_sky, sample_geometry, BlobLabel, RelativeGeometry, SkyConfig};
use crate::distdp::{rejection_sample_states, RiskSurface};
use crate::error::{Error, Result};
use crate::perceptnet::{train_with, Head, PerceptionNet, TrainConfig, TrainReport};

/// Objectness above which a frame counts as a detection.
pub const DETECTION_THRESHOLD: f64 = 0.5;
/// Largest centre error, in pixels, of a correct detection.
pub const CENTRE_TOLERANCE_PX: f64 = 1.5;
/// Weight of the squared centre error, in normalized image coordinates.
pub const CENTRE_WEIGHT: f64 = 10.0;

/// Rendered sky frames with labels and the `(tau, h)` state behind each.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorDataset {
    pub images: Array2<f64>,
    pub labels: Vec<Option<BlobLabel>>,
    /// `[tau, h]`, `None` for empty-sky frames.
    pub states: Vec<Option<[f64; 2]>>,
}

impl DetectorDataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|l| l.is_some()).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateSampling {
    /// Integer tau uniform on `[0, 41]`, h uniform on `[-300, 300]`.
    Uniform,
    /// Proportional to the risk weight of the marginal `[tau, h]` table.
    RiskWeighted,
}

/// Draws `n` frames; a fraction `empty_fraction` shows empty sky and the rest
/// an intruder at a sampled state with sampled encounter geometry.
pub fn generate_detector_data(
    sampling: StateSampling,
    n: usize,
    surface: Option<&RiskSurface>,
    sky: &SkyConfig,
    empty_fraction: f64,
    seed: u64,
) -> Result<DetectorDataset> {
    if n == 0 {
        return Err(Error::EmptySamples);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_empty = ((n as f64) * empty_fraction.clamp(0.0, 1.0)).round() as usize;
    let n_state = n - n_empty;
    let mut states: Vec<Option<[f64; 2]>> = match sampling {
        StateSampling::Uniform => (0..n_state)
            .map(|_| {
                Some([
                    f64::from(rng.random_range(0..=TAU_MAX)),
                    rng.random_range(-H_LIMIT..=H_LIMIT),
                ])
            })
            .collect(),
        StateSampling::RiskWeighted => {
            let surface = surface.ok_or_else(|| {
                Error::InvalidState("risk-weighted data needs a risk surface".into())
            })?;
            rejection_sample_states(surface, n_state, rng.next_u64(), &[None, None])?
                .into_iter()
                .map(|x| Some([x[0], x[1]]))
                .collect()
        }
    };
    states.extend(std::iter::repeat_n(None, n_empty));
    let seeds: Vec<u64> = (0..n).map(|_| rng.next_u64()).collect();
    let frames: Vec<_> = states
        .par_iter()
        .zip(&seeds)
        .map(|(s, sd)| {
            let mut r = ChaCha8Rng::seed_from_u64(*sd);
            let geom = s.map(|[tau, h]| sample_geometry(tau, h, &mut r));
            render_sky(geom.as_ref(), sky, &mut r)
        })
        .collect();
    let len = sky.resolution * sky.resolution;
    let mut images = Array2::zeros((n, len));
    let mut labels = Vec::with_capacity(n);
    for (i, f) in frames.into_iter().enumerate() {
        images.row_mut(i).as_slice_mut().unwrap().copy_from_slice(&f.pixels);
        labels.push(f.label);
    }
    Ok(DetectorDataset {
        images,
        labels,
        states,
    })
}

/// Objectness plus blob centre regressor on sky images.
#[derive(Debug, Clone, PartialEq)]
pub struct Detector {
    pub net: PerceptionNet,
    pub sky: SkyConfig,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub objectness: f64,
    pub y: f64,
    pub x: f64,
}

/// Training objective for a detector.
#[derive(Debug, Clone, Copy)]
pub enum DetectorLoss<'a> {
    /// Cross-entropy on objectness plus squared centre error on positives.
    Baseline,
    /// Baseline plus `lambda` times the normalized objectness risk on
    /// positives.
    Risk { surface: &'a RiskSurface, lambda: f64 },
}

impl Detector {
    pub fn new(sky: SkyConfig, hidden: &[usize], seed: u64) -> Result<Self> {
        let mut sizes = vec![sky.resolution * sky.resolution];
        sizes.extend_from_slice(hidden);
        sizes.push(3);
        Ok(Self {
            net: PerceptionNet::new(&sizes, &[Head::Sigmoid, Head::Tanh, Head::Tanh], seed)?,
            sky,
        })
    }

    /// Network input: pixels relative to the sky background.
    pub fn normalize(&self, images: ArrayView2<f64>) -> Array2<f64> {
        images.mapv(|p| p - self.sky.background)
    }

    pub fn predict_batch(&self, images: ArrayView2<f64>) -> Result<Vec<Prediction>> {
        let y = self.net.forward_batch(self.normalize(images).view())?;
        Ok(y.rows()
            .into_iter()
            .map(|r| Prediction {
                objectness: r[0],
                y: r[1],
                x: r[2],
            })
            .collect())
    }

    /// Renders the intruder at the given relative position and thresholds
    /// the objectness.
    pub fn detects(&self, horizontal: [f64; 2], dz: f64, rng: &mut impl Rng) -> bool {
        let geom = RelativeGeometry { horizontal, dz };
        let img = render_sky(Some(&geom), &self.sky, rng);
        let x: Vec<f64> = img.pixels.iter().map(|p| p - self.sky.background).collect();
        let out = self.net.forward(&x).expect("image size matches the detector");
        out[0] > DETECTION_THRESHOLD
    }

    pub fn train(
        &mut self,
        data: &DetectorDataset,
        cfg: &TrainConfig,
        loss: DetectorLoss<'_>,
    ) -> Result<TrainReport> {
        let x = self.normalize(data.images.view());
        train_with(&mut self.net, x.view(), cfg, |i, out| {
            detector_loss(out, data.labels[i].as_ref(), data.states[i], loss)
        })
    }
}

/// Per-example detector loss and its gradient with respect to the three
/// network outputs.
pub fn detector_loss(
    out: &[f64],
    label: Option<&BlobLabel>,
    state: Option<[f64; 2]>,
    loss: DetectorLoss<'_>,
) -> (f64, Vec<f64>) {
    let p = out[0].clamp(1e-7, 1.0 - 1e-7);
    let mut g = vec![0.0; 3];
    let target = if label.is_some() { 1.0 } else { 0.0 };
    let mut l = -(target * p.ln() + (1.0 - target) * (1.0 - p).ln());
    g[0] = (p - target) / (p * (1.0 - p));
    if let Some(b) = label {
        l += CENTRE_WEIGHT * ((out[1] - b.y).powi(2) + (out[2] - b.x).powi(2));
        g[1] = 2.0 * CENTRE_WEIGHT * (out[1] - b.y);
        g[2] = 2.0 * CENTRE_WEIGHT * (out[2] - b.x);
        if let (DetectorLoss::Risk { surface, lambda }, Some(s)) = (loss, state) {
            l += lambda * objectness_risk(surface, &s, out[0]) / MAX_SEPARATION_COST;
            g[0] += lambda * objectness_risk_slope(surface, &s) / MAX_SEPARATION_COST;
        }
    }
    (l, g)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionMetrics {
    pub precision: f64,
    pub recall: f64,
    pub true_positives: usize,
    pub predicted: usize,
    pub actual: usize,
}

/// A detection is correct when the frame holds an intruder and the
/// predicted centre lies within [`CENTRE_TOLERANCE_PX`] of it.
pub fn detection_metrics(det: &Detector, data: &DetectorDataset) -> Result<DetectionMetrics> {
    let preds = det.predict_batch(data.images.view())?;
    let half = det.sky.resolution as f64 / 2.0;
    let mut tp = 0;
    let mut predicted = 0;
    for (p, l) in preds.iter().zip(&data.labels) {
        if p.objectness > DETECTION_THRESHOLD {
            predicted += 1;
            if let Some(b) = l {
                let d = ((p.y - b.y).powi(2) + (p.x - b.x).powi(2)).sqrt() * half;
                if d <= CENTRE_TOLERANCE_PX {
                    tp += 1;
                }
            }
        }
    }
    let actual = data.positives();
    Ok(DetectionMetrics {
        precision: if predicted == 0 { 1.0 } else { tp as f64 / predicted as f64 },
        recall: if actual == 0 { 1.0 } else { tp as f64 / actual as f64 },
        true_positives: tp,
        predicted,
        actual,
    })
}
