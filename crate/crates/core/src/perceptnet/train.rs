use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::data::LabeledDataset;
use super::loss::{loss_baseline, loss_baseline_grad, RiskPenalty};
use super::net::{Adam, Gradients, PerceptionNet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            batch_size: 32,
            lr: 1e-3,
            seed: 0,
        }
    }
}

/// Per-epoch mean training loss.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub epoch_loss: Vec<f64>,
}

impl TrainReport {
    pub fn final_loss(&self) -> f64 {
        *self.epoch_loss.last().unwrap()
    }
}

/// Minibatch Adam on an arbitrary per-example loss.
///
/// `example_loss(i, output)` returns the loss of example `i` and its
/// gradient with respect to the network output. Batches are averaged.
pub fn train_with<F>(
    net: &mut PerceptionNet,
    inputs: ArrayView2<f64>,
    cfg: &TrainConfig,
    example_loss: F,
) -> Result<TrainReport>
where
    F: Fn(usize, &[f64]) -> (f64, Vec<f64>),
{
    let n = inputs.nrows();
    if n == 0 {
        return Err(Error::EmptySamples);
    }
    if cfg.epochs == 0 || cfg.batch_size == 0 {
        return Err(Error::InvalidState("epochs and batch size must be positive".into()));
    }
    let mut opt = Adam::new(net, cfg.lr);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut epoch_loss = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let (l, grads) = batch_gradient(net, inputs, batch, &example_loss)
                .map_err(|e| match e {
                    Error::NonFiniteLoss(m) => Error::NonFiniteLoss(format!("epoch {epoch}, {m}")),
                    e => e,
                })?;
            total += l * batch.len() as f64;
            opt.step(net, &grads);
        }
        epoch_loss.push(total / n as f64);
    }
    Ok(TrainReport { epoch_loss })
}

/// Mean loss over the examples in `batch` and its parameter gradient.
pub fn batch_gradient<F>(
    net: &PerceptionNet,
    inputs: ArrayView2<f64>,
    batch: &[usize],
    example_loss: F,
) -> Result<(f64, Gradients)>
where
    F: Fn(usize, &[f64]) -> (f64, Vec<f64>),
{
    let x = inputs.select(Axis(0), batch);
    let trace = net.forward_trace(x.view())?;
    let out = trace.output();
    let mut grad = Array2::zeros(out.raw_dim());
    let scale = 1.0 / batch.len() as f64;
    let mut total = 0.0;
    for (r, &i) in batch.iter().enumerate() {
        let row = out.row(r).to_vec();
        let (l, g) = example_loss(i, &row);
        if !l.is_finite() {
            return Err(Error::NonFiniteLoss(format!("example {i}: loss {l}")));
        }
        total += l;
        grad.row_mut(r).iter_mut().zip(g).for_each(|(d, gi)| *d = gi * scale);
    }
    Ok((total * scale, net.backward(&trace, grad.view())?))
}

/// Per-example estimator loss in unscaled state units, with the gradient
/// taken with respect to the scaled network output.
pub fn estimator_loss<'a>(
    data: &'a LabeledDataset,
    penalty: Option<&'a RiskPenalty>,
) -> impl Fn(usize, &[f64]) -> (f64, Vec<f64>) + 'a {
    move |i, out| {
        let s = data.states.row(i).to_vec();
        let s_hat = data.scaling.from_label(out);
        let (l, g) = match penalty {
            None => (loss_baseline(&s, &s_hat), loss_baseline_grad(&s, &s_hat)),
            Some(p) => (p.loss(&s, &s_hat).total, p.loss_grad(&s, &s_hat)),
        };
        (l, g.iter().zip(&data.scaling.scale).map(|(gi, k)| gi * k).collect())
    }
}

/// Trains a state estimator. Losses are measured in unscaled state units;
/// with a penalty the risk term is added.
pub fn train(
    net: &mut PerceptionNet,
    data: &LabeledDataset,
    cfg: &TrainConfig,
    penalty: Option<&RiskPenalty>,
) -> Result<TrainReport> {
    train_with(net, data.observations.view(), cfg, estimator_loss(data, penalty))
}
