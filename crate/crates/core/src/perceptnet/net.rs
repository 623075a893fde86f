use std::path::Path;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::distdp::{ContainerReader, ContainerWriter};
use crate::error::{Error, Result};

const KIND: &[u8; 4] = b"PNET";

/// Output nonlinearity of a single output unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Head {
    Tanh,
    Sigmoid,
    Identity,
}

impl Head {
    fn apply(self, z: f64) -> f64 {
        match self {
            Head::Tanh => z.tanh(),
            Head::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Head::Identity => z,
        }
    }

    /// Derivative expressed through the activation value `y`.
    fn slope(self, y: f64) -> f64 {
        match self {
            Head::Tanh => 1.0 - y * y,
            Head::Sigmoid => y * (1.0 - y),
            Head::Identity => 1.0,
        }
    }

    fn code(self) -> f64 {
        match self {
            Head::Tanh => 0.0,
            Head::Sigmoid => 1.0,
            Head::Identity => 2.0,
        }
    }

    fn from_code(c: f64) -> Result<Self> {
        match c as i64 {
            0 => Ok(Head::Tanh),
            1 => Ok(Head::Sigmoid),
            2 => Ok(Head::Identity),
            _ => Err(Error::Format(format!("unknown head code {c}"))),
        }
    }
}

/// Dense feedforward network with ReLU hidden layers and a per-unit output
/// head.
#[derive(Debug, Clone, PartialEq)]
pub struct PerceptionNet {
    sizes: Vec<usize>,
    heads: Vec<Head>,
    /// `weights[l]` has shape `(sizes[l], sizes[l + 1])`.
    weights: Vec<Array2<f64>>,
    biases: Vec<Array1<f64>>,
}

/// Activations recorded by [`PerceptionNet::forward_trace`].
#[derive(Debug, Clone)]
pub struct Trace {
    /// Input to each layer, then the network output last.
    activations: Vec<Array2<f64>>,
}

impl Trace {
    pub fn output(&self) -> &Array2<f64> {
        self.activations.last().unwrap()
    }
}

/// Parameter gradients, laid out like the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

impl Gradients {
    fn zeros_like(net: &PerceptionNet) -> Self {
        Self {
            weights: net.weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect(),
            biases: net.biases.iter().map(|b| Array1::zeros(b.raw_dim())).collect(),
        }
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend(w.iter());
            out.extend(b.iter());
        }
        out
    }
}

impl PerceptionNet {
    /// He-initialized network; `sizes` lists input, hidden and output widths.
    pub fn new(sizes: &[usize], heads: &[Head], seed: u64) -> Result<Self> {
        let mut net = Self::zeros(sizes, heads)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for w in &mut net.weights {
            let std = (2.0 / w.nrows() as f64).sqrt();
            let normal = Normal::new(0.0, std).unwrap();
            w.mapv_inplace(|_| normal.sample(&mut rng));
        }
        Ok(net)
    }

    pub fn zeros(sizes: &[usize], heads: &[Head]) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::InvalidState(format!("bad layer sizes {sizes:?}")));
        }
        if heads.len() != *sizes.last().unwrap() {
            return Err(Error::DimensionMismatch {
                expected: *sizes.last().unwrap(),
                got: heads.len(),
            });
        }
        Ok(Self {
            sizes: sizes.to_vec(),
            heads: heads.to_vec(),
            weights: sizes.windows(2).map(|p| Array2::zeros((p[0], p[1]))).collect(),
            biases: sizes[1..].iter().map(|n| Array1::zeros(*n)).collect(),
        })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn heads(&self) -> &[Head] {
        &self.heads
    }

    pub fn input_len(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_len(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn parameter_count(&self) -> usize {
        self.sizes.windows(2).map(|p| p[0] * p[1] + p[1]).sum()
    }

    pub fn parameters(&self) -> Vec<f64> {
        Gradients {
            weights: self.weights.clone(),
            biases: self.biases.clone(),
        }
        .flatten()
    }

    pub fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.parameter_count() {
            return Err(Error::DimensionMismatch {
                expected: self.parameter_count(),
                got: params.len(),
            });
        }
        let mut it = params.iter();
        for (w, b) in self.weights.iter_mut().zip(&mut self.biases) {
            w.iter_mut().chain(b.iter_mut()).for_each(|p| *p = *it.next().unwrap());
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let x = ArrayView2::from_shape((1, x.len()), x).unwrap();
        Ok(self.forward_batch(x)?.into_raw_vec_and_offset().0)
    }

    /// Forward pass over a batch of row vectors.
    pub fn forward_batch(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_input(x)?;
        let mut a = x.to_owned();
        for l in 0..self.weights.len() {
            a = self.layer(l, a.view());
        }
        Ok(a)
    }

    pub fn forward_trace(&self, x: ArrayView2<f64>) -> Result<Trace> {
        self.check_input(x)?;
        let mut activations = vec![x.to_owned()];
        for l in 0..self.weights.len() {
            let next = self.layer(l, activations[l].view());
            activations.push(next);
        }
        Ok(Trace { activations })
    }

    /// Gradients of a scalar loss given its derivative with respect to every
    /// network output in the traced batch.
    pub fn backward(&self, trace: &Trace, grad_output: ArrayView2<f64>) -> Result<Gradients> {
        let out = trace.output();
        if grad_output.dim() != out.dim() {
            return Err(Error::DimensionMismatch {
                expected: out.len(),
                got: grad_output.len(),
            });
        }
        let mut grads = Gradients::zeros_like(self);
        let mut delta = grad_output.to_owned();
        for (j, mut col) in delta.axis_iter_mut(Axis(1)).enumerate() {
            let head = self.heads[j];
            col.zip_mut_with(&out.column(j), |d, y| *d *= head.slope(*y));
        }
        for l in (0..self.weights.len()).rev() {
            let input = &trace.activations[l];
            grads.weights[l] = input.t().dot(&delta);
            grads.biases[l] = delta.sum_axis(Axis(0));
            if l > 0 {
                let mut back = delta.dot(&self.weights[l].t());
                back.zip_mut_with(input, |d, a| {
                    if *a <= 0.0 {
                        *d = 0.0
                    }
                });
                delta = back;
            }
        }
        Ok(grads)
    }

    fn layer(&self, l: usize, a: ArrayView2<f64>) -> Array2<f64> {
        let mut z = a.dot(&self.weights[l]);
        z += &self.biases[l];
        if l + 1 == self.weights.len() {
            for (j, mut col) in z.axis_iter_mut(Axis(1)).enumerate() {
                let head = self.heads[j];
                col.mapv_inplace(|v| head.apply(v));
            }
        } else {
            z.mapv_inplace(|v| v.max(0.0));
        }
        z
    }

    fn check_input(&self, x: ArrayView2<f64>) -> Result<()> {
        if x.ncols() != self.input_len() {
            return Err(Error::DimensionMismatch {
                expected: self.input_len(),
                got: x.ncols(),
            });
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut w = ContainerWriter::new(Vec::new(), KIND)?;
        w.floats(&self.sizes.iter().map(|s| *s as f64).collect::<Vec<_>>())?;
        w.floats(&self.heads.iter().map(|h| h.code()).collect::<Vec<_>>())?;
        for (wt, b) in self.weights.iter().zip(&self.biases) {
            w.floats(wt.as_slice().unwrap())?;
            w.floats(b.as_slice().unwrap())?;
        }
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = ContainerReader::new(bytes, KIND)?;
        let sizes: Vec<usize> = r.floats()?.into_iter().map(|s| s as usize).collect();
        let heads = r
            .floats()?
            .into_iter()
            .map(Head::from_code)
            .collect::<Result<Vec<_>>>()?;
        let mut net = Self::zeros(&sizes, &heads)?;
        for l in 0..net.weights.len() {
            let w = r.floats()?;
            let b = r.floats()?;
            let shape = net.weights[l].raw_dim();
            net.weights[l] = Array2::from_shape_vec(shape, w)
                .map_err(|e| Error::Format(format!("layer {l} weights: {e}")))?;
            if b.len() != net.biases[l].len() {
                return Err(Error::Format(format!("layer {l} bias length {}", b.len())));
            }
            net.biases[l] = Array1::from(b);
        }
        r.finish()?;
        Ok(net)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

/// Adam optimizer state for one network.
#[derive(Debug, Clone)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Gradients,
    v: Gradients,
    t: i32,
}

impl Adam {
    pub fn new(net: &PerceptionNet, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: Gradients::zeros_like(net),
            v: Gradients::zeros_like(net),
            t: 0,
        }
    }

    pub fn step(&mut self, net: &mut PerceptionNet, g: &Gradients) {
        self.t += 1;
        let (b1, b2) = (self.beta1, self.beta2);
        let c1 = 1.0 - b1.powi(self.t);
        let c2 = 1.0 - b2.powi(self.t);
        let step = self.lr * c2.sqrt() / c1;
        let eps = self.eps * c2.sqrt();
        let update = |p: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            *p -= step * *m / (v.sqrt() + eps);
        };
        for l in 0..net.weights.len() {
            ndarray::Zip::from(&mut net.weights[l])
                .and(&g.weights[l])
                .and(&mut self.m.weights[l])
                .and(&mut self.v.weights[l])
                .for_each(|p, g, m, v| update(p, *g, m, v));
            ndarray::Zip::from(&mut net.biases[l])
                .and(&g.biases[l])
                .and(&mut self.m.biases[l])
                .and(&mut self.v.biases[l])
                .for_each(|p, g, m, v| update(p, *g, m, v));
        }
    }
}
