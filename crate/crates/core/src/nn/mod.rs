//! Float feedforward network: ReLU hidden layers, softmax output,
//! cross-entropy loss, backpropagation and Adam.

mod adam;
mod backprop;
mod train;

pub use adam::{adam_step, AdamState};
pub use backprop::gradients;
pub use train::{train, train_from, TrainConfig, TrainOutcome};

use rand::Rng;

use crate::error::{invalid, Result};
use crate::label::{ModulationLabel, NUM_CLASSES};
use crate::rng::rng_from_seed;

/// Layer widths of the classifier: 1800 inputs, hidden layers of 100 and 20,
/// seven outputs.
pub const STANDARD_DIMS: [usize; 4] = [1800, 100, 20, NUM_CLASSES];

/// Floor applied to probabilities before taking the log in the loss.
pub const PROB_FLOOR: f64 = 1e-12;

/// An input vector paired with its class index.
pub type LabeledInput<'a> = (&'a [f64], usize);

/// One fully connected layer; `weights` is row-major `out_dim x in_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub out_dim: usize,
    pub in_dim: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Layer {
    pub fn zeros(out_dim: usize, in_dim: usize) -> Self {
        Self {
            out_dim,
            in_dim,
            weights: vec![0.0; out_dim * in_dim],
            biases: vec![0.0; out_dim],
        }
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.weights[r * self.in_dim..(r + 1) * self.in_dim]
    }

    /// `out = W x + b`, each dot product summed in ascending input order.
    pub fn affine(&self, x: &[f64], out: &mut Vec<f64>) {
        debug_assert_eq!(x.len(), self.in_dim);
        out.clear();
        out.extend_from_slice(&self.biases);
        let mut r = 0;
        // Four independent rows at a time; each row's sum stays sequential.
        while r + 4 <= self.out_dim {
            let (w0, w1, w2, w3) = (self.row(r), self.row(r + 1), self.row(r + 2), self.row(r + 3));
            let (mut s0, mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0, 0.0);
            for j in 0..self.in_dim {
                let xj = x[j];
                s0 += w0[j] * xj;
                s1 += w1[j] * xj;
                s2 += w2[j] * xj;
                s3 += w3[j] * xj;
            }
            out[r] += s0;
            out[r + 1] += s1;
            out[r + 2] += s2;
            out[r + 3] += s3;
            r += 4;
        }
        for (rr, o) in out.iter_mut().enumerate().skip(r) {
            *o += dot(self.row(rr), x);
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        s += x * y;
    }
    s
}

/// Weights and biases of the whole network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    layers: Vec<Layer>,
}

impl NetworkParams {
    /// Validates shapes (each layer consumes the previous layer's output)
    /// and finiteness.
    pub fn from_layers(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(invalid("network needs at least one layer"));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.out_dim == 0 || l.in_dim == 0 {
                return Err(invalid(format!("layer {i} has a zero dimension")));
            }
            if l.weights.len() != l.out_dim * l.in_dim || l.biases.len() != l.out_dim {
                return Err(invalid(format!("layer {i} storage does not match {}x{}", l.out_dim, l.in_dim)));
            }
            if i > 0 && layers[i - 1].out_dim != l.in_dim {
                return Err(invalid(format!(
                    "layer {i} expects {} inputs but layer {} produces {}",
                    l.in_dim,
                    i - 1,
                    layers[i - 1].out_dim
                )));
            }
            if l.weights.iter().chain(&l.biases).any(|v| !v.is_finite()) {
                return Err(invalid(format!("layer {i} holds non-finite parameters")));
            }
        }
        Ok(Self { layers })
    }

    pub fn zeros(dims: &[usize]) -> Result<Self> {
        check_dims(dims)?;
        Self::from_layers(dims.windows(2).map(|w| Layer::zeros(w[1], w[0])).collect())
    }

    /// He-style uniform initialization, weights in `±sqrt(6 / fan_in)`,
    /// zero biases.
    pub fn init(dims: &[usize], seed: u64) -> Result<Self> {
        check_dims(dims)?;
        let mut rng = rng_from_seed(seed);
        let layers = dims
            .windows(2)
            .map(|w| {
                let limit = (6.0 / w[0] as f64).sqrt();
                let mut layer = Layer::zeros(w[1], w[0]);
                layer
                    .weights
                    .iter_mut()
                    .for_each(|v| *v = rng.random_range(-limit..limit));
                layer
            })
            .collect();
        Self::from_layers(layers)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    #[cfg(test)]
    pub(crate) fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn layer_dims(&self) -> Vec<usize> {
        std::iter::once(self.layers[0].in_dim)
            .chain(self.layers.iter().map(|l| l.out_dim))
            .collect()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.out_dim)
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    /// True for the 1800-100-20-7 classifier shape.
    pub fn is_standard(&self) -> bool {
        self.layer_dims() == STANDARD_DIMS
    }

    pub(crate) fn same_shape(&self, other: &Self) -> bool {
        self.layers.len() == other.layers.len()
            && self
                .layers
                .iter()
                .zip(&other.layers)
                .all(|(a, b)| a.out_dim == b.out_dim && a.in_dim == b.in_dim)
    }

    /// Flat view over every parameter, layer by layer, weights before biases.
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.biases).copied())
    }

    pub(crate) fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> + '_ {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weights.iter_mut().chain(l.biases.iter_mut()))
    }
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.len() < 2 || dims.contains(&0) {
        return Err(invalid(format!("bad layer dims {dims:?}")));
    }
    Ok(())
}

pub fn relu(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| v.max(0.0)).collect()
}

fn relu_in_place(x: &mut [f64]) {
    x.iter_mut().for_each(|v| *v = v.max(0.0));
}

/// Max-shifted softmax.
pub fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = z.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Index of the largest value; the lowest index wins ties.
pub fn argmax<T: PartialOrd + Copy>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// `-ln(max(probs[truth], 1e-12))`.
pub fn cross_entropy(probs: &[f64], truth: usize) -> f64 {
    -probs[truth].max(PROB_FLOOR).ln()
}

/// Output of a float forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Forward {
    pub logits: Vec<f64>,
    pub probs: Vec<f64>,
}

pub fn forward(params: &NetworkParams, input: &[f64]) -> Result<Forward> {
    if input.len() != params.input_dim() {
        return Err(invalid(format!(
            "input has {} values, network expects {}",
            input.len(),
            params.input_dim()
        )));
    }
    let logits = logits_unchecked(params, input);
    let probs = softmax(&logits);
    Ok(Forward { logits, probs })
}

pub(crate) fn logits_unchecked(params: &NetworkParams, input: &[f64]) -> Vec<f64> {
    let mut cur = input.to_vec();
    let mut next = Vec::new();
    let last = params.layers.len() - 1;
    for (i, layer) in params.layers.iter().enumerate() {
        layer.affine(&cur, &mut next);
        if i < last {
            relu_in_place(&mut next);
        }
        std::mem::swap(&mut cur, &mut next);
    }
    cur
}

/// Class index chosen by the network.
pub fn predict(params: &NetworkParams, input: &[f64]) -> Result<usize> {
    Ok(argmax(&forward(params, input)?.probs))
}

/// `argmax` of the seven-way output as a label.
pub fn classify(params: &NetworkParams, input: &[f64]) -> Result<ModulationLabel> {
    if params.output_dim() != NUM_CLASSES {
        return Err(invalid(format!(
            "classify needs {NUM_CLASSES} outputs, network has {}",
            params.output_dim()
        )));
    }
    let index = predict(params, input)?;
    Ok(ModulationLabel::from_index(index).expect("index below NUM_CLASSES"))
}
