//! 16-bit fixed-point model of the FPGA datapath.
//!
//! Weights, biases and activations are stored as `i16` in per-layer
//! power-of-two formats. Each neuron accumulates `w * x` products in a 48-bit
//! register (modelled with `i64` plus an overflow flag), adds its bias
//! pre-aligned to the accumulator's binary point, applies ReLU on the
//! accumulator and shifts (rounding half away from zero, saturating) into the
//! next layer's activation format. The output layer skips requantization and
//! softmax: the label is the argmax of the raw accumulators.

use std::ops::Range;

use crate::error::{invalid, Result};
use crate::label::{ModulationLabel, NUM_CLASSES};
use crate::nn::{argmax, Layer, NetworkParams};

/// Accumulator width in bits.
pub const ACC_BITS: u32 = 48;
const ACC_LIMIT: i64 = 1 << (ACC_BITS - 1);

/// Percentile of |value| a format must cover.
pub const CALIBRATION_PERCENTILE: f64 = 0.999;

/// Signed 16-bit Q-format with `frac_bits` fractional bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FixedPointFormat {
    frac_bits: u8,
}

impl FixedPointFormat {
    pub const TOTAL_BITS: u32 = 16;

    pub fn new(frac_bits: u8) -> Result<Self> {
        if frac_bits > 15 {
            return Err(invalid(format!("frac_bits must be in 0..=15, got {frac_bits}")));
        }
        Ok(Self { frac_bits })
    }

    pub fn frac_bits(self) -> u8 {
        self.frac_bits
    }

    fn scale(self) -> f64 {
        (1u32 << self.frac_bits) as f64
    }

    /// Largest representable value, `2^(15-f) - 2^-f`.
    pub fn max_value(self) -> f64 {
        i16::MAX as f64 / self.scale()
    }

    /// Smallest representable value, `-2^(15-f)`.
    pub fn min_value(self) -> f64 {
        i16::MIN as f64 / self.scale()
    }

    /// The format with the most fractional bits whose positive range still
    /// reaches `max_abs`; Q15.0 when nothing does.
    pub fn covering(max_abs: f64) -> Self {
        (0..=15u8)
            .rev()
            .map(|f| Self { frac_bits: f })
            .find(|fmt| fmt.max_value() >= max_abs)
            .unwrap_or(Self { frac_bits: 0 })
    }
}

/// `round(x * 2^f)` half away from zero, saturated to the `i16` range.
pub fn quantize_value(x: f64, fmt: FixedPointFormat) -> i16 {
    let scaled = (x * fmt.scale()).round();
    scaled.clamp(i16::MIN as f64, i16::MAX as f64) as i16
}

pub fn dequantize_value(q: i16, fmt: FixedPointFormat) -> f64 {
    q as f64 / fmt.scale()
}

/// Arithmetic shift right by `shift` bits, rounding half away from zero.
pub fn round_shift_right(v: i64, shift: u32) -> i64 {
    if shift == 0 {
        return v;
    }
    let half = 1i64 << (shift - 1);
    if v >= 0 {
        (v + half) >> shift
    } else {
        -((-v + half) >> shift)
    }
}

/// A frame quantized under a known input format.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizedFrame {
    pub format: FixedPointFormat,
    pub samples: Vec<i16>,
}

pub fn quantize_frame(frame: &[f64], fmt: FixedPointFormat) -> QuantizedFrame {
    QuantizedFrame { format: fmt, samples: frame.iter().map(|&v| quantize_value(v, fmt)).collect() }
}

/// Formats chosen for one layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerFormats {
    /// Weights and biases.
    pub weight: FixedPointFormat,
    /// The activations this layer consumes.
    pub input: FixedPointFormat,
}

fn percentile_abs(values: impl Iterator<Item = f64>, p: f64) -> f64 {
    let mut v: Vec<f64> = values.map(f64::abs).collect();
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let rank = ((p * v.len() as f64).ceil() as usize).clamp(1, v.len());
    v[rank - 1]
}

/// Picks per-layer weight and input-activation formats covering the
/// 99.9th percentile of |values|, activations observed on `calibration`.
pub fn choose_formats(params: &NetworkParams, calibration: &[&[f64]]) -> Result<Vec<LayerFormats>> {
    if calibration.is_empty() {
        return Err(invalid("calibration set is empty"));
    }
    let layers = params.layers();
    let mut inputs: Vec<Vec<f64>> = vec![Vec::new(); layers.len()];
    for (n, frame) in calibration.iter().enumerate() {
        if frame.len() != params.input_dim() {
            return Err(invalid(format!(
                "calibration frame {n} has {} values, expected {}",
                frame.len(),
                params.input_dim()
            )));
        }
        let mut cur = frame.to_vec();
        let mut next = Vec::new();
        for (i, layer) in layers.iter().enumerate() {
            inputs[i].extend_from_slice(&cur);
            if i + 1 == layers.len() {
                break;
            }
            layer.affine(&cur, &mut next);
            next.iter_mut().for_each(|v| *v = v.max(0.0));
            std::mem::swap(&mut cur, &mut next);
        }
    }
    Ok(layers
        .iter()
        .zip(inputs)
        .map(|(layer, acts)| LayerFormats {
            weight: FixedPointFormat::covering(percentile_abs(
                layer.weights.iter().chain(&layer.biases).copied(),
                CALIBRATION_PERCENTILE,
            )),
            input: FixedPointFormat::covering(percentile_abs(acts.into_iter(), CALIBRATION_PERCENTILE)),
        })
        .collect())
}

/// One integer layer. Biases are kept in the weight format; the datapath
/// adds them shifted left by `bias_shift` (the input format's fractional
/// bits) so they line up with the accumulator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizedLayer {
    pub out_dim: usize,
    pub in_dim: usize,
    pub formats: LayerFormats,
    pub weights: Vec<i16>,
    pub biases: Vec<i16>,
}

impl QuantizedLayer {
    pub fn bias_shift(&self) -> u8 {
        self.formats.input.frac_bits()
    }

    /// Fractional bits of the accumulator.
    pub fn acc_frac_bits(&self) -> u32 {
        (self.formats.weight.frac_bits() + self.formats.input.frac_bits()) as u32
    }

    pub fn aligned_biases(&self) -> Vec<i32> {
        self.biases.iter().map(|&b| (b as i32) << self.bias_shift()).collect()
    }

    fn row(&self, r: usize) -> &[i16] {
        &self.weights[r * self.in_dim..(r + 1) * self.in_dim]
    }

    /// 48-bit accumulation for one neuron in ascending input order. The
    /// flag reports whether any partial sum could leave the 48-bit range;
    /// it tracks `|bias| + sum |w x|`, which bounds every partial sum.
    pub fn accumulate(&self, r: usize, x: &[i16]) -> (i64, bool) {
        let bias = ((self.biases[r] as i32) << self.bias_shift()) as i64;
        let row = self.row(r);
        if self.overflow_impossible() {
            let acc: i64 = row.iter().zip(x).map(|(&w, &v)| (w as i32 * v as i32) as i64).sum();
            return (acc + bias, false);
        }
        let mut acc = 0i64;
        let mut magnitude = 0i64;
        for (&w, &v) in row.iter().zip(x) {
            let p = w as i32 * v as i32;
            acc += p as i64;
            magnitude += p.unsigned_abs() as i64;
        }
        let overflow = magnitude + bias.abs() >= ACC_LIMIT;
        (acc + bias, overflow)
    }

    /// True when even all-extreme weights and inputs stay inside 48 bits:
    /// every product is at most 2^30 and so is the aligned bias.
    pub fn overflow_impossible(&self) -> bool {
        (self.in_dim as i64 + 1).saturating_mul(1 << 30) < ACC_LIMIT
    }

    fn dequantized(&self) -> Layer {
        Layer {
            out_dim: self.out_dim,
            in_dim: self.in_dim,
            weights: self.weights.iter().map(|&w| dequantize_value(w, self.formats.weight)).collect(),
            biases: self.biases.iter().map(|&b| dequantize_value(b, self.formats.weight)).collect(),
        }
    }
}

/// Integer network mirroring a float [`NetworkParams`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizedNetwork {
    layers: Vec<QuantizedLayer>,
}

impl QuantizedNetwork {
    pub fn from_layers(layers: Vec<QuantizedLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(invalid("quantized network needs at least one layer"));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.out_dim == 0 || l.in_dim == 0 {
                return Err(invalid(format!("layer {i} has a zero dimension")));
            }
            if l.weights.len() != l.out_dim * l.in_dim || l.biases.len() != l.out_dim {
                return Err(invalid(format!("layer {i} storage does not match {}x{}", l.out_dim, l.in_dim)));
            }
            if i > 0 && layers[i - 1].out_dim != l.in_dim {
                return Err(invalid(format!("layer {i} input width does not match layer {}", i - 1)));
            }
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[QuantizedLayer] {
        &self.layers
    }

    pub fn layer_dims(&self) -> Vec<usize> {
        std::iter::once(self.layers[0].in_dim)
            .chain(self.layers.iter().map(|l| l.out_dim))
            .collect()
    }

    /// Format raw input frames must be quantized under.
    pub fn input_format(&self) -> FixedPointFormat {
        self.layers[0].formats.input
    }

    pub fn formats(&self) -> Vec<LayerFormats> {
        self.layers.iter().map(|l| l.formats).collect()
    }

    /// Float network holding the dequantized parameters.
    pub fn dequantize(&self) -> NetworkParams {
        NetworkParams::from_layers(self.layers.iter().map(QuantizedLayer::dequantized).collect())
            .expect("shapes validated at construction")
    }
}

pub fn quantize_with_formats(params: &NetworkParams, formats: &[LayerFormats]) -> Result<QuantizedNetwork> {
    if formats.len() != params.layers().len() {
        return Err(invalid(format!(
            "{} layer formats for a {}-layer network",
            formats.len(),
            params.layers().len()
        )));
    }
    let layers = params
        .layers()
        .iter()
        .zip(formats)
        .map(|(l, &formats)| QuantizedLayer {
            out_dim: l.out_dim,
            in_dim: l.in_dim,
            formats,
            weights: l.weights.iter().map(|&w| quantize_value(w, formats.weight)).collect(),
            biases: l.biases.iter().map(|&b| quantize_value(b, formats.weight)).collect(),
        })
        .collect();
    QuantizedNetwork::from_layers(layers)
}

/// Calibrates formats on `calibration` and quantizes every parameter.
pub fn quantize_network(params: &NetworkParams, calibration: &[&[f64]]) -> Result<QuantizedNetwork> {
    let formats = choose_formats(params, calibration)?;
    quantize_with_formats(params, &formats)
}

/// How the neurons of a layer are scheduled. Every schedule yields the same
/// bits: neurons share no state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NeuronSchedule {
    #[default]
    Sequential,
    /// Highest neuron index first.
    Reversed,
    /// Neurons split into contiguous blocks across this many threads.
    Parallel(usize),
}

/// Result of an integer forward pass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizedOutput {
    /// Output-layer accumulators at `2^-acc_frac_bits` resolution.
    pub logits: Vec<i64>,
    pub class_index: usize,
    /// Set if any accumulator could have left the 48-bit range.
    pub overflow: bool,
}

impl QuantizedOutput {
    pub fn label(&self) -> Option<ModulationLabel> {
        ModulationLabel::from_index(self.class_index)
    }
}

/// Accumulators of every neuron in `layer` for input `x`.
pub fn layer_accumulators(layer: &QuantizedLayer, x: &[i16], schedule: NeuronSchedule) -> (Vec<i64>, bool) {
    let mut acc = vec![0i64; layer.out_dim];
    let mut flags = vec![false; layer.out_dim];
    let run = |range: Range<usize>, acc: &mut [i64], flags: &mut [bool]| {
        for (k, r) in range.enumerate() {
            let (a, f) = layer.accumulate(r, x);
            acc[k] = a;
            flags[k] = f;
        }
    };
    match schedule {
        NeuronSchedule::Sequential => run(0..layer.out_dim, &mut acc, &mut flags),
        NeuronSchedule::Reversed => {
            for r in (0..layer.out_dim).rev() {
                let (a, f) = layer.accumulate(r, x);
                acc[r] = a;
                flags[r] = f;
            }
        }
        NeuronSchedule::Parallel(threads) => {
            let block = layer.out_dim.div_ceil(threads.max(1));
            std::thread::scope(|s| {
                for (b, (acc, flags)) in acc.chunks_mut(block).zip(flags.chunks_mut(block)).enumerate() {
                    let start = b * block;
                    let range = start..start + acc.len();
                    s.spawn(move || run(range, acc, flags));
                }
            });
        }
    }
    (acc, flags.into_iter().any(|f| f))
}

/// ReLU on the accumulator, then shift from `acc_frac` to `out_frac`
/// fractional bits with rounding and saturation to `i16`.
pub fn requantize(acc: i64, acc_frac: u32, out_frac: u32) -> i16 {
    let v = acc.max(0);
    let shifted = if acc_frac >= out_frac {
        round_shift_right(v, acc_frac - out_frac)
    } else {
        v.saturating_mul(1i64 << (out_frac - acc_frac))
    };
    shifted.clamp(i16::MIN as i64, i16::MAX as i64) as i16
}

pub fn quantized_forward(qnet: &QuantizedNetwork, frame: &QuantizedFrame) -> Result<QuantizedOutput> {
    quantized_forward_with(qnet, frame, NeuronSchedule::Sequential)
}

pub fn quantized_forward_with(
    qnet: &QuantizedNetwork,
    frame: &QuantizedFrame,
    schedule: NeuronSchedule,
) -> Result<QuantizedOutput> {
    if frame.format != qnet.input_format() {
        return Err(invalid(format!(
            "frame quantized with {} fractional bits, network expects {}",
            frame.format.frac_bits(),
            qnet.input_format().frac_bits()
        )));
    }
    if frame.samples.len() != qnet.layers[0].in_dim {
        return Err(invalid(format!(
            "frame has {} samples, network expects {}",
            frame.samples.len(),
            qnet.layers[0].in_dim
        )));
    }
    let mut x = frame.samples.clone();
    let mut overflow = false;
    for (i, layer) in qnet.layers.iter().enumerate() {
        let (acc, flag) = layer_accumulators(layer, &x, schedule);
        overflow |= flag;
        match qnet.layers.get(i + 1) {
            Some(next) => {
                let out_frac = next.formats.input.frac_bits() as u32;
                x = acc.iter().map(|&a| requantize(a, layer.acc_frac_bits(), out_frac)).collect();
            }
            None => {
                let class_index = argmax(&acc);
                return Ok(QuantizedOutput { logits: acc, class_index, overflow });
            }
        }
    }
    unreachable!("network has at least one layer")
}

/// Quantizes a float frame under the network's input format and classifies it.
pub fn classify_quantized(qnet: &QuantizedNetwork, frame: &[f64]) -> Result<ModulationLabel> {
    if qnet.layers.last().map(|l| l.out_dim) != Some(NUM_CLASSES) {
        return Err(invalid("quantized network does not have seven outputs"));
    }
    let out = quantized_forward(qnet, &quantize_frame(frame, qnet.input_format()))?;
    Ok(out.label().expect("seven outputs"))
}

/// Output-layer accumulators as reals.
pub fn dequantize_logits(qnet: &QuantizedNetwork, logits: &[i64]) -> Vec<f64> {
    let frac = qnet.layers.last().expect("non-empty").acc_frac_bits();
    let scale = (1u64 << frac) as f64;
    logits.iter().map(|&l| l as f64 / scale).collect()
}
