//! One classification code path shared by `classify`, `eval` and `serve`.

use anyhow::{bail, ensure, Result};
use rfmc_core::bench::InferencePath;
use rfmc_core::model_file::Model;
use rfmc_core::nn::{self, NetworkParams};
use rfmc_core::quant::{
    dequantize_value, quantize_frame, quantized_forward, FixedPointFormat, QuantizedFrame, QuantizedNetwork,
};
use rfmc_core::{ModulationLabel, FRAME_LEN, NUM_CLASSES};

/// Bytes in one raw stream frame: 1800 little-endian `i16`.
pub const RAW_FRAME_BYTES: usize = FRAME_LEN * 2;

/// Input format assumed for raw samples fed to a float model.
pub const DEFAULT_FLOAT_INPUT_FRAC: u8 = 12;

#[derive(Debug, Clone)]
enum Engine {
    Float(NetworkParams),
    Quantized(QuantizedNetwork),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub label: ModulationLabel,
    /// Softmax output; float path only.
    pub probs: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct FrameClassifier {
    engine: Engine,
    raw_format: FixedPointFormat,
}

impl FrameClassifier {
    /// `path` defaults to the model's own kind. A quantized model may run on
    /// the float path through its dequantized weights; a float model cannot
    /// run on the quantized path without calibration.
    pub fn new(model: Model, path: Option<InferencePath>, input_frac: Option<u8>) -> Result<Self> {
        ensure!(
            model.layer_dims().first() == Some(&FRAME_LEN) && model.layer_dims().last() == Some(&NUM_CLASSES),
            "model shape {:?} does not map {FRAME_LEN} inputs to {NUM_CLASSES} classes",
            model.layer_dims()
        );
        let (engine, raw_format) = match (model, path) {
            (Model::Float(p), None | Some(InferencePath::Float)) => {
                let frac = input_frac.unwrap_or(DEFAULT_FLOAT_INPUT_FRAC);
                (Engine::Float(p), FixedPointFormat::new(frac)?)
            }
            (Model::Float(_), Some(InferencePath::Quantized)) => {
                bail!("the model holds float weights; run `rfmc quantize` first to use the quantized path")
            }
            (Model::Quantized(q), path) => {
                let fmt = q.input_format();
                if let Some(f) = input_frac {
                    ensure!(
                        f == fmt.frac_bits(),
                        "--input-frac {f} conflicts with the model's input format ({} fractional bits)",
                        fmt.frac_bits()
                    );
                }
                let engine = match path {
                    Some(InferencePath::Float) => Engine::Float(q.dequantize()),
                    _ => Engine::Quantized(q),
                };
                (engine, fmt)
            }
        };
        Ok(Self { engine, raw_format })
    }

    pub fn from_quantized(q: QuantizedNetwork) -> Result<Self> {
        Self::new(Model::Quantized(q), None, None)
    }

    pub fn path(&self) -> InferencePath {
        match self.engine {
            Engine::Float(_) => InferencePath::Float,
            Engine::Quantized(_) => InferencePath::Quantized,
        }
    }

    /// Fixed-point format raw `i16` samples are read in.
    pub fn raw_format(&self) -> FixedPointFormat {
        self.raw_format
    }

    pub fn classify_frame(&self, frame: &[f64]) -> Result<Classification> {
        match &self.engine {
            Engine::Float(p) => float_result(p, frame),
            Engine::Quantized(q) => self.classify_quantized(q, &quantize_frame(frame, q.input_format())),
        }
    }

    /// Classifies one 3600-byte frame of little-endian `i16` samples.
    pub fn classify_raw(&self, bytes: &[u8]) -> Result<Classification> {
        ensure!(bytes.len() == RAW_FRAME_BYTES, "raw frame has {} bytes, expected {RAW_FRAME_BYTES}", bytes.len());
        let samples: Vec<i16> = bytes.chunks_exact(2).map(|b| i16::from_le_bytes([b[0], b[1]])).collect();
        match &self.engine {
            Engine::Float(p) => {
                let x: Vec<f64> = samples.iter().map(|&s| dequantize_value(s, self.raw_format)).collect();
                float_result(p, &x)
            }
            Engine::Quantized(q) => self.classify_quantized(q, &QuantizedFrame { format: self.raw_format, samples }),
        }
    }

    fn classify_quantized(&self, q: &QuantizedNetwork, frame: &QuantizedFrame) -> Result<Classification> {
        let out = quantized_forward(q, frame)?;
        Ok(Classification { label: out.label().expect("seven outputs"), probs: None })
    }

    /// Two-byte stream reply: label id, then path (0 float, 1 quantized).
    pub fn reply(&self, c: &Classification) -> [u8; 2] {
        [c.label.id(), path_byte(self.path())]
    }
}

pub fn path_byte(path: InferencePath) -> u8 {
    match path {
        InferencePath::Float => 0,
        InferencePath::Quantized => 1,
    }
}

fn float_result(p: &NetworkParams, x: &[f64]) -> Result<Classification> {
    let out = nn::forward(p, x)?;
    let label = ModulationLabel::from_index(nn::argmax(&out.probs)).expect("seven outputs");
    Ok(Classification { label, probs: Some(out.probs) })
}

/// Quantizes float frames to raw stream bytes under `fmt`.
pub fn encode_raw(frame: &[f64], fmt: FixedPointFormat) -> Vec<u8> {
    quantize_frame(frame, fmt).samples.iter().flat_map(|s| s.to_le_bytes()).collect()
}
