//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Three operations: synthesize a noisy frame, explore a 16-bit fixed-point
//! format, and train a small classifier to compare float and quantized
//! confusion matrices.

use rfmc_core::channel::{apply_awgn, default_snr_grid, SnrSpec};
use rfmc_core::data::{build_dataset, split, DatasetSpec};
use rfmc_core::eval::{agreement, evaluate_predictions};
use rfmc_core::nn::{self, TrainConfig, STANDARD_DIMS};
use rfmc_core::quant::{
    dequantize_value, quantize_frame, quantize_network, quantize_value, quantized_forward, FixedPointFormat,
};
use rfmc_core::sigsynth::{gen_noise_frame, modulate, WaveformParams};
use rfmc_core::{ModulationLabel, NUM_CLASSES};
use wasm_bindgen::prelude::*;

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn msg(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Label names in id order.
#[wasm_bindgen(js_name = labelNames)]
pub fn label_names() -> Vec<String> {
    ModulationLabel::ALL.iter().map(|l| l.name().to_string()).collect()
}

/// One frame as 1800 interleaved I/Q values. `snr_db` of `None` (JS
/// `undefined`) gives the clean waveform; the noise class ignores it.
#[wasm_bindgen(js_name = synthesizeFrame)]
pub fn synthesize_frame(label: u8, snr_db: Option<f64>, seed: u64) -> Result<Vec<f64>, JsError> {
    frame(label, snr_db, seed).map_err(js_err)
}

pub fn frame(label: u8, snr_db: Option<f64>, seed: u64) -> Result<Vec<f64>, String> {
    let label = ModulationLabel::from_id(label).ok_or("label must be 0..6")?;
    if label == ModulationLabel::Noise {
        return Ok(gen_noise_frame(seed).into_vec());
    }
    let clean = modulate(label, &WaveformParams::default(), seed).map_err(msg)?;
    let snr = match snr_db {
        Some(db) => SnrSpec::db(db).map_err(msg)?,
        None => SnrSpec::Clean,
    };
    Ok(apply_awgn(&clean, snr, seed ^ 0x5eed).into_vec())
}

/// `[code, dequantized, error, min, max, lsb]` for `x` in a 16-bit format
/// with `frac_bits` fractional bits.
#[wasm_bindgen(js_name = quantizeExplore)]
pub fn quantize_explore(x: f64, frac_bits: u8) -> Result<Vec<f64>, JsError> {
    explore(x, frac_bits).map_err(js_err)
}

pub fn explore(x: f64, frac_bits: u8) -> Result<Vec<f64>, String> {
    if !x.is_finite() {
        return Err("value must be finite".into());
    }
    let fmt = FixedPointFormat::new(frac_bits).map_err(msg)?;
    let q = quantize_value(x, fmt);
    let back = dequantize_value(q, fmt);
    Ok(vec![q as f64, back, x - back, fmt.min_value(), fmt.max_value(), 1.0 / (1u32 << frac_bits) as f64])
}

/// A small model trained in the page, with both inference paths evaluated
/// on a held-out split.
#[wasm_bindgen]
pub struct DemoRun {
    float_confusion: Vec<u32>,
    quantized_confusion: Vec<u32>,
    float_accuracy: f64,
    quantized_accuracy: f64,
    agreement: f64,
    test_frames: usize,
    formats: Vec<u8>,
}

impl DemoRun {
    pub fn run(frames_per_class: usize, epochs: usize, seed: u64) -> Result<DemoRun, String> {
        if !(5..=400).contains(&frames_per_class) {
            return Err("frames per class must lie in 5..=400".into());
        }
        let data = build_dataset(&DatasetSpec {
            frames_per_class,
            snr_grid: default_snr_grid(),
            waveform: WaveformParams::default(),
            master_seed: seed,
        })
        .map_err(msg)?;
        let (train_set, test) = split(&data, 0.8, seed).map_err(msg)?;
        let config = TrainConfig { epochs, seed, ..Default::default() };
        let params = nn::train(&STANDARD_DIMS, &train_set.labeled_inputs(), &config).map_err(msg)?.params;
        let cal: Vec<&[f64]> = train_set.records.iter().map(|r| r.frame.as_slice()).collect();
        let qnet = quantize_network(&params, &cal).map_err(msg)?;

        let mut fp = Vec::with_capacity(test.len());
        let mut qp = Vec::with_capacity(test.len());
        for r in &test.records {
            fp.push(nn::classify(&params, r.frame.as_slice()).map_err(msg)?);
            let q = quantize_frame(r.frame.as_slice(), qnet.input_format());
            qp.push(quantized_forward(&qnet, &q).map_err(msg)?.label().expect("seven outputs"));
        }
        let fr = evaluate_predictions(&test, &fp).map_err(msg)?;
        let qr = evaluate_predictions(&test, &qp).map_err(msg)?;
        let flat = |c: &[[u64; NUM_CLASSES]; NUM_CLASSES]| c.iter().flatten().map(|&v| v as u32).collect();
        Ok(DemoRun {
            float_confusion: flat(fr.confusion.counts()),
            quantized_confusion: flat(qr.confusion.counts()),
            float_accuracy: fr.overall_accuracy,
            quantized_accuracy: qr.overall_accuracy,
            agreement: agreement(&fp, &qp),
            test_frames: test.len(),
            formats: qnet.formats().iter().flat_map(|f| [f.weight.frac_bits(), f.input.frac_bits()]).collect(),
        })
    }
}

#[wasm_bindgen]
impl DemoRun {
    #[wasm_bindgen(constructor)]
    pub fn new(frames_per_class: usize, epochs: usize, seed: u64) -> Result<DemoRun, JsError> {
        DemoRun::run(frames_per_class, epochs, seed).map_err(js_err)
    }

    /// Row-major 7x7 counts, rows ground truth.
    #[wasm_bindgen(getter, js_name = floatConfusion)]
    pub fn float_confusion(&self) -> Vec<u32> {
        self.float_confusion.clone()
    }

    #[wasm_bindgen(getter, js_name = quantizedConfusion)]
    pub fn quantized_confusion(&self) -> Vec<u32> {
        self.quantized_confusion.clone()
    }

    #[wasm_bindgen(getter, js_name = floatAccuracy)]
    pub fn float_accuracy(&self) -> f64 {
        self.float_accuracy
    }

    #[wasm_bindgen(getter, js_name = quantizedAccuracy)]
    pub fn quantized_accuracy(&self) -> f64 {
        self.quantized_accuracy
    }

    #[wasm_bindgen(getter)]
    pub fn agreement(&self) -> f64 {
        self.agreement
    }

    #[wasm_bindgen(getter, js_name = testFrames)]
    pub fn test_frames(&self) -> usize {
        self.test_frames
    }

    /// Weight and input fractional bits per layer, interleaved.
    #[wasm_bindgen(getter)]
    pub fn formats(&self) -> Vec<u8> {
        self.formats.clone()
    }
}
