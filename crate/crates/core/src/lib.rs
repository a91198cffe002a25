//! Software model of an embedded RF modulation classifier.
//!
//! The pipeline synthesizes 900-sample baseband I/Q frames for noise and six
//! modulations ([`sigsynth`]), adds white Gaussian noise at a chosen SNR
//! ([`channel`]), trains a 1800-100-20-7 feedforward network ([`nn`]) and
//! runs it either in `f64` or through a 16-bit fixed-point datapath with
//! 48-bit accumulators ([`quant`]). [`eval`] and [`bench`] measure accuracy
//! and latency of both paths; [`data`] and [`model_file`] handle the binary
//! file formats.

pub mod bench;
pub mod channel;
mod codec;
pub mod data;
pub mod error;
pub mod eval;
pub mod frame;
pub mod label;
pub mod model_file;
pub mod nn;
pub mod quant;
pub mod rng;
pub mod sigsynth;

pub use error::{Error, Result};
pub use frame::{IqFrame, COMPLEX_SAMPLES, FRAME_LEN};
pub use label::{ModulationLabel, NUM_CLASSES};
