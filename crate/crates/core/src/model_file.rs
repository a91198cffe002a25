//! `RFMC` model container, shared by float and quantized networks.
//!
//! ```text
//! "RFMC" | version u16 = 1 | kind u8 (0 float, 1 quantized) | layer count u8
//! per layer: out_dim u32 | in_dim u32
//! body
//! CRC32 of body, u32
//! ```
//!
//! Float body, per layer: weights row-major f64, then biases f64.
//! Quantized body, per layer: weight frac bits u8, activation frac bits u8,
//! bias shift u8, weights row-major i16, biases i32 pre-aligned to the
//! accumulator. All values little-endian.

use std::fs;
use std::path::Path;

use crate::codec::{expect_magic, verify_crc, Reader};
use crate::error::{Error, Result};
use crate::nn::{Layer, NetworkParams};
use crate::quant::{FixedPointFormat, LayerFormats, QuantizedLayer, QuantizedNetwork};

pub const MODEL_MAGIC: [u8; 4] = *b"RFMC";
pub const MODEL_VERSION: u16 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum ModelKind {
    Float = 0,
    Quantized = 1,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Float(NetworkParams),
    Quantized(QuantizedNetwork),
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Self::Float(_) => ModelKind::Float,
            Self::Quantized(_) => ModelKind::Quantized,
        }
    }

    pub fn layer_dims(&self) -> Vec<usize> {
        match self {
            Self::Float(p) => p.layer_dims(),
            Self::Quantized(q) => q.layer_dims(),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        match self {
            Self::Float(p) => encode_float(p),
            Self::Quantized(q) => encode_quantized(q),
        }
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        decode(bytes)
    }
}

fn header(kind: ModelKind, dims: &[(usize, usize)]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(&MODEL_MAGIC);
    out.extend_from_slice(&MODEL_VERSION.to_le_bytes());
    out.push(kind as u8);
    out.push(dims.len() as u8);
    for &(o, i) in dims {
        out.extend_from_slice(&(o as u32).to_le_bytes());
        out.extend_from_slice(&(i as u32).to_le_bytes());
    }
    out
}

fn finish(mut out: Vec<u8>, body_start: usize) -> Vec<u8> {
    let crc = crc32fast::hash(&out[body_start..]);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

pub fn encode_float(params: &NetworkParams) -> Vec<u8> {
    let dims: Vec<_> = params.layers().iter().map(|l| (l.out_dim, l.in_dim)).collect();
    let mut out = header(ModelKind::Float, &dims);
    let body_start = out.len();
    for l in params.layers() {
        for v in l.weights.iter().chain(&l.biases) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    finish(out, body_start)
}

pub fn encode_quantized(qnet: &QuantizedNetwork) -> Vec<u8> {
    let dims: Vec<_> = qnet.layers().iter().map(|l| (l.out_dim, l.in_dim)).collect();
    let mut out = header(ModelKind::Quantized, &dims);
    let body_start = out.len();
    for l in qnet.layers() {
        out.push(l.formats.weight.frac_bits());
        out.push(l.formats.input.frac_bits());
        out.push(l.bias_shift());
        for w in &l.weights {
            out.extend_from_slice(&w.to_le_bytes());
        }
        for b in l.aligned_biases() {
            out.extend_from_slice(&b.to_le_bytes());
        }
    }
    finish(out, body_start)
}

pub fn decode(bytes: &[u8]) -> Result<Model> {
    let mut r = Reader::new(bytes);
    expect_magic(&mut r, &MODEL_MAGIC)?;
    let version = r.u16()?;
    if version != MODEL_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let kind = r.u8()?;
    let count = r.u8()? as usize;
    if count == 0 {
        return Err(Error::Format("model has no layers".into()));
    }
    let mut dims = Vec::with_capacity(count);
    for _ in 0..count {
        let out_dim = r.u32()? as usize;
        let in_dim = r.u32()? as usize;
        dims.push((out_dim, in_dim));
    }
    let body_start = r.position();
    let body_len: usize = match kind {
        0 => dims.iter().map(|&(o, i)| (o * i + o) * 8).sum(),
        1 => dims.iter().map(|&(o, i)| 3 + o * i * 2 + o * 4).sum(),
        k => return Err(Error::Format(format!("unknown model kind {k}"))),
    };
    let expected = body_start + body_len + 4;
    if bytes.len() < expected {
        return Err(Error::Truncated { offset: bytes.len(), needed: expected - bytes.len() });
    }
    if bytes.len() > expected {
        return Err(Error::Format(format!("{} unexpected trailing bytes", bytes.len() - expected)));
    }
    let body = verify_crc(bytes, body_start)?;
    let mut r = Reader::new(body);
    let shape_err = |e: Error| Error::Format(e.to_string());

    if kind == 0 {
        let mut layers = Vec::with_capacity(count);
        for &(out_dim, in_dim) in &dims {
            let weights = (0..out_dim * in_dim).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
            let biases = (0..out_dim).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
            layers.push(Layer { out_dim, in_dim, weights, biases });
        }
        return NetworkParams::from_layers(layers).map(Model::Float).map_err(shape_err);
    }

    let mut layers = Vec::with_capacity(count);
    for (n, &(out_dim, in_dim)) in dims.iter().enumerate() {
        let weight = FixedPointFormat::new(r.u8()?).map_err(shape_err)?;
        let input = FixedPointFormat::new(r.u8()?).map_err(shape_err)?;
        let shift = r.u8()?;
        if shift != input.frac_bits() {
            return Err(Error::Format(format!(
                "layer {n}: bias shift {shift} does not match activation frac bits {}",
                input.frac_bits()
            )));
        }
        let weights = (0..out_dim * in_dim).map(|_| r.i16()).collect::<Result<Vec<_>>>()?;
        let mut biases = Vec::with_capacity(out_dim);
        for _ in 0..out_dim {
            let aligned = r.i32()?;
            let b = aligned >> shift;
            if b << shift != aligned || i16::try_from(b).is_err() {
                return Err(Error::Format(format!("layer {n}: bias {aligned} is not an aligned 16-bit value")));
            }
            biases.push(b as i16);
        }
        layers.push(QuantizedLayer { out_dim, in_dim, formats: LayerFormats { weight, input }, weights, biases });
    }
    QuantizedNetwork::from_layers(layers).map(Model::Quantized).map_err(shape_err)
}

pub fn save_model(model: &Model, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, model.to_bytes())?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Model> {
    decode(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quant::quantize_network;

    fn float_model() -> Model {
        Model::Float(NetworkParams::init(&[12, 5, 3], 4).unwrap())
    }

    fn quant_model() -> Model {
        let params = NetworkParams::init(&[12, 5, 3], 4).unwrap();
        let cal: Vec<f64> = (0..12).map(|i| i as f64 / 6.0 - 1.0).collect();
        Model::Quantized(quantize_network(&params, &[&cal]).unwrap())
    }

    #[test]
    fn round_trip_both_kinds() {
        for m in [float_model(), quant_model()] {
            let bytes = m.to_bytes();
            assert_eq!(&bytes[..4], b"RFMC");
            assert_eq!(bytes[6], m.kind() as u8);
            assert_eq!(bytes[7], 2);
            let back = decode(&bytes).unwrap();
            assert_eq!(back, m);
            assert_eq!(back.to_bytes(), bytes);
        }
    }

    #[test]
    fn float_layout_is_exact() {
        let bytes = float_model().to_bytes();
        let header = 4 + 2 + 1 + 1 + 2 * 8;
        assert_eq!(bytes.len(), header + (12 * 5 + 5 + 5 * 3 + 3) * 8 + 4);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 5);
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 12);
    }

    #[test]
    fn corruption_is_reported_distinctly() {
        for m in [float_model(), quant_model()] {
            let bytes = m.to_bytes();
            let mut c = bytes.clone();
            c[30] ^= 0x40;
            assert!(matches!(decode(&c), Err(Error::ChecksumMismatch { .. })));
            let mut c = bytes.clone();
            c[1] = b'x';
            assert!(matches!(decode(&c), Err(Error::BadMagic { .. })));
            assert!(matches!(decode(&bytes[..bytes.len() - 1]), Err(Error::Truncated { .. })));
            let mut c = bytes.clone();
            c[4] = 2;
            assert!(matches!(decode(&c), Err(Error::UnsupportedVersion(2))));
            let mut c = bytes.clone();
            c[6] = 7;
            assert!(matches!(decode(&c), Err(Error::Format(_))));
        }
    }
}
