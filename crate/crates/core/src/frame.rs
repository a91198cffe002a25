use crate::error::{invalid, Result};

/// Complex samples per classifier input.
pub const COMPLEX_SAMPLES: usize = 900;
/// Reals per classifier input (interleaved I, Q).
pub const FRAME_LEN: usize = 2 * COMPLEX_SAMPLES;

/// One classifier input: 900 complex baseband samples stored as interleaved
/// `I, Q, I, Q, ...` reals. Always exactly [`FRAME_LEN`] finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct IqFrame(Vec<f64>);

impl IqFrame {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.len() != FRAME_LEN {
            return Err(invalid(format!(
                "frame must hold {FRAME_LEN} reals, got {}",
                samples.len()
            )));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("frame value at index {i} is not finite")));
        }
        Ok(Self(samples))
    }

    pub fn from_complex(iq: &[(f64, f64)]) -> Result<Self> {
        Self::new(iq.iter().flat_map(|&(i, q)| [i, q]).collect())
    }

    pub fn zeros() -> Self {
        Self(vec![0.0; FRAME_LEN])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Iterates over `(I, Q)` pairs.
    pub fn complex(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.0.chunks_exact(2).map(|c| (c[0], c[1]))
    }

    /// Mean squared modulus of the complex samples.
    pub fn mean_power(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>() / COMPLEX_SAMPLES as f64
    }

    /// Rounds every value to the nearest `f32`, the precision of the dataset file.
    pub fn round_to_f32(&mut self) {
        for v in &mut self.0 {
            *v = *v as f32 as f64;
        }
    }

    pub(crate) fn from_vec_unchecked(samples: Vec<f64>) -> Self {
        debug_assert_eq!(samples.len(), FRAME_LEN);
        Self(samples)
    }
}

impl AsRef<[f64]> for IqFrame {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_wrong_length_and_non_finite() {
        assert!(IqFrame::new(vec![0.0; 1799]).is_err());
        let mut v = vec![0.0; FRAME_LEN];
        v[17] = f64::NAN;
        assert!(IqFrame::new(v).is_err());
        assert!(IqFrame::new(vec![0.5; FRAME_LEN]).is_ok());
    }

    #[test]
    fn complex_view_pairs_interleaved_values() {
        let iq: Vec<(f64, f64)> = (0..COMPLEX_SAMPLES).map(|k| (k as f64, -(k as f64))).collect();
        let frame = IqFrame::from_complex(&iq).unwrap();
        assert_eq!(frame.as_slice()[2], 1.0);
        assert_eq!(frame.as_slice()[3], -1.0);
        assert!(frame.complex().eq(iq.into_iter()));
    }
}
