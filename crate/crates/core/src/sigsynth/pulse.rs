//! Pulse-shaping filters and CPM phase pulses. Time is measured in symbols.

use std::f64::consts::{FRAC_1_SQRT_2, LN_2, PI};

/// Root-raised-cosine taps spanning `span` symbols at `sps` samples per
/// symbol (`span * sps + 1` taps), scaled to unit energy.
pub fn rrc_taps(rolloff: f64, sps: usize, span: usize) -> Vec<f64> {
    let n = span * sps + 1;
    let mid = (n / 2) as f64;
    let beta = rolloff;
    let mut taps: Vec<f64> = (0..n)
        .map(|i| {
            let t = (i as f64 - mid) / sps as f64;
            if t == 0.0 {
                1.0 - beta + 4.0 * beta / PI
            } else if (4.0 * beta * t).abs() == 1.0 {
                let a = PI / (4.0 * beta);
                beta * FRAC_1_SQRT_2 * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos())
            } else {
                let num = (PI * t * (1.0 - beta)).sin() + 4.0 * beta * t * (PI * t * (1.0 + beta)).cos();
                let den = PI * t * (1.0 - (4.0 * beta * t).powi(2));
                num / den
            }
        })
        .collect();
    let energy = taps.iter().map(|h| h * h).sum::<f64>().sqrt();
    taps.iter_mut().for_each(|h| *h /= energy);
    taps
}

/// Gaussian frequency-shaping taps for bandwidth-time product `bt`, spanning
/// `span` symbols, normalized to unit sum so each symbol still contributes
/// its full phase.
pub fn gaussian_taps(bt: f64, sps: usize, span: usize) -> Vec<f64> {
    let n = span * sps + 1;
    let mid = (n / 2) as f64;
    let k = 2.0 * PI * PI * bt * bt / LN_2;
    let mut taps: Vec<f64> = (0..n)
        .map(|i| {
            let t = (i as f64 - mid) / sps as f64;
            (-k * t * t).exp()
        })
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|h| *h /= sum);
    taps
}

/// Frequency pulse of a CPM signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CpmPulse {
    Rectangular,
    RaisedCosine,
}

impl CpmPulse {
    /// Phase pulse q(t): integral of the frequency pulse over [0, t], rising
    /// from 0 to 1/2 over `len` symbols.
    pub fn phase(self, t: f64, len: usize) -> f64 {
        let l = len as f64;
        let t = t.clamp(0.0, l);
        match self {
            Self::Rectangular => t / (2.0 * l),
            Self::RaisedCosine => (t - l / (2.0 * PI) * (2.0 * PI * t / l).sin()) / (2.0 * l),
        }
    }

    /// Largest phase change between consecutive samples for modulation index
    /// `h`, regardless of the data.
    pub fn max_phase_step(self, h: f64, len: usize, sps: usize) -> f64 {
        let peak = match (self, len) {
            // 1RC peaks at twice the rectangular level.
            (Self::RaisedCosine, 1) => 2.0,
            _ => 1.0,
        };
        PI * h * peak / sps as f64
    }
}

/// Full linear convolution.
pub fn convolve(x: &[f64], h: &[f64]) -> Vec<f64> {
    if x.is_empty() || h.is_empty() {
        return Vec::new();
    }
    let mut y = vec![0.0; x.len() + h.len() - 1];
    for (i, &xi) in x.iter().enumerate() {
        if xi == 0.0 {
            continue;
        }
        for (j, &hj) in h.iter().enumerate() {
            y[i + j] += xi * hj;
        }
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rrc_is_symmetric_with_unit_energy() {
        let taps = rrc_taps(0.35, 4, 8);
        assert_eq!(taps.len(), 33);
        for i in 0..taps.len() {
            assert!((taps[i] - taps[taps.len() - 1 - i]).abs() < 1e-12);
        }
        let e: f64 = taps.iter().map(|h| h * h).sum();
        assert!((e - 1.0).abs() < 1e-12);
        let peak = taps.iter().cloned().fold(f64::MIN, f64::max);
        assert_eq!(peak, taps[16]);
    }

    #[test]
    fn rrc_singular_points_are_finite() {
        // rolloff 0.25 at 4 sps puts t = 1/(4 beta) = 1 exactly on a tap.
        let taps = rrc_taps(0.25, 4, 8);
        assert!(taps.iter().all(|h| h.is_finite()));
    }

    #[test]
    fn rrc_cascade_is_nyquist() {
        // RRC * RRC is a raised cosine: zero crossings at nonzero symbol multiples.
        let sps = 8;
        let taps = rrc_taps(0.5, sps, 16);
        let rc = convolve(&taps, &taps);
        let mid = rc.len() / 2;
        for k in 1..6 {
            assert!(rc[mid + k * sps].abs() < 5e-3 * rc[mid], "k={k}: {}", rc[mid + k * sps]);
        }
    }

    #[test]
    fn gaussian_taps_sum_to_one() {
        let taps = gaussian_taps(0.3, 4, 4);
        assert_eq!(taps.len(), 17);
        assert!((taps.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(taps.iter().all(|&h| h > 0.0));
    }

    #[test]
    fn phase_pulses_rise_to_one_half() {
        for pulse in [CpmPulse::Rectangular, CpmPulse::RaisedCosine] {
            for len in 1..4 {
                assert_eq!(pulse.phase(0.0, len), 0.0);
                assert!((pulse.phase(len as f64, len) - 0.5).abs() < 1e-15);
                assert!((pulse.phase(len as f64 + 3.0, len) - 0.5).abs() < 1e-15);
                assert!((pulse.phase(len as f64 / 2.0, len) - 0.25).abs() < 1e-15);
            }
        }
    }
}
