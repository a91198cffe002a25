//! Additive white Gaussian noise at a configurable per-sample SNR.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error};
use crate::frame::IqFrame;
use crate::rng::rng_from_seed;

/// Signal-to-noise ratio at the classifier input, per complex sample,
/// relative to the synthesizer's unit-power normalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SnrSpec {
    /// No noise added.
    Clean,
    Db(f64),
}

impl SnrSpec {
    pub fn db(snr_db: f64) -> Result<Self, Error> {
        if snr_db.is_finite() {
            Ok(Self::Db(snr_db))
        } else {
            Err(invalid(format!("SNR must be finite, got {snr_db}")))
        }
    }

    /// Noise variance per complex sample, `10^(-snr/10)`; zero when clean.
    pub fn noise_variance(self) -> f64 {
        match self {
            Self::Clean => 0.0,
            Self::Db(db) => 10f64.powf(-db / 10.0),
        }
    }

    pub fn as_db(self) -> Option<f64> {
        match self {
            Self::Clean => None,
            Self::Db(db) => Some(db),
        }
    }
}

impl fmt::Display for SnrSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Clean => f.write_str("clean"),
            Self::Db(db) => write!(f, "{db}"),
        }
    }
}

impl FromStr for SnrSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("clean") {
            return Ok(Self::Clean);
        }
        let db: f64 = s
            .trim()
            .parse()
            .map_err(|_| invalid(format!("bad SNR value {s:?}")))?;
        Self::db(db)
    }
}

/// Parses an SNR grid written as `start:end:step` (inclusive, dB), a single
/// value, or a comma-separated list of either.
pub fn parse_snr_grid(s: &str) -> Result<Vec<SnrSpec>, Error> {
    let mut grid = Vec::new();
    for part in s.split(',').map(str::trim) {
        let fields: Vec<&str> = part.split(':').collect();
        match fields.as_slice() {
            [single] => grid.push(single.parse()?),
            [start, end, step] => {
                let parse = |v: &str| -> Result<f64, Error> {
                    v.trim()
                        .parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| invalid(format!("bad number {v:?} in SNR range {part:?}")))
                };
                let (start, end, step) = (parse(start)?, parse(end)?, parse(step)?);
                if step <= 0.0 || end < start {
                    return Err(invalid(format!(
                        "SNR range {part:?} needs start <= end and a positive step"
                    )));
                }
                let count = ((end - start) / step + 1e-9).floor() as usize + 1;
                if count > 10_000 {
                    return Err(invalid(format!("SNR range {part:?} has too many points")));
                }
                grid.extend((0..count).map(|k| SnrSpec::Db(start + k as f64 * step)));
            }
            _ => return Err(invalid(format!("malformed SNR range {part:?}, expected start:end:step"))),
        }
    }
    if grid.is_empty() {
        return Err(invalid("empty SNR grid"));
    }
    Ok(grid)
}

/// The default sweep, 0 to 18 dB in 2 dB steps.
pub fn default_snr_grid() -> Vec<SnrSpec> {
    (0..10).map(|k| SnrSpec::Db(2.0 * k as f64)).collect()
}

/// Adds complex Gaussian noise of variance `10^(-snr/10)` per complex sample.
pub fn apply_awgn(frame: &IqFrame, snr: SnrSpec, seed: u64) -> IqFrame {
    let variance = snr.noise_variance();
    if variance == 0.0 {
        return frame.clone();
    }
    let sigma = (variance / 2.0).sqrt();
    let mut rng = rng_from_seed(seed);
    let noisy = frame
        .as_slice()
        .iter()
        .map(|&v| v + sigma * rng.sample::<f64, _>(StandardNormal))
        .collect();
    IqFrame::from_vec_unchecked(noisy)
}

/// Noise-class frames already sit at the unit noise floor and pass through.
pub fn apply_awgn_to_noise_class(frame: &IqFrame) -> IqFrame {
    frame.clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::COMPLEX_SAMPLES;
    use crate::label::ModulationLabel;
    use crate::sigsynth::{gen_noise_frame, modulate, WaveformParams};

    fn measured_noise_power(snr_db: f64) -> f64 {
        let clean = modulate(ModulationLabel::Qpsk, &WaveformParams::default(), 1).unwrap();
        let mut total = 0.0;
        let frames = 10_000;
        for seed in 0..frames {
            let noisy = apply_awgn(&clean, SnrSpec::Db(snr_db), seed);
            total += noisy
                .as_slice()
                .iter()
                .zip(clean.as_slice())
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                / COMPLEX_SAMPLES as f64;
        }
        total / frames as f64
    }

    #[test]
    fn clean_is_identity() {
        let f = modulate(ModulationLabel::Bpsk, &WaveformParams::default(), 3).unwrap();
        assert_eq!(apply_awgn(&f, SnrSpec::Clean, 5), f);
    }

    #[test]
    fn noise_power_at_0_db() {
        let p = measured_noise_power(0.0);
        assert!((p - 1.0).abs() <= 0.02, "{p}");
    }

    #[test]
    fn noise_power_at_20_db() {
        let p = measured_noise_power(20.0);
        assert!((p - 0.01).abs() <= 0.0005, "{p}");
    }

    #[test]
    fn awgn_is_deterministic() {
        let f = modulate(ModulationLabel::Gmsk, &WaveformParams::default(), 3).unwrap();
        assert_eq!(apply_awgn(&f, SnrSpec::Db(4.0), 9), apply_awgn(&f, SnrSpec::Db(4.0), 9));
        assert_ne!(apply_awgn(&f, SnrSpec::Db(4.0), 9), apply_awgn(&f, SnrSpec::Db(4.0), 10));
    }

    #[test]
    fn noise_class_passthrough_is_idempotent() {
        let f = gen_noise_frame(12);
        let once = apply_awgn_to_noise_class(&f);
        assert_eq!(once, f);
        assert_eq!(apply_awgn_to_noise_class(&once), f);
        assert_eq!(once.as_slice().len(), 1800);
    }

    #[test]
    fn snr_grid_parsing() {
        let g = parse_snr_grid("0:18:2").unwrap();
        assert_eq!(g, default_snr_grid());
        assert_eq!(parse_snr_grid("5").unwrap(), vec![SnrSpec::Db(5.0)]);
        assert_eq!(
            parse_snr_grid("clean,-4:-2:2").unwrap(),
            vec![SnrSpec::Clean, SnrSpec::Db(-4.0), SnrSpec::Db(-2.0)]
        );
        for bad in ["0:18", "0:18:0", "18:0:2", "a:b:c", "", "0:18:2:1", "nan"] {
            assert!(parse_snr_grid(bad).is_err(), "{bad:?}");
        }
    }
}
