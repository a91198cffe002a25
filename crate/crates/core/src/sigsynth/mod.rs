//! Baseband I/Q frame synthesis for the six modulation classes and the
//! noise class. Every function is a pure function of its arguments.

pub mod pulse;

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::frame::{IqFrame, COMPLEX_SAMPLES, FRAME_LEN};
use crate::label::ModulationLabel;
use crate::rng::rng_from_seed;

pub use pulse::CpmPulse;

/// Modulation index of GMSK. Fixed by definition.
pub const GMSK_MOD_INDEX: f64 = 0.5;

/// Waveform shaping parameters shared by all modulated classes.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveformParams {
    pub samples_per_symbol: usize,
    /// RRC rolloff for BPSK, QPSK and QAM16.
    pub rrc_rolloff: f64,
    pub rrc_span_symbols: usize,
    pub gmsk_bt: f64,
    pub gfsk_bt: f64,
    pub gfsk_mod_index: f64,
    pub gaussian_span_symbols: usize,
    pub cpm_mod_index: f64,
    pub cpm_pulse: CpmPulse,
    pub cpm_pulse_len_symbols: usize,
    /// Known sync symbols at the start of every frame; 0 gives a pure
    /// slice of random data.
    pub preamble_symbols: usize,
}

impl Default for WaveformParams {
    fn default() -> Self {
        Self {
            samples_per_symbol: 4,
            rrc_rolloff: 0.35,
            rrc_span_symbols: 8,
            gmsk_bt: 0.3,
            gfsk_bt: 0.5,
            gfsk_mod_index: 0.5,
            gaussian_span_symbols: 4,
            cpm_mod_index: 0.5,
            cpm_pulse: CpmPulse::Rectangular,
            cpm_pulse_len_symbols: 1,
            preamble_symbols: 32,
        }
    }
}

impl WaveformParams {
    pub fn validate(&self) -> Result<()> {
        let sps = self.samples_per_symbol;
        if sps < 2 || COMPLEX_SAMPLES % sps != 0 {
            return Err(invalid(format!(
                "samples_per_symbol must be >= 2 and divide {COMPLEX_SAMPLES}, got {sps}"
            )));
        }
        let unit = |name: &str, v: f64| {
            if v > 0.0 && v <= 1.0 {
                Ok(())
            } else {
                Err(invalid(format!("{name} must lie in (0, 1], got {v}")))
            }
        };
        unit("rrc_rolloff", self.rrc_rolloff)?;
        unit("gmsk_bt", self.gmsk_bt)?;
        unit("gfsk_bt", self.gfsk_bt)?;
        for (name, v) in [("gfsk_mod_index", self.gfsk_mod_index), ("cpm_mod_index", self.cpm_mod_index)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if self.rrc_span_symbols == 0 || self.gaussian_span_symbols == 0 {
            return Err(invalid("filter spans must be at least one symbol"));
        }
        if self.cpm_pulse_len_symbols == 0 {
            return Err(invalid("cpm_pulse_len_symbols must be >= 1"));
        }
        if self.preamble_symbols > COMPLEX_SAMPLES / sps {
            return Err(invalid(format!(
                "preamble of {} symbols does not fit in {} symbols per frame",
                self.preamble_symbols,
                COMPLEX_SAMPLES / sps
            )));
        }
        Ok(())
    }

    /// Largest phase change between consecutive samples for a
    /// constant-envelope class, or `None` for other classes.
    pub fn max_phase_step(&self, label: ModulationLabel) -> Option<f64> {
        let sps = self.samples_per_symbol as f64;
        match label {
            ModulationLabel::Cpm => Some(self.cpm_pulse.max_phase_step(
                self.cpm_mod_index,
                self.cpm_pulse_len_symbols,
                self.samples_per_symbol,
            )),
            ModulationLabel::Gfsk => Some(PI * self.gfsk_mod_index / sps),
            ModulationLabel::Gmsk => Some(PI * GMSK_MOD_INDEX / sps),
            _ => None,
        }
    }
}

/// Optional channel-free impairments applied at synthesis. Zero by default.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Impairments {
    /// Carrier frequency offset in cycles per sample.
    pub carrier_offset: f64,
    /// Constant phase rotation in radians.
    pub phase_offset: f64,
}

/// Draws `n_symbols` points uniformly from the unit-average-power
/// constellation of a linear modulation.
pub fn gen_symbols(label: ModulationLabel, n_symbols: usize, seed: u64) -> Result<Vec<Complex64>> {
    if n_symbols == 0 {
        return Err(invalid("n_symbols must be >= 1"));
    }
    let mut rng = rng_from_seed(seed);
    draw_symbols(label, n_symbols, &mut rng)
}

fn bits_per_symbol(label: ModulationLabel) -> Option<u32> {
    match label {
        ModulationLabel::Bpsk => Some(1),
        ModulationLabel::Qpsk => Some(2),
        ModulationLabel::Qam16 => Some(4),
        _ => None,
    }
}

/// Maps the low bits of `bits` to a constellation point.
fn map_symbol(label: ModulationLabel, bits: u32) -> Complex64 {
    let sign = |b: u32| if b & 1 == 0 { 1.0 } else { -1.0 };
    match label {
        ModulationLabel::Bpsk => Complex64::new(sign(bits), 0.0),
        ModulationLabel::Qpsk => Complex64::new(sign(bits) * FRAC_1_SQRT_2, sign(bits >> 1) * FRAC_1_SQRT_2),
        _ => {
            let level = |b: u32| [-3.0, -1.0, 1.0, 3.0][(b & 3) as usize] / 10f64.sqrt();
            Complex64::new(level(bits), level(bits >> 2))
        }
    }
}

fn draw_symbols(label: ModulationLabel, n: usize, rng: &mut impl Rng) -> Result<Vec<Complex64>> {
    let bits = bits_per_symbol(label).ok_or_else(|| invalid(format!("{label} is not a linear modulation")))?;
    Ok((0..n).map(|_| map_symbol(label, rng.random_range(0..1 << bits))).collect())
}

/// CCSDS attached sync marker, cycled to fill the preamble.
const SYNC_WORD: u32 = 0x1ACF_FC1D;

fn sync_bits() -> impl Iterator<Item = u32> {
    (0..32).rev().map(|k| (SYNC_WORD >> k) & 1).cycle()
}

fn preamble_symbols(label: ModulationLabel, n: usize) -> Vec<Complex64> {
    let bps = bits_per_symbol(label).expect("linear label");
    let mut bits = sync_bits();
    (0..n)
        .map(|_| {
            let word = (0..bps).fold(0, |acc, k| acc | (bits.next().unwrap() << k));
            map_symbol(label, word)
        })
        .collect()
}

/// Antipodal data for the phase modulations: `guard` random symbols, the
/// sync preamble, then random symbols up to `total`.
fn phase_data(guard: usize, preamble: usize, total: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut out = random_nrz(guard, rng);
    out.extend(sync_bits().take(preamble).map(|b| if b == 1 { 1.0 } else { -1.0 }));
    out.extend(random_nrz(total - out.len(), rng));
    out
}

/// Synthesizes one unit-RMS frame of a modulated class.
pub fn modulate(label: ModulationLabel, params: &WaveformParams, seed: u64) -> Result<IqFrame> {
    modulate_with(label, params, Impairments::default(), seed)
}

pub fn modulate_with(
    label: ModulationLabel,
    params: &WaveformParams,
    impairments: Impairments,
    seed: u64,
) -> Result<IqFrame> {
    if label == ModulationLabel::Noise {
        return Err(invalid("the noise class has no modulation; use gen_noise_frame"));
    }
    params.validate()?;
    let mut rng = rng_from_seed(seed);
    let mut samples = match label {
        ModulationLabel::Bpsk | ModulationLabel::Qpsk | ModulationLabel::Qam16 => {
            linear(label, params, &mut rng)?
        }
        ModulationLabel::Gfsk => gaussian_fsk(params.gfsk_bt, params.gfsk_mod_index, params, &mut rng),
        ModulationLabel::Gmsk => gaussian_fsk(params.gmsk_bt, GMSK_MOD_INDEX, params, &mut rng),
        ModulationLabel::Cpm => cpm(params, &mut rng),
        ModulationLabel::Noise => unreachable!(),
    };
    apply_impairments(&mut samples, impairments);
    normalize(&mut samples);
    Ok(to_frame(&samples))
}

/// One frame of the noise class: i.i.d. zero-mean Gaussian reals with
/// variance 0.5 per component (unit complex-sample variance).
pub fn gen_noise_frame(seed: u64) -> IqFrame {
    let mut rng = rng_from_seed(seed);
    let samples = (0..FRAME_LEN)
        .map(|_| rng.sample::<f64, _>(StandardNormal) * FRAC_1_SQRT_2)
        .collect();
    IqFrame::from_vec_unchecked(samples)
}

/// Synthesizes a frame of any class, noise included.
pub fn synthesize(label: ModulationLabel, params: &WaveformParams, seed: u64) -> Result<IqFrame> {
    match label {
        ModulationLabel::Noise => Ok(gen_noise_frame(seed)),
        _ => modulate(label, params, seed),
    }
}

fn linear(label: ModulationLabel, params: &WaveformParams, rng: &mut impl Rng) -> Result<Vec<Complex64>> {
    let sps = params.samples_per_symbol;
    let span = params.rrc_span_symbols;
    let taps = pulse::rrc_taps(params.rrc_rolloff, sps, span);
    let n_symbols = COMPLEX_SAMPLES / sps + span;
    // Symbol `lead` is the first one centred inside the frame.
    let lead = span / 2;
    let mut symbols = draw_symbols(label, lead, rng)?;
    symbols.extend(preamble_symbols(label, params.preamble_symbols));
    symbols.extend(draw_symbols(label, n_symbols - symbols.len(), rng)?);

    let mut up_i = vec![0.0; n_symbols * sps];
    let mut up_q = vec![0.0; n_symbols * sps];
    for (k, s) in symbols.iter().enumerate() {
        up_i[k * sps] = s.re;
        up_q[k * sps] = s.im;
    }
    let i = pulse::convolve(&up_i, &taps);
    let q = pulse::convolve(&up_q, &taps);
    let start = lead * sps + taps.len() / 2;
    debug_assert!(start >= taps.len() - 1);
    Ok((start..start + COMPLEX_SAMPLES)
        .map(|n| Complex64::new(i[n], q[n]))
        .collect())
}

fn random_nrz(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect()
}

fn gaussian_fsk(bt: f64, mod_index: f64, params: &WaveformParams, rng: &mut impl Rng) -> Vec<Complex64> {
    let sps = params.samples_per_symbol;
    let span = params.gaussian_span_symbols;
    let taps = pulse::gaussian_taps(bt, sps, span);
    let guard = span.max(2);
    let n_symbols = COMPLEX_SAMPLES / sps + 2 * guard;
    let nrz: Vec<f64> = phase_data(guard, params.preamble_symbols, n_symbols, rng)
        .into_iter()
        .flat_map(|a| std::iter::repeat_n(a, sps))
        .collect();
    let freq = pulse::convolve(&nrz, &taps);
    let step = PI * mod_index / sps as f64;
    let mut phase = 0.0;
    let phases: Vec<f64> = freq
        .iter()
        .map(|f| {
            phase += step * f;
            phase
        })
        .collect();
    let start = guard * sps + taps.len() / 2;
    frame_from_phase(&phases[start..start + COMPLEX_SAMPLES])
}

fn cpm(params: &WaveformParams, rng: &mut impl Rng) -> Vec<Complex64> {
    let sps = params.samples_per_symbol;
    let len = params.cpm_pulse_len_symbols;
    let h = params.cpm_mod_index;
    let guard = len.max(2);
    let n_symbols = COMPLEX_SAMPLES / sps + 2 * guard;
    let data = phase_data(guard, params.preamble_symbols, n_symbols, rng);

    // Phase at sample n is 2*pi*h * sum_k a_k q(n/sps - k).
    let total = n_symbols * sps;
    let mut phases = Vec::with_capacity(total);
    for n in 0..total {
        let t = n as f64 / sps as f64;
        let newest = n / sps;
        let oldest = newest.saturating_sub(len);
        // Symbols older than the pulse length contribute their full 1/2.
        let settled: f64 = data[..oldest].iter().sum::<f64>() * 0.5;
        let active: f64 = (oldest..=newest)
            .map(|k| data[k] * params.cpm_pulse.phase(t - k as f64, len))
            .sum();
        phases.push(2.0 * PI * h * (settled + active));
    }
    let start = guard * sps;
    frame_from_phase(&phases[start..start + COMPLEX_SAMPLES])
}

/// Unit-modulus samples, with the carrier phase referenced to zero at the
/// first sample of the frame.
fn frame_from_phase(phases: &[f64]) -> Vec<Complex64> {
    let reference = phases[0];
    phases.iter().map(|&p| Complex64::from_polar(1.0, p - reference)).collect()
}

fn apply_impairments(samples: &mut [Complex64], imp: Impairments) {
    if imp.carrier_offset == 0.0 && imp.phase_offset == 0.0 {
        return;
    }
    for (n, s) in samples.iter_mut().enumerate() {
        let theta = 2.0 * PI * imp.carrier_offset * n as f64 + imp.phase_offset;
        *s *= Complex64::from_polar(1.0, theta);
    }
}

fn normalize(samples: &mut [Complex64]) {
    let power = samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / samples.len() as f64;
    let scale = power.sqrt().recip();
    samples.iter_mut().for_each(|s| *s *= scale);
}

fn to_frame(samples: &[Complex64]) -> IqFrame {
    IqFrame::from_vec_unchecked(samples.iter().flat_map(|s| [s.re, s.im]).collect())
}
