//! Labeled datasets of `(frame, label, snr)` records: deterministic
//! construction, stratified splitting and the `RFDS` file format.
//!
//! File layout (little-endian):
//!
//! ```text
//! "RFDS" | version u16 = 1 | record count u32 | frame length u16 = 1800
//! per record: label u8 | snr flag u8 (0 = valid, 1 = n/a) | snr_db f32 | 1800 x f32
//! CRC32 of all record bytes, u32
//! ```

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;

use crate::channel::{apply_awgn, apply_awgn_to_noise_class, SnrSpec};
use crate::codec::{expect_magic, verify_crc, Reader};
use crate::error::{invalid, Error, Result};
use crate::frame::{IqFrame, FRAME_LEN};
use crate::label::{ModulationLabel, NUM_CLASSES};
use crate::rng::{derive_seed, rng_from_seed};
use crate::sigsynth::{gen_noise_frame, modulate, WaveformParams};

pub const DATASET_MAGIC: [u8; 4] = *b"RFDS";
pub const DATASET_VERSION: u16 = 1;
const HEADER_LEN: usize = 12;
const RECORD_LEN: usize = 1 + 1 + 4 + FRAME_LEN * 4;

const AWGN_STREAM: u64 = 0x4157_474e;

/// Recipe for [`build_dataset`].
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub frames_per_class: usize,
    pub snr_grid: Vec<SnrSpec>,
    pub waveform: WaveformParams,
    pub master_seed: u64,
}

impl DatasetSpec {
    pub fn validate(&self) -> Result<()> {
        if self.frames_per_class == 0 {
            return Err(invalid("frames_per_class must be >= 1"));
        }
        if self.snr_grid.is_empty() {
            return Err(invalid("snr_grid must not be empty"));
        }
        if self.snr_grid.iter().any(|s| matches!(s, SnrSpec::Db(db) if !db.is_finite())) {
            return Err(invalid("snr_grid holds a non-finite value"));
        }
        if self.frames_per_class * NUM_CLASSES > u32::MAX as usize {
            return Err(invalid("dataset too large for the file format"));
        }
        self.waveform.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub frame: IqFrame,
    pub label: ModulationLabel,
    /// `None` for noise-class records; `+inf` for clean signals.
    pub snr_db: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub records: Vec<Record>,
    /// The recipe, when the dataset was built in this process.
    pub provenance: Option<DatasetSpec>,
}

impl PartialEq for Dataset {
    fn eq(&self, other: &Self) -> bool {
        self.records == other.records
    }
}

impl Dataset {
    pub fn new(records: Vec<Record>) -> Self {
        Self { records, provenance: None }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn class_counts(&self) -> [usize; NUM_CLASSES] {
        let mut counts = [0; NUM_CLASSES];
        for r in &self.records {
            counts[r.label.index()] += 1;
        }
        counts
    }

    /// `(input, class index)` view for training.
    pub fn labeled_inputs(&self) -> Vec<(&[f64], usize)> {
        self.records.iter().map(|r| (r.frame.as_slice(), r.label.index())).collect()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.records.len() * RECORD_LEN + 4);
        out.extend_from_slice(&DATASET_MAGIC);
        out.extend_from_slice(&DATASET_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.records.len() as u32).to_le_bytes());
        out.extend_from_slice(&(FRAME_LEN as u16).to_le_bytes());
        for r in &self.records {
            out.push(r.label.id());
            match r.snr_db {
                Some(db) => {
                    out.push(0);
                    out.extend_from_slice(&(db as f32).to_le_bytes());
                }
                None => {
                    out.push(1);
                    out.extend_from_slice(&f32::NAN.to_le_bytes());
                }
            }
            for &v in r.frame.as_slice() {
                out.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
        let crc = crc32fast::hash(&out[HEADER_LEN..]);
        out.extend_from_slice(&crc.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        expect_magic(&mut r, &DATASET_MAGIC)?;
        let version = r.u16()?;
        if version != DATASET_VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        let count = r.u32()? as usize;
        let frame_len = r.u16()? as usize;
        if frame_len != FRAME_LEN {
            return Err(Error::Format(format!("frame length {frame_len}, expected {FRAME_LEN}")));
        }
        let expected = HEADER_LEN + count * RECORD_LEN + 4;
        if bytes.len() < expected {
            return Err(Error::Truncated { offset: bytes.len(), needed: expected - bytes.len() });
        }
        if bytes.len() > expected {
            return Err(Error::Format(format!(
                "{} unexpected trailing bytes after {count} records",
                bytes.len() - expected
            )));
        }
        let body = verify_crc(bytes, HEADER_LEN)?;

        let mut r = Reader::new(body);
        let mut records = Vec::with_capacity(count);
        for i in 0..count {
            let label = r.u8()?;
            let label = ModulationLabel::from_id(label)
                .ok_or_else(|| Error::Format(format!("record {i} has label id {label}")))?;
            let flag = r.u8()?;
            let snr = r.f32()?;
            let snr_db = match flag {
                0 if !snr.is_nan() => Some(snr as f64),
                1 => None,
                _ => return Err(Error::Format(format!("record {i} has bad SNR field (flag {flag})"))),
            };
            let mut samples = Vec::with_capacity(FRAME_LEN);
            for _ in 0..FRAME_LEN {
                samples.push(r.f32()? as f64);
            }
            let frame = IqFrame::new(samples).map_err(|e| Error::Format(format!("record {i}: {e}")))?;
            records.push(Record { frame, label, snr_db });
        }
        Ok(Self::new(records))
    }
}

/// Seed of frame `index` of class `label`.
pub fn frame_seed(master_seed: u64, label: ModulationLabel, index: usize) -> u64 {
    derive_seed(&[master_seed, label.id() as u64, index as u64])
}

/// Generates `frames_per_class` records per class. Modulated frames cycle
/// through the SNR grid by frame index; noise frames are not re-noised.
/// Values are rounded to `f32`, the file precision.
pub fn build_dataset(spec: &DatasetSpec) -> Result<Dataset> {
    spec.validate()?;
    let jobs: Vec<(ModulationLabel, usize)> = ModulationLabel::ALL
        .iter()
        .flat_map(|&l| (0..spec.frames_per_class).map(move |i| (l, i)))
        .collect();
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(jobs.len());
    let records = if threads <= 1 {
        jobs.iter().map(|&(l, i)| build_record(spec, l, i)).collect::<Result<Vec<_>>>()?
    } else {
        let chunk = jobs.len().div_ceil(threads);
        std::thread::scope(|s| {
            let handles: Vec<_> = jobs
                .chunks(chunk)
                .map(|part| {
                    s.spawn(move || part.iter().map(|&(l, i)| build_record(spec, l, i)).collect::<Result<Vec<_>>>())
                })
                .collect();
            let mut all = Vec::with_capacity(jobs.len());
            for h in handles {
                all.extend(h.join().expect("dataset worker panicked")?);
            }
            Ok::<_, Error>(all)
        })?
    };
    Ok(Dataset { records, provenance: Some(spec.clone()) })
}

fn build_record(spec: &DatasetSpec, label: ModulationLabel, index: usize) -> Result<Record> {
    let seed = frame_seed(spec.master_seed, label, index);
    let (mut frame, snr_db) = if label == ModulationLabel::Noise {
        (apply_awgn_to_noise_class(&gen_noise_frame(seed)), None)
    } else {
        let clean = modulate(label, &spec.waveform, seed)?;
        let snr = spec.snr_grid[index % spec.snr_grid.len()];
        let db = snr.as_db().unwrap_or(f64::INFINITY);
        (apply_awgn(&clean, snr, derive_seed(&[seed, AWGN_STREAM])), Some(db as f32 as f64))
    };
    frame.round_to_f32();
    Ok(Record { frame, label, snr_db })
}

/// Stratified split: each class is shuffled with its own seeded stream and
/// the first `floor(n * train_fraction)` records go to the training side.
pub fn split(dataset: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(invalid(format!("train_fraction must lie in (0, 1), got {train_fraction}")));
    }
    if dataset.is_empty() {
        return Err(invalid("cannot split an empty dataset"));
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for label in ModulationLabel::ALL {
        let mut idx: Vec<usize> = (0..dataset.len()).filter(|&i| dataset.records[i].label == label).collect();
        idx.shuffle(&mut rng_from_seed(derive_seed(&[seed, label.id() as u64])));
        let n_train = (idx.len() as f64 * train_fraction).floor() as usize;
        train.extend(idx[..n_train].iter().map(|&i| dataset.records[i].clone()));
        test.extend(idx[n_train..].iter().map(|&i| dataset.records[i].clone()));
    }
    Ok((Dataset::new(train), Dataset::new(test)))
}

pub fn save_dataset(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, dataset.to_bytes())?;
    Ok(())
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    Dataset::from_bytes(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::default_snr_grid;

    fn spec(frames: usize, seed: u64) -> DatasetSpec {
        DatasetSpec {
            frames_per_class: frames,
            snr_grid: default_snr_grid(),
            waveform: WaveformParams::default(),
            master_seed: seed,
        }
    }

    #[test]
    fn build_counts_and_determinism() {
        let a = build_dataset(&spec(10, 1)).unwrap();
        assert_eq!(a.len(), 70);
        assert_eq!(a.class_counts(), [10; 7]);
        let b = build_dataset(&spec(10, 1)).unwrap();
        assert_eq!(a.to_bytes(), b.to_bytes());
        let c = build_dataset(&spec(10, 2)).unwrap();
        assert_ne!(a.records[3].frame, c.records[3].frame);
    }

    #[test]
    fn snr_cycles_over_grid_and_noise_has_none() {
        let d = build_dataset(&spec(12, 5)).unwrap();
        for r in &d.records {
            if r.label == ModulationLabel::Noise {
                assert_eq!(r.snr_db, None);
            }
        }
        let bpsk: Vec<f64> = d
            .records
            .iter()
            .filter(|r| r.label == ModulationLabel::Bpsk)
            .map(|r| r.snr_db.unwrap())
            .collect();
        assert_eq!(&bpsk[..11], &[0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0, 18.0, 0.0]);
    }

    #[test]
    fn split_is_stratified_partition() {
        let d = build_dataset(&spec(10, 3)).unwrap();
        let (train, test) = split(&d, 0.8, 4).unwrap();
        assert_eq!((train.len(), test.len()), (56, 14));
        assert_eq!(train.class_counts(), [8; 7]);
        assert_eq!(test.class_counts(), [2; 7]);

        let key = |r: &Record| r.frame.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        let mut all: Vec<_> = train.records.iter().chain(&test.records).map(key).collect();
        let mut orig: Vec<_> = d.records.iter().map(key).collect();
        all.sort();
        orig.sort();
        assert_eq!(all, orig);

        let (train2, _) = split(&d, 0.8, 4).unwrap();
        assert_eq!(train, train2);
        assert!(split(&d, 1.0, 0).is_err());
        assert!(split(&d, 0.0, 0).is_err());
    }

    #[test]
    fn bytes_round_trip_and_integrity() {
        let mut spec = spec(2, 9);
        spec.snr_grid.push(SnrSpec::Clean);
        let d = build_dataset(&spec).unwrap();
        let bytes = d.to_bytes();
        assert_eq!(bytes.len(), HEADER_LEN + 14 * RECORD_LEN + 4);
        assert_eq!(Dataset::from_bytes(&bytes).unwrap(), d);

        let mut corrupt = bytes.clone();
        corrupt[HEADER_LEN + 100] ^= 0x01;
        assert!(matches!(Dataset::from_bytes(&corrupt), Err(Error::ChecksumMismatch { .. })));

        let mut magic = bytes.clone();
        magic[0] = b'X';
        assert!(matches!(Dataset::from_bytes(&magic), Err(Error::BadMagic { .. })));

        let mut version = bytes.clone();
        version[4] = 9;
        assert!(matches!(Dataset::from_bytes(&version), Err(Error::UnsupportedVersion(9))));

        assert!(matches!(Dataset::from_bytes(&bytes[..bytes.len() - 10]), Err(Error::Truncated { .. })));
        assert!(matches!(Dataset::from_bytes(&bytes[..3]), Err(Error::Truncated { .. })));
    }

    #[test]
    fn invalid_spec_is_rejected() {
        assert!(build_dataset(&spec(0, 1)).is_err());
        let mut s = spec(1, 1);
        s.snr_grid.clear();
        assert!(build_dataset(&s).is_err());
    }
}
