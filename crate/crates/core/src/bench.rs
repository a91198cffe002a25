//! Per-frame latency and throughput measurement.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::error::{invalid, Error, Result};
use crate::label::ModulationLabel;

/// Minimum number of timed frames for a latency run.
pub const MIN_BENCH_FRAMES: usize = 100;

/// Per-frame latencies reported for the FPGA, GPU and CPU implementations,
/// in nanoseconds. Context only.
pub const HARDWARE_REFERENCE_LATENCY_NS: [(&str, u64); 3] =
    [("FPGA", 24_000), ("GPU", 3_600_000), ("CPU", 4_100_000)];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InferencePath {
    Float,
    Quantized,
}

impl fmt::Display for InferencePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Float => "float",
            Self::Quantized => "quantized",
        })
    }
}

impl FromStr for InferencePath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "float" => Ok(Self::Float),
            "quantized" | "fixed" => Ok(Self::Quantized),
            _ => Err(invalid(format!("unknown inference path {s:?}; expected float or quantized"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatencyReport {
    pub path: InferencePath,
    pub threads: usize,
    pub n_frames: usize,
    pub min_ns: u64,
    pub p50_ns: u64,
    pub p99_ns: u64,
    pub mean_ns: f64,
    /// Timed frames divided by the wall time of the timed section.
    pub frames_per_second: f64,
    /// Raw per-frame latencies in frame order.
    pub samples_ns: Vec<u64>,
    /// FNV-1a over the predicted label ids, in frame order.
    pub label_checksum: u64,
}

impl LatencyReport {
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "path: {}\nthreads: {}\nframes: {}\nmin_us: {:.3}\np50_us: {:.3}\np99_us: {:.3}\nmean_us: {:.3}\nframes_per_second: {:.1}\nlabel_checksum: {:016x}\n",
            self.path,
            self.threads,
            self.n_frames,
            self.min_ns as f64 / 1e3,
            self.p50_ns as f64 / 1e3,
            self.p99_ns as f64 / 1e3,
            self.mean_ns / 1e3,
            self.frames_per_second,
            self.label_checksum,
        );
        s.push_str("reference per-frame latency:");
        for (name, ns) in HARDWARE_REFERENCE_LATENCY_NS {
            s.push_str(&format!(" {name} {:.1} us", ns as f64 / 1e3));
        }
        s.push('\n');
        s
    }
}

/// FNV-1a over label ids.
pub fn label_checksum(labels: &[ModulationLabel]) -> u64 {
    labels.iter().fold(0xcbf29ce484222325u64, |h, l| (h ^ l.id() as u64).wrapping_mul(0x100000001b3))
}

fn nearest_rank(sorted: &[u64], q: f64) -> u64 {
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Times `n_frames` classifications, cycling through `frames`. Each worker
/// runs `warmup` untimed classifications first. With more than one thread
/// the frame indices are split into contiguous blocks.
pub fn bench_inference<T, F>(
    classify: F,
    frames: &[T],
    n_frames: usize,
    warmup: usize,
    threads: usize,
    path: InferencePath,
) -> Result<LatencyReport>
where
    T: Sync,
    F: Fn(&T) -> ModulationLabel + Sync,
{
    if frames.is_empty() {
        return Err(invalid("no frames to benchmark"));
    }
    if n_frames < MIN_BENCH_FRAMES {
        return Err(invalid(format!("need at least {MIN_BENCH_FRAMES} frames, got {n_frames}")));
    }
    if threads == 0 {
        return Err(invalid("thread count must be at least 1"));
    }
    let worker = |range: std::ops::Range<usize>| {
        for i in 0..warmup {
            std::hint::black_box(classify(&frames[i % frames.len()]));
        }
        let mut out = Vec::with_capacity(range.len());
        for i in range {
            let t = Instant::now();
            let label = std::hint::black_box(classify(&frames[i % frames.len()]));
            out.push((t.elapsed().as_nanos() as u64, label));
        }
        out
    };

    let block = n_frames.div_ceil(threads);
    let start = Instant::now();
    let results: Vec<(u64, ModulationLabel)> = if threads == 1 {
        worker(0..n_frames)
    } else {
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..n_frames)
                .step_by(block)
                .map(|lo| {
                    let worker = &worker;
                    s.spawn(move || worker(lo..(lo + block).min(n_frames)))
                })
                .collect();
            handles.into_iter().flat_map(|h| h.join().expect("benchmark worker panicked")).collect()
        })
    };
    let wall = start.elapsed();

    let samples_ns: Vec<u64> = results.iter().map(|r| r.0).collect();
    let labels: Vec<ModulationLabel> = results.iter().map(|r| r.1).collect();
    let mut sorted = samples_ns.clone();
    sorted.sort_unstable();
    Ok(LatencyReport {
        path,
        threads,
        n_frames,
        min_ns: sorted[0],
        p50_ns: nearest_rank(&sorted, 0.5),
        p99_ns: nearest_rank(&sorted, 0.99),
        mean_ns: samples_ns.iter().sum::<u64>() as f64 / n_frames as f64,
        frames_per_second: n_frames as f64 / wall.as_secs_f64().max(1e-9),
        samples_ns,
        label_checksum: label_checksum(&labels),
    })
}

/// Frames per second sustained over at least `duration` on `threads` workers.
pub fn bench_throughput<T, F>(classify: F, frames: &[T], duration: Duration, threads: usize) -> Result<f64>
where
    T: Sync,
    F: Fn(&T) -> ModulationLabel + Sync,
{
    if frames.is_empty() {
        return Err(invalid("no frames to benchmark"));
    }
    if duration < Duration::from_secs(1) {
        return Err(invalid("throughput runs must last at least one second"));
    }
    if threads == 0 {
        return Err(invalid("thread count must be at least 1"));
    }
    let start = Instant::now();
    let total: usize = std::thread::scope(|s| {
        let handles: Vec<_> = (0..threads)
            .map(|t| {
                let classify = &classify;
                s.spawn(move || {
                    let mut n = 0usize;
                    let mut i = t;
                    while start.elapsed() < duration {
                        std::hint::black_box(classify(&frames[i % frames.len()]));
                        n += 1;
                        i += threads;
                    }
                    n
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("benchmark worker panicked")).sum()
    });
    Ok(total as f64 / start.elapsed().as_secs_f64())
}
