//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::Instant;

use rand::Rng;
use rfmc_cli::classifier::encode_raw;
use rfmc_core::bench::{bench_inference, InferencePath, HARDWARE_REFERENCE_LATENCY_NS};
use rfmc_core::channel::default_snr_grid;
use rfmc_core::data::{build_dataset, split, Dataset, DatasetSpec};
use rfmc_core::eval::{agreement, evaluate_predictions, EvalReport};
use rfmc_core::model_file::{decode, Model};
use rfmc_core::nn::{self, argmax, cross_entropy, gradients, softmax, Layer, NetworkParams, TrainConfig, STANDARD_DIMS};
use rfmc_core::quant::{
    dequantize_value, layer_accumulators, quantize_frame, quantize_network, quantize_value, quantized_forward,
    quantized_forward_with, FixedPointFormat, LayerFormats, NeuronSchedule, QuantizedLayer, QuantizedNetwork,
};
use rfmc_core::rng::rng_from_seed;
use rfmc_core::{Error, ModulationLabel};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

/// Shared artifacts of the full-size run used by criteria 1, 2, 8, 9 and 10.
struct Trained {
    test: Dataset,
    params: NetworkParams,
    qnet: QuantizedNetwork,
    float_pred: Vec<ModulationLabel>,
    float_acc: f64,
    train_secs: f64,
}

fn full_run() -> Result<Trained, String> {
    let spec = DatasetSpec {
        frames_per_class: 2000,
        snr_grid: default_snr_grid(),
        waveform: Default::default(),
        master_seed: 1,
    };
    let data = build_dataset(&spec).map_err(|e| e.to_string())?;
    let (train_set, test) = split(&data, 0.8, 1).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let outcome = nn::train(&STANDARD_DIMS, &train_set.labeled_inputs(), &TrainConfig::default())
        .map_err(|e| e.to_string())?;
    let train_secs = start.elapsed().as_secs_f64();
    let params = outcome.params;
    let float_pred: Vec<_> = test
        .records
        .iter()
        .map(|r| nn::classify(&params, r.frame.as_slice()).unwrap())
        .collect();
    let float_acc = evaluate_predictions(&test, &float_pred).map_err(|e| e.to_string())?.overall_accuracy;
    let cal: Vec<&[f64]> = train_set.records.iter().map(|r| r.frame.as_slice()).collect();
    let qnet = quantize_network(&params, &cal).map_err(|e| e.to_string())?;
    Ok(Trained { test, params, qnet, float_pred, float_acc, train_secs })
}

fn criterion_1(t: &Trained) -> Outcome {
    let report = evaluate_predictions(&t.test, &t.float_pred).map_err(|e| e.to_string())?;
    let errors: Vec<String> = ModulationLabel::ALL
        .iter()
        .map(|l| format!("{}={:.1}%", l.name(), report.per_class_error[l.index()] * 100.0))
        .collect();
    let detail = format!(
        "held-out accuracy {:.2}% on {} frames (training {:.0} s); per-class error {}",
        t.float_acc * 100.0,
        t.test.len(),
        t.train_secs,
        errors.join(" ")
    );
    check(t.float_acc >= 0.90, format!("{detail}; need >= 90%"))?;
    Ok(detail)
}

fn quantized_predictions(qnet: &QuantizedNetwork, data: &Dataset) -> Vec<ModulationLabel> {
    data.records
        .iter()
        .map(|r| {
            let q = quantize_frame(r.frame.as_slice(), qnet.input_format());
            quantized_forward(qnet, &q).unwrap().label().unwrap()
        })
        .collect()
}

fn criterion_2(t: &Trained) -> Outcome {
    let qpred = quantized_predictions(&t.qnet, &t.test);
    let qacc = evaluate_predictions(&t.test, &qpred).map_err(|e| e.to_string())?.overall_accuracy;
    let agree = agreement(&t.float_pred, &qpred);
    let gap = (qacc - t.float_acc) * 100.0;
    let formats: Vec<String> = t
        .qnet
        .formats()
        .iter()
        .map(|f| format!("w{}/a{}", f.weight.frac_bits(), f.input.frac_bits()))
        .collect();
    let detail = format!(
        "float {:.2}%, quantized {:.2}%, gap {gap:+.2} points, agreement {:.2}%, formats {}",
        t.float_acc * 100.0,
        qacc * 100.0,
        agree * 100.0,
        formats.join(" ")
    );
    check(gap.abs() <= 1.5 && agree >= 0.98, format!("{detail}; need |gap| <= 1.5 and agreement >= 98%"))?;
    Ok(detail)
}

fn toy_loss(params: &NetworkParams, batch: &[(&[f64], usize)]) -> f64 {
    batch
        .iter()
        .map(|(x, y)| cross_entropy(&nn::forward(params, x).unwrap().probs, *y))
        .sum::<f64>()
        / batch.len() as f64
}

fn with_value(params: &NetworkParams, k: usize, delta: f64) -> NetworkParams {
    let mut layers: Vec<Layer> = params.layers().to_vec();
    let mut k = k;
    for l in &mut layers {
        let n = l.weights.len();
        if k < n {
            l.weights[k] += delta;
            return NetworkParams::from_layers(layers).unwrap();
        }
        k -= n;
        if k < l.biases.len() {
            l.biases[k] += delta;
            return NetworkParams::from_layers(layers).unwrap();
        }
        k -= l.biases.len();
    }
    unreachable!()
}

/// Smallest |pre-activation| of any hidden unit over the batch.
fn min_hidden_margin(params: &NetworkParams, batch: &[(&[f64], usize)]) -> f64 {
    let mut margin = f64::INFINITY;
    for (x, _) in batch {
        let mut cur = x.to_vec();
        let layers = params.layers();
        for l in &layers[..layers.len() - 1] {
            let z: Vec<f64> = (0..l.out_dim)
                .map(|r| l.biases[r] + l.row(r).iter().zip(&cur).map(|(w, v)| w * v).sum::<f64>())
                .collect();
            margin = z.iter().fold(margin, |m, v| m.min(v.abs()));
            cur = z.iter().map(|v| v.max(0.0)).collect();
        }
    }
    margin
}

fn criterion_3() -> Outcome {
    const SHAPES: [&[usize]; 6] = [&[3, 2, 2], &[2, 3, 2], &[4, 2, 2], &[2, 2, 2, 2], &[3, 3, 2], &[2, 2, 3]];
    let mut rng = rng_from_seed(3);
    let mut worst = 0f64;
    let mut nets = 0;
    let h = 1e-4;
    while nets < 100 {
        let dims = SHAPES[rng.random_range(0..SHAPES.len())];
        let params = NetworkParams::init(dims, rng.random()).unwrap();
        assert!(params.num_params() <= 20);
        let n = rng.random_range(1..=3);
        let inputs: Vec<Vec<f64>> = (0..n).map(|_| (0..dims[0]).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let out = *dims.last().unwrap();
        let batch: Vec<(&[f64], usize)> = inputs.iter().map(|x| (x.as_slice(), rng.random_range(0..out))).collect();
        // Central differences are meaningless across a ReLU kink.
        if min_hidden_margin(&params, &batch) < 1e-2 {
            continue;
        }
        nets += 1;
        let grads: Vec<f64> = gradients(&params, &batch).unwrap().values().collect();
        for (k, g) in grads.iter().enumerate() {
            let at = |d: f64| toy_loss(&with_value(&params, k, d), &batch);
            // Fourth-order central difference.
            let numeric = (at(-2.0 * h) - 8.0 * at(-h) + 8.0 * at(h) - at(2.0 * h)) / (12.0 * h);
            let rel = (g - numeric).abs() / g.abs().max(numeric.abs()).max(1e-6);
            worst = worst.max(rel);
        }
    }
    let detail = format!("100 networks, worst relative error {worst:.2e}");
    check(worst <= 1e-4, format!("{detail}; need <= 1e-4"))?;
    Ok(detail)
}

fn criterion_4() -> Outcome {
    let mut rng = rng_from_seed(4);
    let (mut worst_sum, mut worst_shift) = (0f64, 0f64);
    for i in 0..10_000 {
        let n = rng.random_range(2..=12);
        let scale = [1.0, 10.0, 100.0, 700.0][i % 4];
        let z: Vec<f64> = (0..n).map(|_| rng.random_range(-scale..scale)).collect();
        let p = softmax(&z);
        worst_sum = worst_sum.max((p.iter().sum::<f64>() - 1.0).abs());
        let c = rng.random_range(-50.0..50.0);
        let shifted: Vec<f64> = z.iter().map(|v| v + c).collect();
        let ps = softmax(&shifted);
        worst_shift = p.iter().zip(&ps).fold(worst_shift, |m, (a, b)| m.max((a - b).abs()));
        check(argmax(&z) == argmax(&p), format!("argmax mismatch on draw {i}: {z:?}"))?;

        // Integer decisions: round to a grid, rescale by a positive factor.
        let frac = rng.random_range(0..16);
        let ints: Vec<i64> = z.iter().map(|v| (v * (1u64 << frac) as f64).round() as i64).collect();
        let deq: Vec<f64> = ints.iter().map(|&v| v as f64 / (1u64 << frac) as f64).collect();
        let factor = rng.random_range(1..=64);
        let scaled: Vec<i64> = ints.iter().map(|v| v * factor).collect();
        let expect = argmax(&softmax(&deq));
        check(
            argmax(&ints) == expect && argmax(&scaled) == expect,
            format!("integer argmax mismatch on draw {i}"),
        )?;
    }
    let detail = format!("10000 vectors, max |sum - 1| {worst_sum:.1e}, max shift deviation {worst_shift:.1e}");
    check(worst_sum <= 1e-9 && worst_shift <= 1e-12, format!("{detail}; need 1e-9 and 1e-12"))?;
    Ok(detail)
}

fn criterion_5() -> Outcome {
    let f = |b| FixedPointFormat::new(b).unwrap();
    check(quantize_value(0.0, f(7)) == 0, "0.0 -> 0")?;
    check(quantize_value(1.0, f(14)) == 16384, "1.0 at Q14")?;
    check(quantize_value(10.0, f(14)) == 32767, "10.0 saturates at Q14")?;
    check(dequantize_value(16384, f(14)) == 1.0, "16384 at Q14")?;
    check(dequantize_value(-32768, f(14)) == -2.0, "-32768 at Q14")?;

    let mut rng = rng_from_seed(5);
    let mut worst = 0f64;
    for frac in 0..=15u8 {
        let fmt = f(frac);
        let lsb = 1.0 / (1u64 << frac) as f64;
        // Range edges: exactly representable extremes, and half an LSB past them.
        check(quantize_value(fmt.max_value(), fmt) == i16::MAX, format!("max at Q{frac}"))?;
        check(quantize_value(fmt.min_value(), fmt) == i16::MIN, format!("min at Q{frac}"))?;
        check(quantize_value(fmt.max_value() + lsb / 2.0, fmt) == i16::MAX, format!("above max at Q{frac}"))?;
        check(quantize_value(fmt.min_value() - lsb, fmt) == i16::MIN, format!("below min at Q{frac}"))?;
        check(quantize_value(1e12, fmt) == i16::MAX && quantize_value(-1e12, fmt) == i16::MIN, "far out of range")?;
        check(fmt.max_value() == 32767.0 * lsb && fmt.min_value() == -32768.0 * lsb, "range formula")?;
        for _ in 0..10_000 {
            let x = rng.random_range(fmt.min_value()..fmt.max_value());
            let err = (x - dequantize_value(quantize_value(x, fmt), fmt)).abs();
            check(err <= lsb / 2.0, format!("round-trip error {err} at Q{frac} for {x}"))?;
            worst = worst.max(err / lsb);
        }
    }

    let n = 1800;
    let mut max_acc = 0i64;
    for (w, x) in [(32767i16, 32767i16), (32767, -32767), (-32767, -32767), (-32767, 32767)] {
        let layer = QuantizedLayer {
            out_dim: 1,
            in_dim: n,
            formats: LayerFormats { weight: f(15), input: f(15) },
            weights: vec![w; n],
            biases: vec![w],
        };
        let (acc, overflow) = layer.accumulate(0, &vec![x; n]);
        let exact = n as i64 * w as i64 * x as i64 + ((w as i64) << 15);
        check(acc == exact, format!("accumulator {acc} != {exact}"))?;
        check(!overflow && acc.abs() < 1 << 47, "48-bit accumulator overflowed")?;
        max_acc = max_acc.max(acc.abs());
    }
    Ok(format!(
        "16 formats x 10000 draws, worst error {worst:.3} LSB; worst-case |acc| = 2^{:.2} < 2^47",
        (max_acc as f64).log2()
    ))
}

fn criterion_6() -> Outcome {
    let mut rng = rng_from_seed(6);
    for draw in 0..1000 {
        let out_dim = rng.random_range(1..=48);
        let in_dim = rng.random_range(1..=256);
        let layer = QuantizedLayer {
            out_dim,
            in_dim,
            formats: LayerFormats {
                weight: FixedPointFormat::new(rng.random_range(0..=15)).unwrap(),
                input: FixedPointFormat::new(rng.random_range(0..=15)).unwrap(),
            },
            weights: (0..out_dim * in_dim).map(|_| rng.random()).collect(),
            biases: (0..out_dim).map(|_| rng.random()).collect(),
        };
        let x: Vec<i16> = (0..in_dim).map(|_| rng.random()).collect();
        let seq = layer_accumulators(&layer, &x, NeuronSchedule::Sequential);
        let threads = rng.random_range(2..=8);
        let par = layer_accumulators(&layer, &x, NeuronSchedule::Parallel(threads));
        let rev = layer_accumulators(&layer, &x, NeuronSchedule::Reversed);
        check(seq == par && seq == rev, format!("draw {draw}: schedules disagree"))?;
    }
    let params = NetworkParams::init(&[64, 24, 12, 7], 6).unwrap();
    let cal: Vec<Vec<f64>> = (0..20).map(|_| (0..64).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let cal_refs: Vec<&[f64]> = cal.iter().map(Vec::as_slice).collect();
    let qnet = quantize_network(&params, &cal_refs).unwrap();
    for x in &cal {
        let frame = quantize_frame(x, qnet.input_format());
        let a = quantized_forward_with(&qnet, &frame, NeuronSchedule::Sequential).unwrap();
        let b = quantized_forward_with(&qnet, &frame, NeuronSchedule::Parallel(3)).unwrap();
        check(a == b, "network outputs differ between schedules")?;
    }
    Ok("1000 random layers bit-identical across sequential, reversed and parallel schedules".into())
}

fn rfmc(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_rfmc"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("rfmc {args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    String::from_utf8(out.stdout).map_err(|e| e.to_string())
}

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("rfmc-acceptance-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn pipeline(dir: &Path) -> Result<(Vec<u32>, String), String> {
    let (d, m, h, q) = (dir.join("d.rfds"), dir.join("m.rfmc"), dir.join("h.rfds"), dir.join("q.rfmc"));
    rfmc(&["gen-data", "--out", p(&d), "--frames-per-class", "150", "--seed", "11"])?;
    rfmc(&["train", "--dataset", p(&d), "--out", p(&m), "--epochs", "4", "--seed", "12", "--holdout", p(&h)])?;
    rfmc(&["quantize", "--model", p(&m), "--dataset", p(&d), "--out", p(&q)])?;
    let report = rfmc(&["eval", "--model", p(&m), "--dataset", p(&h), "--compare", "--qmodel", p(&q)])?;
    let sums = [&d, &m, &h, &q]
        .iter()
        .map(|f| std::fs::read(f).map(|b| crc32fast::hash(&b)).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    Ok((sums, report))
}

fn criterion_7() -> Outcome {
    let (a, ra) = pipeline(&workdir("det-a"))?;
    let (b, rb) = pipeline(&workdir("det-b"))?;
    let reports = EvalReport::parse_text(&ra).map_err(|e| e.to_string())?;
    let detail = format!(
        "dataset {:08x}, model {:08x}, holdout {:08x}, quantized {:08x}; float accuracy {:.3}",
        a[0], a[1], a[2], a[3], reports.overall_accuracy
    );
    check(a == b, format!("checksums differ: {a:08x?} vs {b:08x?}"))?;
    check(ra == rb, "eval reports differ")?;
    Ok(detail)
}

fn criterion_8(t: &Trained) -> Outcome {
    let frames: Vec<_> = t
        .test
        .records
        .iter()
        .take(500)
        .map(|r| quantize_frame(r.frame.as_slice(), t.qnet.input_format()))
        .collect();
    let run = |f: &rfmc_core::quant::QuantizedFrame| quantized_forward(&t.qnet, f).unwrap().label().unwrap();
    let r = bench_inference(run, &frames, 2000, 200, 1, InferencePath::Quantized).map_err(|e| e.to_string())?;
    let float_frames: Vec<&[f64]> = t.test.records.iter().take(500).map(|r| r.frame.as_slice()).collect();
    let frun = |f: &&[f64]| nn::classify(&t.params, f).unwrap();
    let fr = bench_inference(frun, &float_frames, 2000, 200, 1, InferencePath::Float).map_err(|e| e.to_string())?;
    let reference: Vec<String> = HARDWARE_REFERENCE_LATENCY_NS
        .iter()
        .map(|(n, ns)| format!("{n} {} us", *ns as f64 / 1e3))
        .collect();
    let detail = format!(
        "quantized mean {:.1} us/frame (p50 {:.1}, p99 {:.1}), float mean {:.1} us/frame; reference {}",
        r.mean_ns / 1e3,
        r.p50_ns as f64 / 1e3,
        r.p99_ns as f64 / 1e3,
        fr.mean_ns / 1e3,
        reference.join(", ")
    );
    check(r.mean_ns <= 1e6, format!("{detail}; need <= 1000 us"))?;
    Ok(detail)
}

fn criterion_9(t: &Trained) -> Outcome {
    let dir = workdir("stream");
    let model = dir.join("q.rfmc");
    std::fs::write(&model, Model::Quantized(t.qnet.clone()).to_bytes()).map_err(|e| e.to_string())?;
    let mut rng = rng_from_seed(9);
    let mut raw = Vec::new();
    for _ in 0..100 {
        let r = &t.test.records[rng.random_range(0..t.test.len())];
        raw.extend(encode_raw(r.frame.as_slice(), t.qnet.input_format()));
    }
    let file = dir.join("frames.bin");
    std::fs::write(&file, &raw).map_err(|e| e.to_string())?;
    let expected: Vec<u8> = rfmc(&["classify", "--model", p(&model), p(&file)])?
        .lines()
        .flat_map(|l| [l.split(' ').nth(1).unwrap().parse::<u8>().unwrap(), 1])
        .collect();
    check(expected.len() == 200, "classify did not label 100 frames")?;

    let mut child = Command::new(env!("CARGO_BIN_EXE_rfmc"))
        .args(["serve", "--model", p(&model), "--port", "0"])
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| e.to_string())?;
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).map_err(|e| e.to_string())?;
    let addr = line.split_whitespace().nth(2).unwrap_or_default().to_string();
    let result = std::thread::scope(|s| {
        let halves: Vec<_> = raw
            .chunks(raw.len() / 2)
            .map(|half| {
                let addr = addr.clone();
                s.spawn(move || -> std::io::Result<Vec<u8>> {
                    let mut conn = TcpStream::connect(addr)?;
                    let reader = conn.try_clone()?;
                    let n = half.len() / 1800;
                    let rx = std::thread::spawn(move || {
                        let mut reader = reader;
                        let mut got = vec![0u8; n];
                        reader.read_exact(&mut got).map(|_| got)
                    });
                    for chunk in half.chunks(777) {
                        conn.write_all(chunk)?;
                    }
                    rx.join().unwrap()
                })
            })
            .collect();
        halves.into_iter().map(|h| h.join().unwrap()).collect::<std::io::Result<Vec<_>>>()
    });
    let _ = child.kill();
    let _ = child.wait();
    let replies = result.map_err(|e| e.to_string())?.concat();
    check(replies == expected, "serve replies differ from classify output")?;
    Ok(format!("100 frames over 2 concurrent connections, {} reply bytes identical to classify", replies.len()))
}

fn criterion_10(t: &Trained) -> Outcome {
    let bytes = t.test.to_bytes();
    let back = Dataset::from_bytes(&bytes).map_err(|e| e.to_string())?;
    check(back == t.test && back.to_bytes() == bytes, "dataset round trip is not bit-exact")?;
    let dir = workdir("formats");
    let path = dir.join("t.rfds");
    rfmc_core::data::save_dataset(&t.test, &path).map_err(|e| e.to_string())?;
    check(std::fs::read(&path).map_err(|e| e.to_string())? == bytes, "saved dataset differs")?;
    check(rfmc_core::data::load_dataset(&path).map_err(|e| e.to_string())? == t.test, "loaded dataset differs")?;

    let models = [Model::Float(t.params.clone()), Model::Quantized(t.qnet.clone())];
    for m in &models {
        let b = m.to_bytes();
        let back = decode(&b).map_err(|e| e.to_string())?;
        check(&back == m && back.to_bytes() == b, "model round trip is not bit-exact")?;
    }

    let mut rng = rng_from_seed(10);
    let mut flips = 0;
    let header = [12usize, 8 + 8 * 3, 8 + 8 * 3];
    let files = [bytes, models[0].to_bytes(), models[1].to_bytes()];
    for (k, file) in files.iter().enumerate() {
        for _ in 0..100 {
            let pos = rng.random_range(header[k]..file.len());
            let mut c = file.clone();
            c[pos] ^= 1 << rng.random_range(0..8);
            let err = if k == 0 {
                Dataset::from_bytes(&c).err()
            } else {
                decode(&c).err()
            };
            check(
                matches!(err, Some(Error::ChecksumMismatch { .. })),
                format!("file {k}: corruption at byte {pos} gave {err:?}"),
            )?;
            flips += 1;
        }
    }
    Ok(format!("dataset and both model kinds round-trip bit-exactly; {flips}/{flips} single-byte corruptions reported as checksum mismatch"))
}

fn main() {
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut record = |n: u32, name: &'static str, r: Outcome| {
        eprintln!("finished criterion {n}");
        results.push((n, name, r));
    };
    record(3, "gradient correctness", criterion_3());
    record(4, "softmax/argmax invariants", criterion_4());
    record(5, "fixed-point unit suite", criterion_5());
    record(6, "parallel-neuron equivalence", criterion_6());
    record(7, "pipeline determinism", criterion_7());
    match full_run() {
        Ok(t) => {
            record(1, "end-to-end accuracy", criterion_1(&t));
            record(2, "quantization gap", criterion_2(&t));
            record(8, "quantized latency", criterion_8(&t));
            record(9, "stream round-trip", criterion_9(&t));
            record(10, "format integrity", criterion_10(&t));
        }
        Err(e) => {
            for (n, name) in [(1, "end-to-end accuracy"), (2, "quantization gap"), (8, "quantized latency"), (9, "stream round-trip"), (10, "format integrity")] {
                record(n, name, Err(format!("full training run failed: {e}")));
            }
        }
    }
    results.sort_by_key(|r| r.0);
    let mut failed = 0;
    for (n, name, r) in &results {
        match r {
            Ok(detail) => println!("criterion {n:>2} PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n:>2} FAIL {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
