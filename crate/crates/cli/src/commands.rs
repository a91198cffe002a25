//! Subcommand implementations. Each writes its report to `out`.

use std::fs;
use std::io::{Read, Write};
use std::net::TcpListener;
use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, ensure, Context, Result};
use rfmc_core::bench::{bench_inference, bench_throughput, InferencePath, LatencyReport};
use rfmc_core::data::{build_dataset, load_dataset, save_dataset, split, Dataset, DatasetSpec};
use rfmc_core::eval::{
    agreement, compare_reports, evaluate_predictions, EvalReport, HARDWARE_REFERENCE_ACCURACY,
    HARDWARE_REFERENCE_ERROR,
};
use rfmc_core::model_file::{load_model, save_model, Model};
use rfmc_core::nn::{self, NetworkParams, TrainConfig, STANDARD_DIMS};
use rfmc_core::quant::{quantize_frame, quantize_network, quantized_forward, QuantizedNetwork};
use rfmc_core::sigsynth::WaveformParams;
use rfmc_core::{ModulationLabel, NUM_CLASSES};

use crate::classifier::{FrameClassifier, RAW_FRAME_BYTES};
use crate::{BenchArgs, ClassifyArgs, EvalArgs, GenDataArgs, QuantizeArgs, ServeArgs, TrainArgs};

fn read_dataset(path: &Path) -> Result<Dataset> {
    load_dataset(path).with_context(|| format!("reading dataset {}", path.display()))
}

fn read_model(path: &Path) -> Result<Model> {
    load_model(path).with_context(|| format!("reading model {}", path.display()))
}

fn float_model(path: &Path) -> Result<NetworkParams> {
    match read_model(path)? {
        Model::Float(p) => Ok(p),
        Model::Quantized(_) => bail!("{} holds a quantized model; a float model is required", path.display()),
    }
}

fn accuracy(params: &NetworkParams, data: &Dataset) -> Result<f64> {
    let mut correct = 0usize;
    for r in &data.records {
        correct += (nn::predict(params, r.frame.as_slice())? == r.label.index()) as usize;
    }
    Ok(correct as f64 / data.len().max(1) as f64)
}

fn calibration_frames(data: &Dataset, limit: Option<usize>) -> Vec<&[f64]> {
    let n = data.len();
    let take = limit.unwrap_or(n).clamp(1, n.max(1));
    (0..take).map(|k| data.records[k * n / take].frame.as_slice()).collect()
}

pub fn gen_data(a: &GenDataArgs, out: &mut dyn Write) -> Result<()> {
    let spec = DatasetSpec {
        frames_per_class: a.frames_per_class,
        snr_grid: a.snr.0.clone(),
        waveform: WaveformParams::default(),
        master_seed: a.seed,
    };
    let data = build_dataset(&spec)?;
    save_dataset(&data, &a.out).with_context(|| format!("writing {}", a.out.display()))?;
    writeln!(out, "wrote {} records to {}", data.len(), a.out.display())?;
    writeln!(out, "per class:")?;
    for (l, n) in ModulationLabel::ALL.iter().zip(data.class_counts()) {
        writeln!(out, "  {:<6} {n}", l.name())?;
    }
    writeln!(out, "per snr (modulated classes):")?;
    for snr in &spec.snr_grid {
        let n = data
            .records
            .iter()
            .filter(|r| r.label != ModulationLabel::Noise && r.snr_db.map(|v| v as f32) == Some(snr_value(snr)))
            .count();
        writeln!(out, "  {snr:>6} {n}")?;
    }
    Ok(())
}

fn snr_value(snr: &rfmc_core::channel::SnrSpec) -> f32 {
    snr.as_db().map_or(f32::INFINITY, |v| v as f32)
}

pub fn train(a: &TrainArgs, out: &mut dyn Write) -> Result<()> {
    let data = read_dataset(&a.dataset)?;
    ensure!(
        a.train_fraction > 0.0 && a.train_fraction <= 1.0,
        "--train-fraction must lie in (0, 1], got {}",
        a.train_fraction
    );
    let (train_set, val_set) = if a.train_fraction < 1.0 {
        split(&data, a.train_fraction, a.seed)?
    } else {
        (data, Dataset::new(Vec::new()))
    };
    let config = TrainConfig { learning_rate: a.lr, batch_size: a.batch, epochs: a.epochs, seed: a.seed, ..Default::default() };
    writeln!(out, "training on {} records, validating on {}", train_set.len(), val_set.len())?;
    let outcome = nn::train(&STANDARD_DIMS, &train_set.labeled_inputs(), &config)?;
    for (e, loss) in outcome.epoch_losses.iter().enumerate() {
        writeln!(out, "epoch {:>3} loss {loss:.6}", e + 1)?;
    }
    writeln!(out, "train accuracy: {:.4}", accuracy(&outcome.params, &train_set)?)?;
    if !val_set.is_empty() {
        writeln!(out, "validation accuracy: {:.4}", accuracy(&outcome.params, &val_set)?)?;
    }
    save_model(&Model::Float(outcome.params), &a.out).with_context(|| format!("writing {}", a.out.display()))?;
    writeln!(out, "wrote model to {}", a.out.display())?;
    if let Some(path) = &a.holdout {
        save_dataset(&val_set, path).with_context(|| format!("writing {}", path.display()))?;
        writeln!(out, "wrote {} held-out records to {}", val_set.len(), path.display())?;
    }
    Ok(())
}

pub fn quantize(a: &QuantizeArgs, out: &mut dyn Write) -> Result<()> {
    let params = float_model(&a.model)?;
    let data = read_dataset(&a.dataset)?;
    ensure!(!data.is_empty(), "calibration dataset is empty");
    let cal = calibration_frames(&data, a.calibration_frames);
    let q = quantize_network(&params, &cal)?;
    writeln!(out, "calibrated on {} frames", cal.len())?;
    write_formats(&q, &params, out)?;
    save_model(&Model::Quantized(q), &a.out).with_context(|| format!("writing {}", a.out.display()))?;
    writeln!(out, "wrote quantized model to {}", a.out.display())?;
    Ok(())
}

fn write_formats(q: &QuantizedNetwork, params: &NetworkParams, out: &mut dyn Write) -> Result<()> {
    writeln!(out, "layer  dims       weight_frac  input_frac  max_abs_err  rms_err      saturated")?;
    let deq = q.dequantize();
    for (i, ((ql, fl), dl)) in q.layers().iter().zip(params.layers()).zip(deq.layers()).enumerate() {
        let orig = fl.weights.iter().chain(&fl.biases);
        let back = dl.weights.iter().chain(&dl.biases);
        let (mut max_err, mut sq, mut n, mut sat) = (0f64, 0f64, 0usize, 0usize);
        let fmt = ql.formats.weight;
        for (o, b) in orig.zip(back) {
            let e = (o - b).abs();
            max_err = max_err.max(e);
            sq += e * e;
            n += 1;
            sat += (*o > fmt.max_value() || *o < fmt.min_value()) as usize;
        }
        writeln!(
            out,
            "{i:<6} {:<10} {:<12} {:<11} {max_err:<12.3e} {:<12.3e} {sat}",
            format!("{}x{}", ql.out_dim, ql.in_dim),
            fmt.frac_bits(),
            ql.formats.input.frac_bits(),
            (sq / n as f64).sqrt(),
        )?;
    }
    writeln!(
        out,
        "raw stream input format: Q{}.{} (int16 samples = value * 2^{})",
        15 - q.input_format().frac_bits(),
        q.input_format().frac_bits(),
        q.input_format().frac_bits()
    )?;
    Ok(())
}

fn write_report(out: &mut dyn Write, title: &str, report: &EvalReport, columns: bool) -> Result<()> {
    if columns {
        writeln!(out, "# {title}\n# snr_db n accuracy")?;
        for b in &report.accuracy_by_snr {
            writeln!(out, "{} {} {:.6}", b.snr_db, b.n, b.accuracy())?;
        }
        return Ok(());
    }
    writeln!(out, "# {title}")?;
    write!(out, "{}", report.to_text())?;
    Ok(())
}

fn reference_footer(out: &mut dyn Write) -> Result<()> {
    write!(out, "# reference hardware per-class error:")?;
    for (l, e) in ModulationLabel::ALL.iter().zip(HARDWARE_REFERENCE_ERROR) {
        write!(out, " {}={:.1}%", l.name(), e * 100.0)?;
    }
    writeln!(
        out,
        "\n# reference hardware accuracy: fixed-point {:.0}%, float {:.0}%",
        HARDWARE_REFERENCE_ACCURACY.0 * 100.0,
        HARDWARE_REFERENCE_ACCURACY.1 * 100.0
    )?;
    Ok(())
}

fn predictions(c: &FrameClassifier, data: &Dataset) -> Result<Vec<ModulationLabel>> {
    data.records.iter().map(|r| Ok(c.classify_frame(r.frame.as_slice())?.label)).collect()
}

pub fn eval(a: &EvalArgs, out: &mut dyn Write) -> Result<()> {
    let data = read_dataset(&a.dataset)?;
    if a.oracle {
        let truth: Vec<_> = data.records.iter().map(|r| r.label).collect();
        let report = evaluate_predictions(&data, &truth)?;
        return write_report(out, "oracle", &report, a.columns);
    }
    let model_path = a.model.as_deref().expect("clap requires --model without --oracle");
    if !a.compare {
        let c = FrameClassifier::new(read_model(model_path)?, a.path, None)?;
        let report = evaluate_predictions(&data, &predictions(&c, &data)?)?;
        write_report(out, &format!("{} path", c.path()), &report, a.columns)?;
        if !a.columns {
            reference_footer(out)?;
        }
        return Ok(());
    }

    let params = float_model(model_path)?;
    let qnet = match &a.qmodel {
        Some(p) => match read_model(p)? {
            Model::Quantized(q) => q,
            Model::Float(_) => bail!("{} holds a float model; --qmodel needs a quantized one", p.display()),
        },
        None => {
            let cal_data = match &a.calibration {
                Some(p) => read_dataset(p)?,
                None => data.clone(),
            };
            quantize_network(&params, &calibration_frames(&cal_data, None))?
        }
    };
    let float_c = FrameClassifier::new(Model::Float(params), None, None)?;
    let quant_c = FrameClassifier::from_quantized(qnet)?;
    let fp = predictions(&float_c, &data)?;
    let qp = predictions(&quant_c, &data)?;
    let fr = evaluate_predictions(&data, &fp)?;
    let qr = evaluate_predictions(&data, &qp)?;
    write_report(out, "float path", &fr, a.columns)?;
    write_report(out, "quantized path", &qr, a.columns)?;
    let cmp = compare_reports(&fr, &qr)?;
    let prefix = if a.columns { "# " } else { "" };
    writeln!(out, "{prefix}accuracy_gap (quantized - float): {:+.6}", cmp.accuracy_gap)?;
    write!(out, "{prefix}per_class_error_delta:")?;
    for (l, d) in ModulationLabel::ALL.iter().zip(cmp.per_class_error_delta) {
        write!(out, " {}={d:+.6}", l.name())?;
    }
    writeln!(out)?;
    writeln!(out, "{prefix}decision_agreement: {:.6}", agreement(&fp, &qp))?;
    if !a.columns {
        reference_footer(out)?;
    }
    Ok(())
}

pub fn bench(a: &BenchArgs, out: &mut dyn Write) -> Result<()> {
    ensure!(a.threads >= 1, "--threads must be at least 1");
    let data = match &a.dataset {
        Some(p) => read_dataset(p)?,
        None => build_dataset(&DatasetSpec {
            frames_per_class: 20,
            snr_grid: rfmc_core::channel::default_snr_grid(),
            waveform: WaveformParams::default(),
            master_seed: a.seed,
        })?,
    };
    ensure!(!data.is_empty(), "no frames to benchmark");
    let frames: Vec<&[f64]> = data.records.iter().map(|r| r.frame.as_slice()).collect();
    let model = read_model(&a.model)?;
    let (float_net, qnet) = match model {
        Model::Float(p) => {
            let q = match a.path {
                Some(InferencePath::Float) => None,
                _ => {
                    writeln!(out, "# quantizing the float model with the benchmark frames as calibration")?;
                    Some(quantize_network(&p, &frames)?)
                }
            };
            (p, q)
        }
        Model::Quantized(q) => (q.dequantize(), Some(q)),
    };
    let paths: Vec<InferencePath> = match a.path {
        Some(p) => vec![p],
        None => vec![InferencePath::Float, InferencePath::Quantized],
    };
    let mut means = Vec::new();
    for path in paths {
        let report = match path {
            InferencePath::Float => {
                let run = |x: &&[f64]| {
                    ModulationLabel::from_index(nn::predict(&float_net, x).expect("shape checked")).expect("7 outputs")
                };
                let r = bench_inference(run, &frames, a.frames, a.warmup, a.threads, path)?;
                let fps = throughput(a, run, &frames)?;
                (r, fps)
            }
            InferencePath::Quantized => {
                let q = qnet.as_ref().expect("quantized network prepared");
                ensure!(q.layer_dims().last() == Some(&NUM_CLASSES), "model does not have seven outputs");
                let qframes: Vec<_> = frames.iter().map(|f| quantize_frame(f, q.input_format())).collect();
                let run = |x: &rfmc_core::quant::QuantizedFrame| {
                    quantized_forward(q, x).expect("shape checked").label().expect("7 outputs")
                };
                let r = bench_inference(run, &qframes, a.frames, a.warmup, a.threads, path)?;
                let fps = throughput(a, run, &qframes)?;
                (r, fps)
            }
        };
        write!(out, "{}", report.0.to_text())?;
        if let Some(fps) = report.1 {
            writeln!(out, "sustained_frames_per_second: {fps:.1}")?;
        }
        writeln!(out)?;
        if let Some(p) = &a.csv {
            write_latency_csv(p, &report.0)?;
        }
        means.push((path, report.0.mean_ns));
    }
    if let [(InferencePath::Float, f), (InferencePath::Quantized, q)] = means.as_slice() {
        writeln!(out, "quantized/float mean latency ratio: {:.3}", q / f)?;
    }
    Ok(())
}

fn throughput<T: Sync>(
    a: &BenchArgs,
    run: impl Fn(&T) -> ModulationLabel + Sync,
    frames: &[T],
) -> Result<Option<f64>> {
    if a.duration <= 0.0 {
        return Ok(None);
    }
    Ok(Some(bench_throughput(run, frames, Duration::from_secs_f64(a.duration), a.threads)?))
}

fn write_latency_csv(path: &Path, r: &LatencyReport) -> Result<()> {
    let mut f = std::io::BufWriter::new(
        fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .with_context(|| format!("opening {}", path.display()))?,
    );
    if fs::metadata(path)?.len() == 0 {
        writeln!(f, "path,threads,frame,latency_ns")?;
    }
    for (i, ns) in r.samples_ns.iter().enumerate() {
        writeln!(f, "{},{},{i},{ns}", r.path, r.threads)?;
    }
    f.flush()?;
    Ok(())
}

fn write_classification(out: &mut dyn Write, index: usize, c: &crate::classifier::Classification) -> Result<()> {
    write!(out, "{index} {} {}", c.label.id(), c.label.name())?;
    if let Some(p) = &c.probs {
        for v in p {
            write!(out, " {v:.6}")?;
        }
    }
    writeln!(out)?;
    Ok(())
}

pub fn classify(a: &ClassifyArgs, out: &mut dyn Write) -> Result<()> {
    let c = FrameClassifier::new(read_model(&a.model)?, a.path, a.input_frac)?;
    if let Some(p) = &a.dataset {
        let data = read_dataset(p)?;
        for (i, r) in data.records.iter().enumerate() {
            write_classification(out, i, &c.classify_frame(r.frame.as_slice())?)?;
        }
        return Ok(());
    }
    let mut bytes = Vec::new();
    match &a.input {
        Some(p) if p.as_os_str() != "-" => {
            bytes = fs::read(p).with_context(|| format!("reading {}", p.display()))?;
        }
        _ => {
            std::io::stdin().lock().read_to_end(&mut bytes).context("reading standard input")?;
        }
    }
    let mut chunks = bytes.chunks_exact(RAW_FRAME_BYTES);
    for (i, frame) in chunks.by_ref().enumerate() {
        write_classification(out, i, &c.classify_raw(frame)?)?;
    }
    let rest = chunks.remainder().len();
    if rest > 0 {
        eprintln!(
            "warning: input truncated at byte offset {}: {rest} trailing bytes do not form a complete {RAW_FRAME_BYTES}-byte frame",
            bytes.len() - rest
        );
    }
    Ok(())
}

pub fn serve(a: &ServeArgs) -> Result<()> {
    let c = FrameClassifier::new(read_model(&a.model)?, a.path, a.input_frac)?;
    let listener = TcpListener::bind((a.host.as_str(), a.port)).with_context(|| format!("binding {}:{}", a.host, a.port))?;
    let addr = listener.local_addr()?;
    {
        let mut stdout = std::io::stdout().lock();
        writeln!(
            stdout,
            "listening on {addr} path {} input_frac {}",
            c.path(),
            c.raw_format().frac_bits()
        )?;
        stdout.flush()?;
    }
    crate::serve::serve(listener, Arc::new(c))?;
    Ok(())
}
