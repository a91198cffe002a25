//! Confusion matrices, per-class error and accuracy by SNR.

use std::fmt::Write as _;

use crate::data::Dataset;
use crate::error::{invalid, Error, Result};
use crate::frame::IqFrame;
use crate::label::{ModulationLabel, NUM_CLASSES};

/// Per-class misclassification rates measured on the FPGA classifier over
/// captured hardware data, in label order. Shown next to results for
/// context; the synthetic pipeline is not expected to reproduce them.
pub const HARDWARE_REFERENCE_ERROR: [f64; NUM_CLASSES] = [0.032, 0.082, 0.086, 0.139, 0.139, 0.001, 0.03];

/// Average accuracy reported for the 16-bit FPGA classifier and for the
/// floating-point GPU implementation.
pub const HARDWARE_REFERENCE_ACCURACY: (f64, f64) = (0.94, 0.95);

/// Counts indexed `[truth][predicted]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionMatrix {
    counts: [[u64; NUM_CLASSES]; NUM_CLASSES],
}

impl ConfusionMatrix {
    pub fn from_counts(counts: [[u64; NUM_CLASSES]; NUM_CLASSES]) -> Self {
        Self { counts }
    }

    pub fn record(&mut self, truth: ModulationLabel, predicted: ModulationLabel) {
        self.counts[truth.index()][predicted.index()] += 1;
    }

    pub fn counts(&self) -> &[[u64; NUM_CLASSES]; NUM_CLASSES] {
        &self.counts
    }

    pub fn get(&self, truth: ModulationLabel, predicted: ModulationLabel) -> u64 {
        self.counts[truth.index()][predicted.index()]
    }

    pub fn row_sum(&self, truth: ModulationLabel) -> u64 {
        self.counts[truth.index()].iter().sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..NUM_CLASSES).map(|i| self.counts[i][i]).sum()
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for (a, b) in self.counts.iter_mut().flatten().zip(other.counts.iter().flatten()) {
            *a += b;
        }
    }
}

/// Accuracy over the modulated records at one SNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrAccuracy {
    pub snr_db: f64,
    pub n: u64,
    pub correct: u64,
}

impl SnrAccuracy {
    pub fn accuracy(&self) -> f64 {
        self.correct as f64 / self.n as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub confusion: ConfusionMatrix,
    pub overall_accuracy: f64,
    /// `1 - counts[c][c] / rowsum[c]`; NaN for classes absent from the data.
    pub per_class_error: [f64; NUM_CLASSES],
    /// Ascending SNR. Noise-class records are excluded.
    pub accuracy_by_snr: Vec<SnrAccuracy>,
}

impl EvalReport {
    pub fn from_parts(confusion: ConfusionMatrix, mut accuracy_by_snr: Vec<SnrAccuracy>) -> Self {
        accuracy_by_snr.sort_by(|a, b| a.snr_db.total_cmp(&b.snr_db));
        let per_class_error = std::array::from_fn(|c| {
            let row: u64 = confusion.counts[c].iter().sum();
            if row == 0 {
                f64::NAN
            } else {
                1.0 - confusion.counts[c][c] as f64 / row as f64
            }
        });
        let total = confusion.total();
        let overall_accuracy = if total == 0 { 0.0 } else { confusion.trace() as f64 / total as f64 };
        Self { confusion, overall_accuracy, per_class_error, accuracy_by_snr }
    }

    /// `snr_db,n,accuracy` rows, header included.
    pub fn snr_csv(&self) -> String {
        let mut out = String::from("snr_db,n,accuracy\n");
        for b in &self.accuracy_by_snr {
            let _ = writeln!(out, "{},{},{:.6}", b.snr_db, b.n, b.accuracy());
        }
        out
    }

    /// Human-readable report; [`EvalReport::parse_text`] reads it back,
    /// skipping blank lines and lines starting with `#`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "rfmc-eval-report v1");
        let _ = writeln!(out, "records: {}", self.confusion.total());
        let _ = writeln!(out, "correct: {}", self.confusion.trace());
        let _ = writeln!(out, "overall_accuracy: {:.6}", self.overall_accuracy);
        let _ = writeln!(out, "per_class_error:");
        for l in ModulationLabel::ALL {
            let _ = writeln!(out, "  {:<6} {:.6}", l.name(), self.per_class_error[l.index()]);
        }
        let _ = writeln!(out, "confusion (rows truth, columns predicted):");
        let _ = write!(out, "{:<6}", "");
        for l in ModulationLabel::ALL {
            let _ = write!(out, " {:>7}", l.name());
        }
        out.push('\n');
        for l in ModulationLabel::ALL {
            let _ = write!(out, "{:<6}", l.name());
            for c in &self.confusion.counts[l.index()] {
                let _ = write!(out, " {c:>7}");
            }
            out.push('\n');
        }
        let _ = writeln!(out, "accuracy_by_snr:");
        out.push_str(&self.snr_csv());
        let _ = writeln!(out, "end");
        out
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let bad = |msg: &str| Error::Format(format!("eval report: {msg}"));
        let mut lines = text.lines().map(str::trim_end).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let mut next = |what: &str| lines.next().ok_or_else(|| bad(&format!("missing {what}")));
        let field = |line: &str, key: &str| -> Result<String> {
            line.strip_prefix(key)
                .and_then(|r| r.strip_prefix(':'))
                .map(|v| v.trim().to_string())
                .ok_or_else(|| bad(&format!("expected {key:?}, found {line:?}")))
        };
        if next("header")? != "rfmc-eval-report v1" {
            return Err(bad("unknown header"));
        }
        let records: u64 = field(next("records")?, "records")?.parse().map_err(|_| bad("records"))?;
        let correct: u64 = field(next("correct")?, "correct")?.parse().map_err(|_| bad("correct"))?;
        let overall: f64 = field(next("overall_accuracy")?, "overall_accuracy")?
            .parse()
            .map_err(|_| bad("overall_accuracy"))?;
        if next("per_class_error")? != "per_class_error:" {
            return Err(bad("per_class_error block"));
        }
        for _ in 0..NUM_CLASSES {
            next("per-class row")?;
        }
        if !next("confusion")?.starts_with("confusion") {
            return Err(bad("confusion block"));
        }
        next("confusion header")?;
        let mut counts = [[0u64; NUM_CLASSES]; NUM_CLASSES];
        for (i, row) in counts.iter_mut().enumerate() {
            let line = next("confusion row")?;
            let mut parts = line.split_whitespace();
            if parts.next() != Some(ModulationLabel::ALL[i].name()) {
                return Err(bad(&format!("confusion row {i} label")));
            }
            for c in row.iter_mut() {
                *c = parts
                    .next()
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| bad(&format!("confusion row {i}")))?;
            }
        }
        if next("accuracy_by_snr")? != "accuracy_by_snr:" || next("csv header")? != "snr_db,n,accuracy" {
            return Err(bad("accuracy_by_snr block"));
        }
        let mut buckets = Vec::new();
        loop {
            let line = next("end")?;
            if line == "end" {
                break;
            }
            let cols: Vec<&str> = line.split(',').collect();
            let [snr, n, acc] = cols.as_slice() else {
                return Err(bad(&format!("snr row {line:?}")));
            };
            let snr_db: f64 = snr.parse().map_err(|_| bad("snr_db"))?;
            let n: u64 = n.parse().map_err(|_| bad("n"))?;
            let acc: f64 = acc.parse().map_err(|_| bad("accuracy"))?;
            buckets.push(SnrAccuracy { snr_db, n, correct: (acc * n as f64).round() as u64 });
        }
        let report = Self::from_parts(ConfusionMatrix::from_counts(counts), buckets);
        if report.confusion.total() != records || report.confusion.trace() != correct {
            return Err(bad("totals disagree with confusion matrix"));
        }
        if (report.overall_accuracy - overall).abs() > 1e-6 {
            return Err(bad("overall_accuracy disagrees with confusion matrix"));
        }
        Ok(report)
    }
}

/// Builds a report from one prediction per record, in record order.
pub fn evaluate_predictions(dataset: &Dataset, predictions: &[ModulationLabel]) -> Result<EvalReport> {
    if dataset.is_empty() {
        return Err(invalid("cannot evaluate on an empty dataset"));
    }
    if predictions.len() != dataset.len() {
        return Err(invalid(format!(
            "{} predictions for {} records",
            predictions.len(),
            dataset.len()
        )));
    }
    let mut confusion = ConfusionMatrix::default();
    let mut buckets: Vec<SnrAccuracy> = Vec::new();
    for (record, &pred) in dataset.records.iter().zip(predictions) {
        confusion.record(record.label, pred);
        let Some(snr_db) = record.snr_db else { continue };
        if record.label == ModulationLabel::Noise {
            continue;
        }
        let hit = (pred == record.label) as u64;
        match buckets.iter_mut().find(|b| b.snr_db.total_cmp(&snr_db).is_eq()) {
            Some(b) => {
                b.n += 1;
                b.correct += hit;
            }
            None => buckets.push(SnrAccuracy { snr_db, n: 1, correct: hit }),
        }
    }
    Ok(EvalReport::from_parts(confusion, buckets))
}

/// Runs `classifier` on every record and tallies the results.
pub fn evaluate<F>(classifier: F, dataset: &Dataset) -> Result<EvalReport>
where
    F: Fn(&IqFrame) -> ModulationLabel,
{
    let predictions: Vec<_> = dataset.records.iter().map(|r| classifier(&r.frame)).collect();
    evaluate_predictions(dataset, &predictions)
}

/// Like [`evaluate`] for classifiers that can fail.
pub fn try_evaluate<F>(classifier: F, dataset: &Dataset) -> Result<EvalReport>
where
    F: Fn(&IqFrame) -> Result<ModulationLabel>,
{
    let predictions = dataset
        .records
        .iter()
        .map(|r| classifier(&r.frame))
        .collect::<Result<Vec<_>>>()?;
    evaluate_predictions(dataset, &predictions)
}

/// Differences `b - a` between two reports over the same data.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportComparison {
    pub accuracy_gap: f64,
    pub per_class_error_delta: [f64; NUM_CLASSES],
}

pub fn compare_reports(a: &EvalReport, b: &EvalReport) -> Result<ReportComparison> {
    for l in ModulationLabel::ALL {
        if a.confusion.row_sum(l) != b.confusion.row_sum(l) {
            return Err(invalid(format!(
                "reports cover different data: {} has {} vs {} records",
                l,
                a.confusion.row_sum(l),
                b.confusion.row_sum(l)
            )));
        }
    }
    Ok(ReportComparison {
        accuracy_gap: b.overall_accuracy - a.overall_accuracy,
        per_class_error_delta: std::array::from_fn(|c| b.per_class_error[c] - a.per_class_error[c]),
    })
}

/// Fraction of records on which two prediction sequences agree.
pub fn agreement(a: &[ModulationLabel], b: &[ModulationLabel]) -> f64 {
    assert_eq!(a.len(), b.len(), "prediction sequences differ in length");
    a.iter().zip(b).filter(|(x, y)| x == y).count() as f64 / a.len() as f64
}
