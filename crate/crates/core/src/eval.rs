//! Error metrics and evaluation protocols.
//!
//! All aggregates sum absolute errors in sorted order, so every number is
//! independent of the order predictions arrive in.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::codevec::HammingMode;
use crate::error::{Error, Result};
use crate::gallery::{encode_manifest, Gallery, GalleryEntry};
use crate::manifest::{random_split_indices, Manifest};
use crate::par::{map_indexed, Exec};
use crate::pifs::EncoderConfig;
use crate::pose::{Axis, PoseLabel};

/// Thresholds (degrees) of the cumulative error curves.
pub const CURVE_THRESHOLDS: [f64; 6] = [0.0, 5.0, 10.0, 15.0, 20.0, 25.0];
/// Width (degrees) of the ground-truth bins in error-by-angle reports.
pub const ANGLE_BIN_WIDTH: f64 = 5.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub truth: PoseLabel,
    pub predicted: PoseLabel,
    pub source_id: String,
    pub distance: usize,
}

impl Prediction {
    #[inline]
    pub fn abs_error(&self, axis: Axis) -> f64 {
        (self.truth.get(axis) - self.predicted.get(axis)).abs()
    }
}

fn ensure_non_empty(preds: &[Prediction]) -> Result<()> {
    if preds.is_empty() {
        return Err(Error::invalid("no predictions to evaluate"));
    }
    Ok(())
}

fn sorted_sum(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    values.into_iter().sum()
}

/// Mean absolute error along one axis.
pub fn mae(preds: &[Prediction], axis: Axis) -> Result<f64> {
    ensure_non_empty(preds)?;
    let errs = preds.iter().map(|p| p.abs_error(axis)).collect();
    Ok(sorted_sum(errs) / preds.len() as f64)
}

/// Fraction of predictions whose absolute error is at most each threshold.
pub fn cumulative_curve(preds: &[Prediction], axis: Axis, thresholds: &[f64]) -> Result<Vec<f64>> {
    ensure_non_empty(preds)?;
    let n = preds.len() as f64;
    Ok(thresholds
        .iter()
        .map(|&t| preds.iter().filter(|p| p.abs_error(axis) <= t).count() as f64 / n)
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleBin {
    pub bin_center: f64,
    pub mean_abs_error: f64,
    pub count: usize,
}

/// Mean absolute error grouped by ground-truth angle. Bin `k` is centred on
/// `k · bin_width` and covers `[(k - ½)·w, (k + ½)·w)`. Empty bins are
/// omitted.
pub fn error_by_angle(preds: &[Prediction], axis: Axis, bin_width: f64) -> Result<Vec<AngleBin>> {
    ensure_non_empty(preds)?;
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(Error::invalid(format!(
            "bin width must be positive, got {bin_width}"
        )));
    }
    let mut bins: BTreeMap<i64, Vec<f64>> = BTreeMap::new();
    for p in preds {
        let k = (p.truth.get(axis) / bin_width + 0.5).floor() as i64;
        bins.entry(k).or_default().push(p.abs_error(axis));
    }
    Ok(bins
        .into_iter()
        .map(|(k, errs)| {
            let count = errs.len();
            AngleBin {
                bin_center: k as f64 * bin_width,
                mean_abs_error: sorted_sum(errs) / count as f64,
                count,
            }
        })
        .collect())
}

/// One row of a per-axis MAE summary (column order yaw, pitch, roll).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaeRow {
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
    /// Mean of the three axis values.
    pub overall: f64,
}

impl MaeRow {
    pub fn from_axes(yaw: f64, pitch: f64, roll: f64) -> Self {
        Self {
            yaw,
            pitch,
            roll,
            overall: (yaw + pitch + roll) / 3.0,
        }
    }

    /// Column-wise mean of several rows.
    pub fn mean_of(rows: &[MaeRow]) -> Option<MaeRow> {
        if rows.is_empty() {
            return None;
        }
        let n = rows.len() as f64;
        let col = |f: fn(&MaeRow) -> f64| sorted_sum(rows.iter().map(f).collect()) / n;
        Some(MaeRow {
            yaw: col(|r| r.yaw),
            pitch: col(|r| r.pitch),
            roll: col(|r| r.roll),
            overall: col(|r| r.overall),
        })
    }

    pub fn get(&self, axis: Axis) -> f64 {
        match axis {
            Axis::Pitch => self.pitch,
            Axis::Yaw => self.yaw,
            Axis::Roll => self.roll,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerAxis<T> {
    pub pitch: T,
    pub yaw: T,
    pub roll: T,
}

impl<T> PerAxis<T> {
    fn build(mut f: impl FnMut(Axis) -> Result<T>) -> Result<Self> {
        Ok(Self {
            pitch: f(Axis::Pitch)?,
            yaw: f(Axis::Yaw)?,
            roll: f(Axis::Roll)?,
        })
    }

    pub fn get(&self, axis: Axis) -> &T {
        match axis {
            Axis::Pitch => &self.pitch,
            Axis::Yaw => &self.yaw,
            Axis::Roll => &self.roll,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub count: usize,
    pub mae: MaeRow,
    pub thresholds: Vec<f64>,
    /// Per axis, the fraction of images with error ≤ each threshold.
    pub cumulative: PerAxis<Vec<f64>>,
    pub bin_width: f64,
    pub error_by_angle: PerAxis<Vec<AngleBin>>,
}

impl EvalReport {
    pub fn from_predictions(preds: &[Prediction]) -> Result<Self> {
        let m = PerAxis::build(|a| mae(preds, a))?;
        Ok(Self {
            count: preds.len(),
            mae: MaeRow::from_axes(m.yaw, m.pitch, m.roll),
            thresholds: CURVE_THRESHOLDS.to_vec(),
            cumulative: PerAxis::build(|a| cumulative_curve(preds, a, &CURVE_THRESHOLDS))?,
            bin_width: ANGLE_BIN_WIDTH,
            error_by_angle: PerAxis::build(|a| error_by_angle(preds, a, ANGLE_BIN_WIDTH))?,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Protocol {
    /// Each subject in turn is the test set; everyone else is the model.
    LeaveOneSubjectOut,
    /// Seeded random model/test split.
    RandomSplit { fraction: f64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsetReport {
    pub subject: String,
    pub report: EvalReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolReport {
    pub protocol: Protocol,
    pub hamming: String,
    /// Per-subject results (leave-one-subject-out only).
    pub subsets: Vec<SubsetReport>,
    /// Column means over `subsets`.
    pub mean: Option<MaeRow>,
    /// All predictions pooled.
    pub overall: EvalReport,
    pub warnings: Vec<String>,
    pub predictions: Vec<Prediction>,
}

/// Runs an evaluation protocol end to end. Each manifest image is encoded
/// exactly once and reused by every fold.
pub fn run_protocol(
    manifest: &Manifest,
    cfg: &EncoderConfig,
    protocol: Protocol,
    mode: HammingMode,
    exec: Exec,
) -> Result<ProtocolReport> {
    let encoded = encode_manifest(manifest, cfg, exec)?;
    evaluate_encoded(&encoded, cfg, protocol, mode, exec)
}

/// [`run_protocol`] over already-encoded manifest rows.
pub fn evaluate_encoded(
    encoded: &[GalleryEntry],
    cfg: &EncoderConfig,
    protocol: Protocol,
    mode: HammingMode,
    exec: Exec,
) -> Result<ProtocolReport> {
    let mut warnings = Vec::new();
    let mut subsets = Vec::new();
    let mut predictions = Vec::new();
    match protocol {
        Protocol::LeaveOneSubjectOut => {
            let mut subjects: Vec<&str> = Vec::new();
            for e in encoded {
                if let Some(s) = e.subject_id.as_deref() {
                    if !subjects.contains(&s) {
                        subjects.push(s);
                    }
                }
            }
            if subjects.is_empty() {
                return Err(Error::invalid(
                    "leave-one-subject-out needs subject ids in the manifest",
                ));
            }
            for subject in subjects {
                let (test, model): (Vec<usize>, Vec<usize>) = (0..encoded.len())
                    .partition(|&i| encoded[i].subject_id.as_deref() == Some(subject));
                let preds = predict(encoded, cfg, &model, &test, mode, exec, &mut warnings)?;
                subsets.push(SubsetReport {
                    subject: subject.to_owned(),
                    report: EvalReport::from_predictions(&preds)?,
                });
                predictions.extend(preds);
            }
        }
        Protocol::RandomSplit { fraction, seed } => {
            let (model, test) = random_split_indices(encoded.len(), fraction, seed)?;
            if test.is_empty() {
                return Err(Error::invalid("random split left no test images"));
            }
            predictions = predict(encoded, cfg, &model, &test, mode, exec, &mut warnings)?;
        }
    }
    let rows: Vec<MaeRow> = subsets.iter().map(|s| s.report.mae).collect();
    Ok(ProtocolReport {
        protocol,
        hamming: match mode {
            HammingMode::Symbol => "symbol".into(),
            HammingMode::Bit => "bit".into(),
        },
        mean: MaeRow::mean_of(&rows),
        overall: EvalReport::from_predictions(&predictions)?,
        subsets,
        warnings,
        predictions,
    })
}

fn predict(
    encoded: &[GalleryEntry],
    cfg: &EncoderConfig,
    model: &[usize],
    test: &[usize],
    mode: HammingMode,
    exec: Exec,
    warnings: &mut Vec<String>,
) -> Result<Vec<Prediction>> {
    let gallery = Gallery::new(*cfg, model.iter().map(|&i| encoded[i].clone()).collect())?;
    if gallery.is_empty() {
        return Err(Error::EmptyModel);
    }
    let matches = map_indexed(exec, test.len(), |j| {
        gallery.nearest(&encoded[test[j]].vector, mode)
    });
    let mut out = Vec::with_capacity(test.len());
    for (&i, m) in test.iter().zip(matches) {
        let m = m?;
        let q = &encoded[i];
        if m.distance == max_distance(q.vector.len(), mode) {
            warnings.push(format!(
                "{}: no symbol shared with any gallery entry; prediction is arbitrary",
                q.source_id
            ));
        }
        out.push(Prediction {
            truth: q.label,
            predicted: m.label,
            source_id: q.source_id.clone(),
            distance: m.distance,
        });
    }
    Ok(out)
}

fn max_distance(len: usize, mode: HammingMode) -> usize {
    match mode {
        HammingMode::Symbol => len,
        HammingMode::Bit => 32 * len,
    }
}

impl ProtocolReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serialisable") + "\n"
    }

    /// Aligned-column summary: MAE table, cumulative curves and
    /// error-by-angle bins.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<16} {:>8} {:>8} {:>8} {:>12}",
            "Subset", "Yaw", "Pitch", "Roll", "overall MAE"
        );
        let row = |s: &mut String, name: &str, r: &MaeRow| {
            let _ = writeln!(
                s,
                "{:<16} {:>8.2} {:>8.2} {:>8.2} {:>12.2}",
                name, r.yaw, r.pitch, r.roll, r.overall
            );
        };
        for sub in &self.subsets {
            row(&mut s, &sub.subject, &sub.report.mae);
        }
        if let Some(m) = &self.mean {
            row(&mut s, "mean", m);
        }
        row(&mut s, "pooled", &self.overall.mae);
        let _ = writeln!(s, "\nimages tested: {}", self.overall.count);

        let _ = write!(
            s,
            "\nCumulative error (fraction with |error| <= t)\n{:<8}",
            "axis"
        );
        for t in &self.overall.thresholds {
            let _ = write!(s, " {:>7}", format!("{t}°"));
        }
        s.push('\n');
        for axis in [Axis::Yaw, Axis::Pitch, Axis::Roll] {
            let _ = write!(s, "{:<8}", axis.name());
            for f in self.overall.cumulative.get(axis) {
                let _ = write!(s, " {:>7.3}", f);
            }
            s.push('\n');
        }

        let _ = writeln!(
            s,
            "\nMean error by ground-truth angle (bin width {}°)",
            self.overall.bin_width
        );
        let _ = writeln!(
            s,
            "{:<8} {:>8} {:>10} {:>6}",
            "axis", "bin", "mean err", "count"
        );
        for axis in [Axis::Yaw, Axis::Pitch, Axis::Roll] {
            for b in self.overall.error_by_angle.get(axis) {
                let _ = writeln!(
                    s,
                    "{:<8} {:>8.1} {:>10.3} {:>6}",
                    axis.name(),
                    b.bin_center,
                    b.mean_abs_error,
                    b.count
                );
            }
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        s
    }

    /// `subset,yaw,pitch,roll,overall` rows, ending with `mean` (LOO) and
    /// `pooled`.
    pub fn mae_csv(&self) -> String {
        let mut s = String::from("subset,yaw,pitch,roll,overall\n");
        let mut row = |name: &str, r: &MaeRow| {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                csv_field(name),
                r.yaw,
                r.pitch,
                r.roll,
                r.overall
            );
        };
        for sub in &self.subsets {
            row(&sub.subject, &sub.report.mae);
        }
        if let Some(m) = &self.mean {
            row("mean", m);
        }
        row("pooled", &self.overall.mae);
        s
    }

    pub fn curves_csv(&self) -> String {
        let mut s = String::from("axis,threshold,fraction\n");
        for axis in Axis::ALL {
            for (t, f) in self
                .overall
                .thresholds
                .iter()
                .zip(self.overall.cumulative.get(axis))
            {
                let _ = writeln!(s, "{},{},{}", axis.name(), t, f);
            }
        }
        s
    }

    pub fn error_by_angle_csv(&self) -> String {
        let mut s = String::from("axis,bin_center,mean_abs_error,count\n");
        for axis in Axis::ALL {
            for b in self.overall.error_by_angle.get(axis) {
                let _ = writeln!(
                    s,
                    "{},{},{},{}",
                    axis.name(),
                    b.bin_center,
                    b.mean_abs_error,
                    b.count
                );
            }
        }
        s
    }

    pub fn predictions_csv(&self) -> String {
        let mut s =
            String::from("source_id,pitch,yaw,roll,pred_pitch,pred_yaw,pred_roll,distance\n");
        for p in &self.predictions {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                csv_field(&p.source_id),
                p.truth.pitch,
                p.truth.yaw,
                p.truth.roll,
                p.predicted.pitch,
                p.predicted.yaw,
                p.predicted.roll,
                p.distance
            );
        }
        s
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}
