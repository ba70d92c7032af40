use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::{evaluate_sample, EvalOptions, MetricsReport, PredictionMap, EMPTY_SET_CONVENTION};
use crate::codec::decode_occupancy;
use crate::dataset::{find_manifests, read_manifest, sample_file_name, SampleEntry, Split};
use crate::error::{Error, Result};
use crate::files::read;

/// Per-sample CSV header, in column order.
pub const CSV_COLUMNS: [&str; 11] = [
    "sample",
    "ssim",
    "accuracy",
    "dice",
    "precision",
    "recall",
    "specificity",
    "bce_loss",
    "dice_loss",
    "combined_loss",
    "prediction",
];

#[derive(Debug, Clone, Serialize)]
pub struct SampleScore {
    pub sample: String,
    pub index: usize,
    pub prediction: PathBuf,
    pub report: MetricsReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct Evaluation {
    pub manifest: PathBuf,
    pub experiment: u8,
    pub split: Split,
    pub options: EvalOptions,
    pub empty_set_convention: &'static str,
    pub aggregate: MetricsReport,
    pub samples: Vec<SampleScore>,
}

/// Candidate prediction files for a sample, in lookup order: under
/// `pred_dir/<split>/` then `pred_dir/`, the names `<k>_pred.png`,
/// `<k>.png` and `<k>_target.png`.
fn prediction_candidates(pred_dir: &Path, split: Split, index: usize) -> Vec<PathBuf> {
    let names = [
        format!("{index}_pred.png"),
        format!("{index}.png"),
        sample_file_name(index, "target"),
    ];
    [pred_dir.join(split.as_str()), pred_dir.to_path_buf()]
        .iter()
        .flat_map(|dir| names.iter().map(move |n| dir.join(n)))
        .collect()
}

fn score_one(
    root: &Path,
    pred_dir: &Path,
    grid: &crate::geometry::GridSpec,
    sample: &SampleEntry,
    options: &EvalOptions,
) -> std::result::Result<SampleScore, String> {
    let id = sample.id();
    let Some(pred_path) = prediction_candidates(pred_dir, sample.split, sample.index)
        .into_iter()
        .find(|p| p.is_file())
    else {
        return Err(format!("{id}: no prediction file in {}", pred_dir.display()));
    };
    let fail = |e: Error| format!("{id}: {e}");
    let pred = PredictionMap::from_png(&read(&pred_path).map_err(fail)?, grid).map_err(fail)?;
    let gt = decode_occupancy(&read(&root.join(&sample.target.path)).map_err(fail)?, grid).map_err(fail)?;
    let report = evaluate_sample(&pred, &gt, options).map_err(fail)?;
    Ok(SampleScore {
        sample: id,
        index: sample.index,
        prediction: pred_path,
        report,
    })
}

/// Pairs every sample of `split` with its prediction and scores it.
/// Any unmatched or malformed sample fails the whole evaluation, with each
/// offending sample named.
pub fn evaluate_pairs(pred_dir: &Path, dataset_dir: &Path, split: Split, options: &EvalOptions) -> Result<Evaluation> {
    let manifests = find_manifests(dataset_dir)?;
    let [manifest_path] = manifests.as_slice() else {
        return Err(Error::param(
            "dataset",
            format!(
                "{} holds {} experiment manifests; point at one experiment directory",
                dataset_dir.display(),
                manifests.len()
            ),
        ));
    };
    let manifest = read_manifest(manifest_path)?;
    let root = manifest_path.parent().unwrap_or(Path::new("."));
    let samples: Vec<&SampleEntry> = manifest.samples_in(split).collect();
    if samples.is_empty() {
        return Err(Error::Pairing(vec![format!("split {split} has no samples")]));
    }

    let results: Vec<_> = samples
        .par_iter()
        .map(|s| score_one(root, pred_dir, &manifest.sim.grid, s, options))
        .collect();
    let mut scores = Vec::with_capacity(results.len());
    let mut problems = Vec::new();
    for r in results {
        match r {
            Ok(s) => scores.push(s),
            Err(p) => problems.push(p),
        }
    }
    if !problems.is_empty() {
        return Err(Error::Pairing(problems));
    }
    let rows: Vec<MetricsReport> = scores.iter().map(|s| s.report).collect();
    Ok(Evaluation {
        manifest: manifest_path.clone(),
        experiment: manifest.experiment,
        split,
        options: *options,
        empty_set_convention: EMPTY_SET_CONVENTION,
        aggregate: MetricsReport::mean(&rows).expect("nonempty"),
        samples: scores,
    })
}

impl Evaluation {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Aligned text table: header, then the mean row.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let a = &self.aggregate;
        let _ = writeln!(
            out,
            "exp{} {} split, {} samples, threshold {:.2}",
            self.experiment,
            self.split,
            self.samples.len(),
            self.options.threshold
        );
        let _ = writeln!(
            out,
            "{:<8}{:>8}{:>8}{:>8}{:>8}{:>8}{:>8}",
            "", "SSIM", "Acc.", "Dice", "Prec.", "Recall", "Spec."
        );
        let _ = write!(out, "{:<8}", "mean");
        for v in a.headline() {
            let _ = write!(out, "{v:>8.4}");
        }
        out.push('\n');
        let _ = writeln!(
            out,
            "losses  bce {:.6}  dice {:.6}  combined {:.6}",
            a.bce_loss, a.dice_loss, a.combined_loss
        );
        if let Some(s) = a.ssim_binarized {
            let _ = writeln!(out, "ssim (binarized prediction) {s:.4}");
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(CSV_COLUMNS)?;
        for s in &self.samples {
            let r = &s.report;
            let mut row = vec![s.sample.clone()];
            row.extend(
                [
                    r.ssim,
                    r.accuracy,
                    r.dice,
                    r.precision,
                    r.recall,
                    r.specificity,
                    r.bce_loss,
                    r.dice_loss,
                    r.combined_loss,
                ]
                .iter()
                .map(|v| format!("{v:.8}")),
            );
            row.push(s.prediction.display().to_string());
            w.write_record(&row)?;
        }
        w.flush()
            .map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
        Ok(())
    }
}
