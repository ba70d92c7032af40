//! Scoring of predicted maps against ground truth.
//!
//! Predictions are soft occupancy probabilities. Confusion-based scores use
//! a thresholded copy; SSIM and the losses use the soft values.

mod confusion;
mod eval;
mod loss;
mod ssim;

use serde::{Deserialize, Serialize};

use crate::codec::{byte_to_recency, GrayImage};
use crate::error::{Error, Result};
use crate::geometry::GridSpec;
use crate::projection::{GroundTruthMap, OccupancyMap};

pub use confusion::{confusion, metrics_from_counts, ConfusionCounts, ConfusionMetrics, EMPTY_SET_CONVENTION};
pub use eval::{evaluate_pairs, Evaluation, SampleScore, CSV_COLUMNS};
pub use loss::{bce_loss, combined_loss, dice_loss, BCE_CLAMP, DICE_EPSILON};
pub use ssim::{gaussian_kernel, ssim, SsimParams};

/// Soft prediction, `probs[i]` = probability that cell `i` is occupied.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionMap {
    pub grid: GridSpec,
    pub probs: Vec<f64>,
}

impl PredictionMap {
    pub fn new(grid: GridSpec, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != grid.pixel_count() {
            return Err(Error::GridMismatch(format!(
                "{} probabilities for a {}x{} grid",
                probs.len(),
                grid.width_px,
                grid.height_px
            )));
        }
        if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::param("probs", format!("value {p} outside [0, 1]")));
        }
        Ok(Self { grid, probs })
    }

    /// Dark pixels are occupied: `p = (255 - byte) / 255`.
    pub fn from_gray(image: &GrayImage, grid: &GridSpec) -> Result<Self> {
        if image.width != grid.width_px || image.height != grid.height_px {
            return Err(Error::ImageFormat {
                property: "dimensions",
                detail: format!(
                    "expected {}x{}, found {}x{}",
                    grid.width_px, grid.height_px, image.width, image.height
                ),
            });
        }
        Ok(Self {
            grid: *grid,
            probs: image.pixels.iter().map(|&b| byte_to_recency(b)).collect(),
        })
    }

    pub fn from_png(bytes: &[u8], grid: &GridSpec) -> Result<Self> {
        Self::from_gray(&GrayImage::decode_png(bytes)?, grid)
    }

    pub fn from_occupancy(map: &OccupancyMap) -> Self {
        Self {
            grid: map.grid,
            probs: map.as_reals(),
        }
    }
}

/// Occupied iff `p >= threshold`.
pub fn binarize(pred: &PredictionMap, threshold: f64) -> OccupancyMap {
    OccupancyMap {
        grid: pred.grid,
        cells: pred.probs.iter().map(|&p| p >= threshold).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub threshold: f64,
    pub ssim: SsimParams,
    /// Also report SSIM on the thresholded prediction.
    pub binarized_ssim: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            threshold: 0.5,
            ssim: SsimParams::default(),
            binarized_ssim: false,
        }
    }
}

/// One row of scores. Field order matches the reported column order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub ssim: f64,
    pub accuracy: f64,
    pub dice: f64,
    pub precision: f64,
    pub recall: f64,
    pub specificity: f64,
    pub bce_loss: f64,
    pub dice_loss: f64,
    pub combined_loss: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ssim_binarized: Option<f64>,
    pub pixels: usize,
}

impl MetricsReport {
    /// The six headline columns: SSIM, Acc., Dice, Prec., Recall, Spec.
    pub fn headline(&self) -> [f64; 6] {
        [
            self.ssim,
            self.accuracy,
            self.dice,
            self.precision,
            self.recall,
            self.specificity,
        ]
    }

    /// Column-wise arithmetic mean.
    pub fn mean(rows: &[MetricsReport]) -> Option<MetricsReport> {
        let n = rows.len();
        if n == 0 {
            return None;
        }
        let avg = |f: fn(&MetricsReport) -> f64| rows.iter().map(f).sum::<f64>() / n as f64;
        let bce = avg(|r| r.bce_loss);
        let dice = avg(|r| r.dice_loss);
        Some(MetricsReport {
            ssim: avg(|r| r.ssim),
            accuracy: avg(|r| r.accuracy),
            dice: avg(|r| r.dice),
            precision: avg(|r| r.precision),
            recall: avg(|r| r.recall),
            specificity: avg(|r| r.specificity),
            bce_loss: bce,
            dice_loss: dice,
            combined_loss: bce + dice,
            ssim_binarized: rows
                .iter()
                .map(|r| r.ssim_binarized)
                .sum::<Option<f64>>()
                .map(|s| s / n as f64),
            pixels: rows[0].pixels,
        })
    }
}

/// Scores one prediction against its ground truth.
pub fn evaluate_sample(pred: &PredictionMap, gt: &GroundTruthMap, options: &EvalOptions) -> Result<MetricsReport> {
    if pred.grid != gt.grid {
        return Err(Error::GridMismatch(format!("{:?} vs {:?}", pred.grid, gt.grid)));
    }
    let binary = binarize(pred, options.threshold);
    let counts = metrics_from_counts(&confusion(&binary, gt)?);
    let truth = gt.as_reals();
    let (w, h) = (gt.grid.width_px, gt.grid.height_px);
    let bce = bce_loss(&pred.probs, &gt.cells)?;
    let dice = dice_loss(&pred.probs, &gt.cells, DICE_EPSILON)?;
    let ssim_binarized = if options.binarized_ssim {
        Some(ssim(&binary.as_reals(), &truth, w, h, &options.ssim)?)
    } else {
        None
    };
    Ok(MetricsReport {
        ssim: ssim(&pred.probs, &truth, w, h, &options.ssim)?,
        accuracy: counts.accuracy,
        dice: counts.dice,
        precision: counts.precision,
        recall: counts.recall,
        specificity: counts.specificity,
        bce_loss: bce,
        dice_loss: dice,
        combined_loss: bce + dice,
        ssim_binarized,
        pixels: gt.grid.pixel_count(),
    })
}
