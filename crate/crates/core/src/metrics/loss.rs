//! Reference (non-differentiable) segmentation losses over soft
//! predictions and binary targets.

use crate::error::{Error, Result};

/// Probabilities are clamped to `[BCE_CLAMP, 1 - BCE_CLAMP]` before logs.
pub const BCE_CLAMP: f64 = 1e-7;
/// Smoothing term in the Dice denominator.
pub const DICE_EPSILON: f64 = 1e-6;

fn check(pred: &[f64], gt: &[bool]) -> Result<()> {
    if pred.len() != gt.len() {
        return Err(Error::GridMismatch(format!(
            "{} predictions vs {} targets",
            pred.len(),
            gt.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::param("pred", "empty image"));
    }
    Ok(())
}

/// Mean binary cross-entropy.
pub fn bce_loss(pred: &[f64], gt: &[bool]) -> Result<f64> {
    check(pred, gt)?;
    let sum: f64 = pred
        .iter()
        .zip(gt)
        .map(|(&p, &g)| {
            let p = p.clamp(BCE_CLAMP, 1.0 - BCE_CLAMP);
            if g {
                p.ln()
            } else {
                (1.0 - p).ln()
            }
        })
        .sum();
    Ok(-sum / pred.len() as f64)
}

/// `1 - 2Σpg / (Σp² + Σg² + ε)`.
pub fn dice_loss(pred: &[f64], gt: &[bool], epsilon: f64) -> Result<f64> {
    check(pred, gt)?;
    let (mut overlap, mut pred_sq, mut gt_sq) = (0.0, 0.0, 0.0);
    for (&p, &g) in pred.iter().zip(gt) {
        let g = if g { 1.0 } else { 0.0 };
        overlap += p * g;
        pred_sq += p * p;
        gt_sq += g * g;
    }
    Ok(1.0 - 2.0 * overlap / (pred_sq + gt_sq + epsilon))
}

pub fn combined_loss(pred: &[f64], gt: &[bool]) -> Result<f64> {
    Ok(bce_loss(pred, gt)? + dice_loss(pred, gt, DICE_EPSILON)?)
}
