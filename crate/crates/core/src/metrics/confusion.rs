use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::projection::OccupancyMap;

/// Pixel tallies with occupied as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMetrics {
    pub accuracy: f64,
    pub dice: f64,
    pub precision: f64,
    pub recall: f64,
    pub specificity: f64,
}

/// Convention for empty denominators, echoed in reports.
pub const EMPTY_SET_CONVENTION: &str =
    "ratio with empty denominator is 1 when the complementary set is also empty, else 0";

pub fn confusion(pred: &OccupancyMap, gt: &OccupancyMap) -> Result<ConfusionCounts> {
    if pred.grid != gt.grid || pred.cells.len() != gt.cells.len() {
        return Err(Error::GridMismatch(format!(
            "prediction {}x{} vs target {}x{}",
            pred.grid.width_px, pred.grid.height_px, gt.grid.width_px, gt.grid.height_px
        )));
    }
    let mut c = ConfusionCounts::default();
    for (&p, &g) in pred.cells.iter().zip(&gt.cells) {
        match (p, g) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

/// `num / den`, or 1 / 0 by the empty-set convention when `den == 0`:
/// 1 if `other` (the count that would make the ratio meaningful) is also 0.
fn ratio(num: u64, den: u64, other: u64) -> f64 {
    if den == 0 {
        if other == 0 {
            1.0
        } else {
            0.0
        }
    } else {
        num as f64 / den as f64
    }
}

pub fn metrics_from_counts(c: &ConfusionCounts) -> ConfusionMetrics {
    let ConfusionCounts { tp, fp, fn_, tn } = *c;
    ConfusionMetrics {
        accuracy: ratio(tp + tn, c.total(), 0),
        // no predicted positives: perfect only if there were none to find
        precision: ratio(tp, tp + fp, fn_),
        // no actual positives: perfect only if none were claimed
        recall: ratio(tp, tp + fn_, fp),
        specificity: ratio(tn, tn + fp, fn_),
        dice: ratio(2 * tp, 2 * tp + fp + fn_, 0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GridSpec;

    fn map(cells: &[u8]) -> OccupancyMap {
        OccupancyMap {
            grid: GridSpec::square(2, 1.0).unwrap(),
            cells: cells.iter().map(|&c| c == 1).collect(),
        }
    }

    #[test]
    fn perfect_prediction() {
        let gt = map(&[1, 0, 0, 1]);
        let m = metrics_from_counts(&confusion(&gt, &gt).unwrap());
        assert_eq!(
            m,
            ConfusionMetrics {
                accuracy: 1.0,
                dice: 1.0,
                precision: 1.0,
                recall: 1.0,
                specificity: 1.0
            }
        );
    }

    #[test]
    fn hand_counted_four_pixels() {
        let c = confusion(&map(&[1, 1, 0, 0]), &map(&[1, 0, 1, 0])).unwrap();
        assert_eq!(
            c,
            ConfusionCounts {
                tp: 1,
                fp: 1,
                fn_: 1,
                tn: 1
            }
        );
        let m = metrics_from_counts(&c);
        for v in [m.accuracy, m.dice, m.precision, m.recall, m.specificity] {
            assert_eq!(v, 0.5);
        }
    }

    #[test]
    fn empty_sets() {
        let m = metrics_from_counts(&confusion(&map(&[0; 4]), &map(&[0; 4])).unwrap());
        assert_eq!([m.accuracy, m.dice, m.precision, m.recall, m.specificity], [1.0; 5]);

        // predicted nothing, missed everything
        let m = metrics_from_counts(&confusion(&map(&[0; 4]), &map(&[1; 4])).unwrap());
        assert_eq!(m.precision, 0.0);
        assert_eq!(m.recall, 0.0);
        assert_eq!(m.specificity, 0.0);
        assert_eq!(m.dice, 0.0);

        let m = metrics_from_counts(&confusion(&map(&[1; 4]), &map(&[1; 4])).unwrap());
        assert_eq!(m.specificity, 1.0);
    }

    #[test]
    fn grid_mismatch() {
        let other = OccupancyMap::empty(GridSpec::square(3, 1.0).unwrap());
        assert!(matches!(confusion(&map(&[0; 4]), &other), Err(Error::GridMismatch(_))));
    }
}
