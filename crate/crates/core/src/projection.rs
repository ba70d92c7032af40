//! Cumulative time-decay projection of a window of scans into one image,
//! and rasterization of the ground-truth obstacle map.
//!
//! Each hit endpoint is projected into the global frame and written into
//! the cell that contains it. A cell keeps the largest recency value it has
//! seen, so newer readings override older ones regardless of the order in
//! which frames are folded in.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{scan_point_to_global, world_to_pixel, GridSpec};
use crate::lidar::{LidarConfig, ScanFrame};
use crate::world::WorldState;

/// Recency image: 0 for never scanned, 1 for scanned at the final step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionImage {
    pub grid: GridSpec,
    /// Row-major, row 0 at the top (+y).
    pub values: Vec<f64>,
}

impl ProjectionImage {
    pub fn blank(grid: GridSpec) -> Self {
        Self {
            values: vec![0.0; grid.pixel_count()],
            grid,
        }
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[self.grid.index(row, col)]
    }

    pub fn nonzero_count(&self) -> usize {
        self.values.iter().filter(|&&v| v > 0.0).count()
    }

    /// Pointwise max with another image over the same grid.
    pub fn merge_max(&mut self, other: &ProjectionImage) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid, other.grid)));
        }
        for (a, &b) in self.values.iter_mut().zip(&other.values) {
            *a = a.max(b);
        }
        Ok(())
    }
}

/// Binary occupancy map; `true` is occupied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupancyMap {
    pub grid: GridSpec,
    pub cells: Vec<bool>,
}

/// Occupancy of the final obstacle state of a run.
pub type GroundTruthMap = OccupancyMap;

impl OccupancyMap {
    pub fn empty(grid: GridSpec) -> Self {
        Self {
            cells: vec![false; grid.pixel_count()],
            grid,
        }
    }

    pub fn occupied_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn as_reals(&self) -> Vec<f64> {
        self.cells.iter().map(|&c| if c { 1.0 } else { 0.0 }).collect()
    }
}

/// Intensity written for a reading taken at `step` of a `window`-step run.
/// With decay the value grows linearly to 1 at the last step; without it
/// every reading is 1.
pub fn recency_value(step: usize, window: usize, decay: bool) -> Result<f64> {
    if step >= window {
        return Err(Error::param("step", format!("{step} outside window of {window}")));
    }
    Ok(if decay { (step + 1) as f64 / window as f64 } else { 1.0 })
}

/// Folds one frame into `image`. Misses and endpoints outside the map are
/// ignored.
pub fn accumulate_scan(
    image: &mut ProjectionImage,
    frame: &ScanFrame,
    angles: &[f64],
    window: usize,
    decay: bool,
) -> Result<()> {
    if frame.ranges.len() != angles.len() || frame.hits.len() != angles.len() {
        return Err(Error::param(
            "frame",
            format!(
                "{} ranges / {} hit flags for {} beams",
                frame.ranges.len(),
                frame.hits.len(),
                angles.len()
            ),
        ));
    }
    let value = recency_value(frame.step, window, decay)?;
    for ((&angle, &range), _) in angles
        .iter()
        .zip(&frame.ranges)
        .zip(&frame.hits)
        .filter(|(_, &hit)| hit)
    {
        let endpoint = scan_point_to_global(&frame.pose, angle, range);
        if let Some((row, col)) = world_to_pixel(endpoint, &image.grid) {
            let cell = &mut image.values[image.grid.index(row, col)];
            *cell = cell.max(value);
        }
    }
    Ok(())
}

/// Projects a full window of frames, ordered `0..T`, into one image.
pub fn render_input(
    frames: &[ScanFrame],
    lidar: &LidarConfig,
    grid: &GridSpec,
    decay: bool,
) -> Result<ProjectionImage> {
    grid.validate()?;
    for (position, frame) in frames.iter().enumerate() {
        if frame.step != position {
            return Err(Error::FrameOrder {
                position,
                expected: position,
                found: frame.step,
            });
        }
    }
    let angles = lidar.beam_angles()?;
    let mut image = ProjectionImage::blank(*grid);
    for frame in frames {
        accumulate_scan(&mut image, frame, &angles, frames.len(), decay)?;
    }
    Ok(image)
}

/// Marks every cell whose center lies inside (or on) an obstacle circle.
pub fn render_ground_truth(world: &WorldState, grid: &GridSpec) -> GroundTruthMap {
    let mut map = OccupancyMap::empty(*grid);
    let half = grid.extent / 2.0;
    let cell = grid.cell_size();
    let last = grid.width_px as i64 - 1;
    // Candidate cells: those whose centers fall in [lo, hi], padded by one.
    let span = |lo: f64, hi: f64| -> Option<(usize, usize)> {
        let a = ((lo / cell - 0.5).floor() as i64).max(0);
        let b = ((hi / cell - 0.5).ceil() as i64).min(last);
        (a <= b).then_some((a as usize, b as usize))
    };
    for c in world.circles() {
        let (cx, cy, r) = (c.center.x, c.center.y, c.radius);
        let (Some(cols), Some(rows)) = (span(cx - r + half, cx + r + half), span(half - cy - r, half - cy + r)) else {
            continue;
        };
        for row in rows.0..=rows.1 {
            for col in cols.0..=cols.1 {
                if c.contains(grid.cell_center(row, col)) {
                    map.cells[grid.index(row, col)] = true;
                }
            }
        }
    }
    map
}
