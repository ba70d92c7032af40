//! Ideal limited-FOV range sensor.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{beam_angles, ray_circle_intersect, Pose, Vec2};
use crate::world::WorldState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LidarConfig {
    /// Total angular width of the sweep, radians.
    pub fov: f64,
    pub ray_count: usize,
    /// Meters.
    pub max_range: f64,
}

impl Default for LidarConfig {
    fn default() -> Self {
        Self {
            fov: FRAC_PI_2,
            ray_count: 100,
            max_range: 30.0,
        }
    }
}

impl LidarConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.max_range > 0.0 && self.max_range.is_finite()) {
            return Err(Error::param(
                "max_range",
                format!("must be positive, got {}", self.max_range),
            ));
        }
        beam_angles(self.fov, self.ray_count).map(|_| ())
    }

    /// Beam angles in the sensor frame, ordered from the right edge of the
    /// field of view to the left.
    pub fn beam_angles(&self) -> Result<Vec<f64>> {
        beam_angles(self.fov, self.ray_count)
    }
}

/// One sweep. Misses carry `max_range` with `hits[i] == false`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanFrame {
    pub step: usize,
    pub pose: Pose,
    pub ranges: Vec<f64>,
    pub hits: Vec<bool>,
}

impl ScanFrame {
    pub fn hit_count(&self) -> usize {
        self.hits.iter().filter(|&&h| h).count()
    }
}

/// Casts every beam against every obstacle and keeps the nearest return.
/// The robot has no body, so it never senses itself.
pub fn scan(world: &WorldState, pose: &Pose, config: &LidarConfig) -> Result<ScanFrame> {
    config.validate()?;
    let angles = config.beam_angles()?;
    Ok(scan_with_angles(world, pose, &angles, config.max_range))
}

pub(crate) fn scan_with_angles(world: &WorldState, pose: &Pose, angles: &[f64], max_range: f64) -> ScanFrame {
    let mut ranges = Vec::with_capacity(angles.len());
    let mut hits = Vec::with_capacity(angles.len());
    for &angle in angles {
        let dir = Vec2::from_angle(pose.heading + angle);
        let nearest = world
            .circles()
            .filter_map(|c| ray_circle_intersect(pose.position, dir, c))
            .fold(f64::INFINITY, f64::min);
        let hit = nearest < max_range;
        ranges.push(if hit { nearest } else { max_range });
        hits.push(hit);
    }
    ScanFrame {
        step: world.step,
        pose: *pose,
        ranges,
        hits,
    }
}
