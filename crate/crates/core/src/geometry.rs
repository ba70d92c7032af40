//! Planar primitives: vectors, poses, circles, beam layout and the
//! world-to-pixel mapping shared by the simulator and the rasterizer.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Unit vector pointing along `angle` (radians, counter-clockwise from +x).
    pub fn from_angle(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self { x: c, y: s }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    /// Rotates counter-clockwise about the origin.
    pub fn rotated(self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self {
            x: c * self.x - s * self.y,
            y: s * self.x + c * self.y,
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Wraps an angle into `[-π, π)`.
pub fn normalize_angle(angle: f64) -> f64 {
    let wrapped = (angle + PI).rem_euclid(TAU) - PI;
    // rem_euclid can round up to exactly TAU for inputs just below a multiple of it.
    if wrapped >= PI {
        wrapped - TAU
    } else {
        wrapped
    }
}

/// Robot position and heading in the world frame. The heading is always
/// stored wrapped into `[-π, π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: Vec2,
    pub heading: f64,
}

impl Pose {
    pub fn new(position: Vec2, heading: f64) -> Self {
        Self {
            position,
            heading: normalize_angle(heading),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Vec2,
    pub radius: f64,
}

impl Circle {
    pub fn new(center: Vec2, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::param("radius", format!("must be positive, got {radius}")));
        }
        Ok(Self { center, radius })
    }

    pub fn contains(&self, p: Vec2) -> bool {
        (p - self.center).norm_squared() <= self.radius * self.radius
    }
}

/// Square pixel grid covering the world square `[-extent/2, extent/2]²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub width_px: usize,
    pub height_px: usize,
    /// Side length of the covered world square, meters.
    pub extent: f64,
}

impl GridSpec {
    pub fn square(size_px: usize, extent: f64) -> Result<Self> {
        let grid = Self {
            width_px: size_px,
            height_px: size_px,
            extent,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width_px != self.height_px {
            return Err(Error::param(
                "grid",
                format!("must be square, got {}x{}", self.width_px, self.height_px),
            ));
        }
        if self.width_px == 0 {
            return Err(Error::param("grid", "size must be nonzero"));
        }
        if !(self.extent > 0.0 && self.extent.is_finite()) {
            return Err(Error::param("extent", format!("must be positive, got {}", self.extent)));
        }
        Ok(())
    }

    pub fn pixel_count(&self) -> usize {
        self.width_px * self.height_px
    }

    /// Edge length of one cell in meters.
    pub fn cell_size(&self) -> f64 {
        self.extent / self.width_px as f64
    }

    /// World coordinate of the center of cell `(row, col)`.
    pub fn cell_center(&self, row: usize, col: usize) -> Vec2 {
        let half = self.extent / 2.0;
        let cx = (col as f64 + 0.5) / self.width_px as f64 * self.extent - half;
        let cy = half - (row as f64 + 0.5) / self.height_px as f64 * self.extent;
        Vec2::new(cx, cy)
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.width_px + col
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            width_px: 256,
            height_px: 256,
            extent: 50.0,
        }
    }
}

/// Distance along a ray to the first point of a circle at or beyond the
/// origin. An origin inside the circle yields the exit distance.
///
/// `direction` must be unit length.
pub fn ray_circle_intersect(origin: Vec2, direction: Vec2, circle: &Circle) -> Option<f64> {
    debug_assert!(
        (direction.norm() - 1.0).abs() <= 1e-9,
        "ray direction must be unit length"
    );
    // |o + t·d - c|² = r²  →  t² + 2bt + k = 0
    let offset = origin - circle.center;
    let b = direction.dot(offset);
    let k = offset.norm_squared() - circle.radius * circle.radius;
    let disc = b * b - k;
    if disc < 0.0 {
        return None;
    }
    let root = disc.sqrt();
    let near = -b - root;
    if near >= 0.0 {
        return Some(near);
    }
    let far = -b + root;
    (far >= 0.0).then_some(far)
}

/// Evenly spaced beam angles over `[-fov/2, fov/2]`, both edges included.
pub fn beam_angles(fov: f64, ray_count: usize) -> Result<Vec<f64>> {
    if ray_count < 2 {
        return Err(Error::param(
            "ray_count",
            format!("need at least 2 beams, got {ray_count}"),
        ));
    }
    if !(fov > 0.0 && fov <= TAU) {
        return Err(Error::param("fov", format!("must lie in (0, 2π], got {fov}")));
    }
    // Integer numerator keeps beam i and beam n-1-i exact negatives of each other.
    let span = 2 * (ray_count - 1);
    let n = ray_count as i64 - 1;
    Ok((0..ray_count as i64)
        .map(|i| fov * (2 * i - n) as f64 / span as f64)
        .collect())
}

/// Global-frame endpoint of a beam of length `range` fired from `pose`.
pub fn scan_point_to_global(pose: &Pose, beam_angle: f64, range: f64) -> Vec2 {
    pose.position + Vec2::from_angle(pose.heading + beam_angle) * range
}

/// Maps a world point onto the `(row, col)` cell containing it; row 0 is the
/// top (+y) edge. Points on the far boundary clamp to the last cell.
pub fn world_to_pixel(p: Vec2, grid: &GridSpec) -> Option<(usize, usize)> {
    let half = grid.extent / 2.0;
    if !(p.x >= -half && p.x <= half && p.y >= -half && p.y <= half) {
        return None;
    }
    let col = ((p.x + half) / grid.extent * grid.width_px as f64).floor() as usize;
    let row = ((half - p.y) / grid.extent * grid.height_px as f64).floor() as usize;
    Some((row.min(grid.height_px - 1), col.min(grid.width_px - 1)))
}
