//! World state and its evolution: obstacle placement, obstacle motion and
//! the two robot path controllers.
//!
//! Random draws follow a fixed order so that a run is a pure function of
//! its seed:
//!
//! * placement: for each obstacle in index order, draw `x`, `y`, then the
//!   radius; a rejected candidate redraws all three. Once every obstacle is
//!   placed, each dynamic obstacle draws its heading, again in index order.
//! * stepping: for each obstacle in index order, a turn draw on turn steps,
//!   then one draw per center-zone resample.

use std::f64::consts::{FRAC_PI_2, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Circle, Pose, Vec2};

/// Upper bound on placement candidates drawn by [`init_world`].
pub const MAX_PLACEMENT_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    RotateInPlace,
    SquarePath,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Reversed,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Forward => "forward",
            Direction::Reversed => "reversed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RobotController {
    pub kind: ControllerKind,
    pub direction: Direction,
}

/// One of the four experiment protocols. The id fixes obstacle dynamics and
/// the robot path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct ExperimentSpec {
    id: u8,
}

impl ExperimentSpec {
    pub fn new(id: u8) -> Result<Self> {
        if (1..=4).contains(&id) {
            Ok(Self { id })
        } else {
            Err(Error::param("experiment", format!("must be 1..=4, got {id}")))
        }
    }

    pub fn all() -> [ExperimentSpec; 4] {
        [1, 2, 3, 4].map(|id| ExperimentSpec { id })
    }

    pub fn id(&self) -> u8 {
        self.id
    }

    pub fn obstacles_dynamic(&self) -> bool {
        self.id >= 3
    }

    pub fn controller_kind(&self) -> ControllerKind {
        if self.id % 2 == 1 {
            ControllerKind::RotateInPlace
        } else {
            ControllerKind::SquarePath
        }
    }

    pub fn controller(&self, direction: Direction) -> RobotController {
        RobotController {
            kind: self.controller_kind(),
            direction,
        }
    }

    /// Directory-friendly name, e.g. `exp3`.
    pub fn name(&self) -> String {
        format!("exp{}", self.id)
    }
}

impl TryFrom<u8> for ExperimentSpec {
    type Error = Error;
    fn try_from(id: u8) -> Result<Self> {
        Self::new(id)
    }
}

impl From<ExperimentSpec> for u8 {
    fn from(spec: ExperimentSpec) -> u8 {
        spec.id
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorldParams {
    pub obstacle_count: usize,
    pub radius_min: f64,
    pub radius_max: f64,
    /// Distance a dynamic obstacle travels per step, meters.
    pub speed: f64,
    /// Dynamic obstacles pick a fresh heading every this many steps.
    pub turn_interval: usize,
    /// Side length of the square world, meters.
    pub extent: f64,
    pub center_zone_radius: f64,
}

impl Default for WorldParams {
    fn default() -> Self {
        Self {
            obstacle_count: 10,
            radius_min: 1.0,
            radius_max: 2.5,
            speed: 0.25,
            turn_interval: 20,
            extent: 50.0,
            center_zone_radius: 6.0,
        }
    }
}

impl WorldParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius_min > 0.0 && self.radius_min <= self.radius_max) {
            return Err(Error::param(
                "radius",
                format!(
                    "need 0 < radius_min <= radius_max, got [{}, {}]",
                    self.radius_min, self.radius_max
                ),
            ));
        }
        if !(self.speed >= 0.0 && self.speed.is_finite()) {
            return Err(Error::param(
                "speed",
                format!("must be finite and >= 0, got {}", self.speed),
            ));
        }
        if self.turn_interval == 0 {
            return Err(Error::param("turn_interval", "must be at least 1"));
        }
        if !(self.extent > 0.0 && self.extent.is_finite()) {
            return Err(Error::param("extent", format!("must be positive, got {}", self.extent)));
        }
        if self.center_zone_radius < 0.0 {
            return Err(Error::param("center_zone_radius", "must be >= 0"));
        }
        // An obstacle bouncing off a wall must never land inside the center
        // zone, so the zone (plus the largest obstacle) must clear the walls
        // by two steps of travel.
        let reach = self.center_zone_radius + self.radius_max + 2.0 * self.speed;
        if reach >= self.extent / 2.0 {
            return Err(Error::param(
                "center_zone_radius",
                format!(
                    "zone + radius_max + 2·speed = {reach} must be < extent/2 = {}",
                    self.extent / 2.0
                ),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathParams {
    /// Side of the square path, meters.
    pub side: f64,
    /// Heading at step 0 for the rotate-in-place controller.
    pub initial_heading: f64,
}

impl Default for PathParams {
    fn default() -> Self {
        Self {
            side: 8.0,
            initial_heading: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub shape: Circle,
    /// Displacement per step; zero for static obstacles.
    pub velocity: Vec2,
    pub dynamic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub obstacles: Vec<Obstacle>,
    pub step: usize,
    pub extent: f64,
}

impl WorldState {
    pub fn empty(extent: f64) -> Self {
        Self {
            obstacles: Vec::new(),
            step: 0,
            extent,
        }
    }

    pub fn circles(&self) -> impl Iterator<Item = &Circle> {
        self.obstacles.iter().map(|o| &o.shape)
    }
}

fn intersects_zone(center: Vec2, radius: f64, zone_radius: f64) -> bool {
    center.norm() < zone_radius + radius
}

fn heading_velocity<R: Rng + ?Sized>(rng: &mut R, speed: f64) -> Vec2 {
    Vec2::from_angle(rng.random_range(0.0..TAU)) * speed
}

/// Places obstacles uniformly over the world square, rejecting candidates
/// that touch the center zone or overlap an earlier obstacle.
pub fn init_world<R: Rng + ?Sized>(spec: ExperimentSpec, params: &WorldParams, rng: &mut R) -> Result<WorldState> {
    params.validate()?;
    let half = params.extent / 2.0;
    let mut circles: Vec<Circle> = Vec::with_capacity(params.obstacle_count);
    let mut attempts = 0;
    while circles.len() < params.obstacle_count {
        if attempts == MAX_PLACEMENT_ATTEMPTS {
            return Err(Error::PlacementInfeasible {
                attempts,
                placed: circles.len(),
                requested: params.obstacle_count,
            });
        }
        attempts += 1;
        let x = rng.random_range(-half..=half);
        let y = rng.random_range(-half..=half);
        let radius = if params.radius_min == params.radius_max {
            // keep the draw count fixed even for a degenerate range
            let _: f64 = rng.random();
            params.radius_min
        } else {
            rng.random_range(params.radius_min..=params.radius_max)
        };
        let center = Vec2::new(x, y);
        if center.norm() <= params.center_zone_radius + radius {
            continue;
        }
        if circles.iter().any(|c| c.center.distance(center) <= c.radius + radius) {
            continue;
        }
        circles.push(Circle { center, radius });
    }

    let dynamic = spec.obstacles_dynamic();
    let obstacles = circles
        .into_iter()
        .map(|shape| Obstacle {
            shape,
            velocity: if dynamic {
                heading_velocity(rng, params.speed)
            } else {
                Vec2::ZERO
            },
            dynamic,
        })
        .collect();
    Ok(WorldState {
        obstacles,
        step: 0,
        extent: params.extent,
    })
}

/// Advances the world by one step.
///
/// Each dynamic obstacle, in index order: turns on turn steps; if its next
/// position would touch the center zone, resamples a heading that points
/// away from the zone center; reflects off the world walls; then moves.
pub fn step_obstacles<R: Rng + ?Sized>(
    world: &WorldState,
    spec: ExperimentSpec,
    params: &WorldParams,
    rng: &mut R,
) -> WorldState {
    let mut next = world.clone();
    next.step = world.step + 1;
    if !spec.obstacles_dynamic() {
        return next;
    }
    let turning = next.step.is_multiple_of(params.turn_interval);
    let half = params.extent / 2.0;
    for obstacle in next.obstacles.iter_mut().filter(|o| o.dynamic) {
        let center = obstacle.shape.center;
        let radius = obstacle.shape.radius;
        if turning {
            obstacle.velocity = heading_velocity(rng, params.speed);
        }
        if intersects_zone(center + obstacle.velocity, radius, params.center_zone_radius) {
            obstacle.velocity = outward_velocity(rng, center, params.speed);
        }
        let mut v = obstacle.velocity;
        let candidate = center + v;
        if candidate.x > half || candidate.x < -half {
            v.x = -v.x;
        }
        if candidate.y > half || candidate.y < -half {
            v.y = -v.y;
        }
        obstacle.velocity = v;
        obstacle.shape.center = center + v;
    }
    next
}

/// Uniform heading from the open half-plane facing away from the origin.
fn outward_velocity<R: Rng + ?Sized>(rng: &mut R, center: Vec2, speed: f64) -> Vec2 {
    let outward = center.y.atan2(center.x);
    let offset: f64 = rng.random_range(-FRAC_PI_2..FRAC_PI_2);
    let v = Vec2::from_angle(outward + offset) * speed;
    if v.dot(center) > 0.0 {
        v
    } else {
        // offset landed on the half-plane edge
        Vec2::from_angle(outward) * speed
    }
}

/// Robot pose at `step` of a `total_steps` cycle.
///
/// Rotate-in-place turns once around the world center, counter-clockwise
/// when forward. Square-path starts at the lower-left corner of a square
/// centered on the origin and walks it counter-clockwise when forward,
/// `total_steps / 4` steps per side, facing along the current side.
pub fn robot_pose_at(
    controller: RobotController,
    step: usize,
    total_steps: usize,
    params: &PathParams,
) -> Result<Pose> {
    if total_steps == 0 {
        return Err(Error::param("steps", "must be at least 1"));
    }
    if step > total_steps {
        return Err(Error::param(
            "step",
            format!("{step} exceeds cycle length {total_steps}"),
        ));
    }
    let fraction = step as f64 / total_steps as f64;
    match controller.kind {
        ControllerKind::RotateInPlace => {
            let sign = match controller.direction {
                Direction::Forward => 1.0,
                Direction::Reversed => -1.0,
            };
            Ok(Pose::new(Vec2::ZERO, params.initial_heading + sign * TAU * fraction))
        }
        ControllerKind::SquarePath => {
            let h = params.side / 2.0;
            let corners = match controller.direction {
                Direction::Forward => [Vec2::new(-h, -h), Vec2::new(h, -h), Vec2::new(h, h), Vec2::new(-h, h)],
                Direction::Reversed => [Vec2::new(-h, -h), Vec2::new(-h, h), Vec2::new(h, h), Vec2::new(h, -h)],
            };
            let along = 4.0 * fraction;
            let side = (along.floor() as usize).min(3);
            let local = along - side as f64;
            let from = corners[side];
            let to = corners[(side + 1) % 4];
            let travel = to - from;
            let position = if step == total_steps {
                corners[0]
            } else {
                from + travel * local
            };
            Ok(Pose::new(position, travel.y.atan2(travel.x)))
        }
    }
}

/// Obstacle centers at every step of a run, `0..steps`.
pub fn rollout<R: Rng + ?Sized>(
    spec: ExperimentSpec,
    params: &WorldParams,
    steps: usize,
    rng: &mut R,
) -> Result<Vec<WorldState>> {
    if steps == 0 {
        return Err(Error::param("steps", "must be at least 1"));
    }
    let mut states = Vec::with_capacity(steps);
    states.push(init_world(spec, params, rng)?);
    for _ in 1..steps {
        let next = step_obstacles(states.last().expect("nonempty"), spec, params, rng);
        states.push(next);
    }
    Ok(states)
}
