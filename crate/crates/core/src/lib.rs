//! Limited field-of-view LIDAR map-prediction data pipeline.
//!
//! A simulated robot sweeps a narrow-FOV range sensor over a world of
//! circular obstacles for a fixed window of steps. The whole window is
//! encoded as one grayscale image in which each scan endpoint carries its
//! recency, paired with a binary map of the final obstacle state. The
//! [`metrics`] module scores predicted maps against those targets.

pub mod codec;
pub mod dataset;
mod error;
pub mod files;
pub mod geometry;
pub mod lidar;
pub mod metrics;
pub mod projection;
pub mod world;

pub use error::{Error, Result};
pub use geometry::{
    beam_angles, ray_circle_intersect, scan_point_to_global, world_to_pixel, Circle, GridSpec, Pose, Vec2,
};
pub use lidar::{scan, LidarConfig, ScanFrame};
pub use projection::{
    accumulate_scan, recency_value, render_ground_truth, render_input, GroundTruthMap, OccupancyMap, ProjectionImage,
};
pub use world::{
    init_world, robot_pose_at, step_obstacles, ControllerKind, Direction, ExperimentSpec, Obstacle, PathParams,
    RobotController, WorldParams, WorldState,
};
