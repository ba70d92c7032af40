//! Run simulation and dataset assembly.
//!
//! A run simulates one world for `steps` steps and scans it twice, once
//! with the robot path in each direction. Both directions see the same
//! obstacle trajectory, so they share one ground-truth map.

mod generate;
mod manifest;
mod seed;
mod validate;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{GridSpec, Pose};
use crate::lidar::{scan_with_angles, LidarConfig, ScanFrame};
use crate::projection::{render_ground_truth, render_input, GroundTruthMap, ProjectionImage};
use crate::world::{robot_pose_at, rollout, Direction, ExperimentSpec, PathParams, WorldParams, WorldState};

pub use generate::{generate_dataset, sample_file_name, DatasetRequest};
pub use manifest::{read_manifest, FileEntry, Manifest, RunFailure, SampleEntry, MANIFEST_FILE, MANIFEST_FORMAT};
pub use seed::{derive_seed, world_rng};
pub use validate::{find_manifests, validate_dataset, ValidationReport, Violation};

/// Everything except the experiment, seed and decay flag: the shared
/// physical setup of a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimParams {
    pub world: WorldParams,
    pub path: PathParams,
    pub lidar: LidarConfig,
    pub grid: GridSpec,
    /// Steps per run.
    pub steps: usize,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            world: WorldParams::default(),
            path: PathParams::default(),
            lidar: LidarConfig::default(),
            grid: GridSpec::default(),
            steps: 100,
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        self.world.validate()?;
        self.lidar.validate()?;
        self.grid.validate()?;
        if self.steps == 0 {
            return Err(Error::param("steps", "must be at least 1"));
        }
        if (self.grid.extent - self.world.extent).abs() > 1e-12 {
            return Err(Error::param(
                "grid.extent",
                format!(
                    "image extent {} differs from world extent {}",
                    self.grid.extent, self.world.extent
                ),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: ExperimentSpec,
    pub seed: u64,
    pub decay_enabled: bool,
    #[serde(default)]
    pub sim: SimParams,
}

impl RunConfig {
    pub fn new(experiment: ExperimentSpec, seed: u64) -> Self {
        Self {
            experiment,
            seed,
            decay_enabled: true,
            sim: SimParams::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }

    pub(crate) fn tag(self) -> u8 {
        self as u8
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for Split {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(Error::param("split", format!("unknown split `{other}`"))),
        }
    }
}

/// Sample quotas per split. Each direction of a run is one sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train: 10_000,
            val: 128,
            test: 500,
        }
    }
}

impl SplitSpec {
    pub fn quota(&self, split: Split) -> usize {
        match split {
            Split::Train => self.train,
            Split::Val => self.val,
            Split::Test => self.test,
        }
    }

    pub fn total(&self) -> usize {
        self.train + self.val + self.test
    }

    /// Simulated worlds needed to fill `split`.
    pub fn runs(&self, split: Split) -> usize {
        self.quota(split).div_ceil(2)
    }
}

/// Per-obstacle trajectory as recorded in run metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleTrack {
    pub radius: f64,
    pub dynamic: bool,
    /// Center `[x, y]` at each step.
    pub centers: Vec<[f64; 2]>,
}

pub const META_FORMAT: &str = "fovmap-run-meta/1";

/// Sidecar written next to each sample. Field order is the on-disk key order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub format: String,
    pub experiment: u8,
    pub direction: Direction,
    pub world_seed: u64,
    pub decay_enabled: bool,
    /// Both directions of a run share one obstacle trajectory and target.
    pub shared_world_with_other_direction: bool,
    /// Inter-obstacle contact is not simulated; walls reflect.
    pub obstacle_interaction: String,
    pub config: RunConfig,
    pub poses: Vec<Pose>,
    pub obstacles: Vec<ObstacleTrack>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub input: ProjectionImage,
    pub target: GroundTruthMap,
    pub meta: RunMeta,
}

/// Raw simulation output behind a pair of records.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub states: Vec<WorldState>,
    pub forward: Vec<ScanFrame>,
    pub reversed: Vec<ScanFrame>,
}

impl Simulation {
    pub fn frames(&self, direction: Direction) -> &[ScanFrame] {
        match direction {
            Direction::Forward => &self.forward,
            Direction::Reversed => &self.reversed,
        }
    }
}

/// Rolls out the world once and scans it along both robot paths.
pub fn simulate(config: &RunConfig) -> Result<Simulation> {
    config.sim.validate()?;
    let sim = &config.sim;
    let mut rng = world_rng(config.seed);
    let states = rollout(config.experiment, &sim.world, sim.steps, &mut rng)?;
    let angles = sim.lidar.beam_angles()?;
    let scan_along = |direction| -> Result<Vec<ScanFrame>> {
        let controller = config.experiment.controller(direction);
        states
            .iter()
            .map(|state| {
                let pose = robot_pose_at(controller, state.step, sim.steps, &sim.path)?;
                Ok(scan_with_angles(state, &pose, &angles, sim.lidar.max_range))
            })
            .collect()
    };
    let forward = scan_along(Direction::Forward)?;
    let reversed = scan_along(Direction::Reversed)?;
    Ok(Simulation {
        states,
        forward,
        reversed,
    })
}

fn tracks(states: &[WorldState]) -> Vec<ObstacleTrack> {
    let Some(first) = states.first() else {
        return Vec::new();
    };
    first
        .obstacles
        .iter()
        .enumerate()
        .map(|(i, o)| ObstacleTrack {
            radius: o.shape.radius,
            dynamic: o.dynamic,
            centers: states
                .iter()
                .map(|s| {
                    let c = s.obstacles[i].shape.center;
                    [c.x, c.y]
                })
                .collect(),
        })
        .collect()
}

/// Builds the forward and reversed records of one run.
pub fn generate_run(config: &RunConfig) -> Result<(RunRecord, RunRecord)> {
    let simulation = simulate(config)?;
    let sim = &config.sim;
    let final_state = simulation.states.last().expect("steps >= 1");
    let target = render_ground_truth(final_state, &sim.grid);
    let obstacles = tracks(&simulation.states);
    let record = |direction: Direction| -> Result<RunRecord> {
        let frames = simulation.frames(direction);
        Ok(RunRecord {
            input: render_input(frames, &sim.lidar, &sim.grid, config.decay_enabled)?,
            target: target.clone(),
            meta: RunMeta {
                format: META_FORMAT.to_string(),
                experiment: config.experiment.id(),
                direction,
                world_seed: config.seed,
                decay_enabled: config.decay_enabled,
                shared_world_with_other_direction: true,
                obstacle_interaction: "pass-through; walls reflect".to_string(),
                config: *config,
                poses: frames.iter().map(|f| f.pose).collect(),
                obstacles: obstacles.clone(),
            },
        })
    };
    Ok((record(Direction::Forward)?, record(Direction::Reversed)?))
}

/// Re-renders the input image of one direction from its metadata.
pub fn replay_input(meta: &RunMeta, decay_enabled: bool) -> Result<ProjectionImage> {
    let config = RunConfig {
        decay_enabled,
        ..meta.config
    };
    let simulation = simulate(&config)?;
    render_input(
        simulation.frames(meta.direction),
        &config.sim.lidar,
        &config.sim.grid,
        decay_enabled,
    )
}
