use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{SimParams, Split, SplitSpec};
use crate::error::{Error, Result};
use crate::world::Direction;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_FORMAT: &str = "fovmap-manifest/1";

/// Path relative to the manifest's directory plus its SHA-256.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleEntry {
    pub split: Split,
    /// Sample index within the split; runs fill indices `2r` (forward) and `2r + 1` (reversed).
    pub index: usize,
    pub run_index: usize,
    pub world_seed: u64,
    pub direction: Direction,
    pub decay_enabled: bool,
    pub input: FileEntry,
    pub target: FileEntry,
    pub meta: FileEntry,
}

impl SampleEntry {
    pub fn id(&self) -> String {
        format!("{}/{}", self.split, self.index)
    }

    pub fn files(&self) -> [(&'static str, &FileEntry); 3] {
        [("input", &self.input), ("target", &self.target), ("meta", &self.meta)]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunFailure {
    pub split: Split,
    pub run_index: usize,
    pub world_seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub experiment: u8,
    pub base_seed: u64,
    pub decay_enabled: bool,
    pub splits: SplitSpec,
    /// How quotas map to simulated worlds.
    pub pair_counting: String,
    pub seed_derivation: String,
    pub sim: SimParams,
    pub samples: Vec<SampleEntry>,
    pub failures: Vec<RunFailure>,
}

impl Manifest {
    pub fn samples_in(&self, split: Split) -> impl Iterator<Item = &SampleEntry> {
        self.samples.iter().filter(move |s| s.split == split)
    }
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    serde_json::from_str(&text).map_err(|source| Error::Malformed {
        what: "manifest",
        path: path.to_path_buf(),
        source,
    })
}
