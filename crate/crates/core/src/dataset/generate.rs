use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::manifest::{FileEntry, Manifest, RunFailure, SampleEntry, MANIFEST_FILE, MANIFEST_FORMAT};
use super::{derive_seed, generate_run, RunConfig, RunRecord, SimParams, Split, SplitSpec};
use crate::codec::{encode_occupancy, encode_projection};
use crate::error::{Error, Result};
use crate::files::{sha256_hex, to_json_bytes, write_atomic};
use crate::world::ExperimentSpec;

#[derive(Debug, Clone)]
pub struct DatasetRequest {
    pub experiment: ExperimentSpec,
    pub splits: SplitSpec,
    pub base_seed: u64,
    pub decay_enabled: bool,
    pub sim: SimParams,
    /// The dataset lands in `out_dir/exp<N>/`.
    pub out_dir: PathBuf,
    pub force: bool,
    /// Worker threads; `None` uses every core.
    pub jobs: Option<usize>,
}

impl DatasetRequest {
    pub fn new(experiment: ExperimentSpec, splits: SplitSpec, base_seed: u64, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            experiment,
            splits,
            base_seed,
            decay_enabled: true,
            sim: SimParams::default(),
            out_dir: out_dir.into(),
            force: false,
            jobs: None,
        }
    }

    pub fn dataset_dir(&self) -> PathBuf {
        self.out_dir.join(self.experiment.name())
    }
}

/// `<index>_<kind>.<ext>`, e.g. `12_input.png`.
pub fn sample_file_name(index: usize, kind: &str) -> String {
    let ext = if kind == "meta" { "json" } else { "png" };
    format!("{index}_{kind}.{ext}")
}

struct RunJob {
    split: Split,
    run_index: usize,
    seed: u64,
}

fn write_sample(root: &Path, split: Split, index: usize, kind: &str, bytes: &[u8]) -> Result<FileEntry> {
    let rel = format!("{}/{}", split, sample_file_name(index, kind));
    write_atomic(&root.join(&rel), bytes)?;
    Ok(FileEntry {
        path: rel,
        sha256: sha256_hex(bytes),
    })
}

fn emit_run(root: &Path, job: &RunJob, quota: usize, records: (RunRecord, RunRecord)) -> Result<Vec<SampleEntry>> {
    let (forward, reversed) = records;
    let mut entries = Vec::with_capacity(2);
    for (offset, record) in [forward, reversed].into_iter().enumerate() {
        let index = 2 * job.run_index + offset;
        if index >= quota {
            break;
        }
        let input = write_sample(root, job.split, index, "input", &encode_projection(&record.input)?)?;
        let target = write_sample(root, job.split, index, "target", &encode_occupancy(&record.target)?)?;
        let meta = write_sample(root, job.split, index, "meta", &to_json_bytes(&record.meta)?)?;
        entries.push(SampleEntry {
            split: job.split,
            index,
            run_index: job.run_index,
            world_seed: job.seed,
            direction: record.meta.direction,
            decay_enabled: record.meta.decay_enabled,
            input,
            target,
            meta,
        });
    }
    Ok(entries)
}

/// Generates every split of one experiment and writes its manifest.
///
/// Runs that fail (e.g. infeasible obstacle placement) are recorded in
/// `Manifest::failures` and generation continues; I/O errors abort.
pub fn generate_dataset(request: &DatasetRequest) -> Result<Manifest> {
    request.sim.validate()?;
    let root = request.dataset_dir();
    let manifest_path = root.join(MANIFEST_FILE);
    if manifest_path.exists() {
        if !request.force {
            return Err(Error::ManifestExists(manifest_path));
        }
        fs::remove_dir_all(&root).map_err(|e| Error::io(format!("clearing {}", root.display()), e))?;
    }
    fs::create_dir_all(&root).map_err(|e| Error::io(format!("creating {}", root.display()), e))?;

    let experiment = request.experiment;
    let jobs: Vec<RunJob> = Split::ALL
        .into_iter()
        .flat_map(|split| {
            (0..request.splits.runs(split)).map(move |run_index| RunJob {
                split,
                run_index,
                seed: derive_seed(request.base_seed, experiment.id(), split, run_index as u64),
            })
        })
        .collect();

    let run_one = |job: &RunJob| -> Result<std::result::Result<Vec<SampleEntry>, RunFailure>> {
        let config = RunConfig {
            experiment,
            seed: job.seed,
            decay_enabled: request.decay_enabled,
            sim: request.sim,
        };
        match generate_run(&config) {
            Ok(records) => emit_run(&root, job, request.splits.quota(job.split), records).map(Ok),
            Err(err @ Error::Io { .. }) => Err(err),
            Err(err) => Ok(Err(RunFailure {
                split: job.split,
                run_index: job.run_index,
                world_seed: job.seed,
                error: err.to_string(),
            })),
        }
    };

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = request.jobs {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::param("jobs", format!("cannot start worker pool: {e}")))?;
    let outcomes: Vec<_> = pool.install(|| jobs.par_iter().map(run_one).collect::<Result<Vec<_>>>())?;

    let mut samples = Vec::with_capacity(request.splits.total());
    let mut failures = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(entries) => samples.extend(entries),
            Err(failure) => failures.push(failure),
        }
    }

    let manifest = Manifest {
        format: MANIFEST_FORMAT.to_string(),
        experiment: experiment.id(),
        base_seed: request.base_seed,
        decay_enabled: request.decay_enabled,
        splits: request.splits,
        pair_counting: "quotas count samples; each simulated world yields a forward (index 2r) and a reversed \
                        (index 2r+1) sample sharing one obstacle trajectory and target"
            .to_string(),
        seed_derivation: "world_seed = first 8 bytes (LE) of SHA-256(\"fovmap/world-seed/v1\" | base_seed u64le | \
                          experiment u8 | split u8 {train=0,val=1,test=2} | run_index u64le)"
            .to_string(),
        sim: request.sim,
        samples,
        failures,
    };
    write_atomic(&manifest_path, &to_json_bytes(&manifest)?)?;
    Ok(manifest)
}
