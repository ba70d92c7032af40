use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::manifest::{read_manifest, Manifest, SampleEntry, MANIFEST_FILE};
use super::{RunMeta, Split};
use crate::codec::GrayImage;
use crate::error::{Error, Result};
use crate::files::sha256_hex;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// `split/index`, or `-` for dataset-level problems.
    pub sample: String,
    pub file: String,
    pub problem: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}: {}", self.sample, self.file, self.problem)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub manifest: PathBuf,
    pub samples_checked: usize,
    pub files_checked: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Manifests under `path`: the file itself, `path/manifest.json`, or one
/// per experiment subdirectory.
pub fn find_manifests(path: &Path) -> Result<Vec<PathBuf>> {
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let direct = path.join(MANIFEST_FILE);
    if direct.is_file() {
        return Ok(vec![direct]);
    }
    let entries = fs::read_dir(path).map_err(|e| Error::io(format!("listing {}", path.display()), e))?;
    let mut found: Vec<PathBuf> = entries
        .filter_map(|e| e.ok())
        .map(|e| e.path().join(MANIFEST_FILE))
        .filter(|p| p.is_file())
        .collect();
    found.sort();
    if found.is_empty() {
        return Err(Error::io(
            format!("no {MANIFEST_FILE} under {}", path.display()),
            std::io::Error::from(std::io::ErrorKind::NotFound),
        ));
    }
    Ok(found)
}

fn check_sample(root: &Path, manifest: &Manifest, sample: &SampleEntry, out: &mut Vec<Violation>) -> usize {
    let id = sample.id();
    let mut checked = 0;
    let mut flag = |file: &str, problem: String| {
        out.push(Violation {
            sample: id.clone(),
            file: file.to_string(),
            problem,
        })
    };
    for (kind, entry) in sample.files() {
        let path = root.join(&entry.path);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) => {
                flag(&entry.path, format!("missing or unreadable: {e}"));
                continue;
            }
        };
        checked += 1;
        let digest = sha256_hex(&bytes);
        if digest != entry.sha256 {
            flag(
                &entry.path,
                format!("checksum mismatch: manifest {}, file {digest}", entry.sha256),
            );
        }
        match kind {
            "input" | "target" => match GrayImage::decode_png(&bytes) {
                Ok(img) => {
                    let grid = &manifest.sim.grid;
                    if img.width != grid.width_px || img.height != grid.height_px {
                        flag(
                            &entry.path,
                            format!(
                                "dimensions {}x{}, expected {}x{}",
                                img.width, img.height, grid.width_px, grid.height_px
                            ),
                        );
                    }
                    if kind == "target" {
                        if let Some(b) = img.pixels.iter().find(|&&b| b != 0 && b != 255) {
                            flag(&entry.path, format!("target not binary: byte {b}"));
                        }
                    }
                }
                Err(e) => flag(&entry.path, e.to_string()),
            },
            _ => match serde_json::from_slice::<RunMeta>(&bytes) {
                Ok(meta) => {
                    if meta.world_seed != sample.world_seed
                        || meta.direction != sample.direction
                        || meta.experiment != manifest.experiment
                        || meta.decay_enabled != sample.decay_enabled
                    {
                        flag(&entry.path, "meta disagrees with manifest entry".to_string());
                    }
                }
                Err(e) => flag(&entry.path, format!("malformed meta: {e}")),
            },
        }
    }
    checked
}

/// Re-hashes and re-decodes every file listed in the manifest.
pub fn validate_dataset(manifest_path: &Path) -> Result<ValidationReport> {
    let manifest = read_manifest(manifest_path)?;
    let root = manifest_path.parent().unwrap_or(Path::new("."));
    let mut violations = Vec::new();
    let mut files_checked = 0;

    for failure in &manifest.failures {
        violations.push(Violation {
            sample: format!("{}/run{}", failure.split, failure.run_index),
            file: "-".to_string(),
            problem: format!("generation failed: {}", failure.error),
        });
    }
    let mut per_split: BTreeMap<Split, usize> = BTreeMap::new();
    for sample in &manifest.samples {
        *per_split.entry(sample.split).or_default() += 1;
        files_checked += check_sample(root, &manifest, sample, &mut violations);
    }
    for split in Split::ALL {
        let have = per_split.get(&split).copied().unwrap_or(0);
        let want = manifest.splits.quota(split);
        if have != want {
            violations.push(Violation {
                sample: "-".to_string(),
                file: MANIFEST_FILE.to_string(),
                problem: format!("{split} lists {have} samples, quota is {want}"),
            });
        }
    }
    Ok(ValidationReport {
        manifest: manifest_path.to_path_buf(),
        samples_checked: manifest.samples.len(),
        files_checked,
        violations,
    })
}
