use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use fovmap_core::codec::encode_projection;
use fovmap_core::dataset::{
    find_manifests, generate_dataset, replay_input, validate_dataset, DatasetRequest, RunMeta, SimParams, Split,
    SplitSpec,
};
use fovmap_core::files::{read, write_atomic};
use fovmap_core::metrics::{evaluate_pairs, EvalOptions};
use fovmap_core::{ExperimentSpec, GridSpec};

#[derive(Parser)]
#[command(
    name = "fovmap",
    version,
    about = "Limited-FOV LIDAR map prediction datasets and scoring"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate runs and write one experiment's dataset.
    Generate(GenerateArgs),
    /// Re-render a sample's input image from its meta record.
    Render(RenderArgs),
    /// Check a dataset against its manifest.
    Validate(ValidateArgs),
    /// Score predicted maps against a dataset split.
    Evaluate(EvaluateArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Experiment id, 1 to 4.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
    experiment: Option<u8>,
    #[arg(long)]
    train: Option<usize>,
    #[arg(long)]
    val: Option<usize>,
    #[arg(long)]
    test: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Constant gray level for every scan endpoint instead of recency.
    #[arg(long)]
    no_decay: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replace an existing dataset for this experiment.
    #[arg(long)]
    force: bool,
    #[arg(long)]
    jobs: Option<usize>,
    /// JSON file with any of: experiment, seed, decay_enabled, sim, splits, out, jobs.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Square image side in pixels (overrides sim.grid).
    #[arg(long)]
    size: Option<usize>,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long)]
    meta: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Render without recency decay regardless of the recorded setting.
    #[arg(long)]
    no_decay: bool,
}

#[derive(Args)]
struct ValidateArgs {
    /// Experiment directory, its manifest, or a parent holding several experiments.
    #[arg(long)]
    dataset: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Directory of predicted PNGs named `<k>_pred.png`, `<k>.png` or `<k>_target.png`.
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, default_value = "test")]
    split: Split,
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    /// Per-sample scores.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Print the full report as JSON instead of the table.
    #[arg(long)]
    json: bool,
    /// Also report SSIM of the thresholded prediction.
    #[arg(long)]
    binarized_ssim: bool,
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    experiment: Option<ExperimentSpec>,
    seed: Option<u64>,
    decay_enabled: Option<bool>,
    sim: Option<SimParams>,
    splits: Option<SplitSpec>,
    out: Option<PathBuf>,
    jobs: Option<usize>,
}

#[derive(Serialize)]
struct ResolvedGenerate<'a> {
    experiment: u8,
    seed: u64,
    decay_enabled: bool,
    splits: SplitSpec,
    out: &'a Path,
    force: bool,
    jobs: Option<usize>,
    sim: &'a SimParams,
}

fn banner(command: &str, resolved: &impl Serialize) -> anyhow::Result<()> {
    eprintln!("fovmap {command}: {}", serde_json::to_string(resolved)?);
    Ok(())
}

/// Bounds the global pool used by evaluation.
fn set_jobs(jobs: Option<usize>) -> anyhow::Result<()> {
    match jobs {
        Some(0) => bail!("--jobs must be at least 1"),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("starting worker pool"),
        None => Ok(()),
    }
}

fn generate(args: GenerateArgs) -> anyhow::Result<bool> {
    let file = match &args.config {
        Some(path) => {
            let bytes = read(path)?;
            serde_json::from_slice::<ConfigFile>(&bytes).with_context(|| format!("parsing {}", path.display()))?
        }
        None => ConfigFile::default(),
    };
    let experiment = match args.experiment {
        Some(id) => ExperimentSpec::new(id)?,
        None => file
            .experiment
            .context("--experiment is required (flag or config file)")?,
    };
    let defaults = file.splits.unwrap_or_default();
    let splits = SplitSpec {
        train: args.train.unwrap_or(defaults.train),
        val: args.val.unwrap_or(defaults.val),
        test: args.test.unwrap_or(defaults.test),
    };
    let mut sim = file.sim.unwrap_or_default();
    if let Some(px) = args.size {
        sim.grid = GridSpec::square(px, sim.grid.extent)?;
    }
    let out = args.out.or(file.out).unwrap_or_else(|| PathBuf::from("data"));
    let jobs = args.jobs.or(file.jobs);
    if jobs == Some(0) {
        bail!("--jobs must be at least 1");
    }

    let mut request = DatasetRequest::new(experiment, splits, args.seed.or(file.seed).unwrap_or(0), &out);
    request.decay_enabled = !args.no_decay && file.decay_enabled.unwrap_or(true);
    request.sim = sim;
    request.force = args.force;
    request.jobs = jobs;
    banner(
        "generate",
        &ResolvedGenerate {
            experiment: experiment.id(),
            seed: request.base_seed,
            decay_enabled: request.decay_enabled,
            splits,
            out: &out,
            force: request.force,
            jobs,
            sim: &request.sim,
        },
    )?;

    let manifest = generate_dataset(&request)?;
    let dir = request.dataset_dir();
    println!(
        "{}: {} samples written to {}",
        experiment.name(),
        manifest.samples.len(),
        dir.display()
    );
    for split in Split::ALL {
        println!(
            "  {split:<5} {:>6} / {}",
            manifest.samples_in(split).count(),
            splits.quota(split)
        );
    }
    if manifest.failures.is_empty() {
        return Ok(true);
    }
    println!("{} runs failed:", manifest.failures.len());
    for f in &manifest.failures {
        println!("  {}/run{} (seed {}): {}", f.split, f.run_index, f.world_seed, f.error);
    }
    Ok(false)
}

fn render(args: RenderArgs) -> anyhow::Result<bool> {
    let bytes = read(&args.meta)?;
    let meta: RunMeta = serde_json::from_slice(&bytes).with_context(|| format!("parsing {}", args.meta.display()))?;
    let decay = meta.decay_enabled && !args.no_decay;
    banner(
        "render",
        &serde_json::json!({ "meta": args.meta, "out": args.out, "decay_enabled": decay, "config": meta.config }),
    )?;
    let image = replay_input(&meta, decay)?;
    write_atomic(&args.out, &encode_projection(&image)?)?;
    println!("wrote {}", args.out.display());
    Ok(true)
}

fn validate(args: ValidateArgs) -> anyhow::Result<bool> {
    banner("validate", &serde_json::json!({ "dataset": args.dataset }))?;
    let mut ok = true;
    for manifest in find_manifests(&args.dataset)? {
        let report = validate_dataset(&manifest)?;
        println!(
            "{}: {} samples, {} files checked",
            manifest.display(),
            report.samples_checked,
            report.files_checked
        );
        for v in &report.violations {
            println!("  {v}");
        }
        if report.is_valid() {
            println!("  valid");
        } else {
            println!("  INVALID: {} violations", report.violations.len());
            ok = false;
        }
    }
    Ok(ok)
}

fn evaluate(args: EvaluateArgs) -> anyhow::Result<bool> {
    if !(0.0..=1.0).contains(&args.threshold) {
        bail!("--threshold must lie in [0, 1]");
    }
    set_jobs(args.jobs)?;
    let options = EvalOptions {
        threshold: args.threshold,
        binarized_ssim: args.binarized_ssim,
        ..EvalOptions::default()
    };
    banner(
        "evaluate",
        &serde_json::json!({
            "pred": args.pred,
            "dataset": args.dataset,
            "split": args.split,
            "options": options,
            "jobs": args.jobs,
        }),
    )?;
    let evaluation = evaluate_pairs(&args.pred, &args.dataset, args.split, &options)?;
    if args.json {
        println!("{}", evaluation.to_json()?);
    } else {
        print!("{}", evaluation.table());
    }
    if let Some(path) = &args.csv {
        evaluation.write_csv(path)?;
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Render(a) => render(a),
        Command::Validate(a) => validate(a),
        Command::Evaluate(a) => evaluate(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
