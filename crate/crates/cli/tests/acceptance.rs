//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p fovmap-cli --test acceptance`.

#[path = "../../core/tests/oracles/mod.rs"]
mod oracles;

use std::collections::BTreeMap;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use fovmap_core::codec::{byte_to_recency, GrayImage};
use fovmap_core::dataset::{read_manifest, simulate, validate_dataset, RunConfig};
use fovmap_core::metrics::{
    bce_loss, confusion, dice_loss, evaluate_sample, metrics_from_counts, ssim, EvalOptions, PredictionMap, SsimParams,
};
use fovmap_core::{
    accumulate_scan, ray_circle_intersect, render_input, Circle, Direction, ExperimentSpec, GridSpec, OccupancyMap,
    ProjectionImage, Vec2,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fovmap(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_fovmap"))
        .args(args)
        .output()
        .expect("spawn fovmap")
}

fn tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(base: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(base, &path, out);
            } else {
                let rel = path.strip_prefix(base).unwrap().to_string_lossy().into_owned();
                out.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

fn ray_cast_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let start = Instant::now();
    let (mut worst, mut hits) = (0.0f64, 0);
    for case in 0..1000 {
        let origin = Vec2::new(rng.random_range(-25.0..25.0), rng.random_range(-25.0..25.0));
        let center = Vec2::new(rng.random_range(-25.0..25.0), rng.random_range(-25.0..25.0));
        let radius = rng.random_range(0.5..3.0);
        // three in four rays aim within 1.2x the circle's angular half-width
        let (dx, dy) = (center.x - origin.x, center.y - origin.y);
        let half_width = (radius / dx.hypot(dy)).min(1.0).asin();
        let angle = if case % 4 == 0 {
            rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)
        } else {
            dy.atan2(dx) + rng.random_range(-1.2..1.2) * half_width
        };
        let dir = (angle.cos(), angle.sin());
        let analytic = ray_circle_intersect(origin, Vec2::new(dir.0, dir.1), &Circle::new(center, radius).unwrap());
        let marched = oracles::march_ray((origin.x, origin.y), dir, (center.x, center.y), radius, 1e-4);
        match (analytic, marched) {
            (Some(a), Some(m)) => {
                worst = worst.max((a - m).abs());
                hits += 1;
            }
            (None, None) => {}
            (a, m) => return Err(format!("case {case}: analytic {a:?}, marched {m:?}")),
        }
    }
    let elapsed = start.elapsed();
    ensure(worst <= 1e-6, || format!("max error {worst:.3e} m"))?;
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "1000 cases, {hits} hits, max error {worst:.2e} m, {:.2} s",
        elapsed.as_secs_f64()
    ))
}

fn projection_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    for run in 0..20 {
        let exp = if run % 2 == 0 { 1 } else { 3 };
        let cfg = RunConfig::new(ExperimentSpec::new(exp).unwrap(), rng.random());
        let sim = simulate(&cfg).map_err(|e| e.to_string())?;
        let angles = cfg.sim.lidar.beam_angles().unwrap();
        let g = cfg.sim.grid;
        for dir in [Direction::Forward, Direction::Reversed] {
            let frames = sim.frames(dir);
            let image = render_input(frames, &cfg.sim.lidar, &g, cfg.decay_enabled).map_err(|e| e.to_string())?;
            let plain: Vec<_> = frames
                .iter()
                .map(|f| oracles::Frame {
                    step: f.step,
                    position: (f.pose.position.x, f.pose.position.y),
                    heading: f.pose.heading,
                    ranges: &f.ranges,
                    hits: &f.hits,
                })
                .collect();
            let expected = oracles::reproject(&plain, &angles, g.width_px, g.height_px, g.extent, cfg.sim.steps, true);
            let same = image
                .values
                .iter()
                .zip(&expected)
                .all(|(a, b)| a.to_bits() == b.to_bits());
            ensure(same, || {
                format!("run {run} (exp{exp}, seed {}) {dir:?} differs", cfg.seed)
            })?;
        }
    }
    Ok("20 runs x 2 directions bit-exact".into())
}

fn fold_order_invariance() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    for run in 0..50 {
        let exp = rng.random_range(1..=4u8);
        let cfg = RunConfig::new(ExperimentSpec::new(exp).unwrap(), rng.random());
        let sim = simulate(&cfg).map_err(|e| e.to_string())?;
        let angles = cfg.sim.lidar.beam_angles().unwrap();
        let ordered = render_input(&sim.forward, &cfg.sim.lidar, &cfg.sim.grid, true).unwrap();
        let mut frames = sim.forward.clone();
        frames.shuffle(&mut rng);
        let mut image = ProjectionImage::blank(cfg.sim.grid);
        for f in &frames {
            accumulate_scan(&mut image, f, &angles, cfg.sim.steps, true).unwrap();
        }
        let same = image
            .values
            .iter()
            .zip(&ordered.values)
            .all(|(a, b)| a.to_bits() == b.to_bits());
        ensure(same, || format!("run {run} (exp{exp}, seed {}) differs", cfg.seed))?;
    }
    Ok("50 shuffled runs bit-exact".into())
}

fn determinism() -> Check {
    let start = Instant::now();
    let mut files = 0;
    for e in ["1", "2", "3", "4"] {
        let mut trees = Vec::new();
        for _ in 0..2 {
            let dir = tempfile::tempdir().unwrap();
            let out = dir.path().to_str().unwrap();
            let o = fovmap(&[
                "generate",
                "--experiment",
                e,
                "--train",
                "8",
                "--val",
                "2",
                "--test",
                "2",
                "--seed",
                "2024",
                "--out",
                out,
            ]);
            ensure(o.status.success(), || {
                format!("exp{e}: {}", String::from_utf8_lossy(&o.stderr))
            })?;
            trees.push(tree(dir.path()));
        }
        ensure(trees[0] == trees[1], || format!("exp{e}: trees differ"))?;
        files += trees[0].len();
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "4 experiments, {files} files byte-identical, {:.1} s",
        elapsed.as_secs_f64()
    ))
}

fn metric_identities() -> Check {
    let g = GridSpec::square(16, 1.0).unwrap();
    let gt = OccupancyMap {
        grid: g,
        cells: (0..256).map(|i| (i * 7) % 11 < 3).collect(),
    };
    let r = evaluate_sample(&PredictionMap::from_occupancy(&gt), &gt, &EvalOptions::default()).unwrap();
    for (name, v) in ["ssim", "accuracy", "dice", "precision", "recall", "specificity"]
        .iter()
        .zip(r.headline())
    {
        ensure((v - 1.0).abs() <= 1e-9, || format!("pred=gt {name} = {v}"))?;
    }

    let four = GridSpec {
        width_px: 4,
        height_px: 1,
        extent: 1.0,
    };
    let pred = OccupancyMap {
        grid: four,
        cells: vec![true, true, false, false],
    };
    let truth = OccupancyMap {
        grid: four,
        cells: vec![true, false, true, false],
    };
    let m = metrics_from_counts(&confusion(&pred, &truth).unwrap());
    for v in [m.accuracy, m.dice, m.precision, m.recall, m.specificity] {
        ensure(v == 0.5, || format!("4-pixel example gave {m:?}"))?;
    }

    let bce_half = bce_loss(&[0.5; 9], &[true, false, true, true, false, false, true, false, true]).unwrap();
    ensure((bce_half - std::f64::consts::LN_2).abs() <= 1e-12, || {
        format!("BCE(0.5) = {bce_half}")
    })?;
    let bce2 = bce_loss(&[0.9, 0.2], &[true, false]).unwrap();
    ensure((bce2 - 0.164252).abs() <= 1e-6, || format!("N=2 BCE = {bce2}"))?;
    let d = dice_loss(&[0.5, 0.5], &[true, false], 1e-6).unwrap();
    ensure((d - 0.333333).abs() <= 1e-6, || format!("dice loss = {d}"))?;
    Ok(format!(
        "BCE(0.5) = {bce_half:.12}, N=2 BCE = {bce2:.6}, dice loss = {d:.6}"
    ))
}

fn metric_oracles() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0006);
    let g16 = GridSpec::square(16, 1.0).unwrap();
    for case in 0..100 {
        let density = rng.random_range(0.0..1.0);
        let mut draw = || (0..256).map(|_| rng.random_bool(density)).collect::<Vec<bool>>();
        let (p, t) = (draw(), draw());
        let c = confusion(
            &OccupancyMap {
                grid: g16,
                cells: p.clone(),
            },
            &OccupancyMap {
                grid: g16,
                cells: t.clone(),
            },
        )
        .unwrap();
        let naive = oracles::confusion_counts(&p, &t, 16, 16);
        ensure((c.tp, c.fp, c.fn_, c.tn) == naive, || {
            format!("confusion case {case}: {c:?} vs {naive:?}")
        })?;
    }

    let mut worst = 0.0f64;
    for case in 0..20 {
        let a: Vec<f64> = (0..1024).map(|_| rng.random()).collect();
        let b: Vec<f64> = (0..1024).map(|_| rng.random()).collect();
        let fast = ssim(&a, &b, 32, 32, &SsimParams::default()).unwrap();
        let slow = oracles::ssim_direct(&a, &b, 32, 32);
        worst = worst.max((fast - slow).abs());
        ensure(worst <= 1e-6, || format!("ssim case {case}: {fast} vs {slow}"))?;
    }

    let constant = ssim(&[0.2; 1024], &[0.8; 1024], 32, 32, &SsimParams::default()).unwrap();
    ensure((constant - 0.4707).abs() <= 1e-3, || {
        format!("constant SSIM = {constant}")
    })?;
    Ok(format!(
        "100 confusion pairs exact, SSIM max error {worst:.1e}, constant SSIM {constant:.4}"
    ))
}

fn ablation() -> Check {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for (dir, extra) in dirs.iter().zip([None, Some("--no-decay")]) {
        let out = dir.path().to_str().unwrap();
        let mut args = vec![
            "generate",
            "--experiment",
            "3",
            "--train",
            "16",
            "--val",
            "4",
            "--test",
            "4",
        ];
        args.extend(["--seed", "77", "--out", out]);
        args.extend(extra);
        let o = fovmap(&args);
        ensure(o.status.success(), || String::from_utf8_lossy(&o.stderr).into_owned())?;
    }
    let roots: Vec<_> = dirs.iter().map(|d| d.path().join("exp3")).collect();
    let manifest = read_manifest(&roots[0].join("manifest.json")).unwrap();
    ensure(manifest.samples.len() == 24, || {
        format!("{} samples", manifest.samples.len())
    })?;
    let mut lit = 0;
    for s in &manifest.samples {
        let load = |root: &Path| GrayImage::decode_png(&fs::read(root.join(&s.input.path)).unwrap()).unwrap();
        let (on, off) = (load(&roots[0]), load(&roots[1]));
        for (i, (&a, &b)) in on.pixels.iter().zip(&off.pixels).enumerate() {
            ensure((a == 255) == (b == 255), || {
                format!("{}: support differs at pixel {i}", s.id())
            })?;
            ensure(byte_to_recency(b) >= byte_to_recency(a), || {
                format!("{}: decay-off value below decay-on at pixel {i}", s.id())
            })?;
            lit += usize::from(a != 255);
        }
    }
    Ok(format!(
        "24 samples, {lit} supported pixels, equal support and dominance"
    ))
}

fn format_round_trip() -> Check {
    let image = GrayImage {
        width: 16,
        height: 16,
        pixels: (0..=255u8).collect(),
    };
    let back = GrayImage::decode_png(&image.encode_png().unwrap()).unwrap();
    ensure(back == image, || "256-byte image did not round trip".into())?;

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = fovmap(&[
        "generate",
        "--experiment",
        "2",
        "--train",
        "4",
        "--val",
        "2",
        "--test",
        "2",
        "--seed",
        "5",
        "--out",
        out,
    ]);
    ensure(o.status.success(), || String::from_utf8_lossy(&o.stderr).into_owned())?;
    let root = dir.path().join("exp2");
    let report = validate_dataset(&root.join("manifest.json")).unwrap();
    ensure(report.is_valid(), || {
        format!("fresh set invalid: {:?}", report.violations)
    })?;
    let cli_ok = fovmap(&["validate", "--dataset", root.to_str().unwrap()]);
    ensure(cli_ok.status.code() == Some(0), || {
        "validate exit code on fresh set".into()
    })?;

    let victim = root.join("train/3_input.png");
    let mut bytes = fs::read(&victim).unwrap();
    let at = bytes.len() / 2;
    bytes[at] = !bytes[at];
    fs::write(&victim, bytes).unwrap();
    let o = fovmap(&["validate", "--dataset", root.to_str().unwrap()]);
    let text = String::from_utf8_lossy(&o.stdout);
    ensure(o.status.code() == Some(1), || {
        format!("exit {:?} after tampering", o.status.code())
    })?;
    ensure(text.contains("[train/3]"), || {
        format!("report does not name the sample:\n{text}")
    })?;
    Ok("256 bytes lossless; fresh set valid; tampered train/3 named".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("ray-cast oracle", ray_cast_oracle),
        ("projection oracle", projection_oracle),
        ("fold-order invariance", fold_order_invariance),
        ("determinism", determinism),
        ("metric identities", metric_identities),
        ("metric oracles", metric_oracles),
        ("ablation property", ablation),
        ("format", format_round_trip),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS  {name:<22} {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name:<22} {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
