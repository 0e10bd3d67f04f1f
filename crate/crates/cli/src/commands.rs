//! Subcommand bodies. Each writes into an output directory and returns the
//! text printed on stdout.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sabev::augment::{apply_bda_points, bev_paste, paste_batch, sample_bda, sample_paste_plan, BdaRanges, PasteFrame};
use sabev::pooling::{build_index, pool_fast, pool_gated_reference, pool_reference, select_valid};

use crate::bench::bench_pooling;
use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::export::{encode_pgm, export_grid, gray_scale, render_norm_image, write_file};
use crate::pipeline::{build_frame, max_rel_diff, run_pipeline, Timings};
use crate::sweep::sweep_thresholds;

pub const DEFAULT_DEPTH_LADDER: &[f64] = &[0.0, 0.0085, 0.05, 0.2];
pub const DEFAULT_SEMANTIC_LADDER: &[f64] = &[0.0, 0.1, 0.25, 0.5];

fn prepare_dir(dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    Ok(dir.to_path_buf())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    write_file(path, text.as_bytes())
}

/// Full pipeline; writes `grid.sabg`, `norm.pgm`, `summary.txt` and a
/// replayable `config.toml` with the scene pinned.
pub fn pool(cfg: &RunConfig, out: &Path, verify: bool) -> Result<String> {
    let dir = prepare_dir(out)?;
    let result = run_pipeline(cfg, verify)?;
    export_grid(&result.grid, &dir.join("grid.sabg"))?;
    render_norm_image(&result.grid, &dir.join("norm.pgm"))?;
    let summary = result.summary();
    write_text(&dir.join("summary.txt"), &summary)?;
    write_text(&dir.join("config.toml"), &cfg.pinned(&result.scene).to_toml())?;
    Ok(summary)
}

/// Threshold cross product on the configured frame; writes `sweep.csv`
/// (deterministic) and `sweep_timing.csv`.
pub fn sweep(cfg: &RunConfig, out: &Path, t_d: &[f64], t_s: &[f64]) -> Result<String> {
    let dir = prepare_dir(out)?;
    let frame = build_frame(cfg, 0, &mut Timings::default())?;
    let report = sweep_thresholds(&frame.points, &cfg.pool_config()?, t_d, t_s)?;
    let csv = report.to_csv();
    write_text(&dir.join("sweep.csv"), &csv)?;
    write_text(&dir.join("sweep_timing.csv"), &report.timing_csv())?;
    Ok(csv)
}

/// Pastes across a batch of seeded frames; writes the plan and every
/// frame's pasted grid and norm image.
pub fn paste_demo(cfg: &RunConfig, out: &Path) -> Result<String> {
    let dir = prepare_dir(out)?;
    let pool_cfg = cfg.pool_config()?;
    let mut timings = Timings::default();
    let frames: Vec<PasteFrame<f32>> = (0..cfg.paste.batch_size as u64)
        .map(|k| {
            build_frame(cfg, k, &mut timings).map(|f| PasteFrame { points: f.points, targets: f.scene.boxes })
        })
        .collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.scene.seed);
    let plan = sample_paste_plan::<f32, _>(&mut rng, frames.len(), cfg.paste.expected_pastes, cfg.bda_ranges().as_ref())?;
    let results = paste_batch(&frames, &plan, &pool_cfg)?;
    write_text(&dir.join("plan.txt"), &plan.to_string())?;
    let mut report = plan.to_string();
    for (i, (grid, targets)) in results.iter().enumerate() {
        let pasted: usize = plan.entries[i].iter().map(|e| frames[e.source].targets.len()).sum();
        let own = frames[i].targets.len();
        if targets.len() != own + pasted {
            return Err(CliError::Invariant(format!(
                "frame {i}: {} targets, expected {own} + {pasted}",
                targets.len()
            )));
        }
        export_grid(grid, &dir.join(format!("frame{i}.sabg")))?;
        render_norm_image(grid, &dir.join(format!("frame{i}_norm.pgm")))?;
        let _ = writeln!(report, "frame {i}: {own} own + {pasted} pasted = {} targets", targets.len());
    }
    write_text(&dir.join("summary.txt"), &report)?;
    Ok(report)
}

/// Per-camera oracle semantic masks and hit-depth images.
pub fn render(cfg: &RunConfig, out: &Path) -> Result<String> {
    let dir = prepare_dir(out)?;
    let rig = cfg.rig()?;
    let frame = build_frame(cfg, 0, &mut Timings::default())?;
    let mut report = String::new();
    for (k, (cam, view)) in rig.cameras().iter().zip(&frame.views).enumerate() {
        let (h, w) = cam.feature_shape();
        let mask: Vec<u8> = view.hit_box.iter().map(|b| if b.is_some() { 255 } else { 0 }).collect();
        write_file(&dir.join(format!("cam{k}_semantic.pgm")), &encode_pgm(w, h, &mask))?;
        // nearer is brighter
        let max = cfg.bins()?.max() as f64;
        let near: Vec<f64> = view.hit_depth.iter().map(|&d| (max - d as f64).max(0.0)).collect();
        write_file(&dir.join(format!("cam{k}_depth.pgm")), &encode_pgm(w, h, &gray_scale(&near)))?;
        let _ = writeln!(report, "camera {k}: {w}x{h} cells, {} foreground", view.foreground_cells());
    }
    write_text(&dir.join("config.toml"), &cfg.pinned(&frame.scene).to_toml())?;
    Ok(report)
}

pub fn bench(out: &Path, sizes: &[usize], fractions: &[f64], channels: usize, seed: u64) -> Result<String> {
    let dir = prepare_dir(out)?;
    let mut text = String::new();
    if cfg!(debug_assertions) {
        text.push_str("warning: unoptimized build; timings are not representative\n");
    }
    let report = bench_pooling(sizes, fractions, channels, seed)?;
    let csv = report.to_csv();
    write_text(&dir.join("bench.csv"), &csv)?;
    text.push_str(&csv);
    Ok(text)
}

/// Runs the pooling and paste invariants on the configured frames.
pub fn verify(cfg: &RunConfig, out: &Path) -> Result<String> {
    let dir = prepare_dir(out)?;
    let pool_cfg = cfg.pool_config()?;
    let bev = *pool_cfg.bev();
    let mut timings = Timings::default();
    let a = build_frame(cfg, 0, &mut timings)?;
    let b = build_frame(cfg, 1, &mut timings)?;
    let pool = |p| -> Result<_> {
        let valid = select_valid(p, &pool_cfg);
        Ok(pool_fast(&build_index(&valid, &bev), p, &bev)?)
    };

    let mut checks: Vec<(&str, bool, String)> = Vec::new();

    let valid = select_valid(&a.points, &pool_cfg);
    let fast = pool_fast(&build_index(&valid, &bev), &a.points, &bev)?;
    let reference = pool_reference(&a.points, &valid, &bev)?;
    checks.push(("fast equals reference", fast == reference, format!("{} valid points", valid.len())));

    let gated = pool_gated_reference(&a.points, &pool_cfg)?;
    let gap = fast.data().iter().zip(gated.data()).map(|(x, y)| (x - y).abs() as f64).fold(0.0, f64::max);
    checks.push(("zeroing equals removal", gap <= 1e-9, format!("max abs difference {gap:e}")));

    let mono = sweep_thresholds(&a.points, &pool_cfg, DEFAULT_DEPTH_LADDER, DEFAULT_SEMANTIC_LADDER);
    checks.push(("sweep monotone", mono.is_ok(), mono.err().map_or(String::new(), |e| e.to_string())));

    let params = sample_bda::<f32, _>(&mut ChaCha8Rng::seed_from_u64(cfg.scene.seed), &BdaRanges::default());
    let b_aug = apply_bda_points(&b.points, &params);
    let mut union = a.points.clone();
    union.extend_from(&b_aug)?;
    let (sum, targets) = bev_paste(&pool(&a.points)?, &pool(&b_aug)?, &a.scene.boxes, &b.scene.boxes)?;
    let r = max_rel_diff(sum.data(), pool(&union)?.data());
    checks.push(("paste additivity", r <= 1e-6, format!("max relative difference {r:e}")));
    let n = a.scene.boxes.len() + b.scene.boxes.len();
    checks.push(("paste target count", targets.len() == n, format!("{} targets", targets.len())));

    let mut text = String::new();
    for (name, ok, detail) in &checks {
        let _ = writeln!(text, "{} {name}: {detail}", if *ok { "PASS" } else { "FAIL" });
    }
    write_text(&dir.join("verify.txt"), &text)?;
    if checks.iter().any(|c| !c.1) {
        return Err(CliError::Invariant(text));
    }
    Ok(text)
}
