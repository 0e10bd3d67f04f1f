//! scene -> render -> score -> filter -> index -> pool -> (paste) -> export.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sabev::augment::{paste_batch, sample_paste_plan, PasteFrame};
use sabev::geometry::{Box3D, CameraRig};
use sabev::pooling::{build_index, pool_fast, pool_reference, select_valid, BevGrid, PointSource, VirtualPoints};
use sabev::scoring::{depth_loss, seg_labels_from_points, seg_loss, total_loss};
use sabev::synth::{render_views, sample_point_cloud, scene_points, RenderedView, SceneSpec};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

/// Seed offsets for the independent random streams of one run.
const CLOUD_STREAM: u64 = 0x636c_6f75_6400_0000;
const PASTE_STREAM: u64 = 0x7061_7374_6500_0000;

/// Wall time per named stage, in execution order.
#[derive(Debug, Clone, Default)]
pub struct Timings(pub Vec<(&'static str, Duration)>);

impl Timings {
    pub fn time<R>(&mut self, stage: &'static str, f: impl FnOnce() -> R) -> R {
        let t = Instant::now();
        let out = f();
        self.0.push((stage, t.elapsed()));
        out
    }
}

/// One rendered and scored frame.
#[derive(Debug, Clone)]
pub struct Frame {
    pub scene: SceneSpec<f32>,
    pub views: Vec<RenderedView<f32>>,
    pub points: VirtualPoints<f32>,
}

pub fn render_frame(cfg: &RunConfig, rig: &CameraRig<f32>, scene: &SceneSpec<f32>) -> Result<Vec<RenderedView<f32>>> {
    let bins = cfg.bins()?;
    let mut views = render_views(scene, rig, &bins, cfg.bev.channels)?;
    for v in &mut views {
        v.soften_depth(&bins, cfg.scene.depth_sigma as f32)?;
    }
    Ok(views)
}

/// Renders and scores frame `offset` of the configured batch.
pub fn build_frame(cfg: &RunConfig, offset: u64, timings: &mut Timings) -> Result<Frame> {
    let rig = cfg.rig()?;
    let bins = cfg.bins()?;
    let scene = timings.time("scene", || cfg.scene(offset))?;
    let views = timings.time("render", || render_frame(cfg, &rig, &scene))?;
    let points = timings.time("score", || scene_points(&views, &rig, &bins, None))?;
    Ok(Frame { scene, views, points })
}

/// Supervision losses of the oracle maps against point-cloud labels at the
/// coarse (stride 16) and fine (stride 8) scales. The detection term is 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossReport {
    pub depth_coarse: f64,
    pub semantic_coarse: f64,
    pub depth_fine: f64,
    pub semantic_fine: f64,
    pub total: f64,
}

pub fn loss_report(cfg: &RunConfig, scene: &SceneSpec<f32>) -> Result<LossReport> {
    let bins = cfg.bins()?;
    let seed = cfg.scene.seed ^ CLOUD_STREAM;
    let cloud = sample_point_cloud(
        scene,
        &mut ChaCha8Rng::seed_from_u64(seed),
        cfg.scene.cloud_points,
        cfg.scene.cloud_bg_ratio,
    )?;
    let scale = |stride: usize| -> Result<(f64, f64)> {
        let rig = cfg.rig()?.with_stride(stride)?;
        let views = render_frame(cfg, &rig, scene)?;
        let (mut d, mut s) = (0.0, 0.0);
        for (cam, view) in rig.cameras().iter().zip(&views) {
            let labels = seg_labels_from_points(&cloud.points, &scene.boxes, cam);
            d += depth_loss(&view.depth, &labels, &bins)?;
            s += seg_loss(&view.semantic, &labels)?;
        }
        Ok((d / rig.len() as f64, s / rig.len() as f64))
    };
    let (depth_coarse, semantic_coarse) = scale(16)?;
    let (depth_fine, semantic_fine) = scale(8)?;
    let total = total_loss(0.0, semantic_coarse, semantic_fine, depth_coarse, depth_fine, &cfg.loss_weights()?);
    Ok(LossReport { depth_coarse, semantic_coarse, depth_fine, semantic_fine, total })
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub grid: BevGrid<f32>,
    pub targets: Vec<Box3D<f32>>,
    pub scene: SceneSpec<f32>,
    pub points: usize,
    pub valid: usize,
    pub valid_fraction: f64,
    /// Largest relative difference between fast and reference pooling.
    pub verify_max_rel: Option<f64>,
    pub pastes: usize,
    pub losses: LossReport,
    pub timings: Timings,
}

impl PipelineOutput {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "points: {}", self.points);
        let _ = writeln!(s, "valid points: {}", self.valid);
        let _ = writeln!(s, "valid fraction: {:.6}%", 100.0 * self.valid_fraction);
        let _ = writeln!(s, "nonzero pillars: {}", self.grid.nonzero_pillars().len());
        let _ = writeln!(s, "boxes: {}", self.scene.boxes.len());
        let _ = writeln!(s, "targets: {} ({} pasted frames)", self.targets.len(), self.pastes);
        if let Some(r) = self.verify_max_rel {
            let _ = writeln!(s, "verify: fast vs reference max relative difference {r:.3e}");
        }
        let l = &self.losses;
        let _ = writeln!(
            s,
            "losses: depth16 {:.6} seg16 {:.6} depth8 {:.6} seg8 {:.6} total {:.6} (detection term 0)",
            l.depth_coarse, l.semantic_coarse, l.depth_fine, l.semantic_fine, l.total
        );
        for (stage, d) in &self.timings.0 {
            let _ = writeln!(s, "time {stage}: {:.3} ms", d.as_secs_f64() * 1e3);
        }
        s
    }
}

/// Largest elementwise relative difference, with a 1e-30 denominator floor.
pub fn max_rel_diff(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let (x, y) = (x as f64, y as f64);
            (x - y).abs() / x.abs().max(y.abs()).max(1e-30)
        })
        .fold(0.0, f64::max)
}

pub fn run_pipeline(cfg: &RunConfig, verify: bool) -> Result<PipelineOutput> {
    let mut timings = Timings::default();
    let pool_cfg = cfg.pool_config()?;
    let bev = *pool_cfg.bev();
    let frame = build_frame(cfg, 0, &mut timings)?;
    let valid = timings.time("filter", || select_valid(&frame.points, &pool_cfg));
    let index = timings.time("index", || build_index(&valid, &bev));
    let mut grid = timings.time("pool", || pool_fast(&index, &frame.points, &bev))?;

    let verify_max_rel = if verify {
        let reference = timings.time("verify", || pool_reference(&frame.points, &valid, &bev))?;
        let r = max_rel_diff(grid.data(), reference.data());
        if r.is_nan() || r > 1e-6 {
            return Err(CliError::Invariant(format!("fast pooling deviates from the reference by {r:e} (relative)")));
        }
        Some(r)
    } else {
        None
    };

    let mut targets = frame.scene.boxes.clone();
    let mut pastes = 0;
    if cfg.paste.enabled {
        let others: Vec<Frame> =
            (1..cfg.paste.batch_size as u64).map(|k| build_frame(cfg, k, &mut timings)).collect::<Result<_>>()?;
        let frames: Vec<PasteFrame<f32>> = std::iter::once(&frame)
            .chain(&others)
            .map(|f| PasteFrame { points: f.points.clone(), targets: f.scene.boxes.clone() })
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.scene.seed ^ PASTE_STREAM);
        let ranges = cfg.bda_ranges();
        let plan = sample_paste_plan::<f32, _>(&mut rng, frames.len(), cfg.paste.expected_pastes, ranges.as_ref())?;
        let mut out = timings.time("paste", || paste_batch(&frames, &plan, &pool_cfg))?;
        let (g, t) = out.swap_remove(0);
        let expected: usize =
            frame.scene.boxes.len() + plan.entries[0].iter().map(|e| frames[e.source].targets.len()).sum::<usize>();
        if t.len() != expected {
            return Err(CliError::Invariant(format!("pasted target count {} != {expected}", t.len())));
        }
        pastes = plan.entries[0].len();
        grid = g;
        targets = t;
    }

    let losses = timings.time("losses", || loss_report(cfg, &frame.scene))?;
    Ok(PipelineOutput {
        points: frame.points.len(),
        valid: valid.len(),
        valid_fraction: valid.fraction().unwrap_or(0.0),
        grid,
        targets,
        scene: frame.scene,
        verify_max_rel,
        pastes,
        losses,
        timings,
    })
}
