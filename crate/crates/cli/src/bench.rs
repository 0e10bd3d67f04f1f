//! Pooling throughput at forced valid fractions.
//!
//! Points are laid out like a real frustum (59 points share one pixel's
//! context) and placed uniformly inside the grid. The valid fraction is
//! forced through the depth score: exactly `round(f * n)` points get score 1,
//! the rest 0, and pooling runs with `T_D = 0.5`, `T_S = 0`. Each timed run
//! covers filter + index + pool. Numbers are the median of 11 runs after 3
//! warmups on a monotonic clock, so they compare across machines only
//! qualitatively.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sabev::geometry::{BevConfig, EgoPoint};
use sabev::pooling::{build_index, pool_fast, select_valid, PixelOrigin, PoolConfig, VirtualPoints};

use crate::error::{CliError, Result};

pub const WARMUPS: usize = 3;
pub const REPETITIONS: usize = 11;
const POINTS_PER_PIXEL: usize = 59;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub points: usize,
    pub fraction: f64,
    pub valid: usize,
    pub median: Duration,
    /// Input points per second.
    pub throughput: f64,
    /// Median of the `f = 1` run at the same size divided by this median.
    pub speedup: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub channels: usize,
    pub rows: Vec<BenchRow>,
}

pub fn median(samples: &mut [Duration]) -> Duration {
    samples.sort();
    samples[samples.len() / 2]
}

/// Median of `REPETITIONS` timed calls after `WARMUPS` untimed ones.
pub fn time_median<R>(mut f: impl FnMut() -> R) -> Duration {
    for _ in 0..WARMUPS {
        std::hint::black_box(f());
    }
    let mut samples: Vec<Duration> = (0..REPETITIONS)
        .map(|_| {
            let t = Instant::now();
            std::hint::black_box(f());
            t.elapsed()
        })
        .collect();
    median(&mut samples)
}

/// `n` points with exactly `round(fraction * n)` of them valid.
pub fn synthetic_points(n: usize, channels: usize, fraction: f64, bev: &BevConfig<f32>, seed: u64) -> VirtualPoints<f32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pixels = n.div_ceil(POINTS_PER_PIXEL);
    let mut v = VirtualPoints::with_capacity(channels, n, pixels);
    let mut keep = vec![false; n];
    let n_valid = ((fraction * n as f64).round() as usize).min(n);
    for i in sample(&mut rng, n, n_valid) {
        keep[i] = true;
    }
    let (x, y, z) = (bev.x_range(), bev.y_range(), bev.z_range());
    let mut ctx = vec![0.0f32; channels];
    let mut k = 0;
    for p in 0..pixels {
        ctx.iter_mut().for_each(|c| *c = rng.gen_range(-1.0..1.0));
        let px = v.add_pixel(PixelOrigin { camera: 0, row: 0, col: p as u32 }, 1.0, &ctx).expect("finite context");
        for b in 0..POINTS_PER_PIXEL.min(n - k) {
            let pos = EgoPoint::new(rng.gen_range(x.0..x.1), rng.gen_range(y.0..y.1), rng.gen_range(z.0..z.1));
            let score = if keep[k] { 1.0 } else { 0.0 };
            v.add_point(px, b as u32, pos, score).expect("valid point");
            k += 1;
        }
    }
    v
}

/// Times every `(n, f)` pair; `f = 1` is always included as the baseline.
pub fn bench_pooling(sizes: &[usize], fractions: &[f64], channels: usize, seed: u64) -> Result<BenchReport> {
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(CliError::Usage("point counts must be a nonempty list of positive integers".into()));
    }
    if let Some(f) = fractions.iter().find(|f| !(0.0..=1.0).contains(*f)) {
        return Err(CliError::Usage(format!("valid fraction {f} outside [0, 1]")));
    }
    let mut fr = vec![1.0];
    fr.extend(fractions.iter().copied().filter(|&f| f != 1.0));
    let bev = BevConfig::standard(channels)?;
    let cfg = PoolConfig::new(0.5, 0.0, bev)?;
    let mut rows = Vec::new();
    for &n in sizes {
        let mut baseline = None;
        for &f in &fr {
            let pts = synthetic_points(n, channels, f, &bev, seed);
            let mut valid_count = 0;
            let median = time_median(|| {
                let valid = select_valid(&pts, &cfg);
                valid_count = valid.len();
                pool_fast(&build_index(&valid, &bev), &pts, &bev).expect("fresh index")
            });
            let base = *baseline.get_or_insert(median);
            let secs = median.as_secs_f64().max(1e-12);
            rows.push(BenchRow {
                points: n,
                fraction: f,
                valid: valid_count,
                median,
                throughput: n as f64 / secs,
                speedup: base.as_secs_f64() / secs,
            });
        }
    }
    Ok(BenchReport { channels, rows })
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("points,fraction,valid,median_ms,points_per_s,speedup_vs_f1\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{:.4},{:.0},{:.3}",
                r.points,
                r.fraction,
                r.valid,
                r.median.as_secs_f64() * 1e3,
                r.throughput,
                r.speedup
            );
        }
        s
    }
}
