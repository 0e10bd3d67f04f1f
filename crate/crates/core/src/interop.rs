//! Flat-array entry points for foreign callers (e.g. array-based ML
//! pipelines). Inputs are borrowed contiguous slices; the context features
//! are pooled in place without copying. Every shape or domain violation
//! reports the offending field by name.

use crate::augment::bev_paste;
use crate::error::{bad_field, mismatch, Result};
use crate::geometry::{BevConfig, Box3D, EgoPoint};
use crate::pooling::{sa_bev_pool, BevGrid, PointSource, PoolConfig};
use crate::scalar::Real;

/// Reals per target row: center x, y, z, size l, w, h, yaw, class id.
pub const TARGET_WIDTH: usize = 8;

/// Borrowed point arrays plus pooling parameters.
#[derive(Debug, Clone, Copy)]
pub struct ArrayPoolRequest<'a, T> {
    /// `n x 3`, row-major ego-frame positions.
    pub positions: &'a [T],
    pub depth_scores: &'a [T],
    pub semantic_scores: &'a [T],
    /// `n x channels`, row-major.
    pub contexts: &'a [T],
    pub channels: usize,
    pub depth_threshold: T,
    pub semantic_threshold: T,
    pub bev: &'a BevConfig<T>,
}

/// Pooled grid, laid out `[iy][ix][channel]`, and the valid fraction
/// (an error when there are no points).
#[derive(Debug)]
pub struct ArrayPoolOutput<T> {
    pub grid: BevGrid<T>,
    pub valid_fraction: Result<f64>,
}

/// Validated point view over the request's slices.
#[derive(Debug, Clone, Copy)]
pub struct ArrayPoints<'a, T> {
    req: ArrayPoolRequest<'a, T>,
    n: usize,
}

impl<'a, T: Real> ArrayPoints<'a, T> {
    pub fn new(req: ArrayPoolRequest<'a, T>) -> Result<Self> {
        if !req.positions.len().is_multiple_of(3) {
            return Err(mismatch("positions", "a multiple of 3", req.positions.len()));
        }
        let n = req.positions.len() / 3;
        if req.depth_scores.len() != n {
            return Err(mismatch("depth_scores", n, req.depth_scores.len()));
        }
        if req.semantic_scores.len() != n {
            return Err(mismatch("semantic_scores", n, req.semantic_scores.len()));
        }
        if req.channels == 0 {
            return Err(bad_field("channels", "must be positive"));
        }
        if req.channels != req.bev.channels() {
            return Err(mismatch("channels", req.bev.channels(), req.channels));
        }
        if req.contexts.len() != n * req.channels {
            return Err(mismatch("contexts", n * req.channels, req.contexts.len()));
        }
        for (field, data) in [
            ("positions", req.positions),
            ("depth_scores", req.depth_scores),
            ("semantic_scores", req.semantic_scores),
            ("contexts", req.contexts),
        ] {
            if let Some(k) = data.iter().position(|v| !v.is_finite()) {
                return Err(bad_field(field, format!("non-finite value at flat index {k}")));
            }
        }
        if !req.depth_threshold.is_finite() {
            return Err(bad_field("depth_threshold", "must be finite"));
        }
        if !req.semantic_threshold.is_finite() {
            return Err(bad_field("semantic_threshold", "must be finite"));
        }
        Ok(Self { req, n })
    }
}

impl<T: Real> PointSource<T> for ArrayPoints<'_, T> {
    #[inline]
    fn len(&self) -> usize {
        self.n
    }

    #[inline]
    fn channels(&self) -> usize {
        self.req.channels
    }

    #[inline]
    fn position(&self, i: usize) -> EgoPoint<T> {
        let p = &self.req.positions[3 * i..3 * i + 3];
        EgoPoint::new(p[0], p[1], p[2])
    }

    #[inline]
    fn depth_score(&self, i: usize) -> T {
        self.req.depth_scores[i]
    }

    #[inline]
    fn semantic_score(&self, i: usize) -> T {
        self.req.semantic_scores[i]
    }

    #[inline]
    fn context(&self, i: usize) -> &[T] {
        let c = self.req.channels;
        &self.req.contexts[i * c..(i + 1) * c]
    }
}

/// Filters and pools flat arrays through the fast path.
pub fn pool_arrays<T: Real>(req: ArrayPoolRequest<'_, T>) -> Result<ArrayPoolOutput<T>> {
    let points = ArrayPoints::new(req)?;
    let cfg = PoolConfig::new(req.depth_threshold, req.semantic_threshold, *req.bev)?;
    let (grid, valid) = sa_bev_pool(&points, &cfg)?;
    let valid_fraction = valid
        .fraction()
        .ok_or_else(|| bad_field("positions", "valid fraction is undefined for zero points"));
    Ok(ArrayPoolOutput { grid, valid_fraction })
}

fn parse_targets<T: Real>(field: &'static str, rows: &[T]) -> Result<Vec<Box3D<T>>> {
    if !rows.len().is_multiple_of(TARGET_WIDTH) {
        return Err(mismatch(field, format!("a multiple of {TARGET_WIDTH}"), rows.len()));
    }
    rows.chunks(TARGET_WIDTH)
        .enumerate()
        .map(|(k, r)| {
            let class = r[7]
                .to_u32()
                .filter(|&c| T::lit(c as f64) == r[7])
                .ok_or_else(|| bad_field(field, format!("row {k}: class id {} is not a non-negative integer", r[7])))?;
            Box3D::new(EgoPoint::new(r[0], r[1], r[2]), [r[3], r[4], r[5]], r[6], class)
                .map_err(|e| bad_field(field, format!("row {k}: {e}")))
        })
        .collect()
}

fn target_rows<T: Real>(boxes: &[Box3D<T>]) -> Vec<T> {
    boxes
        .iter()
        .flat_map(|b| {
            [b.center.x, b.center.y, b.center.z, b.size[0], b.size[1], b.size[2], b.yaw, T::lit(b.class as f64)]
        })
        .collect()
}

/// Flat grids of shape `dims = (nx, ny, channels)` and `n x 8` target rows.
/// Returns the summed grid and concatenated targets.
pub fn paste_arrays<T: Real>(
    dims: (usize, usize, usize),
    grid_a: &[T],
    grid_b: &[T],
    targets_a: &[T],
    targets_b: &[T],
) -> Result<(Vec<T>, Vec<T>)> {
    let (nx, ny, c) = dims;
    let a = BevGrid::from_vec(nx, ny, c, grid_a.to_vec()).map_err(|_| mismatch("grid_a", nx * ny * c, grid_a.len()))?;
    let b = BevGrid::from_vec(nx, ny, c, grid_b.to_vec()).map_err(|_| mismatch("grid_b", nx * ny * c, grid_b.len()))?;
    let (ta, tb) = (parse_targets("targets_a", targets_a)?, parse_targets("targets_b", targets_b)?);
    let (grid, targets) = bev_paste(&a, &b, &ta, &tb)?;
    Ok((grid.into_data(), target_rows(&targets)))
}
