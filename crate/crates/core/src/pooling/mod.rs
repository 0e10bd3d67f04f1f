//! Semantic-aware BEV pooling.
//!
//! Virtual points carry a depth score `alpha` (per depth bin), a semantic
//! score `beta` (per pixel, shared by all bins of that pixel) and a context
//! feature `c` (per pixel). A point contributes `alpha * c` to its pillar iff
//! `alpha >= T_D`, `beta >= T_S`, and it lies inside the grid.
//!
//! Two pooling paths produce identical grids:
//!
//! * [`pool_reference`] walks the valid points in ascending index order and
//!   scatters into a dense accumulator. Single-threaded; this is the oracle.
//! * [`build_index`] + [`pool_fast`] counting-sort the valid points by pillar
//!   (stable, so per-pillar order is unchanged) and reduce each pillar's
//!   contiguous interval independently, in parallel.
//!
//! Both accumulate in `f64` and round once on output, so with the same
//! per-pillar order the results match bit for bit.

mod filter;
mod grid;
mod index;
mod points;

pub use filter::{
    filter_gate, select_in_range, select_valid, valid_fraction, PoolConfig, ValidSet,
    DEFAULT_DEPTH_THRESHOLD, DEFAULT_SEMANTIC_THRESHOLD,
};
pub use grid::BevGrid;
pub use index::{build_index, pool_fast, pool_gated_reference, pool_reference, Interval, PoolingIndex};
pub use points::{score_camera, score_points, PixelOrigin, PointSource, VirtualPoint, VirtualPoints};

use crate::error::Result;
use crate::scalar::Real;

/// Filter, index and pool in one call.
pub fn sa_bev_pool<T: Real, P: PointSource<T>>(points: &P, cfg: &PoolConfig<T>) -> Result<(BevGrid<T>, ValidSet)> {
    let valid = select_valid(points, cfg);
    let index = build_index(&valid, cfg.bev());
    let grid = pool_fast(&index, points, cfg.bev())?;
    Ok((grid, valid))
}
