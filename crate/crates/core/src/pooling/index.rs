use rayon::prelude::*;

use crate::error::{mismatch, Error, Result};
use crate::geometry::BevConfig;
use crate::scalar::Real;

use super::filter::{filter_gate, PoolConfig, ValidSet};
use super::grid::BevGrid;
use super::points::PointSource;

/// Contiguous run of `order` belonging to one pillar.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interval {
    pub pillar: u32,
    pub start: u32,
    pub len: u32,
}

const EMPTY: u32 = u32::MAX;

/// Valid points stably sorted by pillar, with one interval per occupied pillar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolingIndex {
    source_len: usize,
    order: Vec<u32>,
    intervals: Vec<Interval>,
    slot: Vec<u32>,
}

impl PoolingIndex {
    /// Point indices (into the source set) in pillar order.
    pub fn order(&self) -> &[u32] {
        &self.order
    }

    /// Occupied pillars in strictly increasing id order.
    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn source_len(&self) -> usize {
        self.source_len
    }

    pub fn n_pillars(&self) -> usize {
        self.slot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

/// Counting sort of the valid set by flattened pillar id. Stable, so points
/// sharing a pillar keep their ascending source order.
pub fn build_index<T: Real>(valid: &ValidSet, bev: &BevConfig<T>) -> PoolingIndex {
    let n_pillars = bev.n_pillars();
    let mut counts = vec![0u32; n_pillars];
    for &p in &valid.pillars {
        counts[p as usize] += 1;
    }
    let mut slot = vec![EMPTY; n_pillars];
    let mut intervals = Vec::new();
    let mut cursor = vec![0u32; n_pillars];
    let mut start = 0u32;
    for (p, &c) in counts.iter().enumerate() {
        if c > 0 {
            slot[p] = intervals.len() as u32;
            intervals.push(Interval { pillar: p as u32, start, len: c });
            cursor[p] = start;
            start += c;
        }
    }
    let mut order = vec![0u32; valid.indices.len()];
    for (&i, &p) in valid.indices.iter().zip(&valid.pillars) {
        let c = &mut cursor[p as usize];
        order[*c as usize] = i;
        *c += 1;
    }
    PoolingIndex { source_len: valid.source_len, order, intervals, slot }
}

fn check_channels<T: Real, P: PointSource<T>>(points: &P, bev: &BevConfig<T>) -> Result<()> {
    if points.channels() != bev.channels() {
        return Err(mismatch("channels", bev.channels(), points.channels()));
    }
    Ok(())
}

/// Reduces each pillar's interval independently. Pillars are disjoint, so
/// the loop runs in parallel without synchronization.
pub fn pool_fast<T: Real, P: PointSource<T>>(
    index: &PoolingIndex,
    points: &P,
    bev: &BevConfig<T>,
) -> Result<BevGrid<T>> {
    if index.source_len != points.len() {
        return Err(Error::StaleIndex { built: index.source_len, actual: points.len() });
    }
    if index.slot.len() != bev.n_pillars() {
        return Err(mismatch("index pillars", bev.n_pillars(), index.slot.len()));
    }
    check_channels(points, bev)?;
    let c = bev.channels();
    let mut grid = BevGrid::for_config(bev);
    if index.order.is_empty() {
        return Ok(grid);
    }
    grid.data_mut()
        .par_chunks_mut(c)
        .with_min_len(64)
        .zip(index.slot.par_iter())
        .filter(|(_, &s)| s != EMPTY)
        .for_each_init(
            || vec![0f64; c],
            |acc, (out, &s)| {
                let iv = index.intervals[s as usize];
                acc.fill(0.0);
                for &i in &index.order[iv.start as usize..(iv.start + iv.len) as usize] {
                    let i = i as usize;
                    let alpha = points.depth_score(i).widen();
                    for (a, &f) in acc.iter_mut().zip(points.context(i)) {
                        *a += alpha * f.widen();
                    }
                }
                for (o, &a) in out.iter_mut().zip(acc.iter()) {
                    *o = T::lit(a);
                }
            },
        );
    Ok(grid)
}

fn scatter_reference<T: Real, P: PointSource<T>>(
    points: &P,
    bev: &BevConfig<T>,
    members: impl Iterator<Item = (usize, f64)>,
) -> BevGrid<T> {
    let c = bev.channels();
    let mut acc = vec![0f64; bev.n_pillars() * c];
    for (i, weight) in members {
        let Some(p) = bev.flat_pillar_of(&points.position(i)) else {
            continue;
        };
        let alpha = points.depth_score(i).widen();
        let dst = &mut acc[p * c..(p + 1) * c];
        for (a, &f) in dst.iter_mut().zip(points.context(i)) {
            *a += weight * (alpha * f.widen());
        }
    }
    let mut grid = BevGrid::for_config(bev);
    for (o, a) in grid.data_mut().iter_mut().zip(acc) {
        *o = T::lit(a);
    }
    grid
}

/// Dense scatter of the valid points in ascending index order. Pillars are
/// recomputed from positions; members outside the grid are skipped.
pub fn pool_reference<T: Real, P: PointSource<T>>(
    points: &P,
    valid: &ValidSet,
    bev: &BevConfig<T>,
) -> Result<BevGrid<T>> {
    if valid.source_len != points.len() {
        return Err(Error::StaleIndex { built: valid.source_len, actual: points.len() });
    }
    check_channels(points, bev)?;
    Ok(scatter_reference(points, bev, valid.indices.iter().map(|&i| (i as usize, 1.0))))
}

/// Pools every in-range point with its feature multiplied by the two filter
/// gates, i.e. filtered points contribute an explicit zero.
pub fn pool_gated_reference<T: Real, P: PointSource<T>>(points: &P, cfg: &PoolConfig<T>) -> Result<BevGrid<T>> {
    check_channels(points, cfg.bev())?;
    let gates = (0..points.len()).map(|i| {
        let g = filter_gate(points.depth_score(i), cfg.depth_threshold())
            * filter_gate(points.semantic_score(i), cfg.semantic_threshold());
        (i, g as f64)
    });
    Ok(scatter_reference(points, cfg.bev(), gates))
}
