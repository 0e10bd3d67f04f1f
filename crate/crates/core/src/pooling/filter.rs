use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::geometry::BevConfig;
use crate::scalar::Real;

use super::points::PointSource;

pub const DEFAULT_DEPTH_THRESHOLD: f64 = 0.0085;
pub const DEFAULT_SEMANTIC_THRESHOLD: f64 = 0.25;

/// Step filter: 0 below the threshold, 1 at or above it.
#[inline]
pub fn filter_gate<T: Real>(x: T, threshold: T) -> u8 {
    if x < threshold {
        0
    } else {
        1
    }
}

/// Depth/semantic thresholds plus the target grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoolConfig<T> {
    depth_threshold: T,
    semantic_threshold: T,
    bev: BevConfig<T>,
}

impl<T: Real> PoolConfig<T> {
    pub fn new(depth_threshold: T, semantic_threshold: T, bev: BevConfig<T>) -> Result<Self> {
        if !depth_threshold.is_finite() || !semantic_threshold.is_finite() {
            return Err(invalid("thresholds must be finite"));
        }
        Ok(Self { depth_threshold, semantic_threshold, bev })
    }

    /// `T_D = 0.0085`, `T_S = 0.25`.
    pub fn with_defaults(bev: BevConfig<T>) -> Self {
        Self {
            depth_threshold: T::lit(DEFAULT_DEPTH_THRESHOLD),
            semantic_threshold: T::lit(DEFAULT_SEMANTIC_THRESHOLD),
            bev,
        }
    }

    /// Both thresholds zero: every in-range point is kept.
    pub fn unfiltered(bev: BevConfig<T>) -> Self {
        Self { depth_threshold: T::zero(), semantic_threshold: T::zero(), bev }
    }

    pub fn depth_threshold(&self) -> T {
        self.depth_threshold
    }

    pub fn semantic_threshold(&self) -> T {
        self.semantic_threshold
    }

    pub fn bev(&self) -> &BevConfig<T> {
        &self.bev
    }

    pub fn with_thresholds(&self, depth: T, semantic: T) -> Result<Self> {
        Self::new(depth, semantic, self.bev)
    }

    /// Score part of the filter, without the range test.
    #[inline]
    pub fn passes_scores(&self, depth_score: T, semantic_score: T) -> bool {
        filter_gate(depth_score, self.depth_threshold) & filter_gate(semantic_score, self.semantic_threshold) == 1
    }
}

/// Order-preserving subset of a point set, with each member's flattened
/// pillar id.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidSet {
    pub(crate) source_len: usize,
    pub(crate) indices: Vec<u32>,
    pub(crate) pillars: Vec<u32>,
    pub(crate) out_of_range: usize,
}

impl ValidSet {
    /// Builds a set from explicit members; `indices` must be strictly
    /// increasing and below `source_len`.
    pub fn from_parts(source_len: usize, indices: Vec<u32>, pillars: Vec<u32>) -> Result<Self> {
        if indices.len() != pillars.len() {
            return Err(crate::error::mismatch("pillars", indices.len(), pillars.len()));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) || indices.last().is_some_and(|&i| i as usize >= source_len) {
            return Err(invalid("indices must be strictly increasing and in bounds"));
        }
        Ok(Self { source_len, indices, pillars, out_of_range: 0 })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Point count of the set this was selected from.
    pub fn source_len(&self) -> usize {
        self.source_len
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn pillars(&self) -> &[u32] {
        &self.pillars
    }

    /// Points that passed both thresholds but fell outside the grid.
    pub fn out_of_range(&self) -> usize {
        self.out_of_range
    }

    pub fn fraction(&self) -> Option<f64> {
        (self.source_len > 0).then(|| self.indices.len() as f64 / self.source_len as f64)
    }
}

const CHUNK: usize = 1 << 15;

fn select_with<T: Real, P: PointSource<T>>(
    points: &P,
    bev: &BevConfig<T>,
    keep: impl Fn(usize) -> bool + Sync,
) -> ValidSet {
    let n = points.len();
    assert!(n <= u32::MAX as usize, "point count exceeds u32 index space");
    let nx = bev.nx();
    let parts: Vec<(Vec<u32>, Vec<u32>, usize)> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|k| {
            let (mut idx, mut pil, mut oor) = (Vec::new(), Vec::new(), 0usize);
            for i in k * CHUNK..((k + 1) * CHUNK).min(n) {
                if !keep(i) {
                    continue;
                }
                match bev.pillar_of(&points.position(i)) {
                    Some(p) => {
                        idx.push(i as u32);
                        pil.push(p.flat(nx) as u32);
                    }
                    None => oor += 1,
                }
            }
            (idx, pil, oor)
        })
        .collect();
    let total = parts.iter().map(|p| p.0.len()).sum();
    let mut set = ValidSet {
        source_len: n,
        indices: Vec::with_capacity(total),
        pillars: Vec::with_capacity(total),
        out_of_range: 0,
    };
    for (idx, pil, oor) in parts {
        set.indices.extend_from_slice(&idx);
        set.pillars.extend_from_slice(&pil);
        set.out_of_range += oor;
    }
    set
}

/// Keeps points with `alpha >= T_D`, `beta >= T_S` that fall inside the grid.
pub fn select_valid<T: Real, P: PointSource<T>>(points: &P, cfg: &PoolConfig<T>) -> ValidSet {
    select_with(points, &cfg.bev, |i| cfg.passes_scores(points.depth_score(i), points.semantic_score(i)))
}

/// Every in-range point regardless of scores (plain lift-splat pooling).
pub fn select_in_range<T: Real, P: PointSource<T>>(points: &P, bev: &BevConfig<T>) -> ValidSet {
    select_with(points, bev, |_| true)
}

/// Share of points surviving [`select_valid`].
pub fn valid_fraction<T: Real, P: PointSource<T>>(points: &P, cfg: &PoolConfig<T>) -> Result<f64> {
    if points.is_empty() {
        return Err(invalid("valid fraction of an empty point set"));
    }
    Ok(select_valid(points, cfg).len() as f64 / points.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::EgoPoint;
    use crate::pooling::{PixelOrigin, VirtualPoints};

    fn cloud(scores: &[(f64, f64)]) -> VirtualPoints<f64> {
        let mut v = VirtualPoints::new(1);
        for (k, &(a, b)) in scores.iter().enumerate() {
            let px = v.add_pixel(PixelOrigin::default(), b, &[1.0]).unwrap();
            v.add_point(px, 0, EgoPoint::new(k as f64, 0.0, 0.0), a).unwrap();
        }
        v
    }

    #[test]
    fn gate_truth_table() {
        assert_eq!(filter_gate(0.3, 0.25), 1);
        assert_eq!(filter_gate(0.1, 0.25), 0);
        assert_eq!(filter_gate(0.25, 0.25), 1);
    }

    #[test]
    fn zero_thresholds_keep_everything_in_range() {
        let v = cloud(&[(0.0, 0.0), (1.0, 0.3), (0.2, 1.0)]);
        let cfg = PoolConfig::unfiltered(BevConfig::standard(1).unwrap());
        assert_eq!(select_valid(&v, &cfg).indices(), &[0, 1, 2]);
        assert_eq!(valid_fraction(&v, &cfg).unwrap(), 1.0);
    }

    #[test]
    fn semantic_threshold_excludes() {
        let v = cloud(&[(0.5, 0.1)]);
        let cfg = PoolConfig::new(0.0, 0.25, BevConfig::standard(1).unwrap()).unwrap();
        assert!(select_valid(&v, &cfg).is_empty());
    }

    #[test]
    fn out_of_range_counted() {
        let mut v = cloud(&[(1.0, 1.0)]);
        let px = v.add_pixel(PixelOrigin::default(), 1.0, &[1.0]).unwrap();
        v.add_point(px, 0, EgoPoint::new(90.0, 0.0, 0.0), 1.0).unwrap();
        let cfg = PoolConfig::unfiltered(BevConfig::standard(1).unwrap());
        let s = select_valid(&v, &cfg);
        assert_eq!((s.len(), s.out_of_range()), (1, 1));
        assert_eq!(s.pillars(), &[64 * 128 + 64]);
    }

    #[test]
    fn empty_fraction_is_error() {
        let v = VirtualPoints::<f64>::new(1);
        let cfg = PoolConfig::unfiltered(BevConfig::standard(1).unwrap());
        assert!(valid_fraction(&v, &cfg).is_err());
        assert!(PoolConfig::new(f64::NAN, 0.0, BevConfig::standard(1).unwrap()).is_err());
    }

    #[test]
    fn from_parts_validates() {
        assert!(ValidSet::from_parts(3, vec![0, 2], vec![5, 5]).is_ok());
        assert!(ValidSet::from_parts(3, vec![2, 0], vec![5, 5]).is_err());
        assert!(ValidSet::from_parts(3, vec![3], vec![5]).is_err());
        assert!(ValidSet::from_parts(3, vec![1], vec![]).is_err());
    }
}
