use crate::error::{invalid, mismatch, Result};
use crate::geometry::DepthBins;
use crate::scalar::Real;

use super::labels::LabelMaps;
use super::maps::{DepthDistribution, SemanticMap};

/// Probabilities are clamped to `[PROB_FLOOR, 1 - PROB_FLOOR]` before logs.
pub const PROB_FLOOR: f64 = 1e-7;

/// Semantic (`semantic`) and depth (`depth`) supervision weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights<T> {
    semantic: T,
    depth: T,
}

impl<T: Real> LossWeights<T> {
    pub fn new(semantic: T, depth: T) -> Result<Self> {
        if !(semantic >= T::zero() && depth >= T::zero()) || !semantic.is_finite() || !depth.is_finite() {
            return Err(invalid("loss weights must be finite and nonnegative"));
        }
        Ok(Self { semantic, depth })
    }

    pub fn semantic(&self) -> T {
        self.semantic
    }

    pub fn depth(&self) -> T {
        self.depth
    }
}

impl<T: Real> Default for LossWeights<T> {
    fn default() -> Self {
        Self { semantic: T::one(), depth: T::one() }
    }
}

/// Detection loss plus half-weighted sums of the two-scale semantic and
/// depth losses.
pub fn total_loss<T: Real>(l_det: T, l_s16: T, l_s8: T, l_d16: T, l_d8: T, w: &LossWeights<T>) -> T {
    let half = T::lit(0.5);
    l_det + w.semantic * half * (l_s16 + l_s8) + w.depth * half * (l_d16 + l_d8)
}

/// Mean one-hot cross-entropy over labeled cells whose depth falls inside
/// the bin range. Zero when no cell qualifies.
pub fn depth_loss<T: Real>(pred: &DepthDistribution<T>, labels: &LabelMaps<T>, bins: &DepthBins<T>) -> Result<f64> {
    if (pred.height(), pred.width()) != (labels.height(), labels.width()) {
        return Err(mismatch(
            "labels",
            format!("{}x{}", pred.height(), pred.width()),
            format!("{}x{}", labels.height(), labels.width()),
        ));
    }
    if pred.bins() != bins.count() {
        return Err(mismatch("bins", pred.bins(), bins.count()));
    }
    let (mut sum, mut n) = (0.0, 0usize);
    for (i, j) in labels.cells() {
        let Some(bin) = labels.depth(i, j).and_then(|d| bins.bin_of(d)) else {
            continue;
        };
        let p = pred.prob(bin, i, j).widen().max(PROB_FLOOR);
        sum -= p.ln();
        n += 1;
    }
    Ok(if n == 0 { 0.0 } else { sum / n as f64 })
}

/// Mean binary cross-entropy over labeled cells, foreground as the positive
/// class. Zero when no cell is labeled.
pub fn seg_loss<T: Real>(pred: &SemanticMap<T>, labels: &LabelMaps<T>) -> Result<f64> {
    if (pred.height(), pred.width()) != (labels.height(), labels.width()) {
        return Err(mismatch(
            "labels",
            format!("{}x{}", pred.height(), pred.width()),
            format!("{}x{}", labels.height(), labels.width()),
        ));
    }
    let (mut sum, mut n) = (0.0, 0usize);
    for (i, j) in labels.cells().filter(|&(i, j)| labels.is_valid(i, j)) {
        let p = pred.get(i, j).widen().clamp(PROB_FLOOR, 1.0 - PROB_FLOOR);
        sum -= if labels.is_foreground(i, j) { p.ln() } else { (1.0 - p).ln() };
        n += 1;
    }
    Ok(if n == 0 { 0.0 } else { sum / n as f64 })
}
