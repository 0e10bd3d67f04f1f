use std::fmt;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::geometry::Box3D;
use crate::pooling::{sa_bev_pool, BevGrid, PoolConfig, VirtualPoints};
use crate::scalar::Real;

use super::bda::{apply_bda_boxes, apply_bda_points, sample_bda, BdaParams, BdaRanges};

/// One frame pasted onto another, with the augmentation applied to it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PasteEntry<T> {
    pub source: usize,
    pub params: BdaParams<T>,
}

/// Per-frame paste lists for one batch.
#[derive(Debug, Clone, PartialEq)]
pub struct PastePlan<T> {
    pub expected_pastes: f64,
    pub entries: Vec<Vec<PasteEntry<T>>>,
}

impl<T: Real> PastePlan<T> {
    pub fn batch_size(&self) -> usize {
        self.entries.len()
    }

    pub fn total_pastes(&self) -> usize {
        self.entries.iter().map(Vec::len).sum()
    }
}

impl<T: Real> fmt::Display for PastePlan<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "batch_size={} expected_pastes={}", self.entries.len(), self.expected_pastes)?;
        for (i, list) in self.entries.iter().enumerate() {
            for e in list {
                writeln!(f, "frame {i} <- {} {}", e.source, e.params)?;
            }
        }
        Ok(())
    }
}

/// Draws `floor(n_p)` pastes per frame plus one more with probability
/// `frac(n_p)`. Sources are uniform over the other frames of the batch,
/// with replacement. Without `extra_bda` every entry carries the identity.
pub fn sample_paste_plan<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    batch_size: usize,
    expected_pastes: f64,
    extra_bda: Option<&BdaRanges>,
) -> Result<PastePlan<T>> {
    if batch_size == 0 {
        return Err(invalid("batch size must be at least 1"));
    }
    if !(expected_pastes >= 0.0 && expected_pastes.is_finite()) {
        return Err(invalid(format!("expected pastes must be finite and >= 0, got {expected_pastes}")));
    }
    if batch_size == 1 && expected_pastes > 0.0 {
        return Err(Error::DegenerateBatch("a single-frame batch has no other frame to paste".into()));
    }
    let whole = expected_pastes.floor() as usize;
    let frac = expected_pastes - expected_pastes.floor();
    let entries = (0..batch_size)
        .map(|i| {
            let count = whole + usize::from(frac > 0.0 && rng.gen_bool(frac));
            (0..count)
                .map(|_| {
                    let r = rng.gen_range(0..batch_size - 1);
                    let source = if r >= i { r + 1 } else { r };
                    let params = extra_bda.map_or_else(BdaParams::identity, |ranges| sample_bda(rng, ranges));
                    PasteEntry { source, params }
                })
                .collect()
        })
        .collect();
    Ok(PastePlan { expected_pastes, entries })
}

/// Adds the augmented pasted grid onto the original and concatenates the
/// targets. No deduplication or occlusion handling.
pub fn bev_paste<T: Real>(
    original: &BevGrid<T>,
    pasted: &BevGrid<T>,
    original_targets: &[Box3D<T>],
    pasted_targets: &[Box3D<T>],
) -> Result<Pasted<T>> {
    let grid = original.try_add(pasted)?;
    let mut targets = Vec::with_capacity(original_targets.len() + pasted_targets.len());
    targets.extend_from_slice(original_targets);
    targets.extend_from_slice(pasted_targets);
    Ok((grid, targets))
}

/// A pooled grid with its ground-truth boxes.
pub type Pasted<T> = (BevGrid<T>, Vec<Box3D<T>>);

/// Scored points and ground truth of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct PasteFrame<T> {
    pub points: VirtualPoints<T>,
    pub targets: Vec<Box3D<T>>,
}

/// Executes a plan: each frame's pooled grid plus, per entry, the source
/// frame re-pooled after augmenting its points.
pub fn paste_batch<T: Real>(
    frames: &[PasteFrame<T>],
    plan: &PastePlan<T>,
    cfg: &PoolConfig<T>,
) -> Result<Vec<Pasted<T>>> {
    if plan.batch_size() != frames.len() {
        return Err(crate::error::mismatch("plan", frames.len(), plan.batch_size()));
    }
    frames
        .iter()
        .zip(&plan.entries)
        .map(|(frame, entries)| {
            let (mut grid, _) = sa_bev_pool(&frame.points, cfg)?;
            let mut targets = frame.targets.clone();
            for e in entries {
                let src = frames
                    .get(e.source)
                    .ok_or_else(|| invalid(format!("paste source {} outside batch", e.source)))?;
                let (pasted, _) = sa_bev_pool(&apply_bda_points(&src.points, &e.params), cfg)?;
                let boxes = apply_bda_boxes(&src.targets, &e.params);
                (grid, targets) = bev_paste(&grid, &pasted, &targets, &boxes)?;
            }
            Ok((grid, targets))
        })
        .collect()
}
