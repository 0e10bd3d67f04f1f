use rayon::prelude::*;

use crate::augment::{augment_lattice, ImageAugParams};
use crate::error::{invalid, mismatch, Result};
use crate::geometry::{build_frustum, Camera, CameraRig, DepthBins, EgoPoint};
use crate::pooling::{score_points, VirtualPoints};
use crate::scalar::Real;
use crate::scoring::{softmax_over_depth, DepthDistribution, FeatureMap, SemanticMap};

use super::SceneSpec;

/// Embedding id used for ground and sky cells.
pub const BACKGROUND_CLASS: Option<u32> = None;

/// Oracle outputs for one camera on its feature raster.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderedView<T> {
    pub depth: DepthDistribution<T>,
    pub semantic: SemanticMap<T>,
    pub context: FeatureMap<T>,
    /// Camera depth of the first hit per cell; `bins.max()` where nothing is hit.
    pub hit_depth: Vec<T>,
    /// Index of the box hit first per cell, if any.
    pub hit_box: Vec<Option<usize>>,
}

impl<T: Real> RenderedView<T> {
    pub fn foreground_cells(&self) -> usize {
        self.hit_box.iter().filter(|b| b.is_some()).count()
    }

    /// Replaces the one-hot depth by a discretized Gaussian of spread
    /// `sigma` (m) around each cell's hit depth. `sigma = 0` is a no-op.
    pub fn soften_depth(&mut self, bins: &DepthBins<T>, sigma: T) -> Result<()> {
        if !(sigma >= T::zero() && sigma.is_finite()) {
            return Err(invalid(format!("depth spread must be finite and >= 0, got {sigma}")));
        }
        if sigma == T::zero() {
            return Ok(());
        }
        let (h, w) = (self.depth.height(), self.depth.width());
        let k = T::lit(-0.5) / (sigma * sigma);
        let logits = FeatureMap::from_fn(bins.count(), h, w, |d, i, j| {
            let e = bins.center(d) - self.hit_depth[i * w + j];
            k * e * e
        })?;
        self.depth = softmax_over_depth(&logits)?;
        Ok(())
    }
}

enum Hit<T> {
    Box(usize, T),
    Ground(T),
    Sky,
}

fn cast<T: Real>(scene: &SceneSpec<T>, origin: &EgoPoint<T>, dir: [T; 3]) -> Hit<T> {
    let mut best = Hit::Sky;
    let mut best_t = T::infinity();
    if dir[2] < T::zero() {
        let t = (scene.ground_z - origin.z) / dir[2];
        if t > T::zero() {
            best = Hit::Ground(t);
            best_t = t;
        }
    }
    for (k, b) in scene.boxes.iter().enumerate() {
        if let Some(t) = b.ray_hit(origin, dir) {
            // a box wins ties with the ground at its own base
            if t <= best_t {
                best = Hit::Box(k, t);
                best_t = t;
            }
        }
    }
    best
}

/// Fixed context value for channel `c >= 1`. Box classes are strictly
/// positive so foreground features never vanish.
fn embedding<T: Real>(class: Option<u32>, c: usize) -> T {
    let c = c as f64;
    T::lit(match class {
        Some(k) => 1.0 + 0.5 * (0.7 * (k as f64 + 1.0) * c).sin(),
        None => 0.25 + 0.2 * (1.3 * c).cos(),
    })
}

/// Ray-casts every feature-cell center of `cam` into the scene. With `aug`,
/// the raster is the augmented image and rays go through the inverse-mapped
/// original pixels, consistent with [`augment_lattice`].
pub fn render_view<T: Real>(
    scene: &SceneSpec<T>,
    cam: &Camera<T>,
    bins: &DepthBins<T>,
    channels: usize,
    aug: Option<&ImageAugParams>,
) -> Result<RenderedView<T>> {
    if channels == 0 {
        return Err(invalid("context needs at least one channel"));
    }
    if let Some(a) = aug {
        if a.output != cam.image_size() {
            return Err(mismatch("aug.output", format!("{:?}", cam.image_size()), format!("{:?}", a.output)));
        }
    }
    let (h, w) = cam.feature_shape();
    let stride = cam.stride() as f64;
    let origin = cam.translation();
    let hits: Vec<(T, Option<usize>)> = (0..h * w)
        .into_par_iter()
        .map(|k| {
            let (u, v) = ((k % w) as f64 * stride + stride / 2.0, (k / w) as f64 * stride + stride / 2.0);
            let (u, v) = aug.map_or((u, v), |a| a.inverse(u, v));
            match cast(scene, &origin, cam.ray_direction(T::lit(u), T::lit(v))) {
                Hit::Box(b, t) => (t, Some(b)),
                Hit::Ground(t) => (t, None),
                Hit::Sky => (bins.max(), None),
            }
        })
        .collect();
    let depth = DepthDistribution::one_hot(bins.count(), h, w, |i, j| bins.clamped_bin_of(hits[i * w + j].0))?;
    let semantic = SemanticMap::new(
        h,
        w,
        hits.iter().map(|&(_, b)| if b.is_some() { T::one() } else { T::zero() }).collect(),
    )?;
    let context = FeatureMap::from_fn(channels, h, w, |c, i, j| {
        let (t, b) = hits[i * w + j];
        if c == 0 {
            t
        } else {
            embedding(b.map(|k| scene.boxes[k].class), c)
        }
    })?;
    let (hit_depth, hit_box) = hits.into_iter().unzip();
    Ok(RenderedView { depth, semantic, context, hit_depth, hit_box })
}

/// [`render_view`] for every camera of the rig, in parallel.
pub fn render_views<T: Real>(
    scene: &SceneSpec<T>,
    rig: &CameraRig<T>,
    bins: &DepthBins<T>,
    channels: usize,
) -> Result<Vec<RenderedView<T>>> {
    rig.cameras().par_iter().map(|cam| render_view(scene, cam, bins, channels, None)).collect()
}

/// Lifts rendered views into scored virtual points, camera by camera.
/// `augs`, if given, holds one image augmentation per camera and must match
/// the one each view was rendered with.
pub fn scene_points<T: Real>(
    views: &[RenderedView<T>],
    rig: &CameraRig<T>,
    bins: &DepthBins<T>,
    augs: Option<&[ImageAugParams]>,
) -> Result<VirtualPoints<T>> {
    if views.len() != rig.len() {
        return Err(mismatch("views", rig.len(), views.len()));
    }
    if let Some(a) = augs {
        if a.len() != rig.len() {
            return Err(mismatch("augs", rig.len(), a.len()));
        }
    }
    let channels = views.first().map_or(0, |v| v.context.channels());
    let cells: usize = rig.cameras().iter().map(|c| c.feature_shape().0 * c.feature_shape().1).sum();
    let mut out = VirtualPoints::with_capacity(channels, cells * bins.count(), cells);
    for (id, (cam, view)) in rig.cameras().iter().zip(views).enumerate() {
        let lattice = build_frustum(cam.feature_shape(), cam.stride(), bins)?;
        let lattice = match augs {
            Some(a) => augment_lattice(&lattice, &a[id]),
            None => lattice,
        };
        score_points(&mut out, id as u32, cam, &lattice, &view.context, &view.depth, &view.semantic)?;
    }
    Ok(out)
}
