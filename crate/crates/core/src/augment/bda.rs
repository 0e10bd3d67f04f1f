use std::fmt;

use rand::Rng;

use crate::error::{invalid, Result};
use crate::geometry::{wrap_angle, Box3D, EgoPoint};
use crate::pooling::VirtualPoints;
use crate::scalar::Real;

/// Sampling ranges for BEV augmentation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BdaRanges {
    pub scale: (f64, f64),
    /// Degrees.
    pub rotation_deg: (f64, f64),
    pub flip_prob: f64,
}

impl Default for BdaRanges {
    fn default() -> Self {
        Self { scale: (0.95, 1.05), rotation_deg: (-22.5, 22.5), flip_prob: 0.5 }
    }
}

/// Similarity transform of the ego XY plane: scale, then axis flips, then
/// rotation about ego z. `z` is only scaled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BdaParams<T> {
    pub scale: T,
    pub flip_x: bool,
    pub flip_y: bool,
    /// Radians, counter-clockwise about ego z.
    pub rotation: T,
}

impl<T: Real> BdaParams<T> {
    pub fn identity() -> Self {
        Self { scale: T::one(), flip_x: false, flip_y: false, rotation: T::zero() }
    }

    pub fn new(scale: T, flip_x: bool, flip_y: bool, rotation: T) -> Result<Self> {
        if !(scale > T::zero() && scale.is_finite() && rotation.is_finite()) {
            return Err(invalid("BDA scale must be positive and rotation finite"));
        }
        Ok(Self { scale, flip_x, flip_y, rotation })
    }

    /// Whether the parameters lie inside `ranges`.
    pub fn within(&self, ranges: &BdaRanges) -> bool {
        let rot = ranges.rotation_deg.0.to_radians()..=ranges.rotation_deg.1.to_radians();
        let s = self.scale.widen();
        s >= ranges.scale.0 && s <= ranges.scale.1 && rot.contains(&self.rotation.widen())
    }
}

impl<T: Real> fmt::Display for BdaParams<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "scale={:.17} flip_x={} flip_y={} rotation={:.17}",
            self.scale.widen(),
            self.flip_x,
            self.flip_y,
            self.rotation.widen()
        )
    }
}

/// Uniform scale and rotation, independent Bernoulli flips.
pub fn sample_bda<T: Real, R: Rng + ?Sized>(rng: &mut R, ranges: &BdaRanges) -> BdaParams<T> {
    let scale = rng.gen_range(ranges.scale.0..=ranges.scale.1);
    let rot = rng.gen_range(ranges.rotation_deg.0..=ranges.rotation_deg.1).to_radians();
    let flip_x = rng.gen_bool(ranges.flip_prob);
    let flip_y = rng.gen_bool(ranges.flip_prob);
    // clamp guards the degree->radian conversion against landing a ulp outside
    let lo = ranges.rotation_deg.0.to_radians();
    let hi = ranges.rotation_deg.1.to_radians();
    BdaParams {
        scale: clamp_lit(scale, ranges.scale.0, ranges.scale.1),
        flip_x,
        flip_y,
        rotation: clamp_lit(rot.clamp(lo, hi), lo, hi),
    }
}

// Narrowing may round past the range edges; step back inside.
fn clamp_lit<T: Real>(v: f64, lo: f64, hi: f64) -> T {
    let mut t = T::lit(v);
    let step = |t: T| (t.abs() * T::epsilon()).max(T::min_positive_value());
    while t.widen() > hi {
        t = t - step(t);
    }
    while t.widen() < lo {
        t = t + step(t);
    }
    t
}

#[inline]
pub fn apply_bda_point<T: Real>(p: &EgoPoint<T>, params: &BdaParams<T>) -> EgoPoint<T> {
    let mut x = p.x * params.scale;
    let mut y = p.y * params.scale;
    let z = p.z * params.scale;
    if params.flip_x {
        x = -x;
    }
    if params.flip_y {
        y = -y;
    }
    let (s, c) = params.rotation.sin_cos();
    EgoPoint::new(c * x - s * y, s * x + c * y, z)
}

/// Transforms point positions; scores and features are untouched.
pub fn apply_bda_points<T: Real>(points: &VirtualPoints<T>, params: &BdaParams<T>) -> VirtualPoints<T> {
    points.map_positions(|p| apply_bda_point(p, params))
}

/// Transforms boxes consistently with [`apply_bda_point`]: centers move like
/// points, sizes scale, yaw reflects under flips and then rotates.
pub fn apply_bda_boxes<T: Real>(boxes: &[Box3D<T>], params: &BdaParams<T>) -> Vec<Box3D<T>> {
    boxes
        .iter()
        .map(|b| {
            let mut yaw = b.yaw;
            if params.flip_x {
                yaw = T::PI() - yaw;
            }
            if params.flip_y {
                yaw = -yaw;
            }
            Box3D {
                center: apply_bda_point(&b.center, params),
                size: b.size.map(|s| s * params.scale),
                yaw: wrap_angle(yaw + params.rotation),
                class: b.class,
            }
        })
        .collect()
}
