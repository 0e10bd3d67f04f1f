use rand::Rng;

use crate::geometry::FrustumPoint;
use crate::scalar::Real;

/// Sampling ranges for image-space augmentation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageAugRanges {
    pub scale: (f64, f64),
    pub rotation_deg: (f64, f64),
    pub flip_prob: f64,
}

impl Default for ImageAugRanges {
    fn default() -> Self {
        Self { scale: (0.94, 1.11), rotation_deg: (-5.4, 5.4), flip_prob: 0.5 }
    }
}

/// Resize by `scale`, crop at `crop`, optionally mirror horizontally, then
/// rotate about the output image center. Represented as a pixel mapping
/// rather than a resampling: there are no raw pixels to resample, so the
/// augmentation is folded into the frustum's pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageAugParams {
    pub scale: f64,
    /// Radians.
    pub rotation: f64,
    pub flip: bool,
    /// Crop offset `(x, y)` in resized-image pixels.
    pub crop: (f64, f64),
    /// Output image size `(width, height)`.
    pub output: (usize, usize),
}

impl ImageAugParams {
    pub fn identity(output: (usize, usize)) -> Self {
        Self { scale: 1.0, rotation: 0.0, flip: false, crop: (0.0, 0.0), output }
    }

    fn center(&self) -> (f64, f64) {
        (self.output.0 as f64 / 2.0, self.output.1 as f64 / 2.0)
    }

    /// Original pixel to augmented pixel.
    pub fn forward(&self, u: f64, v: f64) -> (f64, f64) {
        let (mut x, y) = (u * self.scale - self.crop.0, v * self.scale - self.crop.1);
        if self.flip {
            x = self.output.0 as f64 - x;
        }
        let (cx, cy) = self.center();
        let (s, c) = self.rotation.sin_cos();
        let (dx, dy) = (x - cx, y - cy);
        (c * dx - s * dy + cx, s * dx + c * dy + cy)
    }

    /// Augmented pixel back to original pixel.
    pub fn inverse(&self, u: f64, v: f64) -> (f64, f64) {
        let (cx, cy) = self.center();
        let (s, c) = self.rotation.sin_cos();
        let (dx, dy) = (u - cx, v - cy);
        let (mut x, y) = (c * dx + s * dy + cx, -s * dx + c * dy + cy);
        if self.flip {
            x = self.output.0 as f64 - x;
        }
        ((x + self.crop.0) / self.scale, (y + self.crop.1) / self.scale)
    }
}

/// Samples resize/rotate/flip uniformly and a crop offset uniformly over the
/// slack between the resized input and the output size.
pub fn sample_image_aug<R: Rng + ?Sized>(
    rng: &mut R,
    ranges: &ImageAugRanges,
    input: (usize, usize),
    output: (usize, usize),
) -> ImageAugParams {
    let scale = rng.gen_range(ranges.scale.0..=ranges.scale.1);
    let rotation = rng.gen_range(ranges.rotation_deg.0..=ranges.rotation_deg.1).to_radians();
    let flip = rng.gen_bool(ranges.flip_prob);
    let slack_x = ((input.0 as f64 * scale).floor() - output.0 as f64).max(0.0) as u64;
    let slack_y = ((input.1 as f64 * scale).floor() - output.1 as f64).max(0.0) as u64;
    let crop = (rng.gen_range(0..=slack_x) as f64, rng.gen_range(0..=slack_y) as f64);
    ImageAugParams { scale, rotation, flip, crop, output }
}

/// Maps a frustum laid out on the augmented image back to original-image
/// pixel coordinates, keeping cell/bin indices and depths.
pub fn augment_lattice<T: Real>(lattice: &[FrustumPoint<T>], params: &ImageAugParams) -> Vec<FrustumPoint<T>> {
    lattice
        .iter()
        .map(|fp| {
            let (u, v) = params.inverse(fp.u.widen(), fp.v.widen());
            FrustumPoint { u: T::lit(u), v: T::lit(v), ..*fp }
        })
        .collect()
}
