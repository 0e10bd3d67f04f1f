use crate::error::{invalid, Result};
use crate::scalar::Real;

use super::{mat_t_vec, mat_vec, EgoPoint, Mat3};

/// Pinhole intrinsics in pixels. No lens distortion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intrinsics<T> {
    pub fx: T,
    pub fy: T,
    pub cx: T,
    pub cy: T,
}

/// One camera of a rig: intrinsics, camera-to-ego extrinsics, and the
/// image/feature raster it produces.
#[derive(Debug, Clone, PartialEq)]
pub struct Camera<T> {
    intrinsics: Intrinsics<T>,
    rotation: Mat3<T>,
    translation: EgoPoint<T>,
    image_width: usize,
    image_height: usize,
    stride: usize,
}

impl<T: Real> Camera<T> {
    pub fn new(
        intrinsics: Intrinsics<T>,
        rotation: Mat3<T>,
        translation: EgoPoint<T>,
        image_size: (usize, usize),
        stride: usize,
    ) -> Result<Self> {
        let (image_width, image_height) = image_size;
        if !(intrinsics.fx > T::zero() && intrinsics.fy > T::zero()) {
            return Err(invalid("focal lengths must be positive"));
        }
        if !(intrinsics.cx.is_finite() && intrinsics.cy.is_finite()) {
            return Err(invalid("principal point must be finite"));
        }
        if stride != 8 && stride != 16 {
            return Err(invalid(format!("feature stride must be 8 or 16, got {stride}")));
        }
        if image_width == 0 || image_height == 0 {
            return Err(invalid("image size must be nonzero"));
        }
        if image_width % stride != 0 || image_height % stride != 0 {
            return Err(invalid(format!(
                "image size {image_width}x{image_height} not divisible by stride {stride}"
            )));
        }
        if !translation.is_finite() {
            return Err(invalid("translation must be finite"));
        }
        check_orthonormal(&rotation)?;
        Ok(Self {
            intrinsics,
            rotation,
            translation,
            image_width,
            image_height,
            stride,
        })
    }

    pub fn intrinsics(&self) -> &Intrinsics<T> {
        &self.intrinsics
    }

    pub fn rotation(&self) -> &Mat3<T> {
        &self.rotation
    }

    pub fn translation(&self) -> EgoPoint<T> {
        self.translation
    }

    pub fn image_size(&self) -> (usize, usize) {
        (self.image_width, self.image_height)
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    /// Feature raster as (rows, cols).
    pub fn feature_shape(&self) -> (usize, usize) {
        (self.image_height / self.stride, self.image_width / self.stride)
    }

    /// Same camera with a different feature stride (used for the two
    /// supervision scales).
    pub fn with_stride(&self, stride: usize) -> Result<Self> {
        Self::new(
            self.intrinsics,
            self.rotation,
            self.translation,
            (self.image_width, self.image_height),
            stride,
        )
    }

    /// Direction in the ego frame of the pixel ray, scaled so that the ray
    /// parameter equals camera-frame depth.
    pub fn ray_direction(&self, u: T, v: T) -> [T; 3] {
        let k = &self.intrinsics;
        mat_vec(&self.rotation, [(u - k.cx) / k.fx, (v - k.cy) / k.fy, T::one()])
    }

    /// Lifts pixel `(u, v)` at camera depth `depth` into the ego frame.
    pub fn cam_to_ego(&self, u: T, v: T, depth: T) -> Result<EgoPoint<T>> {
        if !(depth > T::zero()) {
            return Err(invalid(format!("depth must be positive, got {depth}")));
        }
        Ok(self.lift_unchecked(u, v, depth))
    }

    #[inline]
    pub(crate) fn lift_unchecked(&self, u: T, v: T, depth: T) -> EgoPoint<T> {
        let k = &self.intrinsics;
        let p_cam = [depth * (u - k.cx) / k.fx, depth * (v - k.cy) / k.fy, depth];
        let r = mat_vec(&self.rotation, p_cam);
        EgoPoint::new(
            r[0] + self.translation.x,
            r[1] + self.translation.y,
            r[2] + self.translation.z,
        )
    }

    /// Ego point expressed in the camera frame.
    pub fn ego_to_cam(&self, p: &EgoPoint<T>) -> [T; 3] {
        let d = p.sub(&self.translation);
        mat_t_vec(&self.rotation, [d.x, d.y, d.z])
    }

    /// Projects an ego point to `(u, v, depth)`. Returns `None` for points
    /// at or behind the image plane.
    pub fn project(&self, p: &EgoPoint<T>) -> Option<(T, T, T)> {
        let c = self.ego_to_cam(p);
        if !(c[2] > T::zero()) {
            return None;
        }
        let k = &self.intrinsics;
        Some((k.fx * c[0] / c[2] + k.cx, k.fy * c[1] / c[2] + k.cy, c[2]))
    }

    /// Feature cell `(row, col)` containing pixel `(u, v)`, if on the image.
    pub fn feature_cell(&self, u: T, v: T) -> Option<(usize, usize)> {
        let s = T::lit(self.stride as f64);
        let col = (u / s).floor();
        let row = (v / s).floor();
        let (h, w) = self.feature_shape();
        if !(col >= T::zero() && row >= T::zero()) {
            return None;
        }
        let (col, row) = (col.to_usize()?, row.to_usize()?);
        (col < w && row < h).then_some((row, col))
    }
}

fn check_orthonormal<T: Real>(r: &Mat3<T>) -> Result<()> {
    let tol = T::orthonormal_tol();
    for i in 0..3 {
        for j in 0..3 {
            let dot = (0..3).fold(T::zero(), |acc, k| acc + r[k][i] * r[k][j]);
            let want = if i == j { T::one() } else { T::zero() };
            if !((dot - want).abs() <= tol) {
                return Err(invalid(format!(
                    "rotation is not orthonormal: (R^T R)[{i}][{j}] = {dot}"
                )));
            }
        }
    }
    Ok(())
}

/// Camera-to-ego rotation for a level camera whose optical axis points at
/// `yaw` radians from the ego x axis.
pub fn camera_yaw_rotation<T: Real>(yaw: T) -> Mat3<T> {
    let (s, c) = yaw.sin_cos();
    let z = T::zero();
    // columns: camera right, camera down, camera forward (in ego axes)
    [[s, z, c], [-c, z, s], [z, -T::one(), z]]
}

/// Set of cameras sharing one ego frame.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraRig<T> {
    cameras: Vec<Camera<T>>,
}

impl<T: Real> CameraRig<T> {
    pub fn new(cameras: Vec<Camera<T>>) -> Result<Self> {
        if cameras.is_empty() {
            return Err(invalid("a rig needs at least one camera"));
        }
        Ok(Self { cameras })
    }

    /// Level cameras evenly spaced in yaw around the ego origin, mounted at
    /// `mount_height` and pushed `radius` meters out along their axes.
    #[allow(clippy::too_many_arguments)]
    pub fn ring(
        count: usize,
        image_size: (usize, usize),
        stride: usize,
        fx: T,
        fy: T,
        mount_height: T,
        radius: T,
        yaw_offset: T,
    ) -> Result<Self> {
        if count == 0 {
            return Err(invalid("a rig needs at least one camera"));
        }
        let intrinsics = Intrinsics {
            fx,
            fy,
            cx: T::lit(image_size.0 as f64 / 2.0),
            cy: T::lit(image_size.1 as f64 / 2.0),
        };
        let cameras = (0..count)
            .map(|k| {
                let yaw = yaw_offset + T::TAU() * T::lit(k as f64 / count as f64);
                let (s, c) = yaw.sin_cos();
                let t = EgoPoint::new(radius * c, radius * s, mount_height);
                Camera::new(intrinsics, camera_yaw_rotation(yaw), t, image_size, stride)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(cameras)
    }

    pub fn cameras(&self) -> &[Camera<T>] {
        &self.cameras
    }

    pub fn len(&self) -> usize {
        self.cameras.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cameras.is_empty()
    }

    pub fn with_stride(&self, stride: usize) -> Result<Self> {
        Self::new(
            self.cameras
                .iter()
                .map(|c| c.with_stride(stride))
                .collect::<Result<Vec<_>>>()?,
        )
    }
}
