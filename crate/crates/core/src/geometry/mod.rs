//! Camera model, frustum lattice, camera-to-ego projection and pillar
//! indexing of the bird's-eye-view grid.
//!
//! Ego frame: x forward, y left, z up. Camera frame: x right, y down,
//! z along the optical axis. The camera's extrinsic rotation maps camera
//! axes to ego axes; no other axis convention is applied implicitly.

mod bev;
mod boxes;
mod camera;
mod frustum;

pub use bev::{BevConfig, PillarIdx};
pub use boxes::{wrap_angle, Box3D};
pub use camera::{camera_yaw_rotation, Camera, CameraRig, Intrinsics};
pub use frustum::{build_frustum, DepthBins, FrustumPoint};

use crate::scalar::Real;

/// A point in the ego frame, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EgoPoint<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> EgoPoint<T> {
    pub const fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }

    pub fn scale(&self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn norm(&self) -> T {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Converts between storage precisions.
    pub fn cast<U: Real>(&self) -> EgoPoint<U> {
        EgoPoint::new(U::lit(self.x.widen()), U::lit(self.y.widen()), U::lit(self.z.widen()))
    }
}

pub(crate) type Mat3<T> = [[T; 3]; 3];

pub(crate) fn mat_vec<T: Real>(m: &Mat3<T>, v: [T; 3]) -> [T; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

pub(crate) fn mat_t_vec<T: Real>(m: &Mat3<T>, v: [T; 3]) -> [T; 3] {
    [
        m[0][0] * v[0] + m[1][0] * v[1] + m[2][0] * v[2],
        m[0][1] * v[0] + m[1][1] * v[1] + m[2][1] * v[2],
        m[0][2] * v[0] + m[1][2] * v[1] + m[2][2] * v[2],
    ]
}
