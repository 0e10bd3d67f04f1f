use crate::error::{invalid, Result};
use crate::scalar::Real;

use super::EgoPoint;

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle<T: Real>(a: T) -> T {
    let pi = T::PI();
    let tau = T::TAU();
    let mut w = a - tau * ((a + pi) / tau).floor();
    // floor maps a == pi onto -pi
    if w <= -pi {
        w = w + tau;
    }
    w
}

/// Oriented 3D box: center, size `(length, width, height)` along the box's
/// local x/y/z axes, yaw about ego z, and a class id.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Box3D<T> {
    pub center: EgoPoint<T>,
    pub size: [T; 3],
    pub yaw: T,
    pub class: u32,
}

impl<T: Real> Box3D<T> {
    pub fn new(center: EgoPoint<T>, size: [T; 3], yaw: T, class: u32) -> Result<Self> {
        if size.iter().any(|s| !(*s > T::zero() && s.is_finite())) {
            return Err(invalid("box sizes must be positive and finite"));
        }
        if !center.is_finite() || !yaw.is_finite() {
            return Err(invalid("box pose must be finite"));
        }
        Ok(Self { center, size, yaw, class })
    }

    /// Expresses an ego point in the box's local frame.
    pub fn to_local(&self, p: &EgoPoint<T>) -> EgoPoint<T> {
        let d = p.sub(&self.center);
        let (s, c) = self.yaw.sin_cos();
        EgoPoint::new(c * d.x + s * d.y, -s * d.x + c * d.y, d.z)
    }

    pub fn to_ego(&self, local: &EgoPoint<T>) -> EgoPoint<T> {
        let (s, c) = self.yaw.sin_cos();
        EgoPoint::new(
            c * local.x - s * local.y + self.center.x,
            s * local.x + c * local.y + self.center.y,
            local.z + self.center.z,
        )
    }

    pub fn half_extents(&self) -> [T; 3] {
        let h = T::lit(0.5);
        [self.size[0] * h, self.size[1] * h, self.size[2] * h]
    }

    /// Containment with slack `eps` on every face (boundary counts inside).
    pub fn contains(&self, p: &EgoPoint<T>, eps: T) -> bool {
        let l = self.to_local(p);
        let h = self.half_extents();
        l.x.abs() <= h[0] + eps && l.y.abs() <= h[1] + eps && l.z.abs() <= h[2] + eps
    }

    /// Footprint corners in the ego XY plane, counter-clockwise.
    pub fn footprint(&self) -> [(T, T); 4] {
        let h = self.half_extents();
        [(h[0], h[1]), (-h[0], h[1]), (-h[0], -h[1]), (h[0], -h[1])].map(|(x, y)| {
            let p = self.to_ego(&EgoPoint::new(x, y, T::zero()));
            (p.x, p.y)
        })
    }

    /// Distance along `origin + t * dir` to the first face hit with `t > 0`.
    /// Slab test in the box frame.
    pub fn ray_hit(&self, origin: &EgoPoint<T>, dir: [T; 3]) -> Option<T> {
        let o = self.to_local(origin);
        let (s, c) = self.yaw.sin_cos();
        let d = [c * dir[0] + s * dir[1], -s * dir[0] + c * dir[1], dir[2]];
        let o = [o.x, o.y, o.z];
        let h = self.half_extents();
        let mut t_near = T::neg_infinity();
        let mut t_far = T::infinity();
        for k in 0..3 {
            if d[k] == T::zero() {
                if o[k].abs() > h[k] {
                    return None;
                }
                continue;
            }
            let t1 = (-h[k] - o[k]) / d[k];
            let t2 = (h[k] - o[k]) / d[k];
            let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
            t_near = t_near.max(lo);
            t_far = t_far.min(hi);
        }
        (t_near <= t_far && t_near > T::zero()).then_some(t_near)
    }

    pub fn surface_area(&self) -> T {
        let [l, w, h] = self.size;
        T::lit(2.0) * (l * w + l * h + w * h)
    }
}
