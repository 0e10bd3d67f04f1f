use crate::error::{invalid, Result};
use crate::scalar::Real;

use super::EgoPoint;

/// Integer pillar coordinates on the BEV grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PillarIdx {
    pub ix: usize,
    pub iy: usize,
}

impl PillarIdx {
    /// Row-major flattened id (`iy` outer, `ix` inner).
    #[inline]
    pub fn flat(&self, nx: usize) -> usize {
        self.iy * nx + self.ix
    }
}

/// Pillarized ego-frame grid geometry plus the pooled channel count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BevConfig<T> {
    x_range: (T, T),
    y_range: (T, T),
    z_range: (T, T),
    pillar: [T; 3],
    channels: usize,
    nx: usize,
    ny: usize,
}

fn cells<T: Real>(axis: &str, range: (T, T), size: T) -> Result<usize> {
    let (lo, hi) = range;
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(invalid(format!("{axis} range must be finite and increasing")));
    }
    if !(size > T::zero() && size.is_finite()) {
        return Err(invalid(format!("{axis} pillar size must be positive")));
    }
    let span = hi - lo;
    let n = (span / size).round();
    let tol = T::lit(1e-6) * span;
    if !(n >= T::one()) || (n * size - span).abs() > tol {
        return Err(invalid(format!(
            "{axis} range {span} is not evenly divisible by pillar size {size}"
        )));
    }
    n.to_usize().ok_or_else(|| invalid(format!("{axis} grid too large")))
}

impl<T: Real> BevConfig<T> {
    pub fn new(
        x_range: (T, T),
        y_range: (T, T),
        z_range: (T, T),
        pillar: [T; 3],
        channels: usize,
    ) -> Result<Self> {
        let nx = cells("x", x_range, pillar[0])?;
        let ny = cells("y", y_range, pillar[1])?;
        cells("z", z_range, pillar[2])?;
        if channels == 0 {
            return Err(invalid("channel count must be nonzero"));
        }
        Ok(Self {
            x_range,
            y_range,
            z_range,
            pillar,
            channels,
            nx,
            ny,
        })
    }

    /// x, y in [-51.2, 51.2], z in [-5, 3], pillars 0.8 x 0.8 x 8: a 128x128 grid.
    pub fn standard(channels: usize) -> Result<Self> {
        let r = (T::lit(-51.2), T::lit(51.2));
        Self::new(r, r, (T::lit(-5.0), T::lit(3.0)), [0.8, 0.8, 8.0].map(T::lit), channels)
    }

    /// Same extent with 0.4 m pillars: a 256x256 grid.
    pub fn fine(channels: usize) -> Result<Self> {
        let r = (T::lit(-51.2), T::lit(51.2));
        Self::new(r, r, (T::lit(-5.0), T::lit(3.0)), [0.4, 0.4, 8.0].map(T::lit), channels)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn n_pillars(&self) -> usize {
        self.nx * self.ny
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn x_range(&self) -> (T, T) {
        self.x_range
    }

    pub fn y_range(&self) -> (T, T) {
        self.y_range
    }

    pub fn z_range(&self) -> (T, T) {
        self.z_range
    }

    pub fn pillar_size(&self) -> [T; 3] {
        self.pillar
    }

    pub fn with_channels(&self, channels: usize) -> Result<Self> {
        Self::new(self.x_range, self.y_range, self.z_range, self.pillar, channels)
    }

    /// Half-open containment test on all three axes.
    #[inline]
    pub fn contains(&self, p: &EgoPoint<T>) -> bool {
        p.x >= self.x_range.0
            && p.x < self.x_range.1
            && p.y >= self.y_range.0
            && p.y < self.y_range.1
            && p.z >= self.z_range.0
            && p.z < self.z_range.1
    }

    /// Pillar containing `p`, or `None` when `p` lies outside the grid.
    #[inline]
    pub fn pillar_of(&self, p: &EgoPoint<T>) -> Option<PillarIdx> {
        if !self.contains(p) {
            return None;
        }
        // clamp guards the last cell against rounding of (x - min) / dx
        let ix = ((p.x - self.x_range.0) / self.pillar[0]).floor().to_usize()?.min(self.nx - 1);
        let iy = ((p.y - self.y_range.0) / self.pillar[1]).floor().to_usize()?.min(self.ny - 1);
        Some(PillarIdx { ix, iy })
    }

    #[inline]
    pub fn flat_pillar_of(&self, p: &EgoPoint<T>) -> Option<usize> {
        self.pillar_of(p).map(|idx| idx.flat(self.nx))
    }

    /// XY center of a pillar.
    pub fn pillar_center(&self, idx: PillarIdx) -> (T, T) {
        let half = T::lit(0.5);
        (
            self.x_range.0 + (T::lit(idx.ix as f64) + half) * self.pillar[0],
            self.y_range.0 + (T::lit(idx.iy as f64) + half) * self.pillar[1],
        )
    }

    pub fn unflatten(&self, flat: usize) -> PillarIdx {
        PillarIdx { ix: flat % self.nx, iy: flat / self.nx }
    }
}
