use crate::error::{mismatch, Result};
use crate::geometry::BevConfig;
use crate::scalar::Real;

/// Pooled BEV feature, `ny x nx x channels` with `iy` outer, `ix` inner,
/// channel innermost.
#[derive(Debug, Clone, PartialEq)]
pub struct BevGrid<T> {
    nx: usize,
    ny: usize,
    channels: usize,
    data: Vec<T>,
}

impl<T: Real> BevGrid<T> {
    pub fn zeros(nx: usize, ny: usize, channels: usize) -> Self {
        Self { nx, ny, channels, data: vec![T::zero(); nx * ny * channels] }
    }

    pub fn for_config(cfg: &BevConfig<T>) -> Self {
        Self::zeros(cfg.nx(), cfg.ny(), cfg.channels())
    }

    pub fn from_vec(nx: usize, ny: usize, channels: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != nx * ny * channels {
            return Err(mismatch("grid data", nx * ny * channels, data.len()));
        }
        Ok(Self { nx, ny, channels, data })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.nx, self.ny, self.channels)
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    /// Features of pillar `(ix, iy)`.
    pub fn pillar(&self, ix: usize, iy: usize) -> &[T] {
        let k = (iy * self.nx + ix) * self.channels;
        &self.data[k..k + self.channels]
    }

    pub fn pillar_flat(&self, flat: usize) -> &[T] {
        &self.data[flat * self.channels..(flat + 1) * self.channels]
    }

    /// Elementwise sum; dims must agree.
    pub fn try_add(&self, other: &Self) -> Result<Self> {
        if self.dims() != other.dims() {
            return Err(mismatch(
                "grid dims",
                format!("{:?}", self.dims()),
                format!("{:?}", other.dims()),
            ));
        }
        Ok(Self {
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect(),
            ..*self
        })
    }

    pub fn scaled(&self, s: T) -> Self {
        Self { data: self.data.iter().map(|&v| v * s).collect(), ..*self }
    }

    /// L2 norm of each pillar's feature, row-major.
    pub fn pillar_norms(&self) -> Vec<f64> {
        self.data
            .chunks(self.channels.max(1))
            .map(|c| c.iter().map(|v| v.widen() * v.widen()).sum::<f64>().sqrt())
            .collect()
    }

    /// Flattened ids of pillars with any nonzero channel.
    pub fn nonzero_pillars(&self) -> Vec<usize> {
        self.data
            .chunks(self.channels.max(1))
            .enumerate()
            .filter(|(_, c)| c.iter().any(|v| *v != T::zero()))
            .map(|(k, _)| k)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_and_norms() {
        let a = BevGrid::from_vec(2, 1, 2, vec![3.0f32, 4.0, 0.0, 0.0]).unwrap();
        let b = BevGrid::from_vec(2, 1, 2, vec![0.0f32, 0.0, 1.0, 0.0]).unwrap();
        let s = a.try_add(&b).unwrap();
        assert_eq!(s.pillar_norms(), vec![5.0, 1.0]);
        assert_eq!(a.nonzero_pillars(), vec![0]);
        assert!(a.try_add(&BevGrid::zeros(1, 2, 2)).is_err());
        assert!(BevGrid::<f32>::from_vec(2, 2, 2, vec![0.0; 7]).is_err());
        assert_eq!(a.pillar(0, 0), &[3.0, 4.0]);
    }
}
