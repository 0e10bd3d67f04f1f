use crate::error::{invalid, mismatch, Result};
use crate::scalar::Real;

use super::msct::sigmoid;

/// Dense `channels x height x width` map, channel-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap<T> {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<T>,
}

impl<T: Real> FeatureMap<T> {
    pub fn new(channels: usize, height: usize, width: usize, data: Vec<T>) -> Result<Self> {
        let want = channels * height * width;
        if data.len() != want {
            return Err(mismatch("data", want, data.len()));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(invalid("feature values must be finite"));
        }
        Ok(Self { channels, height, width, data })
    }

    pub fn zeros(channels: usize, height: usize, width: usize) -> Self {
        Self {
            channels,
            height,
            width,
            data: vec![T::zero(); channels * height * width],
        }
    }

    pub fn from_fn(
        channels: usize,
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize, usize) -> T,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(channels * height * width);
        for c in 0..channels {
            for i in 0..height {
                for j in 0..width {
                    data.push(f(c, i, j));
                }
            }
        }
        Self::new(channels, height, width, data)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.channels, self.height, self.width)
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn get(&self, c: usize, i: usize, j: usize) -> T {
        self.data[(c * self.height + i) * self.width + j]
    }

    /// All channels at one cell, gathered into `out`.
    pub fn cell_into(&self, i: usize, j: usize, out: &mut Vec<T>) {
        out.clear();
        let plane = self.height * self.width;
        let off = i * self.width + j;
        out.extend((0..self.channels).map(|c| self.data[c * plane + off]));
    }

    pub(crate) fn from_raw(channels: usize, height: usize, width: usize, data: Vec<T>) -> Self {
        debug_assert_eq!(data.len(), channels * height * width);
        Self { channels, height, width, data }
    }

    pub(crate) fn into_data(self) -> Vec<T> {
        self.data
    }
}

/// Per-cell categorical distribution over depth bins, `bins x height x width`.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthDistribution<T> {
    map: FeatureMap<T>,
}

impl<T: Real> DepthDistribution<T> {
    /// Validates that every cell is a probability vector (sum 1 within 1e-6).
    pub fn new(map: FeatureMap<T>) -> Result<Self> {
        let (bins, h, w) = map.shape();
        if bins == 0 {
            return Err(invalid("depth distribution needs at least one bin"));
        }
        let tol = 1e-6;
        for i in 0..h {
            for j in 0..w {
                let mut sum = 0.0;
                for d in 0..bins {
                    let p = map.get(d, i, j);
                    if !(p >= T::zero() && p <= T::one()) {
                        return Err(invalid(format!("probability {p} at ({d},{i},{j}) outside [0,1]")));
                    }
                    sum += p.widen();
                }
                if (sum - 1.0).abs() > tol {
                    return Err(invalid(format!("cell ({i},{j}) sums to {sum}")));
                }
            }
        }
        Ok(Self { map })
    }

    /// One-hot distribution: `bin_at(i, j)` receives all the mass.
    pub fn one_hot(bins: usize, height: usize, width: usize, bin_at: impl Fn(usize, usize) -> usize) -> Result<Self> {
        let map = FeatureMap::from_fn(bins, height, width, |d, i, j| {
            if bin_at(i, j) == d {
                T::one()
            } else {
                T::zero()
            }
        })?;
        Self::new(map)
    }

    pub fn bins(&self) -> usize {
        self.map.channels()
    }

    pub fn height(&self) -> usize {
        self.map.height()
    }

    pub fn width(&self) -> usize {
        self.map.width()
    }

    #[inline]
    pub fn prob(&self, bin: usize, i: usize, j: usize) -> T {
        self.map.get(bin, i, j)
    }

    pub fn as_map(&self) -> &FeatureMap<T> {
        &self.map
    }
}

/// Per-cell foreground score in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticMap<T> {
    height: usize,
    width: usize,
    data: Vec<T>,
}

impl<T: Real> SemanticMap<T> {
    pub fn new(height: usize, width: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != height * width {
            return Err(mismatch("data", height * width, data.len()));
        }
        if let Some(bad) = data.iter().find(|v| !(**v >= T::zero() && **v <= T::one())) {
            return Err(invalid(format!("semantic score {bad} outside [0,1]")));
        }
        Ok(Self { height, width, data })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.width + j]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }
}

/// Softmax across the bin axis of an `N_D x H x W` logit map, stabilized by
/// subtracting the per-cell maximum.
pub fn softmax_over_depth<T: Real>(logits: &FeatureMap<T>) -> Result<DepthDistribution<T>> {
    let (bins, h, w) = logits.shape();
    if bins == 0 {
        return Err(invalid("need at least one depth bin"));
    }
    if logits.data().iter().any(|v| !v.is_finite()) {
        return Err(invalid("depth logits must be finite"));
    }
    let plane = h * w;
    let src = logits.data();
    let mut out = vec![T::zero(); src.len()];
    let mut buf = vec![T::zero(); bins];
    for cell in 0..plane {
        let max = (0..bins).map(|d| src[d * plane + cell]).fold(T::neg_infinity(), T::max);
        let mut sum = T::zero();
        for (d, e) in buf.iter_mut().enumerate() {
            *e = (src[d * plane + cell] - max).exp();
            sum = sum + *e;
        }
        for (d, e) in buf.iter().enumerate() {
            out[d * plane + cell] = *e / sum;
        }
    }
    Ok(DepthDistribution { map: FeatureMap::from_raw(bins, h, w, out) })
}

/// Elementwise logistic of a single-channel logit map.
pub fn semantic_from_logits<T: Real>(logits: &FeatureMap<T>) -> Result<SemanticMap<T>> {
    if logits.channels() != 1 {
        return Err(mismatch("logits.channels", 1, logits.channels()));
    }
    SemanticMap::new(
        logits.height(),
        logits.width(),
        logits.data().iter().map(|&x| sigmoid(x)).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_logits() {
        let m = FeatureMap::new(4, 1, 1, vec![0.7f64; 4]).unwrap();
        let p = softmax_over_depth(&m).unwrap();
        for d in 0..4 {
            assert!((p.prob(d, 0, 0) - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn two_bin_analytic() {
        let m = FeatureMap::new(2, 1, 1, vec![0.0f64, 3f64.ln()]).unwrap();
        let p = softmax_over_depth(&m).unwrap();
        assert!((p.prob(0, 0, 0) - 0.25).abs() < 1e-15);
        assert!((p.prob(1, 0, 0) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn nan_rejected() {
        let m = FeatureMap::from_raw(2, 1, 1, vec![0.0f64, f64::NAN]);
        assert!(softmax_over_depth(&m).is_err());
        assert!(FeatureMap::new(2, 1, 1, vec![0.0f64, f64::NAN]).is_err());
    }

    #[test]
    fn large_logits_stay_finite() {
        let m = FeatureMap::new(3, 1, 1, vec![1000.0f64, 999.0, -1000.0]).unwrap();
        let p = softmax_over_depth(&m).unwrap();
        let s: f64 = (0..3).map(|d| p.prob(d, 0, 0)).sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn distribution_validation() {
        let bad = FeatureMap::new(2, 1, 1, vec![0.5f64, 0.6]).unwrap();
        assert!(DepthDistribution::new(bad).is_err());
        let oh = DepthDistribution::<f32>::one_hot(3, 2, 2, |i, j| i + j).unwrap();
        assert_eq!(oh.prob(2, 1, 1), 1.0);
        assert!(SemanticMap::new(1, 2, vec![0.5f64, 1.5]).is_err());
        assert!(SemanticMap::new(1, 2, vec![0.5f64]).is_err());
    }
}
