use crate::error::{invalid, Result};
use crate::scalar::Real;

/// Uniform depth discretization: bin `i` covers
/// `[min + i*width, min + (i+1)*width)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthBins<T> {
    min: T,
    width: T,
    count: usize,
}

impl<T: Real> DepthBins<T> {
    pub fn new(min: T, width: T, count: usize) -> Result<Self> {
        if !(min > T::zero() && min.is_finite()) {
            return Err(invalid(format!("depth bin minimum must be positive, got {min}")));
        }
        if !(width > T::zero() && width.is_finite()) {
            return Err(invalid(format!("depth bin width must be positive, got {width}")));
        }
        if count == 0 {
            return Err(invalid("need at least one depth bin"));
        }
        Ok(Self { min, width, count })
    }

    pub fn min(&self) -> T {
        self.min
    }

    pub fn width(&self) -> T {
        self.width
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Upper edge of the last bin.
    pub fn max(&self) -> T {
        self.min + self.width * T::lit(self.count as f64)
    }

    pub fn center(&self, i: usize) -> T {
        self.min + (T::lit(i as f64) + T::lit(0.5)) * self.width
    }

    /// Bin containing `depth`, or `None` outside `[min, max)`.
    pub fn bin_of(&self, depth: T) -> Option<usize> {
        let k = ((depth - self.min) / self.width).floor();
        if !(k >= T::zero()) {
            return None;
        }
        k.to_usize().filter(|&k| k < self.count)
    }

    /// Like [`bin_of`](Self::bin_of) but saturating to the first/last bin.
    pub fn clamped_bin_of(&self, depth: T) -> usize {
        if !(depth >= self.min) {
            return 0;
        }
        self.bin_of(depth).unwrap_or(self.count - 1)
    }
}

impl Default for DepthBins<f64> {
    fn default() -> Self {
        Self { min: 1.0, width: 1.0, count: 59 }
    }
}

impl Default for DepthBins<f32> {
    fn default() -> Self {
        Self { min: 1.0, width: 1.0, count: 59 }
    }
}

/// One lattice element: feature cell `(row, col)` at depth bin `bin`,
/// expressed as pixel coordinates and bin-center depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrustumPoint<T> {
    pub row: usize,
    pub col: usize,
    pub bin: usize,
    pub u: T,
    pub v: T,
    pub depth: T,
}

/// Expands every feature cell along all depth bins. Cells are visited in
/// row-major order with the bin index innermost; pixel coordinates sit at
/// cell centers in original-image units.
pub fn build_frustum<T: Real>(
    feature_shape: (usize, usize),
    stride: usize,
    bins: &DepthBins<T>,
) -> Result<Vec<FrustumPoint<T>>> {
    let (rows, cols) = feature_shape;
    if rows == 0 || cols == 0 {
        return Err(invalid(format!("feature shape must be nonzero, got {rows}x{cols}")));
    }
    if stride == 0 {
        return Err(invalid("stride must be nonzero"));
    }
    let s = T::lit(stride as f64);
    let half = T::lit(0.5);
    let depths: Vec<T> = (0..bins.count()).map(|d| bins.center(d)).collect();
    let mut out = Vec::with_capacity(rows * cols * depths.len());
    for row in 0..rows {
        let v = (T::lit(row as f64) + half) * s;
        for col in 0..cols {
            let u = (T::lit(col as f64) + half) * s;
            out.extend(depths.iter().enumerate().map(|(bin, &depth)| FrustumPoint {
                row,
                col,
                bin,
                u,
                v,
                depth,
            }));
        }
    }
    Ok(out)
}
