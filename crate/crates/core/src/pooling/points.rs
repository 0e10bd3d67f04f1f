use crate::error::{invalid, mismatch, Result};
use crate::geometry::{Camera, DepthBins, EgoPoint, FrustumPoint};
use crate::scalar::Real;
use crate::scoring::{DepthDistribution, FeatureMap, SemanticMap};

/// Read access to a set of scored virtual points.
pub trait PointSource<T: Real>: Sync {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn channels(&self) -> usize;

    fn position(&self, i: usize) -> EgoPoint<T>;

    fn depth_score(&self, i: usize) -> T;

    fn semantic_score(&self, i: usize) -> T;

    fn context(&self, i: usize) -> &[T];
}

/// Image element a virtual point was lifted from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PixelOrigin {
    pub camera: u32,
    pub row: u32,
    pub col: u32,
}

/// Borrowed view of one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VirtualPoint<'a, T> {
    pub position: EgoPoint<T>,
    pub origin: PixelOrigin,
    pub bin: u32,
    pub depth_score: T,
    pub semantic_score: T,
    pub context: &'a [T],
}

impl<T: Real> VirtualPoint<'_, T> {
    /// The pooled feature `alpha * c`.
    pub fn feature(&self) -> Vec<T> {
        self.context.iter().map(|&c| self.depth_score * c).collect()
    }
}

/// Owned point storage. Semantic scores and context features live in a
/// per-pixel table; each point references its pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct VirtualPoints<T> {
    channels: usize,
    positions: Vec<EgoPoint<T>>,
    depth_scores: Vec<T>,
    bins: Vec<u32>,
    pixel_of: Vec<u32>,
    origins: Vec<PixelOrigin>,
    semantic: Vec<T>,
    contexts: Vec<T>,
}

fn check_unit<T: Real>(what: &str, v: T) -> Result<()> {
    if v >= T::zero() && v <= T::one() {
        Ok(())
    } else {
        Err(invalid(format!("{what} {v} outside [0, 1]")))
    }
}

impl<T: Real> VirtualPoints<T> {
    pub fn new(channels: usize) -> Self {
        Self {
            channels,
            positions: Vec::new(),
            depth_scores: Vec::new(),
            bins: Vec::new(),
            pixel_of: Vec::new(),
            origins: Vec::new(),
            semantic: Vec::new(),
            contexts: Vec::new(),
        }
    }

    pub fn with_capacity(channels: usize, points: usize, pixels: usize) -> Self {
        let mut s = Self::new(channels);
        s.positions.reserve(points);
        s.depth_scores.reserve(points);
        s.bins.reserve(points);
        s.pixel_of.reserve(points);
        s.origins.reserve(pixels);
        s.semantic.reserve(pixels);
        s.contexts.reserve(pixels * channels);
        s
    }

    /// Registers a pixel and returns its id.
    pub fn add_pixel(&mut self, origin: PixelOrigin, semantic: T, context: &[T]) -> Result<u32> {
        check_unit("semantic score", semantic)?;
        if context.len() != self.channels {
            return Err(mismatch("context", self.channels, context.len()));
        }
        if context.iter().any(|c| !c.is_finite()) {
            return Err(invalid("context features must be finite"));
        }
        let id = u32::try_from(self.origins.len()).map_err(|_| invalid("too many pixels"))?;
        self.origins.push(origin);
        self.semantic.push(semantic);
        self.contexts.extend_from_slice(context);
        Ok(id)
    }

    pub fn add_point(&mut self, pixel: u32, bin: u32, position: EgoPoint<T>, depth_score: T) -> Result<()> {
        check_unit("depth score", depth_score)?;
        if pixel as usize >= self.origins.len() {
            return Err(invalid(format!("unknown pixel id {pixel}")));
        }
        if !position.is_finite() {
            return Err(invalid("point position must be finite"));
        }
        self.positions.push(position);
        self.depth_scores.push(depth_score);
        self.bins.push(bin);
        self.pixel_of.push(pixel);
        Ok(())
    }

    pub fn n_pixels(&self) -> usize {
        self.origins.len()
    }

    pub fn positions(&self) -> &[EgoPoint<T>] {
        &self.positions
    }

    pub fn depth_scores(&self) -> &[T] {
        &self.depth_scores
    }

    pub fn pixel_of(&self, i: usize) -> u32 {
        self.pixel_of[i]
    }

    pub fn get(&self, i: usize) -> VirtualPoint<'_, T> {
        let px = self.pixel_of[i] as usize;
        VirtualPoint {
            position: self.positions[i],
            origin: self.origins[px],
            bin: self.bins[i],
            depth_score: self.depth_scores[i],
            semantic_score: self.semantic[px],
            context: &self.contexts[px * self.channels..(px + 1) * self.channels],
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = VirtualPoint<'_, T>> + '_ {
        (0..self.positions.len()).map(move |i| self.get(i))
    }

    /// Appends `other`, remapping its pixel ids.
    pub fn extend_from(&mut self, other: &Self) -> Result<()> {
        if other.channels != self.channels {
            return Err(mismatch("channels", self.channels, other.channels));
        }
        let base = u32::try_from(self.origins.len()).map_err(|_| invalid("too many pixels"))?;
        self.positions.extend_from_slice(&other.positions);
        self.depth_scores.extend_from_slice(&other.depth_scores);
        self.bins.extend_from_slice(&other.bins);
        self.pixel_of.extend(other.pixel_of.iter().map(|p| p + base));
        self.origins.extend_from_slice(&other.origins);
        self.semantic.extend_from_slice(&other.semantic);
        self.contexts.extend_from_slice(&other.contexts);
        Ok(())
    }

    /// Copy with every position mapped through `f`; scores and features unchanged.
    pub fn map_positions(&self, f: impl Fn(&EgoPoint<T>) -> EgoPoint<T>) -> Self {
        Self {
            positions: self.positions.iter().map(f).collect(),
            ..self.clone()
        }
    }

    /// Copy whose point `k` is `self`'s point `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.len() {
            return Err(mismatch("order", self.len(), order.len()));
        }
        let mut seen = vec![false; order.len()];
        for &k in order {
            if k >= order.len() || std::mem::replace(&mut seen[k], true) {
                return Err(invalid("order is not a permutation"));
            }
        }
        Ok(Self {
            positions: order.iter().map(|&k| self.positions[k]).collect(),
            depth_scores: order.iter().map(|&k| self.depth_scores[k]).collect(),
            bins: order.iter().map(|&k| self.bins[k]).collect(),
            pixel_of: order.iter().map(|&k| self.pixel_of[k]).collect(),
            ..self.clone()
        })
    }
}

impl<T: Real> PointSource<T> for VirtualPoints<T> {
    #[inline]
    fn len(&self) -> usize {
        self.positions.len()
    }

    #[inline]
    fn channels(&self) -> usize {
        self.channels
    }

    #[inline]
    fn position(&self, i: usize) -> EgoPoint<T> {
        self.positions[i]
    }

    #[inline]
    fn depth_score(&self, i: usize) -> T {
        self.depth_scores[i]
    }

    #[inline]
    fn semantic_score(&self, i: usize) -> T {
        self.semantic[self.pixel_of[i] as usize]
    }

    #[inline]
    fn context(&self, i: usize) -> &[T] {
        let px = self.pixel_of[i] as usize;
        &self.contexts[px * self.channels..(px + 1) * self.channels]
    }
}

/// Lifts one camera's scored feature maps into virtual points appended to
/// `out`. `lattice` is the camera's frustum (row-major cells, bin innermost),
/// possibly with pixel coordinates remapped by image augmentation.
pub fn score_points<T: Real>(
    out: &mut VirtualPoints<T>,
    camera_id: u32,
    cam: &Camera<T>,
    lattice: &[FrustumPoint<T>],
    context: &FeatureMap<T>,
    depth: &DepthDistribution<T>,
    semantic: &SemanticMap<T>,
) -> Result<()> {
    let (h, w) = (context.height(), context.width());
    if context.channels() != out.channels() {
        return Err(mismatch("context.channels", out.channels(), context.channels()));
    }
    if (depth.height(), depth.width()) != (h, w) {
        return Err(mismatch("depth", format!("{h}x{w}"), format!("{}x{}", depth.height(), depth.width())));
    }
    if (semantic.height(), semantic.width()) != (h, w) {
        return Err(mismatch(
            "semantic",
            format!("{h}x{w}"),
            format!("{}x{}", semantic.height(), semantic.width()),
        ));
    }
    let bins = depth.bins();
    if lattice.len() != h * w * bins {
        return Err(mismatch("lattice", h * w * bins, lattice.len()));
    }
    let mut cell = Vec::with_capacity(out.channels());
    for (k, chunk) in lattice.chunks(bins).enumerate() {
        let (i, j) = (k / w, k % w);
        context.cell_into(i, j, &mut cell);
        let origin = PixelOrigin { camera: camera_id, row: i as u32, col: j as u32 };
        let px = out.add_pixel(origin, semantic.get(i, j), &cell)?;
        for (d, fp) in chunk.iter().enumerate() {
            if (fp.row, fp.col, fp.bin) != (i, j, d) {
                return Err(invalid(format!(
                    "lattice entry {} is ({},{},{}), expected ({i},{j},{d})",
                    k * bins + d,
                    fp.row,
                    fp.col,
                    fp.bin
                )));
            }
            let position = cam.cam_to_ego(fp.u, fp.v, fp.depth)?;
            out.add_point(px, d as u32, position, depth.prob(d, i, j))?;
        }
    }
    Ok(())
}

/// [`score_points`] over the camera's own, unaugmented frustum.
pub fn score_camera<T: Real>(
    out: &mut VirtualPoints<T>,
    camera_id: u32,
    cam: &Camera<T>,
    bins: &DepthBins<T>,
    context: &FeatureMap<T>,
    depth: &DepthDistribution<T>,
    semantic: &SemanticMap<T>,
) -> Result<()> {
    let lattice = crate::geometry::build_frustum(cam.feature_shape(), cam.stride(), bins)?;
    score_points(out, camera_id, cam, &lattice, context, depth, semantic)
}
