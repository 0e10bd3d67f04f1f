//! Two-stage cross-task head math.
//!
//! Stage one fuses the coarse depth and semantic task features with gated
//! cross-injection:
//!
//! ```text
//! D' = D + gate(D) * task(S)
//! S' = S + gate(S) * task(D)
//! ```
//!
//! Stage two upsamples each fused map 2x and adds a gated projection of the
//! finer image feature. Every site owns its own gate/task weights.

use crate::error::{invalid, mismatch, Result};
use crate::scalar::Real;

use super::maps::{semantic_from_logits, softmax_over_depth, DepthDistribution, FeatureMap, SemanticMap};

/// Logistic function, saturated to the representable interior of (0, 1).
#[inline]
pub fn sigmoid<T: Real>(x: T) -> T {
    let s = T::one() / (T::one() + (-x).exp());
    let hi = T::one() - T::epsilon() / T::lit(2.0);
    s.max(T::min_positive_value()).min(hi)
}

/// 1x1 convolution: `out x in` weight matrix (row-major) plus bias.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvWeights<T> {
    out_channels: usize,
    in_channels: usize,
    weight: Vec<T>,
    bias: Vec<T>,
}

impl<T: Real> ConvWeights<T> {
    pub fn new(out_channels: usize, in_channels: usize, weight: Vec<T>, bias: Vec<T>) -> Result<Self> {
        if weight.len() != out_channels * in_channels {
            return Err(mismatch("weight", out_channels * in_channels, weight.len()));
        }
        if bias.len() != out_channels {
            return Err(mismatch("bias", out_channels, bias.len()));
        }
        if weight.iter().chain(&bias).any(|v| !v.is_finite()) {
            return Err(invalid("convolution weights must be finite"));
        }
        Ok(Self { out_channels, in_channels, weight, bias })
    }

    pub fn zeros(out_channels: usize, in_channels: usize) -> Self {
        Self {
            out_channels,
            in_channels,
            weight: vec![T::zero(); out_channels * in_channels],
            bias: vec![T::zero(); out_channels],
        }
    }

    /// `scale * I` with zero bias.
    pub fn identity(channels: usize, scale: T) -> Self {
        let mut w = Self::zeros(channels, channels);
        for k in 0..channels {
            w.weight[k * channels + k] = scale;
        }
        w
    }

    pub fn out_channels(&self) -> usize {
        self.out_channels
    }

    pub fn in_channels(&self) -> usize {
        self.in_channels
    }

    #[inline]
    pub fn weight(&self, o: usize, i: usize) -> T {
        self.weight[o * self.in_channels + i]
    }

    #[inline]
    pub fn bias(&self, o: usize) -> T {
        self.bias[o]
    }
}

/// Applies a 1x1 convolution at every cell.
pub fn conv1x1<T: Real>(f: &FeatureMap<T>, w: &ConvWeights<T>) -> Result<FeatureMap<T>> {
    if f.channels() != w.in_channels {
        return Err(mismatch("weights.in_channels", f.channels(), w.in_channels));
    }
    let plane = f.height() * f.width();
    let src = f.data();
    let mut out = Vec::with_capacity(w.out_channels * plane);
    for o in 0..w.out_channels {
        let row = &w.weight[o * w.in_channels..(o + 1) * w.in_channels];
        out.extend((0..plane).map(|cell| {
            row.iter()
                .enumerate()
                .fold(w.bias[o], |acc, (k, &wk)| acc + wk * src[k * plane + cell])
        }));
    }
    Ok(FeatureMap::from_raw(w.out_channels, f.height(), f.width(), out))
}

/// Gate map `sigmoid(W_G f)`.
pub fn sigmoid_gate<T: Real>(f: &FeatureMap<T>, gate: &ConvWeights<T>) -> Result<FeatureMap<T>> {
    let z = conv1x1(f, gate)?;
    let (c, h, w) = z.shape();
    Ok(FeatureMap::from_raw(c, h, w, z.into_data().into_iter().map(sigmoid).collect()))
}

/// Weights of one gated injection site.
#[derive(Debug, Clone, PartialEq)]
pub struct GatedBranch<T> {
    pub gate: ConvWeights<T>,
    pub task: ConvWeights<T>,
}

impl<T: Real> GatedBranch<T> {
    /// `target + gate(gate_src) * task(task_src)`.
    fn inject(
        &self,
        target: &FeatureMap<T>,
        gate_src: &FeatureMap<T>,
        task_src: &FeatureMap<T>,
    ) -> Result<FeatureMap<T>> {
        let g = sigmoid_gate(gate_src, &self.gate)?;
        let t = conv1x1(task_src, &self.task)?;
        if g.shape() != target.shape() {
            return Err(mismatch("gate output", fmt_shape(target.shape()), fmt_shape(g.shape())));
        }
        if t.shape() != target.shape() {
            return Err(mismatch("task output", fmt_shape(target.shape()), fmt_shape(t.shape())));
        }
        let (c, h, w) = target.shape();
        let data = target
            .data()
            .iter()
            .zip(g.data())
            .zip(t.data())
            .map(|((&x, &gv), &tv)| x + gv * tv)
            .collect();
        Ok(FeatureMap::from_raw(c, h, w, data))
    }

    pub fn zeros(out_channels: usize, in_channels: usize) -> Self {
        Self {
            gate: ConvWeights::zeros(out_channels, in_channels),
            task: ConvWeights::zeros(out_channels, in_channels),
        }
    }
}

/// Independent weights for the depth-side and semantic-side injections.
#[derive(Debug, Clone, PartialEq)]
pub struct MtdWeights<T> {
    /// Gates on the depth feature, transforms the semantic feature.
    pub depth: GatedBranch<T>,
    /// Gates on the semantic feature, transforms the depth feature.
    pub semantic: GatedBranch<T>,
}

fn fmt_shape(s: (usize, usize, usize)) -> String {
    format!("{}x{}x{}", s.0, s.1, s.2)
}

/// Cross-task distillation between the depth and semantic task features.
pub fn mtd_fuse<T: Real>(
    depth: &FeatureMap<T>,
    semantic: &FeatureMap<T>,
    w: &MtdWeights<T>,
) -> Result<(FeatureMap<T>, FeatureMap<T>)> {
    if depth.shape() != semantic.shape() {
        return Err(mismatch("semantic", fmt_shape(depth.shape()), fmt_shape(semantic.shape())));
    }
    let d = w.depth.inject(depth, depth, semantic)?;
    let s = w.semantic.inject(semantic, semantic, depth)?;
    Ok((d, s))
}

/// Nearest-neighbour 2x upsampling.
pub fn upsample_nearest<T: Real>(f: &FeatureMap<T>) -> FeatureMap<T> {
    let (c, h, w) = f.shape();
    let (h2, w2) = (2 * h, 2 * w);
    let mut out = Vec::with_capacity(c * h2 * w2);
    for ch in 0..c {
        for i in 0..h2 {
            out.extend((0..w2).map(|j| f.get(ch, i / 2, j / 2)));
        }
    }
    FeatureMap::from_raw(c, h2, w2, out)
}

/// `Up(coarse) + gate(fine) * task(fine)` for one task branch.
pub fn upsample_fuse<T: Real>(
    coarse: &FeatureMap<T>,
    fine_image: &FeatureMap<T>,
    w: &GatedBranch<T>,
) -> Result<FeatureMap<T>> {
    if fine_image.height() != 2 * coarse.height() || fine_image.width() != 2 * coarse.width() {
        return Err(mismatch(
            "fine_image",
            format!("{}x{} (2x coarse)", 2 * coarse.height(), 2 * coarse.width()),
            format!("{}x{}", fine_image.height(), fine_image.width()),
        ));
    }
    w.inject(&upsample_nearest(coarse), fine_image, fine_image)
}

/// Weights for the full two-stage head, including the 1x1 prediction heads
/// that turn fused features into depth/semantic logits.
#[derive(Debug, Clone, PartialEq)]
pub struct MsctHead<T> {
    pub distill: MtdWeights<T>,
    pub fuse_depth: GatedBranch<T>,
    pub fuse_semantic: GatedBranch<T>,
    /// `depth_bins x C` logit head.
    pub depth_head: ConvWeights<T>,
    /// `1 x C` logit head.
    pub semantic_head: ConvWeights<T>,
}

/// Predictions at both scales; the fine pair feeds pooling.
#[derive(Debug, Clone, PartialEq)]
pub struct MsctOutput<T> {
    pub coarse_depth: DepthDistribution<T>,
    pub coarse_semantic: SemanticMap<T>,
    pub fine_depth: DepthDistribution<T>,
    pub fine_semantic: SemanticMap<T>,
}

impl<T: Real> MsctHead<T> {
    /// Runs both stages from the coarse task features and the fine image feature.
    pub fn forward(
        &self,
        depth16: &FeatureMap<T>,
        semantic16: &FeatureMap<T>,
        image8: &FeatureMap<T>,
    ) -> Result<MsctOutput<T>> {
        let coarse_depth = softmax_over_depth(&conv1x1(depth16, &self.depth_head)?)?;
        let coarse_semantic = semantic_from_logits(&conv1x1(semantic16, &self.semantic_head)?)?;
        let (d16, s16) = mtd_fuse(depth16, semantic16, &self.distill)?;
        let d8 = upsample_fuse(&d16, image8, &self.fuse_depth)?;
        let s8 = upsample_fuse(&s16, image8, &self.fuse_semantic)?;
        Ok(MsctOutput {
            coarse_depth,
            coarse_semantic,
            fine_depth: softmax_over_depth(&conv1x1(&d8, &self.depth_head)?)?,
            fine_semantic: semantic_from_logits(&conv1x1(&s8, &self.semantic_head)?)?,
        })
    }
}
