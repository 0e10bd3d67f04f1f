//! Depth/semantic score maps, the two-stage cross-task gating math,
//! supervision labels from projected point clouds, and loss composition.

mod labels;
mod loss;
mod maps;
mod msct;

pub use labels::{depth_labels_from_points, seg_labels_from_points, LabelMaps};
pub use loss::{depth_loss, seg_loss, total_loss, LossWeights, PROB_FLOOR};
pub use maps::{semantic_from_logits, softmax_over_depth, DepthDistribution, FeatureMap, SemanticMap};
pub use msct::{
    conv1x1, mtd_fuse, sigmoid, sigmoid_gate, upsample_fuse, upsample_nearest, ConvWeights,
    GatedBranch, MsctHead, MsctOutput, MtdWeights,
};
