//! Feature-space paste augmentation and the geometric samplers it relies on.
//!
//! Extra BEV augmentation is applied to a pasted frame's virtual points
//! before pooling (not to the pooled grid), and identically to that frame's
//! boxes, so pasted features stay aligned with their targets.

mod bda;
mod image;
mod paste;

pub use bda::{apply_bda_boxes, apply_bda_point, apply_bda_points, sample_bda, BdaParams, BdaRanges};
pub use image::{augment_lattice, sample_image_aug, ImageAugParams, ImageAugRanges};
pub use paste::{bev_paste, paste_batch, sample_paste_plan, Pasted, PasteEntry, PasteFrame, PastePlan};
