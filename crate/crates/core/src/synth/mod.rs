//! Synthetic scenes with exact ground truth: boxes on a ground plane, an
//! oracle ray-cast renderer producing one-hot depth and binary semantics,
//! and a surface-sampled point cloud for supervision labels.

mod cloud;
mod render;
mod scene;

pub use cloud::{sample_point_cloud, PointCloud};
pub use render::{render_view, render_views, scene_points, RenderedView, BACKGROUND_CLASS};
pub use scene::{footprints_overlap, gen_scene, SceneParams, SceneSpec};
