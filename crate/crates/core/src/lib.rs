//! Semantic-aware camera-to-BEV view transformation.
//!
//! Image feature cells are lifted into a frustum of virtual points, scored
//! by a per-bin depth distribution and a per-pixel foreground score, filtered
//! by two thresholds, and sum-pooled into a pillarized bird's-eye-view grid.
//! Around that kernel the crate provides feature-space paste augmentation,
//! the two-stage cross-task gating math, supervision labels, and a
//! synthetic-scene oracle for end-to-end checks.
//!
//! Everything is generic over [`Real`] (`f32`/`f64`); the aliases below fix
//! the precisions used by the command-line pipeline.

// `!(x > y)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod augment;
pub mod error;
pub mod geometry;
pub mod interop;
pub mod pooling;
pub mod scalar;
pub mod scoring;
pub mod synth;

pub use error::{Error, Result};
pub use scalar::Real;

/// Library version, exported to foreign callers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type CameraF64 = geometry::Camera<f64>;
pub type CameraRigF64 = geometry::CameraRig<f64>;
pub type CameraRigF32 = geometry::CameraRig<f32>;
pub type BevConfigF32 = geometry::BevConfig<f32>;
pub type BevConfigF64 = geometry::BevConfig<f64>;
pub type DepthBinsF32 = geometry::DepthBins<f32>;
pub type EgoPointF64 = geometry::EgoPoint<f64>;
pub type Box3DF32 = geometry::Box3D<f32>;
pub type Box3DF64 = geometry::Box3D<f64>;
pub type VirtualPointsF32 = pooling::VirtualPoints<f32>;
pub type VirtualPointsF64 = pooling::VirtualPoints<f64>;
pub type PoolConfigF32 = pooling::PoolConfig<f32>;
pub type BevGridF32 = pooling::BevGrid<f32>;
pub type BevGridF64 = pooling::BevGrid<f64>;
pub type FeatureMapF64 = scoring::FeatureMap<f64>;
pub type BdaParamsF64 = augment::BdaParams<f64>;
pub type SceneSpecF32 = synth::SceneSpec<f32>;
pub type SceneSpecF64 = synth::SceneSpec<f64>;
