//! Run configuration: a sectioned TOML file with sections `rig`, `bev`,
//! `bins`, `pool`, `paste`, `scene`, `loss` and `output`. Every section
//! must be present; keys inside a section fall back to the defaults below.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use sabev::augment::BdaRanges;
use sabev::geometry::{BevConfig, Box3D, CameraRig, DepthBins, EgoPoint};
use sabev::pooling::PoolConfig;
use sabev::scoring::LossWeights;
use sabev::synth::{SceneParams, SceneSpec};

use crate::error::{CliError, Result};

/// Environment variable overriding `[output] dir`.
pub const OUTPUT_DIR_ENV: &str = "SABEV_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RigSection {
    pub cameras: usize,
    pub image_width: usize,
    pub image_height: usize,
    pub stride: usize,
    pub fx: f64,
    pub fy: f64,
    pub mount_height: f64,
    pub radius: f64,
    pub yaw_offset_deg: f64,
}

impl Default for RigSection {
    fn default() -> Self {
        Self {
            cameras: 6,
            image_width: 704,
            image_height: 256,
            stride: 16,
            fx: 560.0,
            fy: 560.0,
            mount_height: 1.5,
            radius: 0.5,
            yaw_offset_deg: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BevSection {
    pub x_range: [f64; 2],
    pub y_range: [f64; 2],
    pub z_range: [f64; 2],
    pub pillar: [f64; 3],
    pub channels: usize,
}

impl Default for BevSection {
    fn default() -> Self {
        Self {
            x_range: [-51.2, 51.2],
            y_range: [-51.2, 51.2],
            z_range: [-5.0, 3.0],
            pillar: [0.8, 0.8, 8.0],
            channels: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BinsSection {
    pub min: f64,
    pub width: f64,
    pub count: usize,
}

impl Default for BinsSection {
    fn default() -> Self {
        Self { min: 1.0, width: 1.0, count: 59 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PoolSection {
    pub depth_threshold: f64,
    pub semantic_threshold: f64,
}

impl Default for PoolSection {
    fn default() -> Self {
        Self {
            depth_threshold: sabev::pooling::DEFAULT_DEPTH_THRESHOLD,
            semantic_threshold: sabev::pooling::DEFAULT_SEMANTIC_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PasteSection {
    pub enabled: bool,
    pub batch_size: usize,
    pub expected_pastes: f64,
    pub extra_bda: bool,
}

impl Default for PasteSection {
    fn default() -> Self {
        Self { enabled: false, batch_size: 4, expected_pastes: 1.0, extra_bda: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SceneSection {
    pub seed: u64,
    pub objects: usize,
    pub extent: f64,
    pub ground_z: f64,
    pub clear_radius: f64,
    /// Gaussian spread (m) applied to the one-hot oracle depth; 0 keeps it one-hot.
    pub depth_sigma: f64,
    /// Point-cloud size used for supervision labels and the loss report.
    pub cloud_points: usize,
    pub cloud_bg_ratio: f64,
    /// Explicit boxes `[x, y, z, l, w, h, yaw, class]`; when present they
    /// replace the seeded placement (used to replay a scene).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boxes: Option<Vec<[f64; 8]>>,
}

impl Default for SceneSection {
    fn default() -> Self {
        Self {
            seed: 0,
            objects: 8,
            extent: 80.0,
            ground_z: 0.0,
            clear_radius: 4.0,
            depth_sigma: 0.0,
            cloud_points: 20_000,
            cloud_bg_ratio: 0.5,
            boxes: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LossSection {
    pub semantic_weight: f64,
    pub depth_weight: f64,
}

impl Default for LossSection {
    fn default() -> Self {
        Self { semantic_weight: 1.0, depth_weight: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub rig: RigSection,
    pub bev: BevSection,
    pub bins: BinsSection,
    pub pool: PoolSection,
    pub paste: PasteSection,
    pub scene: SceneSection,
    pub loss: LossSection,
    pub output: OutputSection,
}

impl RunConfig {
    /// Parses and validates config text. `origin` labels diagnostics.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(format!("{origin}: {e}")))?;
        cfg.validate().map_err(|e| CliError::Config(format!("{origin}: {e}")))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Builds every derived object once so bad values surface at load time.
    pub fn validate(&self) -> Result<()> {
        self.rig()?;
        self.bev()?;
        self.bins()?;
        self.pool_config()?;
        self.loss_weights()?;
        let s = &self.scene;
        if !(0.0..=1.0).contains(&s.cloud_bg_ratio) {
            return Err(CliError::Config(format!("[scene] cloud_bg_ratio must lie in [0, 1], got {}", s.cloud_bg_ratio)));
        }
        if !(s.depth_sigma >= 0.0 && s.depth_sigma.is_finite()) {
            return Err(CliError::Config(format!("[scene] depth_sigma must be >= 0, got {}", s.depth_sigma)));
        }
        if self.paste.batch_size == 0 {
            return Err(CliError::Config("[paste] batch_size must be at least 1".into()));
        }
        if !(self.paste.expected_pastes >= 0.0 && self.paste.expected_pastes.is_finite()) {
            return Err(CliError::Config("[paste] expected_pastes must be finite and >= 0".into()));
        }
        if let Some(boxes) = &s.boxes {
            self.explicit_scene(boxes)?.validate(&self.bev()?)?;
        }
        Ok(())
    }

    pub fn rig(&self) -> Result<CameraRig<f32>> {
        let r = &self.rig;
        Ok(CameraRig::ring(
            r.cameras,
            (r.image_width, r.image_height),
            r.stride,
            r.fx as f32,
            r.fy as f32,
            r.mount_height as f32,
            r.radius as f32,
            r.yaw_offset_deg.to_radians() as f32,
        )?)
    }

    pub fn bev(&self) -> Result<BevConfig<f32>> {
        let b = &self.bev;
        let pair = |r: [f64; 2]| (r[0] as f32, r[1] as f32);
        Ok(BevConfig::new(
            pair(b.x_range),
            pair(b.y_range),
            pair(b.z_range),
            b.pillar.map(|v| v as f32),
            b.channels,
        )?)
    }

    pub fn bins(&self) -> Result<DepthBins<f32>> {
        Ok(DepthBins::new(self.bins.min as f32, self.bins.width as f32, self.bins.count)?)
    }

    pub fn pool_config(&self) -> Result<PoolConfig<f32>> {
        Ok(PoolConfig::new(
            self.pool.depth_threshold as f32,
            self.pool.semantic_threshold as f32,
            self.bev()?,
        )?)
    }

    pub fn loss_weights(&self) -> Result<LossWeights<f64>> {
        Ok(LossWeights::new(self.loss.semantic_weight, self.loss.depth_weight)?)
    }

    pub fn scene_params(&self) -> SceneParams {
        SceneParams {
            extent: self.scene.extent,
            ground_z: self.scene.ground_z,
            clear_radius: self.scene.clear_radius,
            ..SceneParams::default()
        }
    }

    pub fn bda_ranges(&self) -> Option<BdaRanges> {
        self.paste.extra_bda.then(BdaRanges::default)
    }

    fn explicit_scene(&self, boxes: &[[f64; 8]]) -> Result<SceneSpec<f32>> {
        let mut scene = SceneSpec::empty(self.scene.extent as f32, self.scene.ground_z as f32);
        for (k, b) in boxes.iter().enumerate() {
            if b[7] < 0.0 || b[7].fract() != 0.0 {
                return Err(CliError::Config(format!("[scene] box {k}: class must be a non-negative integer")));
            }
            let bx = Box3D::new(
                EgoPoint::new(b[0] as f32, b[1] as f32, b[2] as f32),
                [b[3] as f32, b[4] as f32, b[5] as f32],
                b[6] as f32,
                b[7] as u32,
            )
            .map_err(|e| CliError::Config(format!("[scene] box {k}: {e}")))?;
            scene.boxes.push(bx);
        }
        scene.seed = Some(self.scene.seed);
        Ok(scene)
    }

    /// The configured scene: explicit boxes if given, else seeded placement.
    /// `offset` selects further frames of a batch (seed + offset).
    pub fn scene(&self, offset: u64) -> Result<SceneSpec<f32>> {
        let scene = match (&self.scene.boxes, offset) {
            (Some(boxes), 0) => self.explicit_scene(boxes)?,
            _ => SceneSpec::generate(self.scene.seed.wrapping_add(offset), self.scene.objects, &self.scene_params())?,
        };
        scene.validate(&self.bev()?)?;
        Ok(scene)
    }

    /// Same config with the scene pinned to explicit boxes, for replay.
    pub fn pinned(&self, scene: &SceneSpec<f32>) -> Self {
        let mut out = self.clone();
        out.scene.boxes = Some(
            scene
                .boxes
                .iter()
                .map(|b| {
                    [
                        b.center.x as f64,
                        b.center.y as f64,
                        b.center.z as f64,
                        b.size[0] as f64,
                        b.size[1] as f64,
                        b.size[2] as f64,
                        b.yaw as f64,
                        b.class as f64,
                    ]
                })
                .collect(),
        );
        out
    }

    /// Output directory: explicit flag, then the environment, then the config.
    pub fn output_dir(&self, flag: Option<&Path>) -> PathBuf {
        if let Some(p) = flag {
            return p.to_path_buf();
        }
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(v) if !v.is_empty() => PathBuf::from(v),
            _ => self.output.dir.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_default_matches_code() {
        let text = include_str!("../../../configs/default.toml");
        assert_eq!(RunConfig::parse(text, "default.toml").unwrap(), RunConfig::default());
    }

    #[test]
    fn default_grid_is_128() {
        let bev = RunConfig::default().bev().unwrap();
        assert_eq!((bev.nx(), bev.ny()), (128, 128));
    }

    #[test]
    fn missing_section_is_reported() {
        let text = RunConfig::default().to_toml().replace("[loss]", "[losses]");
        let err = RunConfig::parse(&text, "x.toml").unwrap_err().to_string();
        assert!(err.contains("x.toml"), "{err}");
    }

    #[test]
    fn bad_value_names_line() {
        let mut text = RunConfig::default().to_toml();
        text = text.replace("count = 59", "count = \"many\"");
        let err = RunConfig::parse(&text, "x.toml").unwrap_err().to_string();
        assert!(err.contains("line"), "{err}");
        assert_eq!(RunConfig::parse(&text, "x").unwrap_err().exit_code(), 1);
    }

    #[test]
    fn semantic_validation() {
        let mut cfg = RunConfig::default();
        cfg.rig.stride = 4;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.scene.extent = 200.0;
        assert!(cfg.scene(0).is_err());
    }

    #[test]
    fn pinned_round_trip() {
        let cfg = RunConfig::default();
        let scene = cfg.scene(0).unwrap();
        let pinned = cfg.pinned(&scene);
        let back = RunConfig::parse(&pinned.to_toml(), "pinned").unwrap();
        assert_eq!(back.scene(0).unwrap().boxes, scene.boxes);
    }
}
