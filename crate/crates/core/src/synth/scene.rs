use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::geometry::{BevConfig, Box3D, EgoPoint};
use crate::scalar::Real;

/// Placement parameters for random scenes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneParams {
    /// Side length of the square, ego-centered placement area (m).
    pub extent: f64,
    pub ground_z: f64,
    /// Box footprints keep at least this distance from the ego origin.
    pub clear_radius: f64,
    pub max_retries: usize,
    pub classes: u32,
}

impl Default for SceneParams {
    fn default() -> Self {
        Self { extent: 80.0, ground_z: 0.0, clear_radius: 4.0, max_retries: 100, classes: 10 }
    }
}

/// Boxes resting on a ground plane.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec<T> {
    pub boxes: Vec<Box3D<T>>,
    pub ground_z: T,
    pub extent: T,
    pub seed: Option<u64>,
}

impl<T: Real> SceneSpec<T> {
    pub fn empty(extent: T, ground_z: T) -> Self {
        Self { boxes: Vec::new(), ground_z, extent, seed: None }
    }

    /// Generates a scene from a seed with a ChaCha stream.
    pub fn generate(seed: u64, n_objects: usize, params: &SceneParams) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = gen_scene(&mut rng, n_objects, params)?;
        s.seed = Some(seed);
        Ok(s)
    }

    /// Checks that the extent fits in the grid's XY range and all box
    /// footprints sit inside the extent.
    pub fn validate(&self, bev: &BevConfig<T>) -> Result<()> {
        let half = self.extent * T::lit(0.5);
        if !(self.extent > T::zero()) {
            return Err(invalid("scene extent must be positive"));
        }
        let (x, y) = (bev.x_range(), bev.y_range());
        if -half < x.0 || half > x.1 || -half < y.0 || half > y.1 {
            return Err(invalid(format!("scene extent {} exceeds the BEV range", self.extent)));
        }
        for (k, b) in self.boxes.iter().enumerate() {
            if b.footprint().iter().any(|&(px, py)| px.abs() > half || py.abs() > half) {
                return Err(invalid(format!("box {k} lies outside the scene extent")));
            }
        }
        Ok(())
    }
}

impl<T: Real> fmt::Display for SceneSpec<T> {
    /// Replayable TOML `[scene]` section.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[scene]")?;
        if let Some(seed) = self.seed {
            writeln!(f, "seed = {seed}")?;
        }
        writeln!(f, "extent = {:?}", self.extent.widen())?;
        writeln!(f, "ground_z = {:?}", self.ground_z.widen())?;
        writeln!(f, "# center x, y, z, size l, w, h, yaw, class")?;
        writeln!(f, "boxes = [")?;
        for b in &self.boxes {
            writeln!(
                f,
                "  [{:?}, {:?}, {:?}, {:?}, {:?}, {:?}, {:?}, {}],",
                b.center.x.widen(),
                b.center.y.widen(),
                b.center.z.widen(),
                b.size[0].widen(),
                b.size[1].widen(),
                b.size[2].widen(),
                b.yaw.widen(),
                b.class
            )?;
        }
        writeln!(f, "]")
    }
}

/// Separating-axis test on the two XY footprints. Touching counts as overlap.
pub fn footprints_overlap<T: Real>(a: &Box3D<T>, b: &Box3D<T>) -> bool {
    let (fa, fb) = (a.footprint(), b.footprint());
    let axes = [a.yaw, b.yaw].into_iter().flat_map(|yaw| {
        let (s, c) = yaw.sin_cos();
        [(c, s), (-s, c)]
    });
    for (ax, ay) in axes {
        let proj = |pts: &[(T, T); 4]| {
            pts.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), &(x, y)| {
                let d = x * ax + y * ay;
                (lo.min(d), hi.max(d))
            })
        };
        let ((alo, ahi), (blo, bhi)) = (proj(&fa), proj(&fb));
        if ahi < blo || bhi < alo {
            return false;
        }
    }
    true
}

/// Uniform boxes in the extent, rejection-sampled to keep footprints
/// pairwise disjoint, inside the extent, and clear of the ego origin.
pub fn gen_scene<T: Real, R: Rng + ?Sized>(rng: &mut R, n_objects: usize, params: &SceneParams) -> Result<SceneSpec<T>> {
    if !(params.extent > 0.0) {
        return Err(invalid("scene extent must be positive"));
    }
    let half = params.extent / 2.0;
    let mut boxes: Vec<Box3D<T>> = Vec::with_capacity(n_objects);
    for k in 0..n_objects {
        let mut placed = None;
        for _ in 0..params.max_retries.max(1) {
            let l = rng.gen_range(1.5..=5.0);
            let w = rng.gen_range(1.5..=2.5);
            let h = rng.gen_range(1.0..=2.0);
            let yaw = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
            let x = rng.gen_range(-half..half);
            let y = rng.gen_range(-half..half);
            let class = rng.gen_range(0..params.classes.max(1));
            let b = Box3D::new(
                EgoPoint::new(T::lit(x), T::lit(y), T::lit(params.ground_z + h / 2.0)),
                [l, w, h].map(T::lit),
                T::lit(yaw),
                class,
            )?;
            let inside = b.footprint().iter().all(|&(px, py)| px.abs().widen() <= half && py.abs().widen() <= half);
            let clear = (x * x + y * y).sqrt() >= params.clear_radius + (l * l + w * w).sqrt() / 2.0;
            if inside && clear && !boxes.iter().any(|o| footprints_overlap(o, &b)) {
                placed = Some(b);
                break;
            }
        }
        match placed {
            Some(b) => boxes.push(b),
            None => {
                return Err(Error::Capacity(format!(
                    "could not place box {k} after {} attempts",
                    params.max_retries
                )))
            }
        }
    }
    Ok(SceneSpec { boxes, ground_z: T::lit(params.ground_z), extent: T::lit(params.extent), seed: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_and_deterministic() {
        let p = SceneParams::default();
        let s = SceneSpec::<f64>::generate(3, 0, &p).unwrap();
        assert!(s.boxes.is_empty());
        let a = SceneSpec::<f64>::generate(42, 12, &p).unwrap();
        let b = SceneSpec::<f64>::generate(42, 12, &p).unwrap();
        assert_eq!(a, b);
        a.validate(&BevConfig::standard(1).unwrap()).unwrap();
    }

    #[test]
    fn boxes_rest_on_ground() {
        let p = SceneParams { ground_z: -1.0, ..Default::default() };
        let s = SceneSpec::<f64>::generate(1, 10, &p).unwrap();
        for b in &s.boxes {
            assert!((b.center.z - b.size[2] / 2.0 + 1.0).abs() < 1e-12);
            assert!((1.5..=5.0).contains(&b.size[0]));
        }
    }

    #[test]
    fn capacity_error() {
        let p = SceneParams { extent: 12.0, clear_radius: 0.0, ..Default::default() };
        assert!(matches!(SceneSpec::<f64>::generate(0, 200, &p), Err(Error::Capacity(_))));
    }

    #[test]
    fn overlap_cases() {
        let a = Box3D::new(EgoPoint::new(0.0, 0.0, 0.0), [2.0, 2.0, 1.0], 0.0, 0).unwrap();
        let b = Box3D::new(EgoPoint::new(1.9, 0.0, 0.0), [2.0, 2.0, 1.0], 0.0, 0).unwrap();
        let c = Box3D::new(EgoPoint::new(2.5, 0.0, 0.0), [2.0, 2.0, 1.0], 0.0, 0).unwrap();
        let d = Box3D::new(EgoPoint::new(2.3, 0.0, 0.0), [2.0, 2.0, 1.0], std::f64::consts::FRAC_PI_4, 0).unwrap();
        assert!(footprints_overlap(&a, &b));
        assert!(!footprints_overlap(&a, &c));
        assert!(footprints_overlap(&a, &d));
    }

    #[test]
    fn display_is_toml_section() {
        let s = SceneSpec::<f64>::generate(8, 2, &SceneParams::default()).unwrap();
        let txt = s.to_string();
        assert!(txt.starts_with("[scene]\nseed = 8\n"));
        assert_eq!(txt.matches("],\n").count(), 2);
    }
}
