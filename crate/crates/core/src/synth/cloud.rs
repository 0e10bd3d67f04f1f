use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::geometry::{Box3D, EgoPoint};
use crate::scalar::Real;

use super::SceneSpec;

const GROUND_RETRIES: usize = 1000;

/// Ego-frame points with exact inside-box tags.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud<T> {
    pub points: Vec<EgoPoint<T>>,
    /// Point lies in (or on the boundary of) some box.
    pub inside: Vec<bool>,
    /// Box a surface point was sampled from; `None` for ground points.
    pub source_box: Vec<Option<usize>>,
}

impl<T> PointCloud<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Boundary tolerance used for inside tags.
pub(crate) fn tag_eps<T: Real>() -> T {
    T::epsilon() * T::lit(1024.0)
}

fn surface_point<T: Real, R: Rng + ?Sized>(b: &Box3D<T>, rng: &mut R) -> EgoPoint<T> {
    let [hx, hy, hz] = b.half_extents().map(|v| v.widen());
    // faces ordered ±x, ±y, ±z; weights are face areas
    let areas = [hy * hz, hy * hz, hx * hz, hx * hz, hx * hy, hx * hy];
    let face = WeightedIndex::new(areas).expect("box sizes are positive").sample(rng);
    let mut p = [rng.gen_range(-hx..=hx), rng.gen_range(-hy..=hy), rng.gen_range(-hz..=hz)];
    let axis = face / 2;
    let h = [hx, hy, hz][axis];
    p[axis] = if face % 2 == 0 { h } else { -h };
    b.to_ego(&EgoPoint::new(T::lit(p[0]), T::lit(p[1]), T::lit(p[2])))
}

fn in_footprint<T: Real>(b: &Box3D<T>, x: T, y: T) -> bool {
    let local = b.to_local(&EgoPoint::new(x, y, b.center.z));
    let [hx, hy, _] = b.half_extents();
    let eps = tag_eps::<T>();
    local.x.abs() <= hx + eps && local.y.abs() <= hy + eps
}

/// `round((1 - bg_ratio) * n)` points uniform over box surfaces (area
/// weighted) and the rest uniform on the ground plane within the extent,
/// outside every box footprint. Box surface points come first.
pub fn sample_point_cloud<T: Real, R: Rng + ?Sized>(
    scene: &SceneSpec<T>,
    rng: &mut R,
    n_points: usize,
    bg_ratio: f64,
) -> Result<PointCloud<T>> {
    if !(0.0..=1.0).contains(&bg_ratio) {
        return Err(invalid(format!("bg_ratio must lie in [0, 1], got {bg_ratio}")));
    }
    let mut n_surface = ((1.0 - bg_ratio) * n_points as f64).round() as usize;
    if scene.boxes.is_empty() {
        n_surface = 0;
    }
    let mut cloud = PointCloud {
        points: Vec::with_capacity(n_points),
        inside: Vec::with_capacity(n_points),
        source_box: Vec::with_capacity(n_points),
    };
    if n_surface > 0 {
        let pick = WeightedIndex::new(scene.boxes.iter().map(|b| b.surface_area().widen()))
            .map_err(|e| invalid(format!("box areas: {e}")))?;
        for _ in 0..n_surface {
            let k = pick.sample(rng);
            cloud.points.push(surface_point(&scene.boxes[k], rng));
            cloud.source_box.push(Some(k));
        }
    }
    let half = scene.extent.widen() / 2.0;
    for _ in n_surface..n_points {
        let mut found = None;
        for _ in 0..GROUND_RETRIES {
            let (x, y) = (T::lit(rng.gen_range(-half..half)), T::lit(rng.gen_range(-half..half)));
            if !scene.boxes.iter().any(|b| in_footprint(b, x, y)) {
                found = Some(EgoPoint::new(x, y, scene.ground_z));
                break;
            }
        }
        let p = found.ok_or_else(|| Error::Capacity("ground plane is covered by boxes".into()))?;
        cloud.points.push(p);
        cloud.source_box.push(None);
    }
    let eps = tag_eps::<T>();
    cloud.inside = cloud.points.iter().map(|p| scene.boxes.iter().any(|b| b.contains(p, eps))).collect();
    Ok(cloud)
}
