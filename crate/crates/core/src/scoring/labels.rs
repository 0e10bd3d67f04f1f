use crate::geometry::{Box3D, Camera, EgoPoint};
use crate::scalar::Real;

/// Per-feature-cell supervision from a projected point cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMaps<T> {
    height: usize,
    width: usize,
    depth: Vec<Option<T>>,
    source: Vec<Option<usize>>,
    foreground: Vec<bool>,
}

impl<T: Real> LabelMaps<T> {
    pub fn empty(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            depth: vec![None; height * width],
            source: vec![None; height * width],
            foreground: vec![false; height * width],
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn depth(&self, i: usize, j: usize) -> Option<T> {
        self.depth[i * self.width + j]
    }

    /// Index of the point that supplied the cell's label.
    pub fn source(&self, i: usize, j: usize) -> Option<usize> {
        self.source[i * self.width + j]
    }

    pub fn is_foreground(&self, i: usize, j: usize) -> bool {
        self.foreground[i * self.width + j]
    }

    pub fn is_valid(&self, i: usize, j: usize) -> bool {
        self.depth(i, j).is_some()
    }

    pub fn labeled_count(&self) -> usize {
        self.depth.iter().filter(|d| d.is_some()).count()
    }

    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.height).flat_map(move |i| (0..self.width).map(move |j| (i, j)))
    }
}

/// Projects `points` into `cam` and keeps, per feature cell, the smallest
/// positive camera depth. Points behind the camera or off the image are
/// skipped; on equal depth the earlier point wins.
pub fn depth_labels_from_points<T: Real>(points: &[EgoPoint<T>], cam: &Camera<T>) -> LabelMaps<T> {
    let (h, w) = cam.feature_shape();
    let mut labels = LabelMaps::empty(h, w);
    for (k, p) in points.iter().enumerate() {
        let Some((u, v, depth)) = cam.project(p) else {
            continue;
        };
        let Some((i, j)) = cam.feature_cell(u, v) else {
            continue;
        };
        let cell = i * w + j;
        if labels.depth[cell].is_none_or(|cur| depth < cur) {
            labels.depth[cell] = Some(depth);
            labels.source[cell] = Some(k);
        }
    }
    labels
}

/// Depth labels plus foreground flags: a labeled cell is foreground iff the
/// point that supplied its depth lies inside (or on) any box.
pub fn seg_labels_from_points<T: Real>(
    points: &[EgoPoint<T>],
    boxes: &[Box3D<T>],
    cam: &Camera<T>,
) -> LabelMaps<T> {
    let mut labels = depth_labels_from_points(points, cam);
    let eps = T::epsilon() * T::lit(1024.0);
    for (cell, src) in labels.source.iter().enumerate() {
        if let Some(k) = src {
            labels.foreground[cell] = boxes.iter().any(|b| b.contains(&points[*k], eps));
        }
    }
    labels
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Intrinsics;

    // Looks down +z of the ego frame with identity extrinsics.
    fn cam() -> Camera<f64> {
        let k = Intrinsics { fx: 16.0, fy: 16.0, cx: 32.0, cy: 32.0 };
        let r = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        Camera::new(k, r, EgoPoint::default(), (64, 64), 16).unwrap()
    }

    #[test]
    fn single_point() {
        let l = depth_labels_from_points(&[EgoPoint::new(0.1, 0.1, 5.0)], &cam());
        assert_eq!(l.depth(2, 2), Some(5.0));
        assert_eq!(l.labeled_count(), 1);
    }

    #[test]
    fn nearest_wins() {
        let pts = [EgoPoint::new(0.1, 0.1, 5.0), EgoPoint::new(0.06, 0.06, 3.0)];
        let l = depth_labels_from_points(&pts, &cam());
        assert_eq!(l.depth(2, 2), Some(3.0));
        assert_eq!(l.source(2, 2), Some(1));
    }

    #[test]
    fn behind_camera_skipped() {
        let l = depth_labels_from_points(&[EgoPoint::new(0.0, 0.0, -2.0)], &cam());
        assert_eq!(l.labeled_count(), 0);
        let l = depth_labels_from_points(&[EgoPoint::new(100.0, 0.0, 1.0)], &cam());
        assert_eq!(l.labeled_count(), 0);
    }

    #[test]
    fn foreground_follows_nearest_point() {
        let b = Box3D::new(EgoPoint::new(0.0, 0.0, 5.0), [1.0, 1.0, 1.0], 0.0, 1).unwrap();
        let inside = EgoPoint::new(0.1, 0.1, 5.0);
        let l = seg_labels_from_points(&[inside], &[b], &cam());
        assert!(l.is_foreground(2, 2));

        let occluder = EgoPoint::new(0.05, 0.05, 2.0);
        let l = seg_labels_from_points(&[inside, occluder], &[b], &cam());
        assert!(!l.is_foreground(2, 2));

        let l = seg_labels_from_points(&[EgoPoint::new(0.1, 0.1, 9.0)], &[b], &cam());
        assert!(l.is_valid(2, 2) && !l.is_foreground(2, 2));

        let l = seg_labels_from_points(&[], &[b], &cam());
        assert!(l.cells().all(|(i, j)| !l.is_valid(i, j) && !l.is_foreground(i, j)));
    }
}
