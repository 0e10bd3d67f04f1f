#![allow(dead_code)]

use rand::Rng;
use sabev::geometry::{BevConfig, EgoPoint};
use sabev::pooling::{PixelOrigin, VirtualPoints};

pub fn small_bev(channels: usize) -> BevConfig<f64> {
    BevConfig::new((-8.0, 8.0), (-8.0, 8.0), (-5.0, 3.0), [0.8, 0.8, 8.0], channels).unwrap()
}

/// Random points: `pixels` pixels with `bins` points each, spread a little
/// beyond the grid so some fall out of range.
pub fn random_points<R: Rng>(rng: &mut R, pixels: usize, bins: usize, channels: usize, span: f64) -> VirtualPoints<f64> {
    let mut v = VirtualPoints::with_capacity(channels, pixels * bins, pixels);
    let mut ctx = vec![0.0; channels];
    for p in 0..pixels {
        ctx.iter_mut().for_each(|c| *c = rng.gen_range(-1.0..1.0));
        let origin = PixelOrigin { camera: 0, row: 0, col: p as u32 };
        let px = v.add_pixel(origin, rng.gen_range(0.0..=1.0), &ctx).unwrap();
        for b in 0..bins {
            let pos = EgoPoint::new(
                rng.gen_range(-span..span),
                rng.gen_range(-span..span),
                rng.gen_range(-6.0..4.0),
            );
            v.add_point(px, b as u32, pos, rng.gen_range(0.0..=1.0)).unwrap();
        }
    }
    v
}

pub fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(1e-12))
        .fold(0.0, f64::max)
}
