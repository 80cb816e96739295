//! Random scenes shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{UnitQuaternion, Vector3};
use potr_core::image::Image;
use potr_core::scene::{Camera, Splat, SH_COEFFS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_splat(rng: &mut ChaCha8Rng, extent: f64) -> Splat {
    let position = Vector3::from_fn(|_, _| rng.random_range(-extent..extent));
    let log_scale = Vector3::from_fn(|_, _| rng.random_range(-3.0f64..-0.9));
    let q = UnitQuaternion::from_euler_angles(
        rng.random_range(-3.1..3.1),
        rng.random_range(-1.5..1.5),
        rng.random_range(-3.1..3.1),
    )
    .into_inner();
    let mut rotation = [q.w, q.i, q.j, q.k];
    if rotation[0] < 0.0 {
        rotation = rotation.map(|c| -c);
    }
    // A quarter of the splats are nearly opaque so some pixels terminate.
    let opacity = if rng.random_bool(0.25) {
        rng.random_range(0.9..0.995)
    } else {
        rng.random_range(0.02..0.9)
    };
    let mut sh = [[0.0; SH_COEFFS]; 3];
    for channel in sh.iter_mut() {
        channel[0] = rng.random_range(0.0..3.0);
        for v in channel.iter_mut().skip(1) {
            *v = rng.random_range(-0.3..0.3);
        }
    }
    Splat {
        position,
        log_scale,
        rotation,
        opacity,
        sh,
    }
}

pub fn cameras_around(rng: &mut ChaCha8Rng, count: usize, size: u32) -> Vec<Camera> {
    (0..count)
        .map(|_| {
            let theta = rng.random_range(0.0..std::f64::consts::TAU);
            let height = rng.random_range(-1.0..1.0);
            let eye = Vector3::new(3.0 * theta.cos(), 3.0 * theta.sin(), height);
            Camera::look_at(eye, Vector3::zeros(), Vector3::z(), 1.1 * size as f64, (size, size)).unwrap()
        })
        .collect()
}

/// Up to `max_splats` splats near the origin seen by up to `max_cameras`
/// cameras of `size` x `size` pixels.
pub fn random_scene(seed: u64, max_splats: usize, max_cameras: usize, size: u32) -> (Vec<Splat>, Vec<Camera>) {
    let mut rng = rng(seed);
    let n = rng.random_range(max_splats / 2..=max_splats);
    let m = rng.random_range(1..=max_cameras);
    let splats = (0..n).map(|_| random_splat(&mut rng, 0.6)).collect();
    (splats, cameras_around(&mut rng, m, size))
}

pub fn random_images(seed: u64, cameras: &[Camera]) -> Vec<Image> {
    let mut rng = rng(seed);
    cameras
        .iter()
        .map(|c| Image {
            width: c.width,
            height: c.height,
            pixels: (0..c.pixel_count())
                .map(|_| [0; 3].map(|_| rng.random_range(0.0..1.0)))
                .collect(),
        })
        .collect()
}

pub fn without(splats: &[Splat], k: usize) -> Vec<Splat> {
    let mut s = splats.to_vec();
    s.remove(k);
    s
}

/// Bit pattern of every field, for exact comparisons.
pub fn splat_bits(splats: &[Splat]) -> Vec<u64> {
    splats
        .iter()
        .flat_map(|s| {
            s.position
                .iter()
                .chain(s.log_scale.iter())
                .chain(s.rotation.iter())
                .chain(std::iter::once(&s.opacity))
                .chain(s.sh.iter().flatten())
                .map(|v| v.to_bits())
                .collect::<Vec<_>>()
        })
        .collect()
}

pub fn image_bits(images: &[Image]) -> Vec<u64> {
    images.iter().flat_map(|i| i.pixels.iter().flatten().map(|v| v.to_bits())).collect()
}
