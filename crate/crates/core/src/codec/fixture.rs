//! Deterministic synthetic scene: splats on a sphere shell seen from a ring
//! of cameras.

use nalgebra::{UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::raster::sh::SH_C0;
use crate::scene::{Camera, Scene, Splat, SH_COEFFS};

pub const SHELL_RADIUS: f64 = 1.0;
pub const RING_RADIUS: f64 = 3.0;
/// Share of faint, small splats that add little to any render.
pub const FAINT_FRACTION: f64 = 0.2;
/// Share of floaters far above or below the shell, outside every view.
pub const FLOATER_FRACTION: f64 = 0.03;
/// Largest first-order SH magnitude of the specular lobe.
pub const LOBE_STRENGTH: f64 = 0.15;
/// Amplitude of the uniform noise on each AC coefficient.
pub const AC_NOISE: f64 = 0.025;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FixtureConfig {
    pub splats: usize,
    pub cameras: usize,
    pub width: u32,
    pub height: u32,
    pub seed: u64,
}

impl Default for FixtureConfig {
    fn default() -> Self {
        Self {
            splats: 2000,
            cameras: 12,
            width: 64,
            height: 64,
            seed: 7,
        }
    }
}

/// Smooth color field over the sphere.
fn base_color(n: &Vector3<f64>) -> [f64; 3] {
    [
        0.5 + 0.3 * (3.0 * n.x).sin(),
        0.5 + 0.3 * (2.0 * n.y + 0.5).cos(),
        0.45 + 0.25 * (4.0 * n.z).sin() * n.x.cos(),
    ]
}

fn splat(rng: &mut ChaCha8Rng, spacing: f64) -> Splat {
    let z: f64 = rng.random_range(-1.0..1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let r = (1.0 - z * z).sqrt();
    let normal = Vector3::new(r * phi.cos(), r * phi.sin(), z);
    let faint = rng.random_bool(FAINT_FRACTION);
    let radius = SHELL_RADIUS + rng.random_range(-0.02..0.02);

    let tangent = spacing * if faint { rng.random_range(0.15..0.35) } else { rng.random_range(0.45..0.8) };
    let stretch: f64 = rng.random_range(0.7..1.4);
    let log_scale = Vector3::new(
        (tangent * stretch).ln(),
        (tangent / stretch).ln(),
        (0.15 * tangent).ln(),
    );
    let align = UnitQuaternion::rotation_between(&Vector3::z(), &normal)
        .unwrap_or_else(|| UnitQuaternion::from_axis_angle(&Vector3::x_axis(), std::f64::consts::PI));
    let spin = UnitQuaternion::from_axis_angle(&Vector3::z_axis(), rng.random_range(0.0..std::f64::consts::TAU));
    let q = (align * spin).into_inner();
    let mut rotation = [q.w, q.i, q.j, q.k];
    if rotation[0] < 0.0 {
        rotation = rotation.map(|c| -c);
    }

    // Diffuse albedo plus a white first-order lobe toward the mirrored
    // light direction, with faint chromatic noise on every AC coefficient.
    let color = base_color(&normal);
    let light = Vector3::new(0.3, 0.5, 0.8).normalize();
    let mirror = 2.0 * light.dot(&normal) * normal - light;
    let strength = rng.random_range(0.0..LOBE_STRENGTH);
    let lobe = [-mirror.y, mirror.z, -mirror.x].map(|v| strength * v);
    let mut sh = [[0.0; SH_COEFFS]; 3];
    for (c, channel) in sh.iter_mut().enumerate() {
        channel[0] = (color[c] + rng.random_range(-0.03..0.03)) / SH_C0;
        for (i, v) in channel.iter_mut().enumerate().skip(1) {
            *v = rng.random_range(-AC_NOISE..AC_NOISE) + if i < 4 { lobe[i - 1] } else { 0.0 };
        }
    }
    let opacity = if faint { rng.random_range(0.02..0.12) } else { rng.random_range(0.55..0.95) };
    let position = if rng.random_bool(FLOATER_FRACTION) {
        let height = rng.random_range(5.0..7.0);
        Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), if z < 0.0 { -height } else { height })
    } else {
        normal * radius
    };
    Splat {
        position,
        log_scale,
        rotation,
        opacity,
        sh,
    }
}

/// Cameras on a ring around the origin at alternating heights, all
/// looking at the center.
pub fn camera_ring(count: usize, width: u32, height: u32) -> Vec<Camera> {
    (0..count)
        .map(|i| {
            let theta = std::f64::consts::TAU * i as f64 / count as f64;
            let elevation: f64 = if i % 2 == 0 { 0.35 } else { -0.25 };
            let eye = RING_RADIUS
                * Vector3::new(elevation.cos() * theta.cos(), elevation.cos() * theta.sin(), elevation.sin());
            Camera::look_at(eye, Vector3::zeros(), Vector3::z(), 1.2 * width as f64, (width, height))
                .expect("ring cameras are valid")
        })
        .collect()
}

pub fn generate(config: &FixtureConfig) -> Scene {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let spacing = (4.0 * std::f64::consts::PI * SHELL_RADIUS * SHELL_RADIUS / config.splats.max(1) as f64).sqrt();
    let splats = (0..config.splats).map(|_| splat(&mut rng, spacing)).collect();
    Scene::new(splats, camera_ring(config.cameras, config.width, config.height))
}
