//! In-memory splat, camera and scene representation, plus file ingestion.

mod camera;
mod ply;
mod splat;

use std::path::Path;

pub use camera::{cameras_to_json, load_cameras, parse_cameras, Camera, CameraEntry};
pub use ply::{export_ply, parse_ply};
pub use splat::{
    logit, normalize_quaternion, sigmoid, RawSplat, ShCoeffs, Splat, AC_COEFFS, SH_COEFFS,
};

use crate::error::Result;

/// Splats plus the cameras they are evaluated from.
#[derive(Debug, Clone, Default)]
pub struct Scene {
    pub splats: Vec<Splat>,
    pub cameras: Vec<Camera>,
}

impl Scene {
    pub fn new(splats: Vec<Splat>, cameras: Vec<Camera>) -> Self {
        Self { splats, cameras }
    }

    pub fn eyes(&self) -> Vec<nalgebra::Vector3<f64>> {
        self.cameras.iter().map(|c| c.eye).collect()
    }
}

/// Parse and activate every splat of a PLY file.
pub fn splats_from_ply(bytes: &[u8]) -> Result<Vec<Splat>> {
    parse_ply(bytes)?
        .iter()
        .enumerate()
        .map(|(i, raw)| Splat::activate(raw, i))
        .collect()
}

pub fn load_splats(path: &Path) -> Result<Vec<Splat>> {
    splats_from_ply(&std::fs::read(path)?)
}

pub fn splats_to_ply(splats: &[Splat]) -> Vec<u8> {
    let raw: Vec<RawSplat> = splats.iter().map(Splat::to_raw).collect();
    export_ply(&raw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn activate_export_reparse_is_stable() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let raws: Vec<RawSplat> = (0..50)
            .map(|_| {
                let mut r = RawSplat::default();
                r.position = [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
                r.f_dc = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
                for v in r.f_rest.iter_mut() {
                    *v = rng.random_range(-0.3..0.3);
                }
                r.opacity = rng.random_range(-6.0..6.0);
                r.scale = [rng.random_range(-6.0..0.0), rng.random_range(-6.0..0.0), rng.random_range(-6.0..0.0)];
                r.rotation = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
                r
            })
            .collect();
        let first = splats_from_ply(&export_ply(&raws)).unwrap();
        let second = splats_from_ply(&splats_to_ply(&first)).unwrap();
        for (a, b) in first.iter().zip(&second) {
            assert!((a.position - b.position).abs().max() < 1e-6);
            assert!((a.log_scale - b.log_scale).abs().max() < 1e-6);
            assert!((a.opacity - b.opacity).abs() < 1e-6);
            for i in 0..4 {
                assert!((a.rotation[i] - b.rotation[i]).abs() < 1e-6);
            }
            for c in 0..3 {
                for i in 0..SH_COEFFS {
                    assert!((a.sh[c][i] - b.sh[c][i]).abs() < 1e-6);
                }
            }
        }
    }
}
