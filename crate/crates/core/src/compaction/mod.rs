//! Spherical-harmonics energy compaction.
//!
//! Each splat's coefficients are refit so that its colors toward the
//! cameras that actually see it are preserved while view-dependent energy
//! is pushed toward zero: importance-weighted ridge regression in YCoCg,
//! with parallel-column removal and a second pass after zeroing tiny
//! coefficients.

mod color;
mod ridge;
mod system;

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::Serialize;

pub use color::{rgb_to_ycocg, sh_to_rgb, sh_to_ycocg, ycocg_to_rgb};
pub use ridge::{ridge_solve, ridge_solve_channel, SingularSystem, JITTER};
pub use system::{build_weighted_system, sparsify_parallel_columns, SplatSystem};

use crate::error::{Error, Result};
use crate::raster::{compute_importance, sh::{eval_sh_color, SH_C0}};
use crate::scene::{Camera, ShCoeffs, Splat, SH_COEFFS};

/// Chrominance is regularized this many times harder than luma.
pub const CHROMA_FACTOR: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompactionConfig {
    /// Luma regularization.
    pub lambda: f64,
    /// Cosine above which a later basis column is dropped as parallel.
    pub alpha_par: f64,
    /// AC coefficients below this magnitude after the first pass are
    /// forced to zero.
    pub zero_threshold: f64,
}

impl CompactionConfig {
    pub fn lambdas(&self) -> [f64; 3] {
        [self.lambda, CHROMA_FACTOR * self.lambda, CHROMA_FACTOR * self.lambda]
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) || !(self.alpha_par > 0.0 && self.alpha_par <= 1.0) || !(self.zero_threshold >= 0.0) {
            return Err(Error::Argument(format!(
                "invalid compaction config: lambda={}, alpha_par={}, zero_threshold={}",
                self.lambda, self.alpha_par, self.zero_threshold
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CompactionStatus {
    Fitted,
    /// No camera sees the splat: DC-only fallback.
    Invisible,
    /// The solve failed; original coefficients kept.
    Failed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompactedSplat {
    pub ycocg: ShCoeffs,
    pub rgb: ShCoeffs,
    pub status: CompactionStatus,
}

/// The 26 directions toward the faces, edges and corners of a cube.
fn probe_directions() -> impl Iterator<Item = Vector3<f64>> {
    (-1i32..=1)
        .flat_map(|x| (-1i32..=1).flat_map(move |y| (-1i32..=1).map(move |z| (x, y, z))))
        .filter(|&v| v != (0, 0, 0))
        .map(|(x, y, z)| Vector3::new(x as f64, y as f64, z as f64).normalize())
}

fn invisible_fallback(splat: &Splat) -> ShCoeffs {
    let mut rgb = [[0.0; SH_COEFFS]; 3];
    let mut count = 0.0;
    for d in probe_directions() {
        for c in 0..3 {
            rgb[c][0] += eval_sh_color(&splat.sh[c], &d);
        }
        count += 1.0;
    }
    for channel in rgb.iter_mut() {
        channel[0] /= count * SH_C0;
    }
    rgb
}

/// Refit one splat. `weights` holds `(camera, weight)` for the cameras
/// that see it.
pub fn compact_splat(
    splat: &Splat,
    eyes: &[Vector3<f64>],
    weights: &[(u32, f64)],
    config: &CompactionConfig,
) -> CompactedSplat {
    let system = build_weighted_system(splat, eyes, weights);
    if system.rows() == 0 {
        let rgb = invisible_fallback(splat);
        return CompactedSplat {
            ycocg: sh_to_ycocg(&rgb),
            rgb,
            status: CompactionStatus::Invisible,
        };
    }
    let lambdas = config.lambdas();
    let columns = sparsify_parallel_columns(&system, config.alpha_par);
    let solved = ridge_solve(&system, &[columns; 3], lambdas).and_then(|first| {
        let masks: [[bool; SH_COEFFS]; 3] = std::array::from_fn(|c| {
            std::array::from_fn(|i| columns[i] && (i == 0 || first[c][i].abs() >= config.zero_threshold))
        });
        ridge_solve(&system, &masks, lambdas)
    });
    match solved {
        Ok(ycocg) => CompactedSplat {
            rgb: sh_to_rgb(&ycocg),
            ycocg,
            status: CompactionStatus::Fitted,
        },
        Err(e) => {
            log::warn!("compaction kept original coefficients: {e}");
            CompactedSplat {
                ycocg: sh_to_ycocg(&splat.sh),
                rgb: splat.sh,
                status: CompactionStatus::Failed,
            }
        }
    }
}

/// Per-splat `(camera, weight)` lists where the weight is the splat's
/// effective pixel coverage `sum T * alpha` in that camera.
pub fn coverage_weights(splats: &[Splat], cameras: &[Camera]) -> Vec<Vec<(u32, f64)>> {
    let analysis = compute_importance(splats, cameras);
    let mut by_splat = analysis.by_splat();
    for entries in by_splat.iter_mut() {
        for (cam, w) in entries.iter_mut() {
            *w *= cameras[*cam as usize].pixel_count() as f64;
        }
    }
    by_splat
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CompactionStats {
    pub fitted: usize,
    pub invisible: usize,
    pub failed: usize,
    /// Fraction of AC coefficients (45 per splat) that are exactly zero
    /// in YCoCg.
    pub ac_zero_fraction: f64,
}

pub struct CompactionOutcome {
    /// Splats with refit RGB coefficients.
    pub splats: Vec<Splat>,
    /// The same coefficients in YCoCg.
    pub ycocg: Vec<ShCoeffs>,
    pub stats: CompactionStats,
}

/// Refit every splat independently against the given cameras.
pub fn compact_scene(splats: &[Splat], cameras: &[Camera], config: &CompactionConfig) -> Result<CompactionOutcome> {
    config.validate()?;
    let weights = coverage_weights(splats, cameras);
    let eyes: Vec<Vector3<f64>> = cameras.iter().map(|c| c.eye).collect();
    let results: Vec<CompactedSplat> = splats
        .par_iter()
        .zip(&weights)
        .map(|(s, w)| compact_splat(s, &eyes, w, config))
        .collect();

    let mut stats = CompactionStats::default();
    let mut zeros = 0usize;
    let mut out = Vec::with_capacity(splats.len());
    let mut ycocg = Vec::with_capacity(splats.len());
    for (splat, r) in splats.iter().zip(results) {
        match r.status {
            CompactionStatus::Fitted => stats.fitted += 1,
            CompactionStatus::Invisible => stats.invisible += 1,
            CompactionStatus::Failed => stats.failed += 1,
        }
        zeros += r.ycocg.iter().flat_map(|ch| &ch[1..]).filter(|v| **v == 0.0).count();
        let mut s = splat.clone();
        s.sh = r.rgb;
        out.push(s);
        ycocg.push(r.ycocg);
    }
    if !splats.is_empty() {
        stats.ac_zero_fraction = zeros as f64 / (splats.len() * 3 * (SH_COEFFS - 1)) as f64;
    }
    Ok(CompactionOutcome {
        splats: out,
        ycocg,
        stats,
    })
}

/// Fraction of exactly-zero AC coefficients, measured in YCoCg.
pub fn ac_zero_fraction(splats: &[Splat]) -> f64 {
    if splats.is_empty() {
        return 0.0;
    }
    let zeros: usize = splats
        .iter()
        .map(|s| sh_to_ycocg(&s.sh).iter().flat_map(|ch| &ch[1..]).filter(|v| **v == 0.0).count())
        .sum();
    zeros as f64 / (splats.len() * 3 * (SH_COEFFS - 1)) as f64
}
