use nalgebra::Vector3;

use super::color::rgb_to_ycocg;
use crate::raster::sh::{basis, dot};
use crate::scene::{Splat, SH_COEFFS};

/// Column-norm ratio below which a basis column counts as zero.
const ZERO_COLUMN: f64 = 1e-12;

/// Weighted least-squares system for one splat: one row per camera that
/// sees it, each row of `y` and `c` scaled by that camera's weight.
#[derive(Debug, Clone, PartialEq)]
pub struct SplatSystem {
    /// Weighted SH basis values, one row per camera.
    pub y: Vec<[f64; SH_COEFFS]>,
    /// Weighted current colors in YCoCg.
    pub c: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl SplatSystem {
    pub fn rows(&self) -> usize {
        self.y.len()
    }

    /// Build directly from unweighted rows and weights.
    pub fn from_rows(basis_rows: &[[f64; SH_COEFFS]], colors: &[[f64; 3]], weights: &[f64]) -> Self {
        let y = basis_rows
            .iter()
            .zip(weights)
            .map(|(r, w)| r.map(|v| v * w))
            .collect();
        let c = colors
            .iter()
            .zip(weights)
            .map(|(r, w)| r.map(|v| v * w))
            .collect();
        Self {
            y,
            c,
            weights: weights.to_vec(),
        }
    }

    fn column(&self, i: usize) -> impl Iterator<Item = f64> + '_ {
        self.y.iter().map(move |r| r[i])
    }
}

/// Rows for every `(camera, weight)` with positive weight. Colors come from
/// the splat's own coefficients, unclamped, toward each camera's eye.
pub fn build_weighted_system(splat: &Splat, eyes: &[Vector3<f64>], weights: &[(u32, f64)]) -> SplatSystem {
    let sh = &splat.sh;
    let mut rows = Vec::with_capacity(weights.len());
    let mut colors = Vec::with_capacity(weights.len());
    let mut ws = Vec::with_capacity(weights.len());
    for &(cam, w) in weights {
        if !(w > 0.0) {
            continue;
        }
        let d = (splat.position - eyes[cam as usize]).normalize();
        let b = basis(&d);
        let rgb = [dot(&sh[0], &b), dot(&sh[1], &b), dot(&sh[2], &b)];
        rows.push(b);
        colors.push(rgb_to_ycocg(rgb));
        ws.push(w);
    }
    SplatSystem::from_rows(&rows, &colors, &ws)
}

/// Keep column `i` unless it is (numerically) zero or an earlier kept
/// column has `|cos| > alpha`. The DC column is always kept.
pub fn sparsify_parallel_columns(system: &SplatSystem, alpha: f64) -> [bool; SH_COEFFS] {
    let norms: [f64; SH_COEFFS] =
        std::array::from_fn(|i| system.column(i).map(|v| v * v).sum::<f64>().sqrt());
    let mut keep = [false; SH_COEFFS];
    keep[0] = true;
    let scale = norms[0].max(f64::MIN_POSITIVE);
    for i in 1..SH_COEFFS {
        if norms[i] <= ZERO_COLUMN * scale {
            continue;
        }
        let parallel = (0..i).filter(|&j| keep[j]).any(|j| {
            let d: f64 = system.column(i).zip(system.column(j)).map(|(a, b)| a * b).sum();
            (d / (norms[i] * norms[j])).abs() > alpha
        });
        keep[i] = !parallel;
    }
    keep
}
