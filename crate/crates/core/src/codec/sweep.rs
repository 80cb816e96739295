use nalgebra::Vector3;
use serde::Serialize;

use super::config::EncodeConfig;
use super::pipeline::quantize_model;
use crate::compaction::compact_scene;
use crate::error::Result;
use crate::image::Image;
use crate::raster::{mse_against, render_all};
use crate::scene::{Camera, Splat};

/// One point of a compaction sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub alpha_par: f64,
    /// Exactly-zero YCoCg AC coefficients after compaction.
    pub ac_zero_fraction: f64,
    /// Unclamped MSE of the compacted model against the references.
    pub mse: f64,
    pub container_bytes: usize,
}

/// Compact `splats` for every `(lambda, alpha_par)` pair and measure the
/// result. Everything else comes from `base`.
pub fn compaction_sweep(
    splats: &[Splat],
    cameras: &[Camera],
    references: &[Image],
    lambdas: &[f64],
    alphas: &[f64],
    base: &EncodeConfig,
) -> Result<Vec<SweepRow>> {
    let eyes: Vec<Vector3<f64>> = cameras.iter().map(|c| c.eye).collect();
    let mut rows = Vec::with_capacity(lambdas.len() * alphas.len());
    for &alpha_par in alphas {
        for &lambda in lambdas {
            let mut config = base.clone();
            config.lambda = lambda;
            config.alpha_par = alpha_par;
            let outcome = compact_scene(splats, cameras, &config.compaction_config())?;
            let mse = mse_against(&render_all(&outcome.splats, cameras), references)?;
            let (bytes, _) = quantize_model(&outcome.splats, &eyes, &config)?;
            log::info!(
                "lambda {lambda:e}, alpha {alpha_par:.4}: {:.1}% AC zero, mse {mse:.3e}, {} bytes",
                100.0 * outcome.stats.ac_zero_fraction,
                bytes.len()
            );
            rows.push(SweepRow {
                lambda,
                alpha_par,
                ac_zero_fraction: outcome.stats.ac_zero_fraction,
                mse,
                container_bytes: bytes.len(),
            });
        }
    }
    Ok(rows)
}
