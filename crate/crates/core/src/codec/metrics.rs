use rayon::prelude::*;
use serde::Serialize;

use crate::bitstream::{compress, read_container, AttributeStreams, HEADER_LEN, STREAM_NAMES};
use crate::error::{Error, Result};
use crate::image::Image;
use crate::raster::render_all;
use crate::scene::{Camera, Splat};

/// Reported in place of infinity for identical images.
pub const PSNR_CAP: f64 = 99.0;
pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;
/// Uncompressed single-precision size of a degree-3 splat: position 12,
/// DC 12, opacity 4, rotation 16, scale 12, AC 180.
pub const RAW_BYTES_PER_SPLAT: usize = 236;

fn check_dims(a: &Image, b: &Image) -> Result<()> {
    if !a.same_dimensions(b) {
        return Err(Error::Dimension(format!(
            "{}x{} image compared with {}x{}",
            a.width, a.height, b.width, b.height
        )));
    }
    Ok(())
}

/// Mean squared error over all pixels and channels after clamping both
/// images to `[0, 1]`.
pub fn clamped_mse(a: &Image, b: &Image) -> Result<f64> {
    check_dims(a, b)?;
    if a.pixels.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = a
        .pixels
        .iter()
        .zip(&b.pixels)
        .map(|(p, q)| {
            (0..3)
                .map(|c| {
                    let d = p[c].clamp(0.0, 1.0) - q[c].clamp(0.0, 1.0);
                    d * d
                })
                .sum::<f64>()
        })
        .sum();
    Ok(sum / (3 * a.pixels.len()) as f64)
}

pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse <= 0.0 {
        PSNR_CAP
    } else {
        (-10.0 * mse.log10()).min(PSNR_CAP)
    }
}

pub fn psnr(a: &Image, b: &Image) -> Result<f64> {
    Ok(psnr_from_mse(clamped_mse(a, b)?))
}

fn gaussian_window(size: usize) -> Vec<f64> {
    let mid = (size as f64 - 1.0) / 2.0;
    let g: Vec<f64> = (0..size)
        .map(|i| (-(i as f64 - mid).powi(2) / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp())
        .collect();
    let sum: f64 = g.iter().sum();
    g.into_iter().map(|v| v / sum).collect()
}

/// Mean SSIM over the three channels of the clamped images. Windows are
/// 11x11 Gaussian (sigma 1.5) at every position where they fit entirely;
/// images smaller than that use one window spanning the smaller side.
pub fn ssim(a: &Image, b: &Image) -> Result<f64> {
    check_dims(a, b)?;
    let (w, h) = (a.width as usize, a.height as usize);
    if w == 0 || h == 0 {
        return Ok(1.0);
    }
    let size = SSIM_WINDOW.min(w).min(h);
    let g = gaussian_window(size);
    let (c1, c2) = ((SSIM_K1).powi(2), (SSIM_K2).powi(2));
    let mut total = 0.0;
    for c in 0..3 {
        let x: Vec<f64> = a.pixels.iter().map(|p| p[c].clamp(0.0, 1.0)).collect();
        let y: Vec<f64> = b.pixels.iter().map(|p| p[c].clamp(0.0, 1.0)).collect();
        let positions: Vec<(usize, usize)> = (0..=h - size).flat_map(|y0| (0..=w - size).map(move |x0| (x0, y0))).collect();
        let sum: f64 = positions
            .par_iter()
            .map(|&(x0, y0)| {
                let (mut mx, mut my, mut xx, mut yy, mut xy) = (0.0, 0.0, 0.0, 0.0, 0.0);
                for (j, gj) in g.iter().enumerate() {
                    for (i, gi) in g.iter().enumerate() {
                        let k = (y0 + j) * w + x0 + i;
                        let wgt = gi * gj;
                        mx += wgt * x[k];
                        my += wgt * y[k];
                        xx += wgt * x[k] * x[k];
                        yy += wgt * y[k] * y[k];
                        xy += wgt * x[k] * y[k];
                    }
                }
                let (vx, vy, cov) = (xx - mx * mx, yy - my * my, xy - mx * my);
                ((2.0 * mx * my + c1) * (2.0 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2))
            })
            .collect::<Vec<f64>>()
            .iter()
            .sum();
        total += sum / positions.len() as f64;
    }
    Ok(total / 3.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct CameraMetrics {
    pub camera: usize,
    pub mse: f64,
    pub psnr: f64,
    pub ssim: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricsReport {
    pub per_camera: Vec<CameraMetrics>,
    pub mean_psnr: f64,
    pub mean_ssim: f64,
    /// MSE over every pixel of every camera.
    pub mse: f64,
    /// PSNR of `mse`.
    pub psnr: f64,
    pub splat_count: usize,
    pub model_bytes: Option<usize>,
    pub bytes_per_splat: Option<f64>,
    pub size: Option<SizeReport>,
}

pub fn compare_images(images: &[Image], references: &[Image]) -> Result<Vec<CameraMetrics>> {
    if images.len() != references.len() {
        return Err(Error::Dimension(format!(
            "{} renders compared with {} references",
            images.len(),
            references.len()
        )));
    }
    images
        .iter()
        .zip(references)
        .enumerate()
        .map(|(camera, (a, b))| {
            let mse = clamped_mse(a, b)?;
            Ok(CameraMetrics {
                camera,
                mse,
                psnr: psnr_from_mse(mse),
                ssim: ssim(a, b)?,
            })
        })
        .collect()
}

/// Render `splats` from every camera and compare with `references`.
pub fn compute_metrics(splats: &[Splat], references: &[Image], cameras: &[Camera]) -> Result<MetricsReport> {
    let renders = render_all(splats, cameras);
    let per_camera = compare_images(&renders, references)?;
    let n = per_camera.len().max(1) as f64;
    let pixels: usize = references.iter().map(Image::pixel_count).sum();
    let mse = if pixels == 0 {
        0.0
    } else {
        per_camera
            .iter()
            .zip(references)
            .map(|(m, r)| m.mse * r.pixel_count() as f64)
            .sum::<f64>()
            / pixels as f64
    };
    Ok(MetricsReport {
        mean_psnr: per_camera.iter().map(|m| m.psnr).sum::<f64>() / n,
        mean_ssim: per_camera.iter().map(|m| m.ssim).sum::<f64>() / n,
        per_camera,
        mse,
        psnr: psnr_from_mse(mse),
        splat_count: splats.len(),
        model_bytes: None,
        bytes_per_splat: None,
        size: None,
    })
}

impl MetricsReport {
    pub fn with_container(mut self, bytes: &[u8]) -> Result<Self> {
        self.model_bytes = Some(bytes.len());
        if self.splat_count > 0 {
            self.bytes_per_splat = Some(bytes.len() as f64 / self.splat_count as f64);
        }
        self.size = Some(size_report(bytes)?);
        Ok(self)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StreamSize {
    pub stream: &'static str,
    pub raw_bytes: usize,
    /// Compressed payload size minus the size with this stream zeroed.
    pub attributed_bytes: i64,
    pub bytes_per_splat: f64,
    /// Fraction of the compressed payload.
    pub share: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SizeReport {
    pub splat_count: usize,
    pub zstd_level: i32,
    pub container_bytes: usize,
    pub compressed_payload_bytes: usize,
    pub raw_payload_bytes: usize,
    pub bytes_per_splat: f64,
    pub compression_ratio: f64,
    pub streams: Vec<StreamSize>,
    /// Sum of the per-stream attributions as a fraction of the payload.
    pub attributed_share: f64,
}

/// Attribute the compressed payload to streams by ablation: each stream in
/// turn is replaced by zeros of the same length and the payload is
/// recompressed at the container's level.
pub fn size_report(bytes: &[u8]) -> Result<SizeReport> {
    let (header, streams) = read_container(bytes)?;
    let level = header.zstd_level as i32;
    let count = header.count as usize;
    let full = compress(&streams.concat(), level)?.len();
    let per_splat = |b: f64| if count == 0 { 0.0 } else { b / count as f64 };
    let sizes: Vec<StreamSize> = (0..STREAM_NAMES.len())
        .into_par_iter()
        .map(|i| -> Result<StreamSize> {
            let mut ablated: AttributeStreams = streams.clone();
            let target = ablated.as_array_mut()[i].as_mut_slice();
            target.fill(0);
            let without = compress(&ablated.concat(), level)?.len();
            let attributed = full as i64 - without as i64;
            Ok(StreamSize {
                stream: STREAM_NAMES[i],
                raw_bytes: streams.as_array()[i].len(),
                attributed_bytes: attributed,
                bytes_per_splat: per_splat(attributed as f64),
                share: if full == 0 { 0.0 } else { attributed as f64 / full as f64 },
            })
        })
        .collect::<Result<_>>()?;
    Ok(SizeReport {
        splat_count: count,
        zstd_level: level,
        container_bytes: bytes.len(),
        compressed_payload_bytes: bytes.len() - HEADER_LEN,
        raw_payload_bytes: header.payload_len() as usize,
        bytes_per_splat: per_splat(bytes.len() as f64),
        compression_ratio: if count == 0 {
            0.0
        } else {
            (RAW_BYTES_PER_SPLAT * count) as f64 / bytes.len() as f64
        },
        attributed_share: sizes.iter().map(|s| s.share).sum(),
        streams: sizes,
    })
}
