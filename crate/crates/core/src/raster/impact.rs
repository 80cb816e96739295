use rayon::prelude::*;

use super::render::{partial_colors_into, prune_difference, Frame};
use crate::error::{Error, Result};
use crate::image::Image;
use crate::scene::{Camera, Splat};

/// Rows rendered by one parallel task. Results are merged in row order, so
/// the chunking only affects speed.
const ROWS_PER_CHUNK: usize = 4;

/// Per-splat effect of removal and visibility, over all cameras.
#[derive(Debug, Clone)]
pub struct ImpactAnalysis {
    /// Change in MSE against the targets if the splat alone were deleted.
    /// All zeros when no targets were supplied.
    pub delta_mse: Vec<f64>,
    /// Mean over cameras of the image fraction the splat contributes.
    pub importance: Vec<f64>,
    /// Per camera, `(splat, I_k(s))` for every splat with `I_k(s) > 0`,
    /// ascending by splat index.
    pub camera_importance: Vec<Vec<(u32, f64)>>,
    /// Current unclamped renders.
    pub images: Vec<Image>,
    /// MSE of `images` against the targets (0 without targets).
    pub mse: f64,
}

impl ImpactAnalysis {
    /// Transpose of `camera_importance`: per splat, `(camera, I_k(s))`.
    pub fn by_splat(&self) -> Vec<Vec<(u32, f64)>> {
        let mut out = vec![Vec::new(); self.importance.len()];
        for (cam, entries) in self.camera_importance.iter().enumerate() {
            for &(k, v) in entries {
                out[k as usize].push((cam as u32, v));
            }
        }
        out
    }
}

struct CameraPass {
    image: Image,
    /// Sum over pixels and channels of the squared-error change.
    delta_se: Vec<f64>,
    /// Sum over pixels of `T * alpha`.
    coverage: Vec<f64>,
    squared_error: f64,
}

/// `(splat, delta_se, coverage)` condensed per splat within one chunk.
type ChunkEntries = Vec<(u32, f64, f64)>;

fn camera_pass(splats: &[Splat], camera: &Camera, target: Option<&Image>) -> CameraPass {
    let frame = Frame::new(splats, camera);
    let w = camera.width as usize;
    let h = camera.height as usize;
    let chunks: Vec<(Vec<[f64; 3]>, ChunkEntries, f64)> = (0..h.div_ceil(ROWS_PER_CHUNK))
        .into_par_iter()
        .map_init(
            || (Vec::new(), Vec::new()),
            |(contribs, prefix), chunk| {
                let rows = chunk * ROWS_PER_CHUNK..((chunk + 1) * ROWS_PER_CHUNK).min(h);
                let mut pixels = Vec::with_capacity(rows.len() * w);
                let mut entries: ChunkEntries = Vec::new();
                let mut squared_error = 0.0;
                for y in rows {
                    for x in 0..w {
                        let active = frame.composite(x as u32, y as u32, contribs);
                        partial_colors_into(contribs, prefix);
                        let color = prefix[active];
                        let residual = target.map(|t| {
                            let ct = t.pixels[y * w + x];
                            [color[0] - ct[0], color[1] - ct[1], color[2] - ct[2]]
                        });
                        if let Some(r) = residual {
                            squared_error += r.iter().map(|v| v * v).sum::<f64>();
                        }
                        for rank in 0..active {
                            let c = &contribs[rank];
                            let dse = match residual {
                                Some(r) => {
                                    let pd = prune_difference(contribs, prefix, active, rank);
                                    (0..3).map(|ch| pd[ch] * pd[ch] + 2.0 * pd[ch] * r[ch]).sum()
                                }
                                None => 0.0,
                            };
                            entries.push((c.splat_id, dse, c.weight()));
                        }
                        if let (Some(r), Some(c)) = (residual, contribs.get(active)) {
                            let pd = prune_difference(contribs, prefix, active, active);
                            let dse = (0..3).map(|ch| pd[ch] * pd[ch] + 2.0 * pd[ch] * r[ch]).sum();
                            entries.push((c.splat_id, dse, 0.0));
                        }
                        pixels.push(color);
                    }
                }
                entries.sort_by_key(|e| e.0);
                entries.dedup_by(|next, acc| {
                    if next.0 == acc.0 {
                        acc.1 += next.1;
                        acc.2 += next.2;
                        true
                    } else {
                        false
                    }
                });
                (pixels, entries, squared_error)
            },
        )
        .collect();

    let mut image = Image::black(camera.width, camera.height);
    image.pixels.clear();
    let mut delta_se = vec![0.0; splats.len()];
    let mut coverage = vec![0.0; splats.len()];
    let mut squared_error = 0.0;
    for (pixels, entries, se) in chunks {
        image.pixels.extend(pixels);
        for (k, dse, cov) in entries {
            delta_se[k as usize] += dse;
            coverage[k as usize] += cov;
        }
        squared_error += se;
    }
    CameraPass {
        image,
        delta_se,
        coverage,
        squared_error,
    }
}

fn check_targets(cameras: &[Camera], targets: &[Image]) -> Result<()> {
    if targets.len() != cameras.len() {
        return Err(Error::Dimension(format!(
            "{} target images for {} cameras",
            targets.len(),
            cameras.len()
        )));
    }
    for (i, (c, t)) in cameras.iter().zip(targets).enumerate() {
        if c.width != t.width || c.height != t.height {
            return Err(Error::Dimension(format!(
                "target {i} is {}x{}, camera is {}x{}",
                t.width, t.height, c.width, c.height
            )));
        }
    }
    Ok(())
}

/// Render every camera once and accumulate, per splat, the exact change in
/// MSE against `targets` caused by deleting it, plus its importance.
///
/// Cameras are processed in index order and each camera's rows are merged
/// in row order, so results do not depend on the worker count.
pub fn analyze(splats: &[Splat], cameras: &[Camera], targets: Option<&[Image]>) -> Result<ImpactAnalysis> {
    if let Some(t) = targets {
        check_targets(cameras, t)?;
    }
    let n = splats.len();
    let mut delta_mse = vec![0.0; n];
    let mut importance = vec![0.0; n];
    let mut camera_importance = Vec::with_capacity(cameras.len());
    let mut images = Vec::with_capacity(cameras.len());
    let mut mse = 0.0;
    for (s, camera) in cameras.iter().enumerate() {
        let pass = camera_pass(splats, camera, targets.map(|t| &t[s]));
        let p = camera.pixel_count() as f64;
        let mut sparse = Vec::new();
        for k in 0..n {
            delta_mse[k] += pass.delta_se[k] / (3.0 * p);
            let ik = pass.coverage[k] / p;
            importance[k] += ik;
            if ik > 0.0 {
                sparse.push((k as u32, ik));
            }
        }
        mse += pass.squared_error / (3.0 * p);
        camera_importance.push(sparse);
        images.push(pass.image);
    }
    if !cameras.is_empty() {
        let inv = 1.0 / cameras.len() as f64;
        delta_mse.iter_mut().for_each(|v| *v *= inv);
        importance.iter_mut().for_each(|v| *v *= inv);
        mse *= inv;
    }
    Ok(ImpactAnalysis {
        delta_mse,
        importance,
        camera_importance,
        images,
        mse,
    })
}

/// Importance only (no targets).
pub fn compute_importance(splats: &[Splat], cameras: &[Camera]) -> ImpactAnalysis {
    analyze(splats, cameras, None).expect("no targets to mismatch")
}

/// Mean over cameras of the per-image mean squared error over pixels and
/// channels.
pub fn mse_against(images: &[Image], targets: &[Image]) -> Result<f64> {
    if images.len() != targets.len() {
        return Err(Error::Dimension(format!("{} images vs {} targets", images.len(), targets.len())));
    }
    if images.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for (a, b) in images.iter().zip(targets) {
        if !a.same_dimensions(b) {
            return Err(Error::Dimension("image size mismatch".into()));
        }
        let se: f64 = a
            .pixels
            .iter()
            .zip(&b.pixels)
            .map(|(p, q)| (0..3).map(|c| (p[c] - q[c]).powi(2)).sum::<f64>())
            .sum();
        total += se / (3.0 * a.pixel_count() as f64);
    }
    Ok(total / images.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::render::render_all;
    use crate::scene::RawSplat;
    use nalgebra::{Matrix3, Vector3};

    fn camera() -> Camera {
        Camera::new(Vector3::zeros(), Matrix3::identity(), (40.0, 40.0), (8.0, 8.0), (16, 16)).unwrap()
    }

    fn splat(z: f32, logit: f32, gray: f32) -> Splat {
        let raw = RawSplat {
            position: [0.0, 0.0, z],
            scale: [0.5; 3],
            rotation: [1.0, 0.0, 0.0, 0.0],
            opacity: logit,
            f_dc: [gray / crate::raster::sh::SH_C0 as f32; 3],
            ..Default::default()
        };
        Splat::activate(&raw, 0).unwrap()
    }

    #[test]
    fn invisible_splat_has_zero_importance() {
        let splats = vec![splat(2.0, 0.0, 0.5), splat(-2.0, 0.0, 0.5)];
        let a = compute_importance(&splats, &[camera()]);
        assert!(a.importance[0] > 0.0);
        assert_eq!(a.importance[1], 0.0);
        assert_eq!(a.camera_importance[0].len(), 1);
    }

    #[test]
    fn importance_sums_to_at_most_one() {
        let splats: Vec<_> = (0..6).map(|i| splat(2.0 + i as f32, 1.0, 0.3)).collect();
        let a = compute_importance(&splats, &[camera()]);
        let total: f64 = a.importance.iter().sum();
        assert!(total > 0.5 && total <= 1.0, "{total}");
    }

    #[test]
    fn images_match_plain_render() {
        let splats: Vec<_> = (0..4).map(|i| splat(2.0 + i as f32, 0.5, 0.2 * i as f32)).collect();
        let cams = [camera()];
        let a = compute_importance(&splats, &cams);
        assert_eq!(a.images, render_all(&splats, &cams));
    }

    #[test]
    fn target_mismatch_is_an_error() {
        let err = analyze(&[], &[camera()], Some(&[])).unwrap_err();
        assert!(matches!(err, Error::Dimension(_)));
    }

    #[test]
    fn initial_model_has_nonnegative_delta_mse() {
        let splats: Vec<_> = (0..5).map(|i| splat(2.0 + i as f32, 0.0, 0.5)).collect();
        let cams = [camera()];
        let targets = render_all(&splats, &cams);
        let a = analyze(&splats, &cams, Some(&targets)).unwrap();
        assert_eq!(a.mse, 0.0);
        assert!(a.delta_mse.iter().all(|&d| d >= 0.0));
    }
}
