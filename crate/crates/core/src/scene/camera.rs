use std::path::Path;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Image;

/// Pinhole camera. Camera space looks down `+z`, with `+x` right and `+y`
/// down in the image; pixel `(0, 0)` is the top-left corner.
#[derive(Debug, Clone, PartialEq)]
pub struct Camera {
    pub eye: Vector3<f64>,
    /// World-to-camera rotation.
    pub rotation: Matrix3<f64>,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
    pub image: Option<Image>,
}

/// One entry of the cameras JSON array.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CameraEntry {
    pub eye: [f64; 3],
    /// Row-major world-to-camera rotation.
    pub rotation: [f64; 9],
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image: Option<String>,
}

const ORTHONORMAL_TOLERANCE: f64 = 1e-4;

impl Camera {
    pub fn new(
        eye: Vector3<f64>,
        rotation: Matrix3<f64>,
        (fx, fy): (f64, f64),
        (cx, cy): (f64, f64),
        (width, height): (u32, u32),
    ) -> Result<Camera> {
        if !(fx > 0.0 && fy > 0.0 && fx.is_finite() && fy.is_finite()) {
            return Err(Error::Validation(format!("focal lengths must be positive, got ({fx}, {fy})")));
        }
        if width == 0 || height == 0 {
            return Err(Error::Validation("image dimensions must be at least 1".into()));
        }
        if !eye.iter().chain(rotation.iter()).chain([cx, cy].iter()).all(|v| v.is_finite()) {
            return Err(Error::Validation("non-finite camera parameter".into()));
        }
        let deviation = (rotation * rotation.transpose() - Matrix3::identity()).abs().max();
        if deviation > ORTHONORMAL_TOLERANCE {
            return Err(Error::Validation(format!(
                "rotation is not orthonormal (|R R^T - I| = {deviation:.3e})"
            )));
        }
        if rotation.determinant() < 0.0 {
            return Err(Error::Validation("rotation has determinant -1 (reflection)".into()));
        }
        Ok(Camera {
            eye,
            rotation: nearest_rotation(&rotation),
            fx,
            fy,
            cx,
            cy,
            width,
            height,
            image: None,
        })
    }

    /// Build from a COLMAP-style extrinsic `p_cam = R p_world + t`.
    pub fn from_colmap(
        rotation: Matrix3<f64>,
        translation: Vector3<f64>,
        focal: (f64, f64),
        principal: (f64, f64),
        size: (u32, u32),
    ) -> Result<Camera> {
        let eye = -rotation.transpose() * translation;
        Camera::new(eye, rotation, focal, principal, size)
    }

    /// Camera at `eye` looking at `target`, with `up` pointing up in the image.
    pub fn look_at(
        eye: Vector3<f64>,
        target: Vector3<f64>,
        up: Vector3<f64>,
        focal: f64,
        size: (u32, u32),
    ) -> Result<Camera> {
        let forward = (target - eye).normalize();
        let right = forward.cross(&up).normalize();
        let down = forward.cross(&right);
        let rotation = Matrix3::from_rows(&[right.transpose(), down.transpose(), forward.transpose()]);
        Camera::new(
            eye,
            rotation,
            (focal, focal),
            (size.0 as f64 / 2.0, size.1 as f64 / 2.0),
            size,
        )
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    /// Point in camera space.
    #[inline]
    pub fn to_camera(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * (p - self.eye)
    }

    pub fn to_entry(&self) -> CameraEntry {
        let r = &self.rotation;
        CameraEntry {
            eye: [self.eye.x, self.eye.y, self.eye.z],
            rotation: [
                r[(0, 0)], r[(0, 1)], r[(0, 2)],
                r[(1, 0)], r[(1, 1)], r[(1, 2)],
                r[(2, 0)], r[(2, 1)], r[(2, 2)],
            ],
            fx: self.fx,
            fy: self.fy,
            cx: self.cx,
            cy: self.cy,
            width: self.width,
            height: self.height,
            image: None,
        }
    }

    fn from_entry(entry: &CameraEntry) -> Result<Camera> {
        Camera::new(
            Vector3::from(entry.eye),
            Matrix3::from_row_slice(&entry.rotation),
            (entry.fx, entry.fy),
            (entry.cx, entry.cy),
            (entry.width, entry.height),
        )
    }
}

fn nearest_rotation(m: &Matrix3<f64>) -> Matrix3<f64> {
    let svd = m.svd(true, true);
    svd.u.unwrap() * svd.v_t.unwrap()
}

/// Parse the cameras JSON array without loading any referenced images.
pub fn parse_cameras(bytes: &[u8]) -> Result<Vec<Camera>> {
    parse_entries(bytes)?
        .iter()
        .enumerate()
        .map(|(i, e)| {
            Camera::from_entry(e).map_err(|err| match err {
                Error::Validation(msg) => Error::Validation(format!("camera {i}: {msg}")),
                other => other,
            })
        })
        .collect()
}

fn parse_entries(bytes: &[u8]) -> Result<Vec<CameraEntry>> {
    Ok(serde_json::from_slice(bytes)?)
}

/// Load a cameras file, resolving image paths relative to its directory.
pub fn load_cameras(path: &Path) -> Result<Vec<Camera>> {
    let bytes = std::fs::read(path)?;
    let entries = parse_entries(&bytes)?;
    let mut cameras = parse_cameras(&bytes)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    for (camera, entry) in cameras.iter_mut().zip(&entries) {
        if let Some(rel) = &entry.image {
            let file = std::fs::File::open(base.join(rel))?;
            let image = Image::read_png(file)?;
            if image.width != camera.width || image.height != camera.height {
                return Err(Error::Dimension(format!(
                    "image {rel} is {}x{}, camera expects {}x{}",
                    image.width, image.height, camera.width, camera.height
                )));
            }
            camera.image = Some(image);
        }
    }
    Ok(cameras)
}

pub fn cameras_to_json(cameras: &[Camera]) -> String {
    let entries: Vec<CameraEntry> = cameras.iter().map(Camera::to_entry).collect();
    serde_json::to_string_pretty(&entries).expect("camera entries serialize")
}
