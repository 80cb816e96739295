use nalgebra::Matrix2x3;

use crate::scene::{Camera, Splat};

/// Splats closer than this (camera-space z) are culled.
pub const NEAR_CLIP: f64 = 0.01;
/// Low-pass dilation added to the screen-space covariance diagonal, in px².
pub const COV_DILATION: f64 = 0.3;
/// The Jacobian is evaluated no further off axis than this multiple of the
/// half field of view. Without it splats beside the camera plane project to
/// enormous footprints.
pub const JACOBIAN_FOV_LIMIT: f64 = 1.3;

/// A splat projected into one camera's screen space.
#[derive(Debug, Clone, PartialEq)]
pub struct Projected2D {
    pub splat_id: u32,
    /// Pixel coordinates; pixel `(x, y)` is sampled at `(x + 0.5, y + 0.5)`.
    pub mean2d: [f64; 2],
    /// Symmetric covariance `[a, b, c]` for `[[a, b], [b, c]]`, px².
    pub cov2d: [f64; 3],
    /// Inverse of `cov2d`, same packing.
    pub conic: [f64; 3],
    pub view_depth: f64,
    /// Three-sigma screen radius, px.
    pub radius: f64,
    pub opacity: f64,
    /// Color toward this camera, clamped to be non-negative.
    pub color: [f64; 3],
}

impl Projected2D {
    /// `o * G2D` at the pixel center `(x + 0.5, y + 0.5)`, unclamped.
    #[inline]
    pub fn alpha_at(&self, x: u32, y: u32) -> f64 {
        let dx = x as f64 + 0.5 - self.mean2d[0];
        let dy = y as f64 + 0.5 - self.mean2d[1];
        let [a, b, c] = self.conic;
        let power = -0.5 * (a * dx * dx + c * dy * dy) - b * dx * dy;
        if power > 0.0 {
            return 0.0;
        }
        self.opacity * power.exp()
    }

    /// Inclusive pixel bounds `(x0, y0, x1, y1)` whose centers lie within
    /// `radius` of the mean, clipped to the image. `None` if empty.
    pub fn pixel_bounds(&self, width: u32, height: u32) -> Option<(u32, u32, u32, u32)> {
        let [mx, my] = self.mean2d;
        let x0 = (mx - self.radius - 0.5).ceil().max(0.0);
        let y0 = (my - self.radius - 0.5).ceil().max(0.0);
        let x1 = (mx + self.radius - 0.5).floor().min(width as f64 - 1.0);
        let y1 = (my + self.radius - 0.5).floor().min(height as f64 - 1.0);
        if x0 > x1 || y0 > y1 {
            return None;
        }
        Some((x0 as u32, y0 as u32, x1 as u32, y1 as u32))
    }
}

/// Project a splat with the local affine approximation of the pinhole
/// projection. Returns `None` when culled.
pub fn project_splat(splat: &Splat, id: u32, camera: &Camera) -> Option<Projected2D> {
    let t = camera.to_camera(&splat.position);
    if t.z <= NEAR_CLIP {
        return None;
    }
    let inv_z = 1.0 / t.z;
    let mean2d = [
        camera.fx * t.x * inv_z + camera.cx,
        camera.fy * t.y * inv_z + camera.cy,
    ];

    let lim_x = JACOBIAN_FOV_LIMIT * camera.width as f64 / (2.0 * camera.fx);
    let lim_y = JACOBIAN_FOV_LIMIT * camera.height as f64 / (2.0 * camera.fy);
    let (tx, ty) = ((t.x * inv_z).clamp(-lim_x, lim_x), (t.y * inv_z).clamp(-lim_y, lim_y));
    let jacobian = Matrix2x3::new(
        camera.fx * inv_z,
        0.0,
        -camera.fx * tx * inv_z,
        0.0,
        camera.fy * inv_z,
        -camera.fy * ty * inv_z,
    );
    let jw = jacobian * camera.rotation;
    let cov = jw * splat.covariance() * jw.transpose();
    let a = cov[(0, 0)] + COV_DILATION;
    let b = 0.5 * (cov[(0, 1)] + cov[(1, 0)]);
    let c = cov[(1, 1)] + COV_DILATION;
    let det = a * c - b * b;
    if !(det > 0.0) {
        return None;
    }

    let mid = 0.5 * (a + c);
    let lambda_max = mid + (mid * mid - det).max(0.0).sqrt();
    let radius = (3.0 * lambda_max.sqrt()).ceil();
    let w = camera.width as f64;
    let h = camera.height as f64;
    if mean2d[0] + radius < 0.0
        || mean2d[0] - radius > w
        || mean2d[1] + radius < 0.0
        || mean2d[1] - radius > h
    {
        return None;
    }

    let dir = (splat.position - camera.eye).normalize();
    let color = splat.color(&dir).map(|c| c.max(0.0));

    Some(Projected2D {
        splat_id: id,
        mean2d,
        cov2d: [a, b, c],
        conic: [c / det, -b / det, a / det],
        view_depth: t.z,
        radius,
        opacity: splat.opacity,
        color,
    })
}
