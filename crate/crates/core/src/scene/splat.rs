use nalgebra::{Matrix3, Quaternion, UnitQuaternion, Vector3};

use crate::error::{Error, Result};
use crate::raster::sh;

/// Number of SH coefficients per color channel (degrees 0..=3).
pub const SH_COEFFS: usize = 16;
/// Number of view-dependent coefficients per channel.
pub const AC_COEFFS: usize = SH_COEFFS - 1;

/// Per-channel SH coefficients; `[channel][index]`, index 0 is DC.
pub type ShCoeffs = [[f64; SH_COEFFS]; 3];

/// A splat exactly as stored in the 3DGS PLY layout, before activation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawSplat {
    pub position: [f32; 3],
    pub f_dc: [f32; 3],
    /// Channel-major: the 15 AC coefficients of red, then green, then blue.
    pub f_rest: [f32; 3 * AC_COEFFS],
    /// Logit of the opacity.
    pub opacity: f32,
    /// Per-axis log standard deviation.
    pub scale: [f32; 3],
    /// Unnormalized quaternion `(w, x, y, z)`.
    pub rotation: [f32; 4],
}

impl Default for RawSplat {
    fn default() -> Self {
        Self {
            position: [0.0; 3],
            f_dc: [0.0; 3],
            f_rest: [0.0; 3 * AC_COEFFS],
            opacity: 0.0,
            scale: [0.0; 3],
            rotation: [1.0, 0.0, 0.0, 0.0],
        }
    }
}

/// An activated splat.
///
/// Opacity is stored activated (in `(0, 1)`), scale as per-axis log standard
/// deviation, rotation as a unit quaternion `(w, x, y, z)` with `w >= 0`, and
/// SH coefficients in RGB.
#[derive(Debug, Clone, PartialEq)]
pub struct Splat {
    pub position: Vector3<f64>,
    pub log_scale: Vector3<f64>,
    pub rotation: [f64; 4],
    pub opacity: f64,
    pub sh: ShCoeffs,
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Normalize a quaternion and flip its sign so that `w >= 0`.
pub fn normalize_quaternion(q: [f64; 4]) -> [f64; 4] {
    let norm = q.iter().map(|c| c * c).sum::<f64>().sqrt();
    let sign = if q[0] < 0.0 { -1.0 } else { 1.0 };
    q.map(|c| sign * c / norm)
}

impl Splat {
    /// Activate the pre-activation values stored in a PLY file.
    pub fn activate(raw: &RawSplat, index: usize) -> Result<Splat> {
        check_finite(&raw.position, index, "position")?;
        check_finite(&raw.f_dc, index, "f_dc")?;
        check_finite(&raw.f_rest, index, "f_rest")?;
        check_finite(&[raw.opacity], index, "opacity")?;
        check_finite(&raw.scale, index, "scale")?;
        check_finite(&raw.rotation, index, "rotation")?;

        let q = raw.rotation.map(f64::from);
        if q.iter().all(|&c| c == 0.0) {
            return Err(Error::Validation(format!("splat {index} has a zero quaternion")));
        }
        let opacity = sigmoid(raw.opacity as f64);
        // Extreme logits saturate to exactly 0 or 1 in f64.
        if !(opacity > 0.0 && opacity < 1.0) {
            return Err(Error::Validation(format!(
                "splat {index} opacity saturates outside (0, 1)"
            )));
        }

        let mut sh = [[0.0; SH_COEFFS]; 3];
        for (c, channel) in sh.iter_mut().enumerate() {
            channel[0] = raw.f_dc[c] as f64;
            for j in 0..AC_COEFFS {
                channel[j + 1] = raw.f_rest[c * AC_COEFFS + j] as f64;
            }
        }

        Ok(Splat {
            position: Vector3::from(raw.position.map(f64::from)),
            log_scale: Vector3::from(raw.scale.map(f64::from)),
            rotation: normalize_quaternion(q),
            opacity,
            sh,
        })
    }

    /// Convert back to pre-activation values (logit opacity, log scale).
    pub fn to_raw(&self) -> RawSplat {
        let mut f_rest = [0.0f32; 3 * AC_COEFFS];
        for c in 0..3 {
            for j in 0..AC_COEFFS {
                f_rest[c * AC_COEFFS + j] = self.sh[c][j + 1] as f32;
            }
        }
        RawSplat {
            position: [
                self.position.x as f32,
                self.position.y as f32,
                self.position.z as f32,
            ],
            f_dc: [self.sh[0][0] as f32, self.sh[1][0] as f32, self.sh[2][0] as f32],
            f_rest,
            opacity: logit(self.opacity) as f32,
            scale: [
                self.log_scale.x as f32,
                self.log_scale.y as f32,
                self.log_scale.z as f32,
            ],
            rotation: self.rotation.map(|c| c as f32),
        }
    }

    pub fn scale(&self) -> Vector3<f64> {
        self.log_scale.map(f64::exp)
    }

    pub fn rotation_matrix(&self) -> Matrix3<f64> {
        let [w, x, y, z] = self.rotation;
        UnitQuaternion::new_normalize(Quaternion::new(w, x, y, z)).to_rotation_matrix().into_inner()
    }

    /// World-space covariance `R diag(s^2) R^T`.
    pub fn covariance(&self) -> Matrix3<f64> {
        let r = self.rotation_matrix();
        let s = self.scale();
        let d = Matrix3::from_diagonal(&s.component_mul(&s));
        r * d * r.transpose()
    }

    /// Unclamped RGB color seen along the unit direction `dir`.
    pub fn color(&self, dir: &Vector3<f64>) -> [f64; 3] {
        let basis = sh::basis(dir);
        self.sh.map(|channel| sh::dot(&channel, &basis))
    }
}

fn check_finite(values: &[f32], index: usize, field: &'static str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { index, field })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logistic_of_zero_is_half() {
        let s = Splat::activate(&unit_raw(), 0).unwrap();
        assert_eq!(s.opacity, 0.5);
    }

    #[test]
    fn negative_real_part_is_flipped() {
        let mut raw = unit_raw();
        raw.rotation = [-1.0, 0.0, 0.0, 0.0];
        let s = Splat::activate(&raw, 0).unwrap();
        assert_eq!(s.rotation, [1.0, 0.0, 0.0, 0.0]);

        raw.rotation = [-2.0, 0.0, 2.0, 0.0];
        let s = Splat::activate(&raw, 0).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.rotation[0] - h).abs() < 1e-15 && (s.rotation[2] + h).abs() < 1e-15);
    }

    #[test]
    fn zero_log_scale_is_unit_scale() {
        let s = Splat::activate(&unit_raw(), 0).unwrap();
        assert_eq!(s.scale(), Vector3::new(1.0, 1.0, 1.0));
    }

    #[test]
    fn non_finite_input_names_splat_and_field() {
        let mut raw = unit_raw();
        raw.scale[1] = f32::NAN;
        let err = Splat::activate(&raw, 7).unwrap_err();
        assert!(matches!(err, Error::NonFinite { index: 7, field: "scale" }));
    }

    #[test]
    fn f_rest_is_channel_major() {
        let mut raw = unit_raw();
        for (i, v) in raw.f_rest.iter_mut().enumerate() {
            *v = i as f32;
        }
        let s = Splat::activate(&raw, 0).unwrap();
        assert_eq!(s.sh[0][1], 0.0);
        assert_eq!(s.sh[0][15], 14.0);
        assert_eq!(s.sh[1][1], 15.0);
        assert_eq!(s.sh[2][15], 44.0);
        assert_eq!(s.to_raw().f_rest, raw.f_rest);
    }

    #[test]
    fn isotropic_covariance_ignores_rotation() {
        let mut raw = unit_raw();
        raw.scale = [-2.0; 3];
        let a = Splat::activate(&raw, 0).unwrap();
        raw.rotation = [0.3, -0.5, 0.7, 0.2];
        let b = Splat::activate(&raw, 0).unwrap();
        assert!((a.covariance() - b.covariance()).abs().max() < 1e-15);
    }

    fn unit_raw() -> RawSplat {
        RawSplat {
            rotation: [1.0, 0.0, 0.0, 0.0],
            ..RawSplat::default()
        }
    }
}
