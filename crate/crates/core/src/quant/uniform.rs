use serde::Serialize;

use crate::error::{Error, Result};

/// Opacity reconstruction offset, in quantization steps.
pub const OPACITY_SHIFT: f64 = 0.25;

/// `floor(0.5 + x * sf)`.
#[inline]
pub fn quantize(x: f64, sf: f64) -> i64 {
    (0.5 + x * sf).floor() as i64
}

/// `(q + shift) / sf`.
#[inline]
pub fn dequantize(q: i64, sf: f64, shift: f64) -> f64 {
    (q as f64 + shift) / sf
}

/// Scale factors per attribute. Kept as `f32` because that is what the
/// container stores; the encoder quantizes with exactly these values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantParams {
    pub sf_sh: f32,
    pub sf_opacity: f32,
    pub sf_rotation: f32,
    pub sf_scale: f32,
}

impl QuantParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("sf_sh", self.sf_sh),
            ("sf_opacity", self.sf_opacity),
            ("sf_rotation", self.sf_rotation),
            ("sf_scale", self.sf_scale),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Argument(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }

    /// AC magnitudes below this quantize to zero.
    pub fn sh_zero_threshold(&self) -> f64 {
        0.5 / self.sf_sh as f64
    }
}
