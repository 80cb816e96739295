//! Real spherical harmonics up to degree 3.
//!
//! Uses the sign convention of the reference 3DGS renderer (Condon-Shortley
//! phase folded into the real basis), so coefficients read from 3DGS PLY
//! files evaluate to the same colors. Index `i` (0-based here) corresponds to
//! the 1-based `(l, m) -> l(l+1) + m + 1` ordering.

use nalgebra::Vector3;

use crate::scene::SH_COEFFS;

pub const SH_C0: f64 = 0.282_094_791_773_878_14;
const SH_C1: f64 = 0.488_602_511_902_919_9;
const SH_C2: [f64; 5] = [
    1.092_548_430_592_079_2,
    -1.092_548_430_592_079_2,
    0.315_391_565_252_520_05,
    -1.092_548_430_592_079_2,
    0.546_274_215_296_039_6,
];
const SH_C3: [f64; 7] = [
    -0.590_043_589_926_643_5,
    2.890_611_442_640_554,
    -0.457_045_799_464_465_8,
    0.373_176_332_590_115_4,
    -0.457_045_799_464_465_8,
    1.445_305_721_320_277,
    -0.590_043_589_926_643_5,
];

/// 1-based basis index of degree `l` and order `m`.
pub const fn sh_index(l: i32, m: i32) -> usize {
    (l * (l + 1) + m + 1) as usize
}

/// All 16 basis values at the unit direction `d`.
pub fn basis(d: &Vector3<f64>) -> [f64; SH_COEFFS] {
    let (x, y, z) = (d.x, d.y, d.z);
    let (xx, yy, zz) = (x * x, y * y, z * z);
    [
        SH_C0,
        -SH_C1 * y,
        SH_C1 * z,
        -SH_C1 * x,
        SH_C2[0] * x * y,
        SH_C2[1] * y * z,
        SH_C2[2] * (2.0 * zz - xx - yy),
        SH_C2[3] * x * z,
        SH_C2[4] * (xx - yy),
        SH_C3[0] * y * (3.0 * xx - yy),
        SH_C3[1] * x * y * z,
        SH_C3[2] * y * (4.0 * zz - xx - yy),
        SH_C3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy),
        SH_C3[4] * x * (4.0 * zz - xx - yy),
        SH_C3[5] * z * (xx - yy),
        SH_C3[6] * x * (xx - 3.0 * yy),
    ]
}

/// Basis value for the 1-based index `i` in `1..=16`.
pub fn basis_value(i: usize, d: &Vector3<f64>) -> f64 {
    assert!((1..=SH_COEFFS).contains(&i), "SH index {i} outside 1..=16");
    basis(d)[i - 1]
}

#[inline]
pub fn dot(coeffs: &[f64; SH_COEFFS], basis: &[f64; SH_COEFFS]) -> f64 {
    coeffs.iter().zip(basis).map(|(a, b)| a * b).sum()
}

/// One color channel `C(d) = sum_i L_i Y_i(d)`, unclamped.
pub fn eval_sh_color(coeffs: &[f64; SH_COEFFS], d: &Vector3<f64>) -> f64 {
    dot(coeffs, &basis(d))
}
