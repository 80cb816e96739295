use crate::scene::{ShCoeffs, SH_COEFFS};

pub fn rgb_to_ycocg([r, g, b]: [f64; 3]) -> [f64; 3] {
    [0.25 * r + 0.5 * g + 0.25 * b, 0.5 * (r - b), -0.25 * r + 0.5 * g - 0.25 * b]
}

pub fn ycocg_to_rgb([y, co, cg]: [f64; 3]) -> [f64; 3] {
    [y + co - cg, y + cg, y - co - cg]
}

/// Apply a color transform to every coefficient of a channel-major set.
fn map_coeffs(sh: &ShCoeffs, f: fn([f64; 3]) -> [f64; 3]) -> ShCoeffs {
    let mut out = [[0.0; SH_COEFFS]; 3];
    for i in 0..SH_COEFFS {
        let v = f([sh[0][i], sh[1][i], sh[2][i]]);
        for c in 0..3 {
            out[c][i] = v[c];
        }
    }
    out
}

pub fn sh_to_ycocg(sh: &ShCoeffs) -> ShCoeffs {
    map_coeffs(sh, rgb_to_ycocg)
}

pub fn sh_to_rgb(sh: &ShCoeffs) -> ShCoeffs {
    map_coeffs(sh, ycocg_to_rgb)
}
