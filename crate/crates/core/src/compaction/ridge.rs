use super::system::SplatSystem;
use crate::scene::SH_COEFFS;

/// Diagonal jitter for the single retry after a failed factorization,
/// relative to the largest diagonal entry.
pub const JITTER: f64 = 1e-10;
/// A Cholesky pivot below this fraction of the largest diagonal entry
/// counts as a failure.
const PIVOT_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("normal equations are singular for channel {channel}")]
pub struct SingularSystem {
    pub channel: usize,
}

type Square = [[f64; SH_COEFFS]; SH_COEFFS];

/// In-place lower Cholesky factor of the leading `n x n` block.
fn cholesky(a: &mut Square, n: usize, scale: f64) -> bool {
    for j in 0..n {
        let mut d = a[j][j];
        for k in 0..j {
            d -= a[j][k] * a[j][k];
        }
        if !(d > PIVOT_FLOOR * scale) {
            return false;
        }
        let d = d.sqrt();
        a[j][j] = d;
        for i in j + 1..n {
            let mut s = a[i][j];
            for k in 0..j {
                s -= a[i][k] * a[j][k];
            }
            a[i][j] = s / d;
        }
    }
    true
}

fn cholesky_solve(l: &Square, n: usize, b: &mut [f64; SH_COEFFS]) {
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i][k] * b[k];
        }
        b[i] = s / l[i][i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= l[k][i] * b[k];
        }
        b[i] = s / l[i][i];
    }
}

/// Solve `(Y^T Y + lambda * diag(0, 1, ..)) x = Y^T c` for one channel over
/// the columns in `mask`. Masked-out coefficients are exactly zero.
pub fn ridge_solve_channel(
    system: &SplatSystem,
    channel: usize,
    mask: &[bool; SH_COEFFS],
    lambda: f64,
) -> Result<[f64; SH_COEFFS], SingularSystem> {
    let cols: Vec<usize> = (0..SH_COEFFS).filter(|&i| mask[i]).collect();
    let n = cols.len();
    let mut out = [0.0; SH_COEFFS];
    if n == 0 {
        return Ok(out);
    }
    let mut normal: Square = [[0.0; SH_COEFFS]; SH_COEFFS];
    let mut rhs = [0.0; SH_COEFFS];
    for (row, c) in system.y.iter().zip(&system.c) {
        for (a, &ca) in cols.iter().enumerate() {
            rhs[a] += row[ca] * c[channel];
            for (b, &cb) in cols.iter().enumerate().take(a + 1) {
                normal[a][b] += row[ca] * row[cb];
            }
        }
    }
    for (a, &ca) in cols.iter().enumerate() {
        if ca != 0 {
            normal[a][a] += lambda;
        }
        for b in 0..a {
            normal[b][a] = normal[a][b];
        }
    }
    let scale = (0..n).map(|i| normal[i][i]).fold(0.0, f64::max);

    let mut factor = normal;
    if !cholesky(&mut factor, n, scale) {
        factor = normal;
        for (i, row) in factor.iter_mut().enumerate().take(n) {
            row[i] += JITTER * scale.max(1.0);
        }
        if !cholesky(&mut factor, n, scale) {
            return Err(SingularSystem { channel });
        }
    }
    cholesky_solve(&factor, n, &mut rhs);
    for (a, &ca) in cols.iter().enumerate() {
        out[ca] = rhs[a];
    }
    Ok(out)
}

/// Solve all three channels, each with its own mask and regularization.
pub fn ridge_solve(
    system: &SplatSystem,
    masks: &[[bool; SH_COEFFS]; 3],
    lambda: [f64; 3],
) -> Result<[[f64; SH_COEFFS]; 3], SingularSystem> {
    Ok([
        ridge_solve_channel(system, 0, &masks[0], lambda[0])?,
        ridge_solve_channel(system, 1, &masks[1], lambda[1])?,
        ridge_solve_channel(system, 2, &masks[2], lambda[2])?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_system() {
        // One DC column: x = sum(y c) / sum(y^2), independent of lambda.
        let rows = [[0.0; SH_COEFFS]; 3].map(|mut r| {
            r[0] = 2.0;
            r
        });
        let sys = SplatSystem::from_rows(&rows, &[[1.0; 3], [2.0; 3], [3.0; 3]], &[1.0, 1.0, 1.0]);
        let mut mask = [false; SH_COEFFS];
        mask[0] = true;
        for lambda in [0.0, 1.0, 1e6] {
            let x = ridge_solve_channel(&sys, 0, &mask, lambda).unwrap();
            assert!((x[0] - 1.0).abs() < 1e-15);
            assert!(x[1..].iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn rank_deficient_system_is_rescued_by_jitter() {
        let mut r = [0.0; SH_COEFFS];
        r[0] = 1.0;
        r[1] = 1.0;
        let sys = SplatSystem::from_rows(&[r, r], &[[1.0; 3], [1.0; 3]], &[1.0, 1.0]);
        let mut mask = [false; SH_COEFFS];
        mask[0] = true;
        mask[1] = true;
        let x = ridge_solve_channel(&sys, 2, &mask, 0.0).unwrap();
        assert!((x[0] + x[1] - 1.0).abs() < 1e-6, "{x:?}");
    }

    #[test]
    fn non_finite_system_fails() {
        let mut r = [0.0; SH_COEFFS];
        r[0] = f64::NAN;
        let sys = SplatSystem::from_rows(&[r], &[[1.0; 3]], &[1.0]);
        let mut mask = [false; SH_COEFFS];
        mask[0] = true;
        assert_eq!(ridge_solve_channel(&sys, 1, &mask, 0.0), Err(SingularSystem { channel: 1 }));
    }
}
