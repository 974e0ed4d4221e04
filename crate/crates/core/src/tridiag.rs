//! Eigen-decomposition of real symmetric tridiagonal matrices by the implicit
//! shift QL algorithm (the EISPACK `tql2` / Numerical Recipes `tqli` scheme).
//!
//! Gauss rules only need the first component of every eigenvector, so the
//! rotations can be accumulated into a single row instead of the full
//! orthogonal matrix; that keeps Golub-Welsch at `O(m²)`.

use alloc::vec;
use alloc::vec::Vec;

/// Sweeps allowed per eigenvalue before giving up.
pub const MAX_ITERATIONS: usize = 50;

/// Relative size below which an off-diagonal entry is treated as zero.
pub const DEFLATION_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EigenError {
    #[error("off-diagonal length {offdiag} does not match diagonal length {diag} - 1")]
    ShapeMismatch { diag: usize, offdiag: usize },
    #[error("QL iteration did not converge for eigenvalue {index} after {iterations} sweeps")]
    NoConvergence { index: usize, iterations: usize },
    #[error("matrix contains non-finite entries")]
    NonFinite,
}

/// Eigenvalues in ascending order with the matching first eigenvector
/// components (sign normalized to be nonnegative).
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagEigen {
    pub values: Vec<f64>,
    pub first_components: Vec<f64>,
}

/// Eigenvalues and first eigenvector components.
pub fn symmetric_tridiagonal_eigen(
    diag: &[f64],
    offdiag: &[f64],
) -> Result<TridiagEigen, EigenError> {
    let (values, rows) = ql_implicit(diag, offdiag, 1)?;
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    Ok(TridiagEigen {
        values: order.iter().map(|&i| values[i]).collect(),
        first_components: order.iter().map(|&i| libm::fabs(rows[i])).collect(),
    })
}

/// Ascending eigenvalues and the full set of orthonormal eigenvectors,
/// returned as columns (`vectors[k]` belongs to `values[k]`).
pub fn symmetric_tridiagonal_eigenvectors(
    diag: &[f64],
    offdiag: &[f64],
) -> Result<(Vec<f64>, Vec<Vec<f64>>), EigenError> {
    let n = diag.len();
    let (values, z) = ql_implicit(diag, offdiag, n)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let vectors = order
        .iter()
        .map(|&col| (0..n).map(|row| z[row * n + col]).collect())
        .collect();
    Ok((order.iter().map(|&i| values[i]).collect(), vectors))
}

/// Core QL sweep. `rows` is how many leading rows of the eigenvector matrix
/// to accumulate (1 for Golub-Welsch, n for the full basis). Returns the
/// unsorted eigenvalues and the accumulated rows, row-major.
fn ql_implicit(
    diag: &[f64],
    offdiag: &[f64],
    rows: usize,
) -> Result<(Vec<f64>, Vec<f64>), EigenError> {
    let n = diag.len();
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    if offdiag.len() + 1 != n {
        return Err(EigenError::ShapeMismatch {
            diag: n,
            offdiag: offdiag.len(),
        });
    }
    if diag.iter().chain(offdiag).any(|v| !v.is_finite()) {
        return Err(EigenError::NonFinite);
    }

    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(offdiag);
    let mut z = vec![0.0; rows * n];
    for r in 0..rows {
        z[r * n + r] = 1.0;
    }

    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = libm::fabs(d[m]) + libm::fabs(d[m + 1]);
                let em = libm::fabs(e[m]);
                if em <= DEFLATION_TOL * dd || em < f64::MIN_POSITIVE {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            if iterations == MAX_ITERATIONS {
                return Err(EigenError::NoConvergence {
                    index: l,
                    iterations,
                });
            }
            iterations += 1;

            // Wilkinson-style shift from the leading 2x2 block
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = libm::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + libm::copysign(r, g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = libm::hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for row in 0..rows {
                    let base = row * n;
                    let f = z[base + i + 1];
                    z[base + i + 1] = s * z[base + i] + c * f;
                    z[base + i] = c * z[base + i] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok((d, z))
}
