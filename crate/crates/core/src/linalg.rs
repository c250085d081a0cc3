//! Dense symmetric eigen-decomposition (cyclic Jacobi) and helpers.

use nalgebra::{DMatrix, DVector};

use crate::error::{LinkError, Result};

const MAX_SWEEPS: usize = 100;
const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Descending.
    pub values: DVector<f64>,
    /// Orthonormal columns, `vectors.column(i)` pairs with `values[i]`.
    pub vectors: DMatrix<f64>,
}

/// Eigen-decomposition of a real symmetric matrix.
///
/// Eigenvalues are sorted in descending order. Each eigenvector is signed so
/// that its largest-magnitude entry is positive (first such entry on ties).
pub fn eigen_symmetric(m: &DMatrix<f64>) -> Result<SymmetricEigen> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(LinkError::Dimension(format!("expected a square matrix, got {}x{}", n, m.ncols())));
    }
    let scale = m.amax().max(1.0);
    let mut asym = 0.0f64;
    for i in 0..n {
        for j in 0..i {
            asym = asym.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    if asym > SYMMETRY_TOL * scale {
        return Err(LinkError::NotSymmetric(asym));
    }

    let mut a = m.clone();
    // symmetrize exactly so rotations stay consistent
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    let mut v = DMatrix::<f64>::identity(n, n);
    let norm = a.norm();

    let mut converged = norm == 0.0;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let off: f64 = (0..n)
            .flat_map(|i| (0..i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * norm {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut a, &mut v, p, q, c, s);
            }
        }
    }
    if !converged {
        return Err(LinkError::NoConvergence(MAX_SWEEPS));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| a[(i, i)]));
    let mut vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    for mut col in vectors.column_iter_mut() {
        let lead = col.iter().copied().fold(0.0f64, |best, x| if x.abs() > best.abs() { x } else { best });
        if lead < 0.0 {
            col.neg_mut();
        }
    }
    Ok(SymmetricEigen { values, vectors })
}

fn rotate(a: &mut DMatrix<f64>, v: &mut DMatrix<f64>, p: usize, q: usize, c: f64, s: f64) {
    let n = a.nrows();
    for k in 0..n {
        let (akp, akq) = (a[(k, p)], a[(k, q)]);
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let (apk, aqk) = (a[(p, k)], a[(q, k)]);
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for k in 0..n {
        let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// Ratio of largest to smallest absolute eigenvalue; infinite when singular.
pub fn condition_number(m: &DMatrix<f64>) -> Result<f64> {
    let eig = eigen_symmetric(m)?;
    let abs: Vec<f64> = eig.values.iter().map(|x| x.abs()).collect();
    let max = abs.iter().copied().fold(0.0, f64::max);
    let min = abs.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(if min == 0.0 { f64::INFINITY } else { max / min })
}
