use super::dense::{Matrix, SymmetricDense};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigenvalues in ascending order, with eigenvectors as columns when available.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: Option<Matrix>,
}

impl EigenDecomposition {
    /// Unit eigenvector belonging to `values[j]`.
    pub fn vector(&self, j: usize) -> Option<Vec<f64>> {
        self.vectors.as_ref().map(|v| v.column(j))
    }
}

/// Full symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// The result is accepted only if every residual `‖M v − λ v‖` and the
/// orthonormality defect of the eigenvector family stay below
/// `tol · max(1, ‖M‖∞)`.
pub fn eigh_dense(m: &SymmetricDense, tol: f64) -> Result<EigenDecomposition> {
    if !(tol > 0.0) {
        return Err(Error::invalid("eigensolver tolerance must be positive"));
    }
    let n = m.dim();
    let mut a = m.to_matrix();
    let mut v = Matrix::identity(n);
    let frobenius =
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| m.get(i, j).powi(2)).sum::<f64>().sqrt();

    let mut sweeps = 0;
    loop {
        let off: f64 = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * frobenius || off == 0.0 {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence { iterations: sweeps, worst_residual: off });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + libm::hypot(theta, 1.0));
                let c = 1.0 / libm::hypot(t, 1.0);
                let s = t * c;
                rotate(&mut a, &mut v, p, q, c, s);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = Matrix::from_fn(n, |i, j| v[(i, order[j])]);

    let bound = tol * m.inf_norm().max(1.0);
    let worst = worst_residual(m, &values, &vectors);
    if worst > bound {
        return Err(Error::NoConvergence { iterations: sweeps, worst_residual: worst });
    }
    Ok(EigenDecomposition { values, vectors: Some(vectors) })
}

// Similarity by the rotation in plane (p, q); `v` accumulates the columns.
fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let n = a.dim();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

fn worst_residual(m: &SymmetricDense, values: &[f64], vectors: &Matrix) -> f64 {
    let n = m.dim();
    let dense = m.to_matrix();
    let mut worst: f64 = 0.0;
    for (j, &value) in values.iter().enumerate() {
        let col = vectors.column(j);
        let mv = dense.mul_vec(&col);
        let r = mv.iter().zip(&col).map(|(a, b)| (a - value * b).powi(2)).sum::<f64>().sqrt();
        worst = worst.max(r);
        for k in j..n {
            let dot: f64 = col.iter().zip(vectors.column(k)).map(|(a, b)| a * b).sum();
            let target = if j == k { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).abs());
        }
    }
    worst
}

/// `S = M^{-1/2}` for a positive definite `M`, built from its eigendecomposition.
pub fn spd_inv_sqrt(m: &SymmetricDense, tol: f64) -> Result<SymmetricDense> {
    let eig = eigh_dense(m, tol)?;
    let min = eig.values[0];
    if !(min > tol) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
    }
    let v = eig.vectors.expect("dense eigensolver returns vectors");
    let n = m.dim();
    let inv_sqrt: Vec<f64> = eig.values.iter().map(|l| 1.0 / l.sqrt()).collect();
    Ok(SymmetricDense::from_fn(n, |i, j| (0..n).map(|k| v[(i, k)] * inv_sqrt[k] * v[(j, k)]).sum()))
}
