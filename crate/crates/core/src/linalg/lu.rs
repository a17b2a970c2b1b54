use super::dense::Matrix;

/// Relative pivot threshold below which a matrix is treated as singular.
pub const SINGULAR_PIVOT_RTOL: f64 = 1e-12;

/// LU factorization with partial pivoting, `P M = L U` packed in one matrix.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
    swaps: usize,
    singular: bool,
}

impl Lu {
    pub fn new(m: &Matrix) -> Self {
        let n = m.dim();
        let threshold = SINGULAR_PIVOT_RTOL * m.inf_norm();
        let mut lu = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;
        let mut singular = n > 0 && threshold == 0.0;

        for k in 0..n {
            let (piv, piv_abs) =
                (k..n)
                    .map(|i| (i, lu[(i, k)].abs()))
                    .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if piv_abs <= threshold {
                singular = true;
                continue;
            }
            if piv != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(piv, j)];
                    lu[(piv, j)] = tmp;
                }
                perm.swap(k, piv);
                swaps += 1;
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        lu[(i, j)] -= f * lu[(k, j)];
                    }
                }
            }
        }
        Lu { lu, perm, swaps, singular }
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    /// `(sign, log|det|)`; a singular factor yields `(0, -inf)`.
    pub fn log_abs_det(&self) -> (i8, f64) {
        if self.singular {
            return (0, f64::NEG_INFINITY);
        }
        let mut sign: i8 = if self.swaps.is_multiple_of(2) { 1 } else { -1 };
        let mut log = 0.0;
        for k in 0..self.lu.dim() {
            let d = self.lu[(k, k)];
            if d < 0.0 {
                sign = -sign;
            }
            log += libm::log(d.abs());
        }
        (sign, log)
    }

    /// Solves `M x = b`. Returns `None` if the factor is singular.
    pub fn solve_vec(&self, b: &[f64]) -> Option<Vec<f64>> {
        if self.singular {
            return None;
        }
        let n = self.lu.dim();
        let mut x: Vec<f64> = self.perm.iter().map(|&i| b[i]).collect();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| self.lu[(i, j)] * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| self.lu[(i, j)] * x[j]).sum();
            x[i] = (x[i] - s) / self.lu[(i, i)];
        }
        Some(x)
    }

    /// Solves `M X = B` column by column.
    pub fn solve(&self, b: &Matrix) -> Option<Matrix> {
        let n = b.dim();
        let cols: Option<Vec<Vec<f64>>> = (0..n).map(|j| self.solve_vec(&b.column(j))).collect();
        let cols = cols?;
        Some(Matrix::from_fn(n, |i, j| cols[j][i]))
    }
}

/// Sign and log-magnitude of the determinant of a square matrix.
///
/// A pivot below `1e-12 · ‖M‖∞` marks the matrix singular and yields
/// `(0, -inf)`.
pub fn log_abs_det(m: &Matrix) -> (i8, f64) {
    Lu::new(m).log_abs_det()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_has_zero_log_det() {
        assert_eq!(log_abs_det(&Matrix::identity(4)), (1, 0.0));
    }

    #[test]
    fn diagonal_product() {
        let m = Matrix::from_rows(&[&[-2.0, 0.0], &[0.0, 3.0]]);
        let (sign, log) = log_abs_det(&m);
        assert_eq!(sign, -1);
        assert_abs_diff_eq!(log, 6f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn rank_one_is_singular() {
        let m = Matrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert_eq!(log_abs_det(&m), (0, f64::NEG_INFINITY));
        assert!(Lu::new(&m).solve_vec(&[1.0, 1.0]).is_none());
    }

    #[test]
    fn permutation_flips_sign() {
        let m = Matrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert_eq!(log_abs_det(&m), (-1, 0.0));
    }

    #[test]
    fn solve_recovers_rhs() {
        let m = Matrix::from_rows(&[&[4.0, 1.0, 0.5], &[1.0, -3.0, 2.0], &[0.0, 2.0, 5.0]]);
        let x = [1.0, -2.0, 0.25];
        let b = m.mul_vec(&x);
        let got = Lu::new(&m).solve_vec(&b).unwrap();
        for (g, e) in got.iter().zip(x) {
            assert_abs_diff_eq!(*g, e, epsilon = 1e-13);
        }
    }
}
