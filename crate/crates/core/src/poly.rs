//! Matrix orthogonal polynomials defined by three-term recurrences, the
//! matrix Chebyshev polynomials, and their roots via block Jacobi matrices.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::ensemble::{tilde_a_entry, tilde_b_entry, GammaWeights};
use crate::error::{Error, Result};
use crate::linalg::{eigh_banded, log_abs_det, Lu, Matrix, SymmetricBanded, SymmetricDense};

const ROOT_TOL: f64 = 1e-10;

/// Whether recurrence blocks are taken as displayed or divided by `√n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoeffScale {
    Raw,
    BySqrtN,
}

/// Coefficients of `x R_k = A_{k+1} R_{k+1} + B_k R_k + A_kᵀ R_{k−1}`.
///
/// Holds `A_1..A_m` and `B_0..B_{m−1}`; every `A_i` is nonsingular.
#[derive(Debug, Clone)]
pub struct RecurrenceCoeffs {
    p: usize,
    a: Vec<SymmetricDense>,
    b: Vec<SymmetricDense>,
}

impl RecurrenceCoeffs {
    /// `a = [A_1, …, A_m]`, `b = [B_0, …, B_{m−1}]`.
    pub fn new(a: Vec<SymmetricDense>, b: Vec<SymmetricDense>) -> Result<Self> {
        if a.is_empty() || a.len() != b.len() {
            return Err(Error::invalid(format!("need equally many A and B blocks (got {} and {})", a.len(), b.len())));
        }
        let p = a[0].dim();
        if a.iter().chain(&b).any(|m| m.dim() != p) {
            return Err(Error::invalid("all recurrence blocks must share one dimension"));
        }
        for (i, ai) in a.iter().enumerate() {
            if log_abs_det(&ai.to_matrix()).0 == 0 {
                return Err(Error::Singular { stage: i + 1 });
            }
        }
        Ok(RecurrenceCoeffs { p, a, b })
    }

    /// `m` stages of the constant recurrence `A_i = a`, `B_i = b`.
    pub fn constant(a: SymmetricDense, b: SymmetricDense, m: usize) -> Result<Self> {
        Self::new(vec![a; m], vec![b; m])
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn stages(&self) -> usize {
        self.a.len()
    }

    /// `A_i`, `1 <= i <= stages`.
    pub fn a(&self, i: usize) -> &SymmetricDense {
        &self.a[i - 1]
    }

    /// `B_i`, `0 <= i < stages`.
    pub fn b(&self, i: usize) -> &SymmetricDense {
        &self.b[i]
    }

    /// Block Jacobi matrix with diagonal blocks `B_0..B_{m−1}` and couplings
    /// `A_1..A_{m−1}` above the diagonal.
    pub fn jacobi_matrix(&self, m: usize) -> Result<SymmetricBanded> {
        self.check_degree(m)?;
        let p = self.p;
        let dim = m * p;
        let mut j = SymmetricBanded::zeros(dim, (2 * p - 1).min(dim - 1));
        for k in 0..m {
            for q in 0..p {
                for l in q..p {
                    j.set(k * p + q, k * p + l, self.b[k].get(q, l));
                }
            }
        }
        for k in 1..m {
            let ak = self.a(k).to_matrix();
            for q in 0..p {
                for l in 0..p {
                    j.set((k - 1) * p + q, k * p + l, ak[(q, l)]);
                }
            }
        }
        Ok(j)
    }

    fn check_degree(&self, m: usize) -> Result<()> {
        if m == 0 || m > self.stages() {
            return Err(Error::invalid(format!("degree {m} outside 1..={} available stages", self.stages())));
        }
        Ok(())
    }
}

/// Recurrence coefficients `Ã_i`, `B̃_i` of the block matrices, `m = n/p`
/// stages, optionally divided by `√n`.
pub fn recurrence_coeffs(n: usize, w: &GammaWeights, scale: CoeffScale) -> Result<RecurrenceCoeffs> {
    let m = w.check_size(n)?;
    let p = w.p();
    let factor = match scale {
        CoeffScale::Raw => 1.0,
        CoeffScale::BySqrtN => 1.0 / (n as f64).sqrt(),
    };
    let a = (1..=m).map(|i| SymmetricDense::from_fn(p, |q, l| factor * tilde_a_entry(i, q + 1, l + 1, w))).collect();
    let b = (0..m).map(|i| SymmetricDense::from_fn(p, |q, l| factor * tilde_b_entry(i, q + 1, l + 1, w))).collect();
    RecurrenceCoeffs::new(a, b)
}

/// Value of a matrix polynomial of the given degree at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPolyValue {
    pub degree: usize,
    pub value: Matrix,
}

fn invert_step(a: &Matrix, rhs: &Matrix, stage: usize) -> Result<Matrix> {
    let lu = Lu::new(a);
    lu.solve(rhs).ok_or(Error::Singular { stage })
}

/// `R_m(x)` from `R_{−1} = 0`, `R_0 = I`.
pub fn eval_r(coeffs: &RecurrenceCoeffs, m: usize, x: f64) -> Result<MatrixPolyValue> {
    if m > coeffs.stages() {
        return Err(Error::invalid(format!("degree {m} exceeds {} stages", coeffs.stages())));
    }
    let p = coeffs.p();
    let mut prev = Matrix::zeros(p);
    let mut cur = Matrix::identity(p);
    for k in 0..m {
        let shifted = coeffs.b(k).to_matrix().scale(-1.0).shifted(-x);
        let mut rhs = &shifted * &cur;
        if k > 0 {
            rhs = &rhs - &(&coeffs.a(k).to_matrix().transpose() * &prev);
        }
        let next = invert_step(&coeffs.a(k + 1).to_matrix(), &rhs, k + 1)?;
        prev = std::mem::replace(&mut cur, next);
    }
    Ok(MatrixPolyValue { degree: m, value: cur })
}

/// Matrix Chebyshev polynomial of the first kind `T_n^{A,B}(t)`.
///
/// The first two steps carry the `√2` modification:
/// `t T_0 = √2 A T_1 + B T_0` and `t T_1 = A T_2 + B T_1 + √2 A T_0`.
pub fn cheb_t(a: &SymmetricDense, b: &SymmetricDense, n: usize, t: f64) -> Result<MatrixPolyValue> {
    let p = a.dim();
    let am = a.to_matrix();
    let lu = Lu::new(&am);
    if lu.is_singular() {
        return Err(Error::Singular { stage: 0 });
    }
    let tb = b.to_matrix().scale(-1.0).shifted(-t);
    let mut prev = Matrix::identity(p);
    if n == 0 {
        return Ok(MatrixPolyValue { degree: 0, value: prev });
    }
    let mut cur = lu.solve(&tb).expect("checked nonsingular").scale(1.0 / SQRT_2);
    for k in 1..n {
        let coupling = if k == 1 { SQRT_2 } else { 1.0 };
        let rhs = &(&tb * &cur) - &(&am * &prev).scale(coupling);
        let next = lu.solve(&rhs).expect("checked nonsingular");
        prev = std::mem::replace(&mut cur, next);
    }
    Ok(MatrixPolyValue { degree: n, value: cur })
}

/// Matrix Chebyshev polynomial of the second kind `U_n^{A,B}(t)`,
/// `t U_k = Aᵀ U_{k+1} + B U_k + A U_{k−1}` with `U_{−1} = 0`, `U_0 = I`.
pub fn cheb_u(a: &SymmetricDense, b: &SymmetricDense, n: usize, t: f64) -> Result<MatrixPolyValue> {
    let p = a.dim();
    let am = a.to_matrix();
    let lu = Lu::new(&am.transpose());
    if lu.is_singular() {
        return Err(Error::Singular { stage: 0 });
    }
    let tb = b.to_matrix().scale(-1.0).shifted(-t);
    let mut prev = Matrix::zeros(p);
    let mut cur = Matrix::identity(p);
    for _ in 0..n {
        let rhs = &(&tb * &cur) - &(&am * &prev);
        let next = lu.solve(&rhs).expect("checked nonsingular");
        prev = std::mem::replace(&mut cur, next);
    }
    Ok(MatrixPolyValue { degree: n, value: cur })
}

/// The `m p` roots of `det R_m`, ascending, as the spectrum of the block
/// Jacobi matrix of the first `m` stages. Repeated roots appear repeatedly.
pub fn roots(coeffs: &RecurrenceCoeffs, m: usize) -> Result<Vec<f64>> {
    eigh_banded(&coeffs.jacobi_matrix(m)?, ROOT_TOL)
}

/// `log|det R_m(x)|` at each root minus its maximum over the midpoints
/// between consecutive distinct roots. Exact zeros give `-inf`.
pub fn root_log_det_residuals(coeffs: &RecurrenceCoeffs, m: usize) -> Result<Vec<f64>> {
    let xs = roots(coeffs, m)?;
    let span = (xs[xs.len() - 1] - xs[0]).abs().max(1.0);
    let mut grid: Vec<f64> = xs.windows(2).filter(|w| w[1] - w[0] > 1e-8 * span).map(|w| 0.5 * (w[0] + w[1])).collect();
    if grid.is_empty() {
        grid = vec![xs[0] - span, xs[xs.len() - 1] + span];
    }
    let log_det = |x: f64| -> Result<f64> { Ok(log_abs_det(&eval_r(coeffs, m, x)?.value).1) };
    let reference =
        grid.iter().map(|&x| log_det(x)).collect::<Result<Vec<f64>>>()?.into_iter().fold(f64::NEG_INFINITY, f64::max);
    xs.iter().map(|&x| Ok(log_det(x)? - reference)).collect()
}

/// Both sides of the Markov-type bounds on `vᵀ R_n(z) R_{n+1}(z)^{-1} A_{n+1}^{-1} v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarkovBounds {
    pub lhs: f64,
    /// `vᵀv / dist(z, [−M, M])`.
    pub upper: f64,
    /// True when `|z| > M`, where the strict lower bound applies.
    pub lower_applicable: bool,
    /// `vᵀv / (2|z|)` when applicable.
    pub lower: Option<f64>,
}

impl MarkovBounds {
    /// `lower < lhs <= upper`, with relative slack `rtol` on each side.
    pub fn holds(&self, rtol: f64) -> bool {
        let upper_ok = self.lhs <= self.upper * (1.0 + rtol);
        let lower_ok = self.lower.is_none_or(|lo| lo < self.lhs * (1.0 + rtol));
        upper_ok && lower_ok
    }
}

type Pair = (Matrix, Matrix);

/// Evaluates the bound quantities at complex `z = (re, im)` for a real vector
/// `v`, given that all roots of `R_{n+1}` lie in `[−bound, bound]`.
pub fn markov_bound_check(
    coeffs: &RecurrenceCoeffs,
    n: usize,
    z: (f64, f64),
    v: &[f64],
    bound: f64,
) -> Result<MarkovBounds> {
    let p = coeffs.p();
    if n + 1 > coeffs.stages() {
        return Err(Error::invalid(format!("need {} stages, have {}", n + 1, coeffs.stages())));
    }
    if v.len() != p || v.iter().all(|x| *x == 0.0) {
        return Err(Error::invalid("v must be a nonzero vector of length p"));
    }
    let (re, im) = z;
    if im == 0.0 && re.abs() <= bound {
        return Err(Error::invalid("z must lie outside [-M, M]"));
    }

    // R_k(z) as (real, imaginary) parts
    let mut prev: Pair = (Matrix::zeros(p), Matrix::zeros(p));
    let mut cur: Pair = (Matrix::identity(p), Matrix::zeros(p));
    for k in 0..=n {
        let bk = coeffs.b(k).to_matrix();
        let xb = bk.scale(-1.0).shifted(-re);
        let mut rhs_re = &(&xb * &cur.0) - &cur.1.scale(im);
        let mut rhs_im = &(&xb * &cur.1) + &cur.0.scale(im);
        if k > 0 {
            let akt = coeffs.a(k).to_matrix().transpose();
            rhs_re = &rhs_re - &(&akt * &prev.0);
            rhs_im = &rhs_im - &(&akt * &prev.1);
        }
        let ak1 = coeffs.a(k + 1).to_matrix();
        let next = (invert_step(&ak1, &rhs_re, k + 1)?, invert_step(&ak1, &rhs_im, k + 1)?);
        prev = std::mem::replace(&mut cur, next);
    }
    let (rn, rn1) = (prev, cur);

    let a_inv_v = Lu::new(&coeffs.a(n + 1).to_matrix()).solve_vec(v).ok_or(Error::Singular { stage: n + 1 })?;
    // realified complex system R_{n+1}(z) w = A^{-1} v
    let big = Matrix::from_fn(2 * p, |i, j| match (i < p, j < p) {
        (true, true) => rn1.0[(i, j)],
        (true, false) => -rn1.1[(i, j - p)],
        (false, true) => rn1.1[(i - p, j)],
        (false, false) => rn1.0[(i - p, j - p)],
    });
    let mut rhs = a_inv_v;
    rhs.extend(std::iter::repeat_n(0.0, p));
    let sol = Lu::new(&big).solve_vec(&rhs).ok_or(Error::Singular { stage: n + 1 })?;
    let (w_re, w_im) = sol.split_at(p);

    let dot = |m: &Matrix, x: &[f64]| -> f64 { v.iter().zip(m.mul_vec(x)).map(|(a, b)| a * b).sum() };
    let val_re = dot(&rn.0, w_re) - dot(&rn.1, w_im);
    let val_im = dot(&rn.0, w_im) + dot(&rn.1, w_re);
    let lhs = libm::hypot(val_re, val_im);

    let vtv: f64 = v.iter().map(|x| x * x).sum();
    let dist = if re.abs() <= bound { im.abs() } else { libm::hypot(re.abs() - bound, im) };
    let modulus = libm::hypot(re, im);
    let lower_applicable = modulus > bound;
    Ok(MarkovBounds {
        lhs,
        upper: vtv / dist,
        lower_applicable,
        lower: lower_applicable.then(|| vtv / (2.0 * modulus)),
    })
}
