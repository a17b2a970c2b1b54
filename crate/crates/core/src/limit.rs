//! Limiting spectral density of the scaled block ensembles, computed as an
//! integral over `s ∈ (0, 1/p]` of trace densities of `A(s)`, `B(s)`, plus
//! closed-form densities for `p = 1` and `p = 2`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::GammaWeights;
use crate::error::{Error, Result};
use crate::io::{fmt_f64, parse_f64};
use crate::linalg::{eigh_dense, log_abs_det, spd_inv_sqrt, SymmetricDense};
use crate::quad::integrate_panels;

const EIG_TOL: f64 = 1e-10;

/// `A(s) = √(sp)·A0`, `B(s) = √(sp)·B0` with
/// `A0 = [√γ_{p−|i−j|}]/√2` and `B0 = [√γ_{|i−j|}]/√2` (zero diagonal).
#[derive(Debug, Clone, PartialEq)]
pub struct LimitModel {
    weights: GammaWeights,
    a0: SymmetricDense,
    b0: SymmetricDense,
}

impl LimitModel {
    /// Fails when `A0` is singular.
    pub fn new(weights: GammaWeights) -> Result<Self> {
        let p = weights.p();
        let a0 = SymmetricDense::from_fn(p, |i, j| FRAC_1_SQRT_2 * weights.g(p - (i - j)).sqrt());
        let b0 = SymmetricDense::from_fn(p, |i, j| if i == j { 0.0 } else { FRAC_1_SQRT_2 * weights.g(i - j).sqrt() });
        if log_abs_det(&a0.to_matrix()).0 == 0 {
            return Err(Error::invalid(format!("gamma weights {:?} make A0 singular", weights.as_slice())));
        }
        Ok(LimitModel { weights, a0, b0 })
    }

    pub fn p(&self) -> usize {
        self.weights.p()
    }

    pub fn weights(&self) -> &GammaWeights {
        &self.weights
    }

    pub fn a0(&self) -> &SymmetricDense {
        &self.a0
    }

    pub fn b0(&self) -> &SymmetricDense {
        &self.b0
    }

    /// Row-sum bound `‖B0‖∞ + 2‖A0‖∞` on the support of the limit law.
    pub fn support_bound(&self) -> f64 {
        self.b0.inf_norm() + 2.0 * self.a0.inf_norm()
    }

    fn prepared(&self) -> Result<Prepared> {
        let s = spd_inv_sqrt(&self.a0, EIG_TOL).map_err(|e| match e {
            Error::NotPositiveDefinite { min_eigenvalue } => Error::IndefiniteModel { min_eigenvalue },
            other => other,
        })?;
        let sm = s.to_matrix();
        let kink_taus = |sign: f64| -> Result<Vec<f64>> {
            let m = SymmetricDense::from_fn(self.p(), |i, j| self.b0.get(i, j) + sign * 2.0 * self.a0.get(i, j));
            Ok(eigh_dense(&m, EIG_TOL)?.values)
        };
        let mut kinks = kink_taus(-1.0)?;
        kinks.extend(kink_taus(1.0)?);
        Ok(Prepared {
            p: self.p(),
            c: self.b0.congruence(&sm),
            d: SymmetricDense::identity(self.p()).congruence(&sm),
            kinks,
        })
    }
}

/// `W_s(t) = C − τD` with `C = A0^{-1/2} B0 A0^{-1/2}`, `D = A0^{-1}` and
/// `τ = t/√(sp)`; eigenvalue ±2 is reached where `τ` is an eigenvalue of
/// `B0 ∓ 2A0`.
struct Prepared {
    p: usize,
    c: SymmetricDense,
    d: SymmetricDense,
    kinks: Vec<f64>,
}

impl Prepared {
    fn integrand(&self, s: f64, t: f64) -> Result<f64> {
        let root = (s * self.p as f64).sqrt();
        let tau = t / root;
        let w = SymmetricDense::from_fn(self.p, |i, j| self.c.get(i, j) - tau * self.d.get(i, j));
        let eig = eigh_dense(&w, EIG_TOL)?;
        let mut acc = 0.0;
        for (j, &lambda) in eig.values.iter().enumerate() {
            if lambda.abs() < 2.0 {
                let u = eig.vector(j).expect("dense eigensolver returns vectors");
                acc += self.d.quadratic_form(&u) / (PI * (4.0 - lambda * lambda).sqrt());
            }
        }
        Ok(acc / root)
    }

    /// Panel boundaries in `s`, at every `s` where some eigenvalue crosses ±2.
    fn breakpoints(&self, t: f64) -> Vec<f64> {
        let top = 1.0 / self.p as f64;
        let mut pts = vec![0.0];
        if t != 0.0 {
            pts.extend(
                self.kinks
                    .iter()
                    .filter(|&&tau| tau * t > 0.0 && tau * tau > t * t)
                    .map(|&tau| t * t / (self.p as f64 * tau * tau))
                    .filter(|&s| s > 0.0 && s < top),
            );
        }
        pts.push(top);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    fn density(&self, t: f64, quad_tol: f64) -> Result<f64> {
        let mut failure = None;
        let est = integrate_panels(
            |s| match self.integrand(s, t) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            },
            &self.breakpoints(t),
            quad_tol,
        )?;
        match failure {
            Some(e) => Err(e),
            None => Ok(est.value.max(0.0)),
        }
    }
}

/// `(A(s), B(s))`, requiring `s > 0`.
pub fn build_ab(model: &LimitModel, s: f64) -> Result<(SymmetricDense, SymmetricDense)> {
    if !(s > 0.0) {
        return Err(Error::invalid(format!("s must be positive, got {s}")));
    }
    let root = (s * model.p() as f64).sqrt();
    Ok((model.a0.scale(root), model.b0.scale(root)))
}

/// One eigenvalue of `W(t) = A^{-1/2}(B − tI)A^{-1/2}` with `uᵀA^{-1}u`
/// for its unit eigenvector `u`, which equals `−dλ/dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaPoint {
    pub lambda: f64,
    pub weight: f64,
}

pub fn lambda_and_weights(a: &SymmetricDense, b: &SymmetricDense, t: f64, tol: f64) -> Result<Vec<LambdaPoint>> {
    if a.dim() != b.dim() {
        return Err(Error::invalid("A and B must have the same dimension"));
    }
    let s = spd_inv_sqrt(a, tol)?;
    let w = b.shifted(t).congruence(&s.to_matrix());
    let eig = eigh_dense(&w, tol)?;
    let sm = s.to_matrix();
    Ok(eig
        .values
        .iter()
        .enumerate()
        .map(|(j, &lambda)| {
            let su = sm.mul_vec(&eig.vector(j).expect("dense eigensolver returns vectors"));
            LambdaPoint { lambda, weight: su.iter().map(|x| x * x).sum() }
        })
        .collect())
}

/// `Σ_j w_j / (π√(4 − λ_j²))` over eigenvalues with `|λ_j| < 2`.
pub fn trace_density(a: &SymmetricDense, b: &SymmetricDense, t: f64) -> Result<f64> {
    Ok(lambda_and_weights(a, b, t, EIG_TOL)?
        .iter()
        .filter(|p| p.lambda.abs() < 2.0)
        .map(|p| p.weight / (PI * (4.0 - p.lambda * p.lambda).sqrt()))
        .sum())
}

/// Limit density at `t`: `∫_0^{1/p} trace_density(A(s), B(s), t) ds` to
/// absolute tolerance `quad_tol`. Needs `A0` positive definite.
pub fn limit_density(model: &LimitModel, t: f64, quad_tol: f64) -> Result<f64> {
    if !(quad_tol > 0.0) {
        return Err(Error::invalid(format!("quad_tol must be positive, got {quad_tol}")));
    }
    model.prepared()?.density(t, quad_tol)
}

/// Semicircle `√(2γ − x²)/(πγ)` on `|x| < √(2γ)`.
pub fn semicircle_density(gamma1: f64, x: f64) -> Result<f64> {
    if !(gamma1 > 0.0) {
        return Err(Error::invalid(format!("gamma_1 must be positive, got {gamma1}")));
    }
    let r2 = 2.0 * gamma1 - x * x;
    Ok(if r2 > 0.0 { r2.sqrt() / (PI * gamma1) } else { 0.0 })
}

/// The `p = 2` density as a mixture over `s ∈ (0, 1/2]` of arcsine laws
/// centred at `±√(sγ_1)` with half-widths `2√s(√γ_2 ± √γ_1)`.
pub fn arcsine_mixture_density(gamma1: f64, gamma2: f64, x: f64, quad_tol: f64) -> Result<f64> {
    if !(gamma1 > 0.0 && gamma2 > 0.0) {
        return Err(Error::invalid("gamma weights must be positive"));
    }
    if gamma1 == gamma2 {
        return Err(Error::invalid("gamma_1 = gamma_2 makes the two-block model degenerate"));
    }
    if !(quad_tol > 0.0) {
        return Err(Error::invalid(format!("quad_tol must be positive, got {quad_tol}")));
    }
    let (r1, r2) = (gamma1.sqrt(), gamma2.sqrt());
    // α_j(s) = a_j √s, β_j(s) = b_j √s
    let branches = [(r2 + r1, r1), ((r2 - r1).abs(), -r1)];
    let top = 0.5;
    let mut total = 0.0;
    for (a, b) in branches {
        let mut pts = vec![0.0, top];
        for denom in [b + 2.0 * a, b - 2.0 * a] {
            if denom != 0.0 {
                let r = x / denom;
                if r > 0.0 && r * r < top {
                    pts.push(r * r);
                }
            }
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let f = |s: f64| {
            let root = s.sqrt();
            let gap = 4.0 * a * a * s - (x - b * root).powi(2);
            if gap > 0.0 {
                1.0 / (PI * gap.sqrt())
            } else {
                0.0
            }
        };
        total += integrate_panels(f, &pts, 0.5 * quad_tol)?.value;
    }
    Ok(total)
}

/// Limit density tabulated on an equispaced grid with its trapezoidal CDF.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDensity {
    pub weights: GammaWeights,
    pub quad_tol: f64,
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    /// Trapezoidal CDF divided by `raw_mass`, so that it ends at 1.
    pub cdf: Vec<f64>,
    /// Trapezoidal integral of `density` before normalization.
    pub raw_mass: f64,
}

/// JSON sidecar written next to a density CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityMeta {
    pub p: usize,
    pub gamma: Vec<f64>,
    pub grid_size: usize,
    pub quad_tol: f64,
    pub support: [f64; 2],
    pub raw_mass: f64,
}

impl SpectralDensity {
    pub fn support(&self) -> [f64; 2] {
        [self.grid[0], self.grid[self.grid.len() - 1]]
    }

    /// CDF at `t` by linear interpolation, 0 left and 1 right of the grid.
    pub fn cdf_at(&self, t: f64) -> f64 {
        let g = &self.grid;
        if t <= g[0] {
            return 0.0;
        }
        if t >= g[g.len() - 1] {
            return 1.0;
        }
        let k = g.partition_point(|&x| x <= t) - 1;
        let frac = (t - g[k]) / (g[k + 1] - g[k]);
        self.cdf[k] + frac * (self.cdf[k + 1] - self.cdf[k])
    }

    pub fn meta(&self) -> DensityMeta {
        DensityMeta {
            p: self.weights.p(),
            gamma: self.weights.as_slice().to_vec(),
            grid_size: self.grid.len() - 1,
            quad_tol: self.quad_tol,
            support: self.support(),
            raw_mass: self.raw_mass,
        }
    }

    /// CSV with header `t,density,cdf`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,density,cdf\n");
        for ((t, f), c) in self.grid.iter().zip(&self.density).zip(&self.cdf) {
            out.push_str(&format!("{},{},{}\n", fmt_f64(*t), fmt_f64(*f), fmt_f64(*c)));
        }
        out
    }

    pub fn meta_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.meta()).expect("metadata serializes");
        s.push('\n');
        s
    }

    /// Reads back a CSV body and sidecar written by [`to_csv`](Self::to_csv)
    /// and [`meta_json`](Self::meta_json).
    pub fn from_csv(csv: &str, meta_json: &str) -> Result<Self> {
        let meta: DensityMeta =
            serde_json::from_str(meta_json).map_err(|e| Error::Parse(format!("density sidecar: {e}")))?;
        let mut lines = csv.lines();
        match lines.next() {
            Some("t,density,cdf") => {}
            other => return Err(Error::Parse(format!("unexpected density header {other:?}"))),
        }
        let (mut grid, mut density, mut cdf) = (Vec::new(), Vec::new(), Vec::new());
        for line in lines.filter(|l| !l.is_empty()) {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 3 {
                return Err(Error::Parse(format!("malformed row {line:?}")));
            }
            grid.push(parse_f64(cols[0])?);
            density.push(parse_f64(cols[1])?);
            cdf.push(parse_f64(cols[2])?);
        }
        let weights = GammaWeights::new(meta.gamma)?;
        if weights.p() != meta.p || grid.len() != meta.grid_size + 1 {
            return Err(Error::Parse("density sidecar does not match the CSV body".into()));
        }
        Ok(SpectralDensity { weights, quad_tol: meta.quad_tol, grid, density, cdf, raw_mass: meta.raw_mass })
    }
}

/// Tabulates the limit density at `grid_size + 1` equispaced points of
/// `[−M*, M*]`, `M* = support_bound()`. Grid points are evaluated in parallel.
pub fn density_grid(model: &LimitModel, grid_size: usize, quad_tol: f64) -> Result<SpectralDensity> {
    if grid_size < 100 {
        return Err(Error::invalid(format!("grid size must be at least 100, got {grid_size}")));
    }
    if !(quad_tol > 0.0) {
        return Err(Error::invalid(format!("quad_tol must be positive, got {quad_tol}")));
    }
    let prepared = model.prepared()?;
    let bound = model.support_bound();
    let h = 2.0 * bound / grid_size as f64;
    let grid: Vec<f64> = (0..=grid_size).map(|i| -bound + h * i as f64).collect();
    let density = grid.par_iter().map(|&t| prepared.density(t, quad_tol)).collect::<Result<Vec<f64>>>()?;
    SpectralDensity::from_values(model.weights.clone(), quad_tol, grid, density)
}

impl SpectralDensity {
    /// Builds the trapezoidal CDF for density values on an equispaced grid.
    /// Fails when the mass is more than 1% away from 1.
    pub fn from_values(weights: GammaWeights, quad_tol: f64, grid: Vec<f64>, density: Vec<f64>) -> Result<Self> {
        if grid.len() < 2 || grid.len() != density.len() {
            return Err(Error::invalid("density needs matching grid and value arrays of length >= 2"));
        }
        let mut cdf = Vec::with_capacity(density.len());
        let mut acc = 0.0;
        cdf.push(0.0);
        for (t, f) in grid.windows(2).zip(density.windows(2)) {
            acc += 0.5 * (t[1] - t[0]) * (f[0] + f[1]);
            cdf.push(acc);
        }
        let raw_mass = acc;
        if !((raw_mass - 1.0).abs() <= 0.01) {
            return Err(Error::Normalization(format!(
                "tabulated density integrates to {raw_mass}, more than 1% away from 1"
            )));
        }
        cdf.iter_mut().for_each(|c| *c /= raw_mass);
        Ok(SpectralDensity { weights, quad_tol, grid, density, cdf, raw_mass })
    }
}
