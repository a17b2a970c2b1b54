use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use super::rng::{chi_sample, RngSeed, StreamRng};
use crate::error::{Error, Result};
use crate::linalg::SymmetricBanded;

/// Block size `p` and the weights `γ_1, …, γ_p > 0` of the ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct GammaWeights {
    gamma: Vec<f64>,
}

impl GammaWeights {
    pub fn new(gamma: Vec<f64>) -> Result<Self> {
        if gamma.is_empty() {
            return Err(Error::invalid("at least one gamma weight is required"));
        }
        if let Some(bad) = gamma.iter().find(|g| !(**g > 0.0) || !g.is_finite()) {
            return Err(Error::invalid(format!("gamma weights must be positive and finite, got {bad}")));
        }
        Ok(GammaWeights { gamma })
    }

    pub fn p(&self) -> usize {
        self.gamma.len()
    }

    /// `γ_d`, one-based as in the block displays.
    #[inline]
    pub fn g(&self, d: usize) -> f64 {
        self.gamma[d - 1]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.gamma
    }

    /// Checks `n = m p` with `m >= 2`.
    pub fn check_size(&self, n: usize) -> Result<usize> {
        let p = self.p();
        if !n.is_multiple_of(p) {
            return Err(Error::NotDivisible { n, p });
        }
        if n < 2 * p {
            return Err(Error::TooSmall { n, p });
        }
        Ok(n / p)
    }
}

impl TryFrom<Vec<f64>> for GammaWeights {
    type Error = Error;

    fn try_from(gamma: Vec<f64>) -> Result<Self> {
        GammaWeights::new(gamma)
    }
}

impl From<GammaWeights> for Vec<f64> {
    fn from(w: GammaWeights) -> Self {
        w.gamma
    }
}

/// An off-diagonal chi entry of `G`: zero-based position `(row < col)` and
/// its degrees of freedom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiEntry {
    pub row: usize,
    pub col: usize,
    pub dof: f64,
}

/// Off-diagonal chi entries of `G_n^(p)` read block by block from the
/// diagonal blocks `B_i` and the coupling blocks `A_i`, returned in row-major
/// order of the upper triangle (the draw order).
pub fn block_dof_layout(n: usize, w: &GammaWeights) -> Result<Vec<ChiEntry>> {
    let m = w.check_size(n)?;
    let p = w.p();
    let nf = n as f64;
    let mut entries = Vec::with_capacity(n * (2 * p - 1));

    // B_i, local one-based (q, l) with q < l
    for i in 0..m {
        for q in 1..=p {
            for l in q + 1..=p {
                let dof = w.g(l - q) * (nf - (i * p + l) as f64 + 1.0);
                entries.push(ChiEntry { row: i * p + q - 1, col: i * p + l - 1, dof });
            }
        }
    }
    // A_i couples block i - 1 (rows) with block i (columns)
    for i in 1..m {
        for q in 1..=p {
            for l in 1..=p {
                let dof = if l >= q {
                    w.g(p - (l - q)) * (nf - (i * p + q) as f64 + 1.0)
                } else {
                    w.g(p - (q - l)) * (nf - (i * p + l) as f64 + 1.0)
                };
                entries.push(ChiEntry { row: (i - 1) * p + q - 1, col: i * p + l - 1, dof });
            }
        }
    }
    entries.sort_by_key(|e| (e.row, e.col));
    Ok(entries)
}

/// Chi degrees of freedom at one-based position `(r, c)`, `r < c`, of
/// `G_n^(p)`, or `None` where the block pattern has no entry.
///
/// Offsets `d = c − r < p` carry `γ_d (n − c + 1)`; offsets `p <= d < 2p`
/// exist only between adjacent blocks and carry `γ_{2p−d} (n − r − p + 1)`.
pub fn scalar_entry_dof(r: usize, c: usize, n: usize, w: &GammaWeights) -> Option<f64> {
    let p = w.p();
    if r == 0 || r >= c || c > n {
        return None;
    }
    let d = c - r;
    if d < p {
        Some(w.g(d) * (n - c + 1) as f64)
    } else if d < 2 * p && (c - 1) / p == (r - 1) / p + 1 {
        Some(w.g(2 * p - d) * (n + 1 - r - p) as f64)
    } else {
        None
    }
}

/// Supplies the diagonal normals and off-diagonal chi variables of `G`.
pub trait EntrySource {
    fn normal(&mut self) -> f64;
    fn chi(&mut self, dof: f64) -> f64;
}

impl EntrySource for StreamRng {
    fn normal(&mut self) -> f64 {
        StreamRng::normal(self)
    }

    fn chi(&mut self, dof: f64) -> f64 {
        chi_sample(self, dof).expect("layout degrees of freedom are positive")
    }
}

/// Replaces every normal by 0 and every `X_k` by `√k`; turns `G` into `F`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExpectedEntries;

impl EntrySource for ExpectedEntries {
    fn normal(&mut self) -> f64 {
        0.0
    }

    fn chi(&mut self, dof: f64) -> f64 {
        dof.sqrt()
    }
}

/// Assembles `G_n^(p)` with entries from `source`: normals `N_1..N_n` first,
/// then the chi entries in row-major order.
pub fn build_with<S: EntrySource + ?Sized>(n: usize, w: &GammaWeights, source: &mut S) -> Result<SymmetricBanded> {
    let layout = block_dof_layout(n, w)?;
    let mut g = SymmetricBanded::zeros(n, 2 * w.p() - 1);
    for i in 0..n {
        g.set(i, i, source.normal());
    }
    for e in &layout {
        if !(e.dof > 0.0) {
            return Err(Error::invalid(format!(
                "internal: nonpositive degrees of freedom {} at ({}, {})",
                e.dof, e.row, e.col
            )));
        }
        g.set(e.row, e.col, FRAC_1_SQRT_2 * source.chi(e.dof));
    }
    Ok(g)
}

/// Random block matrix `G_n^(p)` for the given seed.
pub fn build_g(n: usize, w: &GammaWeights, seed: RngSeed) -> Result<SymmetricBanded> {
    build_with(n, w, &mut StreamRng::new(seed))
}

/// Deterministic counterpart `F_n^(p)`: `G` with normals set to 0 and each
/// `X_k` replaced by `√k`.
pub fn build_f(n: usize, w: &GammaWeights) -> Result<SymmetricBanded> {
    build_with(n, w, &mut ExpectedEntries)
}

/// Entry `(q, l)` (one-based) of the coupling block `Ã_i`, `i >= 1`.
pub fn tilde_a_entry(i: usize, q: usize, l: usize, w: &GammaWeights) -> f64 {
    let p = w.p();
    let k = ((i - 1) * p + q.max(l)) as f64;
    let d = p - q.abs_diff(l);
    (k * w.g(d)).sqrt() * FRAC_1_SQRT_2
}

/// Entry `(q, l)` (one-based) of the diagonal block `B̃_i`, `i >= 0`.
pub fn tilde_b_entry(i: usize, q: usize, l: usize, w: &GammaWeights) -> f64 {
    if q == l {
        return 0.0;
    }
    let k = (i * w.p() + q.min(l)) as f64;
    (k * w.g(q.abs_diff(l))).sqrt() * FRAC_1_SQRT_2
}

/// Block Jacobi matrix `F̃_n^(p)` with diagonal blocks `B̃_0..B̃_{m−1}` and
/// couplings `Ã_1..Ã_{m−1}`; its spectrum is the root set of `R̃_m`.
pub fn build_f_tilde(n: usize, w: &GammaWeights) -> Result<SymmetricBanded> {
    let m = w.check_size(n)?;
    let p = w.p();
    let mut f = SymmetricBanded::zeros(n, 2 * p - 1);
    for i in 0..m {
        for q in 1..=p {
            for l in q + 1..=p {
                f.set(i * p + q - 1, i * p + l - 1, tilde_b_entry(i, q, l, w));
            }
        }
    }
    for i in 1..m {
        for q in 1..=p {
            for l in 1..=p {
                f.set((i - 1) * p + q - 1, i * p + l - 1, tilde_a_entry(i, q, l, w));
            }
        }
    }
    Ok(f)
}
