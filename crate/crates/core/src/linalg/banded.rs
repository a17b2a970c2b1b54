use super::dense::{Matrix, SymmetricDense};
use crate::error::{Error, Result};

/// Real symmetric `n × n` matrix with `bandwidth` nonzero super-diagonals.
///
/// `bands[d][i]` holds entry `(i, i + d)`; each band is padded to length `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricBanded {
    dim: usize,
    bandwidth: usize,
    bands: Vec<Vec<f64>>,
}

impl SymmetricBanded {
    pub fn zeros(dim: usize, bandwidth: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        SymmetricBanded { dim, bandwidth, bands: vec![vec![0.0; dim]; bandwidth + 1] }
    }

    /// Tridiagonal matrix from its diagonal and off-diagonal.
    pub fn tridiagonal(diag: &[f64], off: &[f64]) -> Self {
        assert_eq!(off.len() + 1, diag.len());
        let mut m = Self::zeros(diag.len(), 1);
        m.bands[0].copy_from_slice(diag);
        m.bands[1][..off.len()].copy_from_slice(off);
        m
    }

    /// Banded encoding of a dense symmetric matrix with the given bandwidth;
    /// entries outside the band are dropped.
    pub fn from_dense(m: &SymmetricDense, bandwidth: usize) -> Self {
        let n = m.dim();
        let mut b = Self::zeros(n, bandwidth.min(n - 1));
        for d in 0..=b.bandwidth {
            for i in 0..n - d {
                b.bands[d][i] = m.get(i, i + d);
            }
        }
        b
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn band(&self, d: usize) -> &[f64] {
        &self.bands[d][..self.dim - d]
    }

    /// Zero-based entry `(r, c)`; zero outside the band.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (i, j) = if r <= c { (r, c) } else { (c, r) };
        let d = j - i;
        if d > self.bandwidth {
            0.0
        } else {
            self.bands[d][i]
        }
    }

    /// Panics if `(r, c)` lies outside the band.
    pub fn set(&mut self, r: usize, c: usize, value: f64) {
        let (i, j) = if r <= c { (r, c) } else { (c, r) };
        let d = j - i;
        assert!(d <= self.bandwidth, "entry ({r}, {c}) outside bandwidth {}", self.bandwidth);
        self.bands[d][i] = value;
    }

    pub fn to_dense(&self) -> SymmetricDense {
        SymmetricDense::from_fn(self.dim, |i, j| self.get(i, j))
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_fn(self.dim, |i, j| self.get(i, j))
    }

    pub fn inf_norm(&self) -> f64 {
        (0..self.dim)
            .map(|i| {
                let lo = i.saturating_sub(self.bandwidth);
                let hi = (i + self.bandwidth).min(self.dim - 1);
                (lo..=hi).map(|j| self.get(i, j).abs()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn trace(&self) -> f64 {
        self.bands[0].iter().sum()
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for band in &mut out.bands {
            for v in band.iter_mut() {
                *v *= factor;
            }
        }
        out
    }
}

/// All eigenvalues of a symmetric banded matrix, ascending.
///
/// Orthogonal band reduction to tridiagonal form by Givens rotations with
/// bulge chasing, followed by implicit-shift QL. The trace of the result is
/// checked against the input to `tol · max(1, ‖M‖∞) · n`.
pub fn eigh_banded(m: &SymmetricBanded, tol: f64) -> Result<Vec<f64>> {
    if !(tol > 0.0) {
        return Err(Error::invalid("eigensolver tolerance must be positive"));
    }
    let n = m.dim();
    let w = m.bandwidth();
    if w >= n && n > 1 {
        return Err(Error::invalid(format!(
            "bandwidth {w} is not smaller than the dimension {n}; use the dense solver"
        )));
    }

    let (mut diag, mut off) = if w >= 2 {
        BandWork::load(m).reduce()
    } else {
        let diag = m.band(0).to_vec();
        let mut off = vec![0.0; n];
        if w == 1 {
            off[..n - 1].copy_from_slice(m.band(1));
        }
        (diag, off)
    };

    tridiagonal_ql(&mut diag, &mut off)?;
    diag.sort_by(f64::total_cmp);

    let norm = m.inf_norm().max(1.0);
    let drift = (diag.iter().sum::<f64>() - m.trace()).abs();
    if drift > tol * norm * n as f64 {
        return Err(Error::NoConvergence { iterations: 0, worst_residual: drift });
    }
    Ok(diag)
}

/// Lower band storage with one spare diagonal for the bulge.
struct BandWork {
    n: usize,
    w: usize,
    stride: usize,
    a: Vec<f64>,
}

impl BandWork {
    fn load(m: &SymmetricBanded) -> Self {
        let n = m.dim();
        let w = m.bandwidth();
        let stride = w + 2;
        let mut a = vec![0.0; n * stride];
        for d in 0..=w {
            for c in 0..n - d {
                a[c * stride + d] = m.bands[d][c];
            }
        }
        BandWork { n, w, stride, a }
    }

    #[inline]
    fn idx(&self, r: usize, c: usize) -> usize {
        let (r, c) = if r >= c { (r, c) } else { (c, r) };
        debug_assert!(r - c < self.stride);
        c * self.stride + (r - c)
    }

    #[inline]
    fn get(&self, r: usize, c: usize) -> f64 {
        self.a[self.idx(r, c)]
    }

    #[inline]
    fn set(&mut self, r: usize, c: usize, v: f64) {
        let i = self.idx(r, c);
        self.a[i] = v;
    }

    /// Similarity with the Givens rotation in plane `(k, k + 1)` chosen to
    /// annihilate entry `(k + 1, col)` against `(k, col)`.
    fn annihilate(&mut self, k: usize, col: usize) {
        let l = k + 1;
        let x = self.get(k, col);
        let y = self.get(l, col);
        if y == 0.0 {
            return;
        }
        let r = libm::hypot(x, y);
        let (c, s) = (x / r, y / r);
        let reach = self.stride - 1;

        let lo = l.saturating_sub(reach);
        let hi = (k + reach).min(self.n - 1);
        for m in lo..=hi {
            if m == k || m == l {
                continue;
            }
            let a = self.get(k, m);
            let b = self.get(l, m);
            self.set(k, m, c * a + s * b);
            self.set(l, m, -s * a + c * b);
        }
        // The rows just outside the stored window only ever meet zeros there.
        debug_assert!(k < reach || self.get(k, k - reach) == 0.0);
        debug_assert!(l + reach >= self.n || self.get(l, l + reach) == 0.0);

        let akk = self.get(k, k);
        let all = self.get(l, l);
        let akl = self.get(k, l);
        self.set(k, k, c * c * akk + 2.0 * c * s * akl + s * s * all);
        self.set(l, l, s * s * akk - 2.0 * c * s * akl + c * c * all);
        self.set(k, l, c * s * (all - akk) + (c * c - s * s) * akl);
        self.set(k, col, r);
        self.set(l, col, 0.0);
    }

    fn reduce(mut self) -> (Vec<f64>, Vec<f64>) {
        let (n, w) = (self.n, self.w);
        for j in 0..n.saturating_sub(2) {
            for i in (j + 2..=(j + w).min(n - 1)).rev() {
                if self.get(i, j) == 0.0 {
                    continue;
                }
                self.annihilate(i - 1, j);
                // chase the bulge created at (i + w, i - 1) off the bottom
                let mut k = i + w;
                while k < n {
                    self.annihilate(k - 1, k - w - 1);
                    k += w;
                }
            }
        }
        let diag = (0..n).map(|i| self.get(i, i)).collect();
        let mut off: Vec<f64> = (0..n - 1).map(|i| self.get(i + 1, i)).collect();
        off.push(0.0);
        (diag, off)
    }
}

/// Implicit-shift QL on a symmetric tridiagonal matrix, eigenvalues only.
///
/// `off[i]` couples `i` and `i + 1`; `off[n - 1]` is scratch. On return
/// `diag` holds the (unsorted) eigenvalues.
fn tridiagonal_ql(diag: &mut [f64], off: &mut [f64]) -> Result<()> {
    const MAX_ITER: usize = 60;
    let n = diag.len();
    if n <= 1 {
        return Ok(());
    }
    off[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            if iter == MAX_ITER {
                return Err(Error::NoConvergence { iterations: iter, worst_residual: off[l].abs() });
            }
            iter += 1;

            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = libm::hypot(g, 1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * off[i];
                let b = c * off[i];
                r = libm::hypot(f, g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
    Ok(())
}
