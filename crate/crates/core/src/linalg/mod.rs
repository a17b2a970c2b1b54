//! Real symmetric linear algebra: small dense eigenproblems, banded spectra,
//! SPD matrix functions and determinants.

mod banded;
mod dense;
mod eigen;
mod lu;

pub use banded::{eigh_banded, SymmetricBanded};
pub use dense::{Matrix, SymmetricDense};
pub use eigen::{eigh_dense, spd_inv_sqrt, EigenDecomposition};
pub use lu::{log_abs_det, Lu, SINGULAR_PIVOT_RTOL};
