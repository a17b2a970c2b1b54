//! Random block tridiagonal matrices, the matrix orthogonal polynomials whose
//! roots approximate their eigenvalues, and the limiting spectral densities.

pub mod ensemble;
pub mod error;
pub mod harness;
pub mod io;
pub mod limit;
pub mod linalg;
pub mod poly;
pub mod quad;

pub use error::{Error, Result};
