//! C interface to `blockspec`.
//!
//! Every function returns a [`BlockspecStatus`]; on failure a message is kept
//! per thread and read with [`blockspec_last_error_message`]. Objects cross
//! the boundary as opaque pointers that must be released with the matching
//! `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use blockspec::ensemble::{build_g, EmpiricalSpectrum, GammaWeights, RngSeed};
use blockspec::harness::deterministic_spectrum;
use blockspec::limit::{density_grid, limit_density, LimitModel, SpectralDensity};
use blockspec::linalg::eigh_banded;
use blockspec::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockspecStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    BufferTooSmall = 3,
    Numerical = 4,
    Panic = 5,
}

/// Limit model for one set of gamma weights.
pub struct BlockspecModel {
    inner: LimitModel,
}

/// Tabulated limit density and CDF.
pub struct BlockspecDensityGrid {
    inner: SpectralDensity,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Failure {
    Lib(Error),
    Null(&'static str),
    Short { needed: usize, got: usize },
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> BlockspecStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BlockspecStatus::Ok,
        Ok(Err(Failure::Lib(e))) => {
            let status = if e.is_validation() { BlockspecStatus::InvalidArgument } else { BlockspecStatus::Numerical };
            set_error(e.to_string());
            status
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("{what} must not be NULL"));
            BlockspecStatus::NullPointer
        }
        Ok(Err(Failure::Short { needed, got })) => {
            set_error(format!("output buffer holds {got} values but {needed} are needed"));
            BlockspecStatus::BufferTooSmall
        }
        Err(_) => {
            set_error("internal panic".into());
            BlockspecStatus::Panic
        }
    }
}

unsafe fn weights(gamma: *const f64, p: usize) -> Result<GammaWeights, Failure> {
    if gamma.is_null() {
        return Err(Failure::Null("gamma"));
    }
    let slice = std::slice::from_raw_parts(gamma, p);
    Ok(GammaWeights::new(slice.to_vec())?)
}

unsafe fn copy_out(values: &[f64], out: *mut f64, out_len: usize) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    if out_len < values.len() {
        return Err(Failure::Short { needed: values.len(), got: out_len });
    }
    ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    Ok(())
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn blockspec_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `gamma` must point to `p` doubles and `out` to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn blockspec_model_new(
    gamma: *const f64,
    p: usize,
    out: *mut *mut BlockspecModel,
) -> BlockspecStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let inner = LimitModel::new(weights(gamma, p)?)?;
        *out = Box::into_raw(Box::new(BlockspecModel { inner }));
        Ok(())
    })
}

/// # Safety
/// `model` must come from `blockspec_model_new` and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn blockspec_model_free(model: *mut BlockspecModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must be a live model handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn blockspec_model_support_bound(model: *const BlockspecModel, out: *mut f64) -> BlockspecStatus {
    guard(|| {
        let model = model.as_ref().ok_or(Failure::Null("model"))?;
        let out = out.as_mut().ok_or(Failure::Null("out"))?;
        *out = model.inner.support_bound();
        Ok(())
    })
}

/// Limit density at `t`, to absolute tolerance `quad_tol`.
///
/// # Safety
/// `model` must be a live model handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn blockspec_limit_density(
    model: *const BlockspecModel,
    t: f64,
    quad_tol: f64,
    out: *mut f64,
) -> BlockspecStatus {
    guard(|| {
        let model = model.as_ref().ok_or(Failure::Null("model"))?;
        let out = out.as_mut().ok_or(Failure::Null("out"))?;
        *out = limit_density(&model.inner, t, quad_tol)?;
        Ok(())
    })
}

/// Tabulates the density at `grid_size + 1` points.
///
/// # Safety
/// `model` must be a live model handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn blockspec_density_grid_new(
    model: *const BlockspecModel,
    grid_size: usize,
    quad_tol: f64,
    out: *mut *mut BlockspecDensityGrid,
) -> BlockspecStatus {
    guard(|| {
        let model = model.as_ref().ok_or(Failure::Null("model"))?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let inner = density_grid(&model.inner, grid_size, quad_tol)?;
        *out = Box::into_raw(Box::new(BlockspecDensityGrid { inner }));
        Ok(())
    })
}

/// Number of grid points, or 0 for NULL.
///
/// # Safety
/// `grid` must be NULL or a live grid handle.
#[no_mangle]
pub unsafe extern "C" fn blockspec_density_grid_len(grid: *const BlockspecDensityGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.inner.grid.len())
}

/// Copies the grid, density and CDF columns; any output may be NULL to skip it.
///
/// # Safety
/// `grid` must be a live grid handle; non-NULL outputs must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn blockspec_density_grid_copy(
    grid: *const BlockspecDensityGrid,
    t: *mut f64,
    density: *mut f64,
    cdf: *mut f64,
    len: usize,
) -> BlockspecStatus {
    guard(|| {
        let g = &grid.as_ref().ok_or(Failure::Null("grid"))?.inner;
        for (col, out) in [(&g.grid, t), (&g.density, density), (&g.cdf, cdf)] {
            if !out.is_null() {
                copy_out(col, out, len)?;
            }
        }
        Ok(())
    })
}

/// # Safety
/// `grid` must come from `blockspec_density_grid_new` and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn blockspec_density_grid_free(grid: *mut BlockspecDensityGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Ascending eigenvalues of one draw of `G` (divided by `sqrt(n)` when
/// `scaled`), seeded by `(master_seed, stream)`.
///
/// # Safety
/// `gamma` must point to `p` doubles and `out` to `out_len >= n` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn blockspec_sample_spectrum(
    n: usize,
    gamma: *const f64,
    p: usize,
    master_seed: u64,
    stream: u64,
    scaled: bool,
    out: *mut f64,
    out_len: usize,
) -> BlockspecStatus {
    guard(|| {
        let w = weights(gamma, p)?;
        let seed = RngSeed::new(master_seed, stream);
        let values = eigh_banded(&build_g(n, &w, seed)?, 1e-10)?;
        let spec = EmpiricalSpectrum::new(n, w, Some(seed), false, values)?;
        let spec = if scaled { spec.to_scaled() } else { spec };
        copy_out(&spec.values, out, out_len)
    })
}

/// Ascending roots of the last matrix polynomial, i.e. the spectrum of the
/// deterministic block matrix.
///
/// # Safety
/// `gamma` must point to `p` doubles and `out` to `out_len >= n` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn blockspec_roots(
    n: usize,
    gamma: *const f64,
    p: usize,
    scaled: bool,
    out: *mut f64,
    out_len: usize,
) -> BlockspecStatus {
    guard(|| {
        let w = weights(gamma, p)?;
        copy_out(&deterministic_spectrum(n, &w, scaled)?.values, out, out_len)
    })
}
