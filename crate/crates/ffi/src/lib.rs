//! C ABI over the core library: opaque handles, integer status codes and
//! caller-owned output buffers. Every entry point is panic-safe.

use bergkit::bergman::{default_model, BergmanModel};
use bergkit::equilibrium::RadialOracle;
use bergkit::point::Point;
use bergkit::stochastic::sample_dpp;
use bergkit::weights::Weight;
use bergkit::Error;
use libc::{c_char, c_int};
use num_complex::Complex64;
use std::ffi::CStr;
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Success.
pub const BK_OK: c_int = 0;
/// Invalid argument: null pointer, unknown family, bad parameters.
pub const BK_ERR_ARGUMENT: c_int = 1;
/// Numerical refusal: conditioning, truncation or sampling failure.
pub const BK_ERR_NUMERICAL: c_int = 2;
/// Operation not available for this weight (no envelope path, wrong n).
pub const BK_ERR_UNSUPPORTED: c_int = 3;
/// Output buffer too small.
pub const BK_ERR_BUFFER: c_int = 4;
/// Panic caught at the boundary; state may be inconsistent.
pub const BK_ERR_INTERNAL: c_int = 5;

/// Opaque weight handle.
pub struct BkWeight(Weight);
/// Opaque Bergman model handle.
pub struct BkModel(BergmanModel);
/// Opaque equilibrium-potential oracle handle.
pub struct BkOracle(RadialOracle);

fn status_of(e: &Error) -> c_int {
    match e {
        Error::UnknownFamily(_) | Error::InvalidParams { .. } | Error::Config(_) => BK_ERR_ARGUMENT,
        Error::NoEnvelopePath | Error::NotInterior | Error::ZeroCoordinate => BK_ERR_UNSUPPORTED,
        _ => BK_ERR_NUMERICAL,
    }
}

fn guarded<F: FnOnce() -> c_int>(f: F) -> c_int {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(BK_ERR_INTERNAL)
}

/// Packs an interleaved (re, im, re, im, ...) coordinate buffer into a
/// point; `len` counts doubles and must be 2n for the weight's n.
unsafe fn point_from(coords: *const f64, len: usize, n: usize) -> Option<Point> {
    if coords.is_null() || len != 2 * n {
        return None;
    }
    let s = std::slice::from_raw_parts(coords, len);
    let zs: Vec<Complex64> = s.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
    Some(Point::from_slice(&zs))
}

/// Builds a builtin weight. `params` may be null when `n_params` is 0.
///
/// # Safety
/// `name` must be a nul-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bk_weight_builtin(
    name: *const c_char,
    params: *const f64,
    n_params: usize,
    n: usize,
    out: *mut *mut BkWeight,
) -> c_int {
    guarded(|| {
        if name.is_null() || out.is_null() || (params.is_null() && n_params > 0) {
            return BK_ERR_ARGUMENT;
        }
        let Ok(name) = CStr::from_ptr(name).to_str() else {
            return BK_ERR_ARGUMENT;
        };
        let params = if n_params == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(params, n_params)
        };
        match Weight::make_builtin_n(name, params, n) {
            Ok(w) => {
                *out = Box::into_raw(Box::new(BkWeight(w)));
                BK_OK
            }
            Err(e) => status_of(&e),
        }
    })
}

/// # Safety
/// `w` must come from `bk_weight_builtin` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn bk_weight_free(w: *mut BkWeight) {
    if !w.is_null() {
        drop(Box::from_raw(w));
    }
}

/// Builds the degree-k model with an automatically sized rule.
///
/// # Safety
/// `w` must be a live weight handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bk_model_build(
    w: *const BkWeight,
    k: u32,
    out: *mut *mut BkModel,
) -> c_int {
    guarded(|| {
        if w.is_null() || out.is_null() || k == 0 {
            return BK_ERR_ARGUMENT;
        }
        match default_model(&(*w).0, k) {
            Ok(m) => {
                *out = Box::into_raw(Box::new(BkModel(m)));
                BK_OK
            }
            Err(e) => status_of(&e),
        }
    })
}

/// # Safety
/// `m` must come from `bk_model_build` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn bk_model_free(m: *mut BkModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// dim H_k; 0 on a null handle.
///
/// # Safety
/// `m` must be a live model handle or null.
#[no_mangle]
pub unsafe extern "C" fn bk_model_dim(m: *const BkModel) -> usize {
    if m.is_null() {
        0
    } else {
        (*m).0.dim()
    }
}

/// B_k(z) at interleaved coordinates (2n doubles).
///
/// # Safety
/// `m` live handle; `coords` holds `len` doubles; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn bk_model_bergman(
    m: *const BkModel,
    coords: *const f64,
    len: usize,
    out: *mut f64,
) -> c_int {
    guarded(|| {
        if m.is_null() || out.is_null() {
            return BK_ERR_ARGUMENT;
        }
        let model = &(*m).0;
        let Some(z) = point_from(coords, len, model.basis().n) else {
            return BK_ERR_ARGUMENT;
        };
        *out = model.bergman_function(&z);
        BK_OK
    })
}

/// k^{-1} ln K_k(z, z) at interleaved coordinates.
///
/// # Safety
/// As `bk_model_bergman`.
#[no_mangle]
pub unsafe extern "C" fn bk_model_log_potential(
    m: *const BkModel,
    coords: *const f64,
    len: usize,
    out: *mut f64,
) -> c_int {
    guarded(|| {
        if m.is_null() || out.is_null() {
            return BK_ERR_ARGUMENT;
        }
        let model = &(*m).0;
        let Some(z) = point_from(coords, len, model.basis().n) else {
            return BK_ERR_ARGUMENT;
        };
        *out = model.log_kernel_potential(&z);
        BK_OK
    })
}

/// |integral of B_k minus dim| / dim on the model's rule.
///
/// # Safety
/// `m` live handle; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn bk_model_dimension_residual(m: *const BkModel, out: *mut f64) -> c_int {
    guarded(|| {
        if m.is_null() || out.is_null() {
            return BK_ERR_ARGUMENT;
        }
        match (*m).0.dimension_residual() {
            Ok(r) => {
                *out = r;
                BK_OK
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Exact-envelope oracle; fails with BK_ERR_UNSUPPORTED unless the weight
/// is torus-invariant with n = 1.
///
/// # Safety
/// `w` live handle; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn bk_oracle_build(w: *const BkWeight, out: *mut *mut BkOracle) -> c_int {
    guarded(|| {
        if w.is_null() || out.is_null() {
            return BK_ERR_ARGUMENT;
        }
        match RadialOracle::for_weight(&(*w).0) {
            Ok(o) => {
                *out = Box::into_raw(Box::new(BkOracle(o)));
                BK_OK
            }
            Err(e) => status_of(&e),
        }
    })
}

/// # Safety
/// `o` must come from `bk_oracle_build` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn bk_oracle_free(o: *mut BkOracle) {
    if !o.is_null() {
        drop(Box::from_raw(o));
    }
}

/// Equilibrium potential phi_e at interleaved coordinates (2 doubles).
///
/// # Safety
/// `o` live handle; `coords` holds `len` doubles; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn bk_oracle_phi_e(
    o: *const BkOracle,
    coords: *const f64,
    len: usize,
    out: *mut f64,
) -> c_int {
    guarded(|| {
        if o.is_null() || out.is_null() {
            return BK_ERR_ARGUMENT;
        }
        let Some(z) = point_from(coords, len, 1) else {
            return BK_ERR_ARGUMENT;
        };
        *out = (*o).0.phi_e_point(&z);
        BK_OK
    })
}

/// Draws one determinantal batch into a caller buffer of interleaved
/// (re, im) pairs. `capacity` counts points; dim H_k points are written
/// and `written` is set to that count.
///
/// # Safety
/// `m` live n = 1 model handle; `points` holds at least `2 * capacity`
/// doubles; `written` valid.
#[no_mangle]
pub unsafe extern "C" fn bk_sample_dpp(
    m: *const BkModel,
    seed: u64,
    points: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> c_int {
    guarded(|| {
        if m.is_null() || points.is_null() || written.is_null() {
            return BK_ERR_ARGUMENT;
        }
        let model = &(*m).0;
        if model.basis().n != 1 {
            return BK_ERR_UNSUPPORTED;
        }
        if capacity < model.dim() {
            return BK_ERR_BUFFER;
        }
        match sample_dpp(model, seed) {
            Ok(batch) => {
                let buf = std::slice::from_raw_parts_mut(points, 2 * capacity);
                for (i, z) in batch.points.iter().enumerate() {
                    buf[2 * i] = z.re;
                    buf[2 * i + 1] = z.im;
                }
                *written = batch.points.len();
                BK_OK
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn bk_strerror(code: c_int) -> *const c_char {
    let s: &'static [u8] = match code {
        BK_OK => b"ok\0",
        BK_ERR_ARGUMENT => b"invalid argument\0",
        BK_ERR_NUMERICAL => b"numerical refusal\0",
        BK_ERR_UNSUPPORTED => b"operation unsupported for this weight\0",
        BK_ERR_BUFFER => b"output buffer too small\0",
        BK_ERR_INTERNAL => b"internal panic\0",
        _ => b"unknown status\0",
    };
    s.as_ptr() as *const c_char
}
