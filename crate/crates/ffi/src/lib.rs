//! C interface to the P3P solver.
//!
//! Handles are opaque and owned by the caller once returned; free each with
//! its matching `*_free` function. Every fallible call returns a
//! [`P3pStatus`]; [`p3p_status_message`] gives a static description.
//! Matrices are 3×3, row-major, nine contiguous doubles.

use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use p3p_core::geometry::Vec3;
use p3p_core::p3p::{DepthSource, Solutions, MAX_GN_ITERATIONS};
use p3p_core::quartic::QuarticMethod;
use p3p_core::{solve, Error, P3pProblem, SolverConfig};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum P3pStatus {
    Ok = 0,
    NullPointer = 1,
    /// Non-finite values, zero-length bearings, or an invalid setting.
    InvalidInput = 2,
    /// Coincident or collinear points, or parallel bearings.
    DegenerateGeometry = 3,
    IndexOutOfRange = 4,
    /// A Rust panic was caught at the boundary.
    Internal = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum P3pVariant {
    Adaptive = 0,
    FerrariLagrange = 1,
    Classical = 2,
}

/// Which squared distance fixes the scale of the third depth.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum P3pDepthSource {
    S12 = 0,
    S13 = 1,
    S23 = 2,
}

/// Solver settings. Starts at the library defaults.
pub struct P3pConfig(SolverConfig);

/// Up to four candidate poses from one solve.
pub struct P3pSolutions(Solutions);

fn status_of(e: &Error) -> P3pStatus {
    if e.is_degenerate_geometry() {
        P3pStatus::DegenerateGeometry
    } else {
        P3pStatus::InvalidInput
    }
}

fn guard(f: impl FnOnce() -> P3pStatus) -> P3pStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(P3pStatus::Internal)
}

#[no_mangle]
pub extern "C" fn p3p_config_new() -> *mut P3pConfig {
    Box::into_raw(Box::new(P3pConfig(SolverConfig::default())))
}

/// # Safety
/// `config` must be null or a pointer from [`p3p_config_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn p3p_config_free(config: *mut P3pConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// # Safety
/// `config` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn p3p_config_set_gn_iterations(
    config: *mut P3pConfig,
    iterations: u32,
) -> P3pStatus {
    let Some(c) = config.as_mut() else {
        return P3pStatus::NullPointer;
    };
    if iterations > MAX_GN_ITERATIONS {
        return P3pStatus::InvalidInput;
    }
    c.0.gn_iterations = iterations;
    P3pStatus::Ok
}

/// # Safety
/// `config` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn p3p_config_set_variant(
    config: *mut P3pConfig,
    variant: P3pVariant,
) -> P3pStatus {
    let Some(c) = config.as_mut() else {
        return P3pStatus::NullPointer;
    };
    c.0.force_variant = match variant {
        P3pVariant::Adaptive => QuarticMethod::Adaptive,
        P3pVariant::FerrariLagrange => QuarticMethod::FerrariLagrange,
        P3pVariant::Classical => QuarticMethod::Classical,
    };
    P3pStatus::Ok
}

/// # Safety
/// `config` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn p3p_config_set_reindex(
    config: *mut P3pConfig,
    enabled: bool,
) -> P3pStatus {
    let Some(c) = config.as_mut() else {
        return P3pStatus::NullPointer;
    };
    c.0.reindex_enabled = enabled;
    P3pStatus::Ok
}

/// # Safety
/// `config` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn p3p_config_set_depth_source(
    config: *mut P3pConfig,
    source: P3pDepthSource,
) -> P3pStatus {
    let Some(c) = config.as_mut() else {
        return P3pStatus::NullPointer;
    };
    c.0.d3_source = match source {
        P3pDepthSource::S12 => DepthSource::Distance12,
        P3pDepthSource::S13 => DepthSource::Distance13,
        P3pDepthSource::S23 => DepthSource::Distance23,
    };
    P3pStatus::Ok
}

fn vecs(p: &[f64; 9]) -> [Vec3; 3] {
    std::array::from_fn(|i| Vec3::new(p[3 * i], p[3 * i + 1], p[3 * i + 2]))
}

/// Solves one problem. `bearings` and `points` each hold three xyz triples
/// (nine doubles); bearings need not be normalized. `config` may be null for
/// the defaults. On success `*out` receives a new handle, possibly holding
/// zero solutions.
///
/// # Safety
/// Non-null pointers must be valid for the stated number of elements, and
/// `config` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn p3p_solve(
    config: *const P3pConfig,
    bearings: *const f64,
    points: *const f64,
    out: *mut *mut P3pSolutions,
) -> P3pStatus {
    if bearings.is_null() || points.is_null() || out.is_null() {
        return P3pStatus::NullPointer;
    }
    *out = ptr::null_mut();
    let config = config.as_ref().map_or_else(SolverConfig::default, |c| c.0);
    let b = *(bearings as *const [f64; 9]);
    let p = *(points as *const [f64; 9]);
    guard(|| {
        let result =
            P3pProblem::from_arrays(vecs(&b), vecs(&p)).and_then(|prob| solve(&prob, &config));
        match result {
            Ok(sols) => {
                *out = Box::into_raw(Box::new(P3pSolutions(sols)));
                P3pStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Number of solutions in the set; 0 for a null handle.
///
/// # Safety
/// `solutions` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn p3p_solutions_len(solutions: *const P3pSolutions) -> usize {
    solutions.as_ref().map_or(0, |s| s.0.len())
}

/// Copies solution `index` out. Any of `rotation` (9 doubles, row-major),
/// `translation` (3) and `depths` (3) may be null to skip it.
///
/// # Safety
/// `solutions` must be a live handle; non-null outputs must be writable for
/// their stated lengths.
#[no_mangle]
pub unsafe extern "C" fn p3p_solutions_get(
    solutions: *const P3pSolutions,
    index: usize,
    rotation: *mut f64,
    translation: *mut f64,
    depths: *mut f64,
) -> P3pStatus {
    let Some(s) = solutions.as_ref() else {
        return P3pStatus::NullPointer;
    };
    let Some(sol) = s.0.get(index) else {
        return P3pStatus::IndexOutOfRange;
    };
    if !rotation.is_null() {
        let flat: Vec<f64> = sol.pose.rotation.rows.iter().flatten().copied().collect();
        ptr::copy_nonoverlapping(flat.as_ptr(), rotation, 9);
    }
    if !translation.is_null() {
        ptr::copy_nonoverlapping(sol.pose.translation.to_array().as_ptr(), translation, 3);
    }
    if !depths.is_null() {
        ptr::copy_nonoverlapping(sol.depths.as_ptr(), depths, 3);
    }
    P3pStatus::Ok
}

/// # Safety
/// `solutions` must be null or a handle from [`p3p_solve`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn p3p_solutions_free(solutions: *mut P3pSolutions) {
    if !solutions.is_null() {
        drop(Box::from_raw(solutions));
    }
}

/// Static, NUL-terminated description of a status code.
#[no_mangle]
pub extern "C" fn p3p_status_message(status: P3pStatus) -> *const c_char {
    let msg: &'static [u8] = match status {
        P3pStatus::Ok => b"ok\0",
        P3pStatus::NullPointer => b"null pointer argument\0",
        P3pStatus::InvalidInput => b"invalid input or setting\0",
        P3pStatus::DegenerateGeometry => b"degenerate geometry\0",
        P3pStatus::IndexOutOfRange => b"solution index out of range\0",
        P3pStatus::Internal => b"internal error\0",
    };
    msg.as_ptr().cast()
}
