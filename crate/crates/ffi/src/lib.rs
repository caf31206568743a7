//! C ABI for walklab.
//!
//! Conventions: every fallible function returns a `WlStatus`; results are
//! written through out-pointers; on failure a message is stored per thread
//! and read with `wl_last_error`. Handles are opaque and freed with the
//! matching `*_free` function. Strings returned by the library are freed
//! with `wl_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use walklab::fields::PAdic;
use walklab::measures::FiniteMeasure;
use walklab::projective::{self, Mat, ProjPoint};
use walklab::{transfer, Error};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WlStatus {
    Ok = 0,
    /// Bad argument, parse or configuration error.
    InvalidArgument = 1,
    /// A mathematical hypothesis of the model fails.
    Hypothesis = 2,
    /// Singular, defective or non-convergent numerics.
    Numerical = 3,
    Io = 4,
    NullPointer = 5,
    /// A Rust panic was caught at the boundary.
    Panic = 6,
}

/// Opaque p-adic number with fixed relative precision.
pub struct WlPadic(PAdic);

/// Opaque finitely supported probability measure on GL(2, ℝ).
pub struct WlMeasure2(FiniteMeasure<Mat<2>>);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).expect("NUL removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> WlStatus {
    match e {
        Error::InvalidArgument(_) | Error::Parse(_) | Error::Config(_) | Error::FieldMismatch(_) | Error::Budget(_) => WlStatus::InvalidArgument,
        Error::Hypothesis(_) | Error::NoReturns => WlStatus::Hypothesis,
        Error::DivisionByZero | Error::Singular | Error::Defective(_) | Error::NonConvergence { .. } => WlStatus::Numerical,
        Error::Io(_) => WlStatus::Io,
    }
}

/// Runs `f`, converting errors and panics into a status plus last-error message.
fn guard(f: impl FnOnce() -> Result<(), (WlStatus, String)>) -> WlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => WlStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(p) => {
            let msg = p.downcast_ref::<&str>().map(|s| s.to_string()).or_else(|| p.downcast_ref::<String>().cloned()).unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            WlStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (WlStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (WlStatus, String) {
    (WlStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (WlStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(out: *mut T, v: T, what: &str) -> Result<(), (WlStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("NUL removed").into_raw()
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread; do not free it.
#[no_mangle]
pub extern "C" fn wl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn wl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Frees a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn wl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Runs the command-line tool with `argv[0..argc]` (without the program name).
/// Standard output is returned in `*out` (free with `wl_string_free`), the
/// process exit code in `*exit_code`; diagnostics go to the last-error slot.
///
/// # Safety
/// `argv` must hold `argc` valid NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn wl_run(argc: usize, argv: *const *const c_char, out: *mut *mut c_char, exit_code: *mut i32) -> WlStatus {
    guard(|| {
        if argv.is_null() && argc > 0 {
            return Err(null("argv"));
        }
        let mut args = vec!["walklab".to_string()];
        for k in 0..argc {
            let a = *argv.add(k);
            if a.is_null() {
                return Err(null("argv element"));
            }
            let s = CStr::from_ptr(a).to_str().map_err(|_| (WlStatus::InvalidArgument, "argument is not UTF-8".to_string()))?;
            args.push(s.to_string());
        }
        let mut stdout = Vec::new();
        let mut stderr = Vec::new();
        let code = walklab::cli::run(args, &mut stdout, &mut stderr);
        write(exit_code, code, "exit_code")?;
        write(out, into_c_string(String::from_utf8_lossy(&stdout).into_owned()), "out")?;
        if code != 0 {
            set_error(String::from_utf8_lossy(&stderr).trim_end().to_string());
        }
        Ok(())
    })
}

/// Creates `num/den` in ℚ_p with `prec` digits of relative precision.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wl_padic_from_rational(num: i64, den: i64, p: u32, prec: usize, out: *mut *mut WlPadic) -> WlStatus {
    guard(|| {
        PAdic::check_prime(p).map_err(lib_err)?;
        if prec == 0 {
            return Err((WlStatus::InvalidArgument, "precision must be positive".into()));
        }
        let x = PAdic::from_rational(num, den, p, prec).map_err(lib_err)?;
        write(out, Box::into_raw(Box::new(WlPadic(x))), "out")
    })
}

/// Parses the textual form produced by `wl_padic_to_string`.
///
/// # Safety
/// `text` must be NUL-terminated; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn wl_padic_parse(text: *const c_char, out: *mut *mut WlPadic) -> WlStatus {
    guard(|| {
        let s = deref(text, "text")?;
        let s = CStr::from_ptr(s).to_str().map_err(|_| (WlStatus::InvalidArgument, "text is not UTF-8".to_string()))?;
        let x: PAdic = s.parse().map_err(lib_err)?;
        write(out, Box::into_raw(Box::new(WlPadic(x))), "out")
    })
}

/// Frees a p-adic handle. NULL is ignored.
///
/// # Safety
/// `x` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn wl_padic_free(x: *mut WlPadic) {
    if !x.is_null() {
        drop(Box::from_raw(x));
    }
}

/// Arithmetic operations for `wl_padic_binary`.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WlPadicOp {
    Add = 0,
    Sub = 1,
    Mul = 2,
    Div = 3,
}

/// `*out = a op b`; both operands must share the prime.
///
/// # Safety
/// `a`, `b` must be live handles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn wl_padic_binary(op: WlPadicOp, a: *const WlPadic, b: *const WlPadic, out: *mut *mut WlPadic) -> WlStatus {
    guard(|| {
        let (a, b) = (&deref(a, "a")?.0, &deref(b, "b")?.0);
        if a.prime() != b.prime() {
            return Err(lib_err(Error::FieldMismatch(format!("primes {} and {}", a.prime(), b.prime()))));
        }
        let r = match op {
            WlPadicOp::Add => a.add(b),
            WlPadicOp::Sub => a.sub(b),
            WlPadicOp::Mul => a.mul(b),
            WlPadicOp::Div => a.div(b).map_err(lib_err)?,
        };
        write(out, Box::into_raw(Box::new(WlPadic(r))), "out")
    })
}

/// Valuation of a nonzero element; zero gives `WL_STATUS_INVALID_ARGUMENT`.
///
/// # Safety
/// `x` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn wl_padic_valuation(x: *const WlPadic, out: *mut i64) -> WlStatus {
    guard(|| {
        let v = deref(x, "x")?.0.valuation().ok_or_else(|| (WlStatus::InvalidArgument, "zero has infinite valuation".to_string()))?;
        write(out, v, "out")
    })
}

/// Absolute value `p^{−v}` (0 for zero).
///
/// # Safety
/// `x` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn wl_padic_abs(x: *const WlPadic, out: *mut f64) -> WlStatus {
    guard(|| write(out, deref(x, "x")?.0.abs(), "out"))
}

/// Textual form; free with `wl_string_free`.
///
/// # Safety
/// `x` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn wl_padic_to_string(x: *const WlPadic, out: *mut *mut c_char) -> WlStatus {
    guard(|| write(out, into_c_string(deref(x, "x")?.0.to_string()), "out"))
}

/// Measure with `n` atoms; atom k is the row-major matrix `entries[4k..4k+4]`
/// with probability `weights[k]` (weights must sum to one).
///
/// # Safety
/// `entries` must hold `4n` doubles and `weights` `n` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn wl_measure2_new(entries: *const f64, weights: *const f64, n: usize, out: *mut *mut WlMeasure2) -> WlStatus {
    guard(|| {
        if n == 0 {
            return Err((WlStatus::InvalidArgument, "a measure needs at least one atom".into()));
        }
        let e = std::slice::from_raw_parts(deref(entries, "entries")?, 4 * n);
        let w = std::slice::from_raw_parts(deref(weights, "weights")?, n);
        let atoms = e.chunks_exact(4).map(|m| Mat::<2>::new(m[0], m[1], m[2], m[3])).collect();
        let mu = FiniteMeasure::new(atoms, w.to_vec()).map_err(lib_err)?;
        write(out, Box::into_raw(Box::new(WlMeasure2(mu))), "out")
    })
}

/// Frees a measure handle. NULL is ignored.
///
/// # Safety
/// `m` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn wl_measure2_free(m: *mut WlMeasure2) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Time-average Lyapunov estimate `(1/n) log‖X_n v‖` over `chains` chains,
/// with its standard error.
///
/// # Safety
/// `m` must be a live handle; `lambda` and `stderr_out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn wl_measure2_lyapunov(m: *const WlMeasure2, n: usize, chains: usize, seed: u64, lambda: *mut f64, stderr_out: *mut f64) -> WlStatus {
    guard(|| {
        let mu = &deref(m, "m")?.0;
        if n == 0 || chains < 2 {
            return Err((WlStatus::InvalidArgument, "need n ≥ 1 and chains ≥ 2".into()));
        }
        let r = projective::lyapunov_estimate(mu, &ProjPoint::from_angle(0.3), n, chains, seed);
        write(lambda, r.lambda.mean, "lambda")?;
        write(stderr_out, r.lambda.stderr, "stderr_out")
    })
}

/// Asymptotic variance `σ² = −k″(0)` of the norm cocycle from the transfer
/// operator discretized on `bins` cells of ℙ¹.
///
/// # Safety
/// `m` must be a live handle; `sigma2` must be valid.
#[no_mangle]
pub unsafe extern "C" fn wl_measure2_sigma2(m: *const WlMeasure2, bins: usize, sigma2: *mut f64) -> WlStatus {
    guard(|| {
        let mu = &deref(m, "m")?.0;
        let r = transfer::variance_sigma2(mu, bins, transfer::DEFAULT_H).map_err(lib_err)?;
        write(sigma2, r.sigma2, "sigma2")
    })
}
