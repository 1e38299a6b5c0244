//! C ABI over `vqalab`.
//!
//! Conventions:
//! - Every fallible function returns a [`VqaStatus`]; results go through out
//!   pointers, which are left untouched on failure.
//! - On failure a message is stored per thread and can be read with
//!   [`vqa_last_error_message`].
//! - Ansatz handles come from `vqa_ansatz_*` constructors and must be
//!   released with [`vqa_ansatz_free`].
//! - Observables are passed as C strings: `global0`, `local-avg`,
//!   `proj0:<q>`, `z:<q>`, `pauli:<string>` (1-based qubits).
//! - States are interleaved `(re, im)` pairs of length `2 * 2^n`; a null
//!   state means `|0…0⟩`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use vqalab::analytic::{mu_global, mu_local_zero};
use vqalab::circuits::Ansatz;
use vqalab::experiments::evolved_k_norm;
use vqalab::linalg::{Statevector, C64};
use vqalab::observables::{expectation, grad, Observable};
use vqalab::Error;

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VqaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Dimension = 3,
    SizeLimit = 4,
    Numerical = 5,
    Panic = 6,
}

/// Opaque parameterized circuit.
pub struct VqaAnsatz {
    inner: Ansatz,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> VqaStatus {
    match e {
        Error::Dimension(_) | Error::ParamLength { .. } | Error::ParamIndex { .. } | Error::NonAdjacent(..) => {
            VqaStatus::Dimension
        }
        Error::SizeGuard { .. } => VqaStatus::SizeLimit,
        Error::NotHermitian(_) | Error::NotUnitary(_) | Error::ZeroNorm | Error::Numerical(_) => VqaStatus::Numerical,
        Error::Geometry(_) | Error::Parse(_) | Error::Config { .. } | Error::Io(_) => VqaStatus::InvalidArgument,
    }
}

struct Fail(VqaStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard<F>(f: F) -> VqaStatus
where
    F: FnOnce() -> Result<(), Fail>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => VqaStatus::Ok,
        Ok(Err(Fail(s, msg))) => {
            set_error(msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            VqaStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(VqaStatus::NullPointer, format!("{what} is null"))
}

unsafe fn ansatz_ref<'a>(a: *const VqaAnsatz) -> Result<&'a Ansatz, Fail> {
    a.as_ref().map(|h| &h.inner).ok_or_else(|| null("ansatz"))
}

unsafe fn observable(s: *const c_char) -> Result<Observable, Fail> {
    if s.is_null() {
        return Err(null("observable"));
    }
    let text = CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Fail(VqaStatus::InvalidArgument, "observable is not UTF-8".into()))?;
    Ok(text.parse()?)
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn input_state(n: usize, state: *const f64, len: usize) -> Result<Statevector, Fail> {
    if state.is_null() {
        return Ok(Statevector::zero(n));
    }
    if len != 2usize << n {
        return Err(Fail(VqaStatus::Dimension, format!("state has {len} reals, expected {}", 2usize << n)));
    }
    let raw = slice(state, len, "state")?;
    let amps = raw.chunks_exact(2).map(|c| C64::new(c[0], c[1])).collect();
    Ok(Statevector::from_amplitudes(amps)?)
}

unsafe fn write<T>(out: *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = v;
    Ok(())
}

fn new_handle(out: *mut *mut VqaAnsatz, build: impl FnOnce() -> vqalab::Result<Ansatz>) -> VqaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("output handle"));
        }
        let a = build()?;
        unsafe { *out = Box::into_raw(Box::new(VqaAnsatz { inner: a })) };
        Ok(())
    })
}

/// Message for the last failing call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn vqa_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn vqa_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// MPS ansatz: `n - k + 1` width-`k` windows of brickwork depth `depth`.
#[no_mangle]
pub extern "C" fn vqa_ansatz_mps(n: usize, k: usize, depth: usize, out: *mut *mut VqaAnsatz) -> VqaStatus {
    new_handle(out, || Ansatz::mps(n, k, depth))
}

/// Hardware-efficient brickwork over all `n` qubits.
#[no_mangle]
pub extern "C" fn vqa_ansatz_hea(n: usize, depth: usize, out: *mut *mut VqaAnsatz) -> VqaStatus {
    new_handle(out, || Ansatz::hea(n, depth))
}

/// Convolution-pooling ansatz; `n` must be a power of two.
#[no_mangle]
pub extern "C" fn vqa_ansatz_qcnn(n: usize, depth: usize, out: *mut *mut VqaAnsatz) -> VqaStatus {
    new_handle(out, || Ansatz::qcnn(n, depth))
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `a` must be null or a handle from a `vqa_ansatz_*` constructor that has
/// not been freed.
#[no_mangle]
pub unsafe extern "C" fn vqa_ansatz_free(a: *mut VqaAnsatz) {
    if !a.is_null() {
        drop(Box::from_raw(a));
    }
}

/// # Safety
/// `a` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vqa_ansatz_num_params(a: *const VqaAnsatz, out: *mut usize) -> VqaStatus {
    guard(|| write(out, ansatz_ref(a)?.num_params()))
}

/// # Safety
/// `a` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vqa_ansatz_num_qubits(a: *const VqaAnsatz, out: *mut usize) -> VqaStatus {
    guard(|| write(out, ansatz_ref(a)?.n()))
}

/// `⟨σ| C(θ)† W C(θ) |σ⟩`.
///
/// # Safety
/// `a` must be a live handle, `w` a NUL-terminated string, `theta` valid
/// for `theta_len` reads, `state` null or valid for `state_len` reads, and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vqa_expectation(
    a: *const VqaAnsatz,
    w: *const c_char,
    theta: *const f64,
    theta_len: usize,
    state: *const f64,
    state_len: usize,
    out: *mut f64,
) -> VqaStatus {
    guard(|| {
        let ansatz = ansatz_ref(a)?;
        let w = observable(w)?;
        let theta = slice(theta, theta_len, "theta")?;
        let sigma = input_state(ansatz.n(), state, state_len)?;
        write(out, expectation(&sigma, &w, ansatz, theta)?)
    })
}

/// Parameter-shift gradient; `out` receives `theta_len` values.
///
/// # Safety
/// As [`vqa_expectation`], with `out` valid for `out_len` writes.
#[no_mangle]
pub unsafe extern "C" fn vqa_gradient(
    a: *const VqaAnsatz,
    w: *const c_char,
    theta: *const f64,
    theta_len: usize,
    state: *const f64,
    state_len: usize,
    out: *mut f64,
    out_len: usize,
) -> VqaStatus {
    guard(|| {
        let ansatz = ansatz_ref(a)?;
        let w = observable(w)?;
        let theta = slice(theta, theta_len, "theta")?;
        let sigma = input_state(ansatz.n(), state, state_len)?;
        if out.is_null() {
            return Err(null("output buffer"));
        }
        if out_len != theta_len {
            return Err(Fail(VqaStatus::Dimension, format!("output has {out_len} slots for {theta_len} parameters")));
        }
        let g = grad(&sigma, &w, ansatz, theta)?;
        std::slice::from_raw_parts_mut(out, out_len).copy_from_slice(&g);
        Ok(())
    })
}

/// `‖C(θ)† W C(θ)‖_𝕂`.
///
/// # Safety
/// `a` must be a live handle, `w` a NUL-terminated string, `theta` valid
/// for `theta_len` reads, and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vqa_k_norm(
    a: *const VqaAnsatz,
    w: *const c_char,
    theta: *const f64,
    theta_len: usize,
    out: *mut f64,
) -> VqaStatus {
    guard(|| {
        let ansatz = ansatz_ref(a)?;
        let w = observable(w)?;
        let theta = slice(theta, theta_len, "theta")?;
        write(out, evolved_k_norm(&w, ansatz, theta)?)
    })
}

/// Haar moment of the global projector for bit strings `p, q, r, s`, each
/// `n` bytes of 0/1 with qubit 1 first.
///
/// # Safety
/// Each bit pointer must be valid for `n` reads and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vqa_mu_global(
    n: usize,
    k: usize,
    p: *const u8,
    q: *const u8,
    r: *const u8,
    s: *const u8,
    out: *mut f64,
) -> VqaStatus {
    guard(|| {
        let (p, q) = (slice(p, n, "p")?, slice(q, n, "q")?);
        let (r, s) = (slice(r, n, "r")?, slice(s, n, "s")?);
        write(out, mu_global(n, k, p, q, r, s)?)
    })
}

/// Second moment of `tr(Z_n |0⟩⟨0|_C)` over Haar windows.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vqa_mu_local_zero(n: usize, k: usize, out: *mut f64) -> VqaStatus {
    guard(|| write(out, mu_local_zero(n, k)?))
}
