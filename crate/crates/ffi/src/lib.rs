//! C interface to `asep-spectra`.
//!
//! Every fallible function returns an [`AsepStatus`]; on failure the message
//! is available from [`asep_last_error`] on the same thread. Handles are
//! opaque and must be released with their `_free` function.

use asep_spectra::simulate::{exact_profile_gap, Mode, Simulator};
use asep_spectra::spectral::{k_spectrum_report, sector_gap, xxz_gap, Form, LanczosOptions, ScanOptions};
use asep_spectra::operators::XXZParams;
use asep_spectra::state_space::EnsembleParams;
use asep_spectra::verify::{run_verify, VerifyOptions};
use asep_spectra::Error;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Result codes; success is zero.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsepStatus {
    Ok = 0,
    InvalidParams = 1,
    CapExceeded = 2,
    DegenerateSector = 3,
    OutOfRange = 4,
    NoConvergence = 5,
    InsufficientData = 6,
    NonDecayingCorrelation = 7,
    CheckFailed = 8,
    Io = 9,
    NullPointer = 10,
    Internal = 11,
}

/// Which Dirichlet form a gap refers to.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsepForm {
    Full = 0,
    Modified = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsepMode {
    Lattice = 0,
    Profile = 1,
}

/// Opaque canonical sector `(q, L, H, N)`.
pub struct AsepEnsemble {
    params: EnsembleParams,
}

/// Opaque simulator state.
pub struct AsepSimulator {
    sim: Simulator,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> AsepStatus {
    match e {
        Error::InvalidParams(_) | Error::DimensionMismatch { .. } | Error::ZeroWeightState(_) => {
            AsepStatus::InvalidParams
        }
        Error::CapExceeded { .. } => AsepStatus::CapExceeded,
        Error::DegenerateSector => AsepStatus::DegenerateSector,
        Error::OutOfRange(_) => AsepStatus::OutOfRange,
        Error::NoConvergence { .. } => AsepStatus::NoConvergence,
        Error::InsufficientData { .. } => AsepStatus::InsufficientData,
        Error::NonDecayingCorrelation(_) => AsepStatus::NonDecayingCorrelation,
        Error::ReportedFailure(_) => AsepStatus::CheckFailed,
        Error::Io(_) => AsepStatus::Io,
    }
}

/// Run `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), AsepStatus>) -> AsepStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AsepStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            AsepStatus::Internal
        }
    }
}

fn lib<T>(r: asep_spectra::Result<T>) -> Result<T, AsepStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), AsepStatus> {
    if p.is_null() {
        set_error(format!("{name} is null"));
        Err(AsepStatus::NullPointer)
    } else {
        Ok(())
    }
}

/// Copy the last error message of this thread into `buf` (nul-terminated,
/// truncated to `len`). Returns the full message length, `0` if none.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn asep_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Static version string.
#[no_mangle]
pub extern "C" fn asep_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Validate `(q, L, H, N)` and allocate a handle.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn asep_ensemble_new(
    q: f64,
    sticks: usize,
    height: usize,
    particles: usize,
    out: *mut *mut AsepEnsemble,
) -> AsepStatus {
    guard(|| {
        non_null(out, "out")?;
        let params = lib(EnsembleParams::new(q, sticks, height, particles))?;
        *out = Box::into_raw(Box::new(AsepEnsemble { params }));
        Ok(())
    })
}

/// # Safety
/// `ens` must come from [`asep_ensemble_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn asep_ensemble_free(ens: *mut AsepEnsemble) {
    if !ens.is_null() {
        drop(Box::from_raw(ens));
    }
}

/// Spectral gap of the generator on the sector; `0` on reducible sectors.
///
/// # Safety
/// `ens` must be a live handle and `gap` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn asep_sector_gap(ens: *const AsepEnsemble, form: AsepForm, gap: *mut f64) -> AsepStatus {
    guard(|| {
        non_null(ens, "ens")?;
        non_null(gap, "gap")?;
        let form = match form {
            AsepForm::Full => Form::Full,
            AsepForm::Modified => Form::Modified,
        };
        let cell = lib(sector_gap(&(*ens).params, form, &ScanOptions::default()))?;
        *gap = cell.gap;
        Ok(())
    })
}

/// Gap of the lumped row-occupation chain.
///
/// # Safety
/// `ens` must be a live handle and `gap` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn asep_profile_gap(ens: *const AsepEnsemble, gap: *mut f64) -> AsepStatus {
    guard(|| {
        non_null(ens, "ens")?;
        non_null(gap, "gap")?;
        *gap = lib(exact_profile_gap(&(*ens).params))?;
        Ok(())
    })
}

/// Largest eigenvalue modulus of the stick kernel off the constants and
/// the centred occupation.
///
/// # Safety
/// `ens` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn asep_third_modulus(ens: *const AsepEnsemble, out: *mut f64) -> AsepStatus {
    guard(|| {
        non_null(ens, "ens")?;
        non_null(out, "out")?;
        *out = lib(k_spectrum_report(&(*ens).params))?.third_modulus;
        Ok(())
    })
}

/// First excitation of the kink chain with spin `twice_s / 2` and length
/// `height` in the sector `S³ = sector_2n / 2`. `NaN` on one-state sectors.
///
/// # Safety
/// `gap` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn asep_xxz_gap(
    twice_s: usize,
    height: usize,
    delta: f64,
    sector_2n: i64,
    gap: *mut f64,
) -> AsepStatus {
    guard(|| {
        non_null(gap, "gap")?;
        let x = lib(XXZParams::new(twice_s, height, delta, sector_2n))?;
        *gap = lib(xxz_gap(&x, &LanczosOptions::default()))?.gap;
        Ok(())
    })
}

/// Run the identity suite, optionally restricted by `filter` (may be null).
/// `passed` receives 1 or 0.
///
/// # Safety
/// `filter` must be null or a nul-terminated string; `passed` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn asep_verify(filter: *const c_char, passed: *mut i32) -> AsepStatus {
    guard(|| {
        non_null(passed, "passed")?;
        let filter = if filter.is_null() {
            None
        } else {
            match CStr::from_ptr(filter).to_str() {
                Ok(s) => Some(s.to_string()),
                Err(_) => {
                    set_error("filter is not UTF-8".into());
                    return Err(AsepStatus::InvalidParams);
                }
            }
        };
        let report = lib(run_verify(&VerifyOptions { filter, ..VerifyOptions::default() }))?;
        *passed = i32::from(report.passed());
        Ok(())
    })
}

/// Start a simulation of the sector from the bottom-filled configuration.
///
/// # Safety
/// `ens` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn asep_simulator_new(
    ens: *const AsepEnsemble,
    mode: AsepMode,
    seed: u64,
    out: *mut *mut AsepSimulator,
) -> AsepStatus {
    guard(|| {
        non_null(ens, "ens")?;
        non_null(out, "out")?;
        let mode = match mode {
            AsepMode::Lattice => Mode::Lattice,
            AsepMode::Profile => Mode::Profile,
        };
        let sim = lib(Simulator::new(&(*ens).params, mode, seed))?;
        *out = Box::into_raw(Box::new(AsepSimulator { sim }));
        Ok(())
    })
}

/// # Safety
/// `sim` must come from [`asep_simulator_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn asep_simulator_free(sim: *mut AsepSimulator) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Advance by `events` jumps; `time` (may be null) receives the clock.
///
/// # Safety
/// `sim` must be a live handle; `time` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn asep_simulator_step(sim: *mut AsepSimulator, events: u64, time: *mut f64) -> AsepStatus {
    guard(|| {
        non_null(sim, "sim")?;
        let s = &mut (*sim).sim;
        for _ in 0..events {
            s.step();
        }
        if !time.is_null() {
            *time = s.time();
        }
        Ok(())
    })
}

/// Copy the row occupations `ω_1..ω_H` into `buf`, which must hold `len ≥ H`
/// entries.
///
/// # Safety
/// `sim` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn asep_simulator_profile(sim: *const AsepSimulator, buf: *mut usize, len: usize) -> AsepStatus {
    guard(|| {
        non_null(sim, "sim")?;
        non_null(buf, "buf")?;
        let p = (*sim).sim.profile();
        if len < p.len() {
            set_error(format!("buffer holds {len} entries, {} needed", p.len()));
            return Err(AsepStatus::OutOfRange);
        }
        std::ptr::copy_nonoverlapping(p.as_ptr(), buf, p.len());
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn message() -> String {
        let mut buf = [0 as c_char; 256];
        let n = unsafe { asep_last_error(buf.as_mut_ptr(), buf.len()) };
        assert!(n > 0);
        unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap().to_string()
    }

    #[test]
    fn invalid_ensemble_sets_error() {
        let mut e = std::ptr::null_mut();
        let s = unsafe { asep_ensemble_new(1.5, 2, 2, 1, &mut e) };
        assert_eq!(s, AsepStatus::InvalidParams);
        assert!(e.is_null());
        assert!(message().contains("q"));
    }

    #[test]
    fn null_out_pointer() {
        let s = unsafe { asep_ensemble_new(0.5, 2, 2, 1, std::ptr::null_mut()) };
        assert_eq!(s, AsepStatus::NullPointer);
    }

    #[test]
    fn truncated_message_is_terminated() {
        unsafe { asep_ensemble_new(0.5, 0, 2, 1, &mut std::ptr::null_mut()) };
        let mut buf = [1 as c_char; 4];
        let n = unsafe { asep_last_error(buf.as_mut_ptr(), buf.len()) };
        assert!(n > 3);
        assert_eq!(buf[3], 0);
    }
}
