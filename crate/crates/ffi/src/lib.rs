//! C ABI for the `edtc` simulator.
//!
//! Every function returns an [`EdtcStatus`]; on failure a message is kept in
//! thread-local storage and can be fetched with [`edtc_last_error_message`].
//! Each object is an opaque handle released with the matching `*_free`.
//! Handles are immutable after creation and may be shared between threads
//! for reading.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use edtc::analysis::{default_pad, fit_power_law, spectrum_of, SpectralResult};
use edtc::sequence::{evolve_with, parse_program, EvolveOptions, PulseSequence, StroboscopicSeries};
use edtc::{Error, SystemParams};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdtcStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Input text was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The sequence program did not parse.
    Parse = 3,
    /// Physical parameters were rejected.
    InvalidParams = 4,
    /// Other invalid arguments (padding, sizes, fit points).
    InvalidArgument = 5,
    /// Numerical failure: too few samples, non-physical state, no convergence.
    Numeric = 6,
    /// The caller's buffer is too small.
    BufferTooSmall = 7,
    /// A Rust panic was caught at the boundary.
    Panic = 8,
}

#[derive(Default)]
struct LastError {
    message: String,
    position: Option<(usize, usize)>,
}

thread_local! {
    static LAST_ERROR: RefCell<LastError> = RefCell::new(LastError::default());
}

fn set_error(message: String, position: Option<(usize, usize)>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = LastError { message, position });
}

struct Failure {
    status: EdtcStatus,
    message: String,
    position: Option<(usize, usize)>,
}

type Outcome<T = ()> = Result<T, Failure>;

fn fail(status: EdtcStatus, message: impl Into<String>) -> Failure {
    Failure { status, message: message.into(), position: None }
}

fn status_of(e: &Error) -> EdtcStatus {
    match e {
        _ if e.is_parse_error() => EdtcStatus::Parse,
        Error::NonPositiveTimescale { .. }
        | Error::InconsistentT2 { .. }
        | Error::MagnetizationOutOfRange(_)
        | Error::MissingTimescale(_)
        | Error::NonFinite { .. }
        | Error::NegativeDuration(_) => EdtcStatus::InvalidParams,
        Error::InvalidPadding { .. } | Error::InvalidInput(_) => EdtcStatus::InvalidArgument,
        _ => EdtcStatus::Numeric,
    }
}

/// Runs `f`, recording errors and converting panics.
fn guard(f: impl FnOnce() -> Outcome) -> EdtcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EdtcStatus::Ok,
        Ok(Err(e)) => {
            set_error(e.message, e.position);
            e.status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"), None);
            EdtcStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> Failure {
    Failure { status: status_of(&e), message: e.to_string(), position: e.position() }
}

fn null(name: &str) -> Failure {
    fail(EdtcStatus::NullPointer, format!("`{name}` is null"))
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Outcome<&'a T> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn write_out<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

/// Writes `src` into `dst` if `dst` is non-null; `dst` must hold `len` values.
unsafe fn fill(dst: *mut f64, len: usize, src: impl ExactSizeIterator<Item = f64>) -> Outcome {
    if dst.is_null() {
        return Ok(());
    }
    if len < src.len() {
        return Err(fail(EdtcStatus::BufferTooSmall, format!("buffer holds {len} values, need {}", src.len())));
    }
    for (i, v) in src.enumerate() {
        *dst.add(i) = v;
    }
    Ok(())
}

/// Version string of the library; static, do not free.
#[no_mangle]
pub extern "C" fn edtc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Length in bytes of the last error message on this thread, excluding the
/// terminating NUL.
#[no_mangle]
pub extern "C" fn edtc_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().message.len())
}

/// Copies the last error message (NUL-terminated, truncated to fit) into
/// `buf` and returns the number of bytes written excluding the NUL.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn edtc_last_error_message(buf: *mut c_char, len: usize) -> usize {
    if buf.is_null() || len == 0 {
        return 0;
    }
    LAST_ERROR.with(|e| {
        let msg = &e.borrow().message;
        let n = msg.len().min(len - 1);
        ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
        *buf.add(n) = 0;
        n
    })
}

/// Physical parameters with every timescale resolved. An infinite dephasing
/// time is reported as `INFINITY`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct EdtcParams {
    pub t1: f64,
    pub t2: f64,
    pub t_phi: f64,
    pub m_eq: f64,
    pub omega1: f64,
}

impl From<&SystemParams> for EdtcParams {
    fn from(p: &SystemParams) -> Self {
        Self { t1: p.t1(), t2: p.t2(), t_phi: p.t_phi().as_f64(), m_eq: p.m_eq(), omega1: p.omega1() }
    }
}

/// A parsed and validated sequence program.
pub struct EdtcProgram {
    params: SystemParams,
    sequence: PulseSequence,
}

/// Stroboscopic magnetization samples `M(nT)`, `n = 0..=cycles`.
pub struct EdtcSeries {
    series: StroboscopicSeries,
}

/// Zero-padded spectrum of a series' `Mz`.
pub struct EdtcSpectrum {
    spec: SpectralResult,
}

/// Parses program text.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn edtc_program_parse(text: *const c_char, out: *mut *mut EdtcProgram) -> EdtcStatus {
    guard(|| {
        if text.is_null() {
            return Err(null("text"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(text).to_str().map_err(|e| fail(EdtcStatus::InvalidUtf8, e.to_string()))?;
        let (params, sequence) = parse_program(text).and_then(|p| p.compile()).map_err(lib_err)?;
        write_out(out, EdtcProgram { params, sequence });
        Ok(())
    })
}

/// Line and column (1-based) of the last error on this thread. Returns
/// false, leaving the outputs untouched, when that error had no source
/// position.
///
/// # Safety
/// `line` and `col` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn edtc_last_error_position(line: *mut usize, col: *mut usize) -> bool {
    LAST_ERROR.with(|e| match e.borrow().position {
        Some((l, c)) if !line.is_null() && !col.is_null() => {
            *line = l;
            *col = c;
            true
        }
        _ => false,
    })
}

/// # Safety
/// `program` must come from [`edtc_program_parse`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn edtc_program_free(program: *mut EdtcProgram) {
    if !program.is_null() {
        drop(Box::from_raw(program));
    }
}

/// # Safety
/// `program` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn edtc_program_params(program: *const EdtcProgram, out: *mut EdtcParams) -> EdtcStatus {
    guard(|| {
        let prog = deref(program, "program")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = EdtcParams::from(&prog.params);
        Ok(())
    })
}

/// Cycle count given by the program's `repeat` directive; 0 for a null handle.
///
/// # Safety
/// `program` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn edtc_program_cycles(program: *const EdtcProgram) -> u64 {
    program.as_ref().map_or(0, |p| p.sequence.cycles())
}

/// Drive period `T`; 0 for a null handle.
///
/// # Safety
/// `program` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn edtc_program_period(program: *const EdtcProgram) -> f64 {
    program.as_ref().map_or(0.0, |p| p.sequence.period())
}

/// Evolves the program for `cycles` periods (`cycles < 0` uses the program's
/// own count). Relaxation during pulses is enabled by `dissipative_pulse`.
///
/// # Safety
/// `program` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn edtc_simulate(
    program: *const EdtcProgram,
    cycles: i64,
    dissipative_pulse: bool,
    out: *mut *mut EdtcSeries,
) -> EdtcStatus {
    guard(|| {
        let prog = deref(program, "program")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let n = u64::try_from(cycles).unwrap_or(prog.sequence.cycles());
        let series =
            evolve_with(&prog.params, &prog.sequence, n, &EvolveOptions { dissipative_pulse }).map_err(lib_err)?;
        write_out(out, EdtcSeries { series });
        Ok(())
    })
}

/// # Safety
/// `series` must come from [`edtc_simulate`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn edtc_series_free(series: *mut EdtcSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// Number of samples; 0 for a null handle.
///
/// # Safety
/// `series` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn edtc_series_len(series: *const EdtcSeries) -> usize {
    series.as_ref().map_or(0, |s| s.series.len())
}

/// Copies sample times and magnetization components. Any output pointer may
/// be null to skip that column; non-null ones must hold `len` values.
///
/// # Safety
/// `series` must be a live handle; each non-null buffer must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn edtc_series_copy(
    series: *const EdtcSeries,
    t: *mut f64,
    mx: *mut f64,
    my: *mut f64,
    mz: *mut f64,
    len: usize,
) -> EdtcStatus {
    guard(|| {
        let s = &deref(series, "series")?.series.samples;
        fill(t, len, s.iter().map(|x| x.t))?;
        fill(mx, len, s.iter().map(|x| x.m.mx))?;
        fill(my, len, s.iter().map(|x| x.m.my))?;
        fill(mz, len, s.iter().map(|x| x.m.mz))?;
        Ok(())
    })
}

/// Scalar results of a spectrum. `fwhm` and `peak_nu` are NaN when
/// `has_peak` is false.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct EdtcSpectrumSummary {
    pub samples: usize,
    pub pad: usize,
    pub window_bins: usize,
    pub bin_width: f64,
    pub f: f64,
    pub has_peak: bool,
    pub fwhm: f64,
    pub peak_nu: f64,
}

fn spectrum_handle(mz: &[f64], pad: usize, window_bins: usize) -> Outcome<EdtcSpectrum> {
    let pad = if pad == 0 { default_pad(mz.len()) } else { pad };
    Ok(EdtcSpectrum { spec: spectrum_of(mz, pad, window_bins).map_err(lib_err)? })
}

/// Spectrum of a simulated series. `pad = 0` picks the default padding.
///
/// # Safety
/// `series` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn edtc_spectrum(
    series: *const EdtcSeries,
    pad: usize,
    window_bins: usize,
    out: *mut *mut EdtcSpectrum,
) -> EdtcStatus {
    guard(|| {
        let s = deref(series, "series")?;
        if out.is_null() {
            return Err(null("out"));
        }
        write_out(out, spectrum_handle(&s.series.mz(), pad, window_bins)?);
        Ok(())
    })
}

/// Spectrum of caller-supplied `Mz` values.
///
/// # Safety
/// `mz` must point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn edtc_spectrum_of_values(
    mz: *const f64,
    n: usize,
    pad: usize,
    window_bins: usize,
    out: *mut *mut EdtcSpectrum,
) -> EdtcStatus {
    guard(|| {
        if mz.is_null() {
            return Err(null("mz"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let values = std::slice::from_raw_parts(mz, n);
        write_out(out, spectrum_handle(values, pad, window_bins)?);
        Ok(())
    })
}

/// # Safety
/// `spectrum` must come from an `edtc_spectrum*` call and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn edtc_spectrum_free(spectrum: *mut EdtcSpectrum) {
    if !spectrum.is_null() {
        drop(Box::from_raw(spectrum));
    }
}

/// Number of frequency bins (the padded length); 0 for a null handle.
///
/// # Safety
/// `spectrum` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn edtc_spectrum_len(spectrum: *const EdtcSpectrum) -> usize {
    spectrum.as_ref().map_or(0, |s| s.spec.pad)
}

/// # Safety
/// `spectrum` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn edtc_spectrum_summary(
    spectrum: *const EdtcSpectrum,
    out: *mut EdtcSpectrumSummary,
) -> EdtcStatus {
    guard(|| {
        let s = &deref(spectrum, "spectrum")?.spec;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = EdtcSpectrumSummary {
            samples: s.samples,
            pad: s.pad,
            window_bins: s.window_bins,
            bin_width: s.bin_width(),
            f: s.f,
            has_peak: s.fwhm.is_some(),
            fwhm: s.fwhm.unwrap_or(f64::NAN),
            peak_nu: s.peak_nu.unwrap_or(f64::NAN),
        };
        Ok(())
    })
}

/// Copies the frequency grid, complex amplitudes and power. Null outputs are
/// skipped; non-null ones must hold `len` values.
///
/// # Safety
/// `spectrum` must be a live handle; each non-null buffer must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn edtc_spectrum_copy(
    spectrum: *const EdtcSpectrum,
    nu: *mut f64,
    re: *mut f64,
    im: *mut f64,
    power: *mut f64,
    len: usize,
) -> EdtcStatus {
    guard(|| {
        let s = &deref(spectrum, "spectrum")?.spec;
        fill(nu, len, s.nu.iter().copied())?;
        fill(re, len, s.amp.iter().map(|a| a.re))?;
        fill(im, len, s.amp.iter().map(|a| a.im))?;
        fill(power, len, s.power.iter().copied())?;
        Ok(())
    })
}

/// Least-squares fit of `y = a·d^λ + b`. `covariance` is row-major.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct EdtcPowerLawFit {
    pub a: f64,
    pub lambda: f64,
    pub b: f64,
    pub residual: f64,
    pub covariance: [f64; 9],
    pub iterations: usize,
    pub gradient_norm: f64,
}

/// Fits `n` points `(d[i], y[i])`; needs `n >= 4` and `d > 0`.
///
/// # Safety
/// `d` and `y` must point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn edtc_fit_power_law(
    d: *const f64,
    y: *const f64,
    n: usize,
    out: *mut EdtcPowerLawFit,
) -> EdtcStatus {
    guard(|| {
        if d.is_null() || y.is_null() {
            return Err(null("d/y"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let d = std::slice::from_raw_parts(d, n);
        let y = std::slice::from_raw_parts(y, n);
        let points: Vec<(f64, f64)> = d.iter().copied().zip(y.iter().copied()).collect();
        let fit = fit_power_law(&points).map_err(lib_err)?;
        let mut covariance = [0.0; 9];
        for (i, row) in fit.covariance.iter().enumerate() {
            covariance[3 * i..3 * i + 3].copy_from_slice(row);
        }
        *out = EdtcPowerLawFit {
            a: fit.a,
            lambda: fit.lambda,
            b: fit.b,
            residual: fit.residual,
            covariance,
            iterations: fit.iterations,
            gradient_norm: fit.gradient_norm,
        };
        Ok(())
    })
}
