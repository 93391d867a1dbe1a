//! C ABI for coda-dfm.
//!
//! Objects cross the boundary as opaque handles that the caller frees with
//! the matching `*_free` function. Every fallible call returns a
//! [`CdfmStatus`]; on failure the message is available from
//! [`cdfm_last_error_message`] on the same thread until the next failing
//! call. Panics are caught and reported as [`CdfmStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::io::BufReader;
use std::panic::{catch_unwind, AssertUnwindSafe};

use libc::c_char;

use coda_dfm::coda::{clr_curve, inverse_clr};
use coda_dfm::dfm::{fit_dfm, DfmConfig, DfmFit};
use coda_dfm::evaluation::{count_outside, CoverageCount};
use coda_dfm::forecast::{assemble_forecast, BootstrapConfig, BootstrapForecast};
use coda_dfm::lifetable::{gini_coefficient, parse_lifetable, rebuild_deaths, LifeTableGrid, Sex, DEFAULT_RADIX};
use coda_dfm::quadrature::Quadrature;
use coda_dfm::synth::synth_fixture;
use coda_dfm::Error;
use nalgebra::DVector;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CdfmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Schema = 4,
    Domain = 5,
    Incomplete = 6,
    Degenerate = 7,
    InsufficientData = 8,
    Rank = 9,
    Shape = 10,
    Pool = 11,
    Range = 12,
    Config = 13,
    Io = 14,
    Panic = 15,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CdfmSex {
    Female = 0,
    Male = 1,
    Total = 2,
}

impl From<CdfmSex> for Sex {
    fn from(s: CdfmSex) -> Self {
        match s {
            CdfmSex::Female => Sex::Female,
            CdfmSex::Male => Sex::Male,
            CdfmSex::Total => Sex::Total,
        }
    }
}

/// Years × ages matrix of life-table death counts.
pub struct CdfmGrid {
    inner: LifeTableGrid,
}

/// A fitted two-stage dynamic factor model.
pub struct CdfmFit {
    inner: DfmFit,
}

/// Bootstrap samples and pointwise bands at one horizon.
pub struct CdfmForecast {
    inner: BootstrapForecast,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure {
    status: CdfmStatus,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Parse { .. } => CdfmStatus::Parse,
            Error::Schema(_) => CdfmStatus::Schema,
            Error::Domain(_) => CdfmStatus::Domain,
            Error::Incomplete { .. } => CdfmStatus::Incomplete,
            Error::Degenerate(_) => CdfmStatus::Degenerate,
            Error::InsufficientData { .. } => CdfmStatus::InsufficientData,
            Error::Rank { .. } => CdfmStatus::Rank,
            Error::Shape(_) | Error::LagRange { .. } => CdfmStatus::Shape,
            Error::Pool(_) => CdfmStatus::Pool,
            Error::Range(_) => CdfmStatus::Range,
            Error::Config(_) => CdfmStatus::Config,
            Error::Io { .. } => CdfmStatus::Io,
        };
        Failure {
            status,
            message: format!("kind={} {e}", e.kind()),
        }
    }
}

fn null(what: &str) -> Failure {
    Failure {
        status: CdfmStatus::NullPointer,
        message: format!("{what} is null"),
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        status: CdfmStatus::InvalidArgument,
        message: message.into(),
    }
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = c);
}

fn guard<F>(f: F) -> CdfmStatus
where
    F: FnOnce() -> Result<(), Failure>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CdfmStatus::Ok,
        Ok(Err(failure)) => {
            set_last_error(&failure.message);
            failure.status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(&format!("panic: {msg}"));
            CdfmStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn string<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn emit<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

fn expect_len(len: usize, needed: usize, what: &str) -> Result<(), Failure> {
    if len < needed {
        Err(invalid(format!("{what} holds {len} values, {needed} needed")))
    } else {
        Ok(())
    }
}

/// Message of the most recent failure on this thread, or an empty string.
/// The pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn cdfm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cdfm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Read a life-table file and rebuild its death counts (radix 100000).
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cdfm_grid_load(path: *const c_char, sex: CdfmSex, out: *mut *mut CdfmGrid) -> CdfmStatus {
    guard(|| {
        let path = string(path, "path")?;
        let file = std::fs::File::open(path).map_err(|e| Failure::from(Error::Io { path: path.into(), source: e }))?;
        let rows = parse_lifetable(BufReader::new(file), sex.into())?;
        emit(out, CdfmGrid { inner: rebuild_deaths(&rows, DEFAULT_RADIX)? })
    })
}

/// Parse life-table text held in memory.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cdfm_grid_parse(text: *const c_char, sex: CdfmSex, out: *mut *mut CdfmGrid) -> CdfmStatus {
    guard(|| {
        let text = string(text, "text")?;
        let rows = parse_lifetable(text.as_bytes(), sex.into())?;
        emit(out, CdfmGrid { inner: rebuild_deaths(&rows, DEFAULT_RADIX)? })
    })
}

/// Seeded synthetic grid with `years` years (at least 10).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cdfm_grid_synthetic(years: usize, seed: u64, out: *mut *mut CdfmGrid) -> CdfmStatus {
    guard(|| emit(out, CdfmGrid { inner: synth_fixture(years, seed)? }))
}

/// # Safety
/// `grid` must be null or a handle from a `cdfm_grid_*` constructor that has
/// not been freed.
#[no_mangle]
pub unsafe extern "C" fn cdfm_grid_free(grid: *mut CdfmGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// # Safety
/// `grid` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cdfm_grid_n_years(grid: *const CdfmGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.inner.n_years())
}

/// # Safety
/// `grid` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cdfm_grid_n_ages(grid: *const CdfmGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.inner.n_ages())
}

/// Copy the calendar years into `years[0..n_years]`.
///
/// # Safety
/// `grid` must be a live handle; `years` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn cdfm_grid_copy_years(grid: *const CdfmGrid, years: *mut i32, len: usize) -> CdfmStatus {
    guard(|| {
        let g = &handle(grid, "grid")?.inner;
        expect_len(len, g.n_years(), "years")?;
        slice_mut(years, len, "years")?[..g.n_years()].copy_from_slice(&g.years);
        Ok(())
    })
}

/// Copy the death counts row-major (year by year) into `deaths`.
///
/// # Safety
/// `grid` must be a live handle; `deaths` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn cdfm_grid_copy_deaths(grid: *const CdfmGrid, deaths: *mut f64, len: usize) -> CdfmStatus {
    guard(|| {
        let g = &handle(grid, "grid")?.inner;
        let (n, d) = g.deaths.shape();
        expect_len(len, n * d, "deaths")?;
        let buf = slice_mut(deaths, len, "deaths")?;
        for t in 0..n {
            for u in 0..d {
                buf[t * d + u] = g.deaths[(t, u)];
            }
        }
        Ok(())
    })
}

/// Discrete Gini coefficient of one year's counts.
///
/// # Safety
/// `counts` must hold `len` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cdfm_gini(counts: *const f64, len: usize, out: *mut f64) -> CdfmStatus {
    guard(|| {
        let counts = slice(counts, len, "counts")?;
        let g = gini_coefficient(counts)?;
        *out.as_mut().ok_or_else(|| null("out"))? = g;
        Ok(())
    })
}

/// Centered log-ratio transform on a unit-spaced grid.
///
/// # Safety
/// `counts` and `out` must each hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn cdfm_clr(counts: *const f64, len: usize, out: *mut f64) -> CdfmStatus {
    guard(|| {
        let counts = slice(counts, len, "counts")?;
        let curve = clr_curve(counts, &Quadrature::trapezoid(len))?;
        slice_mut(out, len, "out")?.copy_from_slice(&curve);
        Ok(())
    })
}

/// Back-transform a clr curve to counts summing to `radix`.
///
/// # Safety
/// `curve` and `out` must each hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn cdfm_inverse_clr(curve: *const f64, len: usize, radix: f64, out: *mut f64) -> CdfmStatus {
    guard(|| {
        let curve = slice(curve, len, "curve")?;
        if !(radix > 0.0) {
            return Err(invalid("radix must be positive"));
        }
        let counts = inverse_clr(curve, radix)?;
        slice_mut(out, len, "out")?.copy_from_slice(&counts);
        Ok(())
    })
}

/// Fit the two-stage model to the clr curves of `grid`. A nonpositive
/// `bandwidth` selects the default rule.
///
/// # Safety
/// `grid` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cdfm_fit_dfm(
    grid: *const CdfmGrid,
    r: usize,
    residual_components: usize,
    force_second_stage: bool,
    bandwidth: f64,
    out: *mut *mut CdfmFit,
) -> CdfmStatus {
    guard(|| {
        let g = &handle(grid, "grid")?.inner;
        let series = coda_dfm::coda::clr(g)?;
        let mut config = DfmConfig::new(r, residual_components);
        config.force_second_stage = force_second_stage;
        config.bandwidth = (bandwidth > 0.0).then_some(bandwidth);
        emit(out, CdfmFit { inner: fit_dfm(&series, &config)? })
    })
}

/// # Safety
/// `fit` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cdfm_fit_free(fit: *mut CdfmFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

/// Total retained components `N̂` (primary plus residual stage).
///
/// # Safety
/// `fit` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cdfm_fit_n_components(fit: *const CdfmFit) -> usize {
    fit.as_ref().map_or(0, |f| f.inner.n_hat)
}

/// # Safety
/// `fit` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cdfm_fit_second_stage(fit: *const CdfmFit) -> bool {
    fit.as_ref().is_some_and(|f| f.inner.second_stage)
}

/// Bootstrap forecast at one horizon with the default score forecasters.
///
/// # Safety
/// `fit` must be a live handle; `levels` must hold `n_levels` values in
/// (0, 1); `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cdfm_forecast(
    fit: *const CdfmFit,
    horizon: usize,
    replications: usize,
    levels: *const f64,
    n_levels: usize,
    seed: u64,
    out: *mut *mut CdfmForecast,
) -> CdfmStatus {
    guard(|| {
        let f = &handle(fit, "fit")?.inner;
        let config = BootstrapConfig {
            replications,
            levels: slice(levels, n_levels, "levels")?.to_vec(),
            ..BootstrapConfig::default()
        };
        emit(out, CdfmForecast { inner: assemble_forecast(f, &config, horizon, seed)? })
    })
}

/// # Safety
/// `forecast` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cdfm_forecast_free(forecast: *mut CdfmForecast) {
    if !forecast.is_null() {
        drop(Box::from_raw(forecast));
    }
}

/// # Safety
/// `forecast` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cdfm_forecast_n_ages(forecast: *const CdfmForecast) -> usize {
    forecast.as_ref().map_or(0, |f| f.inner.point.len())
}

/// # Safety
/// `forecast` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cdfm_forecast_replications(forecast: *const CdfmForecast) -> usize {
    forecast.as_ref().map_or(0, |f| f.inner.replications())
}

/// Copy the point forecast into `point`.
///
/// # Safety
/// `forecast` must be a live handle; `point` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn cdfm_forecast_copy_point(forecast: *const CdfmForecast, point: *mut f64, len: usize) -> CdfmStatus {
    guard(|| {
        let f = &handle(forecast, "forecast")?.inner;
        let d = f.point.len();
        expect_len(len, d, "point")?;
        slice_mut(point, len, "point")?[..d].copy_from_slice(f.point.as_slice());
        Ok(())
    })
}

/// Copy the band for `levels[level_index]` into `lower` and `upper`.
///
/// # Safety
/// `forecast` must be a live handle; `lower` and `upper` must hold `len`
/// values.
#[no_mangle]
pub unsafe extern "C" fn cdfm_forecast_copy_band(
    forecast: *const CdfmForecast,
    level_index: usize,
    lower: *mut f64,
    upper: *mut f64,
    len: usize,
) -> CdfmStatus {
    guard(|| {
        let f = &handle(forecast, "forecast")?.inner;
        let band = f
            .bands
            .get(level_index)
            .ok_or_else(|| invalid(format!("level index {level_index} out of range")))?;
        let d = band.lower.len();
        expect_len(len, d, "band")?;
        slice_mut(lower, len, "lower")?[..d].copy_from_slice(band.lower.as_slice());
        slice_mut(upper, len, "upper")?[..d].copy_from_slice(band.upper.as_slice());
        Ok(())
    })
}

/// Copy the `B × D` samples row-major (replicate by replicate).
///
/// # Safety
/// `forecast` must be a live handle; `samples` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn cdfm_forecast_copy_samples(forecast: *const CdfmForecast, samples: *mut f64, len: usize) -> CdfmStatus {
    guard(|| {
        let f = &handle(forecast, "forecast")?.inner;
        let (b, d) = f.samples.shape();
        expect_len(len, b * d, "samples")?;
        let buf = slice_mut(samples, len, "samples")?;
        for i in 0..b {
            for u in 0..d {
                buf[i * d + u] = f.samples[(i, u)];
            }
        }
        Ok(())
    })
}

/// Empirical coverage of `windows` holdout curves of `ages` values each,
/// stored row-major alongside their bounds. Values on a bound are covered.
///
/// # Safety
/// `holdouts`, `lower` and `upper` must each hold `windows * ages` values;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cdfm_ecp(
    holdouts: *const f64,
    lower: *const f64,
    upper: *const f64,
    windows: usize,
    ages: usize,
    out: *mut f64,
) -> CdfmStatus {
    guard(|| {
        if windows == 0 || ages == 0 {
            return Err(invalid("at least one window and one age are required"));
        }
        let len = windows.checked_mul(ages).ok_or_else(|| invalid("size overflow"))?;
        let (h, lo, hi) = (
            slice(holdouts, len, "holdouts")?,
            slice(lower, len, "lower")?,
            slice(upper, len, "upper")?,
        );
        let mut count = CoverageCount::default();
        for w in 0..windows {
            let span = w * ages..(w + 1) * ages;
            count.add(count_outside(
                &DVector::from_column_slice(&h[span.clone()]),
                &DVector::from_column_slice(&lo[span.clone()]),
                &DVector::from_column_slice(&hi[span]),
            )?);
        }
        *out.as_mut().ok_or_else(|| null("out"))? = count.ecp();
        Ok(())
    })
}
