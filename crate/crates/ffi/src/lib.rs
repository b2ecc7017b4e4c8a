//! C ABI for `hillmap`.
//!
//! Objects cross the boundary as opaque handles created by `hm_*_new` or
//! `hm_*_compute` functions and released with the matching `hm_*_free`.
//! Every function returns an [`HmStatus`]; on failure the message is
//! available from [`hm_last_error_message`] on the same thread.

use hillmap::ensemble::{convergence_experiment, EnsembleReport, InitialDistribution};
use hillmap::hill::{monodromy, spectrum_bands, BandList, Potential};
use hillmap::lyapunov::{average_lyapunov_quadrature, i_integral};
use hillmap::maps::{eval_map, gen_logistic_coeffs, MapDescriptor};
use hillmap::numerics::ToleranceSpec;
use hillmap::transfer::{l1_distance, pushforward_fold, pushforward_tent, StepDensity};
use hillmap::Error;
use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HmStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    InvalidArgument = 3,
    Config = 4,
    Singular = 5,
    Escape = 6,
    NonConvergence = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Distribution of the initial ensemble.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HmDistribution {
    /// Γ(1,1) - 2, truncated to [-2, 2] by rejection.
    ShiftedGamma = 0,
    /// Uniform on [-2, 2].
    Uniform = 1,
}

/// A periodic potential.
pub struct HmPotential(Potential);

/// Spectral bands of a potential.
pub struct HmBandList(BandList);

/// A piecewise-constant density.
pub struct HmStepDensity(StepDensity);

/// Result of a Monte Carlo convergence experiment.
pub struct HmEnsembleReport(EnsembleReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> HmStatus {
    match e {
        Error::Domain(_) => HmStatus::Domain,
        Error::InvalidArgument(_) | Error::InvalidBracket { .. } | Error::NotBoundedVariation(_) => {
            HmStatus::InvalidArgument
        }
        Error::Config(_) => HmStatus::Config,
        Error::Singular(_) => HmStatus::Singular,
        Error::Escape { .. } => HmStatus::Escape,
        Error::IvpNonConvergence { .. }
        | Error::QuadNonConvergence { .. }
        | Error::RootNonConvergence { .. }
        | Error::Numerical(_) => HmStatus::NonConvergence,
    }
}

/// Runs `f`, translating library errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), (HmStatus, String)>>(f: F) -> HmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HmStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            HmStatus::Panic
        }
    }
}

trait IntoFfi<T> {
    fn ffi(self) -> Result<T, (HmStatus, String)>;
}

impl<T> IntoFfi<T> for hillmap::Result<T> {
    fn ffi(self) -> Result<T, (HmStatus, String)> {
        self.map_err(|e| (status_of(&e), e.to_string()))
    }
}

fn null(what: &str) -> (HmStatus, String) {
    (HmStatus::NullPointer, format!("{what} is null"))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (HmStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (HmStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], (HmStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Copies `data` into `buf` (capacity `cap`), always reporting the full
/// length through `written`.
unsafe fn fill(data: &[f64], buf: *mut f64, cap: usize, written: *mut usize) -> Result<(), (HmStatus, String)> {
    *out(written, "written")? = data.len();
    if cap < data.len() {
        return Err((HmStatus::BufferTooSmall, format!("buffer holds {cap} values, {} needed", data.len())));
    }
    if !data.is_empty() {
        if buf.is_null() {
            return Err(null("buffer"));
        }
        std::ptr::copy_nonoverlapping(data.as_ptr(), buf, data.len());
    }
    Ok(())
}

/// Copies the last error message of this thread into `buf` as a
/// NUL-terminated string, truncating to `cap` bytes. Returns the length of
/// the full message, or 0 if there is none.
///
/// # Safety
/// `buf` must be valid for `cap` bytes or null with `cap == 0`.
#[no_mangle]
pub unsafe extern "C" fn hm_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else {
            if !buf.is_null() && cap > 0 {
                *buf = 0;
            }
            return 0;
        };
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// V = 0 with period 1.
///
/// # Safety
/// `result` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hm_potential_free_new(result: *mut *mut HmPotential) -> HmStatus {
    guard(|| {
        *out(result, "result")? = Box::into_raw(Box::new(HmPotential(Potential::free())));
        Ok(())
    })
}

/// V = a with period 1.
///
/// # Safety
/// `result` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hm_potential_constant_new(a: f64, result: *mut *mut HmPotential) -> HmStatus {
    guard(|| {
        *out(result, "result")? = Box::into_raw(Box::new(HmPotential(Potential::constant(a))));
        Ok(())
    })
}

/// V = amplitude·cos(frequency·x) with period 2π/frequency.
///
/// # Safety
/// `result` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hm_potential_cosine_new(
    amplitude: f64,
    frequency: f64,
    result: *mut *mut HmPotential,
) -> HmStatus {
    guard(|| {
        let v = Potential::cosine(amplitude, frequency).ffi()?;
        *out(result, "result")? = Box::into_raw(Box::new(HmPotential(v)));
        Ok(())
    })
}

/// V = cos(2πx) with period 1.
///
/// # Safety
/// `result` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hm_potential_mathieu_new(result: *mut *mut HmPotential) -> HmStatus {
    guard(|| {
        *out(result, "result")? = Box::into_raw(Box::new(HmPotential(Potential::mathieu())));
        Ok(())
    })
}

/// # Safety
/// `p` must come from an `hm_potential_*_new` call and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hm_potential_free(p: *mut HmPotential) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Monodromy over `[0, l]` at `lambda`, row-major into `entries[4]`.
///
/// # Safety
/// `v` must be a live handle and `entries` valid for 4 doubles.
#[no_mangle]
pub unsafe extern "C" fn hm_monodromy(v: *const HmPotential, l: f64, lambda: f64, entries: *mut f64) -> HmStatus {
    guard(|| {
        let v = handle(v, "potential")?;
        if entries.is_null() {
            return Err(null("entries"));
        }
        let m = monodromy(&v.0, l, lambda, &ToleranceSpec::ivp()).ffi()?;
        let flat = [m.entries[0][0], m.entries[0][1], m.entries[1][0], m.entries[1][1]];
        std::ptr::copy_nonoverlapping(flat.as_ptr(), entries, 4);
        Ok(())
    })
}

/// Δ_l(λ), the trace of the monodromy.
///
/// # Safety
/// `v` must be a live handle and `result` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hm_discriminant(v: *const HmPotential, l: f64, lambda: f64, result: *mut f64) -> HmStatus {
    guard(|| {
        let v = handle(v, "potential")?;
        let m = monodromy(&v.0, l, lambda, &ToleranceSpec::ivp()).ffi()?;
        *out(result, "result")? = m.trace();
        Ok(())
    })
}

/// Bands of `v` below `lambda_max` for cell length `l`.
///
/// # Safety
/// `v` must be a live handle and `result` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hm_bands_compute(
    v: *const HmPotential,
    l: f64,
    lambda_max: f64,
    result: *mut *mut HmBandList,
) -> HmStatus {
    guard(|| {
        let v = handle(v, "potential")?;
        let bands = spectrum_bands(&v.0, l, lambda_max, &ToleranceSpec::ivp()).ffi()?;
        *out(result, "result")? = Box::into_raw(Box::new(HmBandList(bands)));
        Ok(())
    })
}

/// Number of bands.
///
/// # Safety
/// `b` must be a live handle and `len` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hm_bands_len(b: *const HmBandList, len: *mut usize) -> HmStatus {
    guard(|| {
        *out(len, "len")? = handle(b, "band list")?.0.bands.len();
        Ok(())
    })
}

/// Edges of band `index`.
///
/// # Safety
/// `b` must be a live handle; `lower` and `upper` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn hm_bands_get(
    b: *const HmBandList,
    index: usize,
    lower: *mut f64,
    upper: *mut f64,
) -> HmStatus {
    guard(|| {
        let b = handle(b, "band list")?;
        let band = b.0.bands.get(index).ok_or_else(|| {
            (HmStatus::InvalidArgument, format!("band index {index} out of range ({} bands)", b.0.bands.len()))
        })?;
        *out(lower, "lower")? = band.lower;
        *out(upper, "upper")? = band.upper;
        Ok(())
    })
}

/// # Safety
/// `b` must come from [`hm_bands_compute`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hm_bands_free(b: *mut HmBandList) {
    if !b.is_null() {
        drop(Box::from_raw(b));
    }
}

/// Step density with `n_values + 1` edges and `n_values` nonnegative values.
///
/// # Safety
/// `edges` must hold `n_values + 1` doubles, `values` `n_values`, and
/// `result` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hm_step_density_new(
    edges: *const f64,
    values: *const f64,
    n_values: usize,
    result: *mut *mut HmStepDensity,
) -> HmStatus {
    guard(|| {
        let e = slice(edges, n_values + 1, "edges")?.to_vec();
        let v = slice(values, n_values, "values")?.to_vec();
        let p = StepDensity::new(e, v).ffi()?;
        *out(result, "result")? = Box::into_raw(Box::new(HmStepDensity(p)));
        Ok(())
    })
}

/// # Safety
/// `p` must be a live handle and `mass` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hm_step_density_mass(p: *const HmStepDensity, mass: *mut f64) -> HmStatus {
    guard(|| {
        *out(mass, "mass")? = handle(p, "density")?.0.mass();
        Ok(())
    })
}

/// Number of cells.
///
/// # Safety
/// `p` must be a live handle and `len` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hm_step_density_len(p: *const HmStepDensity, len: *mut usize) -> HmStatus {
    guard(|| {
        *out(len, "len")? = handle(p, "density")?.0.values().len();
        Ok(())
    })
}

/// Copies the cell edges (one more than the cells) into `buf`.
///
/// # Safety
/// `p` must be a live handle, `buf` valid for `cap` doubles, `written` valid.
#[no_mangle]
pub unsafe extern "C" fn hm_step_density_edges(
    p: *const HmStepDensity,
    buf: *mut f64,
    cap: usize,
    written: *mut usize,
) -> HmStatus {
    guard(|| fill(handle(p, "density")?.0.edges(), buf, cap, written))
}

/// Copies the cell values into `buf`.
///
/// # Safety
/// `p` must be a live handle, `buf` valid for `cap` doubles, `written` valid.
#[no_mangle]
pub unsafe extern "C" fn hm_step_density_values(
    p: *const HmStepDensity,
    buf: *mut f64,
    cap: usize,
    written: *mut usize,
) -> HmStatus {
    guard(|| fill(handle(p, "density")?.0.values(), buf, cap, written))
}

/// Image of `p` (on [0, 1]) under the tent map g_m; a new handle.
///
/// # Safety
/// `p` must be a live handle and `result` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hm_pushforward_tent(
    p: *const HmStepDensity,
    m: u32,
    result: *mut *mut HmStepDensity,
) -> HmStatus {
    guard(|| {
        let q = pushforward_tent(&handle(p, "density")?.0, m).ffi()?;
        *out(result, "result")? = Box::into_raw(Box::new(HmStepDensity(q)));
        Ok(())
    })
}

/// Image of `p` (on [0, ∞)) under the fold K_l; a new handle.
///
/// # Safety
/// `p` must be a live handle and `result` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hm_pushforward_fold(
    p: *const HmStepDensity,
    l: u32,
    result: *mut *mut HmStepDensity,
) -> HmStatus {
    guard(|| {
        let q = pushforward_fold(&handle(p, "density")?.0, l).ffi()?;
        *out(result, "result")? = Box::into_raw(Box::new(HmStepDensity(q)));
        Ok(())
    })
}

/// ∫|p - q| over a common domain.
///
/// # Safety
/// `p`, `q` must be live handles and `distance` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hm_l1_distance(
    p: *const HmStepDensity,
    q: *const HmStepDensity,
    distance: *mut f64,
) -> HmStatus {
    guard(|| {
        *out(distance, "distance")? = l1_distance(&handle(p, "p")?.0, &handle(q, "q")?.0).ffi()?;
        Ok(())
    })
}

/// # Safety
/// `p` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hm_step_density_free(p: *mut HmStepDensity) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Iterates f_m over `n_samples` draws for `n_iters` steps.
///
/// # Safety
/// `result` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hm_ensemble_run(
    m: u32,
    distribution: HmDistribution,
    n_samples: usize,
    n_iters: usize,
    seed: u64,
    result: *mut *mut HmEnsembleReport,
) -> HmStatus {
    guard(|| {
        let dist = match distribution {
            HmDistribution::ShiftedGamma => InitialDistribution::shifted_gamma(1.0, 1.0, -2.0),
            HmDistribution::Uniform => InitialDistribution::uniform(-2.0, 2.0),
        };
        let r = convergence_experiment(m, &dist, n_samples, n_iters, seed).ffi()?;
        *out(result, "result")? = Box::into_raw(Box::new(HmEnsembleReport(r)));
        Ok(())
    })
}

/// Wasserstein-1 distances for iterations `0..=n_iters`.
///
/// # Safety
/// `r` must be a live handle, `buf` valid for `cap` doubles, `written` valid.
#[no_mangle]
pub unsafe extern "C" fn hm_ensemble_distances(
    r: *const HmEnsembleReport,
    buf: *mut f64,
    cap: usize,
    written: *mut usize,
) -> HmStatus {
    guard(|| fill(&handle(r, "report")?.0.distances, buf, cap, written))
}

/// Fitted slope of log W₁; `has_slope` is 0 when no fit was made.
///
/// # Safety
/// `r` must be a live handle; `slope` and `has_slope` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn hm_ensemble_slope(
    r: *const HmEnsembleReport,
    slope: *mut f64,
    has_slope: *mut bool,
) -> HmStatus {
    guard(|| {
        let s = handle(r, "report")?.0.fitted_slope;
        *out(has_slope, "has_slope")? = s.is_some();
        *out(slope, "slope")? = s.unwrap_or(f64::NAN);
        Ok(())
    })
}

/// # Safety
/// `r` must come from [`hm_ensemble_run`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hm_ensemble_free(r: *mut HmEnsembleReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// f_m(x) for x in [-2, 2].
///
/// # Safety
/// `result` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hm_gen_logistic(m: u32, x: f64, result: *mut f64) -> HmStatus {
    guard(|| {
        let map = MapDescriptor::gen_logistic(m).ffi()?;
        *out(result, "result")? = eval_map(&map, x).ffi()?;
        Ok(())
    })
}

/// The m + 1 coefficients of f_m, highest degree first.
///
/// # Safety
/// `buf` must be valid for `cap` doubles and `written` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hm_gen_logistic_coeffs(m: u32, buf: *mut f64, cap: usize, written: *mut usize) -> HmStatus {
    guard(|| fill(&gen_logistic_coeffs(m).coefficients, buf, cap, written))
}

/// ∫ log|f_m'| D over [-2, 2].
///
/// # Safety
/// `result` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hm_lyapunov_quadrature(m: u32, result: *mut f64) -> HmStatus {
    guard(|| {
        *out(result, "result")? = average_lyapunov_quadrature(m, &ToleranceSpec::quad()).ffi()?.value;
        Ok(())
    })
}

/// I(a) = (1/π) ∫ log|2 sin y - a| dy over [-π/2, π/2].
///
/// # Safety
/// `result` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hm_i_integral(a: f64, result: *mut f64) -> HmStatus {
    guard(|| {
        *out(result, "result")? = i_integral(a, &ToleranceSpec::quad()).ffi()?;
        Ok(())
    })
}
