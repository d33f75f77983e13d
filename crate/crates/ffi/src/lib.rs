//! C interface to `laguerre_hypergroup`.
//!
//! Every function returns an [`LhgStatus`]; results go through out-pointers.
//! Grid and spectral functions are opaque handles owned by the caller and
//! released with the matching `_free` function. On failure the message is
//! available from [`lhg_last_error`] on the same thread.

use laguerre_hypergroup::fixtures::Fixture;
use laguerre_hypergroup::grid::{GridFunction, SpectralGrid, SpectralLayout};
use laguerre_hypergroup::heat::{heat_kernel_eval, HeatParams};
use laguerre_hypergroup::hypergroup::PointK;
use laguerre_hypergroup::miyachi::{default_lambda_samples, miyachi_certificate, Conclusion, MiyachiParams, DEFAULT_R_LADDER};
use laguerre_hypergroup::special::{bessel_j, laguerre_function, LaguerreIndex};
use laguerre_hypergroup::transforms::{fourier_laguerre_forward, fourier_laguerre_inverse, plancherel_norms};
use laguerre_hypergroup::{io, Error};
use num_complex::Complex64;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

/// Status codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LhgStatus {
    Ok = 0,
    /// A required pointer was null.
    NullArgument = 1,
    /// A parameter is outside its domain, or an argument string is malformed.
    InvalidArgument = 2,
    /// An index is past the end of a handle.
    OutOfBounds = 3,
    /// Grids do not fit together, or an argument leaves a grid.
    GridMismatch = 4,
    /// A quadrature, series or transform did not meet its accuracy test.
    Numerical = 5,
    /// Reading or writing a file failed.
    Io = 6,
    /// The library panicked; this is a bug.
    Panic = 7,
}

/// Outcome of [`lhg_miyachi_certificate`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LhgConclusion {
    MustVanish = 0,
    HypothesesNotMet = 1,
    Inconclusive = 2,
}

/// Samples on a radial-by-time grid.
pub struct LhgGridFunction(GridFunction);

/// Coefficients on a frequency-by-degree grid.
pub struct LhgSpectralFunction(laguerre_hypergroup::grid::SpectralFunction);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> LhgStatus {
    match e {
        Error::Domain(_) | Error::Config(_) | Error::Parse(_) | Error::StripViolation { .. } => LhgStatus::InvalidArgument,
        Error::GridMismatch(_) | Error::OutOfRange(_) => LhgStatus::GridMismatch,
        Error::Io(_) | Error::Json(_) => LhgStatus::Io,
        Error::ConvergenceFailure { .. }
        | Error::NonFinite { .. }
        | Error::Truncation { .. }
        | Error::Divergence { .. }
        | Error::Growth(_)
        | Error::Positivity { .. }
        | Error::FitResidual { .. } => LhgStatus::Numerical,
    }
}

struct Fail(LhgStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(LhgStatus::NullArgument, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status.
fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> LhgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LhgStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            LhgStatus::Panic
        }
    }
}

/// # Safety
/// `p` is null or valid for writes of `T`.
unsafe fn write_out<T>(p: *mut T, v: T, what: &str) -> Result<(), Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(v);
    Ok(())
}

/// # Safety
/// `p` is null or a NUL-terminated string.
unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, Fail> {
    if p.is_null() {
        return Err(null("path"));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(LhgStatus::InvalidArgument, "path is not UTF-8".into()))?;
    Ok(PathBuf::from(s))
}

/// Message of the last failure on this thread, or null if there was none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn lhg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lhg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Normalized Laguerre function `L_m^alpha(x) e^{-x/2} / L_m^alpha(0)`.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn lhg_laguerre_function(m: usize, alpha: f64, x: f64, out: *mut f64) -> LhgStatus {
    guard(|| {
        let v = laguerre_function(LaguerreIndex::new(m, alpha)?, x)?;
        write_out(out, v, "out")
    })
}

/// Bessel function `J_alpha(z)` of complex argument.
///
/// # Safety
/// `out_re` and `out_im` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lhg_bessel_j(alpha: f64, z_re: f64, z_im: f64, out_re: *mut f64, out_im: *mut f64) -> LhgStatus {
    guard(|| {
        if out_re.is_null() || out_im.is_null() {
            return Err(null("out"));
        }
        let v = bessel_j(alpha, Complex64::new(z_re, z_im))?;
        write_out(out_re, v.re, "out_re")?;
        write_out(out_im, v.im, "out_im")
    })
}

/// Heat kernel `h_s(x, t)` with multiplier exponent factor `kappa` (the
/// calibrated value is 2).
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn lhg_heat_kernel(alpha: f64, s: f64, kappa: f64, x: f64, t: f64, out: *mut f64) -> LhgStatus {
    guard(|| {
        let mut p = HeatParams::new(alpha, s)?;
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Fail(LhgStatus::InvalidArgument, format!("kappa must be positive, got {kappa}")));
        }
        p.kappa = kappa;
        let v = heat_kernel_eval(&p, PointK::new(x, t)?)?;
        write_out(out, v, "out")
    })
}

fn into_handle<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// # Safety
/// `h` is null or a live handle.
unsafe fn grid_ref<'a>(h: *const LhgGridFunction) -> Result<&'a GridFunction, Fail> {
    h.as_ref().map(|g| &g.0).ok_or_else(|| null("grid function"))
}

/// # Safety
/// `h` is null or a live handle.
unsafe fn spectral_ref<'a>(h: *const LhgSpectralFunction) -> Result<&'a LhgSpectralFunction, Fail> {
    h.as_ref().ok_or_else(|| null("spectral function"))
}

/// Heat kernel `h_s` sampled on its default grids.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn lhg_fixture_heat_kernel(alpha: f64, s: f64, out: *mut *mut LhgGridFunction) -> LhgStatus {
    guard(|| {
        let f = Fixture::HeatKernel { alpha, s }.build()?;
        write_out(out, into_handle(LhgGridFunction(f)), "out")
    })
}

/// Time-windowed basis function `psi_{lambda,m}` on its default grids.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn lhg_fixture_psi_packet(
    alpha: f64,
    lambda: f64,
    m: usize,
    width: f64,
    out: *mut *mut LhgGridFunction,
) -> LhgStatus {
    guard(|| {
        let f = Fixture::PsiPacket { alpha, lambda, m, width }.build()?;
        write_out(out, into_handle(LhgGridFunction(f)), "out")
    })
}

/// Compact bump of the given radius on its default grids.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn lhg_fixture_bump(alpha: f64, radius: f64, out: *mut *mut LhgGridFunction) -> LhgStatus {
    guard(|| {
        let f = Fixture::Bump { alpha, radius }.build()?;
        write_out(out, into_handle(LhgGridFunction(f)), "out")
    })
}

/// Reads a CSV+JSON pair (`path` may name either file or their stem).
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn lhg_grid_function_read(path: *const c_char, out: *mut *mut LhgGridFunction) -> LhgStatus {
    guard(|| {
        let f = io::read_grid_function(&path_arg(path)?)?;
        write_out(out, into_handle(LhgGridFunction(f)), "out")
    })
}

/// Writes `f` as `<stem>.csv` and `<stem>.json`.
///
/// # Safety
/// `f` must be a live handle and `stem` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn lhg_grid_function_write(f: *const LhgGridFunction, stem: *const c_char) -> LhgStatus {
    guard(|| {
        io::write_grid_function(grid_ref(f)?, &path_arg(stem)?)?;
        Ok(())
    })
}

/// Order `alpha`, radial node count and time node count of `f`.
///
/// # Safety
/// `f` must be a live handle; the out-pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lhg_grid_function_shape(
    f: *const LhgGridFunction,
    alpha: *mut f64,
    n_x: *mut usize,
    n_t: *mut usize,
) -> LhgStatus {
    guard(|| {
        let g = grid_ref(f)?;
        write_out(alpha, g.radial.alpha, "alpha")?;
        write_out(n_x, g.n_x(), "n_x")?;
        write_out(n_t, g.n_t(), "n_t")
    })
}

/// Node `(x_i, t_j)` and the sample there.
///
/// # Safety
/// `f` must be a live handle; the out-pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lhg_grid_function_sample(
    f: *const LhgGridFunction,
    i: usize,
    j: usize,
    x: *mut f64,
    t: *mut f64,
    re: *mut f64,
    im: *mut f64,
) -> LhgStatus {
    guard(|| {
        let g = grid_ref(f)?;
        if i >= g.n_x() || j >= g.n_t() {
            return Err(Fail(LhgStatus::OutOfBounds, format!("({i}, {j}) outside {} x {}", g.n_x(), g.n_t())));
        }
        let v = g.at(i, j);
        write_out(x, g.radial.x_nodes[i], "x")?;
        write_out(t, g.time.node(j), "t")?;
        write_out(re, v.re, "re")?;
        write_out(im, v.im, "im")
    })
}

/// Releases a grid function; null is ignored.
///
/// # Safety
/// `f` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lhg_grid_function_free(f: *mut LhgGridFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Forward Fourier-Laguerre transform on degrees `0..=m_max` and frequencies
/// in `[-lambda_max, lambda_max]`.
///
/// # Safety
/// `f` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn lhg_forward(
    f: *const LhgGridFunction,
    m_max: usize,
    lambda_max: f64,
    out: *mut *mut LhgSpectralFunction,
) -> LhgStatus {
    guard(|| {
        let g = grid_ref(f)?;
        let sg = SpectralGrid::new(g.radial.alpha, m_max, SpectralLayout::for_time_extent(lambda_max, g.time.t_max))?;
        let fh = fourier_laguerre_forward(g, &sg)?;
        write_out(out, into_handle(LhgSpectralFunction(fh)), "out")
    })
}

/// Inverse transform of `fh` onto the grids of `like`.
///
/// # Safety
/// `fh` and `like` must be live handles and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn lhg_inverse(
    fh: *const LhgSpectralFunction,
    like: *const LhgGridFunction,
    out: *mut *mut LhgGridFunction,
) -> LhgStatus {
    guard(|| {
        let s = spectral_ref(fh)?;
        let g = grid_ref(like)?;
        let f = fourier_laguerre_inverse(&s.0, &g.radial, &g.time)?;
        write_out(out, into_handle(LhgGridFunction(f)), "out")
    })
}

/// Frequency count and degree count (`m_max + 1`) of `fh`.
///
/// # Safety
/// `fh` must be a live handle; the out-pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lhg_spectral_function_shape(
    fh: *const LhgSpectralFunction,
    n_lambda: *mut usize,
    n_m: *mut usize,
) -> LhgStatus {
    guard(|| {
        let s = spectral_ref(fh)?;
        write_out(n_lambda, s.0.grid.n_lambda(), "n_lambda")?;
        write_out(n_m, s.0.grid.n_m(), "n_m")
    })
}

/// Frequency node `lambda_l` and the coefficient at `(lambda_l, m)`.
///
/// # Safety
/// `fh` must be a live handle; the out-pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lhg_spectral_function_sample(
    fh: *const LhgSpectralFunction,
    l: usize,
    m: usize,
    lambda: *mut f64,
    re: *mut f64,
    im: *mut f64,
) -> LhgStatus {
    guard(|| {
        let s = &spectral_ref(fh)?.0;
        if l >= s.grid.n_lambda() || m >= s.grid.n_m() {
            return Err(Fail(LhgStatus::OutOfBounds, format!("({l}, {m}) outside {} x {}", s.grid.n_lambda(), s.grid.n_m())));
        }
        let v = s.at(l, m);
        write_out(lambda, s.grid.lambda_nodes[l], "lambda")?;
        write_out(re, v.re, "re")?;
        write_out(im, v.im, "im")
    })
}

/// Releases a spectral function; null is ignored.
///
/// # Safety
/// `fh` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lhg_spectral_function_free(fh: *mut LhgSpectralFunction) {
    if !fh.is_null() {
        drop(Box::from_raw(fh));
    }
}

/// Both sides of the Plancherel identity for `f`.
///
/// # Safety
/// `f` must be a live handle; the out-pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lhg_plancherel_norms(
    f: *const LhgGridFunction,
    m_max: usize,
    lambda_max: f64,
    grid_norm: *mut f64,
    spectral_norm: *mut f64,
) -> LhgStatus {
    guard(|| {
        let g = grid_ref(f)?;
        let sg = SpectralGrid::new(g.radial.alpha, m_max, SpectralLayout::for_time_extent(lambda_max, g.time.t_max))?;
        let (a, b) = plancherel_norms(g, &sg)?;
        write_out(grid_norm, a, "grid_norm")?;
        write_out(spectral_norm, b, "spectral_norm")
    })
}

/// Uncertainty-principle certificate for `f` with decay rates `a`, `b`, the
/// weight exponent `delta` and the Gaussian-estimate constant `big_a`, on the
/// default frequency samples and radius ladder.
///
/// # Safety
/// `f` must be a live handle; the out-pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lhg_miyachi_certificate(
    f: *const LhgGridFunction,
    a: f64,
    b: f64,
    delta: f64,
    big_a: f64,
    conclusion: *mut LhgConclusion,
    residual_norm: *mut f64,
) -> LhgStatus {
    guard(|| {
        let g = grid_ref(f)?;
        let p = MiyachiParams::new(a, b, delta, big_a)?;
        let r = miyachi_certificate(g, &p, &default_lambda_samples(1.0 / (4.0 * a)), &DEFAULT_R_LADDER);
        let c = match r.conclusion {
            Conclusion::MustVanish => LhgConclusion::MustVanish,
            Conclusion::HypothesesNotMet => LhgConclusion::HypothesesNotMet,
            Conclusion::Inconclusive => LhgConclusion::Inconclusive,
        };
        write_out(conclusion, c, "conclusion")?;
        write_out(residual_norm, r.residual_norm, "residual_norm")
    })
}
