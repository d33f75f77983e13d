//! Special functions: Laguerre polynomials and functions, the oscillator
//! profiles `phi_m^alpha`, Bessel functions of the first kind at complex
//! argument, and `ln Gamma`.
//!
//! Laguerre values come from the forward three-term recurrence, which is
//! stable on `x >= 0`. Profiles that carry a Gaussian factor run the same
//! recurrence on exponentially scaled seeds so that large degrees at large
//! arguments neither overflow nor produce `inf * 0`.

use crate::dd::{CDd, Dd};
use crate::error::{Error, Result};
use crate::quadrature::gauss_jacobi;
use num_complex::Complex64;

/// Complex argument of the Bessel routines.
pub type ComplexArg = Complex64;

/// Hard cap on the number of Bessel series terms.
pub const BESSEL_TERM_CAP: usize = 500;

/// Relative stopping threshold of the Bessel series: summation stops once a
/// term falls below this fraction of the largest partial sum seen so far.
/// The sum is carried in double-double, so the threshold sits below `f64`
/// resolution even after the cancellation of a large-argument series.
pub const BESSEL_SERIES_TOL: f64 = 1e-30;

/// Degree and order of a Laguerre polynomial.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LaguerreIndex {
    pub m: usize,
    pub alpha: f64,
}

impl LaguerreIndex {
    pub fn new(m: usize, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(LaguerreIndex { m, alpha })
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("order alpha must be finite and >= 0, got {alpha}")))
    }
}

/// `ln Gamma(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("log_gamma needs x > 0, got {x}")));
    }
    Ok(statrs::function::gamma::ln_gamma(x))
}

pub(crate) fn ln_gamma_unchecked(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// `Gamma(x)`, exact at small positive integers.
pub(crate) fn gamma_unchecked(x: f64) -> f64 {
    if x.fract() == 0.0 && (1.0..=30.0).contains(&x) {
        (1..x as u32).map(f64::from).product()
    } else {
        statrs::function::gamma::gamma(x)
    }
}

/// `ln L_m^alpha(0) = ln Gamma(m+alpha+1) - ln m! - ln Gamma(alpha+1)`,
/// accumulated as `sum_k ln(1 + alpha/k)`.
pub fn ln_laguerre_at_zero(idx: LaguerreIndex) -> f64 {
    if idx.m > 4096 {
        let m = idx.m as f64;
        return ln_gamma_unchecked(m + idx.alpha + 1.0)
            - ln_gamma_unchecked(m + 1.0)
            - ln_gamma_unchecked(idx.alpha + 1.0);
    }
    (1..=idx.m).map(|k| (idx.alpha / k as f64).ln_1p()).sum()
}

/// `L_m^alpha(0) = prod_{k=1}^{m} (k + alpha) / k`.
pub fn laguerre_at_zero(idx: LaguerreIndex) -> f64 {
    if idx.m > 4096 {
        return ln_laguerre_at_zero(idx).exp();
    }
    (1..=idx.m).fold(1.0, |p, k| p * (1.0 + idx.alpha / k as f64))
}

/// `L_m^alpha(x)` by the three-term recurrence
/// `(k+1) L_{k+1} = (2k+alpha+1-x) L_k - (k+alpha) L_{k-1}`.
pub fn laguerre_polynomial(idx: LaguerreIndex, x: f64) -> f64 {
    let LaguerreIndex { m, alpha } = idx;
    let mut prev = 1.0;
    if m == 0 {
        return prev;
    }
    let mut cur = alpha + 1.0 - x;
    for k in 1..m {
        let kf = k as f64;
        let next = ((2.0 * kf + alpha + 1.0 - x) * cur - (kf + alpha) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Runs the Laguerre recurrence from the seeds `(scale, scale * L_1)` and
/// writes `scale * L_k^alpha(x)` for `k = 0..=m_max` into `out`.
fn laguerre_scaled_into(alpha: f64, x: f64, scale: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = scale;
    if out.len() == 1 {
        return;
    }
    out[1] = scale * (alpha + 1.0 - x);
    for k in 1..out.len() - 1 {
        let kf = k as f64;
        out[k + 1] = ((2.0 * kf + alpha + 1.0 - x) * out[k] - (kf + alpha) * out[k - 1]) / (kf + 1.0);
    }
}

/// All of `L_0^alpha(x), ..., L_{m_max}^alpha(x)`.
pub fn laguerre_polynomials(alpha: f64, x: f64, m_max: usize) -> Vec<f64> {
    let mut out = vec![0.0; m_max + 1];
    laguerre_scaled_into(alpha, x, 1.0, &mut out);
    out
}

fn check_nonneg(x: f64, what: &str) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} needs a finite x >= 0, got {x}")))
    }
}

/// Normalized Laguerre function `e^{-x/2} L_m^alpha(x) / L_m^alpha(0)`.
pub fn laguerre_function(idx: LaguerreIndex, x: f64) -> Result<f64> {
    check_nonneg(x, "laguerre_function")?;
    let mut buf = vec![0.0; idx.m + 1];
    laguerre_scaled_into(idx.alpha, x, (-0.5 * x).exp(), &mut buf);
    Ok(buf[idx.m] / laguerre_at_zero(idx))
}

/// Normalized Laguerre functions for every degree up to `m_max`, written
/// into `out` (length `m_max + 1`). `inv_l0[m]` must hold `1 / L_m^alpha(0)`.
pub(crate) fn laguerre_functions_into(alpha: f64, x: f64, inv_l0: &[f64], out: &mut [f64]) {
    laguerre_scaled_into(alpha, x, (-0.5 * x).exp(), out);
    for (v, c) in out.iter_mut().zip(inv_l0) {
        *v *= c;
    }
}

/// `1 / L_m^alpha(0)` for `m = 0..=m_max`.
pub fn inverse_laguerre_at_zero(alpha: f64, m_max: usize) -> Vec<f64> {
    (0..=m_max)
        .map(|m| 1.0 / laguerre_at_zero(LaguerreIndex { m, alpha }))
        .collect()
}

/// `phi_m^alpha(x) = e^{-x^2/2} L_m^alpha(x^2)`.
pub fn phi(idx: LaguerreIndex, x: f64) -> Result<f64> {
    check_nonneg(x, "phi")?;
    let mut buf = vec![0.0; idx.m + 1];
    let u = x * x;
    laguerre_scaled_into(idx.alpha, u, (-0.5 * u).exp(), &mut buf);
    Ok(buf[idx.m])
}

/// `phi_m^alpha(x)` for every degree up to `m_max`, into `out`.
pub(crate) fn phi_all_into(alpha: f64, x: f64, out: &mut [f64]) {
    let u = x * x;
    laguerre_scaled_into(alpha, u, (-0.5 * u).exp(), out);
}

/// Radius beyond which the Bessel routines switch from the power series to
/// the large-argument expansion.
fn asymptotic_radius(alpha: f64) -> f64 {
    25.0 + alpha * alpha
}

/// `sum_k (-z^2/4)^k / (k! (alpha+1)_k)` in double-double arithmetic.
/// Returns the sum and the number of terms used.
fn kernel_series_sum(alpha: f64, z: Complex64) -> Result<(Complex64, usize)> {
    let zz = CDd::from_c64(z) * CDd::from_c64(z);
    let quarter = Dd::from_f64(-0.25);
    let step = zz.scale(quarter);
    let mut term = CDd::ONE;
    let mut sum = CDd::ONE;
    let mut max_partial = 1.0_f64;
    for k in 0..BESSEL_TERM_CAP {
        let kf = k as f64;
        // (k+1)(k+alpha+1), exact in double-double
        let denom = Dd::from_f64(kf + 1.0) * Dd::sum_exact(kf + 1.0, alpha);
        term = (term * step).scale(denom.recip());
        sum = sum + term;
        let partial = sum.norm_f64();
        max_partial = max_partial.max(partial);
        if term.norm_f64() < BESSEL_SERIES_TOL * max_partial {
            return Ok((sum.to_c64(), k + 2));
        }
    }
    Err(Error::ConvergenceFailure {
        terms: BESSEL_TERM_CAP,
        arg: format!("{z}"),
    })
}

/// `2^{-alpha} / Gamma(alpha+1)`, the leading coefficient of `J_alpha(z)/z^alpha`.
fn kernel_leading(alpha: f64) -> f64 {
    (-alpha).exp2() / gamma_unchecked(alpha + 1.0)
}

/// Hankel large-argument expansion of `J_alpha(z)`, valid for `Re z >= 0`.
fn bessel_j_asymptotic(alpha: f64, z: Complex64) -> Complex64 {
    let mu = 4.0 * alpha * alpha;
    let zinv = 1.0 / z;
    let mut p = Complex64::new(1.0, 0.0);
    let mut q = Complex64::new(0.0, 0.0);
    let mut a = 1.0_f64;
    let mut zpow = Complex64::new(1.0, 0.0);
    let mut last = f64::INFINITY;
    for k in 1..200usize {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        a *= (mu - odd * odd) / (8.0 * kf);
        zpow *= zinv;
        let term = zpow * a;
        let size = term.norm();
        if size > last || a == 0.0 {
            break;
        }
        last = size;
        // P takes k = 0, 2, 4, ... with signs +, -, +; Q takes k = 1, 3, 5, ...
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        if size < 1e-17 * p.norm().max(q.norm()) {
            break;
        }
    }
    let omega = z - (0.5 * alpha + 0.25) * std::f64::consts::PI;
    let pre = (2.0 / (std::f64::consts::PI * z)).sqrt();
    pre * (p * omega.cos() - q * omega.sin())
}

/// The entire, even function `J_alpha(z) / z^alpha`, finite at `z = 0`.
pub fn bessel_kernel(alpha: f64, z: ComplexArg) -> Result<Complex64> {
    check_alpha(alpha)?;
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("non-finite Bessel argument {z}")));
    }
    // evenness lets us work in the right half-plane
    let z = if z.re < 0.0 { -z } else { z };
    if z.norm() <= asymptotic_radius(alpha) {
        let (s, _) = kernel_series_sum(alpha, z)?;
        Ok(s * kernel_leading(alpha))
    } else {
        Ok(bessel_j_asymptotic(alpha, z) / z.powf(alpha))
    }
}

/// Kernel values for a batch of arguments, reusing the leading constant.
pub(crate) fn bessel_kernel_unchecked(alpha: f64, lead: f64, z: Complex64) -> Complex64 {
    let z = if z.re < 0.0 { -z } else { z };
    if z.norm() <= asymptotic_radius(alpha) {
        match kernel_series_sum(alpha, z) {
            Ok((s, _)) => s * lead,
            Err(_) => bessel_j_asymptotic(alpha, z) / z.powf(alpha),
        }
    } else {
        bessel_j_asymptotic(alpha, z) / z.powf(alpha)
    }
}

pub(crate) fn bessel_kernel_lead(alpha: f64) -> f64 {
    kernel_leading(alpha)
}

/// `z^alpha` on the principal branch, with `0^0 = 1`.
fn principal_pow(z: Complex64, alpha: f64) -> Complex64 {
    if alpha == 0.0 {
        Complex64::new(1.0, 0.0)
    } else if z == Complex64::new(0.0, 0.0) {
        Complex64::new(0.0, 0.0)
    } else {
        z.powf(alpha)
    }
}

/// `J_alpha(z)` on the principal branch of `z^alpha`.
///
/// Inside `|z| <= 25 + alpha^2` the power series is summed in double-double
/// arithmetic until a term drops below [`BESSEL_SERIES_TOL`] of the largest
/// partial sum (at most [`BESSEL_TERM_CAP`] terms). Outside that disc the
/// Hankel asymptotic expansion is used.
pub fn bessel_j(alpha: f64, z: ComplexArg) -> Result<Complex64> {
    let k = bessel_kernel(alpha, z)?;
    Ok(k * principal_pow(z, alpha))
}

/// `J_alpha(z)` from the power series alone, at any radius.
pub fn bessel_j_series(alpha: f64, z: ComplexArg) -> Result<Complex64> {
    check_alpha(alpha)?;
    let (s, _) = kernel_series_sum(alpha, z)?;
    Ok(s * kernel_leading(alpha) * principal_pow(z, alpha))
}

/// `J_alpha(z)` from the Poisson integral
/// `(z/2)^alpha / (sqrt(pi) Gamma(alpha+1/2)) * int_{-1}^{1} e^{izs} (1-s^2)^{alpha-1/2} ds`
/// with an `n`-point Gauss-Jacobi rule.
pub fn bessel_j_integral(alpha: f64, z: ComplexArg, n: usize) -> Result<Complex64> {
    check_alpha(alpha)?;
    let rule = gauss_jacobi(n, alpha - 0.5, alpha - 0.5)?;
    let mut acc = crate::quadrature::ComplexSum::default();
    for (&s, &w) in rule.nodes.iter().zip(&rule.weights) {
        acc.add(w * (Complex64::new(0.0, z.re * s) - z.im * s).exp());
    }
    let lead = (-alpha).exp2() / (std::f64::consts::PI.sqrt() * gamma_unchecked(alpha + 0.5));
    Ok(acc.value() * lead * principal_pow(z, alpha))
}
