//! Measurements behind the verification suites. Each function computes one
//! defect (or a structured result) so that suites, the CLI and the tests
//! share the same numbers.

use crate::error::{Error, Result};
use crate::fixtures::Fixture;
use crate::grid::{GridFunction, RadialGrid, RadialKind, SpectralGrid, TimeGrid};
use crate::heat::{
    calibrate_many, default_heat_grids, fit_gaussian_estimate, fit_gaussian_estimate_boxes, heat_kernel_grid,
    Calibration, GaussianEstimate, HeatParams,
};
use crate::hypergroup::{apply_l, convolve_on, eval_psi, translate, translate_fn, PointK, TranslationRule};
use crate::miyachi::{
    default_lambda_samples, hankel_growth_coefficient, hankel_strip_bound_check, miyachi_certificate,
    pivot_variation, slice_decay_check, BoundCheck, CertificateReport, MiyachiParams, DEFAULT_R_LADDER,
};
use crate::quadrature::sum_real;
use crate::special::{log_gamma, phi, LaguerreIndex};
use crate::transforms::{fourier_laguerre_forward, hankel_transform_many, plancherel_norms, RadialSliceFn};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

/// One line of a suite report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub relation: Relation,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    /// Passes when `measured <= tolerance`; NaN fails.
    pub fn at_most(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Check { name: name.into(), measured, tolerance, relation: Relation::AtMost, pass: measured <= tolerance, note: None }
    }

    pub fn at_least(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Check { name: name.into(), measured, tolerance, relation: Relation::AtLeast, pass: measured >= tolerance, note: None }
    }

    /// A yes/no check recorded as `1 >= 1` or `0 >= 1`.
    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Check::at_least(name, if ok { 1.0 } else { 0.0 }, 1.0)
    }

    /// A check whose measurement failed; it never passes.
    pub fn failed(name: impl Into<String>, tolerance: f64, err: &Error) -> Self {
        let mut c = Check::at_most(name, f64::NAN, tolerance);
        c.note = Some(err.to_string());
        c
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Re-evaluates `pass` against a new tolerance.
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self.pass = match self.relation {
            Relation::AtMost => self.measured <= tolerance,
            Relation::AtLeast => self.measured >= tolerance,
        };
        self
    }
}

/// Largest entry of `|G - I|` for the normalized basis
/// `(2 |lambda|^{alpha+1} m! / Gamma(m+alpha+1))^{1/2} phi_m(sqrt|lambda| x)`, `m <= m_max`,
/// with `G` computed on Gauss-Legendre panels in `x^{2alpha+1} dx`.
pub fn orthonormality_defect(alpha: f64, lambda: f64, m_max: usize) -> Result<f64> {
    let mu = lambda.abs();
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::Domain(format!("Gram check needs lambda != 0, got {lambda}")));
    }
    // phi_m^2 e^{-mu x^2} carries degree 4 m_max; it is below 1e-40 past u = 4 m_max + 100
    let x_max = ((4.0 * m_max as f64 + 100.0) / mu).sqrt();
    let radial = RadialGrid::gauss_panels(alpha, x_max, 32, 16)?;
    let mut basis = Vec::with_capacity(m_max + 1);
    for m in 0..=m_max {
        let idx = LaguerreIndex::new(m, alpha)?;
        let ln_norm = 0.5 * ((2.0f64).ln() + (alpha + 1.0) * mu.ln() + log_gamma(m as f64 + 1.0)? - log_gamma(m as f64 + alpha + 1.0)?);
        let c = ln_norm.exp();
        let col: Vec<f64> = radial.x_nodes.iter().map(|&x| phi(idx, mu.sqrt() * x).map(|v| c * v)).collect::<Result<_>>()?;
        basis.push(col);
    }
    let mut worst = 0.0_f64;
    for m in 0..=m_max {
        for k in 0..=m {
            let g = sum_real((0..radial.len()).map(|i| radial.radial_weights[i] * basis[m][i] * basis[k][i]));
            let want = if m == k { 1.0 } else { 0.0 };
            worst = worst.max((g - want).abs());
        }
    }
    Ok(worst)
}

/// Largest `|H phi_m (y) - (-1)^m phi_m(y)| / max |phi_m|` over `m <= m_max`
/// and `y` in `[0, y_max]`.
pub fn hankel_eigen_defect(alpha: f64, m_max: usize, y_max: f64) -> Result<f64> {
    let x_max = (4.0 * m_max as f64 + 80.0).sqrt();
    let radial = RadialGrid::gauss_panels(alpha, x_max, 24, 16)?;
    let ys: Vec<f64> = (0..=80).map(|k| y_max * k as f64 / 80.0).collect();
    let zs: Vec<Complex64> = ys.iter().map(|&y| Complex64::new(y, 0.0)).collect();
    let mut worst = 0.0_f64;
    for m in 0..=m_max {
        let idx = LaguerreIndex::new(m, alpha)?;
        let g = RadialSliceFn::from_fn(radial.clone(), Complex64::new(0.0, 0.0), |x| Complex64::new(phi(idx, x).unwrap_or(f64::NAN), 0.0))?;
        let h = hankel_transform_many(&g, alpha, &zs)?;
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        let want: Vec<f64> = ys.iter().map(|&y| phi(idx, y).map(|v| sign * v)).collect::<Result<_>>()?;
        let scale = want.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        for (hv, w) in h.iter().zip(&want) {
            worst = worst.max((hv - w).norm() / scale);
        }
    }
    Ok(worst)
}

/// `|‖f‖ - ‖fhat‖| / ‖f‖` for a fixture on its default grids.
pub fn plancherel_defect(fixture: &Fixture, spectral: &SpectralGrid) -> Result<f64> {
    let f = fixture.build()?;
    let (a, b) = plancherel_norms(&f, spectral)?;
    Ok((a - b).abs() / a)
}

/// Location `(lambda, m)` of the largest forward-transform coefficient of
/// the packet `psi_{1,2}` windowed in time.
pub fn packet_peak(alpha: f64) -> Result<(f64, usize)> {
    let fx = Fixture::PsiPacket { alpha, lambda: 1.0, m: 2, width: 4.0 };
    let fhat = fourier_laguerre_forward(&fx.build()?, &fx.default_spectral_grid(8)?)?;
    let n_m = fhat.grid.n_m();
    let best = (0..fhat.values.len())
        .max_by(|&a, &b| fhat.values[a].norm().total_cmp(&fhat.values[b].norm()))
        .ok_or_else(|| Error::Config("empty spectral grid".into()))?;
    Ok((fhat.grid.lambda_nodes[best / n_m], best % n_m))
}

/// Optional replacements for the default heat grids.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GridOverrides {
    pub n_x: Option<usize>,
    pub n_t: Option<usize>,
    pub x_max: Option<f64>,
    pub t_max: Option<f64>,
}

/// [`default_heat_grids`] with overrides applied. An `n_x` override keeps
/// order-16 panels and rounds up to a multiple of 16.
pub fn heat_grids(alpha: f64, s: f64, ov: &GridOverrides) -> Result<(RadialGrid, TimeGrid)> {
    let (radial, time) = default_heat_grids(alpha, s)?;
    let (x_max, panels, order) = match radial.kind {
        RadialKind::GaussPanels { x_max, panels, order } => (x_max, panels, order),
        _ => unreachable!("heat grids use Gauss panels"),
    };
    let x_max = ov.x_max.unwrap_or(x_max);
    let (panels, order) = match ov.n_x {
        Some(n) => (n.div_ceil(16), 16),
        None => (panels, order),
    };
    let radial = RadialGrid::gauss_panels(alpha, x_max, panels, order)?;
    let time = TimeGrid::new(ov.t_max.unwrap_or(time.t_max), ov.n_t.unwrap_or(time.n_t))?;
    Ok((radial, time))
}

/// `s` values of the multiplier calibration and the Gaussian estimate.
pub const HEAT_S: [f64; 4] = [0.25, 0.5, 1.0, 2.0];

/// `s` values of the scaling check. Powers of two are avoided since the
/// rescaled grids would reproduce the same quadrature bit for bit.
pub const SCALING_S: [f64; 3] = [0.3, 0.5, 1.5];

/// Mass and `kappa` calibration pooled over `s_values`.
pub fn kappa_calibration(alpha: f64, s_values: &[f64], ov: &GridOverrides) -> Result<Calibration> {
    let runs: Vec<(f64, RadialGrid, TimeGrid)> = s_values
        .iter()
        .map(|&s| heat_grids(alpha, s, ov).map(|(r, t)| (s, r, t)))
        .collect::<Result<_>>()?;
    calibrate_many(&HeatParams::new(alpha, s_values[0])?, &runs)
}

/// Sup-norm relative error of `h_{s1} * h_{s2}` against `h_{s1+s2}` on the
/// coarse output grid `[0, 4] x [-8, 8]`.
pub fn semigroup_defect(alpha: f64, s1: f64, s2: f64) -> Result<f64> {
    let reach = (s1.max(s2)).sqrt();
    let radial = RadialGrid::gauss_panels(alpha, 10.0 * reach, 8, 12)?;
    let time = TimeGrid::new(40.0 * s1.max(s2), 2049)?;
    let f = heat_kernel_grid(&HeatParams::new(alpha, s1)?, &radial, &time)?;
    let g = heat_kernel_grid(&HeatParams::new(alpha, s2)?, &radial, &time)?;
    let out_r = RadialGrid::gauss_panels(alpha, 4.0, 4, 8)?;
    let out_t = TimeGrid::new(8.0, 65)?;
    let conv = convolve_on(&f, &g, &out_r, &out_t)?;
    let want = heat_kernel_grid(&HeatParams::new(alpha, s1 + s2)?, &out_r, &out_t)?;
    let peak = want.max_abs();
    let err = conv.values.iter().zip(&want.values).fold(0.0_f64, |m, (a, b)| m.max((a - b).norm()));
    Ok(err / peak)
}

/// Largest pointwise relative error of `h_s(x,t) = s^{-(alpha+2)} h_1(x/sqrt s, t/s)`
/// over the nodes where `h_s` exceeds `1e-6` of its maximum. `h_1` is
/// evaluated on the rescaled grid, so the two sides use different
/// quadratures of the `lambda` integral.
pub fn scaling_defect(alpha: f64, s: f64, ov: &GridOverrides) -> Result<f64> {
    let (radial, time) = heat_grids(alpha, s, ov)?;
    let hs = heat_kernel_grid(&HeatParams::new(alpha, s)?, &radial, &time)?;
    let (x_max, panels, order) = match radial.kind {
        RadialKind::GaussPanels { x_max, panels, order } => (x_max, panels, order),
        _ => unreachable!("heat grids use Gauss panels"),
    };
    let r1 = RadialGrid::gauss_panels(alpha, x_max / s.sqrt(), panels, order)?;
    let t1 = TimeGrid::new(time.t_max / s, time.n_t)?;
    let h1 = heat_kernel_grid(&HeatParams::new(alpha, 1.0)?, &r1, &t1)?;
    let factor = s.powf(-(alpha + 2.0));
    let peak = hs.max_abs();
    let mut worst = 0.0_f64;
    for (a, b) in hs.values.iter().zip(&h1.values) {
        if a.re > 1e-6 * peak {
            worst = worst.max((a.re - factor * b.re).abs() / a.re);
        }
    }
    Ok(worst)
}

/// Sampling box `[0, x_max] x [-t_max, t_max]` of the Gaussian-estimate check.
pub const ESTIMATE_BOX: (f64, f64) = (4.0, 8.0);

pub fn gaussian_estimate(alpha: f64) -> Result<GaussianEstimate> {
    fit_gaussian_estimate(&HeatParams::new(alpha, 1.0)?, ESTIMATE_BOX.0, ESTIMATE_BOX.1)
}

/// Test points of the product formula: `(x, t)` pairs.
const PRODUCT_POINTS: [((f64, f64), (f64, f64)); 3] =
    [((0.8, 0.3), (1.1, -0.7)), ((0.0, 1.0), (1.5, 0.2)), ((1.3, -0.4), (0.6, 0.9))];

/// Frequencies of the product-formula and eigen-relation checks.
pub const BASIS_LAMBDAS: [f64; 4] = [-2.0, 0.5, 1.0, 2.0];

/// Largest `|T_p psi(q) - psi(p) psi(q)|` over `m <= m_max`, the frequencies
/// of [`BASIS_LAMBDAS`] and a few point pairs, with `psi` sampled on a grid
/// and interpolated (`|psi| <= 1`). The closed-form evaluation is reported as
/// the second value.
pub fn product_formula_defect(alpha: f64, m_max: usize) -> Result<(f64, f64)> {
    let rule = TranslationRule::new(alpha, 96, 16)?;
    let radial = RadialGrid::gauss_panels(alpha, 4.0, 16, 16)?;
    let time = TimeGrid::new(4.0, 321)?;
    let (mut grid_err, mut exact_err) = (0.0_f64, 0.0_f64);
    for &lambda in &BASIS_LAMBDAS {
        for m in 0..=m_max {
            let psi = GridFunction::from_fn(radial.clone(), time, |x, t| {
                eval_psi(lambda, m, alpha, PointK { x, t }).unwrap_or(Complex64::new(f64::NAN, 0.0))
            })?;
            for &((px, pt), (qx, qt)) in &PRODUCT_POINTS {
                let (p, q) = (PointK::new(px, pt)?, PointK::new(qx, qt)?);
                let want = eval_psi(lambda, m, alpha, p)? * eval_psi(lambda, m, alpha, q)?;
                let got = translate(&psi, p, q, &rule, alpha)?;
                grid_err = grid_err.max((got - want).norm());
                let closed = translate_fn(|x, t| eval_psi(lambda, m, alpha, PointK { x, t }).unwrap_or(Complex64::new(f64::NAN, 0.0)), p, q, &rule);
                exact_err = exact_err.max((closed - want).norm());
            }
        }
    }
    Ok((grid_err, exact_err))
}

/// Sign fit of `L psi_{lambda,m} = sigma 2|lambda|(2m+alpha+1) psi_{lambda,m}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignFit {
    pub sigma: f64,
    /// Largest `|L psi - sigma mu psi|_inf / (mu |psi|_inf)` over the samples.
    pub residual: f64,
    /// `(lambda, m, <L psi, psi> / (mu <psi, psi>))` per sample.
    pub ratios: Vec<(f64, usize, f64)>,
}

/// Applies the finite-difference `L` to `psi_{lambda,m}` on a uniform grid
/// and fits one global sign.
pub fn eigen_sign_fit(alpha: f64, lambdas: &[f64], m_max: usize) -> Result<SignFit> {
    let mut samples = Vec::new();
    for &lambda in lambdas {
        for m in 0..=m_max {
            let mu = 2.0 * lambda.abs() * (2.0 * m as f64 + alpha + 1.0);
            let x_max = ((2.0 * (40.0 + 4.0 * m as f64)) / lambda.abs()).sqrt();
            let n_x = (x_max / 0.01).ceil() as usize + 1;
            let radial = RadialGrid::uniform(alpha, x_max, n_x)?;
            let time = TimeGrid::new(0.5, 101)?;
            let psi = GridFunction::from_fn(radial, time, |x, t| {
                eval_psi(lambda, m, alpha, PointK { x, t }).unwrap_or(Complex64::new(f64::NAN, 0.0))
            })?;
            let lpsi = apply_l(&psi)?;
            let num: Complex64 = lpsi.values.iter().zip(&psi.values).map(|(a, b)| a * b.conj()).sum();
            let den: f64 = psi.values.iter().map(|v| v.norm_sqr()).sum();
            samples.push((lambda, m, mu, num.re / (mu * den), psi, lpsi));
        }
    }
    let mean = samples.iter().map(|s| s.3).sum::<f64>() / samples.len().max(1) as f64;
    let sigma = if mean < 0.0 { -1.0 } else { 1.0 };
    let mut residual = 0.0_f64;
    for (_, _, mu, _, psi, lpsi) in &samples {
        let scale = mu * psi.max_abs();
        for (a, b) in lpsi.values.iter().zip(&psi.values) {
            residual = residual.max((a - b * (sigma * mu)).norm() / scale);
        }
    }
    let ratios = samples.iter().map(|s| (s.0, s.1, s.3)).collect();
    Ok(SignFit { sigma, residual, ratios })
}

/// The Miyachi family `f = h_{1/(4a)}` and its canonical certificates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MiyachiScenarios {
    pub alpha: f64,
    pub a: f64,
    /// `A` of the Gaussian estimate used for the strip.
    #[serde(rename = "A")]
    pub big_a: f64,
    /// `b = 0.3`: `ab > 1/4`, the ladder must diverge.
    pub divergent: CertificateReport,
    /// `b = 0.05`: the ladder stays bounded.
    pub bounded: CertificateReport,
    /// `f = 0` with `b = 0.3`.
    pub zero: CertificateReport,
    /// A compactly supported bump with `b = 0.3`.
    pub bump: CertificateReport,
    /// Coefficient of variation of the pivot `e^{y^2/4a} H(f^lambda)(y)` at a
    /// small frequency, where the slice decay rate is close to `1/(4a)`.
    pub pivot_cv: f64,
    /// Quadratic growth coefficient of `log |H(f^lambda)(iy)|`.
    pub growth_coefficient: f64,
}

pub const MIYACHI_A: f64 = 1.0;
pub const MIYACHI_B_DIVERGENT: f64 = 0.3;
pub const MIYACHI_B_BOUNDED: f64 = 0.05;

/// Box `(s, x_max, t_max)` of the Gaussian estimate feeding the strip width.
pub const MIYACHI_ESTIMATE_BOX: (f64, f64, f64) = (1.0, 10.0, 20.0);

/// `A` of the Gaussian estimate used by the Miyachi checks.
pub fn miyachi_big_a(alpha: f64) -> Result<f64> {
    let p = HeatParams::new(alpha, 1.0)?;
    Ok(fit_gaussian_estimate_boxes(&p, &[MIYACHI_ESTIMATE_BOX])?.a)
}

/// `h_{1/(4a)}` on its default grids.
pub fn miyachi_fixture(alpha: f64, a: f64) -> Result<GridFunction> {
    Fixture::HeatKernel { alpha, s: 1.0 / (4.0 * a) }.build()
}

pub fn miyachi_scenarios(alpha: f64) -> Result<MiyachiScenarios> {
    let a = MIYACHI_A;
    let s = 1.0 / (4.0 * a);
    let big_a = miyachi_big_a(alpha)?;
    let f = miyachi_fixture(alpha, a)?;
    let lambdas = default_lambda_samples(s);
    let cert = |g: &GridFunction, b: f64| -> Result<CertificateReport> {
        Ok(miyachi_certificate(g, &MiyachiParams::new(a, b, 1.0, big_a)?, &lambdas, &DEFAULT_R_LADDER))
    };
    let zero = GridFunction::zeros(f.radial.clone(), f.time);
    let bump = Fixture::Bump { alpha, radius: 1.0 }.build()?;
    Ok(MiyachiScenarios {
        alpha,
        a,
        big_a,
        divergent: cert(&f, MIYACHI_B_DIVERGENT)?,
        bounded: cert(&f, MIYACHI_B_BOUNDED)?,
        zero: cert(&zero, MIYACHI_B_DIVERGENT)?,
        bump: cert(&bump, MIYACHI_B_DIVERGENT)?,
        pivot_cv: pivot_variation(&f, a, 1e-3, &[0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0])?,
        growth_coefficient: hankel_growth_coefficient(&f, lambdas[3], &(1..=20).map(|k| 0.1 * k as f64).collect::<Vec<_>>())?,
    })
}

/// Bound constants at `lambda = xi + i fraction 4aA`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripPoint {
    pub fraction: f64,
    pub lambda_im: f64,
    pub slice: BoundCheck,
    pub hankel: BoundCheck,
}

/// Radial extent of the strip checks.
pub const STRIP_GRID: GridOverrides = GridOverrides { n_x: Some(256), n_t: None, x_max: Some(8.0), t_max: None };

/// Slice and Hankel bound constants of `h_{1/(4a)}` across the strip.
pub fn strip_profile(alpha: f64, xi: f64, fractions: &[f64]) -> Result<(MiyachiParams, Vec<StripPoint>)> {
    let a = MIYACHI_A;
    // wider than the default grid so the Hankel samples at imaginary z stay resolved
    let (radial, time) = heat_grids(alpha, 1.0 / (4.0 * a), &STRIP_GRID)?;
    let f = Fixture::HeatKernel { alpha, s: 1.0 / (4.0 * a) }.build_on(&radial, &time)?;
    let p = MiyachiParams::new(a, MIYACHI_B_DIVERGENT, 1.0, miyachi_big_a(alpha)?)?;
    let mut z_grid: Vec<Complex64> = (0..=24).map(|k| Complex64::new(0.25 * k as f64, 0.0)).collect();
    z_grid.extend((1..=8).map(|k| Complex64::new(0.0, 0.25 * k as f64)));
    z_grid.extend((1..=8).map(|k| Complex64::new(0.5 * k as f64, 1.0)));
    let mut out = Vec::with_capacity(fractions.len());
    for &fraction in fractions {
        let lambda = Complex64::new(xi, fraction * p.half_width);
        out.push(StripPoint {
            fraction,
            lambda_im: lambda.im,
            slice: slice_decay_check(&f, &p, lambda)?,
            hankel: hankel_strip_bound_check(&f, &p, &z_grid, lambda)?,
        });
    }
    Ok((p, out))
}

/// Interior fractions of the strip whose constants must be finite and stable.
pub const STRIP_INTERIOR: [f64; 3] = [0.0, 0.25, 0.5];

/// Real part of the strip frequencies: the smallest positive default
/// frequency sample of `h_{1/4}`.
pub const STRIP_XI: f64 = 2.0;

/// Fractions approaching the strip edge where the constants should blow up.
pub const STRIP_EDGE: [f64; 3] = [0.9, 0.99, 0.999];
