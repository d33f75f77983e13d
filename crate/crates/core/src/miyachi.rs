//! Numerical certificates for the Miyachi-type uncertainty theorem on `K`.
//!
//! A function passes the first hypothesis when its time slices obey
//! `|f^lambda(x)| <= C e^{-4aA x^2}` for `lambda` in the strip `|Im lambda| < 4aA`,
//! and the second when the `log+` integral of its Hankel-transformed slices
//! stays bounded over a ladder of radii. With `ab > 1/4` the theorem then
//! forces `f = 0`, which the report checks against the grid norm.

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::heat::GaussianEstimate;
use crate::quadrature::{composite_legendre, sum_real};
use crate::transforms::{grid_l2_norm, hankel_transform_many, time_slice_transform, RadialSliceFn};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Default radii of the truncated `log+` integrals.
pub const DEFAULT_R_LADDER: [f64; 5] = [4.0, 6.0, 8.0, 12.0, 16.0];

/// The `delta` values whose ladders are recorded alongside the main one.
pub const DELTA_LADDER: [f64; 3] = [0.1, 1.0, 10.0];

/// Growth factor of the bound constant under a 25% grid extension that still
/// counts as stable.
pub const STABLE_GROWTH: f64 = 1.1;

/// Growth factor reported as a blow-up of the bound constant.
pub const BLOW_UP_GROWTH: f64 = 10.0;

/// Smallest ladder ratio counted as growth.
pub const DIVERGENCE_RATIO: f64 = 1.0 + 1e-3;

/// Longest Gauss panel of the `log+` quadrature.
const Y_PANEL: f64 = 0.5;
const Y_ORDER: usize = 16;

/// `max(log x, 0)`.
pub fn log_plus(x: f64) -> f64 {
    if x > 1.0 {
        x.ln()
    } else {
        0.0
    }
}

/// Parameters of a certificate. `half_width = 4 a A` bounds the strip of
/// admissible complex frequencies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MiyachiParams {
    pub a: f64,
    pub b: f64,
    pub delta: f64,
    #[serde(rename = "A")]
    pub big_a: f64,
    pub half_width: f64,
}

impl MiyachiParams {
    pub fn new(a: f64, b: f64, delta: f64, big_a: f64) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b), ("delta", delta), ("A", big_a)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(MiyachiParams { a, b, delta, big_a, half_width: 4.0 * a * big_a })
    }

    /// Takes `A` from a fitted Gaussian estimate.
    pub fn from_estimate(a: f64, b: f64, delta: f64, est: &GaussianEstimate) -> Result<Self> {
        MiyachiParams::new(a, b, delta, est.a)
    }

    pub fn with_delta(self, delta: f64) -> Result<Self> {
        MiyachiParams::new(self.a, self.b, delta, self.big_a)
    }

    pub fn product_ab(&self) -> f64 {
        self.a * self.b
    }

    fn check_strip(&self, lambda: Complex64) -> Result<()> {
        if lambda.im.abs() < self.half_width {
            Ok(())
        } else {
            Err(Error::StripViolation { im: lambda.im, half_width: self.half_width })
        }
    }
}

/// Outcome of a bound check. `c` makes the bound hold on every sample,
/// `c_inner` on the samples inside the grid shrunk by `1/1.25`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    #[serde(rename = "C")]
    pub c: f64,
    pub c_inner: f64,
    /// `c / c_inner` (1 when both vanish).
    pub growth: f64,
    pub pass: bool,
}

impl BoundCheck {
    /// `ratios` are `(position, |value| / bound shape)`; positions at most
    /// `inner_edge` form the inner grid.
    fn from_ratios(ratios: impl Iterator<Item = (f64, f64)>, inner_edge: f64) -> Self {
        let (mut c, mut c_inner) = (0.0_f64, 0.0_f64);
        for (pos, r) in ratios {
            // NaN propagates into c so the check fails
            if r.is_nan() || r > c {
                c = r;
            }
            if pos <= inner_edge && r > c_inner {
                c_inner = r;
            }
        }
        let growth = if c == 0.0 { 1.0 } else { c / c_inner };
        let pass = c.is_finite() && growth <= STABLE_GROWTH;
        BoundCheck { c, c_inner, growth, pass }
    }

    /// True when the constant grows past [`BLOW_UP_GROWTH`] under the extension.
    pub fn blows_up(&self) -> bool {
        !(self.growth <= BLOW_UP_GROWTH)
    }
}

/// Checks `|f^lambda(x)| <= C e^{-4aA x^2}` on the radial grid of `f`.
pub fn slice_decay_check(f: &GridFunction, p: &MiyachiParams, lambda: Complex64) -> Result<BoundCheck> {
    p.check_strip(lambda)?;
    let slice = time_slice_transform(f, lambda)?;
    Ok(slice_bound(&slice, p))
}

fn slice_bound(slice: &RadialSliceFn, p: &MiyachiParams) -> BoundCheck {
    let edge = slice.radial.x_max() / 1.25;
    let ratios = slice
        .x_nodes()
        .iter()
        .zip(&slice.values)
        .map(|(&x, v)| (x, ratio(v.norm(), p.half_width * x * x)));
    BoundCheck::from_ratios(ratios, edge)
}

/// `v e^{e}` without overflowing to NaN for `v = 0`.
fn ratio(v: f64, e: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        (v.ln() + e).exp()
    }
}

/// Checks `|H_alpha(f^lambda)(z)| <= C e^{(Im z)^2 / 4aA}` on `z_grid`. The
/// inner grid is `|z| <= max |z| / 1.25`.
pub fn hankel_strip_bound_check(
    f: &GridFunction,
    p: &MiyachiParams,
    z_grid: &[Complex64],
    lambda: Complex64,
) -> Result<BoundCheck> {
    p.check_strip(lambda)?;
    let slice = time_slice_transform(f, lambda)?;
    let h = hankel_transform_many(&slice, slice.radial.alpha, z_grid)?;
    let edge = z_grid.iter().fold(0.0_f64, |m, z| m.max(z.norm())) / 1.25;
    let ratios = z_grid
        .iter()
        .zip(&h)
        .map(|(z, v)| (z.norm(), ratio(v.norm(), -z.im * z.im / p.half_width)));
    Ok(BoundCheck::from_ratios(ratios, edge))
}

/// Least-squares coefficient `c2` of `log|H_alpha(f^lambda)(iy)| ~ c0 + c2 y^2`
/// over `ys`. The strip bound asks for `c2 <= 1/(4aA)`.
pub fn hankel_growth_coefficient(f: &GridFunction, lambda: f64, ys: &[f64]) -> Result<f64> {
    let slice = time_slice_transform(f, Complex64::new(lambda, 0.0))?;
    let zs: Vec<Complex64> = ys.iter().map(|&y| Complex64::new(0.0, y)).collect();
    let h = hankel_transform_many(&slice, slice.radial.alpha, &zs)?;
    let pts: Vec<(f64, f64)> = ys.iter().zip(&h).filter(|(_, v)| v.norm() > 0.0).map(|(&y, v)| (y * y, v.norm().ln())).collect();
    if pts.len() < 2 {
        return Err(Error::Domain("need two nonzero Hankel samples for the regression".into()));
    }
    let n = pts.len() as f64;
    let mu = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let nu = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mu) * (p.1 - nu)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mu) * (p.0 - mu)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("regression needs at least two distinct |y|".into()));
    }
    Ok(sxy / sxx)
}

/// Coefficient of variation of the pivot `g(y) = e^{y^2/4a} H_alpha(f^lambda)(y)`
/// over `ys`. It vanishes when the Hankel transform is exactly `c e^{-y^2/4a}`.
pub fn pivot_variation(f: &GridFunction, a: f64, lambda: f64, ys: &[f64]) -> Result<f64> {
    let slice = time_slice_transform(f, Complex64::new(lambda, 0.0))?;
    let zs: Vec<Complex64> = ys.iter().map(|&y| Complex64::new(y, 0.0)).collect();
    let h = hankel_transform_many(&slice, slice.radial.alpha, &zs)?;
    let g: Vec<Complex64> = ys.iter().zip(&h).map(|(&y, v)| v * (y * y / (4.0 * a)).exp()).collect();
    let n = g.len() as f64;
    let mean = g.iter().sum::<Complex64>() / n;
    let var = g.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / n;
    if mean.norm() == 0.0 {
        return Err(Error::Domain("pivot has zero mean".into()));
    }
    Ok(var.sqrt() / mean.norm())
}

/// Quadrature on `[0, max R]` whose panel ends include every ladder radius.
/// Returns the rule and, per radius, the number of nodes below it.
fn ladder_rule(ladder: &[f64]) -> Result<(Vec<f64>, Vec<f64>, Vec<usize>)> {
    let mut radii: Vec<f64> = ladder.to_vec();
    radii.sort_by(f64::total_cmp);
    let mut breaks = vec![0.0];
    for &r in &radii {
        let lo = *breaks.last().unwrap_or(&0.0);
        if r > lo {
            let n = ((r - lo) / Y_PANEL).ceil() as usize;
            breaks.extend((1..=n).map(|k| lo + (r - lo) * k as f64 / n as f64));
        }
    }
    if breaks.len() < 2 {
        return Ok((Vec::new(), Vec::new(), vec![0; ladder.len()]));
    }
    let rule = composite_legendre(&breaks, Y_ORDER)?;
    let counts = ladder.iter().map(|&r| rule.nodes.iter().filter(|&&y| y <= r).count()).collect();
    Ok((rule.nodes, rule.weights, counts))
}

fn check_ladder(ladder: &[f64]) -> Result<()> {
    match ladder.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
        Some(r) => Err(Error::Domain(format!("radius must be positive and finite, got {r}"))),
        None => Ok(()),
    }
}

/// Hankel samples of one slice on the ladder quadrature, kept so several
/// `delta` values can reuse them.
struct LadderData {
    alpha: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    counts: Vec<usize>,
    log_h: Vec<f64>,
}

impl LadderData {
    fn new(f: &GridFunction, lambda: f64, ladder: &[f64]) -> Result<Self> {
        check_ladder(ladder)?;
        let slice = time_slice_transform(f, Complex64::new(lambda, 0.0))?;
        let (nodes, weights, counts) = ladder_rule(ladder)?;
        let zs: Vec<Complex64> = nodes.iter().map(|&y| Complex64::new(y, 0.0)).collect();
        let h = hankel_transform_many(&slice, slice.radial.alpha, &zs)?;
        let log_h = h.iter().map(|v| v.norm().ln()).collect();
        Ok(LadderData { alpha: slice.radial.alpha, nodes, weights, counts, log_h })
    }

    /// `int_{|y|<=R} log+(|H(y)| e^{b y^2} / delta) |y|^{2alpha+1} dy` per radius.
    fn integrals(&self, b: f64, delta: f64) -> Vec<f64> {
        let ld = delta.ln();
        let terms: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .zip(&self.log_h)
            .map(|((&y, &w), &lh)| {
                // log+ of the ratio, computed in logs to avoid overflow
                let e = lh + b * y * y - ld;
                if e > 0.0 {
                    2.0 * w * e * y.powf(2.0 * self.alpha + 1.0)
                } else {
                    0.0
                }
            })
            .collect();
        self.counts.iter().map(|&n| sum_real(terms[..n].iter().copied())).collect()
    }
}

/// The truncated `log+` integral over `|y| <= R`.
pub fn logplus_integral(f: &GridFunction, p: &MiyachiParams, lambda: f64, r: f64) -> Result<f64> {
    Ok(logplus_ladder(f, p, lambda, &[r])?[0].1)
}

/// [`logplus_integral`] for every radius of `ladder`, as `(R, value)` pairs.
pub fn logplus_ladder(f: &GridFunction, p: &MiyachiParams, lambda: f64, ladder: &[f64]) -> Result<Vec<(f64, f64)>> {
    let data = LadderData::new(f, lambda, ladder)?;
    Ok(ladder.iter().copied().zip(data.integrals(p.b, p.delta)).collect())
}

/// True when the last three ratios of consecutive ladder values all exceed
/// [`DIVERGENCE_RATIO`]. A step from zero to a positive value counts as growth.
pub fn classify_divergent(values: &[f64]) -> bool {
    if values.len() < 4 {
        return false;
    }
    values.windows(2).rev().take(3).all(|w| {
        if w[0] > 0.0 {
            w[1] / w[0] > DIVERGENCE_RATIO
        } else {
            w[1] > 0.0
        }
    })
}

/// `{+-0.5, +-1, +-2} / s`.
pub fn default_lambda_samples(s: f64) -> Vec<f64> {
    [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0].iter().map(|v| v / s).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Conclusion {
    MustVanish,
    HypothesesNotMet,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis1 {
    #[serde(rename = "fitted_C")]
    pub fitted_c: f64,
    /// Largest relative excess `c / c_inner - 1` over the samples.
    pub max_violation: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaLadder {
    pub delta: f64,
    /// Ladder of the sample with the largest final value.
    pub truncated_integrals: Vec<(f64, f64)>,
    /// Divergent at any sample.
    pub divergent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis2 {
    /// Ladder at the parameters' `delta` for the sample with the largest final value.
    pub truncated_integrals: Vec<(f64, f64)>,
    pub divergent: bool,
    /// Bounded at every sample and no sample failed to compute.
    pub pass: bool,
    pub delta_ladders: Vec<DeltaLadder>,
}

/// Per-frequency verdicts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaVerdict {
    pub lambda: f64,
    pub slice: Option<BoundCheck>,
    pub truncated_integrals: Vec<(f64, f64)>,
    pub divergent: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub params: MiyachiParams,
    pub hypothesis1: Hypothesis1,
    pub hypothesis2: Hypothesis2,
    pub product_ab: f64,
    pub conclusion: Conclusion,
    pub residual_norm: f64,
    /// `1e-6` times the measure of the grid box.
    pub tolerance: f64,
    /// Set when the conclusion is `must_vanish` yet the residual exceeds the
    /// tolerance, i.e. the numerics contradict the theorem.
    pub theorem_stress: bool,
    pub per_lambda: Vec<LambdaVerdict>,
}

fn conclude(h1: bool, h2: bool, ab: f64) -> Conclusion {
    if !(h1 && h2) {
        Conclusion::HypothesesNotMet
    } else if ab > 0.25 {
        Conclusion::MustVanish
    } else {
        Conclusion::Inconclusive
    }
}

fn grid_mass(f: &GridFunction) -> f64 {
    let mut terms = Vec::with_capacity(f.values.len());
    for i in 0..f.n_x() {
        for j in 0..f.n_t() {
            terms.push(f.cell_weight(i, j));
        }
    }
    sum_real(terms)
}

/// Runs both hypotheses over the frequency samples and the radius ladder.
/// Sub-check failures are recorded per frequency and count as the
/// hypothesis not being met; a report is always produced.
pub fn miyachi_certificate(f: &GridFunction, p: &MiyachiParams, lambda_samples: &[f64], r_ladder: &[f64]) -> CertificateReport {
    let mut per_lambda = Vec::with_capacity(lambda_samples.len());
    let mut delta_runs: Vec<(f64, Vec<Vec<f64>>)> = DELTA_LADDER.iter().map(|&d| (d, Vec::new())).collect();
    let mut main_runs: Vec<Vec<f64>> = Vec::new();
    let mut failed = false;
    for &lambda in lambda_samples {
        let mut v = LambdaVerdict { lambda, slice: None, truncated_integrals: Vec::new(), divergent: false, error: None };
        match slice_decay_check(f, p, Complex64::new(lambda, 0.0)) {
            Ok(c) => v.slice = Some(c),
            Err(e) => v.error = Some(e.to_string()),
        }
        match LadderData::new(f, lambda, r_ladder) {
            Ok(data) => {
                let vals = data.integrals(p.b, p.delta);
                v.divergent = classify_divergent(&vals);
                v.truncated_integrals = r_ladder.iter().copied().zip(vals.iter().copied()).collect();
                main_runs.push(vals);
                for (d, runs) in delta_runs.iter_mut() {
                    runs.push(data.integrals(p.b, *d));
                }
            }
            Err(e) => {
                failed = true;
                let msg = e.to_string();
                v.error = Some(v.error.map_or(msg.clone(), |old| format!("{old}; {msg}")));
            }
        }
        per_lambda.push(v);
    }
    let h1_pass = !per_lambda.is_empty() && per_lambda.iter().all(|v| v.slice.map_or(false, |c| c.pass));
    let fitted_c = per_lambda.iter().filter_map(|v| v.slice.map(|c| c.c)).fold(0.0, f64::max);
    let max_violation = per_lambda
        .iter()
        .filter_map(|v| v.slice.map(|c| (c.growth - 1.0).max(0.0)))
        .fold(0.0, f64::max);
    let worst = |runs: &[Vec<f64>]| -> Vec<(f64, f64)> {
        let pick = runs
            .iter()
            .max_by(|a, b| a.last().unwrap_or(&0.0).total_cmp(b.last().unwrap_or(&0.0)));
        pick.map_or(Vec::new(), |vals| r_ladder.iter().copied().zip(vals.iter().copied()).collect())
    };
    let divergent = main_runs.iter().any(|v| classify_divergent(v));
    let delta_ladders = delta_runs
        .iter()
        .map(|(d, runs)| DeltaLadder {
            delta: *d,
            truncated_integrals: worst(runs),
            divergent: runs.iter().any(|v| classify_divergent(v)),
        })
        .collect();
    let hypothesis2 = Hypothesis2 {
        truncated_integrals: worst(&main_runs),
        divergent,
        pass: !divergent && !failed && !main_runs.is_empty(),
        delta_ladders,
    };
    let product_ab = p.product_ab();
    let conclusion = conclude(h1_pass, hypothesis2.pass, product_ab);
    let residual_norm = grid_l2_norm(f);
    let tolerance = 1e-6 * grid_mass(f);
    CertificateReport {
        params: *p,
        hypothesis1: Hypothesis1 { fitted_c, max_violation, pass: h1_pass },
        hypothesis2,
        product_ab,
        conclusion,
        theorem_stress: conclusion == Conclusion::MustVanish && !(residual_norm <= tolerance),
        residual_norm,
        tolerance,
        per_lambda,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_plus_values() {
        assert_eq!(log_plus(std::f64::consts::E), 1.0);
        assert_eq!(log_plus(0.5), 0.0);
        assert_eq!(log_plus(1.0), 0.0);
        assert_eq!(log_plus(0.0), 0.0);
    }

    #[test]
    fn params_validate() {
        assert!(MiyachiParams::new(1.0, 0.3, 1.0, 0.2).is_ok());
        assert!(MiyachiParams::new(0.0, 0.3, 1.0, 0.2).is_err());
        assert!(MiyachiParams::new(1.0, 0.3, -1.0, 0.2).is_err());
        let p = MiyachiParams::new(0.5, 0.3, 1.0, 0.2).unwrap();
        assert!((p.half_width - 0.4).abs() < 1e-15);
    }

    #[test]
    fn divergence_classification() {
        assert!(classify_divergent(&[1.0, 2.0, 3.0, 4.0, 5.0]));
        assert!(!classify_divergent(&[1.0, 2.0, 3.0, 3.0, 3.0]));
        assert!(!classify_divergent(&[0.0, 0.0, 0.0, 0.0, 0.0]));
        assert!(!classify_divergent(&[1.0, 2.0, 3.0]));
        assert!(classify_divergent(&[0.0, 0.0, 1.0, 2.0, 3.0]));
    }

    #[test]
    fn ladder_rule_hits_every_radius() {
        let (nodes, weights, counts) = ladder_rule(&[4.0, 6.0, 1.3]).unwrap();
        let len = |n: usize| weights[..n].iter().sum::<f64>();
        assert!((len(counts[0]) - 4.0).abs() < 1e-13);
        assert!((len(counts[1]) - 6.0).abs() < 1e-13);
        assert!((len(counts[2]) - 1.3).abs() < 1e-13);
        assert_eq!(nodes.len(), weights.len());
    }
}
