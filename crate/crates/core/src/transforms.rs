//! Time-slice Fourier transform, the Fourier-Laguerre transform and its
//! inverse, the Hankel transform, and the two sides of the Plancherel identity.
//!
//! Conventions: `f^lambda(x) = int f(x,t) e^{-i lambda t} dt` and
//! `fhat(lambda, m) = m! / (pi Gamma(m+alpha+1)) int f^lambda(x) phi_m(sqrt|lambda| x) x^{2alpha+1} dx`.
//! The basis functions `psi_{lambda,m}(x,t) = e^{i lambda t} Lag_m(|lambda| x^2)`
//! are used both for the forward pairing and for the inverse expansion.

use crate::error::{Error, Result};
use crate::grid::{GridFunction, RadialGrid, SpectralFunction, SpectralGrid, TimeGrid};
use crate::quadrature::{sum_real, ComplexSum};
use crate::special::{
    bessel_kernel_lead, bessel_kernel_unchecked, check_alpha, inverse_laguerre_at_zero,
    laguerre_functions_into, phi_all_into,
};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Largest tolerated ratio of a boundary time sample to the row integral.
pub const SLICE_TRUNCATION_TOL: f64 = 1e-8;

/// Largest tolerated Hankel integrand magnitude at the outermost radial node,
/// relative to its peak.
pub const HANKEL_TAIL_TOL: f64 = 1e-8;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// `f^lambda` sampled on a radial grid.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialSliceFn {
    pub lambda: Complex64,
    pub radial: RadialGrid,
    pub values: Vec<Complex64>,
}

impl RadialSliceFn {
    pub fn from_fn<F: FnMut(f64) -> Complex64>(radial: RadialGrid, lambda: Complex64, mut f: F) -> Result<Self> {
        let values: Vec<Complex64> = radial.x_nodes.iter().map(|&x| f(x)).collect();
        if let Some(index) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite { index });
        }
        Ok(RadialSliceFn { lambda, radial, values })
    }

    pub fn x_nodes(&self) -> &[f64] {
        &self.radial.x_nodes
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }
}

/// Quadrature factors `w_j e^{-i lambda t_j}` of the time integral.
fn time_phases(time: &TimeGrid, lambda: Complex64) -> Vec<Complex64> {
    (0..time.n_t)
        .map(|j| time.weight(j) * (Complex64::new(0.0, -1.0) * lambda * time.node(j)).exp())
        .collect()
}

/// Slice values plus the truncation ratio (largest boundary term over the
/// largest absolute row integral).
fn slice_with_ratio(f: &GridFunction, phases: &[Complex64]) -> (Vec<Complex64>, f64) {
    let n_t = f.n_t();
    let mut out = Vec::with_capacity(f.n_x());
    let mut boundary = 0.0_f64;
    let mut peak = 0.0_f64;
    for i in 0..f.n_x() {
        let row = f.row(i);
        let mut acc = ComplexSum::default();
        let mut abs = 0.0;
        for (v, p) in row.iter().zip(phases) {
            let term = v * p;
            acc.add(term);
            abs += term.norm();
        }
        out.push(acc.value());
        peak = peak.max(abs);
        let edge = (row[0] * phases[0]).norm().max((row[n_t - 1] * phases[n_t - 1]).norm());
        // the end weights are halved; undo that so the ratio measures the sample itself
        boundary = boundary.max(2.0 * edge);
    }
    let ratio = if peak > 0.0 { boundary / peak } else { 0.0 };
    (out, ratio)
}

/// `f^lambda(x_i) = int f(x_i, t) e^{-i lambda t} dt` by the trapezoid rule
/// on the time grid. For complex `lambda = xi + i eta` the same rule is
/// applied to the reweighted samples `f e^{eta t} e^{-i xi t}`.
pub fn time_slice_transform(f: &GridFunction, lambda: Complex64) -> Result<RadialSliceFn> {
    if !(lambda.re.is_finite() && lambda.im.is_finite()) {
        return Err(Error::Domain(format!("non-finite lambda {lambda}")));
    }
    let phases = time_phases(&f.time, lambda);
    let (values, ratio) = slice_with_ratio(f, &phases);
    if ratio > SLICE_TRUNCATION_TOL {
        return Err(Error::Truncation { ratio });
    }
    Ok(RadialSliceFn { lambda, radial: f.radial.clone(), values })
}

fn check_same_alpha(a: f64, b: f64) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::GridMismatch(format!("alpha {a} on one side, {b} on the other")))
    }
}

/// `1 / (pi Gamma(alpha+1) L_m^alpha(0)) = m! / (pi Gamma(m+alpha+1))` for `m = 0..=m_max`.
fn projection_constants(alpha: f64, m_max: usize) -> Vec<f64> {
    let c = crate::grid::m_alpha_constant(alpha);
    inverse_laguerre_at_zero(alpha, m_max).into_iter().map(|v| v * c).collect()
}

/// Projects one slice onto `phi_m(sqrt|lambda| x)` for `m = 0..=m_max`.
fn project_slice(radial: &RadialGrid, lambda: f64, slice: &[Complex64], consts: &[f64], out: &mut [Complex64]) {
    let n_m = consts.len();
    let mut acc = vec![ComplexSum::default(); n_m];
    let mut buf = vec![0.0; n_m];
    let root = lambda.abs().sqrt();
    for (i, (&x, &w)) in radial.x_nodes.iter().zip(&radial.radial_weights).enumerate() {
        let v = slice[i] * w;
        if v == ZERO {
            continue;
        }
        phi_all_into(radial.alpha, root * x, &mut buf);
        for (a, &p) in acc.iter_mut().zip(&buf) {
            a.add(v * p);
        }
    }
    for ((o, a), c) in out.iter_mut().zip(&acc).zip(consts) {
        *o = a.value() * *c;
    }
}

/// The Fourier-Laguerre transform `fhat(lambda, m)` on the nodes of `grid`.
pub fn fourier_laguerre_forward(f: &GridFunction, grid: &SpectralGrid) -> Result<SpectralFunction> {
    check_same_alpha(f.radial.alpha, grid.alpha)?;
    let consts = projection_constants(grid.alpha, grid.m_max);
    let n_m = grid.n_m();
    let mut values = vec![ZERO; grid.n_lambda() * n_m];
    let mut worst = 0.0_f64;
    for (l, &lambda) in grid.lambda_nodes.iter().enumerate() {
        let phases = time_phases(&f.time, Complex64::new(lambda, 0.0));
        let (slice, ratio) = slice_with_ratio(f, &phases);
        worst = worst.max(ratio);
        project_slice(&f.radial, lambda, &slice, &consts, &mut values[l * n_m..(l + 1) * n_m]);
    }
    if worst > SLICE_TRUNCATION_TOL {
        return Err(Error::Truncation { ratio: worst });
    }
    SpectralFunction::new(grid.clone(), values)
}

/// Projection of an already computed slice; the transform at a single `lambda`.
pub fn fourier_laguerre_of_slice(slice: &RadialSliceFn, m_max: usize) -> Result<Vec<Complex64>> {
    if slice.lambda.im != 0.0 || slice.lambda.re == 0.0 {
        return Err(Error::Domain(format!("the Laguerre basis needs real lambda != 0, got {}", slice.lambda)));
    }
    let consts = projection_constants(slice.radial.alpha, m_max);
    let mut out = vec![ZERO; m_max + 1];
    project_slice(&slice.radial, slice.lambda.re, &slice.values, &consts, &mut out);
    Ok(out)
}

/// `T_m = sum_lambda gamma(lambda, m) |F(lambda, m)|` for every `m`.
pub fn m_tail_profile(f: &SpectralFunction) -> Vec<f64> {
    let g = &f.grid;
    (0..g.n_m())
        .map(|m| sum_real((0..g.n_lambda()).map(|l| g.gamma_weight(l, m) * f.at(l, m).norm())))
        .collect()
}

fn check_m_tail(f: &SpectralFunction) -> Result<()> {
    let t = m_tail_profile(f);
    let max = t.iter().cloned().fold(0.0, f64::max);
    let n = t.len();
    if n >= 3 && max > 0.0 {
        let last = &t[n - 3..];
        if last[0] <= last[1] && last[1] <= last[2] && last[2] > 1e-8 * max {
            return Err(Error::Divergence {
                detail: format!("T[m_max-2..=m_max] = {:.3e}, {:.3e}, {:.3e}; peak {max:.3e}", last[0], last[1], last[2]),
            });
        }
    }
    Ok(())
}

/// `f(x,t) = int F psi_{lambda,m}(x,t) dgamma_alpha` on the requested grids.
pub fn fourier_laguerre_inverse(f: &SpectralFunction, radial: &RadialGrid, time: &TimeGrid) -> Result<GridFunction> {
    let g = &f.grid;
    check_same_alpha(radial.alpha, g.alpha)?;
    check_m_tail(f)?;
    let n_x = radial.len();
    let n_t = time.n_t;
    let n_m = g.n_m();
    let inv_l0 = inverse_laguerre_at_zero(g.alpha, g.m_max);
    let t = time.nodes();
    let mut acc = vec![ComplexSum::default(); n_x * n_t];
    let mut lag = vec![0.0; n_m];
    let mut radial_part = vec![ZERO; n_x];
    let mut coeff = vec![ZERO; n_m];
    let mut phase = vec![ZERO; n_t];
    for (l, &lambda) in g.lambda_nodes.iter().enumerate() {
        let mut any = false;
        for m in 0..n_m {
            coeff[m] = f.at(l, m) * g.gamma_weight(l, m);
            any |= coeff[m] != ZERO;
        }
        if !any {
            continue;
        }
        for (i, &x) in radial.x_nodes.iter().enumerate() {
            laguerre_functions_into(g.alpha, lambda.abs() * x * x, &inv_l0, &mut lag);
            let mut s = ComplexSum::default();
            for (c, v) in coeff.iter().zip(&lag) {
                s.add(c * v);
            }
            radial_part[i] = s.value();
        }
        for (p, &tj) in phase.iter_mut().zip(&t) {
            *p = Complex64::from_polar(1.0, lambda * tj);
        }
        for (i, r) in radial_part.iter().enumerate() {
            if *r == ZERO {
                continue;
            }
            for (a, p) in acc[i * n_t..(i + 1) * n_t].iter_mut().zip(&phase) {
                a.add(r * p);
            }
        }
    }
    GridFunction::new(radial.clone(), *time, acc.iter().map(ComplexSum::value).collect())
}

/// `(H_alpha g)(y) = int g(x) (J_alpha(xy)/(xy)^alpha) x^{2alpha+1} dx`.
pub fn hankel_transform(g: &RadialSliceFn, alpha: f64, y: Complex64) -> Result<Complex64> {
    Ok(hankel_transform_many(g, alpha, &[y])?[0])
}

/// [`hankel_transform`] at several points.
///
/// Fails with a growth error when the integrand, including the `e^{|Im y| x}`
/// growth of the kernel, has not decayed to [`HANKEL_TAIL_TOL`] of its peak at
/// the outermost node.
pub fn hankel_transform_many(g: &RadialSliceFn, alpha: f64, ys: &[Complex64]) -> Result<Vec<Complex64>> {
    check_alpha(alpha)?;
    check_same_alpha(g.radial.alpha, alpha)?;
    let lead = bessel_kernel_lead(alpha);
    let xs = &g.radial.x_nodes;
    let ws = &g.radial.radial_weights;
    let mut out = Vec::with_capacity(ys.len());
    for &y in ys {
        if !(y.re.is_finite() && y.im.is_finite()) {
            return Err(Error::Domain(format!("non-finite Hankel argument {y}")));
        }
        let envelope: Vec<f64> = xs
            .iter()
            .zip(&g.values)
            .map(|(&x, v)| v.norm() * x.powf(2.0 * alpha + 1.0) * (y.im.abs() * x).exp())
            .collect();
        let peak = envelope.iter().cloned().fold(0.0, f64::max);
        if peak > 0.0 {
            let tail = *envelope.last().unwrap_or(&0.0);
            if !(tail <= HANKEL_TAIL_TOL * peak) {
                return Err(Error::Growth(format!(
                    "Hankel integrand at x = {} is {:.3e} of its peak (y = {y})",
                    g.radial.x_max(),
                    tail / peak
                )));
            }
        }
        let mut acc = ComplexSum::default();
        for ((&x, &w), v) in xs.iter().zip(ws).zip(&g.values) {
            if *v == ZERO {
                continue;
            }
            acc.add(v * w * bessel_kernel_unchecked(alpha, lead, y * x));
        }
        out.push(acc.value());
    }
    Ok(out)
}

/// `||f||_{L^2(dm_alpha)}` on the grid.
pub fn grid_l2_norm(f: &GridFunction) -> f64 {
    let mut terms = Vec::with_capacity(f.values.len());
    for i in 0..f.n_x() {
        for j in 0..f.n_t() {
            terms.push(f.cell_weight(i, j) * f.at(i, j).norm_sqr());
        }
    }
    sum_real(terms).sqrt()
}

/// `||F||_{L^2(dgamma_alpha)}` on the spectral grid.
pub fn spectral_l2_norm(f: &SpectralFunction) -> f64 {
    sum_real(f.values.iter().zip(&f.grid.gamma_weights).map(|(v, w)| w * v.norm_sqr())).sqrt()
}

/// Largest degree the Plancherel sum reaches at any frequency.
pub const PLANCHEREL_M_CAP: usize = 1 << 14;

const M_BLOCK: usize = 64;
const M_TAIL_TOL: f64 = 1e-10;

/// `sum_m gamma(lambda, m) |fhat(lambda, m)|^2 / w_lambda` for one slice. The
/// degrees run past `m_min` until a block of [`M_BLOCK`] contributes less than
/// [`M_TAIL_TOL`] of the running sum, the basis oscillates faster than the
/// radial nodes resolve, or [`PLANCHEREL_M_CAP`] is reached.
fn slice_energy(radial: &RadialGrid, lambda: f64, slice: &[Complex64], m_min: usize) -> f64 {
    let alpha = radial.alpha;
    let l = lambda.abs();
    // Laguerre recurrence run for every node at once, one degree per step
    let v: Vec<Complex64> = slice.iter().zip(&radial.radial_weights).map(|(s, w)| s * w).collect();
    let u: Vec<f64> = radial.x_nodes.iter().map(|&x| l * x * x).collect();
    let mut prev: Vec<f64> = u.iter().map(|&u| (-0.5 * u).exp()).collect();
    let mut cur: Vec<f64> = prev.iter().zip(&u).map(|(p, &u)| p * (1.0 + alpha - u)).collect();
    let c = crate::grid::m_alpha_constant(alpha);
    let k_max = 0.25 * PI * radial.node_density();
    let resolved = |m: usize| l * (4.0 * m as f64 + 2.0 * alpha + 2.0) <= k_max * k_max;
    let project = |phi: &[f64]| -> f64 {
        let mut acc = ComplexSum::default();
        for (vi, &p) in v.iter().zip(phi) {
            acc.add(vi * p);
        }
        acc.value().norm_sqr()
    };
    // gamma_m |fhat_m|^2 = |lambda|^{alpha+1} c^2 |P_m|^2 / L_m(0)
    let mut l0 = 1.0;
    let mut total = project(&prev) / l0;
    let mut block = 0.0;
    let mut m = 0usize;
    loop {
        m += 1;
        l0 *= (m as f64 + alpha) / m as f64;
        let term = project(&cur) / l0;
        total += term;
        block += term;
        if m >= m_min && m % M_BLOCK == 0 {
            if block <= M_TAIL_TOL * total || m >= PLANCHEREL_M_CAP || !resolved(m + M_BLOCK) {
                break;
            }
            block = 0.0;
        }
        let mf = m as f64;
        for ((p, q), &u) in prev.iter_mut().zip(cur.iter_mut()).zip(&u) {
            let next = ((2.0 * mf + alpha + 1.0 - u) * *q - (mf + alpha) * *p) / (mf + 1.0);
            *p = *q;
            *q = next;
        }
    }
    total * l.powf(alpha + 1.0) * c * c
}

/// Both sides of the Plancherel identity: `(||f||_2, ||fhat||_2)`.
///
/// The spectral side uses the frequencies of `grid` and at least its
/// `m_max + 1` degrees. Near `lambda = 0` the basis spreads like
/// `|lambda|^{-1/2}`, so a fixed degree cut loses a share of the norm that only
/// falls like `1/m_max`; there the degree sum is extended until its tail has
/// converged.
pub fn plancherel_norms(f: &GridFunction, grid: &SpectralGrid) -> Result<(f64, f64)> {
    check_same_alpha(f.radial.alpha, grid.alpha)?;
    let mut terms = Vec::with_capacity(grid.n_lambda());
    let mut worst = 0.0_f64;
    for (&lambda, &w) in grid.lambda_nodes.iter().zip(&grid.lambda_weights) {
        let phases = time_phases(&f.time, Complex64::new(lambda, 0.0));
        let (slice, ratio) = slice_with_ratio(f, &phases);
        worst = worst.max(ratio);
        terms.push(w * slice_energy(&f.radial, lambda, &slice, grid.m_max));
    }
    if worst > SLICE_TRUNCATION_TOL {
        return Err(Error::Truncation { ratio: worst });
    }
    Ok((grid_l2_norm(f), sum_real(terms).sqrt()))
}

/// Whether `(lambda, m)` lies in the band the grids resolve: the profile
/// `phi_m(sqrt|lambda| x)` fits inside the radial range, its fastest radial
/// oscillation stays below the node density, and `e^{i lambda t}` is sampled
/// above twice the Nyquist rate.
pub fn is_resolved(radial: &RadialGrid, time: &TimeGrid, lambda: f64, m: usize) -> bool {
    if lambda == 0.0 {
        return false;
    }
    let nu = 4.0 * m as f64 + 2.0 * radial.alpha + 2.0;
    let l = lambda.abs();
    let extent = (nu.sqrt() + 6.0) / l.sqrt();
    let freq = (l * nu).sqrt() / PI;
    extent <= radial.x_max() && freq <= 0.25 * radial.node_density() && l * time.step <= 0.5 * PI
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SpectralLayout;
    use crate::special::{phi, LaguerreIndex};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn gaussian_slice_at_zero_frequency() {
        let radial = RadialGrid::gauss_panels(0.5, 4.0, 4, 8).unwrap();
        let time = TimeGrid::new(9.0, 513).unwrap();
        let f = GridFunction::from_fn(radial, time, |x, t| c((1.0 + x) * (-t * t).exp())).unwrap();
        let s = time_slice_transform(&f, c(0.0)).unwrap();
        for (x, v) in s.x_nodes().iter().zip(&s.values) {
            assert!((v.re - (1.0 + x) * PI.sqrt()).abs() < 1e-13, "{v}");
        }
        let z = GridFunction::zeros(f.radial.clone(), time);
        assert_eq!(time_slice_transform(&z, c(1.0)).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn truncated_time_window_is_reported() {
        let radial = RadialGrid::gauss_panels(0.0, 2.0, 1, 4).unwrap();
        let time = TimeGrid::new(2.0, 65).unwrap();
        let f = GridFunction::from_fn(radial, time, |_, t| c((-t * t).exp())).unwrap();
        assert!(matches!(time_slice_transform(&f, c(0.0)), Err(Error::Truncation { .. })));
    }

    #[test]
    fn hankel_maps_phi_to_signed_phi() {
        let alpha = 1.0;
        let radial = RadialGrid::gauss_panels(alpha, 12.0, 24, 16).unwrap();
        for m in [0usize, 3] {
            let idx = LaguerreIndex::new(m, alpha).unwrap();
            let g = RadialSliceFn::from_fn(radial.clone(), c(0.0), |x| c(phi(idx, x).unwrap())).unwrap();
            for y in [0.0, 0.7, 2.5, 6.0] {
                let h = hankel_transform(&g, alpha, c(y)).unwrap();
                let want = if m % 2 == 0 { 1.0 } else { -1.0 } * phi(idx, y).unwrap();
                assert!((h.re - want).abs() < 1e-10, "m={m} y={y}: {h} vs {want}");
            }
        }
    }

    #[test]
    fn hankel_rejects_slow_decay() {
        let radial = RadialGrid::gauss_panels(0.0, 5.0, 2, 8).unwrap();
        let g = RadialSliceFn::from_fn(radial, c(0.0), |x| c((-x).exp())).unwrap();
        assert!(matches!(hankel_transform(&g, 0.0, c(1.0)), Err(Error::Growth(_))));
    }

    #[test]
    fn zero_function_transforms_to_zero() {
        let radial = RadialGrid::gauss_panels(0.0, 4.0, 2, 8).unwrap();
        let time = TimeGrid::new(5.0, 64).unwrap();
        let f = GridFunction::zeros(radial.clone(), time);
        let grid = SpectralGrid::new(0.0, 4, SpectralLayout::new(4.0, 0.5)).unwrap();
        let fhat = fourier_laguerre_forward(&f, &grid).unwrap();
        assert_eq!(fhat.max_abs(), 0.0);
        let back = fourier_laguerre_inverse(&fhat, &radial, &time).unwrap();
        assert_eq!(back.max_abs(), 0.0);
        assert_eq!(plancherel_norms(&f, &grid).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn growing_m_tail_is_divergent() {
        let grid = SpectralGrid::new(0.0, 6, SpectralLayout::new(2.0, 0.5)).unwrap();
        let f = SpectralFunction::from_fn(grid, |_, m| c(1.0 + m as f64)).unwrap();
        let radial = RadialGrid::gauss_panels(0.0, 2.0, 1, 4).unwrap();
        let time = TimeGrid::new(1.0, 8).unwrap();
        assert!(matches!(fourier_laguerre_inverse(&f, &radial, &time), Err(Error::Divergence { .. })));
    }
}
