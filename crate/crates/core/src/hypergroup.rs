//! Generalized translation and convolution on the Laguerre hypergroup,
//! `L^p(dm_alpha)` norms, the basis functions `psi_{lambda,m}`, and a
//! finite-difference application of
//! `L = d^2/dx^2 + ((2alpha+1)/x) d/dx + x^2 d^2/dt^2`.
//!
//! Translation:
//! `T_{(x,t)} f(y,s) = (alpha/pi) int_0^1 int_0^{2pi} f(R, s + t + x y r sin th) r (1-r^2)^{alpha-1} dth dr`
//! with `R^2 = x^2 + y^2 + 2 x y r cos th`, and for `alpha = 0` the single
//! average `(1/2pi) int f(R, s + t + x y sin th) dth` with `r = 1`.

use crate::error::{Error, Result};
use crate::grid::{GridFunction, RadialGrid, RadialKind, TimeGrid};
use crate::quadrature::{gauss_jacobi, gauss_legendre, sum_real, ComplexSum, QuadratureRule, RuleKind};
use crate::special::{check_alpha, laguerre_function, LaguerreIndex};
use crate::transforms::time_slice_transform;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// A point `(x, t)` of `K = [0, inf) x R`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointK {
    pub x: f64,
    pub t: f64,
}

impl PointK {
    pub fn new(x: f64, t: f64) -> Result<Self> {
        if !(x >= 0.0) || !x.is_finite() || !t.is_finite() {
            return Err(Error::Domain(format!("({x}, {t}) is not a point of K")));
        }
        Ok(PointK { x, t })
    }

    pub const ORIGIN: PointK = PointK { x: 0.0, t: 0.0 };
}

/// `psi_{lambda,m}(x,t) = e^{i lambda t} Lag_m^alpha(|lambda| x^2)`.
pub fn eval_psi(lambda: f64, m: usize, alpha: f64, p: PointK) -> Result<Complex64> {
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(Error::Domain(format!("psi needs a finite lambda != 0, got {lambda}")));
    }
    let lag = laguerre_function(LaguerreIndex::new(m, alpha)?, lambda.abs() * p.x * p.x)?;
    Ok(Complex64::from_polar(lag, lambda * p.t))
}

/// Quadrature for the translation kernel: a periodic trapezoid rule in `theta`
/// and, for `alpha > 0`, a Gauss-Jacobi rule in `w = 1 - r^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct TranslationRule {
    pub alpha: f64,
    /// Nodes `2 pi j / n`, weights `2 pi / n`.
    pub theta_rule: QuadratureRule,
    /// Nodes in `r`, ascending; weights normalized to total mass 1.
    pub r_rule: Option<QuadratureRule>,
}

impl TranslationRule {
    pub fn new(alpha: f64, n_theta: usize, n_r: usize) -> Result<Self> {
        check_alpha(alpha)?;
        if n_theta < 2 {
            return Err(Error::Config("translation needs at least 2 theta nodes".into()));
        }
        let h = 2.0 * PI / n_theta as f64;
        let theta_rule = QuadratureRule {
            kind: RuleKind::Trapezoid,
            nodes: (0..n_theta).map(|j| h * j as f64).collect(),
            weights: vec![h; n_theta],
            weight_exponents: (0.0, 0.0),
        };
        let r_rule = if alpha > 0.0 { Some(r_rule(alpha, n_r)?) } else { None };
        Ok(TranslationRule { alpha, theta_rule, r_rule })
    }

    /// Sum of the kernel weights; 1 up to rounding.
    pub fn mass(&self) -> f64 {
        let th = sum_real(self.theta_rule.weights.iter().cloned()) / (2.0 * PI);
        let r = self.r_rule.as_ref().map_or(1.0, |r| sum_real(r.weights.iter().cloned()));
        th * r
    }

    fn r_nodes(&self) -> Vec<(f64, f64)> {
        match &self.r_rule {
            Some(r) => r.nodes.iter().cloned().zip(r.weights.iter().cloned()).collect(),
            None => vec![(1.0, 1.0)],
        }
    }
}

/// Nodes and normalized weights of `2 alpha int_0^1 F(r) r (1-r^2)^{alpha-1} dr`.
///
/// With `w = 1 - r^2` the integral becomes `alpha int_0^1 F(sqrt(1-w)) w^{alpha-1} dw`,
/// a Jacobi weight with exponents `(0, alpha - 1)` after mapping `w = (1+v)/2`.
fn r_rule(alpha: f64, n: usize) -> Result<QuadratureRule> {
    let gj = gauss_jacobi(n, 0.0, alpha - 1.0)?;
    let scale = alpha * (-alpha).exp2();
    let mut pairs: Vec<(f64, f64)> = gj
        .nodes
        .iter()
        .zip(&gj.weights)
        .map(|(&v, &w)| ((1.0 - 0.5 * (1.0 + v)).max(0.0).sqrt(), w * scale))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(QuadratureRule {
        kind: RuleKind::Jacobi,
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
        weight_exponents: (0.0, alpha - 1.0),
    })
}

/// `T_{p} f(q)` for a function given in closed form.
pub fn translate_fn<F: Fn(f64, f64) -> Complex64>(f: F, p: PointK, q: PointK, rule: &TranslationRule) -> Complex64 {
    let xy = p.x * q.x;
    let mut acc = ComplexSum::default();
    for (r, wr) in rule.r_nodes() {
        for (&th, &wt) in rule.theta_rule.nodes.iter().zip(&rule.theta_rule.weights) {
            let (sn, cs) = th.sin_cos();
            let rr = (p.x * p.x + q.x * q.x + 2.0 * xy * r * cs).max(0.0).sqrt();
            acc.add(f(rr, q.t + p.t + xy * r * sn) * (wr * wt / (2.0 * PI)));
        }
    }
    acc.value()
}

/// Local interpolation on a radial grid: node indices and weights.
#[derive(Clone, Debug)]
struct RadialInterp {
    x: Vec<f64>,
    kind: RadialKind,
    /// Barycentric weights of one Gauss panel (panel grids only).
    bary: Vec<f64>,
}

impl RadialInterp {
    fn new(grid: &RadialGrid) -> Self {
        let bary = match grid.kind {
            RadialKind::GaussPanels { order, .. } => {
                let xs = &grid.x_nodes[..order];
                (0..order)
                    .map(|k| {
                        let p: f64 = (0..order).filter(|&j| j != k).map(|j| xs[k] - xs[j]).product();
                        1.0 / p
                    })
                    .collect()
            }
            _ => Vec::new(),
        };
        RadialInterp { x: grid.x_nodes.clone(), kind: grid.kind, bary }
    }

    fn x_max(&self) -> f64 {
        match self.kind {
            RadialKind::GaussPanels { x_max, .. } | RadialKind::Uniform { x_max, .. } => x_max,
            RadialKind::GaussLaguerre { .. } => *self.x.last().unwrap_or(&0.0),
        }
    }

    /// Fills `out` with `(index, weight)` pairs; `None` outside the grid.
    fn stencil(&self, r: f64, out: &mut Vec<(usize, f64)>) -> Option<()> {
        out.clear();
        if !(r >= 0.0) || r > self.x_max() * (1.0 + 1e-12) {
            return None;
        }
        match self.kind {
            RadialKind::GaussPanels { x_max, panels, order } => {
                let width = x_max / panels as f64;
                let p = ((r / width) as usize).min(panels - 1);
                let base = p * order;
                let mut denom = 0.0;
                for k in 0..order {
                    let d = r - self.x[base + k];
                    if d == 0.0 {
                        out.clear();
                        out.push((base + k, 1.0));
                        return Some(());
                    }
                    // the panel's barycentric weights scale by a common factor
                    let w = self.bary[k] / d;
                    denom += w;
                    out.push((base + k, w));
                }
                for o in out.iter_mut() {
                    o.1 /= denom;
                }
            }
            _ => {
                let n = self.x.len();
                let i = self.x.partition_point(|&v| v <= r).saturating_sub(1);
                // four-point Lagrange; indices below 0 reflect through x = 0
                let start = (i as isize - 1).min(n as isize - 4);
                let mut pts = [(0usize, 0.0f64); 4];
                for (k, pt) in pts.iter_mut().enumerate() {
                    let idx = start + k as isize;
                    *pt = if idx < 0 {
                        let m = (-idx) as usize - if self.x[0] == 0.0 { 0 } else { 1 };
                        (m, -self.x[m])
                    } else {
                        (idx as usize, self.x[idx as usize])
                    };
                }
                for a in 0..4 {
                    let mut w = 1.0;
                    for b in 0..4 {
                        if a != b {
                            w *= (r - pts[b].1) / (pts[a].1 - pts[b].1);
                        }
                    }
                    out.push((pts[a].0, w));
                }
            }
        }
        Some(())
    }
}

/// Four-point Lagrange stencil on the uniform time grid.
fn time_stencil(time: &TimeGrid, t: f64) -> Option<[(usize, f64); 4]> {
    let u = (t + time.t_max) / time.step;
    let n = time.n_t;
    if !(u >= -1e-9) || u > (n - 1) as f64 + 1e-9 {
        return None;
    }
    let i = (u.floor() as isize).clamp(0, n as isize - 2);
    let start = (i - 1).clamp(0, n as isize - 4) as usize;
    let mut out = [(0usize, 0.0f64); 4];
    for a in 0..4 {
        let mut w = 1.0;
        for b in 0..4 {
            if a != b {
                w *= (u - (start + b) as f64) / (a as f64 - b as f64);
            }
        }
        out[a] = (start + a, w);
    }
    Some(out)
}

/// Off-grid evaluation of a grid function by tensor interpolation.
pub struct GridInterpolator<'a> {
    f: &'a GridFunction,
    radial: RadialInterp,
    edge_small: bool,
    buf: Vec<(usize, f64)>,
}

/// Samples below this fraction of the peak count as zero at the grid edge.
pub const EDGE_TOL: f64 = 1e-10;

fn edge_max(f: &GridFunction) -> f64 {
    let n_x = f.n_x();
    let n_t = f.n_t();
    let mut m = 0.0_f64;
    for j in 0..n_t {
        m = m.max(f.at(n_x - 1, j).norm());
    }
    for i in 0..n_x {
        m = m.max(f.at(i, 0).norm()).max(f.at(i, n_t - 1).norm());
    }
    m
}

impl<'a> GridInterpolator<'a> {
    pub fn new(f: &'a GridFunction) -> Self {
        let peak = f.max_abs();
        let edge_small = edge_max(f) <= EDGE_TOL * peak;
        GridInterpolator { f, radial: RadialInterp::new(&f.radial), edge_small, buf: Vec::with_capacity(32) }
    }

    /// `f(x, t)`; outside the grid the value is 0 when the samples at the grid
    /// edge are negligible and an error otherwise.
    pub fn eval(&mut self, x: f64, t: f64) -> Result<Complex64> {
        let ts = time_stencil(&self.f.time, t);
        let inside = self.radial.stencil(x, &mut self.buf).is_some();
        match (inside, ts) {
            (true, Some(ts)) => {
                let mut acc = ZERO;
                for &(i, wi) in &self.buf {
                    let row = self.f.row(i);
                    let mut s = ZERO;
                    for &(j, wj) in &ts {
                        s += row[j] * wj;
                    }
                    acc += s * wi;
                }
                Ok(acc)
            }
            _ if self.edge_small => Ok(ZERO),
            _ => Err(Error::OutOfRange(format!("({x}, {t}) with non-negligible boundary samples"))),
        }
    }
}

/// `T_p f(q)` for a grid function, evaluating `f` off the grid by tensor
/// interpolation.
pub fn translate(f: &GridFunction, p: PointK, q: PointK, rule: &TranslationRule, alpha: f64) -> Result<Complex64> {
    if alpha != rule.alpha || alpha != f.radial.alpha {
        return Err(Error::GridMismatch(format!(
            "alpha {alpha}, rule alpha {}, grid alpha {}",
            rule.alpha, f.radial.alpha
        )));
    }
    let mut interp = GridInterpolator::new(f);
    let xy = p.x * q.x;
    let mut acc = ComplexSum::default();
    for (r, wr) in rule.r_nodes() {
        for (&th, &wt) in rule.theta_rule.nodes.iter().zip(&rule.theta_rule.weights) {
            let (sn, cs) = th.sin_cos();
            let rr = (p.x * p.x + q.x * q.x + 2.0 * xy * r * cs).max(0.0).sqrt();
            acc.add(interp.eval(rr, q.t + p.t + xy * r * sn)? * (wr * wt / (2.0 * PI)));
        }
    }
    Ok(acc.value())
}

/// Options of [`convolve_with`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvolutionOptions {
    /// Gauss-Jacobi nodes in `1 - r^2` (ignored for `alpha = 0`).
    pub n_r: usize,
    /// Absolute tolerance of the adaptive theta averages, relative to the
    /// slice's peak.
    pub theta_tol: f64,
    /// Frequencies whose slice product falls below this fraction of the peak
    /// end the `mu` integral.
    pub mu_tail: f64,
    /// Gauss order of the `mu` panels.
    pub mu_order: usize,
}

impl Default for ConvolutionOptions {
    fn default() -> Self {
        ConvolutionOptions { n_r: 8, theta_tol: 1e-8, mu_tail: 1e-9, mu_order: 16 }
    }
}

/// `f * g` on the grid of `f` and `g`.
pub fn convolve(f: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
    convolve_with(f, g, &f.radial, &f.time, ConvolutionOptions::default())
}

/// `f * g` on the given output grids (typically coarser than the inputs).
pub fn convolve_on(f: &GridFunction, g: &GridFunction, radial: &RadialGrid, time: &TimeGrid) -> Result<GridFunction> {
    convolve_with(f, g, radial, time, ConvolutionOptions::default())
}

/// Cubic table of an even radial function on `[0, x_max]`.
struct SliceTable {
    h: f64,
    v: Vec<Complex64>,
}

const TABLE_SIZE: usize = 4096;

impl SliceTable {
    fn new(interp: &RadialInterp, values: &[Complex64]) -> Self {
        let x_max = interp.x_max();
        let h = x_max / (TABLE_SIZE - 1) as f64;
        let mut buf = Vec::with_capacity(32);
        let v = (0..TABLE_SIZE)
            .map(|k| {
                let x = (k as f64 * h).min(x_max);
                interp.stencil(x, &mut buf).map_or(ZERO, |_| buf.iter().map(|&(i, w)| values[i] * w).sum())
            })
            .collect();
        SliceTable { h, v }
    }

    #[inline]
    fn get(&self, k: isize) -> Complex64 {
        self.v[k.unsigned_abs()]
    }

    /// Value at `r`; `None` beyond the table.
    #[inline]
    fn eval(&self, r: f64) -> Option<Complex64> {
        let u = r / self.h;
        let n = self.v.len() as isize;
        if u > (n - 1) as f64 {
            return None;
        }
        let i = (u.floor() as isize).min(n - 3);
        let d = u - i as f64;
        // Lagrange on i-1..i+2; i-1 = -1 reflects (even function)
        let (a, b, c, e) = (self.get(i - 1), self.get(i), self.get(i + 1), self.get(i + 2));
        let w0 = -d * (d - 1.0) * (d - 2.0) / 6.0;
        let w1 = (d + 1.0) * (d - 1.0) * (d - 2.0) / 2.0;
        let w2 = -(d + 1.0) * d * (d - 2.0) / 2.0;
        let w3 = (d + 1.0) * d * (d - 1.0) / 6.0;
        Some(a * w0 + b * w1 + c * w2 + e * w3)
    }
}

/// Extent in `t` outside which `f` is negligible.
fn time_extent(f: &GridFunction) -> f64 {
    let peak = f.max_abs();
    let mut ext = 0.0_f64;
    for j in 0..f.n_t() {
        let col = (0..f.n_x()).fold(0.0_f64, |m, i| m.max(f.at(i, j).norm()));
        if col > 1e-10 * peak {
            ext = ext.max(f.time.node(j).abs());
        }
    }
    ext
}

/// Slice of the convolution at one frequency `mu` on the output radial nodes:
/// `(f*g)^mu(x) = int g^mu(y) E[f^mu(R) e^{i mu x y r sin th}] y^{2alpha+1} dy / (pi Gamma(alpha+1))`.
fn convolution_slice(
    fs: &SliceTable,
    gs: &[Complex64],
    input: &RadialGrid,
    out_x: &[f64],
    mu: f64,
    r_nodes: &[(f64, f64)],
    opts: &ConvolutionOptions,
    fpeak: f64,
    edge_small: bool,
) -> Result<Vec<Complex64>> {
    let gmax = gs.iter().fold(0.0_f64, |m, v| m.max(v.norm()));
    let tol = opts.theta_tol * fpeak;
    let mut out = Vec::with_capacity(out_x.len());
    for &x in out_x {
        let mut acc = ComplexSum::default();
        for (k, &y) in input.x_nodes.iter().enumerate() {
            let gv = gs[k];
            if gv.norm() <= 1e-16 * gmax {
                continue;
            }
            let mut inner = ComplexSum::default();
            for &(r, wr) in r_nodes {
                let xyr = x * y * r;
                let base = x * x + y * y;
                let h = |th: f64| -> Result<Complex64> {
                    let (sn, cs) = th.sin_cos();
                    let rr = (base + 2.0 * xyr * cs).max(0.0).sqrt();
                    match fs.eval(rr) {
                        Some(v) => Ok(v * Complex64::from_polar(1.0, mu * xyr * sn)),
                        None if edge_small => Ok(ZERO),
                        None => Err(Error::OutOfRange(format!("radius {rr} beyond the slice grid"))),
                    }
                };
                // periodic trapezoid, doubled until two levels agree
                let mut n = 16usize;
                let mut sum = ZERO;
                for j in 0..n {
                    sum += h(2.0 * PI * j as f64 / n as f64)?;
                }
                let mut avg = sum / n as f64;
                loop {
                    let mut odd = ZERO;
                    for j in 0..n {
                        odd += h(2.0 * PI * (2 * j + 1) as f64 / (2 * n) as f64)?;
                    }
                    sum += odd;
                    n *= 2;
                    let next = sum / n as f64;
                    let done = (next - avg).norm() <= tol || n >= 8192;
                    avg = next;
                    if done {
                        break;
                    }
                }
                inner.add(avg * wr);
            }
            acc.add(inner.value() * gv * input.m_alpha_weights[k]);
        }
        out.push(acc.value());
    }
    Ok(out)
}

fn is_real(f: &GridFunction) -> bool {
    f.values.iter().all(|v| v.im == 0.0)
}

/// `f * g` by the slice formula: for every frequency `mu` of a Gauss-panel
/// rule the time slices of `f` and `g` are combined by the translation
/// quadrature in `(y, r, theta)`, and the result is transformed back to `t`.
pub fn convolve_with(
    f: &GridFunction,
    g: &GridFunction,
    radial: &RadialGrid,
    time: &TimeGrid,
    opts: ConvolutionOptions,
) -> Result<GridFunction> {
    if !f.same_grid(g) {
        return Err(Error::GridMismatch("convolution operands must share their grids".into()));
    }
    let alpha = f.radial.alpha;
    if radial.alpha != alpha {
        return Err(Error::GridMismatch(format!("output alpha {} vs input alpha {alpha}", radial.alpha)));
    }
    let rule = TranslationRule::new(alpha, 2, opts.n_r)?;
    let r_nodes = rule.r_nodes();
    let interp = RadialInterp::new(&f.radial);
    let edge_small = edge_max(f) <= EDGE_TOL * f.max_abs();
    let n_x = radial.len();
    let n_t = time.n_t;
    let t_out = time.nodes();
    let mut acc = vec![ComplexSum::default(); n_x * n_t];
    if f.max_abs() == 0.0 || g.max_abs() == 0.0 {
        return GridFunction::new(radial.clone(), *time, vec![ZERO; n_x * n_t]);
    }
    let real = is_real(f) && is_real(g);
    let extent = time_extent(f) + time_extent(g);
    // phase of e^{i mu t} across a panel stays below 24 for the output window
    // and the support of the result
    let width = (24.0 / (extent + time.t_max)).min(1.0);
    let nyquist = PI / f.time.step;
    let base = gauss_legendre(opts.mu_order)?;
    let mut peak = 0.0_f64;
    let mut quiet = 0;
    let mut k = 0usize;
    loop {
        let lo = k as f64 * width;
        if lo >= nyquist {
            break;
        }
        let panel = base.mapped(lo, (lo + width).min(nyquist));
        let mut panel_size = 0.0_f64;
        for (&mu0, &w) in panel.nodes.iter().zip(&panel.weights) {
            let signs: &[f64] = if real { &[1.0] } else { &[1.0, -1.0] };
            for &sg in signs {
                let mu = sg * mu0;
                let fs = time_slice_transform(f, Complex64::new(mu, 0.0))?;
                let gs = time_slice_transform(g, Complex64::new(mu, 0.0))?;
                let size = fs.max_abs() * gs.max_abs();
                panel_size = panel_size.max(size);
                peak = peak.max(size);
                if size <= opts.mu_tail * peak {
                    continue;
                }
                let table = SliceTable::new(&interp, &fs.values);
                let c = convolution_slice(
                    &table,
                    &gs.values,
                    &f.radial,
                    &radial.x_nodes,
                    mu,
                    &r_nodes,
                    &opts,
                    fs.max_abs(),
                    edge_small,
                )?;
                let scale = w / (2.0 * PI);
                for (j, &t) in t_out.iter().enumerate() {
                    let ph = Complex64::from_polar(scale, mu * t);
                    for i in 0..n_x {
                        let v = c[i] * ph;
                        if real {
                            acc[i * n_t + j].add(Complex64::new(2.0 * v.re, 0.0));
                        } else {
                            acc[i * n_t + j].add(v);
                        }
                    }
                }
            }
        }
        if panel_size <= opts.mu_tail * peak {
            quiet += 1;
            if quiet >= 2 {
                break;
            }
        } else {
            quiet = 0;
        }
        k += 1;
    }
    GridFunction::new(radial.clone(), *time, acc.iter().map(ComplexSum::value).collect())
}

/// `(f * g)(p)` by direct quadrature of `int T_p f(y,s) g(y,-s) dm_alpha(y,s)`
/// over the grid of `g`. Slow; meant as an independent cross-check.
pub fn convolve_direct_at(f: &GridFunction, g: &GridFunction, p: PointK, rule: &TranslationRule) -> Result<Complex64> {
    let alpha = f.radial.alpha;
    let mut interp = GridInterpolator::new(f);
    let mut acc = ComplexSum::default();
    for i in 0..g.n_x() {
        let y = g.radial.x_nodes[i];
        for j in 0..g.n_t() {
            let gv = g.at(i, g.time.mirror(j));
            if gv == ZERO {
                continue;
            }
            let s = g.time.node(j);
            let xy = p.x * y;
            let mut tr = ComplexSum::default();
            for (r, wr) in rule.r_nodes() {
                for (&th, &wt) in rule.theta_rule.nodes.iter().zip(&rule.theta_rule.weights) {
                    let (sn, cs) = th.sin_cos();
                    let rr = (p.x * p.x + y * y + 2.0 * xy * r * cs).max(0.0).sqrt();
                    tr.add(interp.eval(rr, s + p.t + xy * r * sn)? * (wr * wt / (2.0 * PI)));
                }
            }
            acc.add(tr.value() * gv * g.cell_weight(i, j));
        }
    }
    let _ = alpha;
    Ok(acc.value())
}

/// Discrete `||f||_{L^p(dm_alpha)}`; `p = inf` gives `max |f|`.
pub fn norm_lp(f: &GridFunction, p: f64) -> Result<f64> {
    if p == f64::INFINITY {
        return Ok(f.max_abs());
    }
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::Domain(format!("L^p norm needs p in [1, inf], got {p}")));
    }
    let mut terms = Vec::with_capacity(f.values.len());
    for i in 0..f.n_x() {
        for j in 0..f.n_t() {
            terms.push(f.cell_weight(i, j) * f.at(i, j).norm().powf(p));
        }
    }
    Ok(sum_real(terms).powf(1.0 / p))
}

// fourth-order stencils
const D2_CENTRAL: [f64; 5] = [-1.0, 16.0, -30.0, 16.0, -1.0];
const D1_CENTRAL: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
const D2_EDGE0: [f64; 6] = [45.0, -154.0, 214.0, -156.0, 61.0, -10.0];
const D2_EDGE1: [f64; 6] = [10.0, -15.0, -4.0, 14.0, -6.0, 1.0];
const D1_EDGE0: [f64; 5] = [-25.0, 48.0, -36.0, 16.0, -3.0];
const D1_EDGE1: [f64; 5] = [-3.0, -10.0, 18.0, -6.0, 1.0];

/// First and second derivative of equally spaced samples at index `i`
/// (times `12 h` and `12 h^2`). `even_left` mirrors the samples through the
/// first node, which is then the symmetry point.
fn derivatives(v: &dyn Fn(usize) -> Complex64, n: usize, i: usize, even_left: bool) -> (Complex64, Complex64) {
    let dot = |c: &[f64], start: isize, dir: isize| -> Complex64 {
        c.iter().enumerate().map(|(k, &ck)| v((start + dir * k as isize) as usize) * ck).sum()
    };
    if i >= 2 && i + 2 < n {
        return (dot(&D1_CENTRAL, i as isize - 2, 1), dot(&D2_CENTRAL, i as isize - 2, 1));
    }
    if i < 2 && even_left {
        let at = |k: isize| v(k.unsigned_abs());
        let idx = i as isize;
        let d1: Complex64 = D1_CENTRAL.iter().enumerate().map(|(k, &c)| at(idx - 2 + k as isize) * c).sum();
        let d2: Complex64 = D2_CENTRAL.iter().enumerate().map(|(k, &c)| at(idx - 2 + k as isize) * c).sum();
        return (d1, d2);
    }
    if i < 2 {
        let (c1, c2) = if i == 0 { (&D1_EDGE0, &D2_EDGE0) } else { (&D1_EDGE1, &D2_EDGE1) };
        return (dot(c1, 0, 1), dot(c2, 0, 1));
    }
    // right edge: mirrored one-sided stencils; the first derivative flips sign
    let (c1, c2) = if i == n - 1 { (&D1_EDGE0, &D2_EDGE0) } else { (&D1_EDGE1, &D2_EDGE1) };
    (-dot(c1, n as isize - 1, -1), dot(c2, n as isize - 1, -1))
}

/// `L f` by fourth-order finite differences on an equally spaced radial grid
/// starting at `x = 0`. The `x = 0` column uses the even extension in `x`,
/// where `L f = (2alpha+2) d^2f/dx^2`.
pub fn apply_l(f: &GridFunction) -> Result<GridFunction> {
    let h = f
        .radial
        .uniform_step()
        .ok_or_else(|| Error::GridMismatch("apply_L needs an equally spaced radial grid".into()))?;
    if f.radial.x_nodes[0] != 0.0 || f.n_x() < 6 || f.n_t() < 6 {
        return Err(Error::GridMismatch("apply_L needs x_0 = 0 and at least 6 nodes per axis".into()));
    }
    let alpha = f.radial.alpha;
    let k = f.time.step;
    let (n_x, n_t) = (f.n_x(), f.n_t());
    let mut out = vec![ZERO; n_x * n_t];
    for i in 0..n_x {
        let x = f.radial.x_nodes[i];
        for j in 0..n_t {
            let (d1x, d2x) = derivatives(&|ii| f.at(ii, j), n_x, i, true);
            let d2x = d2x / (12.0 * h * h);
            let val = if i == 0 {
                d2x * (2.0 * alpha + 2.0)
            } else {
                let (_, d2t) = derivatives(&|jj| f.at(i, jj), n_t, j, false);
                d2x + d1x / (12.0 * h) * ((2.0 * alpha + 1.0) / x) + d2t / (12.0 * k * k) * (x * x)
            };
            out[i * n_t + j] = val;
        }
    }
    GridFunction::new(f.radial.clone(), f.time, out)
}
