//! Discrete carriers of functions on `K = [0, inf) x R` and on the spectral
//! set `R x N`, with the measures `m_alpha` and `gamma_alpha` folded into the
//! quadrature weights.

use crate::error::{Error, Result};
use crate::quadrature::{
    composite_legendre, gauss_generalized_laguerre, sum_complex, ComplexSum, QuadratureRule,
};
use crate::special::{check_alpha, gamma_unchecked, ln_laguerre_at_zero, LaguerreIndex};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// How the radial nodes were generated. Enough to rebuild the grid exactly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadialKind {
    /// Composite Gauss-Legendre panels of equal width on `[0, x_max]`.
    GaussPanels { x_max: f64, panels: usize, order: usize },
    /// Gauss rule in `u = x^2 / scale` for the weight `u^alpha e^{-u}`.
    GaussLaguerre { n: usize, scale: f64 },
    /// Equally spaced nodes `0, h, ..., x_max` with fourth-order Gregory end corrections.
    Uniform { x_max: f64, n: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RadialGrid {
    pub alpha: f64,
    pub kind: RadialKind,
    pub x_nodes: Vec<f64>,
    /// Weights of `int_0^inf g(x) x^{2 alpha + 1} dx`.
    pub radial_weights: Vec<f64>,
    /// `radial_weights / (pi Gamma(alpha + 1))`: the radial factor of `dm_alpha`.
    pub m_alpha_weights: Vec<f64>,
}

/// `1 / (pi Gamma(alpha + 1))`.
pub fn m_alpha_constant(alpha: f64) -> f64 {
    1.0 / (PI * gamma_unchecked(alpha + 1.0))
}

fn gregory_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![h; n];
    if n >= 8 {
        let ends = [3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0];
        for (k, c) in ends.iter().enumerate() {
            w[k] = c * h;
            w[n - 1 - k] = c * h;
        }
    } else {
        w[0] = 0.5 * h;
        w[n - 1] = 0.5 * h;
    }
    w
}

impl RadialGrid {
    pub fn from_kind(alpha: f64, kind: RadialKind) -> Result<Self> {
        check_alpha(alpha)?;
        let p = 2.0 * alpha + 1.0;
        let (x_nodes, radial_weights) = match kind {
            RadialKind::GaussPanels { x_max, panels, order } => {
                if !(x_max > 0.0) || panels == 0 || order == 0 {
                    return Err(Error::Config(format!("bad radial panels {kind:?}")));
                }
                let breaks: Vec<f64> =
                    (0..=panels).map(|i| x_max * i as f64 / panels as f64).collect();
                let rule = composite_legendre(&breaks, order)?;
                let w: Vec<f64> = rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w * x.powf(p)).collect();
                (rule.nodes, w)
            }
            RadialKind::GaussLaguerre { n, scale } => {
                if !(scale > 0.0) {
                    return Err(Error::Config(format!("bad Laguerre scale {scale}")));
                }
                let rule = gauss_generalized_laguerre(n, alpha)?;
                let c = 0.5 * scale.powf(alpha + 1.0);
                let x: Vec<f64> = rule.nodes.iter().map(|u| (scale * u).sqrt()).collect();
                let w: Vec<f64> = rule
                    .nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(u, w)| c * (w.ln() + u).exp())
                    .collect();
                (x, w)
            }
            RadialKind::Uniform { x_max, n } => {
                if !(x_max > 0.0) || n < 4 {
                    return Err(Error::Config(format!("bad uniform radial grid {kind:?}")));
                }
                let h = x_max / (n - 1) as f64;
                let x: Vec<f64> =
                    (0..n).map(|i| if i == n - 1 { x_max } else { h * i as f64 }).collect();
                let g = gregory_weights(n, h);
                let w: Vec<f64> = x.iter().zip(&g).map(|(x, g)| g * x.powf(p)).collect();
                (x, w)
            }
        };
        let c = m_alpha_constant(alpha);
        let m_alpha_weights = radial_weights.iter().map(|w: &f64| w * c).collect();
        Ok(RadialGrid { alpha, kind, x_nodes, radial_weights, m_alpha_weights })
    }

    pub fn gauss_panels(alpha: f64, x_max: f64, panels: usize, order: usize) -> Result<Self> {
        Self::from_kind(alpha, RadialKind::GaussPanels { x_max, panels, order })
    }

    pub fn gauss_laguerre(alpha: f64, n: usize, scale: f64) -> Result<Self> {
        Self::from_kind(alpha, RadialKind::GaussLaguerre { n, scale })
    }

    pub fn uniform(alpha: f64, x_max: f64, n: usize) -> Result<Self> {
        Self::from_kind(alpha, RadialKind::Uniform { x_max, n })
    }

    pub fn len(&self) -> usize {
        self.x_nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x_nodes.is_empty()
    }

    /// Grid step when the nodes are equally spaced.
    pub fn uniform_step(&self) -> Option<f64> {
        match self.kind {
            RadialKind::Uniform { x_max, n } => Some(x_max / (n - 1) as f64),
            _ => None,
        }
    }

    pub fn x_max(&self) -> f64 {
        *self.x_nodes.last().unwrap_or(&0.0)
    }

    /// Highest radial frequency the rule integrates reliably: nodes per unit length.
    pub fn node_density(&self) -> f64 {
        match self.kind {
            RadialKind::GaussPanels { x_max, panels, order } => (panels * order) as f64 / x_max,
            RadialKind::Uniform { x_max, n } => n as f64 / x_max,
            RadialKind::GaussLaguerre { .. } => self.len() as f64 / self.x_max().max(1e-300),
        }
    }
}

/// Approximates `int_0^inf g(x) x^{2 alpha + 1} dx` on the grid's radial rule.
pub fn integrate_radial<F: FnMut(f64) -> Complex64>(mut g: F, grid: &RadialGrid) -> Result<Complex64> {
    let mut acc = ComplexSum::default();
    for (i, (&x, &w)) in grid.x_nodes.iter().zip(&grid.radial_weights).enumerate() {
        let v = g(x);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonFinite { index: i });
        }
        acc.add(w * v);
    }
    Ok(acc.value())
}

/// Symmetric uniform time grid `t_j = (j - (n-1)/2) * step` on `[-t_max, t_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_max: f64,
    pub n_t: usize,
    pub step: f64,
}

impl TimeGrid {
    pub fn new(t_max: f64, n_t: usize) -> Result<Self> {
        if !(t_max > 0.0) || !t_max.is_finite() || n_t < 2 {
            return Err(Error::Config(format!("time grid needs t_max > 0 and n_t >= 2, got {t_max}, {n_t}")));
        }
        Ok(TimeGrid { t_max, n_t, step: 2.0 * t_max / (n_t - 1) as f64 })
    }

    pub fn t_min(&self) -> f64 {
        -self.t_max
    }

    #[inline]
    pub fn node(&self, j: usize) -> f64 {
        (j as f64 - 0.5 * (self.n_t - 1) as f64) * self.step
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_t).map(|j| self.node(j)).collect()
    }

    /// Trapezoid weight of node `j`.
    #[inline]
    pub fn weight(&self, j: usize) -> f64 {
        if j == 0 || j + 1 == self.n_t {
            0.5 * self.step
        } else {
            self.step
        }
    }

    /// Index of the node mirrored through `t = 0`.
    #[inline]
    pub fn mirror(&self, j: usize) -> usize {
        self.n_t - 1 - j
    }

    pub fn rule(&self) -> QuadratureRule {
        crate::quadrature::trapezoid(self.n_t, -self.t_max, self.t_max)
            .expect("validated time grid")
    }
}

/// Options of the spectral `lambda` discretization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralLayout {
    pub lambda_max: f64,
    /// Inner cut-off: the spectral nodes avoid `(-epsilon, epsilon)`.
    pub epsilon: f64,
    /// Widest Gauss panel anywhere on the axis.
    pub max_panel_width: f64,
    pub order: usize,
}

impl SpectralLayout {
    pub const DEFAULT_EPSILON: f64 = 1e-6;

    pub fn new(lambda_max: f64, max_panel_width: f64) -> Self {
        SpectralLayout { lambda_max, epsilon: Self::DEFAULT_EPSILON, max_panel_width, order: 8 }
    }

    /// Panel width small enough to integrate `e^{i lambda t}` for `|t| <= t_max`.
    pub fn for_time_extent(lambda_max: f64, t_max: f64) -> Self {
        Self::new(lambda_max, (3.0 / t_max).min(1.0))
    }

    fn positive_breaks(&self) -> Vec<f64> {
        let knee = self.lambda_max.min(1.0);
        let mut b = vec![self.epsilon];
        let mut x = self.epsilon;
        while 2.0 * x < knee {
            x *= 2.0;
            b.push(x);
        }
        b.push(knee);
        if self.lambda_max > knee {
            b.push(self.lambda_max);
        }
        // the dyadic panels near 1 and the linear part both obey the width cap
        let mut out = vec![b[0]];
        for w in b.windows(2) {
            let span = w[1] - w[0];
            let panels = (span / self.max_panel_width).ceil().max(1.0) as usize;
            for i in 1..=panels {
                out.push(if i == panels { w[1] } else { w[0] + span * i as f64 / panels as f64 });
            }
        }
        out
    }
}

/// Nodes and `gamma_alpha` weights on `R x {0..m_max}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralGrid {
    pub alpha: f64,
    pub layout: SpectralLayout,
    /// Ascending, symmetric about 0, never containing 0.
    pub lambda_nodes: Vec<f64>,
    pub lambda_weights: Vec<f64>,
    pub m_max: usize,
    /// Row-major `n_lambda x (m_max + 1)`:
    /// `Gamma(m+alpha+1) / (m! Gamma(alpha+1)) * |lambda|^{alpha+1} * w_lambda`.
    pub gamma_weights: Vec<f64>,
}

impl SpectralGrid {
    pub fn new(alpha: f64, m_max: usize, layout: SpectralLayout) -> Result<Self> {
        check_alpha(alpha)?;
        if !(layout.lambda_max > layout.epsilon) || !(layout.epsilon > 0.0) || layout.order == 0 {
            return Err(Error::Config(format!("bad spectral layout {layout:?}")));
        }
        if !(layout.max_panel_width > 0.0) {
            return Err(Error::Config("spectral panel width must be positive".into()));
        }
        let pos = composite_legendre(&layout.positive_breaks(), layout.order)?;
        let n = pos.len();
        let mut lambda_nodes = Vec::with_capacity(2 * n);
        let mut lambda_weights = Vec::with_capacity(2 * n);
        for i in (0..n).rev() {
            lambda_nodes.push(-pos.nodes[i]);
            lambda_weights.push(pos.weights[i]);
        }
        lambda_nodes.extend_from_slice(&pos.nodes);
        lambda_weights.extend_from_slice(&pos.weights);
        let ln_l0: Vec<f64> =
            (0..=m_max).map(|m| ln_laguerre_at_zero(LaguerreIndex { m, alpha })).collect();
        let mut gamma_weights = Vec::with_capacity(lambda_nodes.len() * (m_max + 1));
        for (&l, &w) in lambda_nodes.iter().zip(&lambda_weights) {
            let lw = (alpha + 1.0) * l.abs().ln() + w.ln();
            gamma_weights.extend(ln_l0.iter().map(|c| (c + lw).exp()));
        }
        Ok(SpectralGrid { alpha, layout, lambda_nodes, lambda_weights, m_max, gamma_weights })
    }

    pub fn n_lambda(&self) -> usize {
        self.lambda_nodes.len()
    }

    pub fn n_m(&self) -> usize {
        self.m_max + 1
    }

    #[inline]
    pub fn gamma_weight(&self, l: usize, m: usize) -> f64 {
        self.gamma_weights[l * (self.m_max + 1) + m]
    }

    /// Index of `-lambda_l`.
    pub fn mirror(&self, l: usize) -> usize {
        self.n_lambda() - 1 - l
    }
}

/// Samples of a complex function on a radial x time product grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    pub radial: RadialGrid,
    pub time: TimeGrid,
    /// Row-major `n_x x n_t`.
    pub values: Vec<Complex64>,
}

fn check_finite(values: &[Complex64]) -> Result<()> {
    match values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

impl GridFunction {
    pub fn new(radial: RadialGrid, time: TimeGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != radial.len() * time.n_t {
            return Err(Error::GridMismatch(format!(
                "{} values for a {} x {} grid",
                values.len(),
                radial.len(),
                time.n_t
            )));
        }
        check_finite(&values)?;
        Ok(GridFunction { radial, time, values })
    }

    pub fn zeros(radial: RadialGrid, time: TimeGrid) -> Self {
        let n = radial.len() * time.n_t;
        GridFunction { radial, time, values: vec![Complex64::new(0.0, 0.0); n] }
    }

    /// Samples `f(x, t)` at every node.
    pub fn from_fn<F: FnMut(f64, f64) -> Complex64>(radial: RadialGrid, time: TimeGrid, mut f: F) -> Result<Self> {
        let t = time.nodes();
        let mut values = Vec::with_capacity(radial.len() * time.n_t);
        for &x in &radial.x_nodes {
            for &tj in &t {
                values.push(f(x, tj));
            }
        }
        Self::new(radial, time, values)
    }

    pub fn n_x(&self) -> usize {
        self.radial.len()
    }

    pub fn n_t(&self) -> usize {
        self.time.n_t
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.time.n_t + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[Complex64] {
        let n = self.time.n_t;
        &self.values[i * n..(i + 1) * n]
    }

    /// `dm_alpha` weight of cell `(i, j)`.
    #[inline]
    pub fn cell_weight(&self, i: usize, j: usize) -> f64 {
        self.radial.m_alpha_weights[i] * self.time.weight(j)
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        self.radial == other.radial && self.time == other.time
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// `int f dm_alpha` over the grid.
    pub fn integral(&self) -> Complex64 {
        let mut acc = ComplexSum::default();
        for i in 0..self.n_x() {
            for j in 0..self.n_t() {
                acc.add(self.cell_weight(i, j) * self.at(i, j));
            }
        }
        acc.value()
    }
}

/// Samples of a function on the spectral grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralFunction {
    pub grid: SpectralGrid,
    /// Row-major `n_lambda x (m_max + 1)`.
    pub values: Vec<Complex64>,
}

impl SpectralFunction {
    pub fn new(grid: SpectralGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n_lambda() * grid.n_m() {
            return Err(Error::GridMismatch(format!(
                "{} values for a {} x {} spectral grid",
                values.len(),
                grid.n_lambda(),
                grid.n_m()
            )));
        }
        check_finite(&values)?;
        Ok(SpectralFunction { grid, values })
    }

    pub fn zeros(grid: SpectralGrid) -> Self {
        let n = grid.n_lambda() * grid.n_m();
        SpectralFunction { grid, values: vec![Complex64::new(0.0, 0.0); n] }
    }

    pub fn from_fn<F: FnMut(f64, usize) -> Complex64>(grid: SpectralGrid, mut f: F) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.n_lambda() * grid.n_m());
        for &l in &grid.lambda_nodes {
            for m in 0..=grid.m_max {
                values.push(f(l, m));
            }
        }
        Self::new(grid, values)
    }

    #[inline]
    pub fn at(&self, l: usize, m: usize) -> Complex64 {
        self.values[l * self.grid.n_m() + m]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }
}

/// `int F dgamma_alpha = sum_m L_m^alpha(0) int F(lambda, m) |lambda|^{alpha+1} dlambda`.
pub fn integrate_spectral(f: &SpectralFunction) -> Complex64 {
    sum_complex(f.values.iter().zip(&f.grid.gamma_weights).map(|(v, w)| v * w))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radial_gaussian_moments() {
        // int e^{-x^2} x^{2a+1} dx = Gamma(a+1)/2
        for alpha in [0.0, 1.0] {
            let g = RadialGrid::gauss_panels(alpha, 9.0, 12, 16).unwrap();
            let v = integrate_radial(|x| Complex64::new((-x * x).exp(), 0.0), &g).unwrap();
            assert!((v.re - 0.5).abs() < 1e-13, "alpha={alpha}: {v}");
        }
        let g = RadialGrid::gauss_panels(0.0, 5.0, 4, 8).unwrap();
        assert_eq!(integrate_radial(|_| Complex64::new(0.0, 0.0), &g).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn radial_kinds_agree() {
        let alpha = 0.5;
        let f = |x: f64| Complex64::new((-0.7 * x * x).exp() * (1.0 + x * x), 0.0);
        let a = integrate_radial(f, &RadialGrid::gauss_panels(alpha, 10.0, 10, 16).unwrap()).unwrap();
        let b = integrate_radial(f, &RadialGrid::gauss_laguerre(alpha, 40, 1.0 / 0.7).unwrap()).unwrap();
        let c = integrate_radial(f, &RadialGrid::uniform(alpha, 10.0, 801).unwrap()).unwrap();
        assert!((a - b).norm() < 1e-13);
        assert!((a - c).norm() < 1e-9, "{a} vs {c}");
    }

    #[test]
    fn non_finite_sample_is_reported() {
        let g = RadialGrid::gauss_panels(0.0, 1.0, 1, 4).unwrap();
        let err = integrate_radial(|x| Complex64::new(if x > 0.5 { f64::NAN } else { 1.0 }, 0.0), &g);
        assert!(matches!(err, Err(Error::NonFinite { .. })));
    }

    #[test]
    fn time_grid_is_exactly_symmetric() {
        let t = TimeGrid::new(7.3, 101).unwrap();
        for j in 0..t.n_t {
            assert_eq!(t.node(j), -t.node(t.mirror(j)));
        }
        assert_eq!(t.node(0), -7.3);
        assert!(TimeGrid::new(1.0, 1).is_err());
    }

    #[test]
    fn spectral_grid_shape() {
        let g = SpectralGrid::new(0.5, 6, SpectralLayout::new(20.0, 0.5)).unwrap();
        assert!(g.lambda_nodes.iter().all(|&l| l != 0.0 && l.abs() >= 1e-6));
        assert!(g.lambda_nodes.windows(2).all(|p| p[0] < p[1]));
        for l in 0..g.n_lambda() {
            assert_eq!(g.lambda_nodes[l], -g.lambda_nodes[g.mirror(l)]);
            for m in 0..=g.m_max {
                assert!(g.gamma_weight(l, m) > 0.0);
                assert_eq!(g.gamma_weight(l, m), g.gamma_weight(g.mirror(l), m));
            }
        }
        let total: f64 = g.lambda_weights.iter().sum();
        assert!((total - 2.0 * (20.0 - 1e-6)).abs() < 1e-10);
    }

    #[test]
    fn spectral_integral_single_cell() {
        let g = SpectralGrid::new(0.0, 3, SpectralLayout::new(2.0, 0.5)).unwrap();
        let (l0, m0) = (7, 2);
        let f = SpectralFunction::from_fn(g.clone(), |_, _| Complex64::new(0.0, 0.0)).unwrap();
        assert_eq!(integrate_spectral(&f), Complex64::new(0.0, 0.0));
        let mut vals = f.values.clone();
        vals[l0 * g.n_m() + m0] = Complex64::new(2.5, -1.0);
        let f = SpectralFunction::new(g.clone(), vals).unwrap();
        let v = integrate_spectral(&f);
        assert!((v - Complex64::new(2.5, -1.0) * g.gamma_weight(l0, m0)).norm() < 1e-15);
    }
}
