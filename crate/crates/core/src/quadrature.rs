//! Gaussian and trapezoid quadrature rules, plus the compensated
//! accumulators every reduction in the crate goes through.
//!
//! Gauss rules are built from the three-term recurrence of the orthonormal
//! polynomials: the Jacobi-matrix eigenvalues give starting nodes, Newton
//! iteration on the recurrence-evaluated polynomial polishes each node to
//! `1e-14`, and the weights come from the Christoffel formula
//! `w = 1 / sum_k p_k(x)^2`.

use crate::error::{Error, Result};
use crate::special::ln_gamma_unchecked;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    Legendre,
    GeneralizedLaguerre,
    Jacobi,
    Trapezoid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub kind: RuleKind,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `(a, b)` for Jacobi `(1-x)^a (1+x)^b`, `(beta, 0)` for Laguerre, zeros otherwise.
    pub weight_exponents: (f64, f64),
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `sum_i w_i g(x_i)` with compensated accumulation in node order.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut g: F) -> f64 {
        let mut acc = RealSum::default();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc.add(w * g(x));
        }
        acc.value()
    }

    /// Affine image of a rule on `[-1, 1]` onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> QuadratureRule {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        QuadratureRule {
            kind: self.kind,
            nodes: self.nodes.iter().map(|x| mid + half * x).collect(),
            weights: self.weights.iter().map(|w| half * w).collect(),
            weight_exponents: self.weight_exponents,
        }
    }

    pub(crate) fn check_invariants(&self) -> bool {
        self.nodes.len() == self.weights.len()
            && self.nodes.windows(2).all(|p| p[0] < p[1])
            && self.weights.iter().all(|&w| w > 0.0)
    }
}

/// Neumaier-compensated sum of reals.
#[derive(Clone, Copy, Debug, Default)]
pub struct RealSum {
    sum: f64,
    comp: f64,
}

impl RealSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Neumaier-compensated sum of complex numbers, componentwise.
#[derive(Clone, Copy, Debug, Default)]
pub struct ComplexSum {
    re: RealSum,
    im: RealSum,
}

impl ComplexSum {
    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

pub fn sum_real<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    let mut s = RealSum::default();
    it.into_iter().for_each(|x| s.add(x));
    s.value()
}

pub fn sum_complex<I: IntoIterator<Item = Complex64>>(it: I) -> Complex64 {
    let mut s = ComplexSum::default();
    it.into_iter().for_each(|x| s.add(x));
    s.value()
}

/// Recurrence `sqrt(b_{k+1}) p_{k+1} = (x - a_k) p_k - sqrt(b_k) p_{k-1}` of
/// the orthonormal polynomials with `p_0 = 1/sqrt(mu0)`.
struct Recurrence {
    a: Vec<f64>,
    /// `sqrt(b_k)` for `k = 1..=n` (index 0 unused)
    sb: Vec<f64>,
    ln_mu0: f64,
}

impl Recurrence {
    /// `(p_n(x) / p_n'(x), ln sum_{k<n} p_k(x)^2)` with running rescaling.
    fn evaluate(&self, x: f64, n: usize) -> (f64, f64) {
        let mut p_prev = 0.0;
        let mut d_prev = 0.0;
        let mut p = (-0.5 * self.ln_mu0).exp();
        let mut d = 0.0;
        let mut log_scale = 0.0;
        let mut sq = 0.0;
        for k in 0..n {
            sq += p * p;
            let sbk = if k == 0 { 0.0 } else { self.sb[k] };
            let p_next = ((x - self.a[k]) * p - sbk * p_prev) / self.sb[k + 1];
            let d_next = (p + (x - self.a[k]) * d - sbk * d_prev) / self.sb[k + 1];
            p_prev = p;
            d_prev = d;
            p = p_next;
            d = d_next;
            let big = p.abs().max(p_prev.abs()).max(d.abs());
            if big > 1e100 {
                let f = 1e-100;
                p *= f;
                p_prev *= f;
                d *= f;
                d_prev *= f;
                sq *= f * f;
                log_scale += 100.0 * std::f64::consts::LN_10;
            }
        }
        (p / d, sq.ln() + 2.0 * log_scale)
    }

    fn rule(&self, n: usize, kind: RuleKind, weight_exponents: (f64, f64)) -> Result<QuadratureRule> {
        let mut jac = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            jac[(i, i)] = self.a[i];
            if i + 1 < n {
                jac[(i, i + 1)] = self.sb[i + 1];
                jac[(i + 1, i)] = self.sb[i + 1];
            }
        }
        let mut guesses: Vec<f64> = SymmetricEigen::new(jac).eigenvalues.iter().copied().collect();
        guesses.sort_by(|a, b| a.partial_cmp(b).unwrap());

        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for g in guesses {
            let mut x = g;
            for _ in 0..100 {
                let (ratio, _) = self.evaluate(x, n);
                x -= ratio;
                if ratio.abs() <= 1e-14 * x.abs().max(1e-3) {
                    break;
                }
            }
            let (_, ln_sq) = self.evaluate(x, n);
            nodes.push(x);
            weights.push((-ln_sq).exp());
        }
        let rule = QuadratureRule { kind, nodes, weights, weight_exponents };
        if !rule.check_invariants() {
            return Err(Error::Domain(format!(
                "{kind:?} rule with n={n} lost node ordering or weight positivity"
            )));
        }
        Ok(rule)
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::Domain("a quadrature rule needs n >= 1".into()))
    } else {
        Ok(())
    }
}

/// Gauss-Legendre rule on `[-1, 1]`, exact through degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> Result<QuadratureRule> {
    check_n(n)?;
    let a = vec![0.0; n + 1];
    let sb = (0..=n)
        .map(|k| {
            let k = k as f64;
            (k * k / (4.0 * k * k - 1.0)).sqrt()
        })
        .collect();
    let mut rule = Recurrence { a, sb, ln_mu0: 2f64.ln() }.rule(n, RuleKind::Legendre, (0.0, 0.0))?;
    // enforce exact symmetry
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
        let w = 0.5 * (rule.weights[i] + rule.weights[j]);
        rule.nodes[i] = -x;
        rule.nodes[j] = x;
        rule.weights[i] = w;
        rule.weights[j] = w;
    }
    if n % 2 == 1 {
        rule.nodes[n / 2] = 0.0;
    }
    Ok(rule)
}

/// Gauss rule for `int_0^inf g(u) u^beta e^{-u} du`.
pub fn gauss_generalized_laguerre(n: usize, beta: f64) -> Result<QuadratureRule> {
    check_n(n)?;
    if !(beta > -1.0) || !beta.is_finite() {
        return Err(Error::Domain(format!("Laguerre exponent must exceed -1, got {beta}")));
    }
    let a = (0..=n).map(|k| 2.0 * k as f64 + beta + 1.0).collect();
    let sb = (0..=n)
        .map(|k| {
            let k = k as f64;
            (k * (k + beta)).sqrt()
        })
        .collect();
    Recurrence { a, sb, ln_mu0: ln_gamma_unchecked(beta + 1.0) }.rule(
        n,
        RuleKind::GeneralizedLaguerre,
        (beta, 0.0),
    )
}

/// Gauss-Jacobi rule on `[-1, 1]` for the weight `(1-x)^a (1+x)^b`.
pub fn gauss_jacobi(n: usize, a: f64, b: f64) -> Result<QuadratureRule> {
    check_n(n)?;
    if !(a > -1.0 && b > -1.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!("Jacobi exponents must exceed -1, got ({a}, {b})")));
    }
    let ab = a + b;
    let diag = (0..=n)
        .map(|k| {
            let k = k as f64;
            let s = 2.0 * k + ab;
            if k == 0.0 {
                (b - a) / (ab + 2.0)
            } else {
                (b * b - a * a) / (s * (s + 2.0))
            }
        })
        .collect();
    let sb = (0..=n)
        .map(|k| {
            if k == 0 {
                return 0.0;
            }
            let k = k as f64;
            let s = 2.0 * k + ab;
            let v = if k == 1.0 {
                4.0 * (1.0 + a) * (1.0 + b) / ((ab + 2.0).powi(2) * (ab + 3.0))
            } else {
                4.0 * k * (k + a) * (k + b) * (k + ab) / (s * s * (s + 1.0) * (s - 1.0))
            };
            v.sqrt()
        })
        .collect();
    let ln_mu0 = (ab + 1.0) * std::f64::consts::LN_2 + ln_gamma_unchecked(a + 1.0)
        + ln_gamma_unchecked(b + 1.0)
        - ln_gamma_unchecked(ab + 2.0);
    Recurrence { a: diag, sb, ln_mu0 }.rule(n, RuleKind::Jacobi, (a, b))
}

/// Closed trapezoid rule with `n >= 2` equally spaced nodes on `[a, b]`.
pub fn trapezoid(n: usize, a: f64, b: f64) -> Result<QuadratureRule> {
    if n < 2 || !(b > a) {
        return Err(Error::Domain(format!("trapezoid needs n >= 2 and a < b, got n={n}, [{a}, {b}]")));
    }
    let h = (b - a) / (n - 1) as f64;
    let nodes = (0..n).map(|i| if i == n - 1 { b } else { a + h * i as f64 }).collect();
    let weights = (0..n)
        .map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h })
        .collect();
    Ok(QuadratureRule { kind: RuleKind::Trapezoid, nodes, weights, weight_exponents: (0.0, 0.0) })
}

/// Composite Gauss-Legendre rule over consecutive panels `[breaks[i], breaks[i+1]]`.
pub fn composite_legendre(breaks: &[f64], order: usize) -> Result<QuadratureRule> {
    if breaks.len() < 2 || breaks.windows(2).any(|p| !(p[1] > p[0])) {
        return Err(Error::Domain("panel breakpoints must be strictly increasing".into()));
    }
    let base = gauss_legendre(order)?;
    let mut nodes = Vec::with_capacity(order * (breaks.len() - 1));
    let mut weights = Vec::with_capacity(nodes.capacity());
    for p in breaks.windows(2) {
        let r = base.mapped(p[0], p[1]);
        nodes.extend(r.nodes);
        weights.extend(r.weights);
    }
    Ok(QuadratureRule { kind: RuleKind::Legendre, nodes, weights, weight_exponents: (0.0, 0.0) })
}
