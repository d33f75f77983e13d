//! Invariants of the special functions, grids, heat kernel, certificates and
//! file formats, checked on random inputs.

use laguerre_hypergroup::grid::*;
use laguerre_hypergroup::heat::{heat_kernel_eval, HeatParams};
use laguerre_hypergroup::hypergroup::{translate_fn, PointK, TranslationRule};
use laguerre_hypergroup::io;
use laguerre_hypergroup::miyachi::{classify_divergent, log_plus};
use laguerre_hypergroup::quadrature::{gauss_generalized_laguerre, gauss_jacobi, gauss_legendre};
use laguerre_hypergroup::special::*;
use laguerre_hypergroup::suite::SuiteConfig;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use proptest::prelude::*;

const ALPHAS: [f64; 4] = [0.0, 0.5, 1.0, 2.0];

fn alpha() -> impl Strategy<Value = f64> {
    prop::sample::select(ALPHAS.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generating_function(alpha in alpha(), x in 0.0..10.0f64, s in 0.0..0.5f64) {
        let l = laguerre_polynomials(alpha, x, 60);
        let mut sum = 0.0;
        let mut p = 1.0;
        for v in &l {
            sum += p * v;
            p *= s;
        }
        let want = (1.0 - s).powf(-(alpha + 1.0)) * (-x * s / (1.0 - s)).exp();
        prop_assert!((sum - want).abs() <= 1e-8, "{sum} vs {want}");
    }

    #[test]
    fn normalized_laguerre_is_one_at_zero(alpha in alpha(), m in 0usize..120) {
        let v = laguerre_function(LaguerreIndex::new(m, alpha).unwrap(), 0.0).unwrap();
        // the recurrence accumulates a few ulps per degree
        prop_assert!((v - 1.0).abs() <= 1e-15 * (m as f64 + 10.0));
    }

    #[test]
    fn bessel_representations_agree(alpha in alpha(), re in -20.0..20.0f64, im in -5.0..5.0f64) {
        let z = Complex64::new(re, im);
        prop_assume!(z.norm() <= 20.0);
        let a = bessel_j(alpha, z).unwrap();
        let b = bessel_j_integral(alpha, z, 64).unwrap();
        // relative to the size of J near z, so isolated zeros do not dominate
        let scale = a.norm().max(1e-3 * im.abs().exp() / (1.0 + z.norm()).sqrt());
        prop_assert!((a - b).norm() <= 1e-10 * scale, "alpha={alpha} z={z}: {a} vs {b}");
    }

    #[test]
    fn log_gamma_recurrence(x in 0.05..60.0f64) {
        let d = log_gamma(x + 1.0).unwrap() - log_gamma(x).unwrap();
        prop_assert!((d - x.ln()).abs() <= 1e-13 * (1.0 + log_gamma(x + 1.0).unwrap().abs()));
    }

    #[test]
    fn log_plus_is_monotone_and_zero_below_one(a in 0.0..50.0f64, b in 0.0..50.0f64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(log_plus(lo) <= log_plus(hi));
        if hi <= 1.0 {
            prop_assert_eq!(log_plus(hi), 0.0);
        }
    }

    #[test]
    fn strictly_growing_ladders_are_divergent(start in 0.1..10.0f64, steps in prop::collection::vec(0.01..2.0f64, 4..8)) {
        let mut v = vec![start];
        for s in &steps {
            let last = *v.last().unwrap();
            v.push(last * (1.0 + s));
        }
        prop_assert!(classify_divergent(&v));
        let flat = vec![start; v.len()];
        prop_assert!(!classify_divergent(&flat));
    }

    #[test]
    fn heat_kernel_is_positive_and_even(alpha in alpha(), x in 0.0..4.0f64, t in -6.0..6.0f64, s in 0.2..2.0f64) {
        let p = HeatParams::new(alpha, s).unwrap();
        let v = heat_kernel_eval(&p, PointK::new(x, t).unwrap()).unwrap();
        let peak = heat_kernel_eval(&p, PointK::ORIGIN).unwrap();
        prop_assert!(v > -1e-12 * peak);
        prop_assert!(v <= peak * (1.0 + 1e-12));
        let w = heat_kernel_eval(&p, PointK::new(x, -t).unwrap()).unwrap();
        prop_assert_eq!(v, w);
    }

    #[test]
    fn translation_preserves_constants(alpha in alpha(), px in 0.0..3.0f64, pt in -3.0..3.0f64, qx in 0.0..3.0f64, qt in -3.0..3.0f64) {
        let rule = TranslationRule::new(alpha, 32, 12).unwrap();
        let v = translate_fn(|_, _| Complex64::new(2.5, -1.0), PointK::new(px, pt).unwrap(), PointK::new(qx, qt).unwrap(), &rule);
        prop_assert!((v - Complex64::new(2.5, -1.0)).norm() <= 1e-13);
    }

    #[test]
    fn grid_files_round_trip(values in prop::collection::vec(-1e300..1e300f64, 2 * 5 * 3)) {
        let dir = tempfile::tempdir().unwrap();
        let radial = RadialGrid::gauss_panels(0.5, 3.0, 1, 5).unwrap();
        let time = TimeGrid::new(1.5, 3).unwrap();
        let vals: Vec<Complex64> = values.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
        let f = GridFunction::new(radial, time, vals).unwrap();
        let stem = dir.path().join("f");
        io::write_grid_function(&f, &stem).unwrap();
        prop_assert_eq!(io::read_grid_function(&stem).unwrap(), f);
    }

    #[test]
    fn config_settings_round_trip(n_x in 32usize..500, m_max in 8usize..100, scale in 0.1..10.0f64) {
        let text = format!("# comment\nn_x = {n_x}\nm_max={m_max}\ntol_scale = {scale}\nalpha_set = 0, 1.5\ntol.heat.scaling.alpha=0 = 1e-7\n");
        let cfg = SuiteConfig::parse(&text).unwrap();
        prop_assert_eq!(cfg.grid.n_x, Some(n_x));
        prop_assert_eq!(cfg.m_max, m_max);
        prop_assert_eq!(cfg.tol_scale, scale);
        prop_assert_eq!(cfg.alpha_set.clone(), Some(vec![0.0, 1.5]));
        prop_assert_eq!(cfg.tolerances.get("heat.scaling.alpha=0").copied(), Some(1e-7));
        prop_assert!(cfg.validate().is_ok());
    }
}

/// `L_m^0(x) = sum_k (-1)^k C(m, k) x^k / k!` in exact rational arithmetic.
fn laguerre_exact(m: u32, x: i64) -> f64 {
    let mut sum = BigRational::zero();
    let mut binom = BigInt::one();
    let mut fact = BigInt::one();
    let mut pow = BigInt::one();
    for k in 0..=m {
        if k > 0 {
            binom = binom * BigInt::from(m - k + 1) / BigInt::from(k);
            fact *= BigInt::from(k);
            pow *= BigInt::from(x);
        }
        let term = BigRational::new(&binom * &pow, fact.clone());
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    sum.to_f64().unwrap()
}

#[test]
fn recurrence_is_stable_at_high_degree() {
    let want = laguerre_exact(200, 1);
    let got = laguerre_polynomial(LaguerreIndex::new(200, 0.0).unwrap(), 1.0);
    assert!(got.is_finite());
    assert!((got - want).abs() <= 1e-6 * want.abs(), "{got} vs {want}");
}

#[test]
fn quadrature_rules_are_exact_to_degree_2n_minus_1() {
    for n in [1usize, 2, 5, 12, 20] {
        let r = gauss_legendre(n).unwrap();
        for k in 0..2 * n {
            let got: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(k as i32)).sum();
            let want = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "legendre n={n} k={k}");
        }
        for beta in ALPHAS {
            let r = gauss_generalized_laguerre(n, beta).unwrap();
            for k in 0..2 * n {
                let got: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(k as i32)).sum();
                let want = log_gamma(k as f64 + beta + 1.0).unwrap().exp();
                assert!((got - want).abs() <= 1e-12 * want, "laguerre n={n} beta={beta} k={k}: {got} vs {want}");
            }
        }
        // weight (1-x)^0 (1+x)^{1/2}
        let r = gauss_jacobi(n, 0.0, 0.5).unwrap();
        for k in 0..2 * n {
            let got: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(k as i32)).sum();
            let fine = gauss_jacobi(60, 0.0, 0.5).unwrap();
            let want: f64 = fine.nodes.iter().zip(&fine.weights).map(|(x, w)| w * x.powi(k as i32)).sum();
            assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "jacobi n={n} k={k}");
        }
    }
}

#[test]
fn unit_function_has_the_box_mass() {
    for alpha in ALPHAS {
        for kind in [
            RadialKind::GaussPanels { x_max: 2.5, panels: 4, order: 8 },
            RadialKind::Uniform { x_max: 2.5, n: 201 },
        ] {
            let radial = RadialGrid::from_kind(alpha, kind).unwrap();
            let time = TimeGrid::new(3.0, 65).unwrap();
            let f = GridFunction::from_fn(radial, time, |_, _| Complex64::new(1.0, 0.0)).unwrap();
            let want = 2.5f64.powf(2.0 * alpha + 2.0) * 6.0
                / ((2.0 * alpha + 2.0) * std::f64::consts::PI * log_gamma(alpha + 1.0).unwrap().exp());
            // Gregory weights are exact only for low-degree integrands
            let tol = if matches!(kind, RadialKind::Uniform { .. }) { 1e-6 } else { 1e-13 };
            assert!((f.integral().re - want).abs() <= tol * want, "alpha={alpha} {kind:?}: {} vs {want}", f.integral().re);
        }
    }
}

#[test]
fn spectral_weights_are_symmetric() {
    for alpha in ALPHAS {
        let g = SpectralGrid::new(alpha, 12, SpectralLayout::new(9.0, 0.7)).unwrap();
        for l in 0..g.n_lambda() {
            assert_eq!(g.lambda_nodes[l], -g.lambda_nodes[g.mirror(l)]);
            for m in 0..g.n_m() {
                assert_eq!(g.gamma_weight(l, m), g.gamma_weight(g.mirror(l), m));
            }
        }
    }
}
