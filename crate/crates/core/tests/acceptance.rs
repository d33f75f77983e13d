//! The eleven acceptance criteria, one test each. Every test prints a single
//! `criterion N: PASS|FAIL` line with the measured values before asserting.

use laguerre_hypergroup::checks::*;
use laguerre_hypergroup::fixtures::plancherel_family;
use laguerre_hypergroup::heat::{KAPPA_CANDIDATES, STATED_KAPPA};
use laguerre_hypergroup::miyachi::{Conclusion, BLOW_UP_GROWTH, STABLE_GROWTH};
use laguerre_hypergroup::suite::DEFAULT_M_MAX;
use std::time::Instant;

const ALL_ALPHAS: [f64; 4] = [0.0, 0.5, 1.0, 2.0];
const HEAVY_ALPHAS: [f64; 2] = [0.0, 1.0];

fn verdict(n: u32, pass: bool, detail: String) {
    println!("criterion {n}: {} {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {n}: {detail}");
}

#[test]
fn criterion_01_orthonormality() {
    let t0 = Instant::now();
    let mut worst = 0.0_f64;
    for alpha in ALL_ALPHAS {
        for lambda in [0.5, 1.0, 2.0] {
            worst = worst.max(orthonormality_defect(alpha, lambda, 20).unwrap());
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    verdict(1, worst <= 1e-8 && secs < 30.0, format!("max |G - I| = {worst:.2e} (<= 1e-8), {secs:.1} s"));
}

#[test]
fn criterion_02_hankel_eigen_relation() {
    let t0 = Instant::now();
    let worst = ALL_ALPHAS.iter().fold(0.0_f64, |m, &a| m.max(hankel_eigen_defect(a, 10, 8.0).unwrap()));
    let secs = t0.elapsed().as_secs_f64();
    verdict(2, worst <= 1e-6 && secs < 60.0, format!("max relative error {worst:.2e} (<= 1e-6), {secs:.1} s"));
}

#[test]
fn criterion_03_plancherel() {
    let t0 = Instant::now();
    let mut worst = 0.0_f64;
    for alpha in HEAVY_ALPHAS {
        for fx in plancherel_family(alpha) {
            let grid = fx.default_spectral_grid(DEFAULT_M_MAX).unwrap();
            worst = worst.max(plancherel_defect(&fx, &grid).unwrap());
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    verdict(3, worst <= 1e-3 && secs < 120.0, format!("max norm mismatch {worst:.2e} (<= 1e-3), {secs:.1} s"));
}

#[test]
fn criterion_04_heat_multiplier_calibration() {
    let mut parts = Vec::new();
    let mut pass = true;
    for alpha in HEAVY_ALPHAS {
        let cal = kappa_calibration(alpha, &HEAT_S, &GridOverrides::default()).unwrap();
        let snapped = KAPPA_CANDIDATES.contains(&cal.params.kappa);
        pass &= cal.kappa_residual <= 1e-3 && snapped && (cal.kappa_mean - cal.params.kappa).abs() <= 1e-3 * cal.params.kappa;
        parts.push(format!(
            "alpha={alpha}: kappa = {} (mean {:.6}, spread {:.1e}, stated {STATED_KAPPA})",
            cal.params.kappa, cal.kappa_mean, cal.kappa_residual
        ));
    }
    verdict(4, pass, parts.join("; "));
}

#[test]
fn criterion_05_semigroup() {
    let t0 = Instant::now();
    let errs: Vec<f64> = HEAVY_ALPHAS.iter().map(|&a| semigroup_defect(a, 0.25, 0.5).unwrap()).collect();
    let secs = t0.elapsed().as_secs_f64();
    let pass = errs.iter().all(|&e| e <= 1e-3) && secs < 180.0;
    verdict(5, pass, format!("sup errors {:.2e}, {:.2e} for alpha 0, 1 (<= 1e-3), {secs:.1} s", errs[0], errs[1]));
}

#[test]
fn criterion_06_scaling_law() {
    let mut worst = 0.0_f64;
    for alpha in HEAVY_ALPHAS {
        for s in SCALING_S {
            worst = worst.max(scaling_defect(alpha, s, &GridOverrides::default()).unwrap());
        }
    }
    verdict(6, worst <= 1e-8, format!("max pointwise relative error {worst:.2e} (<= 1e-8)"));
}

#[test]
fn criterion_07_gaussian_estimate() {
    let mut parts = Vec::new();
    let mut pass = true;
    for alpha in HEAVY_ALPHAS {
        let est = gaussian_estimate(alpha).unwrap();
        pass &= est.a > 0.0 && est.violations == 0 && est.min_value >= -1e-12;
        parts.push(format!(
            "alpha={alpha}: A = {:.4}, C = {:.4}, {} violations in {} samples, min {:.1e}",
            est.a, est.c, est.violations, est.samples, est.min_value
        ));
    }
    verdict(7, pass, parts.join("; "));
}

#[test]
fn criterion_08_product_formula() {
    let mut worst = 0.0_f64;
    for alpha in ALL_ALPHAS {
        let (grid, closed) = product_formula_defect(alpha, 6).unwrap();
        worst = worst.max(grid).max(closed);
    }
    verdict(8, worst <= 1e-5, format!("max residual / |psi|_inf = {worst:.2e} (<= 1e-5)"));
}

#[test]
fn criterion_09_eigen_relation_sign() {
    let fits: Vec<SignFit> = ALL_ALPHAS.iter().map(|&a| eigen_sign_fit(a, &BASIS_LAMBDAS, 4).unwrap()).collect();
    let sigma = fits[0].sigma;
    let single = fits.iter().all(|f| f.sigma == sigma);
    let worst = fits.iter().fold(0.0_f64, |m, f| m.max(f.residual));
    verdict(
        9,
        single && worst <= 1e-4,
        format!("sigma = {sigma} for every alpha, residual {worst:.2e} (<= 1e-4); sign conflict with the stated eigenvalue: {}", sigma < 0.0),
    );
}

#[test]
fn criterion_10_miyachi_harness() {
    let t0 = Instant::now();
    let mut parts = Vec::new();
    let mut pass = true;
    for alpha in HEAVY_ALPHAS {
        let sc = miyachi_scenarios(alpha).unwrap();
        let stress = [&sc.divergent, &sc.bounded, &sc.zero, &sc.bump]
            .iter()
            .any(|r| r.hypothesis1.pass && r.hypothesis2.pass && r.product_ab > 0.25 && r.residual_norm > 1e-6);
        let ok = sc.divergent.hypothesis2.divergent
            && sc.bounded.hypothesis2.pass
            && sc.zero.conclusion == Conclusion::MustVanish
            && sc.zero.residual_norm == 0.0
            && !stress;
        pass &= ok;
        parts.push(format!(
            "alpha={alpha}: b=0.3 {:?}, b=0.05 {:?}, zero {:?} (residual {}), stress {stress}",
            sc.divergent.conclusion, sc.bounded.conclusion, sc.zero.conclusion, sc.zero.residual_norm
        ));
    }
    let secs = t0.elapsed().as_secs_f64();
    verdict(10, pass && secs < 180.0, format!("{}; {secs:.1} s", parts.join("; ")));
}

#[test]
fn criterion_11_strip_bounds() {
    let mut fractions = STRIP_INTERIOR.to_vec();
    fractions.extend(STRIP_EDGE);
    let mut parts = Vec::new();
    let mut pass = true;
    for alpha in HEAVY_ALPHAS {
        let (_, pts) = strip_profile(alpha, STRIP_XI, &fractions).unwrap();
        let interior = pts
            .iter()
            .filter(|p| STRIP_INTERIOR.contains(&p.fraction))
            .fold(0.0_f64, |m, p| m.max(p.slice.growth).max(p.hankel.growth));
        let finite = pts.iter().filter(|p| STRIP_INTERIOR.contains(&p.fraction)).all(|p| p.slice.c.is_finite());
        let edge = pts.last().unwrap().slice.growth;
        pass &= finite && interior <= STABLE_GROWTH && edge >= BLOW_UP_GROWTH;
        parts.push(format!(
            "alpha={alpha}: interior growth {interior:.3} (<= {STABLE_GROWTH}), growth at {} of 4aA {edge:.2} (>= {BLOW_UP_GROWTH})",
            STRIP_EDGE[STRIP_EDGE.len() - 1]
        ));
    }
    verdict(11, pass, parts.join("; "));
}
