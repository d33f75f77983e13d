//! Identities that tie the transform, the convolution and the heat semigroup
//! together. Grids are sized so every case runs in seconds.

use laguerre_hypergroup::fixtures::Fixture;
use laguerre_hypergroup::grid::*;
use laguerre_hypergroup::heat::{heat_apply, HeatMode, HeatParams};
use laguerre_hypergroup::hypergroup::{convolve, convolve_on};
use laguerre_hypergroup::transforms::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn rel_l2(a: &GridFunction, b: &GridFunction) -> f64 {
    let d = a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect();
    grid_l2_norm(&GridFunction::new(a.radial.clone(), a.time, d).unwrap()) / grid_l2_norm(b)
}

/// Time grid on `[-t_max, t_max]` with step close to `step`.
fn time_grid(t_max: f64, step: f64) -> TimeGrid {
    TimeGrid::new(t_max, ((2.0 * t_max / step).ceil() as usize + 1) | 1).unwrap()
}

fn packet_on(alpha: f64, lambda: f64, m: usize, width: f64, radial: &RadialGrid, time: &TimeGrid) -> GridFunction {
    Fixture::PsiPacket { alpha, lambda, m, width }.build_on(radial, time).unwrap()
}

#[test]
fn convolution_commutes() {
    for alpha in [0.0, 1.0] {
        let radial = RadialGrid::gauss_panels(alpha, 88f64.sqrt(), 8, 16).unwrap();
        let time = time_grid(16.0, 0.1);
        let f = packet_on(alpha, 1.0, 1, 2.0, &radial, &time);
        let g = packet_on(alpha, 1.5, 0, 2.0, &radial, &time);
        let out_r = RadialGrid::gauss_panels(alpha, 3.0, 2, 8).unwrap();
        let out_t = TimeGrid::new(3.0, 25).unwrap();
        let fg = convolve_on(&f, &g, &out_r, &out_t).unwrap();
        let gf = convolve_on(&g, &f, &out_r, &out_t).unwrap();
        let diff = fg.values.iter().zip(&gf.values).fold(0.0_f64, |m, (a, b)| m.max((a - b).norm()));
        assert!(diff <= 1e-6 * fg.max_abs(), "alpha={alpha}: {:.3e}", diff / fg.max_abs());
    }
}

#[test]
fn convolution_theorem() {
    for alpha in [0.0, 1.0] {
        let radial = RadialGrid::gauss_panels(alpha, 88f64.sqrt(), 6, 12).unwrap();
        let time = time_grid(26.0, 0.15);
        let f = packet_on(alpha, 1.0, 1, 2.0, &radial, &time);
        let ff = convolve(&f, &f).unwrap();
        let sg = SpectralGrid::new(alpha, 16, SpectralLayout::for_time_extent(5.0, time.t_max)).unwrap();
        let lhs = fourier_laguerre_forward(&ff, &sg).unwrap();
        let fh = fourier_laguerre_forward(&f, &sg).unwrap();
        let worst = lhs.values.iter().zip(&fh.values).fold(0.0_f64, |m, (a, b)| m.max((a - b * b).norm()));
        let scale = fh.max_abs() * fh.max_abs();
        assert!(worst <= 1e-4 * scale, "alpha={alpha}: {:.3e}", worst / scale);
    }
}

#[test]
fn heat_modes_agree() {
    for alpha in [0.0, 1.0] {
        let radial = RadialGrid::gauss_panels(alpha, 96f64.sqrt(), 8, 16).unwrap();
        let time = time_grid(32.0, 0.1);
        let f = packet_on(alpha, 1.0, 2, 4.0, &radial, &time);
        let mut p = HeatParams::new(alpha, 0.1).unwrap();
        p.kappa = 2.0;
        let sg = SpectralGrid::new(alpha, 32, SpectralLayout::for_time_extent(3.0, time.t_max)).unwrap();
        let a = heat_apply(&f, &p, HeatMode::Multiplier, &sg).unwrap();
        let b = heat_apply(&f, &p, HeatMode::Convolution, &sg).unwrap();
        let e = rel_l2(&a, &b);
        assert!(e <= 1e-3, "alpha={alpha}: {e:.3e}");
    }
}

#[test]
fn short_heat_flow_is_close_to_identity() {
    for alpha in [0.0, 1.0] {
        let fx = Fixture::PsiPacket { alpha, lambda: 1.0, m: 2, width: 4.0 };
        let f = fx.build().unwrap();
        let mut p = HeatParams::new(alpha, 1e-3).unwrap();
        p.kappa = 2.0;
        let out = heat_apply(&f, &p, HeatMode::Multiplier, &fx.default_spectral_grid(32).unwrap()).unwrap();
        let e = rel_l2(&out, &f);
        assert!(e <= 0.05, "alpha={alpha}: {e:.3e}");
    }
}

#[test]
fn zero_maps_to_zero() {
    let fx = Fixture::Bump { alpha: 0.5, radius: 1.0 };
    let (radial, time) = fx.default_grids().unwrap();
    let zero = GridFunction::zeros(radial.clone(), time);
    let sg = fx.default_spectral_grid(8).unwrap();
    let fh = fourier_laguerre_forward(&zero, &sg).unwrap();
    assert_eq!(fh.max_abs(), 0.0);
    assert_eq!(fourier_laguerre_inverse(&fh, &radial, &time).unwrap().max_abs(), 0.0);
    assert_eq!(convolve(&zero, &zero).unwrap().max_abs(), 0.0);
    assert_eq!(plancherel_norms(&zero, &sg).unwrap(), (0.0, 0.0));
}

#[test]
fn transform_is_linear_and_conjugation_symmetric() {
    for alpha in [0.0, 1.0] {
        let f = Fixture::Bump { alpha, radius: 1.0 }.build().unwrap();
        let g = Fixture::PsiPacket { alpha, lambda: 20.0, m: 1, width: 0.25 }
            .build_on(&f.radial, &f.time)
            .unwrap();
        let sg = SpectralGrid::new(alpha, 12, SpectralLayout::for_time_extent(10.0, f.time.t_max)).unwrap();
        let fh = fourier_laguerre_forward(&f, &sg).unwrap();
        let gh = fourier_laguerre_forward(&g, &sg).unwrap();
        let (a, b) = (Complex64::new(0.7, -1.2), Complex64::new(-2.0, 0.5));
        let combo = f.values.iter().zip(&g.values).map(|(x, y)| a * x + b * y).collect();
        let combo = GridFunction::new(f.radial.clone(), f.time, combo).unwrap();
        let ch = fourier_laguerre_forward(&combo, &sg).unwrap();
        let scale = fh.max_abs() + gh.max_abs();
        for k in 0..ch.values.len() {
            assert!((ch.values[k] - (a * fh.values[k] + b * gh.values[k])).norm() <= 1e-12 * scale);
        }
        // the bump is real
        for l in 0..sg.n_lambda() {
            for m in 0..sg.n_m() {
                assert!((fh.at(l, m) - fh.at(sg.mirror(l), m).conj()).norm() <= 1e-13 * fh.max_abs());
            }
        }
    }
}

/// The inverse of a fixed-degree spectrum of `h_s` misses the degrees past
/// `m_max`, which near `lambda = 0` carry a share falling like `1/m_max`.
#[test]
fn heat_round_trip_error_is_the_degree_cut() {
    let fx = Fixture::HeatKernel { alpha: 0.0, s: 0.5 };
    let f = fx.build().unwrap();
    let errors: Vec<f64> = [24, 96]
        .iter()
        .map(|&m| {
            let sg = fx.default_spectral_grid(m).unwrap();
            let back = fourier_laguerre_inverse(&fourier_laguerre_forward(&f, &sg).unwrap(), &f.radial, &f.time).unwrap();
            rel_l2(&back, &f)
        })
        .collect();
    assert!(errors[0] < 0.06, "{errors:?}");
    let ratio = errors[0] / errors[1];
    assert!((3.5..4.5).contains(&ratio), "{errors:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(3))]

    /// Sums of windowed basis packets have spectra away from `lambda = 0`;
    /// forward then inverse reproduces them.
    #[test]
    fn band_limited_round_trip(
        alpha in prop::sample::select(vec![0.0, 1.0]),
        coeffs in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 3),
        degrees in prop::collection::vec(0usize..4, 3),
    ) {
        let radial = RadialGrid::gauss_panels(alpha, 12.0, 8, 16).unwrap();
        let time = time_grid(48.0, 0.1);
        let mut values = vec![Complex64::new(0.0, 0.0); radial.len() * time.n_t];
        for ((&(re, im), &m), lambda) in coeffs.iter().zip(&degrees).zip([1.0, 1.2, 1.5]) {
            let p = packet_on(alpha, lambda, m, 6.0, &radial, &time);
            for (v, q) in values.iter_mut().zip(&p.values) {
                *v += Complex64::new(re, im) * q;
            }
        }
        let f = GridFunction::new(radial.clone(), time, values).unwrap();
        let sg = SpectralGrid::new(alpha, 32, SpectralLayout::for_time_extent(2.9, time.t_max)).unwrap();
        let back = fourier_laguerre_inverse(&fourier_laguerre_forward(&f, &sg).unwrap(), &radial, &time).unwrap();
        let e = rel_l2(&back, &f);
        prop_assert!(e <= 1e-6, "alpha={} error {:.3e}", alpha, e);
    }
}
