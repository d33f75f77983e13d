//! Built-in test functions with grids that resolve them: heat kernels,
//! time-windowed basis packets and compact bumps.

use crate::error::{Error, Result};
use crate::grid::{GridFunction, RadialGrid, SpectralGrid, SpectralLayout, TimeGrid};
use crate::heat::{default_heat_grids, heat_kernel_grid, HeatParams};
use crate::special::{laguerre_function, LaguerreIndex};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Fixture {
    /// `h_s` on [`default_heat_grids`].
    HeatKernel { alpha: f64, s: f64 },
    /// `psi_{lambda,m}(x,t) e^{-t^2 / (2 width^2)}`.
    PsiPacket { alpha: f64, lambda: f64, m: usize, width: f64 },
    /// `exp(1 - 1/(1 - r^2/radius^2))` for `r = sqrt(x^2 + t^2) < radius`, else 0.
    Bump { alpha: f64, radius: f64 },
}

/// Smooth compactly supported profile on `u = r^2 / radius^2`.
fn bump_profile(u: f64) -> f64 {
    if u < 1.0 {
        (1.0 - 1.0 / (1.0 - u)).exp()
    } else {
        0.0
    }
}

impl Fixture {
    pub fn alpha(&self) -> f64 {
        match *self {
            Fixture::HeatKernel { alpha, .. } | Fixture::PsiPacket { alpha, .. } | Fixture::Bump { alpha, .. } => alpha,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::Domain(format!("fixture {what} must be positive and finite, got {v}")));
        match *self {
            Fixture::HeatKernel { s, .. } if !(s > 0.0 && s.is_finite()) => bad("s", s),
            Fixture::PsiPacket { lambda, .. } if !(lambda != 0.0 && lambda.is_finite()) => {
                Err(Error::Domain(format!("packet frequency must be nonzero and finite, got {lambda}")))
            }
            Fixture::PsiPacket { width, .. } if !(width > 0.0 && width.is_finite()) => bad("width", width),
            Fixture::Bump { radius, .. } if !(radius > 0.0 && radius.is_finite()) => bad("radius", radius),
            _ => Ok(()),
        }
    }

    /// Grids on which the fixture is resolved and negligible at the edges.
    pub fn default_grids(&self) -> Result<(RadialGrid, TimeGrid)> {
        self.validate()?;
        match *self {
            Fixture::HeatKernel { alpha, s } => default_heat_grids(alpha, s),
            Fixture::PsiPacket { alpha, lambda, m, width } => {
                // e^{-|lambda| x^2 / 2} times a degree-m polynomial has died out by x_max
                let x_max = ((2.0 * (40.0 + 4.0 * m as f64)) / lambda.abs()).sqrt();
                let t_max = 6.5 * width;
                let n_t = time_nodes(t_max, lambda.abs() + 12.0 / width);
                Ok((RadialGrid::gauss_panels(alpha, x_max, 8, 16)?, TimeGrid::new(t_max, n_t)?))
            }
            Fixture::Bump { alpha, radius } => {
                // a panel break sits at x = radius, where the profile stops being analytic
                let radial = RadialGrid::gauss_panels(alpha, 1.5 * radius, 6, 16)?;
                Ok((radial, TimeGrid::new(1.5 * radius, 257)?))
            }
        }
    }

    /// Spectral grid with `m_max` degrees covering the fixture's frequencies.
    pub fn default_spectral_grid(&self, m_max: usize) -> Result<SpectralGrid> {
        let (_, time) = self.default_grids()?;
        let lambda_max = match *self {
            Fixture::HeatKernel { s, .. } => 6.0 / s,
            Fixture::PsiPacket { lambda, width, .. } => lambda.abs() + 8.0 / width,
            Fixture::Bump { radius, .. } => 30.0 / radius,
        };
        SpectralGrid::new(self.alpha(), m_max, SpectralLayout::for_time_extent(lambda_max, time.t_max))
    }

    /// Samples on [`Fixture::default_grids`].
    pub fn build(&self) -> Result<GridFunction> {
        let (radial, time) = self.default_grids()?;
        self.build_on(&radial, &time)
    }

    pub fn build_on(&self, radial: &RadialGrid, time: &TimeGrid) -> Result<GridFunction> {
        self.validate()?;
        if radial.alpha != self.alpha() {
            return Err(Error::GridMismatch(format!("grid alpha {} vs fixture alpha {}", radial.alpha, self.alpha())));
        }
        match *self {
            Fixture::HeatKernel { alpha, s } => heat_kernel_grid(&HeatParams::new(alpha, s)?, radial, time),
            Fixture::PsiPacket { alpha, lambda, m, width } => {
                let idx = LaguerreIndex::new(m, alpha)?;
                let radial_part: Vec<f64> = radial
                    .x_nodes
                    .iter()
                    .map(|&x| laguerre_function(idx, lambda.abs() * x * x))
                    .collect::<Result<_>>()?;
                let mut values = Vec::with_capacity(radial.len() * time.n_t);
                for r in &radial_part {
                    for j in 0..time.n_t {
                        let t = time.node(j);
                        let win = (-t * t / (2.0 * width * width)).exp();
                        values.push(Complex64::from_polar(r * win, lambda * t));
                    }
                }
                GridFunction::new(radial.clone(), *time, values)
            }
            Fixture::Bump { radius, .. } => GridFunction::from_fn(radial.clone(), *time, |x, t| {
                Complex64::new(bump_profile((x * x + t * t) / (radius * radius)), 0.0)
            }),
        }
    }
}

/// Odd node count with a step resolving frequencies up to `omega` with margin.
fn time_nodes(t_max: f64, omega: f64) -> usize {
    let step = (std::f64::consts::PI / (4.0 * omega)).min(0.1);
    let n = (2.0 * t_max / step).ceil() as usize + 1;
    n | 1
}

/// The family used by the Plancherel check.
pub fn plancherel_family(alpha: f64) -> [Fixture; 3] {
    [
        Fixture::HeatKernel { alpha, s: 0.5 },
        Fixture::PsiPacket { alpha, lambda: 1.0, m: 2, width: 4.0 },
        Fixture::Bump { alpha, radius: 1.0 },
    ]
}
