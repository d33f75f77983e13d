//! Verification suites: configuration, execution and JSON reports.

use crate::checks::*;
use crate::error::{Error, Result};
use crate::fixtures::plancherel_family;
use crate::grid::SpectralGrid;
use crate::hypergroup::TranslationRule;
use crate::io::SCHEMA_VERSION;
use crate::miyachi::Conclusion;
use crate::special::{
    bessel_j, bessel_j_integral, laguerre_at_zero, laguerre_polynomial, log_gamma, LaguerreIndex,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteName {
    Special,
    Basis,
    Transforms,
    Hypergroup,
    Heat,
    Miyachi,
    All,
}

impl SuiteName {
    pub const PARTS: [SuiteName; 6] =
        [SuiteName::Special, SuiteName::Basis, SuiteName::Transforms, SuiteName::Hypergroup, SuiteName::Heat, SuiteName::Miyachi];

    pub fn as_str(&self) -> &'static str {
        match self {
            SuiteName::Special => "special",
            SuiteName::Basis => "basis",
            SuiteName::Transforms => "transforms",
            SuiteName::Hypergroup => "hypergroup",
            SuiteName::Heat => "heat",
            SuiteName::Miyachi => "miyachi",
            SuiteName::All => "all",
        }
    }
}

impl fmt::Display for SuiteName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SuiteName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SuiteName::PARTS
            .iter()
            .chain([SuiteName::All].iter())
            .find(|n| n.as_str() == s)
            .copied()
            .ok_or_else(|| Error::Config(format!("unknown suite {s:?}")))
    }
}

/// Minimal resolutions accepted by [`SuiteConfig::validate`].
pub const MIN_N_X: usize = 32;
pub const MIN_N_T: usize = 128;
pub const MIN_M_MAX: usize = 8;

/// Default degree cut-off of the Plancherel check.
pub const DEFAULT_M_MAX: usize = 48;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    /// Orders to test; each suite has its own default set when absent.
    pub alpha_set: Option<Vec<f64>>,
    /// Replacements for the heat-kernel grids.
    pub grid: GridOverrides,
    /// Degree cut-off of the Plancherel check.
    pub m_max: usize,
    /// Spectral extent of the Plancherel check; per fixture when absent.
    pub lambda_max: Option<f64>,
    /// Factor applied to every upper-bound tolerance.
    pub tol_scale: f64,
    /// Per-check tolerances by check name (before `tol_scale`).
    pub tolerances: BTreeMap<String, f64>,
    pub out: PathBuf,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            alpha_set: None,
            grid: GridOverrides::default(),
            m_max: DEFAULT_M_MAX,
            lambda_max: None,
            tol_scale: 1.0,
            tolerances: BTreeMap::new(),
            out: PathBuf::from("."),
        }
    }
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| Error::Config(format!("{key}: cannot parse {v:?}")))
}

impl SuiteConfig {
    /// Reads flat `key = value` lines; `#` starts a comment. Keys may contain
    /// `=` (check names do), so the value follows the last one.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = SuiteConfig::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .rsplit_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value, got {line:?}", n + 1)))?;
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Applies one setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "alpha_set" => {
                let v: Vec<f64> = value.split(',').map(|a| parse_num("alpha_set", a)).collect::<Result<_>>()?;
                self.alpha_set = Some(v);
            }
            "n_x" => self.grid.n_x = Some(parse_num(key, value)?),
            "n_t" => self.grid.n_t = Some(parse_num(key, value)?),
            "x_max" => self.grid.x_max = Some(parse_num(key, value)?),
            "t_max" => self.grid.t_max = Some(parse_num(key, value)?),
            "m_max" => self.m_max = parse_num(key, value)?,
            "lambda_max" => self.lambda_max = Some(parse_num(key, value)?),
            "tol_scale" => self.tol_scale = parse_num(key, value)?,
            "out" => self.out = PathBuf::from(value),
            _ => match key.strip_prefix("tol.") {
                Some(name) if !name.is_empty() => {
                    self.tolerances.insert(name.to_string(), parse_num(key, value)?);
                }
                _ => return Err(Error::Config(format!("unknown config key {key:?}"))),
            },
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if let Some(n) = self.grid.n_x.filter(|&n| n < MIN_N_X) {
            return bad(format!("n_x = {n} is below the minimum {MIN_N_X}"));
        }
        if let Some(n) = self.grid.n_t.filter(|&n| n < MIN_N_T) {
            return bad(format!("n_t = {n} is below the minimum {MIN_N_T}"));
        }
        if self.m_max < MIN_M_MAX {
            return bad(format!("m_max = {} is below the minimum {MIN_M_MAX}", self.m_max));
        }
        let positive = |v: Option<f64>| v.map_or(true, |v| v > 0.0 && v.is_finite());
        if !positive(self.grid.x_max) || !positive(self.grid.t_max) || !positive(self.lambda_max) {
            return bad("x_max, t_max and lambda_max must be positive".into());
        }
        if !(self.tol_scale > 0.0 && self.tol_scale.is_finite()) {
            return bad(format!("tol_scale must be positive, got {}", self.tol_scale));
        }
        if let Some(a) = self.alpha_set.as_ref() {
            if a.is_empty() || a.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
                return bad(format!("alpha_set needs finite orders >= 0, got {a:?}"));
            }
        }
        if let Some((k, v)) = self.tolerances.iter().find(|(_, v)| !(**v >= 0.0)) {
            return bad(format!("tolerance {k} = {v} must be >= 0"));
        }
        Ok(())
    }

    fn alphas(&self, default: &[f64]) -> Vec<f64> {
        self.alpha_set.clone().unwrap_or_else(|| default.to_vec())
    }

    /// The tolerance of check `name` with overrides and scaling applied.
    fn finish(&self, c: Check) -> Check {
        let base = self.tolerances.get(&c.name).copied().unwrap_or(c.tolerance);
        let tol = if c.relation == Relation::AtMost { base * self.tol_scale } else { base };
        c.with_tolerance(tol)
    }
}

/// A suite's JSON document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub schema_version: u32,
    pub suite: SuiteName,
    pub pass: bool,
    /// Sorted by name.
    pub checks: Vec<Check>,
    /// Structured results behind the checks.
    pub details: BTreeMap<String, Value>,
}

/// Runs `name` and returns its report, or a configuration error.
pub fn run_suite(name: SuiteName, cfg: &SuiteConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    let mut run = Run { cfg, checks: Vec::new(), details: BTreeMap::new() };
    let parts: Vec<SuiteName> = if name == SuiteName::All { SuiteName::PARTS.to_vec() } else { vec![name] };
    for part in parts {
        match part {
            SuiteName::Special => special(&mut run),
            SuiteName::Basis => basis(&mut run),
            SuiteName::Transforms => transforms(&mut run),
            SuiteName::Hypergroup => hypergroup(&mut run),
            SuiteName::Heat => heat(&mut run),
            SuiteName::Miyachi => miyachi(&mut run),
            SuiteName::All => unreachable!(),
        }
    }
    Ok(run.into_report(name))
}

/// Writes `<out>/<suite>.json` and a `<suite>.log` sidecar with timings.
pub fn write_suite_report(report: &SuiteReport, out: &Path, log: &[String]) -> Result<PathBuf> {
    std::fs::create_dir_all(out)?;
    let path = out.join(format!("{}.json", report.suite));
    crate::io::write_report(&path, report)?;
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let mut text = format!("finished at unix time {stamp}\n");
    for l in log {
        text.push_str(l);
        text.push('\n');
    }
    std::fs::write(out.join(format!("{}.log", report.suite)), text)?;
    Ok(path)
}

/// [`run_suite`] followed by [`write_suite_report`]; for `all` every part
/// is also written on its own.
pub fn run_and_write(name: SuiteName, cfg: &SuiteConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    if name != SuiteName::All {
        let t0 = Instant::now();
        let report = run_suite(name, cfg)?;
        write_suite_report(&report, &cfg.out, &[format!("{name}: {:.3} s", t0.elapsed().as_secs_f64())])?;
        return Ok(report);
    }
    let mut parts = Vec::new();
    let mut log = Vec::new();
    for part in SuiteName::PARTS {
        let t0 = Instant::now();
        let r = run_suite(part, cfg)?;
        let line = format!("{part}: {:.3} s", t0.elapsed().as_secs_f64());
        write_suite_report(&r, &cfg.out, std::slice::from_ref(&line))?;
        log.push(line);
        parts.push(r);
    }
    let mut checks: Vec<Check> = parts.iter().flat_map(|r| r.checks.iter().cloned()).collect();
    checks.sort_by(|a, b| a.name.cmp(&b.name));
    let details = parts.into_iter().flat_map(|r| r.details).collect();
    let report = SuiteReport { schema_version: SCHEMA_VERSION, suite: SuiteName::All, pass: checks.iter().all(|c| c.pass), checks, details };
    write_suite_report(&report, &cfg.out, &log)?;
    Ok(report)
}

struct Run<'a> {
    cfg: &'a SuiteConfig,
    checks: Vec<Check>,
    details: BTreeMap<String, Value>,
}

impl Run<'_> {
    fn push(&mut self, c: Check) {
        self.checks.push(self.cfg.finish(c));
    }

    /// Records `measure` as an upper-bound check, or a failed check on error.
    fn at_most(&mut self, name: String, tol: f64, measure: Result<f64>) {
        let c = match measure {
            Ok(v) => Check::at_most(name, v, tol),
            Err(e) => Check::failed(name, tol, &e),
        };
        self.push(c);
    }

    fn detail<T: Serialize>(&mut self, key: String, v: &T) {
        self.details.insert(key, serde_json::to_value(v).unwrap_or(Value::Null));
    }

    fn into_report(mut self, suite: SuiteName) -> SuiteReport {
        self.checks.sort_by(|a, b| a.name.cmp(&b.name));
        SuiteReport {
            schema_version: SCHEMA_VERSION,
            suite,
            pass: self.checks.iter().all(|c| c.pass),
            checks: self.checks,
            details: self.details,
        }
    }
}

const BASIS_ALPHAS: [f64; 4] = [0.0, 0.5, 1.0, 2.0];
const HEAVY_ALPHAS: [f64; 2] = [0.0, 1.0];

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn special(run: &mut Run) {
    let gamma_cases = [(0.5, 0.5 * std::f64::consts::PI.ln()), (1.0, 0.0), (3.5, (15.0 * std::f64::consts::PI.sqrt() / 8.0).ln()), (10.0, 362880f64.ln())];
    let err = gamma_cases.iter().try_fold(0.0_f64, |m, &(x, want)| Ok(m.max((log_gamma(x)? - want).abs())));
    run.at_most("special.log_gamma".into(), 1e-14, err);
    for alpha in run.cfg.alphas(&BASIS_ALPHAS) {
        run.at_most(format!("special.laguerre_explicit_sum.alpha={alpha}"), 1e-12, laguerre_explicit(alpha));
        let zero = (0..=20).try_fold(0.0_f64, |m, k| {
            let idx = LaguerreIndex::new(k, alpha)?;
            // L_m(0) = prod_{j=1}^{m} (j + alpha) / j
            let want: f64 = (1..=k).map(|j| (j as f64 + alpha) / j as f64).product();
            Ok(m.max(rel(laguerre_at_zero(idx), want)))
        });
        run.at_most(format!("special.laguerre_at_zero.alpha={alpha}"), 1e-13, zero);
        let pts = [Complex64::new(1.0, 0.5), Complex64::new(3.0, 0.0), Complex64::new(0.0, 5.0), Complex64::new(7.0, -2.0)];
        let cross = pts.iter().try_fold(0.0_f64, |m, &z| {
            let a = bessel_j(alpha, z)?;
            let b = bessel_j_integral(alpha, z, 64)?;
            Ok(m.max((a - b).norm() / a.norm()))
        });
        run.at_most(format!("special.bessel_series_vs_integral.alpha={alpha}"), 1e-10, cross);
    }
    // J_{1/2}(z) = sqrt(2/(pi z)) sin z, on both sides of the series/asymptotic switch
    let half = [0.7, 3.0, 12.0, 30.0, 60.0].iter().try_fold(0.0_f64, |m, &x| {
        let z = Complex64::new(x, 0.0);
        let want = (2.0 / (std::f64::consts::PI * x)).sqrt() * x.sin();
        Ok(m.max((bessel_j(0.5, z)?.re - want).abs() / want.abs().max(1e-3)))
    });
    run.at_most("special.bessel_half_order_closed_form".into(), 1e-12, half);
}

/// Largest relative gap between the recurrence and
/// `sum_k (-x)^k Gamma(m+alpha+1) / (Gamma(k+alpha+1) k! (m-k)!)`.
fn laguerre_explicit(alpha: f64) -> Result<f64> {
    let mut worst = 0.0_f64;
    for m in 0..=12usize {
        let idx = LaguerreIndex::new(m, alpha)?;
        for x in [0.5, 2.0, 7.0] {
            let mut sum = 0.0;
            let mut mag = 0.0;
            for k in 0..=m {
                let ln_c = log_gamma(m as f64 + alpha + 1.0)?
                    - log_gamma(k as f64 + alpha + 1.0)?
                    - log_gamma(k as f64 + 1.0)?
                    - log_gamma((m - k) as f64 + 1.0)?;
                let term = (ln_c + k as f64 * f64::ln(x)).exp() * if k % 2 == 0 { 1.0 } else { -1.0 };
                sum += term;
                mag += term.abs();
            }
            worst = worst.max((laguerre_polynomial(idx, x) - sum).abs() / mag.max(1.0));
        }
    }
    Ok(worst)
}

fn basis(run: &mut Run) {
    for alpha in run.cfg.alphas(&BASIS_ALPHAS) {
        let gram = [0.5, 1.0, 2.0].iter().try_fold(0.0_f64, |m, &l| Ok(m.max(orthonormality_defect(alpha, l, 20)?)));
        run.at_most(format!("basis.orthonormality.alpha={alpha}"), 1e-8, gram);
        run.at_most(format!("basis.hankel_eigen.alpha={alpha}"), 1e-6, hankel_eigen_defect(alpha, 10, 8.0));
    }
}

fn transforms(run: &mut Run) {
    for alpha in run.cfg.alphas(&HEAVY_ALPHAS) {
        for fx in plancherel_family(alpha) {
            let label = match fx {
                crate::fixtures::Fixture::HeatKernel { .. } => "heat_kernel",
                crate::fixtures::Fixture::PsiPacket { .. } => "psi_packet",
                crate::fixtures::Fixture::Bump { .. } => "bump",
            };
            let grid = fx.default_spectral_grid(run.cfg.m_max).and_then(|g| match run.cfg.lambda_max {
                Some(l) => SpectralGrid::new(alpha, run.cfg.m_max, crate::grid::SpectralLayout { lambda_max: l, ..g.layout }),
                None => Ok(g),
            });
            let d = grid.and_then(|g| plancherel_defect(&fx, &g));
            run.at_most(format!("transforms.plancherel.{label}.alpha={alpha}"), 1e-3, d);
        }
        match packet_peak(alpha) {
            Ok((lambda, m)) => {
                run.push(Check::at_most(format!("transforms.packet_peak_lambda.alpha={alpha}"), (lambda - 1.0).abs(), 0.1));
                run.push(Check::at_most(format!("transforms.packet_peak_degree.alpha={alpha}"), (m as f64 - 2.0).abs(), 0.0));
            }
            Err(e) => run.push(Check::failed(format!("transforms.packet_peak_lambda.alpha={alpha}"), 0.1, &e)),
        }
    }
}

fn hypergroup(run: &mut Run) {
    for alpha in run.cfg.alphas(&BASIS_ALPHAS) {
        match product_formula_defect(alpha, 6) {
            Ok((grid, closed)) => {
                run.push(Check::at_most(format!("hypergroup.product_formula.alpha={alpha}"), grid, 1e-5));
                run.push(Check::at_most(format!("hypergroup.product_formula_closed_form.alpha={alpha}"), closed, 1e-12));
            }
            Err(e) => run.push(Check::failed(format!("hypergroup.product_formula.alpha={alpha}"), 1e-5, &e)),
        }
        let mass = TranslationRule::new(alpha, 96, 16).map(|r| (r.mass() - 1.0).abs());
        run.at_most(format!("hypergroup.translation_mass.alpha={alpha}"), 1e-13, mass);
        match eigen_sign_fit(alpha, &BASIS_LAMBDAS, 4) {
            Ok(fit) => {
                let note = format!(
                    "sigma = {}: L psi = {}2|lambda|(2m+alpha+1) psi. The heat equation u_s = L u decays only for \
                     sigma = -1, so an eigenvalue stated with a plus sign conflicts with it",
                    fit.sigma,
                    if fit.sigma < 0.0 { "-" } else { "+" }
                );
                run.push(Check::at_most(format!("hypergroup.l_eigen_residual.alpha={alpha}"), fit.residual, 1e-4).with_note(note));
                run.detail(format!("hypergroup.l_eigen.alpha={alpha}"), &json!({ "sigma": fit.sigma, "sign_conflict": fit.sigma < 0.0, "ratios": fit.ratios }));
            }
            Err(e) => run.push(Check::failed(format!("hypergroup.l_eigen_residual.alpha={alpha}"), 1e-4, &e)),
        }
    }
}

fn heat(run: &mut Run) {
    let ov = run.cfg.grid;
    for alpha in run.cfg.alphas(&HEAVY_ALPHAS) {
        match kappa_calibration(alpha, &HEAT_S, &ov) {
            Ok(cal) => {
                let note = format!("kappa = {} (stated {}), c0 = {}", cal.params.kappa, cal.stated_kappa, cal.params.c0);
                run.push(Check::at_most(format!("heat.kappa_residual.alpha={alpha}"), cal.kappa_residual, 1e-3).with_note(note));
                run.push(Check::at_most(format!("heat.mass_constant.alpha={alpha}"), (cal.params.c0 - 1.0).abs(), 1e-6));
                let mut summary = serde_json::to_value(&cal).unwrap_or(Value::Null);
                if let Some(obj) = summary.as_object_mut() {
                    obj.remove("samples");
                    obj.insert("n_samples".into(), json!(cal.samples.len()));
                }
                run.details.insert(format!("heat.calibration.alpha={alpha}"), summary);
            }
            Err(e) => run.push(Check::failed(format!("heat.kappa_residual.alpha={alpha}"), 1e-3, &e)),
        }
        run.at_most(format!("heat.semigroup.alpha={alpha}"), 1e-3, semigroup_defect(alpha, 0.25, 0.5));
        let scaling = SCALING_S.iter().try_fold(0.0_f64, |m, &s| Ok(m.max(scaling_defect(alpha, s, &ov)?)));
        run.at_most(format!("heat.scaling.alpha={alpha}"), 1e-8, scaling);
        match gaussian_estimate(alpha) {
            Ok(est) => {
                run.push(Check::at_least(format!("heat.gaussian_estimate_a.alpha={alpha}"), est.a, f64::MIN_POSITIVE));
                run.push(Check::at_most(format!("heat.gaussian_estimate_violations.alpha={alpha}"), est.violations as f64, 0.0));
                run.push(Check::at_least(format!("heat.positivity.alpha={alpha}"), est.min_value, -1e-12));
                run.detail(format!("heat.gaussian_estimate.alpha={alpha}"), &est);
            }
            Err(e) => run.push(Check::failed(format!("heat.gaussian_estimate_a.alpha={alpha}"), 0.0, &e)),
        }
    }
}

fn miyachi(run: &mut Run) {
    for alpha in run.cfg.alphas(&HEAVY_ALPHAS) {
        let tag = |what: &str| format!("miyachi.{what}.alpha={alpha}");
        match miyachi_scenarios(alpha) {
            Ok(sc) => {
                run.push(Check::flag(tag("divergent_b0.3"), sc.divergent.hypothesis2.divergent));
                run.push(Check::flag(tag("hypotheses_not_met_b0.3"), sc.divergent.conclusion == Conclusion::HypothesesNotMet));
                run.push(Check::flag(tag("bounded_b0.05"), sc.bounded.hypothesis2.pass));
                run.push(Check::flag(tag("inconclusive_b0.05"), sc.bounded.conclusion == Conclusion::Inconclusive));
                run.push(Check::flag(tag("zero_must_vanish"), sc.zero.conclusion == Conclusion::MustVanish));
                run.push(Check::at_most(tag("zero_residual_norm"), sc.zero.residual_norm, 0.0));
                let stress = [&sc.divergent, &sc.bounded, &sc.zero, &sc.bump]
                    .iter()
                    .any(|r| r.hypothesis1.pass && r.hypothesis2.pass && r.product_ab > 0.25 && r.residual_norm > r.tolerance);
                run.push(Check::flag(tag("no_theorem_stress"), !stress));
                run.push(Check::at_most(tag("pivot_variation"), sc.pivot_cv, 1e-3));
                run.push(Check::at_most(tag("hankel_growth_coefficient"), sc.growth_coefficient, 1.0 / (4.0 * sc.a * sc.big_a) + 1e-3));
                run.detail(tag("scenarios"), &sc);
            }
            Err(e) => run.push(Check::failed(tag("divergent_b0.3"), 1.0, &e)),
        }
        let mut fractions = STRIP_INTERIOR.to_vec();
        fractions.extend(STRIP_EDGE);
        match strip_profile(alpha, STRIP_XI, &fractions) {
            Ok((p, pts)) => {
                let interior = pts.iter().filter(|q| STRIP_INTERIOR.contains(&q.fraction));
                let worst = interior.fold(0.0_f64, |m, q| m.max(q.slice.growth).max(q.hankel.growth));
                run.push(Check::at_most(tag("strip_interior_growth"), worst, crate::miyachi::STABLE_GROWTH));
                let edge = pts.last().map_or(f64::NAN, |q| q.slice.growth);
                run.push(Check::at_least(tag("strip_edge_growth"), edge, crate::miyachi::BLOW_UP_GROWTH));
                run.detail(tag("strip"), &json!({ "params": p, "xi": STRIP_XI, "points": pts }));
            }
            Err(e) => run.push(Check::failed(tag("strip_interior_growth"), crate::miyachi::STABLE_GROWTH, &e)),
        }
    }
}
