//! The `lhg` command line. Exit status 0 on success, 1 when a check fails,
//! 2 on configuration, usage or input errors.

use crate::checks::miyachi_big_a;
use crate::error::{Error, Result};
use crate::fixtures::Fixture;
use crate::grid::{GridFunction, SpectralGrid, SpectralLayout};
use crate::heat::{calibrate, default_heat_grids, fit_gaussian_estimate, heat_apply, heat_kernel_eval, HeatMode, HeatParams};
use crate::hypergroup::PointK;
use crate::io::{self, fmt_f64, SCHEMA_VERSION};
use crate::miyachi::{default_lambda_samples, miyachi_certificate, MiyachiParams, DEFAULT_R_LADDER};
use crate::special::{bessel_j, laguerre_function, phi, LaguerreIndex};
use crate::suite::{run_and_write, SuiteConfig, SuiteName};
use crate::transforms::{fourier_laguerre_forward, fourier_laguerre_inverse, grid_l2_norm};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::json;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "lhg", version, about = "Harmonic analysis on the Laguerre hypergroup")]
pub struct Cli {
    /// Flat key=value configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Multiplies every upper-bound tolerance.
    #[arg(long, global = true)]
    pub tol_scale: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a verification suite and write `<out>/<suite>.json`.
    Verify(VerifyArgs),
    /// Forward or inverse Fourier-Laguerre transform of a CSV+JSON pair.
    Transform(TransformArgs),
    /// Calibrate the heat kernel and write a report plus a kernel CSV.
    Heat(HeatArgs),
    /// Run the uncertainty-principle certificate on a grid function.
    Miyachi(MiyachiArgs),
    /// Dump special-function value tables as CSV.
    Tables(TablesArgs),
    /// Write a built-in test function as a CSV+JSON pair.
    Fixture(FixtureArgs),
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum, default_value = "all")]
    pub suite: SuiteArg,
    /// Output directory (overrides `out` from the config).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Extra `key=value` settings, applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Special,
    Basis,
    Transforms,
    Hypergroup,
    Heat,
    Miyachi,
    All,
}

impl From<SuiteArg> for SuiteName {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Special => SuiteName::Special,
            SuiteArg::Basis => SuiteName::Basis,
            SuiteArg::Transforms => SuiteName::Transforms,
            SuiteArg::Hypergroup => SuiteName::Hypergroup,
            SuiteArg::Heat => SuiteName::Heat,
            SuiteArg::Miyachi => SuiteName::Miyachi,
            SuiteArg::All => SuiteName::All,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Direction {
    Forward,
    Inverse,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    /// Input pair (`.csv` or `.json`).
    #[arg(long)]
    pub input: PathBuf,
    /// Output pair stem.
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value = "forward")]
    pub direction: Direction,
    /// Must match the order stored with the input, when given.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 48)]
    pub m_max: usize,
    #[arg(long, default_value_t = 20.0)]
    pub lambda_max: f64,
    /// Grid function whose grids receive the inverse transform.
    #[arg(long)]
    pub grid: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Multiplier,
    Convolution,
}

#[derive(Debug, Args)]
pub struct HeatArgs {
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    /// How the semigroup is applied to the bump in the report.
    #[arg(long, value_enum, default_value = "multiplier")]
    pub mode: ModeArg,
    /// JSON report path.
    #[arg(long, default_value = "heat.json")]
    pub out: PathBuf,
    /// Kernel dump stem; defaults to `<report stem>_kernel`.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MiyachiArgs {
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long)]
    pub b: f64,
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    /// Gaussian-estimate exponent; fitted from the heat kernel when absent.
    #[arg(long = "big-a")]
    pub big_a: Option<f64>,
    /// Comma-separated frequency samples; `{+-0.5, +-1, +-2} 4a` when absent.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub lambdas: Option<Vec<f64>>,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "report.json")]
    pub report: PathBuf,
}

#[derive(Debug, Args)]
pub struct TablesArgs {
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "0,0.5,1,2")]
    pub alpha: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    pub m_max: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FixtureName {
    HeatKernel,
    PsiPacket,
    Bump,
}

#[derive(Debug, Args)]
pub struct FixtureArgs {
    #[arg(value_enum)]
    pub name: FixtureName,
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    /// Heat time of `heat_kernel`.
    #[arg(long, default_value_t = 0.5)]
    pub s: f64,
    /// Frequency of `psi_packet`.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub lambda: f64,
    /// Degree of `psi_packet`.
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    /// Time window of `psi_packet`.
    #[arg(long, default_value_t = 4.0)]
    pub width: f64,
    /// Support radius of `bump`.
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    /// Output pair stem.
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses `args` (including the program name) and runs the command,
/// returning the exit status. Messages go to `out` and `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            // --help and --version land here too and are not errors
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_CONFIG;
            }
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_CONFIG
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Verify(a) => verify(cli, a, out),
        Command::Transform(a) => transform(a, out),
        Command::Heat(a) => heat(a, out),
        Command::Miyachi(a) => miyachi(a, out),
        Command::Tables(a) => tables(a, out),
        Command::Fixture(a) => fixture(a, out),
    }
}

fn verify(cli: &Cli, a: &VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let mut cfg = match &cli.config {
        Some(p) => SuiteConfig::from_file(p)?,
        None => SuiteConfig::default(),
    };
    for kv in &a.set {
        let (k, v) = kv.rsplit_once('=').ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    if let Some(t) = cli.tol_scale {
        cfg.tol_scale = t;
    }
    if let Some(o) = &a.out {
        cfg.out = o.clone();
    }
    let report = run_and_write(a.suite.into(), &cfg)?;
    for c in &report.checks {
        writeln!(out, "{} {} measured={:e} tolerance={:e}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.measured, c.tolerance)?;
    }
    let failed = report.checks.iter().filter(|c| !c.pass).count();
    writeln!(out, "{}: {} checks, {failed} failed", report.suite, report.checks.len())?;
    Ok(if report.pass { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn check_alpha_flag(flag: Option<f64>, stored: f64) -> Result<()> {
    match flag {
        Some(a) if a != stored => Err(Error::Config(format!("--alpha {a} does not match the input's alpha {stored}"))),
        _ => Ok(()),
    }
}

fn transform(a: &TransformArgs, out: &mut dyn Write) -> Result<i32> {
    match a.direction {
        Direction::Forward => {
            let f = io::read_grid_function(&a.input)?;
            check_alpha_flag(a.alpha, f.radial.alpha)?;
            let layout = SpectralLayout::for_time_extent(a.lambda_max, f.time.t_max);
            let grid = SpectralGrid::new(f.radial.alpha, a.m_max, layout)?;
            let fhat = fourier_laguerre_forward(&f, &grid)?;
            io::write_spectral_function(&fhat, &a.output)?;
            writeln!(out, "wrote {} ({} x {})", io::pair_paths(&a.output).0.display(), grid.n_lambda(), grid.n_m())?;
        }
        Direction::Inverse => {
            let fhat = io::read_spectral_function(&a.input)?;
            check_alpha_flag(a.alpha, fhat.grid.alpha)?;
            let like = a.grid.as_ref().ok_or_else(|| Error::Config("--direction inverse needs --grid".into()))?;
            let g = io::read_grid_function(like)?;
            if g.radial.alpha != fhat.grid.alpha {
                return Err(Error::GridMismatch(format!("grid alpha {} vs spectral alpha {}", g.radial.alpha, fhat.grid.alpha)));
            }
            let f = fourier_laguerre_inverse(&fhat, &g.radial, &g.time)?;
            io::write_grid_function(&f, &a.output)?;
            writeln!(out, "wrote {} ({} x {})", io::pair_paths(&a.output).0.display(), f.n_x(), f.n_t())?;
        }
    }
    Ok(EXIT_OK)
}

fn heat(a: &HeatArgs, out: &mut dyn Write) -> Result<i32> {
    let p = HeatParams::new(a.alpha, a.s)?;
    let (radial, time) = default_heat_grids(a.alpha, a.s)?;
    let cal = calibrate(&p, &radial, &time)?;
    let params = cal.params;
    let estimate = fit_gaussian_estimate(&params, 4.0 * a.s.sqrt(), 8.0 * a.s)?;
    let kernel = crate::heat::heat_kernel_grid(&params, &radial, &time)?;
    // the semigroup applied to a bump: its integral is preserved
    let bump = Fixture::Bump { alpha: a.alpha, radius: 1.0 };
    let f = bump.build()?;
    let mode = match a.mode {
        ModeArg::Multiplier => HeatMode::Multiplier,
        ModeArg::Convolution => HeatMode::Convolution,
    };
    let spectral = bump.default_spectral_grid(48)?;
    let g = heat_apply(&f, &params, mode, &spectral)?;
    let (m_in, m_out) = (f.integral().re, g.integral().re);
    let report = json!({
        "schema_version": SCHEMA_VERSION,
        "params": params,
        "kappa": params.kappa,
        "stated_kappa": cal.stated_kappa,
        "kappa_mean": cal.kappa_mean,
        "kappa_residual": cal.kappa_residual,
        "raw_mass": cal.raw_mass,
        "mass": cal.mass,
        "origin_value": heat_kernel_eval(&params, PointK::ORIGIN)?,
        "gaussian_estimate": estimate,
        "mode": mode,
        "bump_integral": m_in,
        "smoothed_integral": m_out,
        "integral_drift": (m_out - m_in).abs() / m_in,
        "smoothed_l2_ratio": grid_l2_norm(&g) / grid_l2_norm(&f),
        "grid": io::grid_header(&kernel),
    });
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    io::write_report(&a.out, &report)?;
    let stem = a.csv.clone().unwrap_or_else(|| {
        let name = a.out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "heat".into());
        a.out.with_file_name(format!("{name}_kernel"))
    });
    io::write_grid_function(&kernel, &stem)?;
    writeln!(out, "kappa = {} (stated {}), c0 = {}, A = {}", params.kappa, cal.stated_kappa, params.c0, estimate.a)?;
    writeln!(out, "wrote {} and {}", a.out.display(), io::pair_paths(&stem).0.display())?;
    Ok(EXIT_OK)
}

fn miyachi(a: &MiyachiArgs, out: &mut dyn Write) -> Result<i32> {
    let f = io::read_grid_function(&a.input)?;
    let big_a = match a.big_a {
        Some(v) => v,
        None => miyachi_big_a(f.radial.alpha)?,
    };
    let p = MiyachiParams::new(a.a, a.b, a.delta, big_a)?;
    let lambdas = a.lambdas.clone().unwrap_or_else(|| default_lambda_samples(1.0 / (4.0 * a.a)));
    if lambdas.is_empty() || lambdas.iter().any(|l| !l.is_finite()) {
        return Err(Error::Config(format!("bad frequency samples {lambdas:?}")));
    }
    let report = miyachi_certificate(&f, &p, &lambdas, &DEFAULT_R_LADDER);
    io::write_report(&a.report, &report)?;
    writeln!(out, "conclusion: {}", serde_json::to_value(report.conclusion)?.as_str().unwrap_or("?"))?;
    writeln!(out, "wrote {}", a.report.display())?;
    Ok(if report.theorem_stress { EXIT_CHECK_FAILED } else { EXIT_OK })
}

fn tables(a: &TablesArgs, out: &mut dyn Write) -> Result<i32> {
    if a.alpha.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
        return Err(Error::Config(format!("--alpha needs finite orders >= 0, got {:?}", a.alpha)));
    }
    std::fs::create_dir_all(&a.out)?;
    let mut lag = String::from("alpha,m,x,laguerre_function,phi\n");
    for &alpha in &a.alpha {
        for m in 0..=a.m_max {
            let idx = LaguerreIndex::new(m, alpha)?;
            for k in 0..=64 {
                let x = 0.125 * k as f64;
                lag.push_str(&format!("{},{m},{},{},{}\n", fmt_f64(alpha), fmt_f64(x), fmt_f64(laguerre_function(idx, x)?), fmt_f64(phi(idx, x)?)));
            }
        }
    }
    let mut bes = String::from("alpha,x,bessel_j\n");
    for &alpha in &a.alpha {
        for k in 0..=80 {
            let x = 0.5 * k as f64;
            bes.push_str(&format!("{},{},{}\n", fmt_f64(alpha), fmt_f64(x), fmt_f64(bessel_j(alpha, Complex64::new(x, 0.0))?.re)));
        }
    }
    let (lp, bp) = (a.out.join("laguerre.csv"), a.out.join("bessel.csv"));
    std::fs::write(&lp, lag)?;
    std::fs::write(&bp, bes)?;
    writeln!(out, "wrote {} and {}", lp.display(), bp.display())?;
    Ok(EXIT_OK)
}

/// Builds a fixture and writes it as a pair at `stem`.
pub fn make_fixture(fx: &Fixture, stem: &Path) -> Result<GridFunction> {
    let f = fx.build()?;
    if let Some(dir) = stem.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    io::write_grid_function(&f, stem)?;
    Ok(f)
}

fn fixture(a: &FixtureArgs, out: &mut dyn Write) -> Result<i32> {
    let fx = match a.name {
        FixtureName::HeatKernel => Fixture::HeatKernel { alpha: a.alpha, s: a.s },
        FixtureName::PsiPacket => Fixture::PsiPacket { alpha: a.alpha, lambda: a.lambda, m: a.m, width: a.width },
        FixtureName::Bump => Fixture::Bump { alpha: a.alpha, radius: a.radius },
    };
    let f = make_fixture(&fx, &a.out)?;
    writeln!(out, "wrote {} ({} x {})", io::pair_paths(&a.out).0.display(), f.n_x(), f.n_t())?;
    Ok(EXIT_OK)
}
