//! CSV + JSON storage of grid and spectral functions.
//!
//! A function is stored as a pair `<stem>.csv` (one row per sample) and
//! `<stem>.json` (grid metadata). Values are written with 17 significant
//! digits so reading the pair back reproduces every bit.

use crate::error::{Error, Result};
use crate::grid::{GridFunction, RadialGrid, RadialKind, SpectralFunction, SpectralGrid, SpectralLayout, TimeGrid};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Version of every JSON document written by this crate.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridHeader {
    pub schema_version: u32,
    pub alpha: f64,
    pub radial: RadialKind,
    pub t_max: f64,
    pub n_x: usize,
    pub n_t: usize,
    pub x_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralHeader {
    pub schema_version: u32,
    pub alpha: f64,
    pub m_max: usize,
    pub layout: SpectralLayout,
    pub n_lambda: usize,
}

/// Full-precision decimal form of a double.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// `<stem>.csv` and `<stem>.json` for a path given with or without extension.
pub fn pair_paths(path: &Path) -> (PathBuf, PathBuf) {
    (path.with_extension("csv"), path.with_extension("json"))
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::Parse(format!("line {line}: bad number {s:?}")))
}

fn write_csv(path: &Path, header: [&str; 4], rows: impl Iterator<Item = [String; 4]>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    w.write_record(header).map_err(csv_error)?;
    for r in rows {
        w.write_record(&r).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Parse(format!("{other:?}")),
        }
    } else {
        Error::Parse(e.to_string())
    }
}

/// Rows of a four-column CSV with the expected header, parsed as numbers.
fn read_csv(path: &Path, header: [&str; 4]) -> Result<Vec<[f64; 4]>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_error)?;
    let got = r.headers().map_err(csv_error)?.clone();
    if got.iter().map(str::trim).ne(header.iter().copied()) {
        return Err(Error::Parse(format!("expected columns {header:?}, found {got:?}")));
    }
    let mut out = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_error)?;
        if rec.len() != 4 {
            return Err(Error::Parse(format!("line {}: expected 4 fields, found {}", k + 2, rec.len())));
        }
        let mut row = [0.0; 4];
        for (slot, field) in row.iter_mut().zip(rec.iter()) {
            *slot = parse_f64(field, k + 2)?;
        }
        out.push(row);
    }
    Ok(out)
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}

fn check_version(v: u32) -> Result<()> {
    if v == SCHEMA_VERSION {
        Ok(())
    } else {
        Err(Error::Parse(format!("unsupported schema_version {v}")))
    }
}

pub fn grid_header(f: &GridFunction) -> GridHeader {
    GridHeader {
        schema_version: SCHEMA_VERSION,
        alpha: f.radial.alpha,
        radial: f.radial.kind,
        t_max: f.time.t_max,
        n_x: f.n_x(),
        n_t: f.n_t(),
        x_max: f.radial.x_max(),
    }
}

/// Writes `f` as the pair at `path` (extension ignored).
pub fn write_grid_function(f: &GridFunction, path: &Path) -> Result<()> {
    let (csv_path, json_path) = pair_paths(path);
    write_json(&json_path, &grid_header(f))?;
    let rows = (0..f.n_x()).flat_map(|i| {
        (0..f.n_t()).map(move |j| {
            let v = f.at(i, j);
            [fmt_f64(f.radial.x_nodes[i]), fmt_f64(f.time.node(j)), fmt_f64(v.re), fmt_f64(v.im)]
        })
    });
    write_csv(&csv_path, ["x", "t", "re", "im"], rows)
}

/// Reads the pair at `path`. The grid is rebuilt from the header and the
/// CSV coordinates must match its nodes exactly.
pub fn read_grid_function(path: &Path) -> Result<GridFunction> {
    let (csv_path, json_path) = pair_paths(path);
    let header: GridHeader = serde_json::from_str(&std::fs::read_to_string(&json_path)?)?;
    check_version(header.schema_version)?;
    let radial = RadialGrid::from_kind(header.alpha, header.radial)?;
    let time = TimeGrid::new(header.t_max, header.n_t)?;
    if radial.len() != header.n_x {
        return Err(Error::Parse(format!("header n_x {} but the radial kind gives {}", header.n_x, radial.len())));
    }
    let rows = read_csv(&csv_path, ["x", "t", "re", "im"])?;
    if rows.len() != radial.len() * time.n_t {
        return Err(Error::Parse(format!("{} rows for a {} x {} grid", rows.len(), radial.len(), time.n_t)));
    }
    let mut values = Vec::with_capacity(rows.len());
    for (k, row) in rows.iter().enumerate() {
        let (i, j) = (k / time.n_t, k % time.n_t);
        if row[0] != radial.x_nodes[i] || row[1] != time.node(j) {
            return Err(Error::GridMismatch(format!(
                "row {}: ({}, {}) is not the grid node ({}, {})",
                k + 2,
                row[0],
                row[1],
                radial.x_nodes[i],
                time.node(j)
            )));
        }
        values.push(Complex64::new(row[2], row[3]));
    }
    GridFunction::new(radial, time, values)
}

pub fn spectral_header(f: &SpectralFunction) -> SpectralHeader {
    SpectralHeader {
        schema_version: SCHEMA_VERSION,
        alpha: f.grid.alpha,
        m_max: f.grid.m_max,
        layout: f.grid.layout,
        n_lambda: f.grid.n_lambda(),
    }
}

pub fn write_spectral_function(f: &SpectralFunction, path: &Path) -> Result<()> {
    let (csv_path, json_path) = pair_paths(path);
    write_json(&json_path, &spectral_header(f))?;
    let n_m = f.grid.n_m();
    let rows = (0..f.grid.n_lambda()).flat_map(|l| {
        (0..n_m).map(move |m| {
            let v = f.at(l, m);
            [fmt_f64(f.grid.lambda_nodes[l]), m.to_string(), fmt_f64(v.re), fmt_f64(v.im)]
        })
    });
    write_csv(&csv_path, ["lambda", "m", "re", "im"], rows)
}

pub fn read_spectral_function(path: &Path) -> Result<SpectralFunction> {
    let (csv_path, json_path) = pair_paths(path);
    let header: SpectralHeader = serde_json::from_str(&std::fs::read_to_string(&json_path)?)?;
    check_version(header.schema_version)?;
    let grid = SpectralGrid::new(header.alpha, header.m_max, header.layout)?;
    if grid.n_lambda() != header.n_lambda {
        return Err(Error::Parse(format!("header n_lambda {} but the layout gives {}", header.n_lambda, grid.n_lambda())));
    }
    let rows = read_csv(&csv_path, ["lambda", "m", "re", "im"])?;
    let n_m = grid.n_m();
    if rows.len() != grid.n_lambda() * n_m {
        return Err(Error::Parse(format!("{} rows for a {} x {} spectral grid", rows.len(), grid.n_lambda(), n_m)));
    }
    let mut values = Vec::with_capacity(rows.len());
    for (k, row) in rows.iter().enumerate() {
        let (l, m) = (k / n_m, k % n_m);
        if row[0] != grid.lambda_nodes[l] || row[1] != m as f64 {
            return Err(Error::GridMismatch(format!("row {}: ({}, {}) is not the node ({}, {m})", k + 2, row[0], row[1], grid.lambda_nodes[l])));
        }
        values.push(Complex64::new(row[2], row[3]));
    }
    SpectralFunction::new(grid, values)
}

/// Writes a JSON report with a trailing newline.
pub fn write_report<T: Serialize>(path: &Path, report: &T) -> Result<()> {
    write_json(path, report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let radial = RadialGrid::gauss_panels(0.5, 3.0, 2, 5).unwrap();
        let time = TimeGrid::new(2.0, 9).unwrap();
        let f = GridFunction::from_fn(radial, time, |x, t| Complex64::new((x * t).sin() / 3.0, 1.0 / (1.0 + x + t * t))).unwrap();
        let path = dir.path().join("f");
        write_grid_function(&f, &path).unwrap();
        let g = read_grid_function(&path.with_extension("csv")).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn spectral_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let grid = SpectralGrid::new(1.0, 3, SpectralLayout::new(2.0, 0.5)).unwrap();
        let f = SpectralFunction::from_fn(grid, |l, m| Complex64::new(l.exp() / 7.0, m as f64 / 3.0)).unwrap();
        let path = dir.path().join("F.json");
        write_spectral_function(&f, &path).unwrap();
        assert_eq!(read_spectral_function(&path).unwrap(), f);
    }

    #[test]
    fn tampered_coordinates_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let f = GridFunction::zeros(RadialGrid::uniform(0.0, 1.0, 4).unwrap(), TimeGrid::new(1.0, 3).unwrap());
        let path = dir.path().join("z");
        write_grid_function(&f, &path).unwrap();
        let csv_path = path.with_extension("csv");
        let text = std::fs::read_to_string(&csv_path).unwrap().replacen("0.0000000000000000e0", "1.0e-3", 1);
        std::fs::write(&csv_path, text).unwrap();
        assert!(matches!(read_grid_function(&path), Err(Error::GridMismatch(_))));
    }
}
