//! Snapshot and report files. Fields are whitespace-free CSV, the regime map is one
//! row of integers per `j`, and metadata is TOML.

use super::config::ScenarioConfig;
use super::driver::{CellMoments, RunReport};
use crate::error::{Result, SolverError};
use crate::mesh::SpatialGrid;
use serde::Serialize;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

pub const FIELDS_FILE: &str = "fields.csv";
pub const REGIMES_FILE: &str = "regimes.txt";
pub const META_FILE: &str = "meta.toml";
pub const REPORT_FILE: &str = "report.toml";

#[derive(Serialize)]
struct Meta<'a> {
    step: usize,
    time: f64,
    config: &'a ScenarioConfig,
}

fn toml_err(e: impl std::fmt::Display) -> SolverError {
    SolverError::Config(e.to_string())
}

pub fn snapshot_dir(root: &Path, step: usize) -> PathBuf {
    root.join(format!("snap_{step:06}"))
}

/// Writes one snapshot under `dir`, creating it if needed.
pub fn write_snapshot(
    dir: &Path,
    grid: &SpatialGrid,
    fields: &[CellMoments],
    regimes: &[i8],
    step: usize,
    time: f64,
    cfg: &ScenarioConfig,
) -> Result<()> {
    if fields.len() != grid.cells() || regimes.len() != grid.cells() {
        return Err(SolverError::Contract("snapshot arrays do not match the grid".into()));
    }
    fs::create_dir_all(dir)?;
    let mut csv = String::from("i,j,x,y,rho,ux,uy,T,P\n");
    for (c, m) in fields.iter().enumerate() {
        let (i, j) = grid.coords(c);
        let (x, y) = grid.center(i, j);
        writeln!(csv, "{i},{j},{x:e},{y:e},{:e},{:e},{:e},{:e},{:e}", m.rho, m.ux, m.uy, m.temp, m.pressure).unwrap();
    }
    fs::write(dir.join(FIELDS_FILE), csv)?;

    let mut reg = String::new();
    for j in 0..grid.ny {
        let row: Vec<String> = (0..grid.nx).map(|i| regimes[grid.index(i, j)].to_string()).collect();
        reg.push_str(&row.join(" "));
        reg.push('\n');
    }
    fs::write(dir.join(REGIMES_FILE), reg)?;

    let meta = toml::to_string(&Meta { step, time, config: cfg }).map_err(toml_err)?;
    fs::write(dir.join(META_FILE), meta)?;
    Ok(())
}

/// Parses a regime file back into `(nx, ny, values)` in row-major order.
pub fn read_regimes(path: &Path) -> Result<(usize, usize, Vec<i8>)> {
    let text = fs::read_to_string(path)?;
    let mut nx = 0;
    let mut ny = 0;
    let mut out = Vec::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let row: Vec<i8> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| SolverError::Config(format!("bad regime entry {t:?}"))))
            .collect::<Result<_>>()?;
        if ny > 0 && row.len() != nx {
            return Err(SolverError::Config("ragged regime file".into()));
        }
        nx = row.len();
        ny += 1;
        out.extend(row);
    }
    Ok((nx, ny, out))
}

pub fn write_report(dir: &Path, report: &RunReport) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(REPORT_FILE), toml::to_string(report).map_err(toml_err)?)?;
    Ok(())
}

pub fn read_report(dir: &Path) -> Result<RunReport> {
    toml::from_str(&fs::read_to_string(dir.join(REPORT_FILE))?).map_err(toml_err)
}
