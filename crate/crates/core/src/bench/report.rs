//! CSV and structured-text emission of a report table.

use std::fmt::Write as _;
use std::path::Path;

use super::config::{ExperimentConfig, MeshFamily};
use super::experiment::{ReportRow, ReportTable, RowStatus};
use crate::bddc::ScalingKind;
use crate::coarse::CoarseKind;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str =
    "coarse,scaling,mesh,cells,nsub,nsink,tol,n_pi,iters,k2,rel_residual,status,seed_mesh,seed_sinkers";

/// The CSV columns of one row.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvRow {
    pub coarse: CoarseKind,
    pub scaling: ScalingKind,
    pub mesh: MeshFamily,
    pub cells: usize,
    pub nsub: usize,
    pub nsink: usize,
    pub tol: f64,
    pub n_pi: usize,
    pub iters: usize,
    pub k2: f64,
    pub rel_residual: f64,
    pub status: RowStatus,
    pub seed_mesh: u64,
    pub seed_sinkers: u64,
}

impl CsvRow {
    /// Field-wise equality that treats two NaNs as equal.
    pub fn same_values(&self, other: &CsvRow) -> bool {
        let feq = |a: f64, b: f64| a == b || (a.is_nan() && b.is_nan());
        let mut a = self.clone();
        let mut b = other.clone();
        let floats = feq(a.tol, b.tol) && feq(a.k2, b.k2) && feq(a.rel_residual, b.rel_residual);
        (a.tol, a.k2, a.rel_residual) = (0.0, 0.0, 0.0);
        (b.tol, b.k2, b.rel_residual) = (0.0, 0.0, 0.0);
        floats && a == b
    }
}

impl From<&ReportRow> for CsvRow {
    fn from(r: &ReportRow) -> Self {
        Self {
            coarse: r.coarse,
            scaling: r.scaling,
            mesh: r.family,
            cells: r.cells,
            nsub: r.nsub,
            nsink: r.nsink,
            tol: r.tol,
            n_pi: r.n_pi,
            iters: r.iters,
            k2: r.k2,
            rel_residual: r.rel_residual,
            status: r.status,
            seed_mesh: r.seed_mesh,
            seed_sinkers: r.seed_sinkers,
        }
    }
}

/// Header plus one line per row. Floats use the shortest representation
/// that parses back to the same value.
pub fn to_csv(table: &ReportTable) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in &table.rows {
        let c = CsvRow::from(r);
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            c.coarse,
            c.scaling,
            c.mesh,
            c.cells,
            c.nsub,
            c.nsink,
            c.tol,
            c.n_pi,
            c.iters,
            c.k2,
            c.rel_residual,
            c.status,
            c.seed_mesh,
            c.seed_sinkers
        );
    }
    s
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::Config("CSV header mismatch".into()));
    }
    lines
        .enumerate()
        .map(|(k, line)| {
            let f: Vec<&str> = line.split(',').collect();
            let bad = || Error::Config(format!("CSV line {}: malformed row", k + 2));
            if f.len() != 14 {
                return Err(bad());
            }
            Ok(CsvRow {
                coarse: f[0].parse()?,
                scaling: f[1].parse()?,
                mesh: f[2].parse()?,
                cells: f[3].parse().map_err(|_| bad())?,
                nsub: f[4].parse().map_err(|_| bad())?,
                nsink: f[5].parse().map_err(|_| bad())?,
                tol: f[6].parse().map_err(|_| bad())?,
                n_pi: f[7].parse().map_err(|_| bad())?,
                iters: f[8].parse().map_err(|_| bad())?,
                k2: f[9].parse().map_err(|_| bad())?,
                rel_residual: f[10].parse().map_err(|_| bad())?,
                status: f[11].parse()?,
                seed_mesh: f[12].parse().map_err(|_| bad())?,
                seed_sinkers: f[13].parse().map_err(|_| bad())?,
            })
        })
        .collect()
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.6e}")).collect::<Vec<_>>().join(" ")
}

/// Full provenance report: the resolved configuration followed by one block
/// per row with counts, direct-check error and both residual histories.
pub fn to_structured_text(table: &ReportTable, cfg: &ExperimentConfig) -> String {
    let mut s = String::from("[config]\n");
    s.push_str(&cfg.to_text());
    for (k, r) in table.rows.iter().enumerate() {
        let _ = writeln!(s, "\n[run {k}]");
        let _ = writeln!(s, "coarse = {}", r.coarse);
        let _ = writeln!(s, "scaling = {}", r.scaling);
        let _ = writeln!(s, "mesh = {}", r.family);
        let _ = writeln!(s, "cells = {}", r.cells);
        let _ = writeln!(s, "nsub = {}", r.nsub);
        let _ = writeln!(s, "nsink = {}", r.nsink);
        let _ = writeln!(s, "seed_mesh = {}", r.seed_mesh);
        let _ = writeln!(s, "seed_sinkers = {}", r.seed_sinkers);
        let _ = writeln!(s, "corners = {}", r.n_corners);
        let _ = writeln!(s, "edges = {}", r.n_edges);
        let _ = writeln!(s, "gamma_dofs = {}", r.n_gamma);
        let _ = writeln!(s, "n_pi_requested = {}", r.n_pi_requested);
        let _ = writeln!(s, "n_pi = {}", r.n_pi);
        let _ = writeln!(s, "truncated = {}", r.truncated);
        let _ = writeln!(s, "iters = {}", r.iters);
        let _ = writeln!(s, "k2 = {}", r.k2);
        let _ = writeln!(s, "rel_residual = {}", r.rel_residual);
        let _ = writeln!(s, "status = {}", r.status);
        match r.direct_error {
            Some(e) => {
                let _ = writeln!(s, "direct_error = {e:e}");
            }
            None => s.push_str("direct_error = skipped\n"),
        }
        if !r.message.is_empty() {
            let _ = writeln!(s, "message = {}", r.message);
        }
        let _ = writeln!(s, "residual_history = {}", join(&r.residual_history));
        let _ = writeln!(s, "preconditioned_history = {}", join(&r.preconditioned_history));
    }
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
