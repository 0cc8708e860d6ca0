//! Flat `key = value` experiment configuration.
//!
//! Lines starting with `#` are comments. List-valued keys take
//! comma-separated values; an empty list yields an empty experiment matrix.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::sinker::SinkerParams;
use crate::bddc::ScalingKind;
use crate::coarse::CoarseKind;
use crate::decomp::PartitionMethod;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MeshFamily {
    Cvt,
    Rnd,
}

impl fmt::Display for MeshFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MeshFamily::Cvt => "cvt",
            MeshFamily::Rnd => "rnd",
        })
    }
}

impl FromStr for MeshFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cvt" => Ok(MeshFamily::Cvt),
            "rnd" => Ok(MeshFamily::Rnd),
            other => Err(Error::Config(format!("unknown mesh family '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub families: Vec<MeshFamily>,
    /// Cell counts, paired with `nsub` entry by entry (a single value is
    /// broadcast).
    pub cells: Vec<usize>,
    pub nsub: Vec<usize>,
    pub nsink: Vec<usize>,
    pub coarse: Vec<CoarseKind>,
    pub scalings: Vec<ScalingKind>,
    pub tol: f64,
    pub rtol: f64,
    pub maxit: usize,
    pub max_per_edge: usize,
    pub seed_mesh: u64,
    pub seed_sinkers: u64,
    pub sinker: SinkerParams,
    /// Tangential speed of the top lid.
    pub lid: f64,
    pub lloyd_tol: f64,
    pub lloyd_iters: usize,
    /// Lloyd steps applied to RND meshes (zero keeps raw Voronoi cells).
    pub rnd_relax: usize,
    pub partition: PartitionMethod,
    /// Largest number of unknowns for which the direct cross-check runs.
    pub direct_check_limit: usize,
    /// Run matrix groups as a parallel pool instead of sequentially.
    pub parallel: bool,
    pub csv: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            families: vec![MeshFamily::Cvt, MeshFamily::Rnd],
            cells: vec![2000],
            nsub: vec![16],
            nsink: vec![11],
            coarse: vec![
                CoarseKind::Frugal,
                CoarseKind::AdaptiveFirst,
                CoarseKind::AdaptiveSecond,
            ],
            scalings: vec![ScalingKind::Multiplicity, ScalingKind::Deluxe],
            tol: 100.0,
            rtol: 1e-6,
            maxit: 1000,
            max_per_edge: crate::coarse::DEFAULT_MAX_PER_EDGE,
            seed_mesh: 1,
            seed_sinkers: 1,
            sinker: SinkerParams::default(),
            lid: 1.0,
            lloyd_tol: 1e-3,
            lloyd_iters: 60,
            rnd_relax: 0,
            partition: PartitionMethod::CoordinateBisection,
            direct_check_limit: 200_000,
            parallel: false,
            csv: None,
            report: None,
        }
    }
}

fn parse_list<T: FromStr>(key: &str, v: &str, line: usize) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|_| bad(key, s, line)))
        .collect()
}

fn parse_one<T: FromStr>(key: &str, v: &str, line: usize) -> Result<T> {
    v.trim().parse::<T>().map_err(|_| bad(key, v, line))
}

fn bad(key: &str, v: &str, line: usize) -> Error {
    Error::Config(format!("line {line}: invalid value '{}' for '{key}'", v.trim()))
}

/// Subdomain count given as `N` or `AxB`.
fn parse_nsub(s: &str) -> Option<usize> {
    match s.split_once(['x', 'X']) {
        Some((a, b)) => Some(a.trim().parse::<usize>().ok()? * b.trim().parse::<usize>().ok()?),
        None => s.parse().ok(),
    }
}

fn list_to_string<T: fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn parse_partition(v: &str) -> Result<PartitionMethod> {
    match v.trim() {
        "rcb" => Ok(PartitionMethod::CoordinateBisection),
        "greedy" => Ok(PartitionMethod::GreedyGrowing),
        other => match other.strip_prefix("file:") {
            Some(p) => Ok(PartitionMethod::File(PathBuf::from(p.trim()))),
            None => Err(Error::Config(format!("unknown partition method '{other}'"))),
        },
    }
}

fn partition_to_string(p: &PartitionMethod) -> String {
    match p {
        PartitionMethod::CoordinateBisection => "rcb".into(),
        PartitionMethod::GreedyGrowing => "greedy".into(),
        PartitionMethod::File(p) => format!("file:{}", p.display()),
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Self::default();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let t = raw.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let (key, v) = t
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {line}: expected 'key = value'")))?;
            let key = key.trim();
            match key {
                "family" => c.families = parse_list(key, v, line)?,
                "cells" => c.cells = parse_list(key, v, line)?,
                "nsub" => {
                    c.nsub = v
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(|s| parse_nsub(s).ok_or_else(|| bad(key, s, line)))
                        .collect::<Result<_>>()?
                }
                "nsink" => c.nsink = parse_list(key, v, line)?,
                "coarse" => c.coarse = parse_list(key, v, line)?,
                "scaling" => c.scalings = parse_list(key, v, line)?,
                "tol" => c.tol = parse_one(key, v, line)?,
                "rtol" => c.rtol = parse_one(key, v, line)?,
                "maxit" => c.maxit = parse_one(key, v, line)?,
                "max_per_edge" => c.max_per_edge = parse_one(key, v, line)?,
                "seed_mesh" => c.seed_mesh = parse_one(key, v, line)?,
                "seed_sinkers" => c.seed_sinkers = parse_one(key, v, line)?,
                "omega" => c.sinker.omega = parse_one(key, v, line)?,
                "delta" => c.sinker.delta = parse_one(key, v, line)?,
                "nu_min" => c.sinker.nu_min = parse_one(key, v, line)?,
                "nu_max" => c.sinker.nu_max = parse_one(key, v, line)?,
                "beta" => c.sinker.beta = parse_one(key, v, line)?,
                "lid" => c.lid = parse_one(key, v, line)?,
                "lloyd_tol" => c.lloyd_tol = parse_one(key, v, line)?,
                "lloyd_iters" => c.lloyd_iters = parse_one(key, v, line)?,
                "rnd_relax" => c.rnd_relax = parse_one(key, v, line)?,
                "partition" => c.partition = parse_partition(v)?,
                "direct_check_limit" => c.direct_check_limit = parse_one(key, v, line)?,
                "parallel" => c.parallel = parse_one(key, v, line)?,
                "csv" => c.csv = Some(PathBuf::from(v.trim())).filter(|p| !p.as_os_str().is_empty()),
                "report" => c.report = Some(PathBuf::from(v.trim())).filter(|p| !p.as_os_str().is_empty()),
                other => return Err(Error::Config(format!("line {line}: unknown key '{other}'"))),
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::Config(m));
        if !(self.rtol > 0.0 && self.rtol < 1.0) {
            return err(format!("rtol must lie in (0, 1), got {}", self.rtol));
        }
        if self.coarse.iter().any(|k| k.adaptive().is_some()) && !(self.tol > 1.0) {
            return err(format!(
                "tol must exceed 1 for adaptive coarse spaces, got {}",
                self.tol
            ));
        }
        if self.maxit == 0 || self.max_per_edge == 0 || self.lloyd_iters == 0 {
            return err("maxit, max_per_edge and lloyd_iters must be positive".into());
        }
        if self.cells.contains(&0) || self.nsub.contains(&0) {
            return err("cells and nsub entries must be positive".into());
        }
        if self.cells.len() > 1 && self.nsub.len() > 1 && self.cells.len() != self.nsub.len() {
            return err(format!(
                "cells ({}) and nsub ({}) lists must have equal length or length one",
                self.cells.len(),
                self.nsub.len()
            ));
        }
        let p = &self.sinker;
        if !(p.omega > 0.0 && p.delta > 0.0 && p.beta >= 0.0 && p.nu_min > 0.0 && p.nu_min < p.nu_max) {
            return err("sinker parameters need omega, delta, nu_min > 0, beta >= 0 and nu_min < nu_max".into());
        }
        if !(self.lid.is_finite() && self.lloyd_tol > 0.0) {
            return err("lid must be finite and lloyd_tol positive".into());
        }
        Ok(())
    }

    /// `(cells, nsub)` pairs of the matrix.
    pub fn sizes(&self) -> Vec<(usize, usize)> {
        let n = if self.cells.is_empty() || self.nsub.is_empty() {
            0
        } else {
            self.cells.len().max(self.nsub.len())
        };
        (0..n)
            .map(|k| {
                (
                    self.cells[k.min(self.cells.len() - 1)],
                    self.nsub[k.min(self.nsub.len() - 1)],
                )
            })
            .collect()
    }

    /// Resolved configuration in the input format, every key present.
    pub fn to_text(&self) -> String {
        let p = &self.sinker;
        let path = |o: &Option<PathBuf>| o.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        [
            format!("family = {}", list_to_string(&self.families)),
            format!("cells = {}", list_to_string(&self.cells)),
            format!("nsub = {}", list_to_string(&self.nsub)),
            format!("nsink = {}", list_to_string(&self.nsink)),
            format!("coarse = {}", list_to_string(&self.coarse)),
            format!("scaling = {}", list_to_string(&self.scalings)),
            format!("tol = {}", self.tol),
            format!("rtol = {}", self.rtol),
            format!("maxit = {}", self.maxit),
            format!("max_per_edge = {}", self.max_per_edge),
            format!("seed_mesh = {}", self.seed_mesh),
            format!("seed_sinkers = {}", self.seed_sinkers),
            format!("omega = {}", p.omega),
            format!("delta = {}", p.delta),
            format!("nu_min = {}", p.nu_min),
            format!("nu_max = {}", p.nu_max),
            format!("beta = {}", p.beta),
            format!("lid = {}", self.lid),
            format!("lloyd_tol = {}", self.lloyd_tol),
            format!("lloyd_iters = {}", self.lloyd_iters),
            format!("rnd_relax = {}", self.rnd_relax),
            format!("partition = {}", partition_to_string(&self.partition)),
            format!("direct_check_limit = {}", self.direct_check_limit),
            format!("parallel = {}", self.parallel),
            format!("csv = {}", path(&self.csv)),
            format!("report = {}", path(&self.report)),
        ]
        .join("\n")
            + "\n"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_round_trip() {
        let c = ExperimentConfig::parse("# comment\ncells = 500, 1000\nnsub = 2x2, 4x4\ncoarse = frugal\n").unwrap();
        assert_eq!(c.nsub, vec![4, 16]);
        assert_eq!(c.sizes(), vec![(500, 4), (1000, 16)]);
        assert_eq!(c.rtol, 1e-6);
        let again = ExperimentConfig::parse(&c.to_text()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ExperimentConfig::parse("bogus = 1").is_err());
        assert!(ExperimentConfig::parse("rtol = 2").is_err());
        assert!(ExperimentConfig::parse("tol = 1\ncoarse = first").is_err());
        assert!(ExperimentConfig::parse("tol = 1\ncoarse = frugal").is_ok());
        assert!(ExperimentConfig::parse("cells = 1, 2\nnsub = 1, 2, 3").is_err());
        assert!(ExperimentConfig::parse("no equals sign").is_err());
        assert!(ExperimentConfig::parse("nu_min = 10\nnu_max = 1").is_err());
    }

    #[test]
    fn empty_lists_give_empty_sizes() {
        let c = ExperimentConfig::parse("cells =\n").unwrap();
        assert!(c.sizes().is_empty());
    }
}
