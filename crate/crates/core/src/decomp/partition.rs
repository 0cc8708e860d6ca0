//! Mesh partitioners: recursive coordinate bisection, greedy region
//! growing, and import of externally computed partitions.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{components, Decomposition};
use crate::error::{Error, Result};
use crate::mesh::geometry::polygon_geometry;
use crate::mesh::{Point, PolyMesh};

/// Passes of the connectivity repair before giving up.
pub const MAX_REPAIR_PASSES: usize = 16;

/// Largest acceptable ratio between the biggest and smallest part.
pub const BALANCE_LIMIT: f64 = 1.5;

#[derive(Clone, Debug, PartialEq)]
pub enum PartitionMethod {
    /// Recursive bisection of cell centroids across the longer extent.
    CoordinateBisection,
    /// Breadth-first growth of one part after another.
    GreedyGrowing,
    /// `polypart 1` file with one `cell <id> <subdomain>` line per cell.
    File(PathBuf),
}

impl std::str::FromStr for PartitionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rcb" | "bisection" | "coordinate-bisection" => Ok(Self::CoordinateBisection),
            "greedy" | "greedy-growing" => Ok(Self::GreedyGrowing),
            other => match other.strip_prefix("file:") {
                Some(p) => Ok(Self::File(PathBuf::from(p))),
                None => Err(Error::Config(format!("unknown partition method `{other}`"))),
            },
        }
    }
}

/// Partitions `mesh` into `n_sub` edge-connected subdomains.
pub fn partition_mesh(mesh: &PolyMesh, n_sub: usize, method: &PartitionMethod, seed: u64) -> Result<Decomposition> {
    if n_sub == 0 || n_sub > mesh.n_cells() {
        return Err(Error::Partition(format!(
            "cannot split {} cells into {n_sub} parts",
            mesh.n_cells()
        )));
    }
    let mut part = match method {
        PartitionMethod::CoordinateBisection => bisection(mesh, n_sub),
        PartitionMethod::GreedyGrowing => greedy(mesh, n_sub, seed),
        PartitionMethod::File(path) => {
            let p = read_partition(path)?;
            if p.len() != mesh.n_cells() {
                return Err(Error::Partition(format!(
                    "{}: {} cells in file, mesh has {}",
                    path.display(),
                    p.len(),
                    mesh.n_cells()
                )));
            }
            p
        }
    };
    repair_connectivity(mesh, &mut part, n_sub)?;
    let d = Decomposition::new(mesh, n_sub, part)?;
    if d.balance_ratio() > BALANCE_LIMIT {
        log::warn!(
            "partition balance ratio {:.3} exceeds {BALANCE_LIMIT}",
            d.balance_ratio()
        );
    }
    Ok(d)
}

fn centroids(mesh: &PolyMesh) -> Vec<Point> {
    (0..mesh.n_cells())
        .map(|c| polygon_geometry(&mesh.cell_points(c)).centroid)
        .collect()
}

fn bisection(mesh: &PolyMesh, n_sub: usize) -> Vec<usize> {
    let cen = centroids(mesh);
    let mut part = vec![0usize; mesh.n_cells()];
    let cells: Vec<usize> = (0..mesh.n_cells()).collect();
    split(&cen, cells, n_sub, 0, &mut part);
    part
}

fn split(cen: &[Point], mut cells: Vec<usize>, k: usize, first: usize, part: &mut [usize]) {
    if k == 1 {
        for c in cells {
            part[c] = first;
        }
        return;
    }
    let ext = |a: usize| {
        let (lo, hi) = cells.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &c| {
            (lo.min(cen[c][a]), hi.max(cen[c][a]))
        });
        hi - lo
    };
    let axis = if ext(1) > ext(0) { 1 } else { 0 };
    cells.sort_by(|&a, &b| {
        cen[a][axis]
            .total_cmp(&cen[b][axis])
            .then(cen[a][1 - axis].total_cmp(&cen[b][1 - axis]))
            .then(a.cmp(&b))
    });
    let k1 = k / 2;
    let n1 = ((cells.len() * k1) as f64 / k as f64).round() as usize;
    let n1 = n1.clamp(k1, cells.len() - (k - k1));
    let right = cells.split_off(n1);
    split(cen, cells, k1, first, part);
    split(cen, right, k - k1, first + k1, part);
}

fn greedy(mesh: &PolyMesh, n_sub: usize, seed: u64) -> Vec<usize> {
    let n = mesh.n_cells();
    let nb = mesh.cell_neighbors();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut part = vec![usize::MAX; n];
    let mut remaining = n;
    for p in 0..n_sub {
        let target = remaining / (n_sub - p);
        // start next to the already assigned region when possible
        let frontier: Vec<usize> = (0..n)
            .filter(|&c| part[c] == usize::MAX && (p == 0 || nb[c].iter().any(|&o| part[o] != usize::MAX)))
            .collect();
        let pool: Vec<usize> = if frontier.is_empty() {
            (0..n).filter(|&c| part[c] == usize::MAX).collect()
        } else {
            frontier
        };
        let start = pool[rng.gen_range(0..pool.len())];
        let mut queue = VecDeque::from([start]);
        let mut taken = 0;
        while taken < target {
            let c = match queue.pop_front() {
                Some(c) => c,
                None => match (0..n).find(|&c| part[c] == usize::MAX) {
                    Some(c) => c,
                    None => break,
                },
            };
            if part[c] != usize::MAX {
                continue;
            }
            part[c] = p;
            taken += 1;
            for &o in &nb[c] {
                if part[o] == usize::MAX {
                    queue.push_back(o);
                }
            }
        }
        remaining -= taken;
    }
    for v in &mut part {
        if *v == usize::MAX {
            *v = n_sub - 1;
        }
    }
    part
}

/// Moves every component except the largest of each part to the
/// neighbouring part with which it shares the longest boundary.
pub fn repair_connectivity(mesh: &PolyMesh, part: &mut [usize], n_sub: usize) -> Result<()> {
    for pass in 0..MAX_REPAIR_PASSES {
        let comps = components(mesh, part, n_sub);
        let mut moved = false;
        for (s, list) in comps.iter().enumerate() {
            if list.len() <= 1 {
                continue;
            }
            let keep = (0..list.len())
                .max_by(|&a, &b| list[a].len().cmp(&list[b].len()).then(b.cmp(&a)))
                .unwrap();
            for (k, comp) in list.iter().enumerate() {
                if k == keep {
                    continue;
                }
                let mut shared: HashMap<usize, f64> = HashMap::new();
                for &c in comp {
                    for &e in mesh.cell_edges(c) {
                        let edge = mesh.edge(e);
                        if let Some(o) = edge.cells().find(|&o| o != c) {
                            if part[o] != s {
                                *shared.entry(part[o]).or_default() += mesh.edge_length(e);
                            }
                        }
                    }
                }
                let target = shared
                    .iter()
                    .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(a.0)))
                    .map(|(&t, _)| t);
                if let Some(t) = target {
                    log::debug!("repair pass {pass}: moving {} cells from part {s} to {t}", comp.len());
                    for &c in comp {
                        part[c] = t;
                    }
                    moved = true;
                }
            }
        }
        if !moved {
            let ok = components(mesh, part, n_sub).iter().all(|l| l.len() <= 1);
            return if ok {
                Ok(())
            } else {
                Err(Error::Partition(
                    "stranded components without a neighbouring part".into(),
                ))
            };
        }
    }
    Err(Error::Partition(format!(
        "parts still disconnected after {MAX_REPAIR_PASSES} repair passes"
    )))
}

pub fn partition_to_string(d: &Decomposition) -> String {
    let mut s = String::from("polypart 1\n");
    for (c, &p) in d.element_to_sub().iter().enumerate() {
        writeln!(s, "cell {c} {p}").unwrap();
    }
    s
}

pub fn write_partition(d: &Decomposition, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, partition_to_string(d)).map_err(|e| Error::io(path, e))
}

/// Reads a `polypart 1` file into a cell-to-subdomain map.
pub fn read_partition(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_partition(&text, path)
}

pub fn parse_partition(text: &str, path: &Path) -> Result<Vec<usize>> {
    let err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut out = Vec::new();
    let mut header = false;
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let raw = raw.trim();
        if raw.is_empty() || raw.starts_with('#') {
            continue;
        }
        let tok: Vec<&str> = raw.split_whitespace().collect();
        if !header {
            if tok != ["polypart", "1"] {
                return Err(err(line, "expected header `polypart 1`".into()));
            }
            header = true;
            continue;
        }
        if tok.len() != 3 || tok[0] != "cell" {
            return Err(err(line, "expected `cell <id> <subdomain>`".into()));
        }
        let id: usize = tok[1].parse().map_err(|e| err(line, format!("bad cell id: {e}")))?;
        let sub: usize = tok[2].parse().map_err(|e| err(line, format!("bad subdomain: {e}")))?;
        if id != out.len() {
            return Err(err(line, format!("cell id {id}, expected {}", out.len())));
        }
        out.push(sub);
    }
    if !header {
        return Err(err(0, "empty file".into()));
    }
    Ok(out)
}
