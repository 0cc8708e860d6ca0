//! Voronoi tessellations of the unit square: random seeds (RND) and
//! Lloyd-relaxed centroidal tessellations (CVT).
//!
//! Each cell is the unit square clipped by the bisector half-planes of
//! nearby seeds. Neighbours are visited in growing rings of a bucket grid
//! until no farther seed can reach the current polygon. Seeds come from
//! ChaCha8 ([`RNG_ALGORITHM`]) seeded with the user seed.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::geometry::{polygon_geometry, signed_area};
use super::{dist, Point, PolyMesh};
use crate::error::{Error, Result};

/// Name of the pseudo-random generator used for seeds and perturbations.
pub const RNG_ALGORITHM: &str = "ChaCha8";

/// Attempts before a degenerate diagram is reported as an error.
pub const MAX_ATTEMPTS: usize = 8;

const SNAP_TOL: f64 = 1e-13;
const MERGE_TOL: f64 = 1e-10;
const COINCIDENT_TOL: f64 = 1e-12;

/// Outcome of a Lloyd relaxation.
#[derive(Clone, Debug, PartialEq)]
pub struct LloydReport {
    /// Number of Voronoi diagrams computed.
    pub iterations: usize,
    /// Largest seed-to-centroid distance of the returned diagram.
    pub max_displacement: f64,
    pub converged: bool,
    /// Seeds of the returned diagram.
    pub seeds: Vec<Point>,
}

/// Default Lloyd tolerance `1e-5 / sqrt(n)`.
pub fn default_lloyd_tol(n_cells: usize) -> f64 {
    1e-5 / (n_cells as f64).sqrt()
}

/// Default Lloyd iteration cap.
pub const DEFAULT_LLOYD_ITERS: usize = 200;

pub fn random_seeds(n: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| [rng.gen::<f64>(), rng.gen::<f64>()]).collect()
}

/// Voronoi tessellation of `n_cells` uniform random seeds, optionally
/// followed by `relax_steps` Lloyd steps.
pub fn generate_random_voronoi(n_cells: usize, seed: u64, relax_steps: usize) -> Result<PolyMesh> {
    if n_cells == 0 {
        return Err(Error::InvalidMesh("n_cells must be positive".into()));
    }
    with_retries(seed, n_cells, |seeds| {
        let mut s = seeds.to_vec();
        for _ in 0..relax_steps {
            let polys = voronoi_polygons(&s)?;
            s = polys.iter().map(|p| polygon_geometry(p).centroid).collect();
        }
        build_mesh(&s)
    })
}

/// Centroidal Voronoi tessellation by Lloyd iteration from random seeds.
pub fn generate_cvt(n_cells: usize, seed: u64, lloyd_tol: f64, max_lloyd_iters: usize) -> Result<PolyMesh> {
    generate_cvt_with_report(n_cells, seed, lloyd_tol, max_lloyd_iters).map(|(m, _)| m)
}

pub fn generate_cvt_with_report(
    n_cells: usize,
    seed: u64,
    lloyd_tol: f64,
    max_lloyd_iters: usize,
) -> Result<(PolyMesh, LloydReport)> {
    if n_cells == 0 {
        return Err(Error::InvalidMesh("n_cells must be positive".into()));
    }
    check_lloyd_params(lloyd_tol, max_lloyd_iters)?;
    with_retries(seed, n_cells, |seeds| {
        lloyd_from_seeds(seeds, lloyd_tol, max_lloyd_iters)
    })
}

/// Lloyd iteration from explicit seeds: move every seed to its cell
/// centroid until the largest move is below `lloyd_tol`.
pub fn lloyd_from_seeds(seeds: &[Point], lloyd_tol: f64, max_lloyd_iters: usize) -> Result<(PolyMesh, LloydReport)> {
    check_lloyd_params(lloyd_tol, max_lloyd_iters)?;
    if seeds.is_empty() {
        return Err(Error::InvalidMesh("no seeds".into()));
    }
    let mut s = seeds.to_vec();
    let mut iterations = 0;
    loop {
        let polys = voronoi_polygons(&s)?;
        iterations += 1;
        let centroids: Vec<Point> = polys.iter().map(|p| polygon_geometry(p).centroid).collect();
        let disp = s.iter().zip(&centroids).map(|(a, b)| dist(*a, *b)).fold(0.0, f64::max);
        let converged = disp < lloyd_tol;
        if converged || iterations >= max_lloyd_iters {
            let mesh = assemble(&polys)?;
            return Ok((
                mesh,
                LloydReport {
                    iterations,
                    max_displacement: disp,
                    converged,
                    seeds: s,
                },
            ));
        }
        s = centroids;
    }
}

/// Voronoi mesh of the given seeds (no retries).
pub fn build_mesh(seeds: &[Point]) -> Result<PolyMesh> {
    assemble(&voronoi_polygons(seeds)?)
}

fn check_lloyd_params(tol: f64, iters: usize) -> Result<()> {
    if !(tol > 0.0) || iters == 0 {
        return Err(Error::InvalidMesh(format!(
            "Lloyd parameters must be positive (tol {tol}, iterations {iters})"
        )));
    }
    Ok(())
}

fn with_retries<T>(seed: u64, n: usize, mut f: impl FnMut(&[Point]) -> Result<T>) -> Result<T> {
    let base = random_seeds(n, seed);
    let mut last = String::new();
    for attempt in 0..MAX_ATTEMPTS {
        let seeds = if attempt == 0 {
            base.clone()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(attempt as u64);
            let amp = 1e-7 * attempt as f64;
            base.iter()
                .map(|p| {
                    [
                        (p[0] + amp * (rng.gen::<f64>() - 0.5)).clamp(0.0, 1.0),
                        (p[1] + amp * (rng.gen::<f64>() - 0.5)).clamp(0.0, 1.0),
                    ]
                })
                .collect()
        };
        match f(&seeds) {
            Ok(v) => return Ok(v),
            Err(e) => {
                log::warn!("Voronoi attempt {} failed: {e}; perturbing seeds", attempt + 1);
                last = e.to_string();
            }
        }
    }
    Err(Error::Generation {
        attempts: MAX_ATTEMPTS,
        reason: last,
    })
}

/// Bucket grid over the unit square for neighbour queries.
struct Buckets {
    m: usize,
    items: Vec<Vec<usize>>,
}

impl Buckets {
    fn new(seeds: &[Point]) -> Self {
        let m = ((seeds.len() as f64).sqrt().ceil() as usize).max(1);
        let mut items = vec![Vec::new(); m * m];
        for (i, p) in seeds.iter().enumerate() {
            let (bi, bj) = Self::index(m, *p);
            items[bj * m + bi].push(i);
        }
        Self { m, items }
    }

    fn index(m: usize, p: Point) -> (usize, usize) {
        let f = |t: f64| ((t * m as f64).floor().max(0.0) as usize).min(m - 1);
        (f(p[0]), f(p[1]))
    }
}

fn degenerate(msg: String) -> Error {
    Error::InvalidMesh(format!("degenerate Voronoi diagram: {msg}"))
}

/// Clipped Voronoi polygon of every seed, counter-clockwise.
pub fn voronoi_polygons(seeds: &[Point]) -> Result<Vec<Vec<Point>>> {
    for p in seeds {
        if !(0.0..=1.0).contains(&p[0]) || !(0.0..=1.0).contains(&p[1]) {
            return Err(Error::InvalidMesh(format!(
                "seed ({}, {}) outside the unit square",
                p[0], p[1]
            )));
        }
    }
    let grid = Buckets::new(seeds);
    (0..seeds.len())
        .into_par_iter()
        .map(|i| voronoi_cell(seeds, &grid, i))
        .collect()
}

fn voronoi_cell(seeds: &[Point], grid: &Buckets, i: usize) -> Result<Vec<Point>> {
    let s = seeds[i];
    let m = grid.m;
    let cs = 1.0 / m as f64;
    let (bi, bj) = Buckets::index(m, s);
    let mut poly: Vec<Point> = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    let mut r = 0usize;
    loop {
        let (i0, i1) = (bi as isize - r as isize, bi as isize + r as isize);
        let (j0, j1) = (bj as isize - r as isize, bj as isize + r as isize);
        for jj in j0..=j1 {
            for ii in i0..=i1 {
                let on_ring = ii == i0 || ii == i1 || jj == j0 || jj == j1;
                if !on_ring || ii < 0 || jj < 0 || ii >= m as isize || jj >= m as isize {
                    continue;
                }
                for &j in &grid.items[jj as usize * m + ii as usize] {
                    if j == i {
                        continue;
                    }
                    let t = seeds[j];
                    let d = [t[0] - s[0], t[1] - s[1]];
                    if d[0].hypot(d[1]) < COINCIDENT_TOL {
                        return Err(degenerate(format!("seeds {i} and {j} coincide")));
                    }
                    let c = 0.5 * ((t[0] * t[0] + t[1] * t[1]) - (s[0] * s[0] + s[1] * s[1]));
                    poly = clip(&poly, d, c);
                    if poly.len() < 3 {
                        return Err(degenerate(format!("cell {i} vanished")));
                    }
                }
            }
        }
        let reach = poly.iter().map(|p| dist(*p, s)).fold(0.0, f64::max);
        if r >= m || r as f64 * cs >= 2.0 * reach {
            break;
        }
        r += 1;
    }
    for p in &mut poly {
        for c in p.iter_mut() {
            if c.abs() < SNAP_TOL {
                *c = 0.0;
            } else if (*c - 1.0).abs() < SNAP_TOL {
                *c = 1.0;
            }
        }
    }
    if !(signed_area(&poly) > 0.0) {
        return Err(degenerate(format!("cell {i} has no area")));
    }
    Ok(poly)
}

/// Keeps the part of a convex polygon with `x·d <= c`.
fn clip(poly: &[Point], d: [f64; 2], c: f64) -> Vec<Point> {
    let n = poly.len();
    let f: Vec<f64> = poly.iter().map(|p| p[0] * d[0] + p[1] * d[1] - c).collect();
    if f.iter().all(|&v| v <= 0.0) {
        return poly.to_vec();
    }
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..n {
        let (p, q) = (poly[k], poly[(k + 1) % n]);
        let (fp, fq) = (f[k], f[(k + 1) % n]);
        if fp <= 0.0 {
            out.push(p);
        }
        if (fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0) {
            let t = fp / (fp - fq);
            let mut x = [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])];
            // keep points on a box side exactly on it
            for a in 0..2 {
                if p[a] == q[a] {
                    x[a] = p[a];
                }
            }
            out.push(x);
        }
    }
    out
}

/// Merges coincident polygon vertices into a shared vertex table and
/// builds the mesh.
fn assemble(polys: &[Vec<Point>]) -> Result<PolyMesh> {
    let h = 10.0 * MERGE_TOL;
    let key = |p: Point| ((p[0] / h).floor() as i64, (p[1] / h).floor() as i64);
    let mut table: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let mut vertices: Vec<Point> = Vec::new();
    let mut cells = Vec::with_capacity(polys.len());
    for (c, poly) in polys.iter().enumerate() {
        let mut loop_: Vec<usize> = Vec::with_capacity(poly.len());
        for &p in poly {
            let (kx, ky) = key(p);
            let mut found = None;
            'search: for dy in -1..=1 {
                for dx in -1..=1 {
                    if let Some(list) = table.get(&(kx + dx, ky + dy)) {
                        for &v in list {
                            if dist(vertices[v], p) <= MERGE_TOL {
                                found = Some(v);
                                break 'search;
                            }
                        }
                    }
                }
            }
            let v = found.unwrap_or_else(|| {
                vertices.push(p);
                table.entry((kx, ky)).or_default().push(vertices.len() - 1);
                vertices.len() - 1
            });
            if loop_.last() != Some(&v) {
                loop_.push(v);
            }
        }
        while loop_.len() > 1 && loop_.first() == loop_.last() {
            loop_.pop();
        }
        if loop_.len() < 3 {
            return Err(degenerate(format!("cell {c} collapsed after vertex merging")));
        }
        cells.push(loop_);
    }
    let mesh = PolyMesh::new(vertices, cells).map_err(|e| degenerate(e.to_string()))?;
    let area = mesh.total_area();
    if (area - 1.0).abs() > 1e-12 {
        return Err(degenerate(format!("cell areas sum to {area}")));
    }
    Ok(mesh)
}
