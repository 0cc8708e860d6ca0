//! The experiment matrix: mesh family × size × sinker count × coarse space
//! × scaling, one report row per entry.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;

use super::config::{ExperimentConfig, MeshFamily};
use super::sinker::SinkerField;
use crate::assembly::{direct_solve_reference, lid_velocity, Solution};
use crate::bddc::{solve_interface, BddcPreconditioner, ScalingKind, SolveStatus};
use crate::coarse::{enrich, CoarseKind, CoarseSpaceSpec};
use crate::decomp::{partition_mesh, Decomposition};
use crate::error::Result;
use crate::mesh::{generate_cvt, generate_random_voronoi, PolyMesh};
use crate::problem::DdSystem;

/// Outcome class of one matrix entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowStatus {
    Converged,
    MaxIterations,
    /// Converged, but the solution disagrees with the direct solve.
    CheckFailed,
    Error,
}

impl RowStatus {
    pub fn is_success(self) -> bool {
        self == RowStatus::Converged
    }
}

impl fmt::Display for RowStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RowStatus::Converged => "converged",
            RowStatus::MaxIterations => "max-iterations",
            RowStatus::CheckFailed => "check-failed",
            RowStatus::Error => "error",
        })
    }
}

impl std::str::FromStr for RowStatus {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "converged" => Ok(RowStatus::Converged),
            "max-iterations" => Ok(RowStatus::MaxIterations),
            "check-failed" => Ok(RowStatus::CheckFailed),
            "error" => Ok(RowStatus::Error),
            other => Err(crate::Error::Config(format!("unknown status '{other}'"))),
        }
    }
}

/// One solver run.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub coarse: CoarseKind,
    pub scaling: ScalingKind,
    pub family: MeshFamily,
    pub cells: usize,
    pub nsub: usize,
    pub nsink: usize,
    pub tol: f64,
    /// Primal unknowns after Gram–Schmidt drops.
    pub n_pi: usize,
    pub iters: usize,
    pub k2: f64,
    pub rel_residual: f64,
    pub status: RowStatus,
    pub seed_mesh: u64,
    pub seed_sinkers: u64,
    /// Primal unknowns before drops.
    pub n_pi_requested: usize,
    pub n_corners: usize,
    pub n_edges: usize,
    pub n_gamma: usize,
    /// Constraints removed by the per-edge cap.
    pub truncated: usize,
    /// `‖u − u_direct‖ / ‖u_direct‖` when the direct check ran.
    pub direct_error: Option<f64>,
    pub residual_history: Vec<f64>,
    pub preconditioned_history: Vec<f64>,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ReportTable {
    pub rows: Vec<ReportRow>,
}

impl ReportTable {
    pub fn all_succeeded(&self) -> bool {
        self.rows.iter().all(|r| r.status.is_success())
    }
}

/// Builds the mesh of one matrix entry.
pub fn build_mesh(cfg: &ExperimentConfig, family: MeshFamily, cells: usize) -> Result<PolyMesh> {
    match family {
        MeshFamily::Cvt => generate_cvt(cells, cfg.seed_mesh, cfg.lloyd_tol, cfg.lloyd_iters),
        MeshFamily::Rnd => generate_random_voronoi(cells, cfg.seed_mesh, cfg.rnd_relax),
    }
}

/// Sinker problem of one matrix entry on a partitioned mesh.
pub fn build_problem(
    cfg: &ExperimentConfig,
    mesh: &PolyMesh,
    decomp: &Decomposition,
    nsink: usize,
) -> Result<DdSystem> {
    let field = SinkerField::new(nsink, cfg.seed_sinkers, cfg.sinker);
    let lid = cfg.lid;
    DdSystem::new(
        mesh,
        decomp,
        &|x| field.viscosity(x),
        &|x| field.body_force(x),
        &move |x| {
            let v = lid_velocity(x);
            [lid * v[0], lid * v[1]]
        },
    )
}

fn relative_velocity_error(u: &Solution, reference: &Solution) -> f64 {
    let num: f64 = u
        .velocity
        .iter()
        .zip(&reference.velocity)
        .map(|(a, b)| (a - b).powi(2))
        .sum();
    let den: f64 = reference.velocity.iter().map(|b| b * b).sum();
    (num / den.max(f64::MIN_POSITIVE)).sqrt()
}

struct Group {
    family: MeshFamily,
    cells: usize,
    nsub: usize,
    nsink: usize,
}

fn blank_row(cfg: &ExperimentConfig, g: &Group, coarse: CoarseKind, scaling: ScalingKind) -> ReportRow {
    ReportRow {
        coarse,
        scaling,
        family: g.family,
        cells: g.cells,
        nsub: g.nsub,
        nsink: g.nsink,
        tol: cfg.tol,
        n_pi: 0,
        iters: 0,
        k2: f64::NAN,
        rel_residual: f64::NAN,
        status: RowStatus::Error,
        seed_mesh: cfg.seed_mesh,
        seed_sinkers: cfg.seed_sinkers,
        n_pi_requested: 0,
        n_corners: 0,
        n_edges: 0,
        n_gamma: 0,
        truncated: 0,
        direct_error: None,
        residual_history: Vec::new(),
        preconditioned_history: Vec::new(),
        message: String::new(),
    }
}

fn combinations(cfg: &ExperimentConfig) -> Vec<(CoarseKind, ScalingKind)> {
    cfg.coarse
        .iter()
        .flat_map(|&c| cfg.scalings.iter().map(move |&s| (c, s)))
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn run_entry(
    cfg: &ExperimentConfig,
    mesh: &PolyMesh,
    decomp: &Decomposition,
    dd: &DdSystem,
    reference: Option<&Solution>,
    coarse: CoarseKind,
    scaling: ScalingKind,
    row: &mut ReportRow,
) -> Result<()> {
    let spec = CoarseSpaceSpec {
        kind: coarse,
        tol: cfg.tol,
        max_per_edge: cfg.max_per_edge,
    };
    let set = enrich(&spec, mesh, dd, decomp, scaling)?;
    row.n_pi_requested = set.n_primal_requested();
    row.truncated = set.edges.iter().map(|e| e.truncated).sum();
    let precond = BddcPreconditioner::new(&dd.subs, &dd.skeleton, &dd.classes, set.transformations(dd), scaling)?;
    row.n_pi = precond.n_primal();
    let (sol, _, rep) = solve_interface(dd, &precond, cfg.rtol, cfg.maxit)?;
    row.iters = rep.iterations;
    row.k2 = rep.k2;
    row.rel_residual = rep.rel_residual();
    row.residual_history = rep.residual_history.clone();
    row.preconditioned_history = rep.preconditioned_history.clone();
    row.status = match rep.status {
        SolveStatus::Converged => RowStatus::Converged,
        SolveStatus::MaxIterations => RowStatus::MaxIterations,
    };
    if let Some(r) = reference {
        let err = relative_velocity_error(&sol, r);
        row.direct_error = Some(err);
        if row.status == RowStatus::Converged && !(err <= 10.0 * cfg.rtol) {
            row.status = RowStatus::CheckFailed;
            row.message = format!("velocity differs from the direct solve by {err:e}");
        }
    }
    Ok(())
}

fn run_group(cfg: &ExperimentConfig, mesh: &Result<PolyMesh>, g: &Group) -> Vec<ReportRow> {
    let combos = combinations(cfg);
    let fail = |msg: String| -> Vec<ReportRow> {
        combos
            .iter()
            .map(|&(c, s)| ReportRow {
                message: msg.clone(),
                ..blank_row(cfg, g, c, s)
            })
            .collect()
    };
    let mesh = match mesh {
        Ok(m) => m,
        Err(e) => return fail(e.to_string()),
    };
    let setup = partition_mesh(mesh, g.nsub, &cfg.partition, cfg.seed_mesh)
        .and_then(|d| build_problem(cfg, mesh, &d, g.nsink).map(|dd| (d, dd)));
    let (decomp, dd) = match setup {
        Ok(x) => x,
        Err(e) => return fail(e.to_string()),
    };
    let n_unknowns = dd.reduced.free.len() + dd.reduced.rhs_p.len();
    let reference = if n_unknowns <= cfg.direct_check_limit {
        match direct_solve_reference(&dd.reduced) {
            Ok(s) => Some(s),
            Err(e) => {
                log::warn!("direct reference solve failed: {e}");
                None
            }
        }
    } else {
        None
    };
    combos
        .iter()
        .map(|&(coarse, scaling)| {
            let mut row = blank_row(cfg, g, coarse, scaling);
            row.cells = mesh.n_cells();
            row.nsub = decomp.n_sub();
            row.n_corners = dd.skeleton.corners.len();
            row.n_edges = dd.skeleton.edges.len();
            row.n_gamma = dd.classes.n_gamma();
            if let Err(e) = run_entry(cfg, mesh, &decomp, &dd, reference.as_ref(), coarse, scaling, &mut row) {
                row.status = RowStatus::Error;
                row.message = e.to_string();
            }
            log::info!(
                "{} {} {} cells={} nsub={} nsink={}: n_pi={} it={} k2={:.3} {}",
                row.coarse,
                row.scaling,
                row.family,
                row.cells,
                row.nsub,
                row.nsink,
                row.n_pi,
                row.iters,
                row.k2,
                row.status
            );
            row
        })
        .collect()
}

/// Runs every matrix entry. Failures become rows with an error status; the
/// matrix is never aborted. Rows are ordered by family, size, sinker
/// count, coarse space and scaling, independent of `cfg.parallel`.
pub fn run_experiment_matrix(cfg: &ExperimentConfig) -> Result<ReportTable> {
    cfg.validate()?;
    let mut groups = Vec::new();
    for &family in &cfg.families {
        for (cells, nsub) in cfg.sizes() {
            for &nsink in &cfg.nsink {
                groups.push(Group {
                    family,
                    cells,
                    nsub,
                    nsink,
                });
            }
        }
    }
    if combinations(cfg).is_empty() {
        return Ok(ReportTable::default());
    }
    let mut meshes: BTreeMap<(usize, usize), Result<PolyMesh>> = BTreeMap::new();
    for g in &groups {
        let key = (g.family as usize, g.cells);
        meshes.entry(key).or_insert_with(|| build_mesh(cfg, g.family, g.cells));
    }
    let mesh_of = |g: &Group| &meshes[&(g.family as usize, g.cells)];
    let rows: Vec<Vec<ReportRow>> = if cfg.parallel {
        groups.par_iter().map(|g| run_group(cfg, mesh_of(g), g)).collect()
    } else {
        groups.iter().map(|g| run_group(cfg, mesh_of(g), g)).collect()
    };
    Ok(ReportTable {
        rows: rows.into_iter().flatten().collect(),
    })
}
