//! Primal constraints per macro edge: the no-net-flux constraint plus
//! frugal (rigid body based) or adaptive (eigenvalue based) enrichment.

pub mod adaptive;
pub mod context;
pub mod frugal;
pub mod gevp;
pub mod rigid;

use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;

pub use adaptive::{
    adaptive_first_constraints, adaptive_second_constraints, constrained_rayleigh_max, AdaptiveKind, AdaptiveOutcome,
    GEVP_TOL_B,
};
pub use context::{edge_contexts, EdgeContext};
pub use frugal::frugal_constraints;
pub use gevp::{gevp_call_count, gevp_sym, parallel_sum, Gevp};
pub use rigid::{rigid_body_modes, rigid_mode_traces};

use crate::bddc::{
    build_edge_transformations, no_net_flux_constraint, Constraint, ConstraintKind, EdgeTransformation, ScalingKind,
};
use crate::decomp::Decomposition;
use crate::error::{Error, Result};
use crate::mesh::PolyMesh;
use crate::problem::DdSystem;

/// Default cap on constraints per edge.
pub const DEFAULT_MAX_PER_EDGE: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CoarseKind {
    /// Corners and no-net-flux constraints only.
    Flux,
    Frugal,
    AdaptiveFirst,
    AdaptiveSecond,
}

impl CoarseKind {
    pub fn adaptive(self) -> Option<AdaptiveKind> {
        match self {
            CoarseKind::AdaptiveFirst => Some(AdaptiveKind::First),
            CoarseKind::AdaptiveSecond => Some(AdaptiveKind::Second),
            _ => None,
        }
    }
}

impl fmt::Display for CoarseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CoarseKind::Flux => "flux",
            CoarseKind::Frugal => "frugal",
            CoarseKind::AdaptiveFirst => "first",
            CoarseKind::AdaptiveSecond => "second",
        })
    }
}

impl FromStr for CoarseKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "flux" | "vertex-flux" => Ok(CoarseKind::Flux),
            "frugal" => Ok(CoarseKind::Frugal),
            "first" | "adaptive-first" => Ok(CoarseKind::AdaptiveFirst),
            "second" | "adaptive-second" => Ok(CoarseKind::AdaptiveSecond),
            other => Err(Error::Config(format!("unknown coarse space '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoarseSpaceSpec {
    pub kind: CoarseKind,
    /// Eigenvalue threshold (adaptive kinds only; inclusive).
    pub tol: f64,
    pub max_per_edge: usize,
}

impl CoarseSpaceSpec {
    pub fn new(kind: CoarseKind, tol: f64) -> Self {
        Self {
            kind,
            tol,
            max_per_edge: DEFAULT_MAX_PER_EDGE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind.adaptive().is_some() && !(self.tol > 1.0) {
            return Err(Error::Config(format!("adaptive TOL must exceed 1, got {}", self.tol)));
        }
        if self.max_per_edge == 0 {
            return Err(Error::Config("max constraints per edge must be positive".into()));
        }
        Ok(())
    }
}

/// Constraints of one macro edge, flux constraint first.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeConstraints {
    pub edge: usize,
    pub subs: (usize, usize),
    pub constraints: Vec<Constraint>,
    /// Pencil spectrum (adaptive kinds), descending.
    pub spectrum: Vec<f64>,
    pub truncated: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSet {
    pub spec: CoarseSpaceSpec,
    pub n_corners: usize,
    pub edges: Vec<EdgeConstraints>,
}

impl ConstraintSet {
    /// `2·#corners + Σ_E (number of constraints supplied on E)`, i.e. the
    /// primal count before Gram–Schmidt drops.
    pub fn n_primal_requested(&self) -> usize {
        2 * self.n_corners + self.edges.iter().map(|e| e.constraints.len()).sum::<usize>()
    }

    pub fn transformations(&self, dd: &DdSystem) -> Vec<EdgeTransformation> {
        let lists: Vec<Vec<Constraint>> = self.edges.iter().map(|e| e.constraints.clone()).collect();
        let dims: Vec<usize> = dd.classes.edge_ranges.iter().map(|r| r.len()).collect();
        build_edge_transformations(&lists, &dims)
    }

    /// Structured-text dump: one block per edge with provenance, spectrum
    /// and constraint vectors.
    pub fn to_debug_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "coarse {} tol {} max_per_edge {}",
            self.spec.kind, self.spec.tol, self.spec.max_per_edge
        );
        let _ = writeln!(s, "corners {}", self.n_corners);
        for e in &self.edges {
            let _ = writeln!(
                s,
                "edge {} subs {} {} constraints {} truncated {}",
                e.edge,
                e.subs.0,
                e.subs.1,
                e.constraints.len(),
                e.truncated
            );
            let spec: Vec<String> = e.spectrum.iter().map(|m| format!("{m:.6e}")).collect();
            let _ = writeln!(s, "  spectrum {}", spec.join(" "));
            for c in &e.constraints {
                let v: Vec<String> = c.vector.iter().map(|x| format!("{x:.6e}")).collect();
                let _ = writeln!(s, "  {} {}", c.kind, v.join(" "));
            }
        }
        s
    }
}

/// Builds the per-edge constraint lists for `spec`. Edges are processed in
/// parallel and collected in skeleton order.
pub fn enrich(
    spec: &CoarseSpaceSpec,
    mesh: &PolyMesh,
    dd: &DdSystem,
    decomp: &Decomposition,
    scaling: ScalingKind,
) -> Result<ConstraintSet> {
    spec.validate()?;
    let edges = (0..dd.skeleton.edges.len())
        .into_par_iter()
        .map(|e| -> Result<EdgeConstraints> {
            let me = &dd.skeleton.edges[e];
            let flux = no_net_flux_constraint(mesh, me, e)?.interior;
            let mut constraints = vec![Constraint {
                vector: flux,
                kind: ConstraintKind::Flux,
            }];
            let mut spectrum = Vec::new();
            let mut truncated = 0;
            match spec.kind {
                CoarseKind::Flux => {}
                CoarseKind::Frugal => {
                    let ctx = EdgeContext::new(mesh, dd, decomp, e, scaling)?;
                    constraints.extend(frugal_constraints(&ctx).into_iter().map(|vector| Constraint {
                        vector,
                        kind: ConstraintKind::Frugal,
                    }));
                }
                CoarseKind::AdaptiveFirst | CoarseKind::AdaptiveSecond => {
                    let ctx = EdgeContext::new(mesh, dd, decomp, e, scaling)?;
                    let out = match spec.kind {
                        CoarseKind::AdaptiveFirst => adaptive_first_constraints(&ctx, spec.tol, spec.max_per_edge)?,
                        _ => adaptive_second_constraints(&ctx, spec.tol, spec.max_per_edge)?,
                    };
                    constraints.extend(out.constraints.into_iter().map(|vector| Constraint {
                        vector,
                        kind: ConstraintKind::Adaptive,
                    }));
                    spectrum = out.spectrum;
                    truncated = out.truncated;
                }
            }
            Ok(EdgeConstraints {
                edge: e,
                subs: me.subs,
                constraints,
                spectrum,
                truncated,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConstraintSet {
        spec: *spec,
        n_corners: dd.skeleton.corners.len(),
        edges,
    })
}
