//! Bundles the discrete Stokes system with its subdomain condensation.

use crate::assembly::{
    apply_dirichlet, assemble_global, build_subdomain_operators, DofMap, GlobalSystem, InterfaceProblem, ReducedSystem,
    SubdomainOperator,
};
use crate::decomp::{classify_dofs, extract_interface, Decomposition, DofClassification, InterfaceSkeleton};
use crate::error::Result;
use crate::mesh::{Point, PolyMesh};

/// Everything that depends on mesh, coefficients and partition but not on
/// the choice of coarse space or scaling.
#[derive(Debug)]
pub struct DdSystem {
    pub system: GlobalSystem,
    pub reduced: ReducedSystem,
    pub skeleton: InterfaceSkeleton,
    pub classes: DofClassification,
    pub subs: Vec<SubdomainOperator>,
}

impl DdSystem {
    pub fn new(
        mesh: &PolyMesh,
        decomp: &Decomposition,
        viscosity: &(dyn Fn(Point) -> f64 + Sync),
        load: &(dyn Fn(Point) -> [f64; 2] + Sync),
        boundary: &dyn Fn(Point) -> [f64; 2],
    ) -> Result<Self> {
        let dofmap = DofMap::new(mesh);
        let system = assemble_global(mesh, &dofmap, viscosity, load)?;
        let reduced = apply_dirichlet(mesh, &system, boundary)?;
        let skeleton = extract_interface(mesh, decomp);
        let classes = classify_dofs(mesh, &dofmap, decomp, &skeleton, &reduced.dirichlet);
        let subs = build_subdomain_operators(&system, &reduced, decomp, &classes)?;
        Ok(Self {
            system,
            reduced,
            skeleton,
            classes,
            subs,
        })
    }

    pub fn interface(&self) -> InterfaceProblem<'_> {
        InterfaceProblem::new(&self.subs, &self.classes.gamma)
    }
}
