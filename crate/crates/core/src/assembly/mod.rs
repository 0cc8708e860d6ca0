//! Global dof numbering and assembly, Dirichlet reduction, the direct
//! reference solver, and the subdomain / interface operators used by the
//! domain decomposition solver.

pub mod dofmap;
pub mod global;
pub mod interface;
pub mod subdomain;

pub use dofmap::{DofMap, VelocityDof};
pub use global::{
    apply_dirichlet, assemble_global, direct_solve_reference, lid_velocity, GlobalSystem, ReducedSystem, Solution,
};
pub use interface::{interface_rhs_and_operator, InterfaceProblem};
pub use subdomain::{build_subdomain_operators, SubdomainOperator};
