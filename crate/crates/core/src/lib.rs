//! Polygonal-mesh Stokes solver with BDDC-preconditioned interface
//! conjugate gradients.

pub mod assembly;
pub mod bddc;
pub mod bench;
pub mod coarse;
pub mod decomp;
pub mod error;
pub mod linalg;
pub mod mesh;
pub mod problem;
pub mod vem;

pub use error::{Error, Result};
