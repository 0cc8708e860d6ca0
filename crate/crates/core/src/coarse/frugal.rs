//! Eigensolver-free enrichment with rigid body mode traces.

use nalgebra::DVector;

use super::rigid::rigid_mode_traces;
use super::EdgeContext;

/// `c_m = K (r_m^(i) + r_m^(j))` for the three rigid modes, where `K` is the
/// scaled jump energy of the edge and `r_m^(l)` the mode of subdomain `l`
/// (with its own centre and diameter) sampled on the edge nodes.
pub fn frugal_constraints(ctx: &EdgeContext) -> Vec<DVector<f64>> {
    let k = ctx.jump_stiffness();
    let ri = rigid_mode_traces(ctx.diameters[0], ctx.centers[0], &ctx.points);
    let rj = rigid_mode_traces(ctx.diameters[1], ctx.centers[1], &ctx.points);
    (0..3).map(|m| &k * (&ri[m] + &rj[m])).collect()
}
