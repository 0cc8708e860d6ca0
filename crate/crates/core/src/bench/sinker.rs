//! Smooth high-viscosity inclusions ("sinkers") in a low-viscosity
//! background, with a buoyancy load that pulls them down.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mesh::{dist, Point};

/// Shape and magnitude parameters of a sinker field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SinkerParams {
    /// Sinker diameter `ω`.
    pub omega: f64,
    /// Decay rate `δ` of the smooth indicator.
    pub delta: f64,
    pub nu_min: f64,
    pub nu_max: f64,
    /// Load magnitude `β`.
    pub beta: f64,
}

impl Default for SinkerParams {
    fn default() -> Self {
        Self {
            omega: 0.05,
            delta: 2000.0,
            nu_min: 1e-3,
            nu_max: 1e3,
            beta: 10.0,
        }
    }
}

/// `n` sinker centres drawn i.i.d. uniformly on the unit square. Sinkers may
/// overlap and cross the boundary.
pub fn place_sinkers(n: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| [rng.gen::<f64>(), rng.gen::<f64>()]).collect()
}

/// `χ(x) = ∏_i (1 − exp(−δ max(0, |c_i − x| − ω/2)²))`; one for an empty
/// field and zero inside every sinker core.
pub fn chi(x: Point, centers: &[Point], delta: f64, omega: f64) -> f64 {
    centers
        .iter()
        .map(|&c| {
            let s = (dist(c, x) - 0.5 * omega).max(0.0);
            1.0 - (-delta * s * s).exp()
        })
        .product()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SinkerField {
    pub centers: Vec<Point>,
    pub params: SinkerParams,
    pub seed: u64,
}

impl SinkerField {
    pub fn new(n: usize, seed: u64, params: SinkerParams) -> Self {
        Self {
            centers: place_sinkers(n, seed),
            params,
            seed,
        }
    }

    pub fn chi(&self, x: Point) -> f64 {
        chi(x, &self.centers, self.params.delta, self.params.omega)
    }

    /// `ν(x) = (ν_max − ν_min)(1 − χ(x)) + ν_min`.
    pub fn viscosity(&self, x: Point) -> f64 {
        let p = &self.params;
        (p.nu_max - p.nu_min) * (1.0 - self.chi(x)) + p.nu_min
    }

    /// `f(x) = (0, β(χ(x) − 1))`.
    pub fn body_force(&self, x: Point) -> [f64; 2] {
        [0.0, self.params.beta * (self.chi(x) - 1.0)]
    }
}
