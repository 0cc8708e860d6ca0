//! Scaled monomials of degree at most two on a cell.
//!
//! Basis (0-based): `m0 = 1, m1 = ξ, m2 = η, m3 = ξ², m4 = ξη, m5 = η²`
//! with `ξ = (x - x_K)/h_K`, `η = (y - y_K)/h_K`. The first three span
//! P1. Vector polynomials of `[P2]²` are indexed `j = 2a + c`: monomial
//! `a` in component `c`.

use crate::mesh::Point;

pub const N_P1: usize = 3;
pub const N_P2: usize = 6;
pub const N_VEC_P2: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledMonomials {
    pub center: Point,
    pub h: f64,
}

impl ScaledMonomials {
    pub fn new(center: Point, h: f64) -> Self {
        Self { center, h }
    }

    #[inline]
    pub fn local(&self, x: Point) -> (f64, f64) {
        ((x[0] - self.center[0]) / self.h, (x[1] - self.center[1]) / self.h)
    }

    pub fn eval(&self, x: Point) -> [f64; N_P2] {
        let (s, t) = self.local(x);
        [1.0, s, t, s * s, s * t, t * t]
    }

    /// Gradients with respect to `x`.
    pub fn grad(&self, x: Point) -> [[f64; 2]; N_P2] {
        let (s, t) = self.local(x);
        let k = 1.0 / self.h;
        [
            [0.0, 0.0],
            [k, 0.0],
            [0.0, k],
            [2.0 * s * k, 0.0],
            [t * k, s * k],
            [0.0, 2.0 * t * k],
        ]
    }

    /// Laplacians (constants).
    pub fn laplacian(&self) -> [f64; N_P2] {
        let k2 = 1.0 / (self.h * self.h);
        [0.0, 0.0, 0.0, 2.0 * k2, 0.0, 2.0 * k2]
    }

    /// Value of the vector polynomial with coefficients `coef` (length 12).
    pub fn eval_vec(&self, coef: &[f64], x: Point) -> [f64; 2] {
        let m = self.eval(x);
        let mut v = [0.0; 2];
        for a in 0..N_P2 {
            v[0] += coef[2 * a] * m[a];
            v[1] += coef[2 * a + 1] * m[a];
        }
        v
    }

    /// Gradient `[[∂x v0, ∂y v0], [∂x v1, ∂y v1]]` of a vector polynomial.
    pub fn grad_vec(&self, coef: &[f64], x: Point) -> [[f64; 2]; 2] {
        let g = self.grad(x);
        let mut out = [[0.0; 2]; 2];
        for a in 0..N_P2 {
            for c in 0..2 {
                out[c][0] += coef[2 * a + c] * g[a][0];
                out[c][1] += coef[2 * a + c] * g[a][1];
            }
        }
        out
    }

    /// Value of the scalar P1 polynomial with coefficients `coef` (length 3).
    pub fn eval_p1(&self, coef: &[f64], x: Point) -> f64 {
        let m = self.eval(x);
        coef[0] * m[0] + coef[1] * m[1] + coef[2] * m[2]
    }
}
