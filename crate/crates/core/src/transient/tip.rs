//! Optional second tip term: `W = W0 r^(1/3) + W1 r^zeta + D` with `zeta = 1 + eta`
//! for a leak-off term `c r^eta`. The explicit parts are integrated analytically.

use nalgebra::{Matrix2, Vector2};

use crate::mesh::Mesh;

use super::{Forcing, SingularLeakoff};

/// `∫_x^1 r^p` as a function of `r = 1 - x`.
pub(crate) fn moment0(p: f64, r: f64) -> f64 {
    if r <= 0.0 {
        0.0
    } else {
        r.powf(p + 1.0) / (p + 1.0)
    }
}

/// `∫_x^1 (ξ - x) r(ξ)^p dξ` as a function of `r = 1 - x`.
pub(crate) fn moment1(p: f64, r: f64) -> f64 {
    if r <= 0.0 {
        0.0
    } else {
        r.powf(p + 2.0) / ((p + 1.0) * (p + 2.0))
    }
}

/// Explicit tip term together with the leak-off term it balances.
#[derive(Debug, Clone)]
pub(crate) struct TipTerm {
    pub eta: f64,
    pub zeta: f64,
    /// `r^zeta` at the nodes.
    pub rz: Vec<f64>,
    /// `r^eta` at the nodes, 0 at the tip.
    pub re: Vec<f64>,
}

impl TipTerm {
    pub fn new(eta: f64, mesh: &Mesh) -> Self {
        let zeta = 1.0 + eta;
        TipTerm {
            eta,
            zeta,
            rz: mesh.r_pow(zeta),
            re: mesh.r_pow(eta),
        }
    }

    /// Coefficient of `r^zeta` balancing `beta q* ~ bc r^eta` near the tip.
    pub fn w1_from(&self, bc: f64) -> f64 {
        bc / (self.zeta * (3.0 * self.zeta + 2.0))
    }

    pub fn i0_w(&self, mesh: &Mesh) -> Vec<f64> {
        mesh.r().iter().map(|&r| moment0(self.zeta, r)).collect()
    }

    pub fn i1_w(&self, mesh: &Mesh) -> Vec<f64> {
        mesh.r().iter().map(|&r| moment1(self.zeta, r)).collect()
    }

    pub fn i0_q(&self, mesh: &Mesh) -> Vec<f64> {
        mesh.r().iter().map(|&r| moment0(self.eta, r)).collect()
    }

    pub fn i1_q(&self, mesh: &Mesh) -> Vec<f64> {
        mesh.r().iter().map(|&r| moment1(self.eta, r)).collect()
    }
}

/// Singular leak-off at `t`: from the forcing when it knows it, otherwise fitted
/// to `c r^(-1/2) + d r^(-1/3)` at the last two interior nodes.
pub(crate) fn singular_leakoff(forcing: &dyn Forcing, t: f64, ql: &[f64], mesh: &Mesh) -> SingularLeakoff {
    if let Some(s) = forcing.ql_singular(t) {
        return s;
    }
    let n = mesh.n();
    let eta = -0.5;
    let (ra, rb) = (mesh.r()[n - 1], mesh.r()[n - 2]);
    let m = Matrix2::new(ra.powf(eta), ra.powf(-1.0 / 3.0), rb.powf(eta), rb.powf(-1.0 / 3.0));
    let coeff = m
        .lu()
        .solve(&Vector2::new(ql[n - 1], ql[n - 2]))
        .map(|v| v[0])
        .unwrap_or(0.0);
    SingularLeakoff { eta, coeff }
}
