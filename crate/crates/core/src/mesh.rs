//! The graded spatial mesh `x_j = 1 - (1 - j/N)^rho` on the normalized crack.

use crate::error::{PknError, Result};
use crate::quadrature::TailQuadrature;

/// Nodes of the graded mesh together with their tail-integral weights.
///
/// `r[j] = 1 - x[j]` is stored separately, computed as `(1 - j/N)^rho`, so that
/// distances to the tip keep full relative precision where the mesh is finest.
#[derive(Debug, Clone)]
pub struct Mesh {
    n: usize,
    rho: f64,
    x: Vec<f64>,
    r: Vec<f64>,
    quad: TailQuadrature,
}

impl Mesh {
    pub const DEFAULT_RHO: f64 = 3.0;

    pub fn new(n: usize, rho: f64) -> Result<Self> {
        if n < 2 {
            return Err(PknError::Config(format!("mesh needs N >= 2, got {n}")));
        }
        if !(rho >= 1.0) || !rho.is_finite() {
            return Err(PknError::Config(format!("mesh needs rho >= 1, got {rho}")));
        }
        let nf = n as f64;
        let r: Vec<f64> = (0..=n)
            .map(|j| match j {
                0 => 1.0,
                j if j == n => 0.0,
                j => (1.0 - j as f64 / nf).powf(rho),
            })
            .collect();
        let x: Vec<f64> = r.iter().map(|&rj| 1.0 - rj).collect();
        let quad = TailQuadrature::new(n, rho, &r);
        Ok(Mesh { n, rho, x, r, quad })
    }

    /// Number of intervals; the mesh has `n + 1` nodes.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// Distance to the tip, `1 - x`.
    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn quadrature(&self) -> &TailQuadrature {
        &self.quad
    }

    /// `(1 - x_j)^p` at every node, with the tip value taken as 0 for `p > 0`,
    /// 1 for `p == 0` and 0 (a placeholder for a singular value) for `p < 0`.
    pub fn r_pow(&self, p: f64) -> Vec<f64> {
        self.r
            .iter()
            .map(|&r| {
                if r > 0.0 {
                    r.powf(p)
                } else if p == 0.0 {
                    1.0
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// `I0_j = ∫_{x_j}^1 f`.
    pub fn i0(&self, f: &[f64]) -> Vec<f64> {
        self.quad.i0(f)
    }

    /// `I1_j = ∫_{x_j}^1 (ξ - x_j) f(ξ) dξ`.
    pub fn i1(&self, f: &[f64]) -> Vec<f64> {
        self.quad.i1(f)
    }

    /// Both tail integrals at once.
    pub fn tail_integrals(&self, f: &[f64]) -> (Vec<f64>, Vec<f64>) {
        (self.quad.i0(f), self.quad.i1(f))
    }

    /// `∫_0^1 f`, the first tail integral at the mouth.
    pub fn integral(&self, f: &[f64]) -> f64 {
        self.quad.i0_at(0, f)
    }

    pub(crate) fn check_len(&self, f: &[f64], what: &str) -> Result<()> {
        if f.len() != self.len() {
            return Err(PknError::Mismatch(format!(
                "{what} has {} values, mesh has {} nodes",
                f.len(),
                self.len()
            )));
        }
        Ok(())
    }
}

/// `‖new - old‖₂ / ‖new‖₂`, the stopping measure of all fixed-point iterations.
pub fn l2_relative_diff(new: &[f64], old: &[f64]) -> Result<f64> {
    if new.len() != old.len() {
        return Err(PknError::Mismatch(format!(
            "vectors of length {} and {}",
            new.len(),
            old.len()
        )));
    }
    let den = norm2(new);
    if den == 0.0 {
        return Err(PknError::Degenerate("relative difference against a zero vector".into()));
    }
    let num = new.iter().zip(old).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    Ok(num / den)
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}
