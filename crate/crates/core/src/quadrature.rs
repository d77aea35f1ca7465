//! Tail integrals `∫_{x_j}^1 f` and `∫_{x_j}^1 (ξ - x_j) f` on the graded mesh.
//!
//! Integration happens in the stretched coordinate `s = j/N`, where
//! `x = 1 - (1 - s)^rho` and the Jacobian `rho (1 - s)^(rho - 1)` absorbs the tip
//! behaviour of the crack opening: with `rho = 3`, `(1 - x)^(1/3)` becomes linear
//! in `s`. Each tail `[s_j, 1]` uses composite Simpson when it has an even number of
//! panels; an odd count starts with one 3/8 block of three panels.
//!
//! The last tail is a single panel and no Simpson-family rule fits inside it.
//! There `f` is interpolated linearly in `s` and integrated exactly against the
//! Jacobian. This keeps `(1 - x)^(1/3)`-type data exact for `rho = 3` and never
//! extrapolates from the neighbouring panel, which matters because the nonlinear
//! solvers invert the tail integral at that node.

use nalgebra::{DMatrix, DVector};

/// Dense weight matrices `W0`, `W1` with `I0 = W0 f` and `I1 = W1 f`.
#[derive(Debug, Clone)]
pub struct TailQuadrature {
    w0: DMatrix<f64>,
    w1: DMatrix<f64>,
}

impl TailQuadrature {
    /// Builds weights for the mesh with `n` intervals, grading `rho` and tip
    /// distances `r`.
    pub(crate) fn new(n: usize, rho: f64, r: &[f64]) -> Self {
        let h = 1.0 / n as f64;
        let jac: Vec<f64> = (0..=n)
            .map(|k| rho * (1.0 - k as f64 * h).max(0.0).powf(rho - 1.0))
            .collect();
        let mut w0 = DMatrix::zeros(n + 1, n + 1);
        let mut w1 = DMatrix::zeros(n + 1, n + 1);

        for j in 0..n.saturating_sub(1) {
            let mut ws = vec![0.0; n + 1];
            let mut start = j;
            if (n - j) % 2 == 1 {
                for (o, c) in [1.0, 3.0, 3.0, 1.0].iter().enumerate() {
                    ws[j + o] += 3.0 * h / 8.0 * c;
                }
                start = j + 3;
            }
            for p in (start..n).step_by(2) {
                ws[p] += h / 3.0;
                ws[p + 1] += 4.0 * h / 3.0;
                ws[p + 2] += h / 3.0;
            }
            for k in j..=n {
                let a = ws[k] * jac[k];
                w0[(j, k)] = a;
                w1[(j, k)] = a * (r[j] - r[k]);
            }
        }

        // single tip panel: linear interpolant in s against the exact Jacobian
        let rr = r[n - 1];
        let a0 = rho / (rho + 1.0) * rr;
        w0[(n - 1, n - 1)] = a0;
        w0[(n - 1, n)] = rr - a0;
        let a1 = rho * rho / ((rho + 1.0) * (2.0 * rho + 1.0)) * rr * rr;
        w1[(n - 1, n - 1)] = a1;
        w1[(n - 1, n)] = 0.5 * rr * rr - a1;

        TailQuadrature { w0, w1 }
    }

    pub fn w0(&self) -> &DMatrix<f64> {
        &self.w0
    }

    pub fn w1(&self) -> &DMatrix<f64> {
        &self.w1
    }

    pub fn i0(&self, f: &[f64]) -> Vec<f64> {
        apply(&self.w0, f)
    }

    pub fn i1(&self, f: &[f64]) -> Vec<f64> {
        apply(&self.w1, f)
    }

    /// `I0` at a single node.
    pub fn i0_at(&self, j: usize, f: &[f64]) -> f64 {
        self.w0.row(j).iter().zip(f).map(|(w, v)| w * v).sum()
    }
}

fn apply(m: &DMatrix<f64>, f: &[f64]) -> Vec<f64> {
    assert_eq!(m.ncols(), f.len(), "nodal vector does not match the mesh");
    let v = m * DVector::from_column_slice(f);
    v.as_slice().to_vec()
}
