//! The self-similar boundary value problem
//!
//! ```text
//! beta u0^3 (u + ql*) = x u0^3 u' + 3 (u^3 u')',   -3 u0^(-3/2) [u^3 u']_(x=0) = q0*,   u(1) = 0,
//! ```
//!
//! solved for `u = u0 (1 - x)^(1/3) + Δu` by alternating the tip-coefficient
//! equation `G3(u0) = 0` with the fixed-point update `Δu <- G1 + G2`.
//!
//! Leak-off enters only through `beta * ql*`, which is what [`SelfSimilarProblem`]
//! stores: it stays finite for `beta = 0`, where `ql*` itself is not defined.

use serde::{Deserialize, Serialize};

use crate::error::{PknError, Result};
use crate::mesh::{l2_relative_diff, Mesh};
use crate::roots::newton_bisect;

#[derive(Debug, Clone)]
pub struct SelfSimilarProblem {
    pub beta: f64,
    pub q0_star: f64,
    beta_ql: Vec<f64>,
    pub mesh: Mesh,
}

impl SelfSimilarProblem {
    pub fn new(beta: f64, q0_star: f64, ql_star: &[f64], mesh: Mesh) -> Result<Self> {
        let bq: Vec<f64> = ql_star.iter().map(|q| beta * q).collect();
        Self::from_beta_ql(beta, q0_star, bq, mesh)
    }

    /// Builds the problem from the product `beta * ql*` at every node.
    pub fn from_beta_ql(beta: f64, q0_star: f64, beta_ql: Vec<f64>, mesh: Mesh) -> Result<Self> {
        mesh.check_len(&beta_ql, "leak-off")?;
        if !(q0_star > 0.0) || !q0_star.is_finite() {
            return Err(PknError::Config(format!("q0* must be positive, got {q0_star}")));
        }
        if !beta.is_finite() {
            return Err(PknError::Config("beta must be finite".into()));
        }
        if let Some(j) = beta_ql[..mesh.n()].iter().position(|v| !v.is_finite()) {
            return Err(PknError::Config(format!("leak-off not finite at node {j}")));
        }
        Ok(SelfSimilarProblem {
            beta,
            q0_star,
            beta_ql,
            mesh,
        })
    }

    pub fn beta_ql(&self) -> &[f64] {
        &self.beta_ql
    }

    /// `ql*` at the nodes; `None` for `beta = 0`.
    pub fn ql_star(&self) -> Option<Vec<f64>> {
        (self.beta != 0.0).then(|| self.beta_ql.iter().map(|v| v / self.beta).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfSimilarSolution {
    pub u0: f64,
    pub delta_u: Vec<f64>,
    pub u: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Relative change of `u` in the last iteration.
    pub last_change: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfSimilarOptions {
    pub eps: f64,
    pub max_iter: usize,
    pub warm_start: Option<Vec<f64>>,
}

impl Default for SelfSimilarOptions {
    fn default() -> Self {
        SelfSimilarOptions {
            eps: 1e-10,
            max_iter: 200,
            warm_start: None,
        }
    }
}

/// `u_j = u0 (1 - x_j)^(1/3) + Δu_j`, exactly zero at the tip.
pub fn reconstruct_u(u0: f64, delta_u: &[f64], mesh: &Mesh) -> Vec<f64> {
    let n = mesh.n();
    let mut u: Vec<f64> = mesh.r().iter().zip(delta_u).map(|(r, d)| u0 * r.cbrt() + d).collect();
    u[n] = 0.0;
    u
}

/// `G1` from precomputed `I1[Δu]`.
pub(crate) fn g1_from(beta: f64, u0: f64, delta: &[f64], i1_delta: &[f64], mesh: &Mesh) -> Vec<f64> {
    let n = mesh.n();
    let u03 = u0 * u0 * u0;
    let mut out = vec![0.0; n + 1];
    for j in 0..n {
        let r = mesh.r()[j];
        let r13 = r.cbrt();
        let d = delta[j];
        let d2 = d * d;
        let nonlin = 6.0 * u0 * u0 * r13 * r13 * d2 + 4.0 * u0 * r13 * d2 * d + d2 * d2;
        out[j] = (-0.75 * nonlin + (2.0 + beta) * u03 * i1_delta[j]) / (3.0 * u03 * r);
    }
    out
}

/// `G2` from precomputed `I0[Δu]` and `I1[beta ql*]`.
pub(crate) fn g2_from(beta: f64, u0: f64, i0_delta: &[f64], i1_bq: &[f64], mesh: &Mesh) -> Vec<f64> {
    let n = mesh.n();
    let mut out = vec![0.0; n + 1];
    for j in 0..n {
        let r = mesh.r()[j];
        let x = mesh.x()[j];
        let tip = 3.0 / 28.0 * (3.0 * beta - 1.0) * u0 * r.powf(7.0 / 3.0);
        out[j] = (x * i0_delta[j] + tip + i1_bq[j]) / (3.0 * r);
    }
    out
}

fn check_u0(u0: f64) -> Result<()> {
    if !(u0 > 0.0) || !u0.is_finite() {
        return Err(PknError::NonPhysical(format!("tip coefficient u0 = {u0}")));
    }
    Ok(())
}

/// First operator of the inverted lubrication equation; zero at the tip node.
pub fn apply_g1(beta: f64, u0: f64, delta_u: &[f64], mesh: &Mesh) -> Result<Vec<f64>> {
    check_u0(u0)?;
    mesh.check_len(delta_u, "delta u")?;
    Ok(g1_from(beta, u0, delta_u, &mesh.i1(delta_u), mesh))
}

/// Second operator of the inverted lubrication equation; zero at the tip node.
pub fn apply_g2(beta: f64, u0: f64, delta_u: &[f64], ql_star: &[f64], mesh: &Mesh) -> Result<Vec<f64>> {
    check_u0(u0)?;
    mesh.check_len(delta_u, "delta u")?;
    mesh.check_len(ql_star, "leak-off")?;
    let bq: Vec<f64> = ql_star.iter().map(|q| beta * q).collect();
    Ok(g2_from(beta, u0, &mesh.i0(delta_u), &mesh.i1(&bq), mesh))
}

/// Root of `G3(u0) = 3/4 (beta+1) u0^(5/2) + u0^(3/2) [(beta+1) ∫Δu + ∫beta ql*] - q0*`.
///
/// For `beta > -1` the positive root is unique. For `beta = -1` it is explicit.
/// For `beta < -1` the function has a single interior maximum and either no
/// positive root or two; the smaller one is returned, being the branch that
/// continues the `beta > -1` solution.
pub fn tip_coefficient(beta: f64, int_delta: f64, int_bq: f64, q0_star: f64) -> Result<f64> {
    if !(q0_star > 0.0) {
        return Err(PknError::Config(format!("q0* must be positive, got {q0_star}")));
    }
    let a = 0.75 * (beta + 1.0);
    let b = (beta + 1.0) * int_delta + int_bq;
    if !a.is_finite() || !b.is_finite() {
        return Err(PknError::NonPhysical("tip equation has non-finite coefficients".into()));
    }
    let g3 = |u: f64| {
        let s = u.sqrt();
        let u15 = u * s;
        (a * u * u15 + b * u15 - q0_star, 2.5 * a * u15 + 1.5 * b * s)
    };
    let no_root = || PknError::NoTipRoot { beta, q0_star };
    const RTOL: f64 = 1e-14;
    if a > 0.0 {
        let lo = if b < 0.0 { -3.0 * b / (5.0 * a) } else { 0.0 };
        let mut hi = lo.max((q0_star / a).powf(0.4)).max(1e-300) * 2.0;
        let mut guard = 0;
        while g3(hi).0 <= 0.0 {
            hi *= 2.0;
            guard += 1;
            if guard > 2000 {
                return Err(no_root());
            }
        }
        newton_bisect(g3, lo, hi, RTOL, 200)
    } else if a == 0.0 {
        if b > 0.0 {
            Ok((q0_star / b).powf(2.0 / 3.0))
        } else {
            Err(no_root())
        }
    } else {
        if b <= 0.0 {
            return Err(no_root());
        }
        let peak = -3.0 * b / (5.0 * a);
        let top = g3(peak).0;
        if top < 0.0 {
            return Err(no_root());
        }
        if top == 0.0 {
            return Ok(peak);
        }
        newton_bisect(g3, 0.0, peak, RTOL, 200)
    }
}

/// Tip coefficient for the current correction `delta_u`.
pub fn solve_u0(beta: f64, delta_u: &[f64], ql_star: &[f64], q0_star: f64, mesh: &Mesh) -> Result<f64> {
    mesh.check_len(delta_u, "delta u")?;
    mesh.check_len(ql_star, "leak-off")?;
    let bq: Vec<f64> = ql_star.iter().map(|q| beta * q).collect();
    tip_coefficient(beta, mesh.integral(delta_u), mesh.integral(&bq), q0_star)
}

/// One sweep `Δu <- G1 + G2` with the given `u0`.
pub(crate) fn g12(beta: f64, u0: f64, delta: &[f64], bq: &[f64], mesh: &Mesh) -> Vec<f64> {
    let (i0d, i1d) = mesh.tail_integrals(delta);
    let i1q = mesh.i1(bq);
    let g1 = g1_from(beta, u0, delta, &i1d, mesh);
    let g2 = g2_from(beta, u0, &i0d, &i1q, mesh);
    g1.iter().zip(&g2).map(|(a, b)| a + b).collect()
}

pub fn solve_self_similar(problem: &SelfSimilarProblem, opts: &SelfSimilarOptions) -> Result<SelfSimilarSolution> {
    let mesh = &problem.mesh;
    let n = mesh.n();
    let beta = problem.beta;
    let bq = &problem.beta_ql;
    if opts.max_iter == 0 || !(opts.eps > 0.0) {
        return Err(PknError::Config("need eps > 0 and max_iter >= 1".into()));
    }
    let mut delta = match &opts.warm_start {
        Some(d) => {
            mesh.check_len(d, "warm start")?;
            let mut d = d.clone();
            d[n] = 0.0;
            d
        }
        None => vec![0.0; n + 1],
    };
    let int_bq = mesh.integral(bq);
    let mut u_old: Option<Vec<f64>> = None;
    let mut last = SelfSimilarSolution {
        u0: f64::NAN,
        delta_u: delta.clone(),
        u: vec![0.0; n + 1],
        iterations: 0,
        converged: false,
        last_change: f64::INFINITY,
    };
    for it in 1..=opts.max_iter {
        let u0 = tip_coefficient(beta, mesh.integral(&delta), int_bq, problem.q0_star)?;
        let mut d_new = g12(beta, u0, &delta, bq, mesh);
        d_new[n] = 0.0;
        let u = reconstruct_u(u0, &d_new, mesh);
        let change = match &u_old {
            Some(prev) => l2_relative_diff(&u, prev).unwrap_or(f64::INFINITY),
            None => match &opts.warm_start {
                // the first comparison is against the starting guess
                Some(_) => l2_relative_diff(&u, &reconstruct_u(u0, &delta, mesh)).unwrap_or(f64::INFINITY),
                None => f64::INFINITY,
            },
        };
        let finite = u.iter().all(|v| v.is_finite());
        last = SelfSimilarSolution {
            u0,
            delta_u: d_new.clone(),
            u: u.clone(),
            iterations: it,
            converged: finite && change < opts.eps,
            last_change: if finite { change } else { f64::NAN },
        };
        if !finite {
            break;
        }
        if last.converged {
            return Ok(last);
        }
        delta = d_new;
        u_old = Some(u);
    }
    Err(PknError::SelfSimilarNotConverged {
        iterations: last.iterations,
        change: last.last_change,
        last: Box::new(last),
    })
}

/// Nodal residual of the twice-integrated equation, scaled by `3 u0^3 (1 - x)`:
/// `[3/4 u^4 - u0^3 ((2 + beta) I1[u] + x I0[u] + I1[beta ql*])] / (3 u0^3 (1 - x))`.
///
/// Zero at the tip node by convention.
pub fn twice_integrated_residual(problem: &SelfSimilarProblem, u0: f64, u: &[f64]) -> Result<Vec<f64>> {
    check_u0(u0)?;
    let mesh = &problem.mesh;
    mesh.check_len(u, "u")?;
    let (i0u, i1u) = mesh.tail_integrals(u);
    let i1q = mesh.i1(&problem.beta_ql);
    let u03 = u0.powi(3);
    let n = mesh.n();
    let mut out = vec![0.0; n + 1];
    for j in 0..n {
        let lhs = 0.75 * u[j].powi(4);
        let rhs = u03 * ((2.0 + problem.beta) * i1u[j] + mesh.x()[j] * i0u[j] + i1q[j]);
        out[j] = (lhs - rhs) / (3.0 * u03 * mesh.r()[j]);
    }
    Ok(out)
}
