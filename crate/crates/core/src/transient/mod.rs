//! Time marching for the normalized problem
//!
//! ```text
//! 3 L^2 (w_t + ql) = x w0^3 w_x + 3 (w^3 w_x)_x,   -(1/L)[w^3 w_x]_(x=0) = q0,   w(1) = 0,
//! L' = w0^3 / (3 L),
//! ```
//!
//! with each step reduced to a self-similar-type problem and solved by the same
//! integral inversion. [`SolverVariant::One`] is first order in time and keeps the
//! inner problem at `beta = 1/3`; [`SolverVariant::Two`] uses the trapezoidal rule
//! for `w_t`, which makes the inner `beta = 6 L^2 / (dt w0^3)` large.

mod solver1;
mod solver2;
mod tip;

use serde::{Deserialize, Serialize};

use crate::error::{PknError, Result};
use crate::mesh::Mesh;

pub use solver1::step_solver1;
pub use solver2::step_solver2;

/// Inlet flux and leak-off driving a transient run.
pub trait Forcing: Sync {
    fn q0(&self, t: f64) -> f64;

    /// Leak-off at the nodes; the tip value must be finite (0 for a singular term).
    fn ql(&self, t: f64, mesh: &Mesh) -> Vec<f64>;

    /// Leading singular leak-off term, if the forcing knows it.
    fn ql_singular(&self, _t: f64) -> Option<SingularLeakoff> {
        None
    }
}

/// Leak-off term `coeff * (1 - x)^eta` with `-1/2 <= eta < 1/3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularLeakoff {
    pub eta: f64,
    pub coeff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransientState {
    pub t: f64,
    pub w: Vec<f64>,
    pub w_t: Vec<f64>,
    pub w0: f64,
    pub l: f64,
    pub v0: f64,
}

impl TransientState {
    pub fn new(t: f64, w: Vec<f64>, w_t: Vec<f64>, w0: f64, l: f64) -> Self {
        TransientState {
            t,
            w,
            w_t,
            w0,
            l,
            v0: crack_speed(w0, l),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolverVariant {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
}

impl SolverVariant {
    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(SolverVariant::One),
            2 => Ok(SolverVariant::Two),
            _ => Err(PknError::Config(format!("unknown solver {n}, expected 1 or 2"))),
        }
    }

    pub fn number(self) -> u8 {
        match self {
            SolverVariant::One => 1,
            SolverVariant::Two => 2,
        }
    }
}

/// Inner solver used by [`SolverVariant::Two`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InnerMethod {
    /// Newton's method on the discrete twice-integrated equations.
    #[default]
    Newton,
    /// Fixed point with the least-squares "viscous" preconditioner; only usable
    /// while `beta` stays moderate (small steps make it diverge).
    Viscous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub variant: SolverVariant,
    pub eps: f64,
    pub max_inner: usize,
    pub two_term_tip: bool,
    pub inner: InnerMethod,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            variant: SolverVariant::Two,
            eps: 1e-10,
            max_inner: 500_000,
            two_term_tip: false,
            inner: InnerMethod::Newton,
        }
    }
}

impl SolverConfig {
    pub fn new(variant: SolverVariant) -> Self {
        SolverConfig {
            variant,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) {
            return Err(PknError::Config(format!("eps must be positive, got {}", self.eps)));
        }
        if self.max_inner == 0 {
            return Err(PknError::Config("max_inner must be at least 1".into()));
        }
        if self.two_term_tip && self.variant == SolverVariant::Two && self.inner == InnerMethod::Viscous {
            return Err(PknError::Config(
                "the two-term tip mode needs the Newton inner solver".into(),
            ));
        }
        Ok(())
    }
}

/// Diagnostics of one step.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    pub iterations: usize,
    /// Last relative change of the iterate.
    pub change: f64,
    /// `3 sigma L^2 / (dt W0^3)` at each inner iteration of solver 1.
    pub effective_beta: Vec<f64>,
    /// Step was split in two halves after a failure.
    pub split: bool,
}

/// Time points `t_i = i dt0 + (t_K - (K-1) dt0) / (K-1)^3 * i^3`, `i = 0..K-1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub k: usize,
    pub t_final: f64,
    pub dt0: f64,
    pub times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(k: usize, t_final: f64, dt0: f64) -> Result<Self> {
        if k < 2 {
            return Err(PknError::Config(format!("time grid needs K >= 2, got {k}")));
        }
        if !(t_final > 0.0) || !t_final.is_finite() {
            return Err(PknError::Config(format!("final time must be positive, got {t_final}")));
        }
        let km1 = (k - 1) as f64;
        if !(dt0 > 0.0 && dt0 < t_final / km1) {
            return Err(PknError::Config(format!(
                "first-step control {dt0} outside (0, t_K/(K-1) = {})",
                t_final / km1
            )));
        }
        let c = (t_final - km1 * dt0) / km1.powi(3);
        let mut times: Vec<f64> = (0..k).map(|i| i as f64 * dt0 + c * (i as f64).powi(3)).collect();
        times[0] = 0.0;
        times[k - 1] = t_final;
        Ok(TimeGrid { k, t_final, dt0, times })
    }

    /// `t_K / (10 (K - 1))`: a first step an order below uniform spacing.
    pub fn default_dt0(k: usize, t_final: f64) -> f64 {
        t_final / (10.0 * (k.max(2) - 1) as f64)
    }
}

/// Tip speed `V0 = w0^3 / (3 L)`.
pub fn crack_speed(w0: f64, l: f64) -> f64 {
    w0.powi(3) / (3.0 * l)
}

/// `w_t` from the governing equation given `w_x` and `(w^3 w_x)_x` at the nodes.
pub fn initial_derivative_with(
    w_x: &[f64],
    flux_x: &[f64],
    w0: f64,
    l: f64,
    ql: &[f64],
    mesh: &Mesh,
) -> Result<Vec<f64>> {
    if !(l > 0.0) {
        return Err(PknError::Config(format!("crack length must be positive, got {l}")));
    }
    for (v, what) in [(w_x, "w_x"), (flux_x, "flux derivative"), (ql, "leak-off")] {
        mesh.check_len(v, what)?;
    }
    let n = mesh.n();
    let mut wt: Vec<f64> = (0..n)
        .map(|j| (mesh.x()[j] * w0.powi(3) * w_x[j] + 3.0 * flux_x[j]) / (3.0 * l * l) - ql[j])
        .collect();
    wt.push(0.0);
    Ok(wt)
}

/// `w_t` from the governing equation with derivatives by finite differences in the
/// stretched coordinate `s` (second order, one-sided at the mouth).
pub fn initial_derivative(w: &[f64], w0: f64, l: f64, ql: &[f64], mesh: &Mesh) -> Result<Vec<f64>> {
    mesh.check_len(w, "w")?;
    let wx = d_dx(w, mesh);
    let flux: Vec<f64> = w.iter().zip(&wx).map(|(w, d)| w.powi(3) * d).collect();
    let fx = d_dx(&flux, mesh);
    initial_derivative_with(&wx, &fx, w0, l, ql, mesh)
}

fn d_dx(f: &[f64], mesh: &Mesh) -> Vec<f64> {
    let n = mesh.n();
    let h = 1.0 / n as f64;
    let rho = mesh.rho();
    let xs = |j: usize| rho * (1.0 - j as f64 * h).powf(rho - 1.0);
    let mut d = vec![0.0; n + 1];
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h) / xs(0);
    for j in 1..n {
        d[j] = (f[j + 1] - f[j - 1]) / (2.0 * h) / xs(j);
    }
    d
}

/// A run: states at every grid time and per-step diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub states: Vec<TransientState>,
    pub steps: Vec<StepInfo>,
}

/// One step from `state` to `t1` with the configured solver.
pub fn step(
    state: &TransientState,
    t1: f64,
    forcing: &dyn Forcing,
    cfg: &SolverConfig,
    mesh: &Mesh,
) -> Result<(TransientState, StepInfo)> {
    match cfg.variant {
        SolverVariant::One => step_solver1(state, t1, forcing, cfg, mesh),
        SolverVariant::Two => step_solver2(state, t1, forcing, cfg, mesh),
    }
}

/// Marches over every interval of `grid`. A failed step is retried once as two
/// half steps; a second failure aborts with [`PknError::StepFailed`].
pub fn run_transient(
    initial: &TransientState,
    grid: &TimeGrid,
    forcing: &dyn Forcing,
    cfg: &SolverConfig,
    mesh: &Mesh,
) -> Result<Trajectory> {
    cfg.validate()?;
    for (v, what) in [(&initial.w, "initial w"), (&initial.w_t, "initial w_t")] {
        mesh.check_len(v, what)?;
    }
    if !(initial.l > 0.0) || !(initial.w0 > 0.0) {
        return Err(PknError::Config("initial state needs L > 0 and w0 > 0".into()));
    }
    let mut states = vec![initial.clone()];
    let mut steps = Vec::with_capacity(grid.k - 1);
    for (i, t1) in grid.times.iter().enumerate().skip(1) {
        let prev = states.last().expect("at least the initial state");
        let (next, info) = match step(prev, *t1, forcing, cfg, mesh) {
            Ok(ok) => ok,
            Err(first) if first.is_convergence_failure() => {
                let fail = |e: PknError| PknError::StepFailed {
                    index: i,
                    t: *t1,
                    source: Box::new(e),
                };
                let tm = 0.5 * (prev.t + t1);
                let (mid, a) = step(prev, tm, forcing, cfg, mesh).map_err(fail)?;
                let (end, b) = step(&mid, *t1, forcing, cfg, mesh).map_err(fail)?;
                let mut info = b;
                info.iterations += a.iterations;
                info.effective_beta.splice(0..0, a.effective_beta);
                info.split = true;
                (end, info)
            }
            Err(e) => {
                return Err(PknError::StepFailed {
                    index: i,
                    t: *t1,
                    source: Box::new(e),
                })
            }
        };
        states.push(next);
        steps.push(info);
    }
    Ok(Trajectory { states, steps })
}

/// Predictor shared by both solvers: `W = w + dt w_t`, with the tip coefficient
/// advanced by the derivative seen at the last interior node.
pub(crate) fn predictor(state: &TransientState, dt: f64, mesh: &Mesh) -> (Vec<f64>, f64) {
    let n = mesh.n();
    let mut w: Vec<f64> = state.w.iter().zip(&state.w_t).map(|(w, d)| w + dt * d).collect();
    w[n] = 0.0;
    let w0t = state.w_t[n - 1] / mesh.r()[n - 1].cbrt();
    let w0 = state.w0 + dt * w0t;
    (w, if w0 > 0.0 { w0 } else { state.w0 })
}

pub(crate) fn new_length(state: &TransientState, dt: f64, w0_new: f64) -> f64 {
    (state.l * state.l + dt / 3.0 * (w0_new.powi(3) + state.w0.powi(3))).sqrt()
}

pub(crate) fn check_step(state: &TransientState, t1: f64, mesh: &Mesh) -> Result<f64> {
    mesh.check_len(&state.w, "w")?;
    mesh.check_len(&state.w_t, "w_t")?;
    let dt = t1 - state.t;
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(PknError::Config(format!("time step {dt} must be positive")));
    }
    Ok(dt)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_grid_formula() {
        let g = TimeGrid::new(3, 100.0, 1.0).unwrap();
        assert_eq!(g.times, vec![0.0, 13.25, 100.0]);
        let g = TimeGrid::new(2, 7.0, 0.5).unwrap();
        assert_eq!(g.times, vec![0.0, 7.0]);
        assert!(TimeGrid::new(30, 100.0, 100.0 / 29.0).is_err());
        assert!(TimeGrid::new(1, 100.0, 1.0).is_err());
    }

    #[test]
    fn time_grid_uniform_start_for_large_k() {
        let g = TimeGrid::new(300, 100.0, 0.01).unwrap();
        let d1 = g.times[1] - g.times[0];
        let d2 = g.times[2] - g.times[1];
        assert!((d2 - d1).abs() / d1 < 0.01);
        assert!(g.times.windows(2).all(|p| p[1] > p[0]));
    }

    #[test]
    fn crack_speed_values() {
        assert_eq!(crack_speed(0.0, 1.0), 0.0);
        assert!((crack_speed(1.0, 1.0) - 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn solver_numbers() {
        assert_eq!(SolverVariant::from_number(1).unwrap(), SolverVariant::One);
        assert_eq!(SolverVariant::Two.number(), 2);
        assert!(SolverVariant::from_number(3).is_err());
    }
}
