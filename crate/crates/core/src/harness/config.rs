//! Run configurations and the pipelines that turn them into reports.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::benchmarks::{selfsimilar_benchmark, selfsimilar_exact, BenchmarkSpec, Shape};
use crate::error::{PknError, Result};
use crate::mesh::Mesh;
use crate::selfsimilar::{solve_self_similar, SelfSimilarOptions};
use crate::transient::{run_transient, SolverConfig, TimeGrid, TransientState};

use super::balance::global_balance_residual;
use super::metrics::{error_metrics, fd_error, fd_from_states, ErrorReport, FdScheme};

/// A transient benchmark run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub solver: SolverConfig,
    pub benchmark: BenchmarkSpec,
    pub n: usize,
    pub rho: f64,
    pub k: usize,
    pub t_final: f64,
    /// First-step control of the time grid; `t_final / (10 (k - 1))` when absent.
    pub dt0: Option<f64>,
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            solver: SolverConfig::default(),
            benchmark: BenchmarkSpec::power(0.2, Shape::S1),
            n: 40,
            rho: 3.0,
            k: 30,
            t_final: 100.0,
            dt0: None,
            csv: None,
            json: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        load_json_file(path)
    }

    pub fn dt0(&self) -> f64 {
        self.dt0.unwrap_or_else(|| TimeGrid::default_dt0(self.k, self.t_final))
    }

    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        self.benchmark.validate()?;
        Mesh::new(self.n, self.rho)?;
        TimeGrid::new(self.k, self.t_final, self.dt0())?;
        Ok(())
    }
}

pub fn load_json_file<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|source| PknError::Io {
        path: path.into(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| PknError::Json {
        path: path.into(),
        source,
    })
}

/// Everything produced by one transient run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub errors: ErrorReport,
    /// Derivative error of backward 2-point differences of the stored openings.
    pub fd2_wt: Option<f64>,
    /// Same with the variable-step 3-point formula.
    pub fd3_wt: Option<f64>,
    /// Relative global-balance residual at every time.
    pub balance: Vec<f64>,
    /// Inner iterations of every step.
    pub iterations: Vec<usize>,
    pub final_state: TransientState,
}

impl RunReport {
    pub fn max_balance(&self) -> f64 {
        self.balance.iter().cloned().fold(0.0, f64::max)
    }

    pub fn total_iterations(&self) -> usize {
        self.iterations.iter().sum()
    }
}

pub fn run_benchmark(cfg: &RunConfig) -> Result<RunReport> {
    cfg.validate()?;
    let mesh = Mesh::new(cfg.n, cfg.rho)?;
    let grid = TimeGrid::new(cfg.k, cfg.t_final, cfg.dt0())?;
    let initial = cfg.benchmark.state(0.0, &mesh)?;
    let traj = run_transient(&initial, &grid, &cfg.benchmark, &cfg.solver, &mesh)?;
    let errors = error_metrics(&traj.states, &cfg.benchmark, &mesh)?;
    let fd = |scheme| -> Result<Option<f64>> {
        match fd_from_states(&traj.states, scheme) {
            Ok(series) => fd_error(&series, &cfg.benchmark, &mesh).map(Some),
            Err(PknError::Config(_)) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let fd2_wt = fd(FdScheme::TwoPoint)?;
    let fd3_wt = fd(FdScheme::ThreePoint)?;
    let balance = global_balance_residual(&traj.states, &cfg.benchmark, &mesh)?;
    let iterations = traj.steps.iter().map(|s| s.iterations).collect();
    let final_state = traj.states.last().cloned().expect("trajectory holds the initial state");
    Ok(RunReport {
        config: cfg.clone(),
        errors,
        fd2_wt,
        fd3_wt,
        balance,
        iterations,
        final_state,
    })
}

/// A self-similar benchmark solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelfSimilarConfig {
    pub shape: Shape,
    pub beta: f64,
    pub u0: f64,
    pub n: usize,
    pub rho: f64,
    pub eps: f64,
    pub max_iter: usize,
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

impl Default for SelfSimilarConfig {
    fn default() -> Self {
        SelfSimilarConfig {
            shape: Shape::S1,
            beta: 1.0 / 3.0,
            u0: 1.0,
            n: 40,
            rho: 3.0,
            eps: 1e-10,
            max_iter: 200,
            csv: None,
            json: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfSimilarReport {
    pub config: SelfSimilarConfig,
    pub converged: bool,
    pub iterations: usize,
    pub last_change: f64,
    /// Largest relative error of `u` at the nodes `x_j < 1`.
    pub delta_u: f64,
    pub delta_u0: f64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub u_exact: Vec<f64>,
}

/// Solves the benchmark problem. Hitting the iteration cap is reported, not raised.
pub fn run_selfsimilar(cfg: &SelfSimilarConfig) -> Result<SelfSimilarReport> {
    if !(cfg.u0 > 0.0) {
        return Err(PknError::Config(format!("u0 must be positive, got {}", cfg.u0)));
    }
    let mesh = Mesh::new(cfg.n, cfg.rho)?;
    let problem = selfsimilar_benchmark(&cfg.shape, cfg.beta, cfg.u0, &mesh)?;
    let opts = SelfSimilarOptions {
        eps: cfg.eps,
        max_iter: cfg.max_iter,
        ..Default::default()
    };
    let sol = match solve_self_similar(&problem, &opts) {
        Ok(s) => s,
        Err(PknError::SelfSimilarNotConverged { last, .. }) => *last,
        Err(e) => return Err(e),
    };
    let exact = selfsimilar_exact(&cfg.shape, cfg.beta, cfg.u0, &mesh);
    let n = mesh.n();
    let delta_u = (0..n)
        .map(|j| ((sol.u[j] - exact[j]) / exact[j]).abs())
        .fold(0.0, f64::max);
    let delta_u0 = ((sol.u0 - cfg.u0) / cfg.u0).abs();
    Ok(SelfSimilarReport {
        config: cfg.clone(),
        converged: sol.converged,
        iterations: sol.iterations,
        last_change: sol.last_change,
        delta_u,
        delta_u0,
        x: mesh.x().to_vec(),
        u: sol.u,
        u_exact: exact,
    })
}
