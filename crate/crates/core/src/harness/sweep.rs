//! Parameter sweeps: one independent run per value, run in parallel, reported in
//! input order. A failed run becomes a row with its error message.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PknError, Result};

use super::config::{run_benchmark, run_selfsimilar, RunConfig, SelfSimilarConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    N,
    K,
    Beta,
    Rho,
    /// Single step of the given size from `t = 0`.
    Dt,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::N => "n",
            SweepAxis::K => "k",
            SweepAxis::Beta => "beta",
            SweepAxis::Rho => "rho",
            SweepAxis::Dt => "dt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    SelfSimilar,
    Transient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub kind: SweepKind,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub selfsimilar: SelfSimilarConfig,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(PknError::Config(msg.to_string()));
        match (self.kind, self.axis) {
            (SweepKind::SelfSimilar, SweepAxis::K | SweepAxis::Dt) => bad("the self-similar sweep has no time axis"),
            (SweepKind::Transient, SweepAxis::Beta) => {
                bad("beta is fixed by the benchmark family in a transient sweep")
            }
            _ => Ok(()),
        }
    }
}

/// One sweep point. Fields a run kind does not produce are left empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub index: usize,
    pub axis: String,
    pub value: f64,
    pub kind: SweepKind,
    pub status: String,
    pub solver: Option<u8>,
    pub n: usize,
    pub rho: f64,
    pub k: Option<usize>,
    pub t_final: Option<f64>,
    pub beta: f64,
    pub delta_w: Option<f64>,
    pub delta_l: Option<f64>,
    pub delta_wt: Option<f64>,
    pub delta_u0: Option<f64>,
    pub delta_v0: Option<f64>,
    pub fd2_wt: Option<f64>,
    pub fd3_wt: Option<f64>,
    pub iterations: Option<usize>,
    pub max_balance: Option<f64>,
    pub message: String,
}

fn as_count(axis: SweepAxis, v: f64) -> Result<usize> {
    if v >= 1.0 && v.fract() == 0.0 && v < 1e9 {
        Ok(v as usize)
    } else {
        Err(PknError::Config(format!(
            "{} must be a positive integer, got {v}",
            axis.name()
        )))
    }
}

fn selfsimilar_row(cfg: &SweepConfig, index: usize, value: f64) -> SweepRow {
    let mut c = cfg.selfsimilar.clone();
    let applied = match cfg.axis {
        SweepAxis::N => as_count(cfg.axis, value).map(|n| c.n = n),
        SweepAxis::Rho => {
            c.rho = value;
            Ok(())
        }
        SweepAxis::Beta => {
            c.beta = value;
            Ok(())
        }
        SweepAxis::K | SweepAxis::Dt => Err(PknError::Config("no time axis".into())),
    };
    let mut row = SweepRow {
        index,
        axis: cfg.axis.name().into(),
        value,
        kind: SweepKind::SelfSimilar,
        status: String::new(),
        solver: None,
        n: c.n,
        rho: c.rho,
        k: None,
        t_final: None,
        beta: c.beta,
        delta_w: None,
        delta_l: None,
        delta_wt: None,
        delta_u0: None,
        delta_v0: None,
        fd2_wt: None,
        fd3_wt: None,
        iterations: None,
        max_balance: None,
        message: String::new(),
    };
    match applied.and_then(|_| run_selfsimilar(&c)) {
        Ok(rep) => {
            row.status = if rep.converged { "ok" } else { "not_converged" }.into();
            row.delta_w = Some(rep.delta_u);
            row.delta_u0 = Some(rep.delta_u0);
            row.iterations = Some(rep.iterations);
            if !rep.converged {
                row.message = format!("last change {:e}", rep.last_change);
            }
        }
        Err(e) => {
            row.status = "failed".into();
            row.message = e.to_string();
        }
    }
    row
}

fn transient_row(cfg: &SweepConfig, index: usize, value: f64) -> SweepRow {
    let mut c = cfg.run.clone();
    let applied = match cfg.axis {
        SweepAxis::N => as_count(cfg.axis, value).map(|n| c.n = n),
        SweepAxis::K => as_count(cfg.axis, value).map(|k| {
            c.k = k;
            c.dt0 = None;
        }),
        SweepAxis::Rho => {
            c.rho = value;
            Ok(())
        }
        SweepAxis::Dt => {
            c.k = 2;
            c.t_final = value;
            c.dt0 = None;
            Ok(())
        }
        SweepAxis::Beta => Err(PknError::Config("beta is fixed by the benchmark".into())),
    };
    let mut row = SweepRow {
        index,
        axis: cfg.axis.name().into(),
        value,
        kind: SweepKind::Transient,
        status: String::new(),
        solver: Some(c.solver.variant.number()),
        n: c.n,
        rho: c.rho,
        k: Some(c.k),
        t_final: Some(c.t_final),
        beta: c.benchmark.beta(),
        delta_w: None,
        delta_l: None,
        delta_wt: None,
        delta_u0: None,
        delta_v0: None,
        fd2_wt: None,
        fd3_wt: None,
        iterations: None,
        max_balance: None,
        message: String::new(),
    };
    match applied.and_then(|_| run_benchmark(&c)) {
        Ok(rep) => {
            row.status = "ok".into();
            row.delta_w = Some(rep.errors.delta_w);
            row.delta_l = Some(rep.errors.delta_l);
            row.delta_wt = Some(rep.errors.delta_wt);
            row.delta_u0 = Some(rep.errors.delta_u0);
            row.delta_v0 = Some(rep.errors.delta_v0);
            row.fd2_wt = rep.fd2_wt;
            row.fd3_wt = rep.fd3_wt;
            row.iterations = Some(rep.total_iterations());
            row.max_balance = Some(rep.max_balance());
        }
        Err(e) => {
            row.status = "failed".into();
            row.message = e.to_string();
        }
    }
    row
}

/// Runs every sweep point; the result has one row per value, in input order.
pub fn sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    Ok(cfg
        .values
        .par_iter()
        .enumerate()
        .map(|(i, &v)| match cfg.kind {
            SweepKind::SelfSimilar => selfsimilar_row(cfg, i, v),
            SweepKind::Transient => transient_row(cfg, i, v),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ss_sweep(axis: SweepAxis, values: Vec<f64>) -> SweepConfig {
        SweepConfig {
            kind: SweepKind::SelfSimilar,
            axis,
            values,
            run: RunConfig::default(),
            selfsimilar: SelfSimilarConfig::default(),
        }
    }

    #[test]
    fn rows_keep_input_order_and_record_failures() {
        let rows = sweep(&ss_sweep(SweepAxis::Beta, vec![1.0, -2.5, 0.0, 6.0])).unwrap();
        assert_eq!(rows.iter().map(|r| r.index).collect::<Vec<_>>(), vec![0, 1, 2, 3]);
        assert_eq!(rows[0].status, "ok");
        assert_eq!(rows[2].status, "ok");
        assert_ne!(rows[1].status, "ok");
        assert_ne!(rows[3].status, "ok");
    }

    #[test]
    fn invalid_axis_values_fail_per_row() {
        let rows = sweep(&ss_sweep(SweepAxis::N, vec![2.5, 20.0])).unwrap();
        assert_eq!(rows[0].status, "failed");
        assert_eq!(rows[1].status, "ok");
    }

    #[test]
    fn mismatched_kind_and_axis_rejected() {
        assert!(sweep(&ss_sweep(SweepAxis::Dt, vec![0.1])).is_err());
    }

    #[test]
    fn empty_sweep() {
        assert!(sweep(&ss_sweep(SweepAxis::Beta, vec![])).unwrap().is_empty());
    }
}
