//! The four solver rows of the reference accuracy table: benchmark `s1`,
//! `gamma = 1/5`, `a = 1`, `rho = 3`, `K = 30`, `t_K = 100`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benchmarks::{BenchmarkSpec, Shape};
use crate::error::Result;
use crate::transient::{SolverConfig, SolverVariant};

use super::config::{run_benchmark, RunConfig, RunReport};

/// Reference errors `(dL, dw, dV0, dw_t, dw_t FD2, dw_t FD3)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub delta_l: f64,
    pub delta_w: f64,
    pub delta_v0: f64,
    pub delta_wt: f64,
    pub fd2_wt: f64,
    pub fd3_wt: f64,
}

/// `(solver, N, reference)` for each row.
pub const TABLE1: [(u8, usize, Reference); 4] = [
    (
        1,
        40,
        Reference {
            delta_l: 5.2e-3,
            delta_w: 3.7e-3,
            delta_v0: 7.1e-3,
            delta_wt: 7.5e-2,
            fd2_wt: 4.6e-2,
            fd3_wt: 2.0e-2,
        },
    ),
    (
        2,
        40,
        Reference {
            delta_l: 2.4e-5,
            delta_w: 1.1e-4,
            delta_v0: 3.2e-4,
            delta_wt: 1.5e-3,
            fd2_wt: 4.6e-2,
            fd3_wt: 3.4e-3,
        },
    ),
    (
        1,
        5,
        Reference {
            delta_l: 5.2e-3,
            delta_w: 3.7e-3,
            delta_v0: 7.0e-3,
            delta_wt: 7.5e-2,
            fd2_wt: 4.1e-2,
            fd3_wt: 2.0e-2,
        },
    ),
    (
        2,
        5,
        Reference {
            delta_l: 8.0e-5,
            delta_w: 5.7e-4,
            delta_v0: 6.3e-4,
            delta_wt: 5.6e-2,
            fd2_wt: 6.3e-2,
            fd3_wt: 6.2e-2,
        },
    ),
];

pub fn table1_config(solver: u8, n: usize) -> Result<RunConfig> {
    Ok(RunConfig {
        solver: SolverConfig::new(SolverVariant::from_number(solver)?),
        benchmark: BenchmarkSpec::power(0.2, Shape::S1),
        n,
        rho: 3.0,
        k: 30,
        t_final: 100.0,
        ..RunConfig::default()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub solver: u8,
    pub n: usize,
    pub k: usize,
    pub delta_l: Option<f64>,
    pub delta_w: Option<f64>,
    pub delta_v0: Option<f64>,
    pub delta_wt: Option<f64>,
    pub fd2_wt: Option<f64>,
    pub fd3_wt: Option<f64>,
    pub ref_delta_l: f64,
    pub ref_delta_w: f64,
    pub ref_delta_v0: f64,
    pub ref_delta_wt: f64,
    pub ref_fd2_wt: f64,
    pub ref_fd3_wt: f64,
    pub status: String,
}

fn row(solver: u8, n: usize, r: &Reference, run: &Result<RunReport>) -> Table1Row {
    let mut out = Table1Row {
        solver,
        n,
        k: 30,
        delta_l: None,
        delta_w: None,
        delta_v0: None,
        delta_wt: None,
        fd2_wt: None,
        fd3_wt: None,
        ref_delta_l: r.delta_l,
        ref_delta_w: r.delta_w,
        ref_delta_v0: r.delta_v0,
        ref_delta_wt: r.delta_wt,
        ref_fd2_wt: r.fd2_wt,
        ref_fd3_wt: r.fd3_wt,
        status: "ok".into(),
    };
    match run {
        Ok(rep) => {
            out.delta_l = Some(rep.errors.delta_l);
            out.delta_w = Some(rep.errors.delta_w);
            out.delta_v0 = Some(rep.errors.delta_v0);
            out.delta_wt = Some(rep.errors.delta_wt);
            out.fd2_wt = rep.fd2_wt;
            out.fd3_wt = rep.fd3_wt;
        }
        Err(e) => out.status = format!("failed: {e}"),
    }
    out
}

/// Runs the four rows in parallel and returns them with the reports in table order.
pub fn table1() -> Vec<(Table1Row, Result<RunReport>)> {
    TABLE1
        .par_iter()
        .map(|(solver, n, r)| {
            let run = table1_config(*solver, *n).and_then(|c| run_benchmark(&c));
            (row(*solver, *n, r, &run), run)
        })
        .collect()
}
