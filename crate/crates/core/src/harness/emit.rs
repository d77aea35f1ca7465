//! CSV and JSON output. Column orders are fixed by the row structs.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{PknError, Result};

use super::config::{RunReport, SelfSimilarReport};
use super::sweep::SweepRow;
use super::table1::Table1Row;

/// Per-time row of a transient run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeRow {
    pub step: usize,
    pub t: f64,
    pub delta_w: f64,
    pub delta_l: f64,
    pub delta_wt: f64,
    pub delta_u0: f64,
    pub delta_v0: f64,
    pub wt_absolute: bool,
    pub iterations: usize,
    pub balance: f64,
}

/// Long-format row: one value per node and time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeRow {
    pub t: f64,
    pub x: f64,
    pub delta_w: f64,
    pub delta_wt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileRow {
    pub x: f64,
    pub u: f64,
    pub u_exact: f64,
}

pub fn time_rows(rep: &RunReport) -> Vec<TimeRow> {
    rep.errors
        .per_time
        .iter()
        .enumerate()
        .map(|(i, e)| TimeRow {
            step: i,
            t: e.t,
            delta_w: e.delta_w,
            delta_l: e.delta_l,
            delta_wt: e.delta_wt,
            delta_u0: e.delta_u0,
            delta_v0: e.delta_v0,
            wt_absolute: e.wt_absolute,
            iterations: if i == 0 { 0 } else { rep.iterations[i - 1] },
            balance: rep.balance[i],
        })
        .collect()
}

pub fn node_rows(rep: &RunReport, x: &[f64]) -> Vec<NodeRow> {
    rep.errors
        .per_node
        .iter()
        .flat_map(|ne| {
            (0..ne.delta_w.len()).map(move |j| NodeRow {
                t: ne.t,
                x: x[j],
                delta_w: ne.delta_w[j],
                delta_wt: ne.delta_wt[j],
            })
        })
        .collect()
}

pub fn profile_rows(rep: &SelfSimilarReport) -> Vec<ProfileRow> {
    (0..rep.x.len())
        .map(|j| ProfileRow {
            x: rep.x[j],
            u: rep.u[j],
            u_exact: rep.u_exact[j],
        })
        .collect()
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> PknError + '_ {
    move |source| PknError::Csv {
        path: path.into(),
        source,
    }
}

/// Writes rows with a header taken from `header`, so an empty table still gets one.
pub fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(csv_err(path))?;
    wtr.write_record(header).map_err(csv_err(path))?;
    for row in rows {
        wtr.serialize(row).map_err(csv_err(path))?;
    }
    wtr.flush().map_err(|source| PknError::Io {
        path: path.into(),
        source,
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(|source| PknError::Io {
        path: path.into(),
        source,
    })?;
    let mut buf = std::io::BufWriter::new(file);
    serde_json::to_writer_pretty(&mut buf, value).map_err(|source| PknError::Json {
        path: path.into(),
        source,
    })?;
    buf.flush().map_err(|source| PknError::Io {
        path: path.into(),
        source,
    })
}

pub const TIME_HEADER: &[&str] = &[
    "step",
    "t",
    "delta_w",
    "delta_l",
    "delta_wt",
    "delta_u0",
    "delta_v0",
    "wt_absolute",
    "iterations",
    "balance",
];

pub const NODE_HEADER: &[&str] = &["t", "x", "delta_w", "delta_wt"];

pub const PROFILE_HEADER: &[&str] = &["x", "u", "u_exact"];

pub const SWEEP_HEADER: &[&str] = &[
    "index",
    "axis",
    "value",
    "kind",
    "status",
    "solver",
    "n",
    "rho",
    "k",
    "t_final",
    "beta",
    "delta_w",
    "delta_l",
    "delta_wt",
    "delta_u0",
    "delta_v0",
    "fd2_wt",
    "fd3_wt",
    "iterations",
    "max_balance",
    "message",
];

pub const TABLE1_HEADER: &[&str] = &[
    "solver",
    "n",
    "k",
    "delta_l",
    "delta_w",
    "delta_v0",
    "delta_wt",
    "fd2_wt",
    "fd3_wt",
    "ref_delta_l",
    "ref_delta_w",
    "ref_delta_v0",
    "ref_delta_wt",
    "ref_fd2_wt",
    "ref_fd3_wt",
    "status",
];

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    write_csv(path, SWEEP_HEADER, rows)
}

pub fn write_table1_csv(path: &Path, rows: &[Table1Row]) -> Result<()> {
    write_csv(path, TABLE1_HEADER, rows)
}

pub fn write_time_csv(path: &Path, rep: &RunReport) -> Result<()> {
    write_csv(path, TIME_HEADER, &time_rows(rep))
}
