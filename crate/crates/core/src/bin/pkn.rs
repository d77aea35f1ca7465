//! Command-line front end: self-similar and transient benchmark runs, sweeps and
//! the reference accuracy table. Exit codes: 0 success, 2 configuration or I/O
//! error, 3 solver non-convergence.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pkn::benchmarks::{Family, Shape};
use pkn::harness::{
    config::load_json_file,
    emit::{self, node_rows, profile_rows, NODE_HEADER, PROFILE_HEADER},
    run_benchmark, run_selfsimilar, sweep, table1, RunConfig, SelfSimilarConfig, SweepAxis, SweepConfig, SweepKind,
};
use pkn::transient::{InnerMethod, SolverVariant};
use pkn::{Mesh, PknError, Result};

#[derive(Parser)]
#[command(
    name = "pkn",
    version,
    about = "Integral solvers for the normalized PKN fracture model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the self-similar problem of a benchmark shape.
    Selfsimilar {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        ss: SelfSimilarArgs,
        /// JSON file mirroring the self-similar configuration.
        #[arg(long)]
        config: Option<PathBuf>,
        /// CSV of the computed and exact profile.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// March a transient benchmark in time and report its errors.
    Transient {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        run: TransientArgs,
        /// JSON file mirroring the run configuration.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Per-time CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Long-format per-node error CSV.
        #[arg(long)]
        nodes: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// One run per value of a parameter.
    Sweep {
        #[arg(long, value_enum)]
        axis: Option<AxisArg>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Option<Vec<f64>>,
        /// Defaults to self-similar for a beta sweep, transient otherwise.
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        run: TransientArgs,
        #[command(flatten)]
        ss: SelfSimilarArgs,
        /// JSON file mirroring the sweep configuration.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Run the four solver rows of the reference table and compare.
    Table1 {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Args)]
struct CommonArgs {
    /// Benchmark shape.
    #[arg(long, value_enum)]
    benchmark: Option<ShapeArg>,
    /// Number of mesh intervals.
    #[arg(long)]
    n: Option<usize>,
    /// Mesh grading exponent.
    #[arg(long)]
    rho: Option<f64>,
    /// Benchmark amplitude.
    #[arg(long)]
    u0: Option<f64>,
}

#[derive(Args)]
struct TransientArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    solver: Option<u8>,
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    /// Time offset of the power family.
    #[arg(long)]
    a: Option<f64>,
    /// Number of time points.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    t_final: Option<f64>,
    /// First-step control of the time grid.
    #[arg(long)]
    dt0: Option<f64>,
    /// Inner stopping tolerance.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    max_inner: Option<usize>,
    /// Represent the opening with a second explicit tip term.
    #[arg(long)]
    two_term_tip: bool,
    /// Inner solver of solver 2.
    #[arg(long, value_enum)]
    inner: Option<InnerArg>,
}

#[derive(Args)]
struct SelfSimilarArgs {
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ShapeArg {
    S1,
    Carter,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Power,
    Exponential,
}

#[derive(Clone, Copy, ValueEnum)]
enum InnerArg {
    Newton,
    Viscous,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    N,
    K,
    Beta,
    Rho,
    Dt,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Selfsimilar,
    Transient,
}

fn shape(s: ShapeArg) -> Shape {
    match s {
        ShapeArg::S1 => Shape::S1,
        ShapeArg::Carter => Shape::Carter,
    }
}

impl CommonArgs {
    fn apply_run(&self, c: &mut RunConfig) {
        if let Some(s) = self.benchmark {
            c.benchmark.shape = shape(s);
        }
        if let Some(v) = self.n {
            c.n = v;
        }
        if let Some(v) = self.rho {
            c.rho = v;
        }
        if let Some(v) = self.u0 {
            c.benchmark.u0 = v;
        }
    }

    fn apply_ss(&self, c: &mut SelfSimilarConfig) {
        if let Some(s) = self.benchmark {
            c.shape = shape(s);
        }
        if let Some(v) = self.n {
            c.n = v;
        }
        if let Some(v) = self.rho {
            c.rho = v;
        }
        if let Some(v) = self.u0 {
            c.u0 = v;
        }
    }
}

impl TransientArgs {
    fn apply(&self, c: &mut RunConfig) -> Result<()> {
        if let Some(v) = self.solver {
            c.solver.variant = SolverVariant::from_number(v)?;
        }
        if let Some(f) = self.family {
            c.benchmark.family = match f {
                FamilyArg::Power => Family::Power,
                FamilyArg::Exponential => Family::Exponential,
            };
        }
        if let Some(v) = self.gamma {
            c.benchmark.gamma = v;
        }
        if let Some(v) = self.a {
            c.benchmark.a = v;
        }
        if let Some(v) = self.k {
            c.k = v;
        }
        if let Some(v) = self.t_final {
            c.t_final = v;
        }
        if let Some(v) = self.dt0 {
            c.dt0 = Some(v);
        }
        if let Some(v) = self.eps {
            c.solver.eps = v;
        }
        if let Some(v) = self.max_inner {
            c.solver.max_inner = v;
        }
        if self.two_term_tip {
            c.solver.two_term_tip = true;
        }
        if let Some(m) = self.inner {
            c.solver.inner = match m {
                InnerArg::Newton => InnerMethod::Newton,
                InnerArg::Viscous => InnerMethod::Viscous,
            };
        }
        Ok(())
    }
}

impl SelfSimilarArgs {
    fn apply(&self, c: &mut SelfSimilarConfig) {
        if let Some(v) = self.beta {
            c.beta = v;
        }
        if let Some(v) = self.tol {
            c.eps = v;
        }
        if let Some(v) = self.max_iter {
            c.max_iter = v;
        }
    }
}

fn load_or_default<T: Default + for<'de> serde::Deserialize<'de>>(path: &Option<PathBuf>) -> Result<T> {
    match path {
        Some(p) => load_json_file(p),
        None => Ok(T::default()),
    }
}

fn pick(cli: &Option<PathBuf>, file: &Option<PathBuf>) -> Option<PathBuf> {
    cli.clone().or_else(|| file.clone())
}

fn fmt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.2e}"))
}

fn cmd_selfsimilar(
    common: &CommonArgs,
    ss: &SelfSimilarArgs,
    config: &Option<PathBuf>,
    out: &Option<PathBuf>,
    json: &Option<PathBuf>,
) -> Result<()> {
    let mut cfg: SelfSimilarConfig = load_or_default(config)?;
    common.apply_ss(&mut cfg);
    ss.apply(&mut cfg);
    let rep = run_selfsimilar(&cfg)?;
    println!(
        "beta={} n={} rho={} converged={} iterations={} delta_u={:.3e} delta_u0={:.3e}",
        cfg.beta, cfg.n, cfg.rho, rep.converged, rep.iterations, rep.delta_u, rep.delta_u0
    );
    if let Some(p) = pick(out, &cfg.csv) {
        emit::write_csv(&p, PROFILE_HEADER, &profile_rows(&rep))?;
    }
    if let Some(p) = pick(json, &cfg.json) {
        emit::write_json(&p, &rep)?;
    }
    if !rep.converged {
        return Err(PknError::InnerNotConverged {
            solver: "self-similar",
            iterations: rep.iterations,
            change: rep.last_change,
        });
    }
    Ok(())
}

fn cmd_transient(
    common: &CommonArgs,
    run: &TransientArgs,
    config: &Option<PathBuf>,
    out: &Option<PathBuf>,
    nodes: &Option<PathBuf>,
    json: &Option<PathBuf>,
) -> Result<()> {
    let mut cfg: RunConfig = load_or_default(config)?;
    common.apply_run(&mut cfg);
    run.apply(&mut cfg)?;
    let rep = run_benchmark(&cfg)?;
    let e = &rep.errors;
    println!(
        "solver={} n={} k={} delta_l={:.3e} delta_w={:.3e} delta_v0={:.3e} delta_wt={:.3e} fd2_wt={} fd3_wt={} max_balance={:.3e}",
        cfg.solver.variant.number(),
        cfg.n,
        cfg.k,
        e.delta_l,
        e.delta_w,
        e.delta_v0,
        e.delta_wt,
        fmt(rep.fd2_wt),
        fmt(rep.fd3_wt),
        rep.max_balance()
    );
    if let Some(p) = pick(out, &cfg.csv) {
        emit::write_time_csv(&p, &rep)?;
    }
    if let Some(p) = nodes {
        let mesh = Mesh::new(cfg.n, cfg.rho)?;
        emit::write_csv(p, NODE_HEADER, &node_rows(&rep, mesh.x()))?;
    }
    if let Some(p) = pick(json, &cfg.json) {
        emit::write_json(&p, &rep)?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    axis: Option<AxisArg>,
    values: &Option<Vec<f64>>,
    kind: Option<KindArg>,
    common: &CommonArgs,
    run: &TransientArgs,
    ss: &SelfSimilarArgs,
    config: &Option<PathBuf>,
    out: &Option<PathBuf>,
    json: &Option<PathBuf>,
) -> Result<()> {
    let mut cfg = match config {
        Some(p) => load_json_file::<SweepConfig>(p)?,
        None => {
            let axis = axis.ok_or_else(|| PknError::Config("--axis is required without --config".into()))?;
            SweepConfig {
                kind: SweepKind::Transient,
                axis: to_axis(axis),
                values: Vec::new(),
                run: RunConfig::default(),
                selfsimilar: SelfSimilarConfig::default(),
            }
        }
    };
    if let Some(a) = axis {
        cfg.axis = to_axis(a);
    }
    if config.is_none() || kind.is_some() {
        cfg.kind = match kind {
            Some(KindArg::Selfsimilar) => SweepKind::SelfSimilar,
            Some(KindArg::Transient) => SweepKind::Transient,
            None if cfg.axis == SweepAxis::Beta => SweepKind::SelfSimilar,
            None => SweepKind::Transient,
        };
    }
    if let Some(v) = values {
        cfg.values = v.clone();
    }
    common.apply_run(&mut cfg.run);
    common.apply_ss(&mut cfg.selfsimilar);
    run.apply(&mut cfg.run)?;
    ss.apply(&mut cfg.selfsimilar);
    let rows = sweep(&cfg)?;
    for r in &rows {
        println!(
            "{}={} status={} delta_w={} delta_l={} delta_u0={} iterations={}",
            r.axis,
            r.value,
            r.status,
            fmt(r.delta_w),
            fmt(r.delta_l),
            fmt(r.delta_u0),
            r.iterations.map_or_else(|| "-".into(), |i| i.to_string())
        );
    }
    if let Some(p) = out {
        emit::write_sweep_csv(p, &rows)?;
    }
    if let Some(p) = json {
        emit::write_json(p, &serde_json::json!({ "config": cfg, "rows": rows }))?;
    }
    Ok(())
}

fn to_axis(a: AxisArg) -> SweepAxis {
    match a {
        AxisArg::N => SweepAxis::N,
        AxisArg::K => SweepAxis::K,
        AxisArg::Beta => SweepAxis::Beta,
        AxisArg::Rho => SweepAxis::Rho,
        AxisArg::Dt => SweepAxis::Dt,
    }
}

fn cmd_table1(out: &Option<PathBuf>, json: &Option<PathBuf>) -> Result<()> {
    let results = table1();
    println!(
        "{:>6} {:>3} | {:>17} | {:>17} | {:>17} | {:>17} | {:>17} | {:>17}",
        "solver", "N", "dL (ref)", "dw (ref)", "dV0 (ref)", "dw_t (ref)", "FD2 (ref)", "FD3 (ref)"
    );
    let pair = |v: Option<f64>, r: f64| format!("{} ({:.1e})", fmt(v), r);
    for (row, _) in &results {
        println!(
            "{:>6} {:>3} | {:>17} | {:>17} | {:>17} | {:>17} | {:>17} | {:>17}",
            row.solver,
            row.n,
            pair(row.delta_l, row.ref_delta_l),
            pair(row.delta_w, row.ref_delta_w),
            pair(row.delta_v0, row.ref_delta_v0),
            pair(row.delta_wt, row.ref_delta_wt),
            pair(row.fd2_wt, row.ref_fd2_wt),
            pair(row.fd3_wt, row.ref_fd3_wt)
        );
    }
    let rows: Vec<_> = results.iter().map(|(r, _)| r.clone()).collect();
    if let Some(p) = out {
        emit::write_table1_csv(p, &rows)?;
    }
    if let Some(p) = json {
        emit::write_json(p, &rows)?;
    }
    results.into_iter().try_for_each(|(_, run)| run.map(|_| ()))
}

fn exit_code(e: &PknError) -> u8 {
    if e.is_convergence_failure() {
        3
    } else {
        2
    }
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Selfsimilar {
            common,
            ss,
            config,
            out,
            json,
        } => cmd_selfsimilar(common, ss, config, out, json),
        Command::Transient {
            common,
            run,
            config,
            out,
            nodes,
            json,
        } => cmd_transient(common, run, config, out, nodes, json),
        Command::Sweep {
            axis,
            values,
            kind,
            common,
            run,
            ss,
            config,
            out,
            json,
        } => cmd_sweep(*axis, values, *kind, common, run, ss, config, out, json),
        Command::Table1 { out, json } => cmd_table1(out, json),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
