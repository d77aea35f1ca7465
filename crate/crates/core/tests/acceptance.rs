//! Acceptance criteria: one PASS/FAIL line per criterion with the measured values.
//!
//! Runs without the libtest harness. Red criteria are reported but do not fail the
//! process, so the rest of the workspace suite still runs; set
//! `PKN_ACCEPTANCE_STRICT=1` to exit non-zero on any red.

use std::process::ExitCode;

use pkn::benchmarks::{BenchmarkSpec, Family, Shape};
use pkn::harness::{
    fd_postprocess_wt, run_benchmark, run_selfsimilar, table1, FdScheme, RunConfig, RunReport, SelfSimilarConfig,
    Table1Row,
};
use pkn::transient::{step, SolverConfig, SolverVariant, TimeGrid};
use pkn::Mesh;

type Verdict = (bool, String);

fn within(value: f64, reference: f64, factor: f64) -> bool {
    value <= factor * reference && value >= reference / factor
}

fn s(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.2e}"))
}

fn row_line(r: &Table1Row) -> String {
    format!(
        "dL {} (ref {:.1e}) dw {} (ref {:.1e}) dV0 {} (ref {:.1e}) dwt {} (ref {:.1e})",
        s(r.delta_l),
        r.ref_delta_l,
        s(r.delta_w),
        r.ref_delta_w,
        s(r.delta_v0),
        r.ref_delta_v0,
        s(r.delta_wt),
        r.ref_delta_wt
    )
}

fn four(r: &Table1Row) -> Option<[(f64, f64); 4]> {
    Some([
        (r.delta_l?, r.ref_delta_l),
        (r.delta_w?, r.ref_delta_w),
        (r.delta_v0?, r.ref_delta_v0),
        (r.delta_wt?, r.ref_delta_wt),
    ])
}

fn table_factor3(r: &Table1Row) -> bool {
    four(r).is_some_and(|v| v.iter().all(|&(x, re)| within(x, re, 3.0)))
}

fn c1(rows: &[Table1Row]) -> Verdict {
    (table_factor3(&rows[0]), row_line(&rows[0]))
}

fn c2(rows: &[Table1Row]) -> Verdict {
    let (one, two) = (&rows[0], &rows[1]);
    let factor = table_factor3(two);
    let gain = |a: Option<f64>, b: Option<f64>| a.zip(b).map_or(0.0, |(a, b)| a / b);
    let (gl, gw) = (gain(one.delta_l, two.delta_l), gain(one.delta_w, two.delta_w));
    let order = gl >= 10.0 && gw >= 10.0;
    (
        factor && order,
        format!(
            "{}; factor 3 {}; solver 1/solver 2 on dL {gl:.1}, on dw {gw:.1}",
            row_line(two),
            ok(factor)
        ),
    )
}

fn c3(rows: &[Table1Row]) -> Verdict {
    let (one40, one5, two5) = (&rows[0], &rows[2], &rows[3]);
    let unchanged = match (four(one40), four(one5)) {
        (Some(a), Some(b)) => a.iter().zip(&b).all(|(x, y)| (y.0 / x.0 - 1.0).abs() <= 0.2),
        _ => false,
    };
    let two_ok = match (two5.delta_l, two5.delta_w) {
        (Some(l), Some(w)) => within(l, two5.ref_delta_l, 3.0) && within(w, two5.ref_delta_w, 3.0),
        _ => false,
    };
    (
        unchanged && two_ok,
        format!(
            "solver 1 N=5 vs N=40 within 20% {}: {}; solver 2 N=5 {}: dL {} (ref 8.0e-5) dw {} (ref 5.7e-4)",
            ok(unchanged),
            row_line(one5),
            ok(two_ok),
            s(two5.delta_l),
            s(two5.delta_w)
        ),
    )
}

fn selfsimilar(beta: f64, n: usize, rho: f64) -> pkn::harness::SelfSimilarReport {
    run_selfsimilar(&SelfSimilarConfig {
        beta,
        n,
        rho,
        ..SelfSimilarConfig::default()
    })
    .expect("self-similar run")
}

/// First N of `ns` from which δu stays within a factor 2 of the finest value.
fn saturation(ns: &[usize], errs: &[f64]) -> Option<usize> {
    let floor = *errs.last()?;
    (0..ns.len())
        .find(|&i| errs[i..].iter().all(|&e| e <= 2.0 * floor))
        .map(|i| ns[i])
}

fn c4() -> Verdict {
    let ns = [10, 20, 40, 60, 80, 120, 160, 240, 320];
    let at60 = selfsimilar(1.0 / 3.0, 60, 3.0);
    let conv = at60.converged && at60.delta_u0 < at60.delta_u;
    let e3: Vec<f64> = ns.iter().map(|&n| selfsimilar(1.0 / 3.0, n, 3.0).delta_u).collect();
    let e1: Vec<f64> = ns.iter().map(|&n| selfsimilar(1.0 / 3.0, n, 1.0).delta_u).collect();
    let (n3, n1) = (saturation(&ns, &e3), saturation(&ns, &e1));
    let by60 = n3.is_some_and(|n| n <= 60);
    let faster = matches!((n3, n1), (Some(a), Some(b)) if a < b);
    let (f3, f1) = (*e3.last().unwrap(), *e1.last().unwrap());
    let same_floor = within(f3, f1, 3.0);
    let fmt = |e: &[f64]| e.iter().map(|x| format!("{x:.1e}")).collect::<Vec<_>>().join(" ");
    (
        conv && by60 && faster && same_floor,
        format!(
            "N=60: converged {} du {:.2e} du0 {:.2e}; rho=3 saturates at N={n3:?}, rho=1 at N={n1:?}; \
             floors {f3:.1e} vs {f1:.1e}; rho=3 [{}] rho=1 [{}] over N={ns:?}",
            at60.converged,
            at60.delta_u,
            at60.delta_u0,
            fmt(&e3),
            fmt(&e1)
        ),
    )
}

fn c5() -> Verdict {
    let run = |beta: f64| {
        let cfg = SelfSimilarConfig {
            beta,
            n: 40,
            ..SelfSimilarConfig::default()
        };
        match run_selfsimilar(&cfg) {
            Ok(r) => r.converged && r.delta_u < 1e-3,
            Err(_) => false,
        }
    };
    let inside = [-1.5, -1.0, 0.0, 1.0 / 3.0, 1.0, 2.0, 4.0];
    let outside = [-2.5, 6.0];
    let bad_in: Vec<f64> = inside.iter().copied().filter(|&b| !run(b)).collect();
    let bad_out: Vec<f64> = outside.iter().copied().filter(|&b| run(b)).collect();
    (
        bad_in.is_empty() && bad_out.is_empty(),
        format!("not converged inside: {bad_in:?}; converged outside: {bad_out:?}"),
    )
}

/// Least-squares `log dL = log c + p log dt`.
fn power_fit(dt: &[f64], e: &[f64]) -> (f64, f64) {
    let x: Vec<f64> = dt.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let p = sxy / sxx;
    ((my - p * mx).exp(), p)
}

fn c6() -> Verdict {
    let b = BenchmarkSpec::power(0.2, Shape::S1);
    let mesh = Mesh::new(40, 3.0).unwrap();
    let s0 = b.state(0.0, &mesh).unwrap();
    let dts = [1e-1, 5e-2, 2e-2, 1e-2, 5e-3, 2e-3, 1e-3];
    let mut pass = true;
    let mut msg = Vec::new();
    for variant in [SolverVariant::One, SolverVariant::Two] {
        let errs: Vec<f64> = dts
            .iter()
            .map(|&dt| {
                let (s1, _) = step(&s0, dt, &b, &SolverConfig::new(variant), &mesh).expect("single step");
                ((s1.l - b.length(dt)) / b.length(dt)).abs()
            })
            .collect();
        let (c, p) = power_fit(&dts, &errs);
        let good = (2.7..=3.3).contains(&p) && (1e-6..=1e-2).contains(&c);
        pass &= good;
        msg.push(format!(
            "solver {}: p {p:.2} c {c:.1e} {} [dL {}]",
            variant.number(),
            ok(good),
            errs.iter().map(|x| format!("{x:.1e}")).collect::<Vec<_>>().join(" ")
        ));
    }
    (pass, msg.join("; "))
}

fn c7() -> Verdict {
    // uniform steps halved from 0.1 on [0, 2]
    let err = |dt: f64| {
        let m = (2.0 / dt).round() as usize;
        let times: Vec<f64> = (0..=m).map(|i| i as f64 * dt).collect();
        let w: Vec<Vec<f64>> = times.iter().map(|t| vec![(3.0 * t).sin() + t * t]).collect();
        let fd = fd_postprocess_wt(&times, &w, FdScheme::ThreePoint).unwrap();
        fd.times
            .iter()
            .zip(&fd.w_t)
            .map(|(t, d)| (d[0] - 3.0 * (3.0 * t).cos() - 2.0 * t).abs())
            .fold(0.0, f64::max)
    };
    let e: Vec<f64> = [0.1, 0.05, 0.025, 0.0125].iter().map(|&dt| err(dt)).collect();
    let slopes: Vec<f64> = e.windows(2).map(|p| (p[0] / p[1]).log2()).collect();
    let pass = slopes.iter().all(|s| (s - 2.0).abs() <= 0.2);
    (pass, format!("slopes {slopes:.3?}"))
}

fn transient(solver: u8, gamma: f64, k: usize) -> RunReport {
    let mut cfg = RunConfig {
        k,
        ..RunConfig::default()
    };
    cfg.solver.variant = SolverVariant::from_number(solver).unwrap();
    cfg.benchmark.gamma = gamma;
    run_benchmark(&cfg).expect("transient run")
}

fn c8() -> Verdict {
    let (a1, a2) = (transient(1, 0.0, 30), transient(2, 0.0, 30));
    let steady = a1.errors.delta_wt * 100.0 <= a2.errors.delta_wt;
    let (b2, b1) = (transient(2, 1.0 / 3.0, 30), transient(1, 1.0 / 3.0, 300));
    let fast = b2.errors.delta_w < b1.errors.delta_w;
    (
        steady && fast,
        format!(
            "gamma=0 dwt: solver 1 {:.2e} vs solver 2 {:.2e} {}; gamma=1/3 dw: solver 2 K=30 {:.2e} vs solver 1 K=300 {:.2e} {}",
            a1.errors.delta_wt,
            a2.errors.delta_wt,
            ok(steady),
            b2.errors.delta_w,
            b1.errors.delta_w,
            ok(fast)
        ),
    )
}

fn c9() -> Verdict {
    let run = |shape: Shape, variant: SolverVariant, two_term: bool| {
        let mut cfg = RunConfig::default();
        cfg.benchmark.shape = shape;
        cfg.solver.variant = variant;
        cfg.solver.two_term_tip = two_term;
        run_benchmark(&cfg)
    };
    let (Ok(s1), Ok(c2), Ok(c2t), Ok(c1)) = (
        run(Shape::S1, SolverVariant::Two, false),
        run(Shape::Carter, SolverVariant::Two, false),
        run(Shape::Carter, SolverVariant::Two, true),
        run(Shape::Carter, SolverVariant::One, false),
    ) else {
        return (false, "a Carter run failed".into());
    };
    let orders = (c2.errors.delta_w / s1.errors.delta_w).log10();
    let degrade = (1.5..=2.5).contains(&orders);
    // node of the largest opening error, over all times
    let worst = c2
        .errors
        .per_node
        .iter()
        .flat_map(|ne| ne.delta_w.iter().enumerate())
        .fold((0, 0.0), |acc, (j, &e)| if e > acc.1 { (j, e) } else { acc });
    let x_worst = Mesh::new(c2.config.n, c2.config.rho).unwrap().x()[worst.0];
    let at_tip = x_worst >= 0.9;
    let improves = c2t.errors.delta_w < c2.errors.delta_w && c2t.errors.delta_wt < c2.errors.delta_wt;
    let same_l = within(c2t.errors.delta_l, c2.errors.delta_l, 3.0);
    (
        degrade && at_tip && improves && same_l,
        format!(
            "solver 1 runs (dw {:.2e}); solver 2 dw {:.2e} vs s1 {:.2e} ({orders:.1} orders) {}; worst node x={x_worst:.3} {}; \
             two-term dw {:.2e} dwt {:.2e} (from {:.2e}) {}; dL {:.2e} vs {:.2e} {}",
            c1.errors.delta_w,
            c2.errors.delta_w,
            s1.errors.delta_w,
            ok(degrade),
            ok(at_tip),
            c2t.errors.delta_w,
            c2t.errors.delta_wt,
            c2.errors.delta_wt,
            ok(improves),
            c2t.errors.delta_l,
            c2.errors.delta_l,
            ok(same_l)
        ),
    )
}

fn c10() -> Verdict {
    // pointwise residual of 3 L^2 (w_t + ql) = x w0^3 w_x + 3 (w^3 w_x)_x from the
    // opening profile and its derivatives
    let mut worst: f64 = 0.0;
    let mesh = Mesh::new(40, 3.0).unwrap();
    for shape in [Shape::S1, Shape::Carter] {
        for (family, gamma) in [
            (Family::Power, 0.2),
            (Family::Power, 0.0),
            (Family::Power, 1.0 / 3.0),
            (Family::Exponential, 0.5),
        ] {
            let b = BenchmarkSpec {
                family,
                gamma,
                a: 1.0,
                u0: 1.0,
                shape: shape.clone(),
            };
            let beta = b.beta();
            for t in [0.0, 0.7, 10.0] {
                let (w0, l) = (b.w0(t), b.length(t));
                let wt = b.u0 * b.dpsi(t);
                for &x in &mesh.x()[..mesh.n()] {
                    let (h, h1, h2) = b.shape.h(x, beta);
                    let lhs = 3.0 * l * l * (wt * h + b.ql_at(x, t));
                    let adv = x * w0.powi(4) * h1;
                    let diff = 3.0 * w0.powi(4) * (3.0 * h * h * h1 * h1 + h.powi(3) * h2);
                    let scale = lhs.abs() + adv.abs() + diff.abs();
                    worst = worst.max((lhs - adv - diff).abs() / scale);
                }
            }
        }
    }
    let residual = worst < 1e-12;
    let gv = |shape: Shape| {
        BenchmarkSpec::power(0.2, shape)
            .gamma_v(0.0, &Mesh::new(400, 3.0).unwrap())
            .unwrap()
    };
    let (g1, gc) = (gv(Shape::S1), gv(Shape::Carter));
    let gamma_v = (g1 - 0.408).abs() <= 0.002 && (gc - 0.411).abs() <= 0.002;
    (
        residual && gamma_v,
        format!(
            "max relative residual {worst:.1e} {}; gamma_v s1 {g1:.4} (0.408), carter {gc:.4} (0.411) {}",
            ok(residual),
            ok(gamma_v)
        ),
    )
}

fn c11() -> Verdict {
    let b = BenchmarkSpec::power(0.2, Shape::S1);
    let mesh = Mesh::new(40, 3.0).unwrap();
    let grid = TimeGrid::new(30, 100.0, TimeGrid::default_dt0(30, 100.0)).unwrap();
    let traj = pkn::transient::run_transient(
        &b.state(0.0, &mesh).unwrap(),
        &grid,
        &b,
        &SolverConfig::new(SolverVariant::One),
        &mesh,
    )
    .expect("solver 1 run");
    let all: Vec<f64> = traj
        .steps
        .iter()
        .flat_map(|s| s.effective_beta.iter().copied())
        .collect();
    let worst = all.iter().map(|b| (b - 1.0 / 3.0).abs()).fold(0.0, f64::max);
    (
        !all.is_empty() && worst <= 1e-14,
        format!("{} inner iterations, max |beta - 1/3| {worst:.1e}", all.len()),
    )
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "off"
    }
}

fn main() -> ExitCode {
    let rows: Vec<Table1Row> = table1().into_iter().map(|(r, _)| r).collect();
    let checks: Vec<(usize, Box<dyn Fn() -> Verdict>)> = vec![
        (1, Box::new(|| c1(&rows))),
        (2, Box::new(|| c2(&rows))),
        (3, Box::new(|| c3(&rows))),
        (4, Box::new(c4)),
        (5, Box::new(c5)),
        (6, Box::new(c6)),
        (7, Box::new(c7)),
        (8, Box::new(c8)),
        (9, Box::new(c9)),
        (10, Box::new(c10)),
        (11, Box::new(c11)),
    ];
    let mut red = 0;
    for (i, check) in &checks {
        let (pass, detail) = check();
        if !pass {
            red += 1;
        }
        println!("criterion {i:>2}: {} - {detail}", if pass { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {} of {} criteria pass", checks.len() - red, checks.len());
    let strict = std::env::var("PKN_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if red == 0 || !strict {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
