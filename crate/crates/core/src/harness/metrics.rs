//! Errors of a trajectory against a manufactured solution and finite-difference
//! estimates of `w_t` from the stored openings.

use serde::{Deserialize, Serialize};

use crate::benchmarks::BenchmarkSpec;
use crate::error::{PknError, Result};
use crate::mesh::Mesh;
use crate::transient::TransientState;

/// Below this `max |exact w_t|` the derivative error is reported in absolute terms.
pub const WT_ABSOLUTE_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TimeErrors {
    pub t: f64,
    pub delta_w: f64,
    pub delta_l: f64,
    pub delta_wt: f64,
    pub delta_u0: f64,
    pub delta_v0: f64,
    pub wt_absolute: bool,
}

/// Relative opening error and derivative error at the nodes `x_j < 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeErrors {
    pub t: f64,
    pub delta_w: Vec<f64>,
    pub delta_wt: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorMeta {
    /// Relative errors skip the tip node, where exact and numeric opening vanish.
    pub tip_excluded: bool,
    pub wt_absolute_threshold: f64,
}

impl Default for ErrorMeta {
    fn default() -> Self {
        ErrorMeta {
            tip_excluded: true,
            wt_absolute_threshold: WT_ABSOLUTE_THRESHOLD,
        }
    }
}

/// Maxima over all times, plus the per-time and per-node breakdown.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub delta_w: f64,
    pub delta_l: f64,
    pub delta_wt: f64,
    pub delta_u0: f64,
    pub delta_v0: f64,
    pub per_time: Vec<TimeErrors>,
    pub per_node: Vec<NodeErrors>,
    pub meta: ErrorMeta,
}

impl ErrorReport {
    fn aggregate(per_time: Vec<TimeErrors>, per_node: Vec<NodeErrors>) -> Self {
        let max = |f: fn(&TimeErrors) -> f64| per_time.iter().map(f).fold(0.0, f64::max);
        ErrorReport {
            delta_w: max(|e| e.delta_w),
            delta_l: max(|e| e.delta_l),
            delta_wt: max(|e| e.delta_wt),
            delta_u0: max(|e| e.delta_u0),
            delta_v0: max(|e| e.delta_v0),
            per_time,
            per_node,
            meta: ErrorMeta::default(),
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Pointwise derivative errors: relative, or absolute when the exact field vanishes.
fn wt_errors(num: &[f64], exact: &[f64], n: usize) -> (Vec<f64>, bool) {
    let absolute = exact[..n].iter().fold(0.0f64, |m, v| m.max(v.abs())) < WT_ABSOLUTE_THRESHOLD;
    let e = (0..n)
        .map(|j| {
            let d = (num[j] - exact[j]).abs();
            if absolute {
                d
            } else {
                d / exact[j].abs()
            }
        })
        .collect();
    (e, absolute)
}

fn state_errors(s: &TransientState, bench: &BenchmarkSpec, mesh: &Mesh) -> Result<(TimeErrors, NodeErrors)> {
    let n = mesh.n();
    mesh.check_len(&s.w, "w")?;
    mesh.check_len(&s.w_t, "w_t")?;
    let ex = bench.fields(s.t, mesh)?;
    let dw: Vec<f64> = (0..n).map(|j| rel(s.w[j], ex.w[j])).collect();
    let (dwt, absolute) = wt_errors(&s.w_t, &ex.w_t, n);
    let fold = |v: &[f64]| v.iter().cloned().fold(0.0, f64::max);
    let te = TimeErrors {
        t: s.t,
        delta_w: fold(&dw),
        delta_l: rel(s.l, ex.l),
        delta_wt: fold(&dwt),
        delta_u0: rel(s.w0, ex.w0),
        delta_v0: rel(s.v0, ex.v0),
        wt_absolute: absolute,
    };
    Ok((
        te,
        NodeErrors {
            t: s.t,
            delta_w: dw,
            delta_wt: dwt,
        },
    ))
}

/// Errors of every state against the benchmark evaluated at the state's time.
pub fn error_metrics(states: &[TransientState], bench: &BenchmarkSpec, mesh: &Mesh) -> Result<ErrorReport> {
    let mut per_time = Vec::with_capacity(states.len());
    let mut per_node = Vec::with_capacity(states.len());
    for s in states {
        let (te, ne) = state_errors(s, bench, mesh)?;
        per_time.push(te);
        per_node.push(ne);
    }
    Ok(ErrorReport::aggregate(per_time, per_node))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FdScheme {
    /// Backward `(w_i - w_(i-1)) / (t_i - t_(i-1))`.
    TwoPoint,
    /// Variable-step backward formula, exact for quadratics.
    ThreePoint,
}

impl FdScheme {
    fn history(self) -> usize {
        match self {
            FdScheme::TwoPoint => 2,
            FdScheme::ThreePoint => 3,
        }
    }
}

/// Finite-difference `w_t` at the times `t_i` with enough history behind them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdSeries {
    pub scheme: FdScheme,
    pub times: Vec<f64>,
    pub w_t: Vec<Vec<f64>>,
}

/// Backward differences of the stored openings on the (non-uniform) time grid.
pub fn fd_postprocess_wt(times: &[f64], w: &[Vec<f64>], scheme: FdScheme) -> Result<FdSeries> {
    if times.len() != w.len() {
        return Err(PknError::Mismatch(format!(
            "{} times for {} openings",
            times.len(),
            w.len()
        )));
    }
    let need = scheme.history();
    if times.len() < need {
        return Err(PknError::Config(format!(
            "{scheme:?} differences need {need} time points, got {}",
            times.len()
        )));
    }
    let mut out_t = Vec::new();
    let mut out_w = Vec::new();
    for i in need - 1..times.len() {
        let d = match scheme {
            FdScheme::TwoPoint => {
                let h = times[i] - times[i - 1];
                w[i].iter().zip(&w[i - 1]).map(|(a, b)| (a - b) / h).collect()
            }
            FdScheme::ThreePoint => {
                let h1 = times[i] - times[i - 1];
                let h2 = times[i - 1] - times[i - 2];
                let c0 = (2.0 * h1 + h2) / (h1 * (h1 + h2));
                let c1 = (h1 + h2) / (h1 * h2);
                let c2 = h1 / (h2 * (h1 + h2));
                (0..w[i].len())
                    .map(|j| c0 * w[i][j] - c1 * w[i - 1][j] + c2 * w[i - 2][j])
                    .collect()
            }
        };
        out_t.push(times[i]);
        out_w.push(d);
    }
    Ok(FdSeries {
        scheme,
        times: out_t,
        w_t: out_w,
    })
}

/// Largest derivative error of a finite-difference series against the benchmark.
pub fn fd_error(series: &FdSeries, bench: &BenchmarkSpec, mesh: &Mesh) -> Result<f64> {
    let n = mesh.n();
    let mut worst = 0.0f64;
    for (t, d) in series.times.iter().zip(&series.w_t) {
        mesh.check_len(d, "finite-difference w_t")?;
        let exact = bench.w_t(*t, mesh);
        let (e, _) = wt_errors(d, &exact, n);
        worst = e.iter().cloned().fold(worst, f64::max);
    }
    Ok(worst)
}

/// Convenience: FD series straight from a trajectory.
pub fn fd_from_states(states: &[TransientState], scheme: FdScheme) -> Result<FdSeries> {
    let times: Vec<f64> = states.iter().map(|s| s.t).collect();
    let w: Vec<Vec<f64>> = states.iter().map(|s| s.w.clone()).collect();
    fd_postprocess_wt(&times, &w, scheme)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::Shape;

    #[test]
    fn exact_states_have_zero_error() {
        let mesh = Mesh::new(10, 3.0).unwrap();
        let b = BenchmarkSpec::power(0.2, Shape::S1);
        let states: Vec<_> = [0.0, 1.0, 5.0].iter().map(|&t| b.state(t, &mesh).unwrap()).collect();
        let rep = error_metrics(&states, &b, &mesh).unwrap();
        assert_eq!(rep.delta_w, 0.0);
        assert_eq!(rep.delta_l, 0.0);
        assert_eq!(rep.delta_wt, 0.0);
        assert_eq!(rep.per_time.len(), 3);
        assert_eq!(rep.per_node[0].delta_w.len(), 10);
    }

    #[test]
    fn absolute_switch_for_steady_benchmark() {
        let mesh = Mesh::new(10, 3.0).unwrap();
        let b = BenchmarkSpec::power(0.0, Shape::S1);
        let mut s = b.state(2.0, &mesh).unwrap();
        s.w_t[0] = 1e-6;
        let rep = error_metrics(&[s], &b, &mesh).unwrap();
        assert!(rep.per_time[0].wt_absolute);
        assert!((rep.delta_wt - 1e-6).abs() < 1e-18);
    }

    #[test]
    fn fd_exact_for_linear_and_quadratic() {
        let times = [0.0, 0.3, 1.0, 2.5];
        let lin: Vec<Vec<f64>> = times.iter().map(|t| vec![2.0 * t + 1.0, -t]).collect();
        for scheme in [FdScheme::TwoPoint, FdScheme::ThreePoint] {
            let s = fd_postprocess_wt(&times, &lin, scheme).unwrap();
            for d in &s.w_t {
                assert!((d[0] - 2.0).abs() < 1e-13 && (d[1] + 1.0).abs() < 1e-13);
            }
        }
        let quad: Vec<Vec<f64>> = times.iter().map(|t| vec![t * t]).collect();
        let s = fd_postprocess_wt(&times, &quad, FdScheme::ThreePoint).unwrap();
        for (t, d) in s.times.iter().zip(&s.w_t) {
            assert!((d[0] - 2.0 * t).abs() < 1e-12);
        }
    }

    #[test]
    fn fd_needs_history() {
        assert!(fd_postprocess_wt(&[0.0, 1.0], &[vec![0.0], vec![1.0]], FdScheme::ThreePoint).is_err());
        assert!(fd_postprocess_wt(&[0.0], &[vec![0.0]], FdScheme::TwoPoint).is_err());
    }
}
