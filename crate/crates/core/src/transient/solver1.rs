//! First-order scheme. The time derivative is relaxed as
//! `W_t = sigma (W - w)/dt + (1 - sigma) W_t`, with `sigma = dt W0^3 / (9 L^2)`
//! chosen so the inner problem always has `beta = 1/3`.

use crate::error::{PknError, Result};
use crate::mesh::{l2_relative_diff, norm2, Mesh};
use crate::selfsimilar::{g1_from, g2_from, tip_coefficient};

use super::tip::{singular_leakoff, TipTerm};
use super::{check_step, new_length, predictor, Forcing, SolverConfig, StepInfo, TransientState};

const BETA: f64 = 1.0 / 3.0;

pub fn step_solver1(
    state: &TransientState,
    t1: f64,
    forcing: &dyn Forcing,
    cfg: &SolverConfig,
    mesh: &Mesh,
) -> Result<(TransientState, StepInfo)> {
    let dt = check_step(state, t1, mesh)?;
    let n = mesh.n();
    let ql = forcing.ql(t1, mesh);
    mesh.check_len(&ql, "leak-off")?;
    let q0 = forcing.q0(t1);
    let r13 = mesh.r_pow(1.0 / 3.0);

    let tip = if cfg.two_term_tip {
        let s = singular_leakoff(forcing, t1, &ql, mesh);
        let term = TipTerm::new(s.eta, mesh);
        let moments = (term.i0_w(mesh), term.i1_w(mesh), term.i1_q(mesh));
        Some((s.coeff, term, moments))
    } else {
        None
    };

    let (mut w_new, mut w0) = predictor(state, dt, mesh);
    // Full correction W - W0 r^(1/3), including any explicit tip term.
    let mut delta: Vec<f64> = (0..=n).map(|j| w_new[j] - w0 * r13[j]).collect();
    let mut w_t = state.w_t.clone();
    let mut l = state.l;
    let mut info = StepInfo::default();

    for it in 1..=cfg.max_inner {
        let sigma = dt * w0.powi(3) / (9.0 * l * l);
        info.effective_beta.push(3.0 * sigma * l * l / (dt * w0.powi(3)));
        let bq: Vec<f64> = (0..=n)
            .map(|j| BETA * (-state.w[j] + dt / sigma * ((1.0 - sigma) * w_t[j] + ql[j])))
            .collect();
        let q0_star = 3.0 * q0 * w0.powf(-1.5) * l;

        let (int_delta, int_bq, i0d, i1d, i1q) = match &tip {
            None => {
                let (i0d, i1d) = mesh.tail_integrals(&delta);
                let i1q = mesh.i1(&bq);
                (i0d[0], mesh.integral(&bq), i0d, i1d, i1q)
            }
            Some((c_ql, term, (m0w, m1w, m1q))) => {
                let bc = BETA * dt / sigma * c_ql;
                let w1 = term.w1_from(bc);
                let d: Vec<f64> = (0..=n).map(|j| delta[j] - w1 * term.rz[j]).collect();
                let bq_reg: Vec<f64> = (0..=n).map(|j| bq[j] - bc * term.re[j]).collect();
                let (mut i0d, mut i1d) = mesh.tail_integrals(&d);
                let mut i1q = mesh.i1(&bq_reg);
                for j in 0..=n {
                    i0d[j] += w1 * m0w[j];
                    i1d[j] += w1 * m1w[j];
                    i1q[j] += bc * m1q[j];
                }
                let int_bq = mesh.integral(&bq_reg) + bc * super::tip::moment0(term.eta, 1.0);
                (i0d[0], int_bq, i0d, i1d, i1q)
            }
        };

        let w0n = tip_coefficient(BETA, int_delta, int_bq, q0_star)?;
        let g1 = g1_from(BETA, w0n, &delta, &i1d, mesh);
        let g2 = g2_from(BETA, w0n, &i0d, &i1q, mesh);
        let delta_n: Vec<f64> = g1.iter().zip(&g2).map(|(a, b)| a + b).collect();
        let ln = new_length(state, dt, w0n);
        let sigma_n = dt * w0n.powi(3) / (9.0 * ln * ln);
        let mut wn: Vec<f64> = (0..=n).map(|j| w0n * r13[j] + delta_n[j]).collect();
        wn[n] = 0.0;
        let wtn: Vec<f64> = (0..=n)
            .map(|j| sigma_n * (wn[j] - state.w[j]) / dt + (1.0 - sigma_n) * w_t[j])
            .collect();
        if wn.iter().chain(&wtn).any(|v| !v.is_finite()) || !ln.is_finite() {
            return Err(PknError::NonPhysical(format!("solver 1 iterate diverged at t = {t1}")));
        }

        let dw = l2_relative_diff(&wn, &w_new)?;
        let dwt = if norm2(&wtn) > 0.0 {
            l2_relative_diff(&wtn, &w_t)?
        } else {
            norm2(&wtn.iter().zip(&w_t).map(|(a, b)| a - b).collect::<Vec<_>>())
        };
        let change = dw.max(sigma_n * dwt);
        w_new = wn;
        w0 = w0n;
        delta = delta_n;
        l = ln;
        w_t = wtn;
        info.iterations = it;
        info.change = change;
        if change < cfg.eps {
            let next = TransientState::new(t1, w_new, w_t, w0, l);
            return Ok((next, info));
        }
    }
    Err(PknError::InnerNotConverged {
        solver: "solver 1",
        iterations: cfg.max_inner,
        change: info.change,
    })
}
