//! Global fluid balance `d/dt (L ∫w) = q0 - L ∫ql`, integrated in time.

use crate::error::Result;
use crate::mesh::Mesh;
use crate::transient::{Forcing, TransientState};

/// `∫_0^1 ql`, with a known singular term integrated exactly.
fn leakoff_integral(forcing: &dyn Forcing, t: f64, mesh: &Mesh) -> f64 {
    let ql = forcing.ql(t, mesh);
    match forcing.ql_singular(t) {
        None => mesh.integral(&ql),
        Some(s) => {
            let re = mesh.r_pow(s.eta);
            let reg: Vec<f64> = ql.iter().zip(&re).map(|(q, r)| q - s.coeff * r).collect();
            mesh.integral(&reg) + s.coeff / (s.eta + 1.0)
        }
    }
}

/// Residual of the balance at every state, relative to the stored volume `L ∫w`:
/// quadrature in `x`, trapezoid in `t`.
pub fn global_balance_residual(states: &[TransientState], forcing: &dyn Forcing, mesh: &Mesh) -> Result<Vec<f64>> {
    let Some(first) = states.first() else {
        return Ok(Vec::new());
    };
    for s in states {
        mesh.check_len(&s.w, "w")?;
    }
    let volume = |s: &TransientState| s.l * mesh.integral(&s.w);
    let v0 = volume(first);
    let net = |s: &TransientState| forcing.q0(s.t) - s.l * leakoff_integral(forcing, s.t, mesh);
    let mut acc = 0.0;
    let mut prev = net(first);
    let mut out = vec![0.0];
    for pair in states.windows(2) {
        let cur = net(&pair[1]);
        acc += 0.5 * (pair[1].t - pair[0].t) * (prev + cur);
        prev = cur;
        let v = volume(&pair[1]);
        out.push(((v - v0 - acc) / v).abs());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{BenchmarkSpec, Shape};

    struct Dry;
    impl Forcing for Dry {
        fn q0(&self, _t: f64) -> f64 {
            0.0
        }
        fn ql(&self, _t: f64, mesh: &Mesh) -> Vec<f64> {
            vec![0.0; mesh.len()]
        }
    }

    #[test]
    fn frozen_state_without_fluxes_balances() {
        let mesh = Mesh::new(12, 3.0).unwrap();
        let w: Vec<f64> = mesh.r().iter().map(|r| r.cbrt()).collect();
        let states: Vec<_> = (0..4)
            .map(|i| TransientState::new(i as f64, w.clone(), vec![0.0; 13], 1.0, 1.0))
            .collect();
        let res = global_balance_residual(&states, &Dry, &mesh).unwrap();
        assert!(res.iter().all(|r| *r == 0.0));
    }

    #[test]
    fn exact_benchmark_balances_to_quadrature_level() {
        let mesh = Mesh::new(80, 3.0).unwrap();
        let b = BenchmarkSpec::power(0.2, Shape::S1);
        let states: Vec<_> = (0..=400).map(|i| b.state(i as f64 * 0.01, &mesh).unwrap()).collect();
        let res = global_balance_residual(&states, &b, &mesh).unwrap();
        let worst = res.iter().cloned().fold(0.0, f64::max);
        assert!(worst < 1e-5, "{worst}");
    }
}
