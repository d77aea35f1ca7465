//! Manufactured solutions `w = u0 psi(t) h(x)`, `h = (1 - x)^(1/3) (1 + s(x))`.
//!
//! The crack length follows from the speed equation `L' = w0^3 / (3L)` in closed
//! form, and the leak-off `ql` and inlet flux `q0` are reverse-engineered so the
//! normalized lubrication equation
//!
//! ```text
//! 3 L^2 (w_t + ql) = x w0^3 w_x + 3 (w^3 w_x)_x
//! ```
//!
//! and the inlet condition hold exactly. Two time families are provided:
//! `psi = exp(gamma t)` and `psi = (a + t)^gamma`.

use serde::{Deserialize, Serialize};

use crate::error::{PknError, Result};
use crate::mesh::Mesh;
use crate::selfsimilar::SelfSimilarProblem;
use crate::transient::{Forcing, SingularLeakoff, TransientState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Exponential,
    Power,
}

/// Correction profile `s(x)` of the opening, `s > -1` on `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    /// `s = -(1/(8e)) (1/3 - beta)(1 - x) + 0.05 (1 - x)^2`; finite leak-off at the tip.
    S1,
    /// `s = (1/5)(1 - x)^(1/6)`; leak-off grows like `(1 - x)^(-1/2)` at the tip.
    Carter,
    /// `s = sum_k c_k (1 - x)^k`.
    Polynomial(Vec<f64>),
}

const CARTER_AMPLITUDE: f64 = 0.2;

impl Shape {
    /// `(s, s', s'')` at `x < 1`; `beta` parameterizes [`Shape::S1`].
    pub fn s(&self, x: f64, beta: f64) -> (f64, f64, f64) {
        let r = 1.0 - x;
        match self {
            Shape::S1 => {
                let c = -(1.0 / (8.0 * std::f64::consts::E)) * (1.0 / 3.0 - beta);
                (c * r + 0.05 * r * r, -c - 0.1 * r, 0.1)
            }
            Shape::Carter => {
                let a = CARTER_AMPLITUDE;
                let r16 = r.powf(1.0 / 6.0);
                (a * r16, -a / 6.0 * r16 / r, -a * 5.0 / 36.0 * r16 / (r * r))
            }
            Shape::Polynomial(c) => {
                let (mut s, mut s1, mut s2) = (0.0, 0.0, 0.0);
                for (k, ck) in c.iter().enumerate() {
                    let k = k as i32;
                    s += ck * r.powi(k);
                    if k >= 1 {
                        s1 -= ck * k as f64 * r.powi(k - 1);
                    }
                    if k >= 2 {
                        s2 += ck * (k * (k - 1)) as f64 * r.powi(k - 2);
                    }
                }
                (s, s1, s2)
            }
        }
    }

    /// `(h, h', h'')` at `x < 1`.
    pub fn h(&self, x: f64, beta: f64) -> (f64, f64, f64) {
        let r = 1.0 - x;
        let a = r.cbrt();
        let ap = -a / (3.0 * r);
        let app = -2.0 * a / (9.0 * r * r);
        let (s, sp, spp) = self.s(x, beta);
        (
            a * (1.0 + s),
            ap * (1.0 + s) + a * sp,
            app * (1.0 + s) + 2.0 * ap * sp + a * spp,
        )
    }

    /// `x h' + 3 (h^3 h')'`, the lubrication operator applied to `h` with unit tip
    /// coefficient.
    pub fn lubrication(&self, x: f64, beta: f64) -> f64 {
        let (h, hp, hpp) = self.h(x, beta);
        x * hp + 3.0 * (3.0 * h * h * hp * hp + h * h * h * hpp)
    }

    /// Coefficient `c` of a leading `c (1 - x)^(-1/2)` term in [`Shape::lubrication`].
    pub fn singular_coefficient(&self) -> Option<f64> {
        match self {
            Shape::Carter => Some(1.75 * CARTER_AMPLITUDE),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSpec {
    pub family: Family,
    pub gamma: f64,
    /// Time offset of the power family, `psi = (a + t)^gamma`.
    #[serde(default = "default_a")]
    pub a: f64,
    #[serde(default = "default_u0")]
    pub u0: f64,
    pub shape: Shape,
}

fn default_a() -> f64 {
    1.0
}

fn default_u0() -> f64 {
    1.0
}

/// Benchmark quantities at one time on one mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkFields {
    pub t: f64,
    pub w: Vec<f64>,
    pub w_t: Vec<f64>,
    pub ql: Vec<f64>,
    pub w0: f64,
    pub l: f64,
    pub v0: f64,
    pub q0: f64,
    /// Self-similar parameter induced by the time family.
    pub beta: f64,
    /// Exponent `alpha` in `ql = gamma u0 psi^alpha [A(h)/beta - h]`; undefined for a
    /// power family with `gamma = 0`.
    pub alpha_exp: Option<f64>,
}

impl BenchmarkSpec {
    pub fn power(gamma: f64, shape: Shape) -> Self {
        BenchmarkSpec {
            family: Family::Power,
            gamma,
            a: 1.0,
            u0: 1.0,
            shape,
        }
    }

    pub fn exponential(gamma: f64, shape: Shape) -> Self {
        BenchmarkSpec {
            family: Family::Exponential,
            gamma,
            a: 0.0,
            u0: 1.0,
            shape,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(PknError::Config(m));
        if !(self.u0 > 0.0) || !self.u0.is_finite() {
            return bad(format!("benchmark amplitude u0 = {}", self.u0));
        }
        match self.family {
            Family::Exponential if !(self.gamma > 0.0) => {
                return bad(format!("exponential family needs gamma > 0, got {}", self.gamma))
            }
            Family::Power if !(self.gamma > -1.0 / 3.0) => {
                return bad(format!("power family needs gamma > -1/3, got {}", self.gamma))
            }
            Family::Power if !(self.a >= 0.0) => return bad(format!("power offset a = {}", self.a)),
            _ => {}
        }
        let beta = self.beta();
        if (0..1000).any(|i| self.shape.s(i as f64 / 1000.0, beta).0 <= -1.0) {
            return bad("shape has s <= -1 inside the crack".into());
        }
        Ok(())
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(t >= 0.0) || (self.family == Family::Power && !(self.a + t > 0.0)) {
            return Err(PknError::Config(format!("benchmark undefined at t = {t}")));
        }
        Ok(())
    }

    /// `2/3` for the exponential family, `2 gamma / (3 gamma + 1)` for the power family.
    pub fn beta(&self) -> f64 {
        match self.family {
            Family::Exponential => 2.0 / 3.0,
            Family::Power => 2.0 * self.gamma / (3.0 * self.gamma + 1.0),
        }
    }

    pub fn psi(&self, t: f64) -> f64 {
        match self.family {
            Family::Exponential => (self.gamma * t).exp(),
            Family::Power => (self.a + t).powf(self.gamma),
        }
    }

    pub fn dpsi(&self, t: f64) -> f64 {
        match self.family {
            Family::Exponential => self.gamma * (self.gamma * t).exp(),
            Family::Power if self.gamma == 0.0 => 0.0,
            Family::Power => self.gamma * (self.a + t).powf(self.gamma - 1.0),
        }
    }

    /// `3 L^2`, the coefficient of the time derivative.
    fn three_l2(&self, t: f64) -> f64 {
        let u03 = self.u0.powi(3);
        match self.family {
            Family::Exponential => 2.0 * u03 / (3.0 * self.gamma) * (3.0 * self.gamma * t).exp(),
            Family::Power => {
                let p = 3.0 * self.gamma + 1.0;
                2.0 * u03 / p * (self.a + t).powf(p)
            }
        }
    }

    pub fn length(&self, t: f64) -> f64 {
        (self.three_l2(t) / 3.0).sqrt()
    }

    pub fn w0(&self, t: f64) -> f64 {
        self.u0 * self.psi(t)
    }

    pub fn v0(&self, t: f64) -> f64 {
        self.w0(t).powi(3) / (3.0 * self.length(t))
    }

    pub fn q0(&self, t: f64) -> f64 {
        let (h, hp, _) = self.shape.h(0.0, self.beta());
        -(self.u0 * self.psi(t)).powi(4) * h.powi(3) * hp / self.length(t)
    }

    pub fn alpha_exp(&self) -> Option<f64> {
        match self.family {
            Family::Exponential => Some(1.0),
            Family::Power if self.gamma != 0.0 => Some((self.gamma - 1.0) / self.gamma),
            Family::Power => None,
        }
    }

    fn nodal(&self, mesh: &Mesh, f: impl Fn(f64) -> f64) -> Vec<f64> {
        let n = mesh.n();
        let mut v: Vec<f64> = mesh.x()[..n].iter().map(|&x| f(x)).collect();
        v.push(0.0);
        v
    }

    pub fn w(&self, t: f64, mesh: &Mesh) -> Vec<f64> {
        let w0 = self.w0(t);
        let beta = self.beta();
        self.nodal(mesh, |x| w0 * self.shape.h(x, beta).0)
    }

    pub fn w_t(&self, t: f64, mesh: &Mesh) -> Vec<f64> {
        let c = self.u0 * self.dpsi(t);
        let beta = self.beta();
        self.nodal(mesh, |x| c * self.shape.h(x, beta).0)
    }

    /// Leak-off at the nodes. The tip value is the limit (0) for finite leak-off and
    /// a 0 placeholder for singular leak-off.
    pub fn ql(&self, t: f64, mesh: &Mesh) -> Vec<f64> {
        self.nodal(mesh, |x| self.ql_at(x, t))
    }

    /// Leak-off at a point `x < 1`.
    pub fn ql_at(&self, x: f64, t: f64) -> f64 {
        let beta = self.beta();
        let flux = self.w0(t).powi(4) / self.three_l2(t);
        flux * self.shape.lubrication(x, beta) - self.u0 * self.dpsi(t) * self.shape.h(x, beta).0
    }

    /// Leading singular leak-off term `c (1 - x)^(-1/2)` at time `t`, if any.
    pub fn ql_singular(&self, t: f64) -> Option<SingularLeakoff> {
        self.shape.singular_coefficient().map(|c| SingularLeakoff {
            eta: -0.5,
            coeff: self.w0(t).powi(4) / self.three_l2(t) * c,
        })
    }

    pub fn fields(&self, t: f64, mesh: &Mesh) -> Result<BenchmarkFields> {
        self.validate()?;
        self.check_time(t)?;
        Ok(BenchmarkFields {
            t,
            w: self.w(t, mesh),
            w_t: self.w_t(t, mesh),
            ql: self.ql(t, mesh),
            w0: self.w0(t),
            l: self.length(t),
            v0: self.v0(t),
            q0: self.q0(t),
            beta: self.beta(),
            alpha_exp: self.alpha_exp(),
        })
    }

    /// Exact transient state at `t`, derivative included.
    pub fn state(&self, t: f64, mesh: &Mesh) -> Result<TransientState> {
        let f = self.fields(t, mesh)?;
        Ok(TransientState {
            t,
            w: f.w,
            w_t: f.w_t,
            w0: f.w0,
            l: f.l,
            v0: f.v0,
        })
    }

    /// Spread of the fluid velocity `V = q / w = -(1/L) w^2 w_x` relative to its mean,
    /// `(max V - min V) / ∫V`, with extrema over the nodes (the tip value being the
    /// limit `w0^3 / (3L)`) and the integral by tail quadrature.
    pub fn gamma_v(&self, t: f64, mesh: &Mesh) -> Result<f64> {
        self.validate()?;
        self.check_time(t)?;
        let beta = self.beta();
        let w0 = self.w0(t);
        let l = self.length(t);
        let n = mesh.n();
        let mut v = Vec::with_capacity(n + 1);
        for &x in &mesh.x()[..n] {
            let (h, hp, _) = self.shape.h(x, beta);
            if !(h > 0.0) {
                return Err(PknError::Degenerate(format!("opening not positive at x = {x}")));
            }
            v.push(-(w0 * h).powi(2) * w0 * hp / l);
        }
        v.push(w0.powi(3) / (3.0 * l));
        let max = v.iter().cloned().fold(f64::MIN, f64::max);
        let min = v.iter().cloned().fold(f64::MAX, f64::min);
        Ok((max - min) / mesh.integral(&v))
    }

    /// The time-free problem whose solution is `u0 h(x)`.
    pub fn selfsimilar_problem(&self, mesh: &Mesh) -> Result<SelfSimilarProblem> {
        self.validate()?;
        selfsimilar_benchmark(&self.shape, self.beta(), self.u0, mesh)
    }
}

/// Self-similar problem with parameter `beta` whose exact solution is `u0 h(x)`:
/// `beta ql* = u0 [A(h) - beta h]`, `q0* = -3 u0^(5/2) h(0)^3 h'(0)`.
pub fn selfsimilar_benchmark(shape: &Shape, beta: f64, u0: f64, mesh: &Mesh) -> Result<SelfSimilarProblem> {
    let n = mesh.n();
    let mut bq: Vec<f64> = mesh.x()[..n]
        .iter()
        .map(|&x| u0 * (shape.lubrication(x, beta) - beta * shape.h(x, beta).0))
        .collect();
    bq.push(0.0);
    let (h0, hp0, _) = shape.h(0.0, beta);
    let q0_star = -3.0 * u0.powf(2.5) * h0.powi(3) * hp0;
    SelfSimilarProblem::from_beta_ql(beta, q0_star, bq, mesh.clone())
}

/// Exact self-similar solution `u0 h(x)` at the nodes.
pub fn selfsimilar_exact(shape: &Shape, beta: f64, u0: f64, mesh: &Mesh) -> Vec<f64> {
    let n = mesh.n();
    let mut u: Vec<f64> = mesh.x()[..n].iter().map(|&x| u0 * shape.h(x, beta).0).collect();
    u.push(0.0);
    u
}

impl Forcing for BenchmarkSpec {
    fn q0(&self, t: f64) -> f64 {
        BenchmarkSpec::q0(self, t)
    }

    fn ql(&self, t: f64, mesh: &Mesh) -> Vec<f64> {
        BenchmarkSpec::ql(self, t, mesh)
    }

    fn ql_singular(&self, t: f64) -> Option<SingularLeakoff> {
        BenchmarkSpec::ql_singular(self, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_length_power_fifth() {
        let b = BenchmarkSpec::power(0.2, Shape::S1);
        assert!((b.length(0.0) - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        assert!((b.beta() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn steady_profile_grows_in_length() {
        // gamma = 0: the opening is frozen but L^2 still grows linearly
        let m = Mesh::new(10, 3.0).unwrap();
        let b = BenchmarkSpec::power(0.0, Shape::S1);
        assert!(b.w_t(3.0, &m).iter().all(|v| *v == 0.0));
        let l2 = |t: f64| b.length(t).powi(2);
        assert!((l2(2.0) - l2(1.0) - (l2(1.0) - l2(0.0))).abs() < 1e-14);
        assert!(l2(1.0) > l2(0.0));
    }

    #[test]
    fn s1_tip_values() {
        let (s, _, _) = Shape::S1.s(1.0, 0.25);
        assert_eq!(s, 0.0);
        let m = Mesh::new(8, 3.0).unwrap();
        let b = BenchmarkSpec::power(0.2, Shape::S1);
        assert_eq!(*b.w(1.0, &m).last().unwrap(), 0.0);
    }

    #[test]
    fn s1_neutral_at_one_third() {
        // the linear coefficient vanishes when beta = 1/3
        let (s, sp, _) = Shape::S1.s(0.0, 1.0 / 3.0);
        assert!((s - 0.05).abs() < 1e-16);
        assert!((sp + 0.1).abs() < 1e-16);
    }

    #[test]
    fn carter_derivative_unbounded() {
        let (_, sp_a, _) = Shape::Carter.s(1.0 - 1e-6, 0.0);
        let (_, sp_b, _) = Shape::Carter.s(1.0 - 1e-12, 0.0);
        assert!(sp_b.abs() > 100.0 * sp_a.abs());
    }

    #[test]
    fn induced_beta() {
        assert_eq!(BenchmarkSpec::exponential(0.7, Shape::S1).beta(), 2.0 / 3.0);
        assert!((BenchmarkSpec::power(1.0 / 3.0, Shape::S1).beta() - 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn validation() {
        assert!(BenchmarkSpec::exponential(0.0, Shape::S1).validate().is_err());
        assert!(BenchmarkSpec::power(-0.4, Shape::S1).validate().is_err());
        assert!(BenchmarkSpec::power(0.2, Shape::Polynomial(vec![-1.5]))
            .validate()
            .is_err());
        let m = Mesh::new(4, 3.0).unwrap();
        assert!(BenchmarkSpec::power(0.2, Shape::S1).fields(-1.0, &m).is_err());
    }

    #[test]
    fn gamma_v_is_time_invariant() {
        let m = Mesh::new(40, 3.0).unwrap();
        for b in [
            BenchmarkSpec::power(0.2, Shape::S1),
            BenchmarkSpec::exponential(0.5, Shape::Carter),
        ] {
            let g0 = b.gamma_v(0.0, &m).unwrap();
            let g1 = b.gamma_v(7.5, &m).unwrap();
            assert!((g0 - g1).abs() < 1e-12 * g0);
        }
    }
}
