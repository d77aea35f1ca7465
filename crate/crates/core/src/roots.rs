//! Safeguarded Newton iteration for scalar equations on a bracket.

use crate::error::{PknError, Result};

/// Finds a root of `f` in `[lo, hi]`, where `f(lo)` and `f(hi)` differ in sign.
///
/// `f` returns the value and the derivative. A Newton step that leaves the
/// bracket, or fails to halve the previous step, is replaced by bisection.
/// Stops when the step is below `rtol * |x|`.
pub fn newton_bisect<F>(mut f: F, mut lo: f64, mut hi: f64, rtol: f64, max_iter: usize) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    let (flo, _) = f(lo);
    let (fhi, _) = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(PknError::Degenerate(format!("no sign change on [{lo}, {hi}]")));
    }
    // orient so that f(lo) < 0
    if flo > 0.0 {
        std::mem::swap(&mut lo, &mut hi);
    }
    let mut x = 0.5 * (lo + hi);
    let mut dx_old = (hi - lo).abs();
    let mut dx = dx_old;
    let (mut fx, mut dfx) = f(x);
    for _ in 0..max_iter {
        let newton_out = ((x - hi) * dfx - fx) * ((x - lo) * dfx - fx) > 0.0;
        if newton_out || (2.0 * fx).abs() > (dx_old * dfx).abs() {
            dx_old = dx;
            dx = 0.5 * (hi - lo);
            x = lo + dx;
        } else {
            dx_old = dx;
            dx = fx / dfx;
            x -= dx;
        }
        if dx.abs() <= rtol * x.abs() {
            return Ok(x);
        }
        let (v, d) = f(x);
        fx = v;
        dfx = d;
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
    }
    Err(PknError::RootNotConverged { iterations: max_iter })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_root_of_two() {
        let x = newton_bisect(|x| (x * x - 2.0, 2.0 * x), 0.0, 2.0, 1e-15, 100).unwrap();
        assert!((x - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn decreasing_function() {
        let x = newton_bisect(|x| (1.0 - x.powi(3), -3.0 * x * x), 0.0, 5.0, 1e-14, 100).unwrap();
        assert!((x - 1.0).abs() < 1e-13);
    }

    #[test]
    fn flat_start_falls_back_to_bisection() {
        // derivative vanishes at the midpoint of the bracket
        let x = newton_bisect(
            |x| ((x - 1.0).powi(3) - 0.001, 3.0 * (x - 1.0).powi(2)),
            0.0,
            2.0,
            1e-14,
            200,
        )
        .unwrap();
        assert!((x - 1.1).abs() < 1e-12);
    }

    #[test]
    fn requires_sign_change() {
        assert!(newton_bisect(|x| (x * x + 1.0, 2.0 * x), -1.0, 1.0, 1e-14, 50).is_err());
    }
}
