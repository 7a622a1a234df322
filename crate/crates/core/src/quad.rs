//! Double-exponential quadrature.
//!
//! Tanh-sinh on a finite interval and exp-sinh on a half line. Abscissae near
//! a finite endpoint are produced from their distance to that endpoint, so an
//! integrable singularity sitting at `a = 0` is sampled down to the smallest
//! normal double rather than to `1e-16`.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    pub value: f64,
    /// Difference between the last two refinement levels.
    pub error: f64,
    pub evals: usize,
}

const MAX_LEVEL: u32 = 9;
const T_MAX: f64 = 6.5;

/// `∫_a^b f(x) dx` for `a < b` finite.
///
/// Converges when two successive levels agree to `tol` in absolute terms or
/// to `tol` relative to the integral, whichever is looser.
pub fn tanh_sinh<F>(mut f: F, a: f64, b: f64, tol: f64) -> Result<Quad>
where
    F: FnMut(f64) -> f64,
{
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Quadrature(format!("bad interval [{a}, {b}]")));
    }
    let c = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut evals = 0usize;
    // Contribution of the node at parameter t (and its mirror -t).
    let mut node = |t: f64, f: &mut F| -> Result<f64> {
        let s = FRAC_PI_2 * t.sinh();
        let e = (-2.0 * s.abs()).exp();
        // distance from the nearer endpoint
        let d = c * 2.0 * e / (1.0 + e);
        let w = c * FRAC_PI_2 * t.cosh() * 4.0 * e / ((1.0 + e) * (1.0 + e));
        if d < f64::MIN_POSITIVE || w == 0.0 {
            return Ok(0.0);
        }
        if t == 0.0 {
            evals += 1;
            let v = f(mid);
            return finite(v, mid).map(|v| w * v);
        }
        evals += 2;
        let (xl, xr) = if t > 0.0 { (a + d, b - d) } else { (b - d, a + d) };
        let vl = finite(f(xl), xl)?;
        let vr = finite(f(xr), xr)?;
        Ok(w * (vl + vr))
    };

    let mut h = 1.0;
    let mut sum = node(0.0, &mut f)?;
    let mut k = 1;
    while (k as f64) * h <= T_MAX {
        sum += node(k as f64 * h, &mut f)?;
        k += 1;
    }
    let mut prev = h * sum;
    for _ in 1..=MAX_LEVEL {
        h *= 0.5;
        let mut k = 1;
        while (k as f64) * h <= T_MAX {
            sum += node(k as f64 * h, &mut f)?;
            k += 2;
        }
        let cur = h * sum;
        let err = (cur - prev).abs();
        if err <= tol || err <= tol * cur.abs() {
            return Ok(Quad { value: cur, error: err, evals });
        }
        prev = cur;
    }
    Err(Error::Quadrature(format!(
        "tanh-sinh on [{a}, {b}] did not reach tolerance {tol:e}"
    )))
}

/// `∫_a^∞ f(x) dx` for integrands decaying at least exponentially.
pub fn exp_sinh<F>(mut f: F, a: f64, tol: f64) -> Result<Quad>
where
    F: FnMut(f64) -> f64,
{
    if !a.is_finite() {
        return Err(Error::Quadrature(format!("bad lower limit {a}")));
    }
    let mut evals = 0usize;
    let mut node = |t: f64, f: &mut F| -> Result<f64> {
        let s = FRAC_PI_2 * t.sinh();
        if s > 700.0 {
            return Ok(0.0);
        }
        let d = s.exp();
        if d < f64::MIN_POSITIVE {
            return Ok(0.0);
        }
        let w = FRAC_PI_2 * t.cosh() * d;
        let x = a + d;
        evals += 1;
        let v = finite(f(x), x)?;
        Ok(if v == 0.0 { 0.0 } else { w * v })
    };
    let t_lo = -T_MAX;
    let t_hi = 5.0;
    let mut h = 1.0;
    let mut sum = 0.0;
    let mut t = t_lo;
    while t <= t_hi {
        sum += node(t, &mut f)?;
        t += h;
    }
    let mut prev = h * sum;
    for _ in 1..=MAX_LEVEL {
        h *= 0.5;
        let mut t = t_lo + h;
        while t <= t_hi {
            sum += node(t, &mut f)?;
            t += 2.0 * h;
        }
        let cur = h * sum;
        let err = (cur - prev).abs();
        if err <= tol || err <= tol * cur.abs() {
            return Ok(Quad { value: cur, error: err, evals });
        }
        prev = cur;
    }
    Err(Error::Quadrature(format!(
        "exp-sinh on [{a}, inf) did not reach tolerance {tol:e}"
    )))
}

fn finite(v: f64, x: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Quadrature(format!("integrand not finite at x={x:e}")))
    }
}
