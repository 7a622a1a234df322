//! Symmetric α-stable motion in one dimension, `E[e^{iξY_t}] = e^{-t|ξ|^α}`.
//!
//! At `α = 2` this is Brownian motion run at twice the usual speed
//! (variance `2t`), matching the generator `Δ`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{ensure, Result};
use crate::special_fn::gamma;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableSpec {
    alpha: f64,
}

impl StableSpec {
    pub fn new(alpha: f64) -> Result<Self> {
        ensure(alpha > 0.0 && alpha <= 2.0, || {
            format!("stable index must lie in (0, 2], got {alpha}")
        })?;
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// Standard symmetric variate (`dt = 1`), Chambers–Mallows–Stuck.
pub fn sample_unit<R: Rng + ?Sized>(spec: &StableSpec, rng: &mut R) -> f64 {
    let alpha = spec.alpha;
    if alpha == 2.0 {
        let z: f64 = StandardNormal.sample(rng);
        return std::f64::consts::SQRT_2 * z;
    }
    let v = PI * (rng.gen::<f64>() - 0.5);
    if alpha == 1.0 {
        return v.tan();
    }
    let w: f64 = Exp1.sample(rng);
    (alpha * v).sin() / v.cos().powf(1.0 / alpha)
        * (((1.0 - alpha) * v).cos() / w).powf((1.0 - alpha) / alpha)
}

/// Increment over a time step `dt`: `dt^{1/α}` times a unit variate.
pub fn sample_increment<R: Rng + ?Sized>(spec: &StableSpec, dt: f64, rng: &mut R) -> Result<f64> {
    ensure(dt > 0.0, || format!("time step must be positive, got {dt}"))?;
    Ok(dt.powf(1.0 / spec.alpha) * sample_unit(spec, rng))
}

/// Outcome of a discretised exit-time walk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exit {
    pub exited: bool,
    /// Grid time of the first observed exit, or `t_max` if none.
    pub tau: f64,
}

/// Euler walk from `x0` until the state leaves `(a, b)` or `t_max` is
/// reached. The last step is shortened to end exactly at `t_max`.
///
/// Exits are only observed at grid times, so for `α = 2` intra-step
/// crossings are missed and `τ` is overestimated; the bias shrinks like
/// `dt^{1/2}`.
pub fn simulate_exit<R: Rng + ?Sized>(
    spec: &StableSpec,
    interval: (f64, f64),
    x0: f64,
    dt: f64,
    t_max: f64,
    rng: &mut R,
) -> Result<Exit> {
    let (a, b) = interval;
    ensure(a < b, || format!("empty interval ({a}, {b})"))?;
    ensure(x0 > a && x0 < b, || format!("start {x0} outside ({a}, {b})"))?;
    ensure(dt > 0.0, || format!("time step must be positive, got {dt}"))?;
    ensure(t_max >= 0.0, || format!("t_max must be nonnegative, got {t_max}"))?;
    Ok(walk(spec, a, b, x0, dt, t_max, rng))
}

pub(crate) fn walk<R: Rng + ?Sized>(
    spec: &StableSpec,
    a: f64,
    b: f64,
    x0: f64,
    dt: f64,
    t_max: f64,
    rng: &mut R,
) -> Exit {
    let inv_alpha = 1.0 / spec.alpha;
    let full = dt.powf(inv_alpha);
    let mut x = x0;
    let mut t = 0.0;
    while t < t_max {
        let step = dt.min(t_max - t);
        let scale = if step == dt { full } else { step.powf(inv_alpha) };
        x += scale * sample_unit(spec, rng);
        t = if step == dt { t + dt } else { t_max };
        if x <= a || x >= b {
            return Exit { exited: true, tau: t };
        }
    }
    Exit {
        exited: false,
        tau: t_max,
    }
}

/// Exact `P_x(τ_{(a,b)} > t)` for `α = 2` from the Dirichlet eigen-expansion
/// `Σ_{n odd} (4/(nπ)) sin(nπ(x-a)/L) e^{-(nπ/L)^2 t}`.
pub fn brownian_survival(interval: (f64, f64), x: f64, t: f64) -> Result<f64> {
    let (a, b) = interval;
    ensure(a < b, || format!("empty interval ({a}, {b})"))?;
    ensure(t > 0.0, || format!("t must be positive, got {t}"))?;
    if x <= a || x >= b {
        return Ok(0.0);
    }
    let l = b - a;
    let mut sum = 0.0f64;
    let mut n = 1u64;
    loop {
        let k = n as f64 * PI / l;
        let decay = (-k * k * t).exp();
        // remaining terms are bounded by the geometric tail of `decay`
        if decay < 1e-18 * sum.abs().max(1e-300) || decay == 0.0 {
            break;
        }
        sum += 4.0 / (n as f64 * PI) * (k * (x - a)).sin() * decay;
        n += 2;
    }
    Ok(sum.clamp(0.0, 1.0))
}

/// `E[sup_{s≤1} Z_s]` for the symmetric α-stable process, `α ∈ (1, 2]`:
/// `α Γ(1 - 1/α) / π` (from Spitzer's identity; `2/√π` at `α = 2`).
pub fn sup_constant_exact(alpha: f64) -> Result<f64> {
    ensure(alpha > 1.0 && alpha <= 2.0, || {
        format!("running-supremum mean is finite only for alpha in (1, 2], got {alpha}")
    })?;
    Ok(alpha * gamma(1.0 - 1.0 / alpha) / PI)
}

/// Frozen reference run of [`estimate_sup_constant`] at `α = 1.5`:
/// `10^6` paths, `10^4` steps, seed `20240601`. The 95% half-width is
/// [`SUP_PIN_ALPHA_1_5_CI`]. The supremum has infinite variance at this
/// index, so the interval is indicative only; the exact value is 1.27910.
pub const SUP_PIN_ALPHA_1_5: f64 = 1.270_501_750_253_669_3;
pub const SUP_PIN_ALPHA_1_5_CI: f64 = 0.015_719_195_707_819_114;

/// Monte Carlo estimate of `E[sup_{s≤1} Z_s]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupEstimate {
    pub mean: f64,
    /// Half-width of the 95% confidence interval (sampling error only; the
    /// grid maximum is biased low by an amount decreasing in `n_steps`).
    pub ci_half_width: f64,
    pub n_paths: usize,
    pub n_steps: usize,
}

/// Average of the grid maxima of `n_paths` walks with `n_steps` steps on `[0,1]`.
pub fn estimate_sup_constant(
    alpha: f64,
    n_paths: usize,
    n_steps: usize,
    seed: u64,
) -> Result<SupEstimate> {
    let spec = StableSpec::new(alpha)?;
    ensure(alpha > 1.0, || {
        format!("running-supremum mean needs alpha in (1, 2], got {alpha}")
    })?;
    ensure(n_paths >= 2 && n_steps >= 1, || "need n_paths >= 2 and n_steps >= 1".into())?;
    let scale = (1.0 / n_steps as f64).powf(1.0 / alpha);
    let blocks = crate::rng::blocked(seed, n_paths, |rng, range| {
        let mut s = 0.0;
        let mut s2 = 0.0;
        for _ in range {
            let mut x = 0.0f64;
            let mut m = 0.0f64;
            for _ in 0..n_steps {
                x += scale * sample_unit(&spec, rng);
                m = m.max(x);
            }
            s += m;
            s2 += m * m;
        }
        (s, s2)
    });
    let (s, s2) = blocks
        .into_iter()
        .fold((0.0, 0.0), |acc, b| (acc.0 + b.0, acc.1 + b.1));
    let n = n_paths as f64;
    let mean = s / n;
    let var = (s2 / n - mean * mean).max(0.0) * n / (n - 1.0);
    Ok(SupEstimate {
        mean,
        ci_half_width: 1.96 * (var / n).sqrt(),
        n_paths,
        n_steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn validation() {
        assert!(StableSpec::new(0.0).is_err());
        assert!(StableSpec::new(2.1).is_err());
        assert!(StableSpec::new(2.0).is_ok());
        let s = StableSpec::new(1.5).unwrap();
        assert!(sample_increment(&s, 0.0, &mut stream(1, 0)).is_err());
        assert!(simulate_exit(&s, (0.0, 1.0), 1.0, 0.1, 1.0, &mut stream(1, 0)).is_err());
    }

    #[test]
    fn exact_sup_constant() {
        let two = sup_constant_exact(2.0).unwrap();
        assert!((two - 2.0 / PI.sqrt()).abs() < 1e-14);
        assert!((sup_constant_exact(1.5).unwrap() - 1.279_1).abs() < 1e-4);
        assert!(sup_constant_exact(1.0).is_err());
    }

    #[test]
    fn survival_series() {
        // symmetric about the midpoint, decreasing in t, → 1 as t → 0
        let i = (0.0, PI);
        let mid = brownian_survival(i, PI / 2.0, 0.2).unwrap();
        let off = brownian_survival(i, 0.3, 0.2).unwrap();
        assert!(off < mid);
        assert!((brownian_survival(i, PI - 0.3, 0.2).unwrap() - off).abs() < 1e-14);
        assert!(brownian_survival(i, PI / 2.0, 1e-4).unwrap() > 1.0 - 1e-12);
        assert!(brownian_survival(i, PI / 2.0, 0.5).unwrap() < mid);
    }

    #[test]
    fn exit_at_boundary_is_immediate() {
        // a walk started at the boundary survives n steps with probability
        // ~ 1/sqrt(πn), so at dt = 1e-7 it is out well before t = 1e-3
        for alpha in [0.5, 1.0, 1.5, 2.0] {
            let s = StableSpec::new(alpha).unwrap();
            let mut rng = stream(5, 0);
            let mut quick = 0;
            for _ in 0..200 {
                let e = simulate_exit(&s, (0.0, 1.0), 1.0 - 1e-12, 1e-7, 1e-3, &mut rng).unwrap();
                if e.exited {
                    quick += 1;
                }
            }
            assert!(quick >= 194, "alpha={alpha}: {quick}");
        }
    }

    #[test]
    fn last_step_lands_on_t_max() {
        let s = StableSpec::new(2.0).unwrap();
        let e = simulate_exit(&s, (-1e9, 1e9), 0.0, 0.3, 1.0, &mut stream(2, 0)).unwrap();
        assert!(!e.exited);
        assert_eq!(e.tau, 1.0);
        let e = simulate_exit(&s, (-1.0, 1.0), 0.0, 0.1, 0.0, &mut stream(2, 0)).unwrap();
        assert!(!e.exited);
    }
}
