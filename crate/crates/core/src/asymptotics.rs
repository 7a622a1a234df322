//! Closed-form leading terms of the heat-content asymptotics and the
//! numerical functionals of `E_t` that back them.

use std::f64::consts::PI;

use crate::error::{ensure, Error, Result};
use crate::quad::{tanh_sinh, Quad};
use crate::special_fn::gamma;
use crate::spectral::{weighted_series, EigenSystem, IntervalDomain, SeriesOptions, SeriesValue};
use crate::subordinator::{
    expected_functional, ln_kanter, sample_stable_unit, FunctionalOptions, LaplaceExponentSpec,
};

const INV_E: f64 = 0.367_879_441_171_442_33;

/// Which of the three small-time laws applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `α ∈ (1, 2)`
    Supercritical,
    /// `α = 1`
    Critical,
    /// `α ∈ (0, 1)`
    Subcritical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeTag {
    pub alpha: f64,
    pub regime: Regime,
}

impl RegimeTag {
    pub fn new(alpha: f64) -> Result<Self> {
        ensure(alpha > 0.0 && alpha < 2.0, || {
            format!("small-time law needs alpha in (0, 2), got {alpha}")
        })?;
        let regime = if alpha > 1.0 {
            Regime::Supercritical
        } else if alpha == 1.0 {
            Regime::Critical
        } else {
            Regime::Subcritical
        };
        Ok(Self { alpha, regime })
    }
}

/// Geometric data entering the small-time constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryInput {
    pub dimension: usize,
    /// `|Ω|`
    pub volume: f64,
    /// `|∂Ω|`
    pub boundary: f64,
    /// `Per_α(Ω)`; required for subcritical `α` when `d ≥ 2`.
    pub frac_perimeter: Option<f64>,
    interval_length: Option<f64>,
}

impl GeometryInput {
    pub fn new(dimension: usize, volume: f64, boundary: f64, frac_perimeter: Option<f64>) -> Result<Self> {
        ensure(dimension >= 1, || "dimension must be at least 1".into())?;
        ensure(volume > 0.0 && boundary > 0.0, || {
            format!("volume and boundary measure must be positive, got {volume}, {boundary}")
        })?;
        if let Some(p) = frac_perimeter {
            ensure(p > 0.0, || format!("fractional perimeter must be positive, got {p}"))?;
        }
        Ok(Self {
            dimension,
            volume,
            boundary,
            frac_perimeter,
            interval_length: None,
        })
    }

    /// An interval: `|∂Ω| = 2` and `Per_α` available in closed form.
    pub fn interval(domain: &IntervalDomain) -> Self {
        Self {
            dimension: 1,
            volume: domain.length(),
            boundary: domain.boundary_measure(),
            frac_perimeter: None,
            interval_length: Some(domain.length()),
        }
    }

    fn per_alpha(&self, alpha: f64) -> Result<f64> {
        if let Some(p) = self.frac_perimeter {
            return Ok(p);
        }
        match self.interval_length {
            Some(l) => frac_perimeter_interval(alpha, l),
            None => Err(Error::MissingInput(
                "fractional perimeter is required for alpha < 1 in dimension >= 2".into(),
            )),
        }
    }
}

/// `f_α(t)`: `t^{1/α}` for `α > 1`, `t ln(1/t)` for `α = 1`, `t` for `α < 1`.
pub fn f_alpha_eval(alpha: f64, t: f64) -> Result<f64> {
    let tag = RegimeTag::new(alpha)?;
    ensure(t > 0.0, || format!("f_alpha: t must be positive, got {t}"))?;
    Ok(match tag.regime {
        Regime::Supercritical => t.powf(1.0 / alpha),
        Regime::Critical => {
            ensure(t < 1.0, || format!("f_1 needs t in (0, 1), got {t}"))?;
            -t * t.ln()
        }
        Regime::Subcritical => t,
    })
}

/// `c(1, α) = α 2^{α-1} Γ((1+α)/2) / (√π Γ(1-α/2))`, the constant for
/// which the jump kernel `c|x-y|^{-1-α}` generates `-(-Δ)^{α/2}` on ℝ.
pub fn frac_perimeter_constant(alpha: f64) -> f64 {
    alpha * 2f64.powf(alpha - 1.0) * gamma((1.0 + alpha) / 2.0) / (PI.sqrt() * gamma(1.0 - alpha / 2.0))
}

/// `Per_α((0, L)) = c(1,α) · 2 L^{1-α} / (α(1-α))`.
pub fn frac_perimeter_interval(alpha: f64, length: f64) -> Result<f64> {
    ensure(alpha > 0.0 && alpha < 1.0, || {
        format!("fractional perimeter needs alpha in (0, 1), got {alpha}")
    })?;
    ensure(length > 0.0, || format!("length must be positive, got {length}"))?;
    Ok(frac_perimeter_constant(alpha) * 2.0 * length.powf(1.0 - alpha) / (alpha * (1.0 - alpha)))
}

/// `∫_Ω ∫_{Ω^c} c(1,α) |x-y|^{-1-α} dy dx` with the inner integral in closed
/// form, `(x-a)^{-α}/α + (b-x)^{-α}/α`, and the outer one by tanh-sinh over
/// each half of the interval (singular endpoint at the left of each piece).
pub fn frac_perimeter_numeric(domain: &IntervalDomain, alpha: f64, tol: f64) -> Result<Quad> {
    ensure(alpha > 0.0 && alpha < 1.0, || {
        format!("fractional perimeter needs alpha in (0, 1), got {alpha}")
    })?;
    let l = domain.length();
    let half = 0.5 * l;
    // by symmetry both halves contribute the same; x is the distance to the nearer end
    let q = tanh_sinh(|x| (x.powf(-alpha) + (l - x).powf(-alpha)) / alpha, 0.0, half, tol)?;
    let c = frac_perimeter_constant(alpha);
    Ok(Quad {
        value: 2.0 * c * q.value,
        error: 2.0 * c * q.error,
        evals: q.evals,
    })
}

/// `c_α`: `E[Z̄_1] |∂Ω|`, `|∂Ω|/π` or `Per_α(Ω)` by regime.
pub fn c_alpha_eval(tag: &RegimeTag, geometry: &GeometryInput, sup_constant: Option<f64>) -> Result<f64> {
    match tag.regime {
        Regime::Supercritical => {
            let s = sup_constant.ok_or_else(|| {
                Error::MissingInput("running-supremum constant is required for alpha in (1, 2)".into())
            })?;
            ensure(s > 0.0, || format!("running-supremum constant must be positive, got {s}"))?;
            Ok(s * geometry.boundary)
        }
        Regime::Critical => Ok(geometry.boundary / PI),
        Regime::Subcritical => geometry.per_alpha(tag.alpha),
    }
}

/// `Σ_n m_n² / (λ_n Γ(1-β))`, the large-time constant.
pub fn large_time_constant(eig: &EigenSystem, beta: f64, opts: &SeriesOptions) -> Result<SeriesValue> {
    ensure((0.0..1.0).contains(&beta), || format!("beta must lie in [0, 1), got {beta}"))?;
    // weighted_series needs w ≤ 1, so sum λ_1/λ_n and rescale
    let l1 = eig.lambda1();
    let s = weighted_series(eig, |l| Ok(l1 / l), opts)?;
    let scale = 1.0 / (l1 * gamma(1.0 - beta));
    Ok(SeriesValue {
        value: s.value * scale,
        tail_bound: s.tail_bound * scale,
        terms: s.terms,
    })
}

/// `φ(1/t) Σ_n m_n² / (λ_n Γ(1-β))` with `β` the index of `φ` at `0+`.
pub fn large_time_asymptote(eig: &EigenSystem, spec: &LaplaceExponentSpec, t: f64) -> Result<f64> {
    ensure(t > 0.0, || format!("t must be positive, got {t}"))?;
    let c = large_time_constant(eig, spec.index_at_zero(), &SeriesOptions::default())?;
    Ok(spec.phi(1.0 / t)? * c.value)
}

/// `Γ(p+1)/Γ(pβ+1) · φ(1/t)^{-p}`, the small-time law of `E[E_t^p]`
/// (exact for the stable exponent).
pub fn moment_asymptote(p: f64, spec: &LaplaceExponentSpec, t: f64) -> Result<f64> {
    ensure(p > 0.0, || format!("moment order must be positive, got {p}"))?;
    ensure(t > 0.0, || format!("t must be positive, got {t}"))?;
    let beta = spec.index_at_infinity();
    Ok(gamma(p + 1.0) / gamma(p * beta + 1.0) * spec.phi(1.0 / t)?.powf(-p))
}

/// `φ(1/t)^{-1} ln φ(1/t) / Γ(1+β)`, the small-time law of `E[E_t ln(1/E_t)]`.
pub fn xlog_asymptote(spec: &LaplaceExponentSpec, t: f64) -> Result<f64> {
    ensure(t > 0.0, || format!("t must be positive, got {t}"))?;
    let p = spec.phi(1.0 / t)?;
    ensure(p > 1.0, || format!("log factor ln phi(1/t) = {} is not positive", p.ln()))?;
    Ok(p.ln() / (p * gamma(1.0 + spec.index_at_infinity())))
}

/// Leading term of `|Ω| - Q^{Y∘E}(t)` as `t → 0`:
///
/// - `α ∈ (1,2)`: `E[Z̄_1]|∂Ω| · Γ(1+1/α)/Γ(1+β/α) · φ(1/t)^{-1/α}`
/// - `α = 1`: `|∂Ω|/(πΓ(1+β)) · φ(1/t)^{-1} ln φ(1/t)`
/// - `α ∈ (0,1)`: `Per_α(Ω)/Γ(1+β) · φ(1/t)^{-1}`
pub fn small_time_asymptote(
    alpha: f64,
    spec: &LaplaceExponentSpec,
    geometry: &GeometryInput,
    t: f64,
    sup_constant: Option<f64>,
) -> Result<f64> {
    let tag = RegimeTag::new(alpha)?;
    let c = c_alpha_eval(&tag, geometry, sup_constant)?;
    let law = match tag.regime {
        Regime::Supercritical => moment_asymptote(1.0 / alpha, spec, t)?,
        Regime::Critical => xlog_asymptote(spec, t)?,
        Regime::Subcritical => moment_asymptote(1.0, spec, t)?,
    };
    Ok(c * law)
}

/// `-φ(λ_1)`: `ln Q^{Y∘D}(t) / t` as `t → ∞`.
pub fn subordinate_log_rate(spec: &LaplaceExponentSpec, lambda1: f64) -> Result<f64> {
    ensure(lambda1 > 0.0, || format!("lambda1 must be positive, got {lambda1}"))?;
    Ok(-spec.phi(lambda1)?)
}

/// `x ln(1/x)` on `(0, 1/e]`, `1/e` beyond; `0` at `0`.
pub fn v_monotone(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x <= INV_E {
        -x * x.ln()
    } else {
        INV_E
    }
}

fn xlog(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.ln()
    }
}

fn functional(beta: f64, t: f64, g: impl Fn(f64) -> f64, breakpoints: Vec<f64>) -> Result<Quad> {
    let opts = FunctionalOptions {
        tolerance: 1e-13,
        breakpoints,
    };
    expected_functional(beta, t, g, &opts)
}

/// `E[V(E_t)]` for the inverse `β`-stable subordinator.
pub fn expected_v(beta: f64, t: f64) -> Result<Quad> {
    functional(beta, t, v_monotone, vec![INV_E])
}

/// `E[E_t ln(1/E_t)]` for the inverse `β`-stable subordinator.
pub fn expected_xlog(beta: f64, t: f64) -> Result<Quad> {
    functional(beta, t, xlog, vec![1.0])
}

/// Both sides of
/// `E[E ln(1/E)] = E[V(E)] - e^{-1} P(E ≥ 1/e) + E[E ln(1/E); E ≥ 1/e]`.
pub fn xlog_decomposition(beta: f64, t: f64) -> Result<(f64, f64)> {
    let lhs = expected_xlog(beta, t)?.value;
    let v = expected_v(beta, t)?.value;
    let tail = functional(beta, t, |x| if x >= INV_E { 1.0 } else { 0.0 }, vec![INV_E])?.value;
    let upper = functional(beta, t, |x| if x >= INV_E { xlog(x) } else { 0.0 }, vec![INV_E, 1.0])?.value;
    Ok((lhs, v - INV_E * tail + upper))
}

/// `E[f_α(E_t); E_t ≤ δ]` for the inverse `β`-stable subordinator.
pub fn truncated_f_alpha(alpha: f64, beta: f64, t: f64, delta: f64) -> Result<f64> {
    let tag = RegimeTag::new(alpha)?;
    ensure(delta > 0.0, || format!("delta must be positive, got {delta}"))?;
    ensure(tag.regime != Regime::Critical || delta <= 1.0, || {
        "the alpha = 1 rate needs delta <= 1".into()
    })?;
    let f = move |x: f64| -> f64 {
        if x > delta || x <= 0.0 {
            0.0
        } else {
            match tag.regime {
                Regime::Supercritical => x.powf(1.0 / alpha),
                Regime::Critical => xlog(x),
                Regime::Subcritical => x,
            }
        }
    };
    Ok(functional(beta, t, f, vec![delta])?.value)
}

/// `P(E_t > δ)` for the inverse `β`-stable subordinator.
///
/// `E_t > δ` iff `D_1 < ε = t δ^{-1/β}`, and Kanter's representation gives
/// `P(D_1 < ε) = (1/π) ∫_0^π exp(-A(u) ε^{-β/(1-β)}) du`.
pub fn tail_probability(beta: f64, t: f64, delta: f64) -> Result<f64> {
    ensure(beta > 0.0 && beta < 1.0, || format!("beta must lie in (0, 1), got {beta}"))?;
    ensure(t > 0.0 && delta > 0.0, || format!("t and delta must be positive, got {t}, {delta}"))?;
    let ln_scale = -(beta / (1.0 - beta)) * (t.ln() - delta.ln() / beta);
    let q = tanh_sinh(
        |u| (-(ln_kanter(beta, u) + ln_scale).exp()).exp(),
        0.0,
        PI,
        1e-13,
    )?;
    Ok(q.value / PI)
}

/// `E[f_α(E_t); E_t ≤ δ_1] / E[f_α(E_t); E_t ≤ δ_2]`; tends to 1 as `t → 0`.
pub fn truncation_ratio(alpha: f64, beta: f64, t: f64, delta1: f64, delta2: f64) -> Result<f64> {
    Ok(truncated_f_alpha(alpha, beta, t, delta1)? / truncated_f_alpha(alpha, beta, t, delta2)?)
}

/// `P(E_t > δ) / E[f_α(E_t); E_t ≤ δ]`; tends to 0 as `t → 0`.
pub fn tail_to_rate_ratio(alpha: f64, beta: f64, t: f64, delta: f64) -> Result<f64> {
    Ok(tail_probability(beta, t, delta)? / truncated_f_alpha(alpha, beta, t, delta)?)
}

/// Least-squares fit of `ln y = intercept + slope · ln x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Standard error of the slope; `NaN` with two points.
    pub slope_se: f64,
    pub n: usize,
    /// Fewer than three points: the slope is a finite difference.
    pub low_confidence: bool,
}

pub fn fit_loglog(points: &[(f64, f64)]) -> Result<LogLogFit> {
    ensure(points.len() >= 2, || format!("need at least two points, got {}", points.len()))?;
    for &(x, y) in points {
        ensure(x > 0.0 && y > 0.0, || format!("log-log fit needs positive data, got ({x}, {y})"))?;
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let (slope, intercept, r_squared, slope_se) = ols(&[(xs, ys)]);
    Ok(LogLogFit {
        slope,
        intercept: intercept[0],
        r_squared,
        slope_se,
        n: points.len(),
        low_confidence: points.len() < 3,
    })
}

/// Common-slope regression over groups with their own intercepts.
fn ols(groups: &[(Vec<f64>, Vec<f64>)]) -> (f64, Vec<f64>, f64, f64) {
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    let mut n = 0usize;
    let mut means = Vec::new();
    for (xs, ys) in groups {
        let k = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / k;
        let my = ys.iter().sum::<f64>() / k;
        for (x, y) in xs.iter().zip(ys) {
            sxx += (x - mx) * (x - mx);
            sxy += (x - mx) * (y - my);
            syy += (y - my) * (y - my);
        }
        n += xs.len();
        means.push((mx, my));
    }
    let slope = sxy / sxx;
    let intercepts = means.iter().map(|(mx, my)| my - slope * mx).collect();
    let ssr = (syy - slope * sxy).max(0.0);
    let r2 = if syy > 0.0 { 1.0 - ssr / syy } else { 1.0 };
    let dof = n as f64 - groups.len() as f64 - 1.0;
    let se = if dof > 0.0 { (ssr / dof / sxx).sqrt() } else { f64::NAN };
    (slope, intercepts, r2, se)
}

/// One tail estimate of the probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailPoint {
    pub delta: f64,
    pub t: f64,
    pub probability: f64,
    pub hits: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailFit {
    /// Fitted exponent of `-ln P(E_t > δ)` against `t`; `-β/(1-β)` in theory.
    pub slope: f64,
    pub slope_se: f64,
    pub r_squared: f64,
    pub points: Vec<TailPoint>,
}

/// Minimum number of tail hits for a point to enter the fit.
pub const MIN_TAIL_HITS: u64 = 10;

/// Regress `ln(-ln P(E_t > δ))` on `ln t` with one intercept per `δ`.
///
/// `P(E_t > δ) = P(D_1 < t δ^{-1/β})`, so one stream of `D_1` samples is
/// binned against every `(δ, t)` cut at once (common random numbers).
pub fn tail_decay_probe(
    beta: f64,
    deltas: &[f64],
    t_grid: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<TailFit> {
    ensure(beta > 0.0 && beta < 1.0, || format!("beta must lie in (0, 1), got {beta}"))?;
    ensure(!deltas.is_empty() && !t_grid.is_empty(), || "empty delta or t grid".into())?;
    ensure(deltas.iter().chain(t_grid).all(|&v| v > 0.0), || {
        "deltas and times must be positive".into()
    })?;
    ensure(n_samples >= 1, || "n_samples must be at least 1".into())?;
    // P(E_t > δ) = P(D_1 < t δ^{-1/β}): count samples below each cut
    let mut cuts: Vec<(f64, usize, usize)> = Vec::new();
    for (i, &delta) in deltas.iter().enumerate() {
        for (j, &t) in t_grid.iter().enumerate() {
            cuts.push((t * delta.powf(-1.0 / beta), i, j));
        }
    }
    cuts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let levels: Vec<f64> = cuts.iter().map(|c| c.0).collect();
    let per_block = crate::rng::blocked(seed, n_samples, |rng, range| {
        let mut hist = vec![0u64; levels.len() + 1];
        for _ in range {
            let d = sample_stable_unit(beta, rng);
            hist[levels.partition_point(|&c| c <= d)] += 1;
        }
        hist
    });
    let mut hist = vec![0u64; levels.len() + 1];
    for h in per_block {
        for (a, b) in hist.iter_mut().zip(h) {
            *a += b;
        }
    }
    // hits below cut k = samples in buckets 0..=k
    let mut hits = vec![vec![0u64; t_grid.len()]; deltas.len()];
    let mut below = 0u64;
    for (k, &(_, i, j)) in cuts.iter().enumerate() {
        below += hist[k];
        hits[i][j] = below;
    }
    let n = n_samples as f64;
    let mut points = Vec::new();
    let mut groups = Vec::new();
    for (i, &delta) in deltas.iter().enumerate() {
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for (j, &t) in t_grid.iter().enumerate() {
            let h = hits[i][j];
            let p = h as f64 / n;
            points.push(TailPoint {
                delta,
                t,
                probability: p,
                hits: h,
            });
            if h >= MIN_TAIL_HITS && h < n_samples as u64 {
                xs.push(t.ln());
                ys.push((-p.ln()).ln());
            }
        }
        if xs.len() >= 2 {
            groups.push((xs, ys));
        }
    }
    if groups.is_empty() {
        return Err(Error::UnresolvedTail(format!(
            "no delta has two grid points with at least {MIN_TAIL_HITS} of {n_samples} tail hits"
        )));
    }
    let (slope, _, r_squared, slope_se) = ols(&groups);
    Ok(TailFit {
        slope,
        slope_se,
        r_squared,
        points,
    })
}

/// Times at which `-ln P(E_t > δ)` is roughly `level`, from the small-ball
/// law `-ln P(D_1 < ε) ≈ (1-β) β^{β/(1-β)} ε^{-β/(1-β)}`.
pub fn tail_grid(beta: f64, delta: f64, levels: &[f64]) -> Vec<f64> {
    let gamma_exp = beta / (1.0 - beta);
    let k = (1.0 - beta) * beta.powf(gamma_exp);
    levels
        .iter()
        .map(|&lev| (k / lev).powf(1.0 / gamma_exp) * delta.powf(1.0 / beta))
        .collect()
}
