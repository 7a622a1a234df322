//! Spectral heat contents `Q^Y(t)`, `Q^{Y∘D}(t)` and `Q^{Y∘E}(t)`.

use rand::Rng;

use crate::error::{ensure, Result};
use crate::spectral::{weighted_series, EigenSystem, IntervalDomain, SeriesOptions, SeriesValue};
use crate::stable_motion::{walk, StableSpec};
use crate::subordinator::{
    sample_increment, sample_inverse_stable_exact, sample_path_with, inverse_at, InverseTimeLaplace,
    Kind, LaplaceExponentSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Series,
    Transform,
    MonteCarlo,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Series => "series",
            Method::Transform => "transform",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatContentValue {
    pub t: f64,
    pub value: f64,
    pub method: Method,
    /// Tail certificate for series, 95% CI half-width for Monte Carlo.
    pub error_bound: f64,
}

impl HeatContentValue {
    fn from_series(t: f64, s: SeriesValue, method: Method) -> Self {
        Self {
            t,
            value: s.value,
            method,
            error_bound: s.tail_bound,
        }
    }
}

fn check_t(t: f64) -> Result<()> {
    ensure(t > 0.0 && t.is_finite(), || format!("t must be positive, got {t}"))
}

/// `Q^Y(t) = Σ e^{-λ_n t} m_n²`.
///
/// Small `t` needs many terms; when the eigen system is too short the tail
/// certificate fails and a truncation error is returned instead of a biased
/// sum.
pub fn q_stable(eig: &EigenSystem, t: f64, opts: &SeriesOptions) -> Result<HeatContentValue> {
    check_t(t)?;
    let s = weighted_series(eig, |l| Ok((-l * t).exp()), opts)?;
    Ok(HeatContentValue::from_series(t, s, Method::Series))
}

/// `Q^{Y∘D}(t) = Σ e^{-t φ(λ_n)} m_n²`.
pub fn q_subordinate(
    eig: &EigenSystem,
    spec: &LaplaceExponentSpec,
    t: f64,
    opts: &SeriesOptions,
) -> Result<HeatContentValue> {
    check_t(t)?;
    let s = weighted_series(eig, |l| Ok((-t * spec.phi(l)?).exp()), opts)?;
    Ok(HeatContentValue::from_series(t, s, Method::Series))
}

/// `Q^{Y∘E}(t) = Σ E[e^{-λ_n E_t}] m_n²`.
pub fn q_time_changed(
    eig: &EigenSystem,
    spec: &LaplaceExponentSpec,
    t: f64,
    opts: &SeriesOptions,
) -> Result<HeatContentValue> {
    check_t(t)?;
    let mut lt = InverseTimeLaplace::new(spec, t)?;
    let mut gap = 0.0f64;
    let s = weighted_series(
        eig,
        |l| {
            let (v, e) = lt.eval_with_error(l)?;
            gap = gap.max(e);
            Ok(v)
        },
        opts,
    )?;
    // inversion errors are at most `gap` per weight, so `gap · mass` in total
    let mut out = HeatContentValue::from_series(t, s, Method::Transform);
    out.error_bound += gap * eig.mass();
    Ok(out)
}

/// Random time at which the outer process is observed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeChange {
    /// `Y_t`
    None,
    /// `Y_{D_t}`; `D_t` drawn exactly as one increment.
    Subordinator(LaplaceExponentSpec),
    /// `Y_{E_t}`; exact for the stable exponent, first passage otherwise.
    Inverse(LaplaceExponentSpec),
}

/// Step used by the exit-time walk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeStep {
    Fixed(f64),
    /// `dt = s / m` for a walk of length `s`: the same number of steps for
    /// every path, so the discretisation bias is scale free.
    Steps(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McOptions {
    pub n_paths: usize,
    pub step: TimeStep,
    /// Operational-time grid for first-passage sampling of `E_t`.
    pub delta_u: f64,
    pub seed: u64,
}

impl McOptions {
    pub fn new(n_paths: usize, step: TimeStep, seed: u64) -> Self {
        Self {
            n_paths,
            step,
            delta_u: 1e-4,
            seed,
        }
    }
}

/// `∫_Ω P_x(τ > S) dx` with `S ∈ {t, D_t, E_t}`, estimated as `|Ω|` times
/// the surviving fraction of walks started uniformly in `Ω`.
pub fn q_monte_carlo(
    alpha: f64,
    domain: &IntervalDomain,
    time_change: &TimeChange,
    t: f64,
    opts: &McOptions,
) -> Result<HeatContentValue> {
    let spec = StableSpec::new(alpha)?;
    ensure(t >= 0.0 && t.is_finite(), || format!("t must be nonnegative, got {t}"))?;
    ensure(opts.n_paths >= 1, || "n_paths must be at least 1".into())?;
    match opts.step {
        TimeStep::Fixed(dt) => ensure(dt > 0.0, || format!("dt must be positive, got {dt}"))?,
        TimeStep::Steps(m) => ensure(m >= 1, || "step count must be at least 1".into())?,
    }
    ensure(opts.delta_u > 0.0, || "delta_u must be positive".into())?;
    let vol = domain.length();
    if t == 0.0 {
        return Ok(HeatContentValue {
            t,
            value: vol,
            method: Method::MonteCarlo,
            error_bound: 0.0,
        });
    }
    let (a, b) = (domain.a(), domain.b());
    let blocks = crate::rng::blocked(opts.seed, opts.n_paths, |rng, range| -> Result<u64> {
        let mut alive = 0u64;
        for _ in range {
            let s = random_time(time_change, t, opts.delta_u, rng)?;
            let x0 = a + (b - a) * open01(rng);
            if s <= 0.0 {
                alive += 1;
                continue;
            }
            let dt = match opts.step {
                TimeStep::Fixed(dt) => dt,
                TimeStep::Steps(m) => s / m as f64,
            };
            if !walk(&spec, a, b, x0, dt, s, rng).exited {
                alive += 1;
            }
        }
        Ok(alive)
    });
    let mut alive = 0u64;
    for b in blocks {
        alive += b?;
    }
    let n = opts.n_paths as f64;
    let p = alive as f64 / n;
    Ok(HeatContentValue {
        t,
        value: vol * p,
        method: Method::MonteCarlo,
        error_bound: 1.96 * vol * (p * (1.0 - p) / n).sqrt(),
    })
}

fn open01<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.gen();
        if u > 0.0 {
            return u;
        }
    }
}

fn random_time<R: Rng + ?Sized>(tc: &TimeChange, t: f64, delta_u: f64, rng: &mut R) -> Result<f64> {
    Ok(match tc {
        TimeChange::None => t,
        TimeChange::Subordinator(spec) => sample_increment(spec, t, rng)?,
        TimeChange::Inverse(spec) => match spec.kind() {
            Kind::Stable { beta } => sample_inverse_stable_exact(beta, t, rng),
            Kind::Drift => t,
            _ => {
                let path = sample_path_with(spec, t, delta_u, 0, rng)?;
                inverse_at(&path, t)?.value
            }
        },
    })
}
