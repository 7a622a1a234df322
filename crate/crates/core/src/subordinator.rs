//! Subordinators, their inverses, and expectations of functionals of the
//! inverse time change `E_t = inf{u > 0 : D_u > t}`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{ensure, Error, Result};
use crate::quad::{exp_sinh, tanh_sinh, Quad};
use crate::special_fn::ext::{Ext, ExtCtx};
use crate::special_fn::laplace::{
    invert_with_nodes, precision_for, stehfest_nodes, InversionOptions, Transform,
};
use crate::special_fn::mittag_leffler;

/// Concrete Laplace-exponent families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kind {
    /// `λ^β`
    Stable { beta: f64 },
    /// `(λ + κ)^β - κ^β`
    TemperedStable { beta: f64, kappa: f64 },
    /// `λ^a + λ^b`
    SumOfStables { a: f64, b: f64 },
    /// `λ`: the identity time change `E_t = t`. Test double.
    Drift,
}

/// Laplace exponent `φ` of a subordinator, `E[e^{-λ D_t}] = e^{-t φ(λ)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceExponentSpec {
    kind: Kind,
    index_at_zero: f64,
    index_at_infinity: f64,
}

impl LaplaceExponentSpec {
    pub fn stable(beta: f64) -> Result<Self> {
        ensure(beta > 0.0 && beta < 1.0, || {
            format!("stable subordinator needs beta in (0,1), got {beta}")
        })?;
        Ok(Self {
            kind: Kind::Stable { beta },
            index_at_zero: beta,
            index_at_infinity: beta,
        })
    }

    pub fn tempered_stable(beta: f64, kappa: f64) -> Result<Self> {
        ensure(beta > 0.0 && beta < 1.0, || {
            format!("tempered stable subordinator needs beta in (0,1), got {beta}")
        })?;
        ensure(kappa > 0.0 && kappa.is_finite(), || {
            format!("tempering parameter must be positive, got {kappa}")
        })?;
        Ok(Self {
            kind: Kind::TemperedStable { beta, kappa },
            index_at_zero: 1.0,
            index_at_infinity: beta,
        })
    }

    /// `λ^a + λ^b` with `0 < a < b ≤ 1`.
    ///
    /// `a = 0` is refused: `λ^0 = 1` would make `φ(0+) = 1`, a killed
    /// subordinator rather than one with `φ(0+) = 0`.
    pub fn sum_of_stables(a: f64, b: f64) -> Result<Self> {
        ensure(a > 0.0 && a < b && b <= 1.0, || {
            format!("sum of stables needs 0 < a < b <= 1, got a={a}, b={b}")
        })?;
        Ok(Self {
            kind: Kind::SumOfStables { a, b },
            index_at_zero: a,
            index_at_infinity: b,
        })
    }

    pub fn drift() -> Self {
        Self {
            kind: Kind::Drift,
            index_at_zero: 1.0,
            index_at_infinity: 1.0,
        }
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    /// Regular-variation index of `φ` at `0+`.
    pub fn index_at_zero(&self) -> f64 {
        self.index_at_zero
    }

    /// Regular-variation index of `φ` at `∞`.
    pub fn index_at_infinity(&self) -> f64 {
        self.index_at_infinity
    }

    /// `φ(λ)` for `λ ≥ 0`.
    pub fn phi(&self, lambda: f64) -> Result<f64> {
        ensure(lambda >= 0.0, || format!("phi: lambda must be >= 0, got {lambda}"))?;
        Ok(self.phi_unchecked(lambda))
    }

    pub(crate) fn phi_unchecked(&self, lambda: f64) -> f64 {
        match self.kind {
            Kind::Stable { beta } => lambda.powf(beta),
            // κ^β ((1 + λ/κ)^β - 1) avoids cancellation for small λ
            Kind::TemperedStable { beta, kappa } => {
                kappa.powf(beta) * (beta * (lambda / kappa).ln_1p()).exp_m1()
            }
            Kind::SumOfStables { a, b } => lambda.powf(a) + lambda.powf(b),
            Kind::Drift => lambda,
        }
    }

    /// `φ(s)` in extended precision, `s > 0`.
    pub fn phi_ext(&self, s: &Ext, ctx: &mut ExtCtx) -> Ext {
        match self.kind {
            Kind::Stable { beta } => ctx.powf(s, beta),
            Kind::TemperedStable { beta, kappa } => {
                let k = ctx.num(kappa);
                let shifted = ctx.add(s, &k);
                let hi = ctx.powf(&shifted, beta);
                let lo = ctx.powf(&k, beta);
                ctx.sub(&hi, &lo)
            }
            Kind::SumOfStables { a, b } => {
                let pa = ctx.powf(s, a);
                let pb = ctx.powf(s, b);
                ctx.add(&pa, &pb)
            }
            Kind::Drift => s.clone(),
        }
    }
}

/// `φ(λ)`; see [`LaplaceExponentSpec::phi`].
pub fn phi_eval(spec: &LaplaceExponentSpec, lambda: f64) -> Result<f64> {
    spec.phi(lambda)
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

/// Cap on rejections per tempered-stable increment.
pub const REJECTION_CAP: u64 = 1_000_000;

fn open01<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.gen();
        if u > 0.0 {
            return u;
        }
    }
}

/// Kanter's factor `A(u)` with `D_1 = (A(U)/W)^{(1-β)/β}`, returned as `ln A(u)`.
pub(crate) fn ln_kanter(beta: f64, u: f64) -> f64 {
    let sb = (beta * u).sin();
    let s1 = ((1.0 - beta) * u).sin();
    let su = u.sin();
    (sb.ln() - su.ln()) / (1.0 - beta) + s1.ln() - sb.ln()
}

/// One-sided `β`-stable variate `D_1` with `E[e^{-λ D_1}] = e^{-λ^β}`
/// (Kanter / Chambers–Mallows–Stuck).
pub fn sample_stable_unit<R: Rng + ?Sized>(beta: f64, rng: &mut R) -> f64 {
    debug_assert!(beta > 0.0 && beta < 1.0);
    let u = PI * open01(rng);
    let w: f64 = Exp1.sample(rng);
    ((ln_kanter(beta, u) - w.ln()) * (1.0 - beta) / beta).exp()
}

/// Increment `D_{u+Δu} - D_u`, exact in distribution.
///
/// Tempered increments come from exponentially tilting stable increments:
/// a stable draw `X` is kept with probability `e^{-κX}`. The acceptance rate
/// is `e^{-Δu κ^β}`, so long increments are split into `m` independent
/// pieces with `Δu κ^β / m ≤ 1` first.
pub fn sample_increment<R: Rng + ?Sized>(
    spec: &LaplaceExponentSpec,
    delta_u: f64,
    rng: &mut R,
) -> Result<f64> {
    ensure(delta_u > 0.0, || format!("increment length must be positive, got {delta_u}"))?;
    Ok(match spec.kind {
        Kind::Stable { beta } => delta_u.powf(1.0 / beta) * sample_stable_unit(beta, rng),
        Kind::TemperedStable { beta, kappa } => {
            let load = delta_u * kappa.powf(beta);
            let pieces = load.ceil().max(1.0) as u64;
            let piece = delta_u / pieces as f64;
            let scale = piece.powf(1.0 / beta);
            let mut total = 0.0;
            for _ in 0..pieces {
                let mut tries = 0u64;
                loop {
                    let x = scale * sample_stable_unit(beta, rng);
                    let u: f64 = rng.gen();
                    if u < (-kappa * x).exp() {
                        total += x;
                        break;
                    }
                    tries += 1;
                    if tries >= REJECTION_CAP {
                        return Err(Error::ResampleCap { cap: REJECTION_CAP });
                    }
                }
            }
            total
        }
        Kind::SumOfStables { a, b } => {
            let pa = delta_u.powf(1.0 / a) * sample_stable_unit(a, rng);
            let pb = if b == 1.0 {
                delta_u
            } else {
                delta_u.powf(1.0 / b) * sample_stable_unit(b, rng)
            };
            pa + pb
        }
        Kind::Drift => delta_u,
    })
}

/// Discretised subordinator path on the operational-time grid `kΔu`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    pub delta_u: f64,
    /// `D_{kΔu}`, `k = 0, 1, ...`; strictly increasing, `values[0] = 0`.
    pub values: Vec<f64>,
    /// Physical time the path was extended past.
    pub horizon: f64,
    pub seed: u64,
}

impl PathSample {
    /// Build from explicit values (e.g. a deterministic test path).
    pub fn from_values(delta_u: f64, values: Vec<f64>) -> Result<Self> {
        ensure(delta_u > 0.0, || "delta_u must be positive".into())?;
        ensure(values.first() == Some(&0.0), || "path must start at 0".into())?;
        ensure(values.windows(2).all(|w| w[1] > w[0]), || {
            "path values must be strictly increasing".into()
        })?;
        let horizon = *values.last().unwrap();
        Ok(Self {
            delta_u,
            values,
            horizon,
            seed: 0,
        })
    }

    pub fn max_value(&self) -> f64 {
        *self.values.last().unwrap()
    }
}

/// Sample `D` on the grid `kΔu` until it first exceeds `horizon`.
pub fn sample_path(
    spec: &LaplaceExponentSpec,
    horizon: f64,
    delta_u: f64,
    seed: u64,
) -> Result<PathSample> {
    let mut rng = crate::rng::stream(seed, 0);
    sample_path_with(spec, horizon, delta_u, seed, &mut rng)
}

pub(crate) fn sample_path_with<R: Rng + ?Sized>(
    spec: &LaplaceExponentSpec,
    horizon: f64,
    delta_u: f64,
    seed: u64,
    rng: &mut R,
) -> Result<PathSample> {
    ensure(horizon > 0.0, || format!("horizon must be positive, got {horizon}"))?;
    ensure(delta_u > 0.0, || format!("delta_u must be positive, got {delta_u}"))?;
    let mut values = vec![0.0];
    let mut d = 0.0;
    while d <= horizon {
        let mut tries = 0;
        let next = loop {
            let next = d + sample_increment(spec, delta_u, rng)?;
            // floating-point ties are resampled
            if next > d {
                break next;
            }
            tries += 1;
            if tries >= REJECTION_CAP {
                return Err(Error::ResampleCap { cap: REJECTION_CAP });
            }
        };
        values.push(next);
        d = next;
    }
    Ok(PathSample {
        delta_u,
        values,
        horizon,
        seed,
    })
}

/// A value of `E_t` known to within `bracket`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseTimeSample {
    pub t: f64,
    pub value: f64,
    pub bracket: f64,
}

/// First passage of the path above `t`: `E_t = kΔu` for the first `k` with
/// `D_{kΔu} > t`.
pub fn inverse_at(path: &PathSample, t: f64) -> Result<InverseTimeSample> {
    ensure(t >= 0.0, || format!("inverse_at: t must be nonnegative, got {t}"))?;
    if t >= path.max_value() {
        return Err(Error::HorizonExceeded {
            t,
            horizon: path.max_value(),
        });
    }
    let k = path.values.partition_point(|&d| d <= t);
    Ok(InverseTimeSample {
        t,
        value: k as f64 * path.delta_u,
        bracket: path.delta_u,
    })
}

/// Exact sample of `E_t` for the inverse `β`-stable subordinator via
/// `E_t = (t / D_1)^β`.
pub fn sample_inverse_stable_exact<R: Rng + ?Sized>(beta: f64, t: f64, rng: &mut R) -> f64 {
    (t / sample_stable_unit(beta, rng)).powf(beta)
}

// ---------------------------------------------------------------------------
// Transforms of E
// ---------------------------------------------------------------------------

/// `L_t[E e^{-a E_t}](s) = φ(s) / (s (φ(s) + a))`.
pub fn lt_inverse_time(spec: &LaplaceExponentSpec, a: f64, s: f64) -> Result<f64> {
    ensure(a > 0.0, || format!("lt_inverse_time: a must be positive, got {a}"))?;
    ensure(s > 0.0, || format!("lt_inverse_time: s must be positive, got {s}"))?;
    let p = spec.phi_unchecked(s);
    Ok(p / (s * (p + a)))
}

/// The transform `s ↦ φ(s)/(s(φ(s)+a))` as an invertible object.
pub struct InverseTimeTransform {
    pub spec: LaplaceExponentSpec,
    pub a: f64,
}

impl Transform for InverseTimeTransform {
    fn eval_ext(&self, s: &Ext, ctx: &mut ExtCtx) -> Ext {
        let p = self.spec.phi_ext(s, ctx);
        let den = ctx.mul(s, &ctx.add(&p, &ctx.num(self.a)));
        ctx.div(&p, &den)
    }
}

/// `a ↦ E[e^{-a E_t}]` at a fixed `t`.
///
/// For non-stable exponents the Stehfest nodes and `φ(s_k)` are computed
/// once and reused for every `a`, which is what makes eigen-series with
/// thousands of terms affordable.
pub struct InverseTimeLaplace {
    spec: LaplaceExponentSpec,
    t: f64,
    opts: InversionOptions,
    nodes: Option<Nodes>,
}

struct Nodes {
    ctx: ExtCtx,
    s: Vec<Ext>,
    phi: Vec<Ext>,
}

impl InverseTimeLaplace {
    /// The value lies in `[0, 1]`, so accuracy is judged against
    /// `max(|v|, 0.1)`: an absolute `10^{-10}` once `v` is tiny. Without the
    /// floor, exponentially small values (finite-mean exponents at large
    /// `t`) never pass a relative test.
    pub fn new(spec: &LaplaceExponentSpec, t: f64) -> Result<Self> {
        let opts = InversionOptions {
            abs_floor: 0.1,
            max_order: 128,
            ..InversionOptions::default()
        };
        Self::with_options(spec, t, opts)
    }

    pub fn with_options(spec: &LaplaceExponentSpec, t: f64, opts: InversionOptions) -> Result<Self> {
        ensure(t > 0.0 && t.is_finite(), || format!("t must be positive, got {t}"))?;
        let nodes = match spec.kind {
            Kind::Stable { .. } | Kind::Drift => None,
            _ => {
                let mut ctx = ExtCtx::new(precision_for(opts.max_order));
                let s = stehfest_nodes(t, opts.max_order, &mut ctx);
                let phi = s.iter().map(|sk| spec.phi_ext(sk, &mut ctx)).collect();
                Some(Nodes { ctx, s, phi })
            }
        };
        Ok(Self {
            spec: *spec,
            t,
            opts,
            nodes,
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// `E[e^{-a E_t}]` for `a > 0`.
    pub fn eval(&mut self, a: f64) -> Result<f64> {
        Ok(self.eval_with_error(a)?.0)
    }

    /// Value and an error estimate: the accepted gap between consecutive
    /// Stehfest orders, or zero for the closed forms.
    pub fn eval_with_error(&mut self, a: f64) -> Result<(f64, f64)> {
        ensure(a > 0.0, || format!("expected_laplace: a must be positive, got {a}"))?;
        match self.spec.kind {
            Kind::Stable { beta } => Ok((mittag_leffler(beta, -a * self.t.powf(beta))?, 0.0)),
            Kind::Drift => Ok(((-a * self.t).exp(), 0.0)),
            _ => {
                let nodes = self.nodes.as_mut().expect("nodes for non-stable exponent");
                let a_ext = nodes.ctx.num(a);
                let Nodes { ctx, s, phi } = nodes;
                let inv = invert_with_nodes(self.t, &self.opts, ctx, &mut |k, ctx| {
                    let p = &phi[k - 1];
                    let den = ctx.mul(&s[k - 1], &ctx.add(p, &a_ext));
                    ctx.div(p, &den)
                })?;
                Ok((inv.value.clamp(0.0, 1.0), inv.gap))
            }
        }
    }
}

/// `E[e^{-a E_t}]`: Mittag-Leffler `E_β(-a t^β)` for the stable exponent,
/// `e^{-at}` for the drift, Laplace inversion otherwise.
pub fn expected_laplace(spec: &LaplaceExponentSpec, a: f64, t: f64) -> Result<f64> {
    InverseTimeLaplace::new(spec, t)?.eval(a)
}

// ---------------------------------------------------------------------------
// E[g(E_t)] for the inverse stable subordinator
// ---------------------------------------------------------------------------

/// Options for [`expected_functional`].
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalOptions {
    /// Absolute/relative tolerance for the inner and outer quadratures.
    pub tolerance: f64,
    /// Points in `E`-space where `g` has a kink or a jump.
    pub breakpoints: Vec<f64>,
}

impl Default for FunctionalOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-12,
            breakpoints: Vec::new(),
        }
    }
}

/// `E[g(E_t)]` for the inverse `β`-stable subordinator.
///
/// With Kanter's representation `E_t = t^β (W / A(U))^{1-β}`, `U ~ U(0,π)`,
/// `W ~ Exp(1)`, the expectation is the smooth double integral
///
/// `(1/π) ∫_0^π ∫_0^∞ g(c(u) w^{1-β}) e^{-w} dw du`, `c(u) = t^β A(u)^{-(1-β)}`,
///
/// evaluated by nested double-exponential quadrature, with the inner
/// integral split wherever `c(u) w^{1-β}` crosses a breakpoint.
pub fn expected_functional<G>(beta: f64, t: f64, g: G, opts: &FunctionalOptions) -> Result<Quad>
where
    G: Fn(f64) -> f64,
{
    ensure(beta > 0.0 && beta < 1.0, || format!("beta must lie in (0,1), got {beta}"))?;
    ensure(t > 0.0 && t.is_finite(), || format!("t must be positive, got {t}"))?;
    let mut bps: Vec<f64> = opts.breakpoints.iter().copied().filter(|&x| x > 0.0).collect();
    bps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let tol = opts.tolerance;
    let expo = 1.0 - beta;
    let ln_t_beta = beta * t.ln();
    let mut inner_err = 0.0f64;
    let mut inner_fail: Option<Error> = None;
    let mut evals = 0usize;

    let outer = tanh_sinh(
        |u| {
            if inner_fail.is_some() {
                return 0.0;
            }
            let ln_c = ln_t_beta - expo * ln_kanter(beta, u);
            let c = ln_c.exp();
            match inner_integral(&g, c, expo, &bps, tol) {
                Ok(q) => {
                    inner_err = inner_err.max(q.error);
                    evals += q.evals;
                    q.value
                }
                Err(e) => {
                    inner_fail = Some(e);
                    0.0
                }
            }
        },
        0.0,
        PI,
        tol,
    )?;
    if let Some(e) = inner_fail {
        return Err(e);
    }
    Ok(Quad {
        value: outer.value / PI,
        error: (outer.error + PI * inner_err) / PI,
        evals: evals + outer.evals,
    })
}

/// `∫_0^∞ g(c w^p) e^{-w} dw`, split at the `w` where `c w^p` hits a breakpoint.
fn inner_integral<G: Fn(f64) -> f64>(
    g: &G,
    c: f64,
    p: f64,
    bps: &[f64],
    tol: f64,
) -> Result<Quad> {
    const W_MAX: f64 = 760.0;
    let f = |w: f64| g(c * w.powf(p)) * (-w).exp();
    let mut cuts: Vec<f64> = bps
        .iter()
        .map(|&x| (x / c).powf(1.0 / p))
        .filter(|&w| w > 0.0 && w < W_MAX)
        .collect();
    cuts.dedup();
    let mut total = Quad {
        value: 0.0,
        error: 0.0,
        evals: 0,
    };
    let mut lo = 0.0;
    for &w in &cuts {
        if w > lo {
            let q = tanh_sinh(f, lo, w, tol)?;
            total.value += q.value;
            total.error += q.error;
            total.evals += q.evals;
            lo = w;
        }
    }
    let q = exp_sinh(f, lo, tol)?;
    total.value += q.value;
    total.error += q.error;
    total.evals += q.evals;
    Ok(total)
}
