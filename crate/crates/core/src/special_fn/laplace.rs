//! Gaver–Stehfest numerical Laplace inversion.
//!
//! `f(t) ≈ (ln 2 / t) Σ_{k=1}^{N} V_k F(k ln 2 / t)` with the Stehfest
//! weights `V_k`. The weights alternate in sign and grow like `10^{0.45 N}`,
//! so both the weights and the transform values are carried in extended
//! precision (roughly `3.7 N` bits plus a guard) and only the final sum is
//! rounded to `f64`. The nodes `k ln 2 / t` do not depend on `N`, so an
//! adaptive run that doubles the order reuses every transform value.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::ext::{to_f64, Ext, ExtCtx};
use crate::error::{ensure, Error, Result};

/// A Laplace transform `F(s)`, `s > 0`, of a bounded function on `(0, ∞)`.
pub trait Transform {
    /// `F(s)` evaluated in the working precision of `ctx`.
    fn eval_ext(&self, s: &Ext, ctx: &mut ExtCtx) -> Ext;

    /// Interval of `s` on which the evaluator is finite.
    fn domain(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
}

/// A transform given by an `f64` evaluator.
///
/// Only the transform values are in double precision; weights and
/// accumulation stay extended. Usable up to order ~16 before rounding in `F`
/// dominates, which the adaptive driver reports as ill-conditioning.
pub struct TransformFunction<F> {
    pub eval: F,
    pub domain: (f64, f64),
}

impl<F: Fn(f64) -> f64> TransformFunction<F> {
    pub fn new(eval: F) -> Self {
        Self {
            eval,
            domain: (0.0, f64::INFINITY),
        }
    }
}

impl<F: Fn(f64) -> f64> Transform for TransformFunction<F> {
    fn eval_ext(&self, s: &Ext, ctx: &mut ExtCtx) -> Ext {
        ctx.num((self.eval)(to_f64(s)))
    }

    fn domain(&self) -> (f64, f64) {
        self.domain
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionOptions {
    pub start_order: usize,
    pub max_order: usize,
    /// Accept when two consecutive orders agree to this tolerance, measured
    /// relative to `max(|f|, abs_floor)`.
    pub tolerance: f64,
    pub abs_floor: f64,
}

impl Default for InversionOptions {
    fn default() -> Self {
        Self {
            start_order: 8,
            max_order: 64,
            tolerance: 1e-9,
            abs_floor: 1e-300,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inversion {
    pub value: f64,
    /// Order of the returned value.
    pub order: usize,
    /// Disagreement with the previous order.
    pub gap: f64,
}

/// Working precision, in bits, adequate for Stehfest order `n`.
pub fn precision_for(order: usize) -> usize {
    (4 * order + 64).max(128)
}

type WeightCache = Mutex<HashMap<(usize, usize), Arc<Vec<Ext>>>>;

/// Stehfest weights `V_1..V_N` at `prec` bits; `N` must be even.
pub fn stehfest_weights(order: usize, prec: usize) -> Arc<Vec<Ext>> {
    static CACHE: OnceLock<WeightCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(w) = cache.lock().unwrap().get(&(order, prec)) {
        return Arc::clone(w);
    }
    let w = Arc::new(compute_weights(order, prec));
    cache
        .lock()
        .unwrap()
        .insert((order, prec), Arc::clone(&w));
    w
}

fn compute_weights(order: usize, prec: usize) -> Vec<Ext> {
    assert!(order >= 2 && order % 2 == 0, "Stehfest order must be even");
    let ctx = ExtCtx::new(prec);
    let half = order / 2;
    let mut fact = vec![ctx.num(1.0)];
    for i in 1..=order {
        let next = ctx.mul(&fact[i - 1], &ctx.num(i as f64));
        fact.push(next);
    }
    let mut out = Vec::with_capacity(order);
    for k in 1..=order {
        let mut acc = ctx.num(0.0);
        for j in (k + 1) / 2..=k.min(half) {
            // j^M (2j)! / ((M-j)! j! (j-1)! (k-j)! (2j-k)!)
            let mut num = ctx.num(1.0);
            let jj = ctx.num(j as f64);
            for _ in 0..half {
                num = ctx.mul(&num, &jj);
            }
            num = ctx.mul(&num, &fact[2 * j]);
            let mut den = ctx.mul(&fact[half - j], &fact[j]);
            den = ctx.mul(&den, &fact[j - 1]);
            den = ctx.mul(&den, &fact[k - j]);
            den = ctx.mul(&den, &fact[2 * j - k]);
            acc = ctx.add(&acc, &ctx.div(&num, &den));
        }
        if (k + half) % 2 == 1 {
            acc = acc.neg();
        }
        out.push(acc);
    }
    out
}

/// Fixed-order Stehfest value at `t` from memoised node values.
///
/// `node(k)` must return `F(k ln 2 / t)` for `k = 1..=order`.
pub fn stehfest_sum(
    order: usize,
    t: f64,
    ctx: &mut ExtCtx,
    node: &mut dyn FnMut(usize, &mut ExtCtx) -> Ext,
) -> f64 {
    let weights = stehfest_weights(order, ctx.prec);
    let mut acc = ctx.num(0.0);
    for (i, v) in weights.iter().enumerate() {
        let fk = node(i + 1, ctx);
        acc = ctx.add(&acc, &ctx.mul(v, &fk));
    }
    let ln2 = ctx.ln2();
    let scale = ctx.div(&ln2, &ctx.num(t));
    to_f64(&ctx.mul(&acc, &scale))
}

/// Nodes `s_k = k ln 2 / t`, `k = 1..=n`, in extended precision.
pub fn stehfest_nodes(t: f64, n: usize, ctx: &mut ExtCtx) -> Vec<Ext> {
    let ln2 = ctx.ln2();
    let base = ctx.div(&ln2, &ctx.num(t));
    (1..=n).map(|k| ctx.mul(&base, &ctx.num(k as f64))).collect()
}

/// Fixed-order inversion of `f` at `t`.
pub fn stehfest<T: Transform + ?Sized>(f: &T, t: f64, order: usize) -> Result<f64> {
    ensure(t > 0.0 && t.is_finite(), || format!("stehfest: t must be positive, got {t}"))?;
    ensure(order >= 2 && order % 2 == 0, || {
        format!("stehfest: order must be even and >= 2, got {order}")
    })?;
    let mut ctx = ExtCtx::new(precision_for(order));
    let nodes = stehfest_nodes(t, order, &mut ctx);
    Ok(stehfest_sum(order, t, &mut ctx, &mut |k, ctx| {
        f.eval_ext(&nodes[k - 1], ctx)
    }))
}

/// Adaptive driver shared by all inversions: orders `start, 2·start, ...`
/// until two consecutive values agree. `node(k)` returns `F(s_k)` and is
/// called at most once per `k`.
pub fn invert_with_nodes(
    t: f64,
    opts: &InversionOptions,
    ctx: &mut ExtCtx,
    node: &mut dyn FnMut(usize, &mut ExtCtx) -> Ext,
) -> Result<Inversion> {
    ensure(t > 0.0 && t.is_finite(), || format!("laplace_invert: t must be positive, got {t}"))?;
    ensure(
        opts.start_order >= 2 && opts.start_order % 2 == 0 && opts.max_order >= opts.start_order,
        || format!("laplace_invert: bad order range {opts:?}"),
    )?;
    let mut memo: Vec<Option<Ext>> = vec![None; opts.max_order];
    let mut value_at = |order: usize, ctx: &mut ExtCtx| {
        stehfest_sum(order, t, ctx, &mut |k, ctx| {
            memo[k - 1].get_or_insert_with(|| node(k, ctx)).clone()
        })
    };
    let mut order = opts.start_order;
    let mut prev = value_at(order, ctx);
    let mut last_gap = f64::INFINITY;
    while order * 2 <= opts.max_order {
        let next_order = order * 2;
        let cur = value_at(next_order, ctx);
        let gap = (cur - prev).abs();
        let scale = cur.abs().max(opts.abs_floor);
        if gap <= opts.tolerance * scale {
            return Ok(Inversion {
                value: cur,
                order: next_order,
                gap,
            });
        }
        last_gap = gap;
        prev = cur;
        order = next_order;
    }
    Err(Error::IllConditioned {
        t,
        order_lo: order / 2,
        order_hi: order,
        gap: last_gap,
        tolerance: opts.tolerance,
    })
}

/// Adaptive inversion of `f` at `t`.
pub fn laplace_invert<T: Transform + ?Sized>(
    f: &T,
    t: f64,
    opts: &InversionOptions,
) -> Result<Inversion> {
    let mut ctx = ExtCtx::new(precision_for(opts.max_order));
    let nodes = stehfest_nodes(t, opts.max_order, &mut ctx);
    invert_with_nodes(t, opts, &mut ctx, &mut |k, ctx| {
        f.eval_ext(&nodes[k - 1], ctx)
    })
}
