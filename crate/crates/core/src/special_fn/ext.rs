//! Extended-precision helpers on top of `astro-float`.

use astro_float::{BigFloat, Consts, RoundingMode, Sign};

pub use astro_float::BigFloat as Ext;

pub const RM: RoundingMode = RoundingMode::ToEven;

/// Working context: precision in bits plus the constants cache.
pub struct ExtCtx {
    pub prec: usize,
    pub cc: Consts,
}

impl ExtCtx {
    pub fn new(prec: usize) -> Self {
        Self {
            prec,
            cc: Consts::new().expect("astro-float constants cache"),
        }
    }

    pub fn num(&self, x: f64) -> BigFloat {
        if x != 0.0 && x.abs() < f64::MIN_POSITIVE {
            // from_f64 misplaces the exponent of subnormals by one; lift
            // into the normal range and scale back exactly
            let mut b = BigFloat::from_f64(x * pow2(64), self.prec);
            let e = b.exponent().expect("finite nonzero");
            b.set_exponent(e - 64);
            return b;
        }
        BigFloat::from_f64(x, self.prec)
    }

    pub fn add(&self, x: &BigFloat, y: &BigFloat) -> BigFloat {
        x.add(y, self.prec, RM)
    }

    pub fn sub(&self, x: &BigFloat, y: &BigFloat) -> BigFloat {
        x.sub(y, self.prec, RM)
    }

    pub fn mul(&self, x: &BigFloat, y: &BigFloat) -> BigFloat {
        x.mul(y, self.prec, RM)
    }

    pub fn div(&self, x: &BigFloat, y: &BigFloat) -> BigFloat {
        x.div(y, self.prec, RM)
    }

    /// `x^y` for `x > 0`.
    pub fn powf(&mut self, x: &BigFloat, y: f64) -> BigFloat {
        let y = BigFloat::from_f64(y, self.prec);
        x.pow(&y, self.prec, RM, &mut self.cc)
    }

    pub fn ln(&mut self, x: &BigFloat) -> BigFloat {
        x.ln(self.prec, RM, &mut self.cc)
    }

    pub fn ln2(&mut self) -> BigFloat {
        self.cc.ln_2(self.prec, RM)
    }
}

/// Round to the nearest `f64` (within one ulp).
pub fn to_f64(x: &BigFloat) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_inf_pos() {
        return f64::INFINITY;
    }
    if x.is_inf_neg() {
        return f64::NEG_INFINITY;
    }
    if x.is_zero() {
        return 0.0;
    }
    let Some((words, _bits, sign, exponent, _)) = x.as_raw_parts() else {
        return f64::NAN;
    };
    // Normalised mantissa 0.1xxx (binary) stored little-endian in words.
    let top = words[words.len() - 1] as u64;
    let next = if words.len() > 1 {
        words[words.len() - 2] as u64
    } else {
        0
    };
    let m = top as f64 + next as f64 * pow2(-64);
    let e = exponent as i32 - 64;
    let mag = scale_pow2(m, e);
    if sign == Sign::Neg {
        -mag
    } else {
        mag
    }
}

/// Exact `2^e` for `e` in the normal range.
fn pow2(e: i32) -> f64 {
    debug_assert!((-1022..=1023).contains(&e));
    f64::from_bits(((e + 1023) as u64) << 52)
}

/// `m · 2^e` with a single rounding (`powi` is not exact near the
/// subnormal range once optimised).
fn scale_pow2(mut m: f64, mut e: i32) -> f64 {
    while e > 1023 {
        m *= pow2(1023);
        e -= 1023;
    }
    if e >= -1022 {
        return m * pow2(e);
    }
    // m·2^{e+1022} is exact for normal m; the final product rounds once
    while e < -1022 - 1022 {
        m *= pow2(-1022);
        e += 1022;
    }
    m * pow2(e + 1022) * pow2(-1022)
}
