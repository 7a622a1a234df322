//! Domains, Dirichlet eigen systems and certified eigen-series.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{ensure, Error, Result};

/// Bounded open interval `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalDomain {
    a: f64,
    b: f64,
}

impl IntervalDomain {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        ensure(a.is_finite() && b.is_finite() && a < b, || {
            format!("interval needs finite a < b, got ({a}, {b})")
        })?;
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// `|Ω|`
    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    /// `|∂Ω|`: two endpoints.
    pub fn boundary_measure(&self) -> f64 {
        2.0
    }
}

/// Eigenvalues `λ_n` and squared masses `m_n² = (∫_Ω ψ_n)^2`, truncated at
/// `N` terms, together with the total mass `|Ω| = Σ_n m_n²`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    lambda: Vec<f64>,
    m_sq: Vec<f64>,
    mass: f64,
    /// Σ_{n≤N} m_n², accumulated once at construction.
    partial_mass: f64,
}

// rounding slack when comparing partial sums with the declared mass
const MASS_SLACK: f64 = 1e-12;

impl EigenSystem {
    pub fn new(pairs: Vec<(f64, f64)>, mass: f64) -> Result<Self> {
        ensure(!pairs.is_empty(), || "eigen system is empty".into())?;
        ensure(mass > 0.0 && mass.is_finite(), || {
            format!("declared mass must be positive, got {mass}")
        })?;
        let mut prev = 0.0;
        for (i, &(l, m)) in pairs.iter().enumerate() {
            ensure(l.is_finite() && l > 0.0, || {
                format!("eigenvalue #{} must be positive, got {l}", i + 1)
            })?;
            ensure(if i <= 1 { l > prev } else { l >= prev }, || {
                format!("eigenvalues out of order at #{}: {l} after {prev}", i + 1)
            })?;
            ensure(m.is_finite() && m >= 0.0, || {
                format!("mass #{} must be nonnegative, got {m}", i + 1)
            })?;
            prev = l;
        }
        let (lambda, m_sq): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let partial_mass = neumaier(m_sq.iter().copied());
        ensure(partial_mass <= mass * (1.0 + MASS_SLACK), || {
            format!("masses sum to {partial_mass}, more than the declared {mass}")
        })?;
        Ok(Self {
            lambda,
            m_sq,
            mass,
            partial_mass,
        })
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambda
    }

    pub fn masses(&self) -> &[f64] {
        &self.m_sq
    }

    pub fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.lambda.iter().copied().zip(self.m_sq.iter().copied())
    }

    /// Declared `|Ω|`.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// `Σ_{n≤N} m_n²`.
    pub fn partial_mass(&self) -> f64 {
        self.partial_mass
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda[0]
    }

    /// Parse the plain-text table format:
    ///
    /// ```text
    /// #mass 3.141592653589793
    /// # comments start with '#'
    /// 1 2.546479089470325
    /// 4 0
    /// ```
    pub fn parse_table(text: &str) -> Result<Self> {
        let mut mass = None;
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(v) = rest.strip_prefix("mass") {
                    let v = v.trim();
                    mass = Some(v.parse::<f64>().map_err(|_| Error::Parse {
                        line: line_no,
                        message: format!("bad mass value {v:?}"),
                    })?);
                }
                continue;
            }
            let mut it = line.split_whitespace();
            let mut field = |name: &str| -> Result<f64> {
                let tok = it.next().ok_or_else(|| Error::Parse {
                    line: line_no,
                    message: format!("missing {name}"),
                })?;
                tok.parse::<f64>().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("bad {name} {tok:?}"),
                })
            };
            let l = field("lambda")?;
            let m = field("m_sq")?;
            if it.next().is_some() {
                return Err(Error::Parse {
                    line: line_no,
                    message: "expected two columns".into(),
                });
            }
            pairs.push((l, m));
        }
        let mass = mass.ok_or_else(|| Error::MissingInput("eigen table has no '#mass' header".into()))?;
        Self::new(pairs, mass)
    }

    pub fn read_table(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse_table(&std::fs::read_to_string(path)?)
    }

    /// Inverse of [`EigenSystem::parse_table`]; round-trips exactly.
    pub fn to_table(&self) -> String {
        let mut s = format!("#mass {:?}\n", self.mass);
        for (l, m) in self.pairs() {
            let _ = writeln!(s, "{l:?} {m:?}");
        }
        s
    }

    pub fn write_table(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_table())?;
        Ok(())
    }
}

/// Dirichlet eigenpairs of `Δ` on an interval of length `L`:
/// `λ_n = (nπ/L)^2`, `m_n² = 8L/(nπ)^2` for odd `n`, `0` for even `n`.
pub fn bm_interval_eigensystem(domain: &IntervalDomain, n: usize) -> Result<EigenSystem> {
    ensure(n >= 1, || "need at least one eigenpair".into())?;
    let l = domain.length();
    let pairs = (1..=n)
        .map(|k| {
            let kp = k as f64 * PI;
            let m = if k % 2 == 1 { 8.0 * l / (kp * kp) } else { 0.0 };
            ((kp / l).powi(2), m)
        })
        .collect();
    EigenSystem::new(pairs, l)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesOptions {
    /// Stop once the tail certificate is below `max(abs_tol, rel_tol·|sum|)`.
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-12,
        }
    }
}

/// A truncated series with its certified tail bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    /// Upper bound on the omitted terms, `w(λ_n)·(|Ω| - Σ_{k≤n} m_k²)`.
    pub tail_bound: f64,
    pub terms: usize,
}

/// `Σ_n w(λ_n) m_n²` for nonincreasing `w` with `0 < w ≤ 1`.
///
/// `w` is only evaluated at terms with `m_n² > 0`, and summation stops as
/// soon as the tail certificate meets the tolerance.
pub fn weighted_series<W>(eig: &EigenSystem, mut w: W, opts: &SeriesOptions) -> Result<SeriesValue>
where
    W: FnMut(f64) -> Result<f64>,
{
    ensure(opts.abs_tol >= 0.0 && opts.rel_tol >= 0.0 && opts.abs_tol + opts.rel_tol > 0.0, || {
        "series tolerances must be nonnegative and not both zero".into()
    })?;
    let mut sum = 0.0;
    let mut comp = 0.0;
    let mut mass_left = eig.mass;
    let mut mass_comp = 0.0;
    let mut tail = eig.mass;
    let mut terms = 0;
    for (l, m) in eig.pairs() {
        terms += 1;
        if m == 0.0 {
            continue;
        }
        let wl = w(l)?;
        ensure(wl.is_finite() && (0.0..=1.0 + 1e-12).contains(&wl), || {
            format!("series weight must lie in [0, 1], got {wl} at lambda={l}")
        })?;
        two_sum(&mut sum, &mut comp, wl * m);
        two_sum(&mut mass_left, &mut mass_comp, -m);
        tail = wl * (mass_left + mass_comp).max(0.0);
        let value = sum + comp;
        if tail <= opts.abs_tol.max(opts.rel_tol * value.abs()) {
            return Ok(SeriesValue {
                value,
                tail_bound: tail,
                terms,
            });
        }
    }
    Err(Error::Truncation {
        terms: eig.len(),
        tail_bound: tail,
        tolerance: opts.abs_tol.max(opts.rel_tol * (sum + comp).abs()),
    })
}

fn two_sum(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    *comp += if sum.abs() >= x.abs() {
        (*sum - t) + x
    } else {
        (x - t) + *sum
    };
    *sum = t;
}

fn neumaier(xs: impl Iterator<Item = f64>) -> f64 {
    let mut s = 0.0;
    let mut c = 0.0;
    for x in xs {
        two_sum(&mut s, &mut c, x);
    }
    s + c
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pi_interval() -> IntervalDomain {
        IntervalDomain::new(0.0, PI).unwrap()
    }

    #[test]
    fn first_pair_and_parity() {
        let e = bm_interval_eigensystem(&pi_interval(), 4).unwrap();
        assert!((e.lambdas()[0] - 1.0).abs() < 1e-15);
        assert!((e.masses()[0] - 8.0 / PI).abs() < 1e-15);
        assert_eq!(e.masses()[1], 0.0);
        assert_eq!(e.masses()[3], 0.0);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(EigenSystem::new(vec![(2.0, 0.1), (1.0, 0.1)], 1.0).is_err());
        assert!(EigenSystem::new(vec![(1.0, 0.1), (1.0, 0.1)], 1.0).is_err());
        assert!(EigenSystem::new(vec![(0.0, 0.1)], 1.0).is_err());
        assert!(EigenSystem::new(vec![(1.0, -0.1)], 1.0).is_err());
        assert!(EigenSystem::new(vec![(1.0, 2.0)], 1.0).is_err());
        assert!(IntervalDomain::new(1.0, 1.0).is_err());
    }

    #[test]
    fn table_round_trip() {
        let e = bm_interval_eigensystem(&pi_interval(), 7).unwrap();
        let back = EigenSystem::parse_table(&e.to_table()).unwrap();
        assert_eq!(e, back);
        let err = EigenSystem::parse_table("1 0.5\n").unwrap_err();
        assert!(matches!(err, Error::MissingInput(_)));
        let err = EigenSystem::parse_table("#mass 1\n# c\n1 x\n").unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                line: 3,
                message: "bad m_sq \"x\"".into()
            }
        );
    }

    #[test]
    fn unit_weight_needs_loose_tolerance() {
        let e = bm_interval_eigensystem(&pi_interval(), 1001).unwrap();
        let strict = weighted_series(&e, |_| Ok(1.0), &SeriesOptions::default());
        assert!(matches!(strict, Err(Error::Truncation { .. })));
        let loose = SeriesOptions {
            abs_tol: 1e-2,
            rel_tol: 0.0,
        };
        let v = weighted_series(&e, |_| Ok(1.0), &loose).unwrap();
        assert!((v.value - PI).abs() <= v.tail_bound + 1e-12);
    }

    #[test]
    fn heat_weights_against_brute_force() {
        let e = bm_interval_eigensystem(&pi_interval(), 200).unwrap();
        let v = weighted_series(&e, |l| Ok((-0.5 * l).exp()), &SeriesOptions::default()).unwrap();
        let brute: f64 = e.pairs().map(|(l, m)| (-0.5 * l).exp() * m).sum();
        assert!((v.value - brute).abs() < 1e-12);
        assert!(v.terms < 20);
    }
}
