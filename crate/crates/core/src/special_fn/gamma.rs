use std::f64::consts::PI;

pub use statrs::function::gamma::{gamma, ln_gamma};

/// `sin(πz)`, exactly zero at integers.
pub fn sin_pi(z: f64) -> f64 {
    let r = z.rem_euclid(2.0);
    if r == 0.0 || r == 1.0 {
        return 0.0;
    }
    if r < 0.5 {
        (PI * r).sin()
    } else if r < 1.5 {
        (PI * (1.0 - r)).sin()
    } else {
        (PI * (r - 2.0)).sin()
    }
}

/// `1/Γ(z)` for any real `z`; zero at the poles `z = 0, -1, -2, ...`.
pub fn recip_gamma(z: f64) -> f64 {
    if z >= 0.5 {
        if z > 171.0 {
            (-ln_gamma(z)).exp()
        } else {
            1.0 / gamma(z)
        }
    } else {
        // reflection: 1/Γ(z) = Γ(1-z) sin(πz) / π
        let s = sin_pi(z);
        if s == 0.0 {
            return 0.0;
        }
        let one_minus = 1.0 - z;
        if one_minus > 171.0 {
            s.signum() * (ln_gamma(one_minus) + s.abs().ln() - PI.ln()).exp()
        } else {
            gamma(one_minus) * s / PI
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reciprocal_gamma_values() {
        assert_eq!(recip_gamma(0.0), 0.0);
        assert_eq!(recip_gamma(-3.0), 0.0);
        assert!((recip_gamma(1.0) - 1.0).abs() < 1e-15);
        // Γ(-0.5) = -2√π
        assert!((recip_gamma(-0.5) + 1.0 / (2.0 * PI.sqrt())).abs() < 1e-15);
        assert!((recip_gamma(0.5) - 1.0 / PI.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn sin_pi_exact_zeros() {
        for k in -5..5 {
            assert_eq!(sin_pi(k as f64), 0.0);
        }
        assert!((sin_pi(0.5) - 1.0).abs() < 1e-16);
        assert!((sin_pi(-0.5) + 1.0).abs() < 1e-16);
    }
}
