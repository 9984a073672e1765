//! Divided differences `(F(ξ) − 1)/ξ` and their ξ-derivatives for the three
//! functions with `F(0) = 1` that appear in the GEV moment systems:
//! `a^ξ`, `Γ(1 − ξ)` and `2^ξ Γ(2 − ξ)`.
//!
//! Near ξ = 0 the direct forms cancel catastrophically (the derivative loses
//! accuracy like ε/ξ²), so inside [`SERIES_RADIUS`] the quantities come from
//! the Taylor expansion of `F = exp(Σ a_k ξ^k)` instead.

use core::f64::consts::LN_2;

use crate::distributions::{digamma, gamma_unchecked, EULER_GAMMA};

pub(crate) const SERIES_RADIUS: f64 = 1e-3;

const ZETA: [f64; 6] = [
    0.0,
    0.0,
    1.644_934_066_848_226_4,
    1.202_056_903_159_594_2,
    1.082_323_233_711_138_2,
    1.036_927_755_143_369_9,
];

/// Value and first derivative of a divided difference.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Ratio {
    pub value: f64,
    pub deriv: f64,
}

impl Ratio {
    /// `F(ξ) = 1 + ξ·D(ξ)` and its derivative `D + ξ·D'`.
    pub fn function(&self, xi: f64) -> (f64, f64) {
        (1.0 + xi * self.value, self.value + xi * self.deriv)
    }
}

fn from_log_series(log_coeffs: [f64; 5], xi: f64) -> Ratio {
    // exp of a power series: e_n = (1/n) Σ_{k=1..n} k a_k e_{n−k}
    let mut e = [0.0f64; 6];
    e[0] = 1.0;
    for n in 1..6 {
        let mut acc = 0.0;
        for k in 1..=n {
            acc += k as f64 * log_coeffs[k - 1] * e[n - k];
        }
        e[n] = acc / n as f64;
    }
    let mut value = 0.0;
    let mut deriv = 0.0;
    for n in (1..6).rev() {
        value = value * xi + e[n];
    }
    for n in (2..6).rev() {
        deriv = deriv * xi + (n - 1) as f64 * e[n];
    }
    Ratio { value, deriv }
}

fn from_function(f: f64, df: f64, xi: f64) -> Ratio {
    let fm1 = f - 1.0;
    Ratio {
        value: fm1 / xi,
        deriv: (df * xi - fm1) / (xi * xi),
    }
}

/// `(a^ξ − 1)/ξ` for `a = exp(ln_a)`.
pub(crate) fn pow_ratio(ln_a: f64, xi: f64) -> Ratio {
    if xi.abs() < SERIES_RADIUS {
        return from_log_series([ln_a, 0.0, 0.0, 0.0, 0.0], xi);
    }
    let em1 = libm::expm1(xi * ln_a);
    Ratio {
        value: em1 / xi,
        deriv: (ln_a * (em1 + 1.0) * xi - em1) / (xi * xi),
    }
}

/// `(Γ(1 − ξ) − 1)/ξ`.
pub(crate) fn gamma_one_ratio(xi: f64) -> Ratio {
    if xi.abs() < SERIES_RADIUS {
        let a = [EULER_GAMMA, ZETA[2] / 2.0, ZETA[3] / 3.0, ZETA[4] / 4.0, ZETA[5] / 5.0];
        return from_log_series(a, xi);
    }
    let f = gamma_unchecked(1.0 - xi);
    from_function(f, -f * digamma(1.0 - xi), xi)
}

/// `(2^ξ Γ(2 − ξ) − 1)/ξ`.
pub(crate) fn gamma_two_ratio(xi: f64) -> Ratio {
    if xi.abs() < SERIES_RADIUS {
        let a = [
            LN_2 + EULER_GAMMA - 1.0,
            (ZETA[2] - 1.0) / 2.0,
            (ZETA[3] - 1.0) / 3.0,
            (ZETA[4] - 1.0) / 4.0,
            (ZETA[5] - 1.0) / 5.0,
        ];
        return from_log_series(a, xi);
    }
    let f = libm::exp(xi * LN_2) * gamma_unchecked(2.0 - xi);
    from_function(f, f * (LN_2 - digamma(2.0 - xi)), xi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(r: impl Fn(f64) -> Ratio, f: impl Fn(f64) -> f64) {
        // continuity across the series radius and derivative vs. differences
        for xi in [-0.4, -0.01, -2e-3, -1.0001e-3, -0.9999e-3, 5e-4, 1.0001e-3, 0.02, 0.3] {
            let d = r(xi);
            let direct = (f(xi) - 1.0) / xi;
            assert!((d.value - direct).abs() < 1e-9 * (1.0 + direct.abs()), "xi={xi}");
            let h = 1e-4;
            let fd = (r(xi + h).value - r(xi - h).value) / (2.0 * h);
            assert!((d.deriv - fd).abs() < 1e-6 * (1.0 + fd.abs()), "xi={xi}");
        }
        let below = r(SERIES_RADIUS * (1.0 - 1e-12));
        let above = r(SERIES_RADIUS * (1.0 + 1e-12));
        assert!((below.value - above.value).abs() < 1e-12);
        assert!((below.deriv - above.deriv).abs() < 1e-8);
    }

    #[test]
    fn pow_ratio_matches_definition() {
        let ln3 = libm::log(3.0);
        check(|x| pow_ratio(ln3, x), |x| libm::pow(3.0, x));
        assert_eq!(pow_ratio(ln3, 0.0).value, ln3);
    }

    #[test]
    fn gamma_one_ratio_matches_definition() {
        check(gamma_one_ratio, |x| gamma_unchecked(1.0 - x));
        assert_eq!(gamma_one_ratio(0.0).value, EULER_GAMMA);
    }

    #[test]
    fn gamma_two_ratio_matches_definition() {
        check(gamma_two_ratio, |x| libm::pow(2.0, x) * gamma_unchecked(2.0 - x));
    }
}
