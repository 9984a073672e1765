//! Maps from moment triples to GEV parameters.
//!
//! The exact maps solve the PWM and GPWM moment systems numerically; the
//! approximate maps use closed-form approximations of the shape equation
//! and are the ones entering the test statistics, together with their
//! hand-derived gradients.

use core::f64::consts::LN_2;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::distributions::{digamma, gamma_unchecked, GevParams, XI_ZERO_THRESHOLD};
use crate::error::{Error, Result};
use crate::moments::{dxi_violation, MomentTriple, WeightFamily};
use crate::ratios::{gamma_one_ratio, gamma_two_ratio, pow_ratio, Ratio};

const LN_3: f64 = 1.098_612_288_668_109_8;
const LN_1_5: f64 = 0.405_465_108_108_164_4;

const PWM_BRACKET: (f64, f64) = (-5.0, 0.999_999);
const GPWM_BRACKET: (f64, f64) = (-5.0, 1.999_999);
const ROOT_TOL: f64 = 1e-12;

const PWM_C1: f64 = -7.8590;
const PWM_C2: f64 = -2.9554;
const GPWM_A: f64 = 1.442853;
const GPWM_P: f64 = 0.405_465_1;
const GPWM_B: f64 = 0.118_337_5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum GevMapKind {
    PwmExact,
    PwmApprox,
    GpwmExact,
    GpwmApprox,
}

impl GevMapKind {
    pub fn family(self) -> WeightFamily {
        match self {
            GevMapKind::PwmExact | GevMapKind::PwmApprox => WeightFamily::Pwm,
            GevMapKind::GpwmExact | GevMapKind::GpwmApprox => WeightFamily::Gpwm,
        }
    }

    pub fn is_approximation(self) -> bool {
        matches!(self, GevMapKind::PwmApprox | GevMapKind::GpwmApprox)
    }

    fn name(self) -> &'static str {
        match self {
            GevMapKind::PwmExact => "exact PWM",
            GevMapKind::PwmApprox => "approximate PWM",
            GevMapKind::GpwmExact => "exact GPWM",
            GevMapKind::GpwmApprox => "approximate GPWM",
        }
    }
}

/// A GEV parameter, used to select one component of a map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Parameter {
    Mu,
    Sigma,
    Xi,
}

impl Parameter {
    pub const ALL: [Parameter; 3] = [Parameter::Mu, Parameter::Sigma, Parameter::Xi];

    pub fn of(self, p: &GevParams) -> f64 {
        match self {
            Parameter::Mu => p.mu,
            Parameter::Sigma => p.sigma,
            Parameter::Xi => p.xi,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Parameter::Mu => "mu",
            Parameter::Sigma => "sigma",
            Parameter::Xi => "xi",
        }
    }
}

impl core::fmt::Display for Parameter {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for Parameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mu" => Ok(Parameter::Mu),
            "sigma" => Ok(Parameter::Sigma),
            "xi" => Ok(Parameter::Xi),
            other => Err(Error::InvalidConfig(alloc::format!("unknown parameter `{other}`"))),
        }
    }
}

pub fn apply(kind: GevMapKind, m: &MomentTriple) -> Result<GevParams> {
    match kind {
        GevMapKind::PwmExact => pwm_to_gev_exact(m),
        GevMapKind::PwmApprox => pwm_to_gev_approx(m),
        GevMapKind::GpwmExact => gpwm_to_gev_exact(m),
        GevMapKind::GpwmApprox => gpwm_to_gev_approx(m),
    }
}

fn require_family(kind: GevMapKind, m: &MomentTriple) -> Result<()> {
    if m.family != kind.family() {
        return Err(Error::OutsideDomain {
            map: kind.name(),
            reason: "moment triple built from the other weight family",
        });
    }
    if !m.is_finite() {
        return Err(Error::OutsideDomain { map: kind.name(), reason: "non-finite moments" });
    }
    Ok(())
}

/// Root of an increasing function by bisection on `[lo, hi]`.
fn bisect(f: impl Fn(f64) -> f64, target: f64, (mut lo, mut hi): (f64, f64), map: &'static str) -> Result<f64> {
    if !(f(lo) < target && target < f(hi)) {
        return Err(Error::NoRoot { map });
    }
    while hi - lo > ROOT_TOL {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `σ = (2m₂ − m₁)/(Γ(1 − ξ)(2^ξ − 1)/ξ)` and `μ = m₁ − σ(Γ(1 − ξ) − 1)/ξ`.
fn pwm_scale_location(m: &MomentTriple, xi: f64) -> (f64, f64) {
    let sigma = (2.0 * m.m2 - m.m1) / (gamma_unchecked(1.0 - xi) * pow_ratio(LN_2, xi).value);
    let mu = m.m1 - sigma * gamma_one_ratio(xi).value;
    (mu, sigma)
}

/// `σ = 8(m₁ − m₂)/(2^ξ Γ(2 − ξ))` and `μ = 4m₁ + σ(1 − 2^ξ Γ(2 − ξ))/ξ`.
fn gpwm_scale_location(m: &MomentTriple, xi: f64) -> (f64, f64) {
    let d = gamma_two_ratio(xi);
    let (b, _) = d.function(xi);
    let sigma = 8.0 * (m.m1 - m.m2) / b;
    let mu = 4.0 * m.m1 - sigma * d.value;
    (mu, sigma)
}

/// Solves the PWM system. Requires the triple to lie in the feasibility
/// domain, which guarantees `ξ < 1` and `σ > 0`.
pub fn pwm_to_gev_exact(m: &MomentTriple) -> Result<GevParams> {
    require_family(GevMapKind::PwmExact, m)?;
    if let Some(v) = dxi_violation(m) {
        return Err(Error::OutsideDxi(v));
    }
    let target = (3.0 * m.m3 - m.m1) / (2.0 * m.m2 - m.m1);
    let r = |xi: f64| pow_ratio(LN_3, xi).value / pow_ratio(LN_2, xi).value;
    let xi = bisect(r, target, PWM_BRACKET, GevMapKind::PwmExact.name())?;
    let (mu, sigma) = pwm_scale_location(m, xi);
    GevParams::new(mu, sigma, xi)
}

/// Closed-form approximation of the PWM map:
/// `ξ = −7.8590 c − 2.9554 c²` with `c = (2m₂ − m₁)/(3m₃ − m₁) − log 2/log 3`.
pub fn pwm_to_gev_approx(m: &MomentTriple) -> Result<GevParams> {
    require_family(GevMapKind::PwmApprox, m)?;
    if let Some(v) = dxi_violation(m) {
        return Err(Error::OutsideDxi(v));
    }
    let [mu, sigma, xi] = pwm_approx_unchecked(m);
    GevParams::new(mu, sigma, xi)
}

/// `(μ, σ, ξ)` of the approximate PWM map evaluated without any domain
/// check; components may be non-finite.
pub(crate) fn pwm_approx_unchecked(m: &MomentTriple) -> [f64; 3] {
    let xi = pwm_approx_xi(m);
    let (mu, sigma) = pwm_scale_location(m, xi);
    [mu, sigma, xi]
}

fn pwm_shape_statistic(m: &MomentTriple) -> f64 {
    (2.0 * m.m2 - m.m1) / (3.0 * m.m3 - m.m1) - LN_2 / LN_3
}

fn pwm_approx_xi(m: &MomentTriple) -> f64 {
    let c = pwm_shape_statistic(m);
    let xi = PWM_C1 * c + PWM_C2 * c * c;
    // rounding in the ratio leaves ~1e-15 at Gumbel moments
    if xi.abs() < XI_ZERO_THRESHOLD {
        0.0
    } else {
        xi
    }
}

/// Solves the GPWM system. Fails when the shape equation has no root below
/// 2, or when the resulting scale is not positive.
pub fn gpwm_to_gev_exact(m: &MomentTriple) -> Result<GevParams> {
    require_family(GevMapKind::GpwmExact, m)?;
    let map = GevMapKind::GpwmExact.name();
    let target = gpwm_shape_statistic(m);
    if !target.is_finite() {
        return Err(Error::OutsideDomain { map, reason: "shape ratio is undefined" });
    }
    // ξ/(1 − 1.5^ξ) = −1/((1.5^ξ − 1)/ξ), increasing in ξ
    let q = |xi: f64| -1.0 / pow_ratio(LN_1_5, xi).value;
    let xi = bisect(q, target, GPWM_BRACKET, map)?;
    let (mu, sigma) = gpwm_scale_location(m, xi);
    if !(sigma > 0.0) {
        return Err(Error::OutsideDomain { map, reason: "scale is not positive" });
    }
    if !mu.is_finite() {
        return Err(Error::OutsideDomain { map, reason: "location is not finite" });
    }
    GevParams::new(mu, sigma, xi)
}

fn gpwm_shape_statistic(m: &MomentTriple) -> f64 {
    2.0 * (m.m1 - m.m2) / (m.m1 - 2.25 * m.m3)
}

/// Closed-form approximation of the GPWM map:
/// `ξ = (1.442853 − (−t)^0.4054651)/0.1183375` with
/// `t = 2(m₁ − m₂)/(m₁ − 9/4 m₃) < 0`.
pub fn gpwm_to_gev_approx(m: &MomentTriple) -> Result<GevParams> {
    require_family(GevMapKind::GpwmApprox, m)?;
    let t = gpwm_shape_statistic(m);
    if !(t < 0.0) {
        return Err(Error::OutsideDomain {
            map: GevMapKind::GpwmApprox.name(),
            reason: "shape ratio must be negative",
        });
    }
    let xi = (GPWM_A - libm::pow(-t, GPWM_P)) / GPWM_B;
    let (mu, sigma) = gpwm_scale_location(m, xi);
    GevParams::new(mu, sigma, xi)
}

/// Gradient `(∂/∂m₁, ∂/∂m₂, ∂/∂m₃)` of one component of an approximate map.
pub fn jacobian(kind: GevMapKind, param: Parameter, m: &MomentTriple) -> Result<[f64; 3]> {
    let rows = match kind {
        GevMapKind::PwmApprox => pwm_approx_jacobian(m)?,
        GevMapKind::GpwmApprox => gpwm_approx_jacobian(m)?,
        _ => {
            return Err(Error::InvalidConfig(
                "gradients are available for the approximate maps only".into(),
            ))
        }
    };
    Ok(match param {
        Parameter::Mu => rows.mu,
        Parameter::Sigma => rows.sigma,
        Parameter::Xi => rows.xi,
    })
}

struct Gradients {
    mu: [f64; 3],
    sigma: [f64; 3],
    xi: [f64; 3],
}

fn scale(v: [f64; 3], s: f64) -> [f64; 3] {
    v.map(|x| x * s)
}

fn axpy(a: f64, x: [f64; 3], y: [f64; 3]) -> [f64; 3] {
    [a * x[0] + y[0], a * x[1] + y[1], a * x[2] + y[2]]
}

/// Gradient of `num/den` given the gradients of both.
fn quotient_gradient(num: f64, dnum: [f64; 3], den: f64, dden: [f64; 3]) -> [f64; 3] {
    let d2 = den * den;
    [
        (dnum[0] * den - num * dden[0]) / d2,
        (dnum[1] * den - num * dden[1]) / d2,
        (dnum[2] * den - num * dden[2]) / d2,
    ]
}

fn pwm_approx_jacobian(m: &MomentTriple) -> Result<Gradients> {
    let p = pwm_to_gev_approx(m)?;
    let xi = p.xi;
    let d = 2.0 * m.m2 - m.m1;
    let e = 3.0 * m.m3 - m.m1;
    let dd = [-1.0, 2.0, 0.0];
    let de = [-1.0, 0.0, 3.0];
    let c = pwm_shape_statistic(m);
    let dxi = scale(quotient_gradient(d, dd, e, de), PWM_C1 + 2.0 * PWM_C2 * c);

    // σ = d / A(ξ) with A = Γ(1 − ξ)·(2^ξ − 1)/ξ
    let g = gamma_unchecked(1.0 - xi);
    let dg = -g * digamma(1.0 - xi);
    let p2: Ratio = pow_ratio(LN_2, xi);
    let a = g * p2.value;
    let da = dg * p2.value + g * p2.deriv;
    let dsigma = axpy(-d * da / (a * a), dxi, scale(dd, 1.0 / a));

    // μ = m₁ − σ·(Γ(1 − ξ) − 1)/ξ
    let g1 = gamma_one_ratio(xi);
    let dmu = axpy(-p.sigma * g1.deriv, dxi, axpy(-g1.value, dsigma, [1.0, 0.0, 0.0]));
    Ok(Gradients { mu: dmu, sigma: dsigma, xi: dxi })
}

fn gpwm_approx_jacobian(m: &MomentTriple) -> Result<Gradients> {
    let p = gpwm_to_gev_approx(m)?;
    let xi = p.xi;
    let n = 2.0 * (m.m1 - m.m2);
    let d = m.m1 - 2.25 * m.m3;
    let t = n / d;
    let dt = quotient_gradient(n, [2.0, -2.0, 0.0], d, [1.0, 0.0, -2.25]);
    let dxi = scale(dt, GPWM_P * libm::pow(-t, GPWM_P - 1.0) / GPWM_B);

    // σ = 8(m₁ − m₂)/B(ξ) with B = 2^ξ Γ(2 − ξ) = 1 + ξ·R(ξ)
    let r = gamma_two_ratio(xi);
    let (b, db) = r.function(xi);
    let dsigma = axpy(-p.sigma * db / b, dxi, [8.0 / b, -8.0 / b, 0.0]);

    // μ = 4m₁ − σ·R(ξ)
    let dmu = axpy(-p.sigma * r.deriv, dxi, axpy(-r.value, dsigma, [4.0, 0.0, 0.0]));
    Ok(Gradients { mu: dmu, sigma: dsigma, xi: dxi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{sample_gev, EULER_GAMMA};
    use crate::moments::{b_hat, beta_hat, exact_pwm_gev};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gumbel_pwm() -> MomentTriple {
        MomentTriple::pwm([
            EULER_GAMMA,
            (EULER_GAMMA + LN_2) / 2.0,
            (EULER_GAMMA + LN_3) / 3.0,
        ])
    }

    fn assert_params(p: &GevParams, mu: f64, sigma: f64, xi: f64, tol: f64) {
        assert!(
            (p.mu - mu).abs() < tol && (p.sigma - sigma).abs() < tol && (p.xi - xi).abs() < tol,
            "{p:?} vs ({mu}, {sigma}, {xi})"
        );
    }

    #[test]
    fn exact_pwm_recovers_gumbel() {
        let p = pwm_to_gev_exact(&gumbel_pwm()).unwrap();
        assert_params(&p, 0.0, 1.0, 0.0, 1e-8);
    }

    #[test]
    fn exact_pwm_round_trips() {
        let p = GevParams::new(2.0, 3.0, -0.3).unwrap();
        let back = pwm_to_gev_exact(&exact_pwm_gev(&p).unwrap()).unwrap();
        assert_params(&back, 2.0, 3.0, -0.3, 1e-8);
        for mu in [-3.0, 0.0, 10.0] {
            for sigma in [0.5, 1.0, 4.0] {
                for i in 0..=12 {
                    let xi = -0.8 + 0.1 * i as f64;
                    let p = GevParams::new(mu, sigma, xi).unwrap();
                    let back = pwm_to_gev_exact(&exact_pwm_gev(&p).unwrap()).unwrap();
                    assert_params(&back, mu, sigma, xi, 1e-6);
                }
            }
        }
    }

    #[test]
    fn exact_pwm_scale_homogeneity() {
        for xi in [-0.6, 0.0, 0.3] {
            let unit = pwm_to_gev_exact(&exact_pwm_gev(&GevParams::standard(xi).unwrap()).unwrap()).unwrap();
            let scaled = pwm_to_gev_exact(&exact_pwm_gev(&GevParams::new(0.0, 7.0, xi).unwrap()).unwrap()).unwrap();
            assert!((scaled.sigma - 7.0 * unit.sigma).abs() < 1e-10);
        }
    }

    #[test]
    fn exact_pwm_rejects_triples_outside_domain() {
        assert!(matches!(pwm_to_gev_exact(&MomentTriple::pwm([1.0, 0.5, 0.3])), Err(Error::OutsideDxi(_))));
        // ratio 1.01 is feasible but needs ξ below the bracket
        let m = MomentTriple::pwm([0.0, 0.5, 1.01 / 3.0]);
        assert!(matches!(pwm_to_gev_exact(&m), Err(Error::NoRoot { .. })));
        assert!(pwm_to_gev_exact(&MomentTriple::gpwm([1.0, 0.8, 0.5])).is_err());
    }

    #[test]
    fn exact_pwm_output_in_constraints_on_random_feasible_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            // feasible triple: d > 0 and ratio in (1.03, 2)
            let m1: f64 = rng.random_range(-5.0..5.0);
            let d: f64 = rng.random_range(0.01..3.0);
            let r: f64 = rng.random_range(1.03..1.9999);
            let m = MomentTriple::pwm([m1, (d + m1) / 2.0, (r * d + m1) / 3.0]);
            let p = pwm_to_gev_exact(&m).unwrap();
            assert!(p.xi < 1.0 && p.sigma > 0.0);
        }
    }

    #[test]
    fn approx_pwm_gumbel() {
        let p = pwm_to_gev_approx(&gumbel_pwm()).unwrap();
        assert_eq!(p.xi, 0.0);
        assert_params(&p, 0.0, 1.0, 0.0, 1e-10);
    }

    #[test]
    fn approx_pwm_grid_accuracy() {
        for i in 0..=10 {
            let xi = -0.5 + 0.1 * i as f64;
            let m = exact_pwm_gev(&GevParams::standard(xi).unwrap()).unwrap();
            let p = pwm_to_gev_approx(&m).unwrap();
            assert!((p.xi - xi).abs() < 0.01, "xi = {xi}: {}", p.xi);
        }
    }

    #[test]
    fn approx_pwm_on_small_sample() {
        let p = pwm_to_gev_approx(&b_hat(&[1.0, 2.0, 3.0]).unwrap()).unwrap();
        assert!(p.sigma > 0.0 && p.mu.is_finite() && p.xi.is_finite());
    }

    #[test]
    fn gpwm_approx_requires_negative_ratio() {
        let m = MomentTriple::gpwm([1.0, 1.0, 0.2]);
        assert!(matches!(gpwm_to_gev_approx(&m), Err(Error::OutsideDomain { .. })));
        assert!(gpwm_to_gev_exact(&MomentTriple::gpwm([0.0; 3])).is_err());
    }

    #[test]
    fn gpwm_approx_scale_homogeneity() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let s = sample_gev(200, &GevParams::standard(0.2).unwrap(), &mut rng).unwrap();
        let m = beta_hat(&s, WeightFamily::Gpwm, 0.0).unwrap();
        let p = gpwm_to_gev_approx(&m).unwrap();
        let q = gpwm_to_gev_approx(&m.with_values(m.as_array().map(|v| 3.0 * v))).unwrap();
        assert!((q.sigma - 3.0 * p.sigma).abs() < 1e-12 * q.sigma);
        assert!((q.xi - p.xi).abs() < 1e-12);
    }

    #[test]
    fn gpwm_exact_location_shift() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s = sample_gev(300, &GevParams::standard(-0.1).unwrap(), &mut rng).unwrap();
        let m = beta_hat(&s, WeightFamily::Gpwm, 0.0).unwrap();
        let base = gpwm_to_gev_exact(&m).unwrap();
        // population weights integrate to (1/4, 1/4, 1/9)
        let v = m.as_array();
        let shifted = m.with_values([v[0] + 5.0 / 4.0, v[1] + 5.0 / 4.0, v[2] + 5.0 / 9.0]);
        let p = gpwm_to_gev_exact(&shifted).unwrap();
        assert!((p.mu - base.mu - 5.0).abs() < 1e-8);
        assert!((p.sigma - base.sigma).abs() < 1e-8);
    }

    fn finite_difference(kind: GevMapKind, param: Parameter, m: &MomentTriple) -> [f64; 3] {
        let mut out = [0.0; 3];
        for i in 0..3 {
            let mut lo = m.as_array();
            let mut hi = m.as_array();
            let h = 1e-6 * (1.0 + lo[i].abs());
            lo[i] -= h;
            hi[i] += h;
            let f = |v: [f64; 3]| param.of(&apply(kind, &m.with_values(v)).unwrap());
            out[i] = (f(hi) - f(lo)) / (2.0 * h);
        }
        out
    }

    fn check_gradient(kind: GevMapKind, m: &MomentTriple) {
        for param in Parameter::ALL {
            let g = jacobian(kind, param, m).unwrap();
            let fd = finite_difference(kind, param, m);
            let norm = fd.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            for i in 0..3 {
                assert!(
                    (g[i] - fd[i]).abs() <= 1e-4 * norm,
                    "{kind:?}/{param:?} at {m:?}: {g:?} vs {fd:?}"
                );
            }
        }
    }

    #[test]
    fn pwm_gradient_at_gumbel() {
        let m = gumbel_pwm();
        let g = jacobian(GevMapKind::PwmApprox, Parameter::Xi, &m).unwrap();
        let d = 2.0 * m.m2 - m.m1;
        let e = 3.0 * m.m3 - m.m1;
        let grad_c = [(-e + d) / (e * e), 2.0 / e, -3.0 * d / (e * e)];
        for i in 0..3 {
            assert!((g[i] - PWM_C1 * grad_c[i]).abs() < 1e-12);
        }
        check_gradient(GevMapKind::PwmApprox, &m);
        let ds = jacobian(GevMapKind::PwmApprox, Parameter::Sigma, &m).unwrap();
        let fd = finite_difference(GevMapKind::PwmApprox, Parameter::Sigma, &m);
        assert!((ds[0] - fd[0]).abs() < 1e-6);
        // the direct term −1/log 2 plus the shape channel
        assert!((ds[0] + 1.0 / LN_2).abs() > 1e-3);
    }

    #[test]
    fn pwm_gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut checked = 0;
        while checked < 100 {
            let xi = rng.random_range(-0.6..0.6);
            let mu = rng.random_range(-5.0..5.0);
            let sigma = rng.random_range(0.2..5.0);
            let n = rng.random_range(20..200);
            let s = sample_gev(n, &GevParams::new(mu, sigma, xi).unwrap(), &mut rng).unwrap();
            let m = b_hat(&s).unwrap();
            if crate::moments::in_dxi(&m) {
                check_gradient(GevMapKind::PwmApprox, &m);
                checked += 1;
            }
        }
    }

    #[test]
    fn gpwm_gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut checked = 0;
        while checked < 100 {
            let xi = rng.random_range(-0.6..0.9);
            let mu = rng.random_range(-5.0..5.0);
            let sigma = rng.random_range(0.2..5.0);
            let n = rng.random_range(20..200);
            let s = sample_gev(n, &GevParams::new(mu, sigma, xi).unwrap(), &mut rng).unwrap();
            let m = beta_hat(&s, WeightFamily::Gpwm, 0.0).unwrap();
            if gpwm_to_gev_approx(&m).is_ok() {
                check_gradient(GevMapKind::GpwmApprox, &m);
                checked += 1;
            }
        }
    }

    #[test]
    fn gradients_near_zero_shape() {
        // exercise the series branch of the ratio helpers
        let m = gumbel_pwm();
        for eps in [1e-6, -3e-4, 2e-3] {
            let p = GevParams::standard(eps).unwrap();
            let m2 = exact_pwm_gev(&p).unwrap();
            check_gradient(GevMapKind::PwmApprox, &m2);
        }
        check_gradient(GevMapKind::PwmApprox, &m);
    }

    #[test]
    fn gradients_unavailable_for_exact_maps() {
        assert!(jacobian(GevMapKind::PwmExact, Parameter::Xi, &gumbel_pwm()).is_err());
    }

    #[test]
    fn parameter_parsing() {
        for p in Parameter::ALL {
            assert_eq!(p.as_str().parse::<Parameter>().unwrap(), p);
        }
        assert!("shape".parse::<Parameter>().is_err());
    }
}
