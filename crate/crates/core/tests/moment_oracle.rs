//! Population moments of the GEV computed by tanh-sinh quadrature of
//! `∫₀¹ Q(u) ν(u) du`, independently of the closed forms used by the library.

use bmcusum_core::gev_maps::{gpwm_to_gev_approx, gpwm_to_gev_exact, pwm_to_gev_approx, pwm_to_gev_exact};
use bmcusum_core::moments::{exact_pwm_gev, MomentTriple};
use bmcusum_core::GevParams;

/// `∫₀¹ f(u, −ln u) du` with step `h` on `t ∈ [−4.5, 4.5]`. The integrand sees
/// `u` and `−ln u` computed without cancellation near either endpoint.
fn tanh_sinh(f: impl Fn(f64, f64) -> f64, h: f64) -> f64 {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let steps = (4.5 / h) as i64;
    let mut sum = 0.0;
    for k in -steps..=steps {
        let t = k as f64 * h;
        let s = half_pi * t.sinh();
        // u = 1/(1 + e^{-2s}), 1 - u = 1/(1 + e^{2s})
        let u = 1.0 / (1.0 + (-2.0 * s).exp());
        if u <= 0.0 {
            continue;
        }
        let neg_ln_u = (-2.0 * s).exp().ln_1p();
        if neg_ln_u <= 0.0 {
            continue;
        }
        let w = half_pi * t.cosh() / (2.0 * s.cosh() * s.cosh());
        let v = f(u, neg_ln_u) * w;
        if v.is_finite() {
            sum += v;
        }
    }
    sum * h
}

fn quantile(p: &GevParams, l: f64) -> f64 {
    if p.xi == 0.0 {
        p.mu - p.sigma * l.ln()
    } else {
        p.mu + p.sigma * (l.powf(-p.xi) - 1.0) / p.xi
    }
}

fn converged(f: impl Fn(f64, f64) -> f64 + Copy) -> f64 {
    let coarse = tanh_sinh(f, 1.0 / 32.0);
    let fine = tanh_sinh(f, 1.0 / 64.0);
    assert!((fine - coarse).abs() <= 1e-9 * (1.0 + fine.abs()), "{coarse} vs {fine}");
    fine
}

fn gpwm_by_quadrature(p: &GevParams) -> MomentTriple {
    let q = |_: f64, l: f64| quantile(p, l);
    MomentTriple::gpwm([
        converged(|u, l| q(u, l) * u * l),
        converged(|u, l| q(u, l) * u * l * l),
        converged(|u, l| q(u, l) * u * u * l),
    ])
}

fn pwm_by_quadrature(p: &GevParams) -> MomentTriple {
    let q = |_: f64, l: f64| quantile(p, l);
    MomentTriple::pwm([
        converged(|u, l| q(u, l)),
        converged(|u, l| q(u, l) * u),
        converged(|u, l| q(u, l) * u * u),
    ])
}

fn assert_params(got: GevParams, want: &GevParams, tol: f64) {
    let ok = (got.mu - want.mu).abs() <= tol
        && (got.sigma - want.sigma).abs() <= tol
        && (got.xi - want.xi).abs() <= tol;
    assert!(ok, "got {got:?}, want {want:?}");
}

fn grid(lo: f64, hi: f64) -> impl Iterator<Item = f64> {
    let steps = ((hi - lo) / 0.1).round() as i64;
    (0..=steps).map(move |i| lo + i as f64 * 0.1)
}

#[test]
fn gumbel_generalized_moments_invert_to_standard_gumbel() {
    let p = GevParams::standard(0.0).unwrap();
    let m = gpwm_by_quadrature(&p);
    // the weights integrate to 1/4, 1/4, 1/9 against u ↦ 1
    let unit = [converged(|u, l| u * l), converged(|u, l| u * l * l), converged(|u, l| u * u * l)];
    assert!((unit[0] - 0.25).abs() < 1e-12 && (unit[1] - 0.25).abs() < 1e-12 && (unit[2] - 1.0 / 9.0).abs() < 1e-12);
    assert_params(gpwm_to_gev_exact(&m).unwrap(), &p, 1e-6);
}

#[test]
fn heavy_tailed_generalized_moments_invert() {
    let p = GevParams::new(1.0, 2.0, 0.5).unwrap();
    assert_params(gpwm_to_gev_exact(&gpwm_by_quadrature(&p)).unwrap(), &p, 1e-6);
}

#[test]
fn generalized_moment_round_trip_grid() {
    for xi in grid(-0.8, 1.5) {
        let p = GevParams::new(-0.3, 0.7, xi).unwrap();
        assert_params(gpwm_to_gev_exact(&gpwm_by_quadrature(&p)).unwrap(), &p, 1e-6);
    }
}

#[test]
fn generalized_moment_approximation_tracks_exact_map() {
    let mut worst = 0.0f64;
    for xi in grid(-0.8, 1.0) {
        let p = GevParams::standard(xi).unwrap();
        let m = gpwm_by_quadrature(&p);
        let approx = gpwm_to_gev_approx(&m).unwrap();
        worst = worst.max((approx.xi - xi).abs());
    }
    assert!(worst < 0.02, "worst shape error {worst}");
}

#[test]
fn closed_form_moments_match_quadrature() {
    for xi in grid(-0.9, 0.8) {
        let p = GevParams::new(2.0, 1.5, xi).unwrap();
        let closed = exact_pwm_gev(&p).unwrap().as_array();
        let quad = pwm_by_quadrature(&p).as_array();
        for i in 0..3 {
            assert!((closed[i] - quad[i]).abs() < 1e-8 * (1.0 + quad[i].abs()), "xi = {xi}: {closed:?} vs {quad:?}");
        }
    }
}

#[test]
fn moment_round_trip_through_quadrature() {
    for xi in grid(-0.9, 0.8) {
        let p = GevParams::new(0.5, 3.0, xi).unwrap();
        let m = pwm_by_quadrature(&p);
        assert_params(pwm_to_gev_exact(&m).unwrap(), &p, 1e-7);
    }
    // the rational approximation of the shape is designed for |ξ| ≤ 1/2
    for xi in grid(-0.5, 0.5) {
        let m = pwm_by_quadrature(&GevParams::standard(xi).unwrap());
        let approx = pwm_to_gev_approx(&m).unwrap();
        assert!((approx.xi - xi).abs() < 1e-3, "xi = {xi}: {}", approx.xi);
    }
}
