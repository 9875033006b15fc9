use pulsed_squeeze::{integrate_semi_infinite, DecayEnvelope};

/// Composite Simpson over `[a, b]` with `n` (even) intervals.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

#[test]
fn modulated_exponential_matches_brute_force_simpson() {
    let w = |t: f64| (2.0 * t).exp() * (0.9 * (2.0 * t).sin()).exp();
    let brute = simpson(w, -40.0, 0.0, 4_000_000);
    // scipy quad at epsrel 1e-13 on the same interval, frozen.
    assert!(
        ((brute - 0.341_142_894_626_178) / brute).abs() < 1e-12,
        "{brute:.15}"
    );

    let env = DecayEnvelope::new(2.0, (1.8f64).exp()).with_oscillation(Some(std::f64::consts::PI));
    let r = integrate_semi_infinite(w, env, 1e-9).unwrap();
    assert!(((r.value - brute) / brute).abs() < 1e-8);
    assert!(r.abs_error_estimate >= 0.0);
    assert!(r.abs_error_estimate <= 1e-9 * r.value);
}

#[test]
fn halving_tolerance_never_increases_error() {
    let env = DecayEnvelope::new(2.0, 1.0);
    let mut last = f64::INFINITY;
    let mut tol = 1e-3;
    while tol >= 1e-13 {
        let r = integrate_semi_infinite(|t| (2.0 * t).exp(), env, tol).unwrap();
        let err = (r.value - 0.5).abs();
        assert!(err <= last.max(2e-16), "tol {tol:e}: {err:e} > {last:e}");
        last = err;
        tol /= 2.0;
    }
}
