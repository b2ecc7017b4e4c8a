use hillmap::lyapunov::*;
use hillmap::maps::{gen_logistic_coeffs, MapDescriptor};
use hillmap::numerics::ToleranceSpec;
use proptest::prelude::*;
use std::f64::consts::PI;

/// `∫ g D` over `[-2, 2]` by an `n`-node Gauss–Chebyshev rule.
fn gauss_chebyshev(g: impl Fn(f64) -> f64, n: usize) -> f64 {
    (1..=n).map(|k| g(2.0 * ((2 * k - 1) as f64 * PI / (2 * n) as f64).cos())).sum::<f64>() / n as f64
}

#[test]
fn integral_beyond_the_band_matches_independent_rule() {
    // (1/π)∫ log|2 sin y - a| dy = ∫ log|Δ - a| D(Δ) dΔ, smooth for |a| > 2.
    let tol = ToleranceSpec::quad();
    for a in [2.5, 3.0, 4.0, -3.0] {
        let oracle = gauss_chebyshev(|d: f64| (d - a).abs().ln(), 4000);
        let value = i_integral(a, &tol).unwrap();
        assert!((value - oracle).abs() < 1e-6, "a={a}: {value} vs {oracle}");
    }
    let i3 = i_integral(3.0, &tol).unwrap();
    assert!((i3 - 0.962_423_650_119_206_9).abs() < 1e-6, "{i3}");
}

#[test]
fn integral_is_even() {
    let tol = ToleranceSpec::quad();
    for a in [0.5, 1.0, 1.5, 3.0] {
        let d = (i_integral(a, &tol).unwrap() - i_integral(-a, &tol).unwrap()).abs();
        assert!(d < 1e-8, "a={a}: {d}");
    }
}

#[test]
fn integral_vanishes_on_the_band() {
    let tol = ToleranceSpec::quad();
    for k in 0..41 {
        let a = -1.9 + 3.8 * k as f64 / 40.0;
        let v = i_integral(a, &tol).unwrap();
        assert!(v.abs() < 1e-6, "a={a}: {v}");
    }
    for a in [-2.0, -1.0, 1.0, 2.0] {
        assert!(i_integral(a, &tol).unwrap().abs() < 1e-6, "a={a}");
    }
}

#[test]
fn quadrature_and_decomposition_agree() {
    let tol = ToleranceSpec::quad();
    for m in 2..=7 {
        let q = average_lyapunov_quadrature(m, &tol).unwrap().value;
        assert!((q - (m as f64).ln()).abs() < 1e-4, "m={m}: {q}");
        let d = lyapunov_decomposition(m, &tol).unwrap();
        assert!((q - d).abs() < 2e-4, "m={m}: {q} vs {d}");
    }
}

#[test]
fn orbit_average_agrees_with_quadrature() {
    let tol = ToleranceSpec::quad();
    for m in 2..=4 {
        let q = average_lyapunov_quadrature(m, &tol).unwrap();
        let o = average_lyapunov_orbit(m, 0.123456, 1_000_000).unwrap();
        let combined = (q.error_estimate.powi(2) + o.error_estimate.powi(2)).sqrt();
        assert!((o.value - q.value).abs() < 3.0 * combined, "m={m}: {} vs {} (se {combined})", o.value, q.value);
    }
}

#[test]
fn orbit_average_rejects_bad_starts() {
    assert!(average_lyapunov_orbit(2, 2.0, 10).is_err());
    assert!(average_lyapunov_orbit(1, 0.1, 10).is_err());
    assert!(average_lyapunov_orbit(2, 0.1, 0).is_err());
}

#[test]
fn roots_have_small_residuals() {
    for m in 1..=16 {
        let roots = roots_fm(m).unwrap();
        assert_eq!(roots.len(), m as usize);
        assert!(roots.windows(2).all(|w| w[0] < w[1]));
        let poly = gen_logistic_coeffs(m);
        for r in roots {
            assert!(poly.eval(r).abs() < 1e-9, "m={m} root {r}");
        }
    }
}

#[test]
fn critical_points_zero_the_derivative() {
    for m in 2..=8 {
        let deriv = gen_logistic_coeffs(m).derivative();
        for c in critical_points_fm(m) {
            assert!(deriv.eval(c).abs() < 1e-9, "m={m} c={c}");
        }
    }
}

proptest! {
    #[test]
    fn tent_local_exponent_is_log_m(m in 1u32..10, x in 0.0f64..1.0) {
        let map = MapDescriptor::tent(m).unwrap();
        if let Ok(v) = local_lyapunov(&map, x) {
            prop_assert!((v - (m as f64).ln()).abs() < 1e-15);
        }
    }

    #[test]
    fn local_exponent_is_log_abs_derivative(m in 2u32..8, x in -1.99f64..1.99) {
        let map = MapDescriptor::gen_logistic(m).unwrap();
        let d = gen_logistic_coeffs(m).derivative().eval(x);
        prop_assume!(d.abs() > 1e-6);
        prop_assert!((local_lyapunov(&map, x).unwrap() - d.abs().ln()).abs() < 1e-9);
    }
}
