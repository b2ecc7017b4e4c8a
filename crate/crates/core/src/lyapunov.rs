//! Lyapunov exponents of `f_m` and `g_m`, and the logarithmic integrals
//! `I(a) = (1/π) ∫_{-π/2}^{π/2} log|2 sin y - a| dy`.

use crate::error::{Error, Result};
use crate::hill::discriminant_density;
use crate::maps::{eval_map, map_derivative, MapDescriptor, MapFamily};
use crate::numerics::{quad_singular, ToleranceSpec};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

/// Iterations discarded before an orbit average.
pub const BURN_IN: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LyapunovMethod {
    Quadrature,
    OrbitAverage,
    PiecewiseExact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovResult {
    pub m: u32,
    /// Exponent in nats.
    pub value: f64,
    pub method: LyapunovMethod,
    pub error_estimate: f64,
    /// Orbit restarts after landing on a critical point.
    #[serde(default)]
    pub perturbations: usize,
}

fn is_breakpoint(slope: u32, x: f64, upper: f64) -> bool {
    let s = slope as f64 * x;
    x > 0.0 && x < upper && s == s.round()
}

/// `log|f'(x)|`.
pub fn local_lyapunov(map: &MapDescriptor, x: f64) -> Result<f64> {
    match map.family {
        MapFamily::Tent { m } if is_breakpoint(m, x, 1.0) => {
            return Err(Error::Singular(format!("x = {x} is a breakpoint of the tent map g_{m}")));
        }
        MapFamily::Fold { l } if is_breakpoint(l, x, f64::INFINITY) => {
            return Err(Error::Singular(format!("x = {x} is a breakpoint of K_{l}")));
        }
        _ => {}
    }
    let d = map_derivative(map, x)?;
    let scale = match map.family {
        MapFamily::GenLogistic { m } | MapFamily::Chebyshev { m } => (m as f64).powi(2),
        MapFamily::Logistic { r } => r.abs().max(1.0),
        _ => 1.0,
    };
    if d.abs() <= f64::EPSILON * scale {
        return Err(Error::Singular(format!("x = {x} is a critical point of {:?}", map.family)));
    }
    Ok(d.abs().ln())
}

/// `f_m'(2cos θ) = m sin(mθ)/sin θ`, accurate near the critical points.
fn genlogistic_derivative(m: u32, x: f64) -> f64 {
    let mf = m as f64;
    if x.abs() >= 2.0 {
        let sign = if x < 0.0 && m.is_multiple_of(2) { -1.0 } else { 1.0 };
        return sign * mf * mf;
    }
    let theta = (x / 2.0).acos();
    mf * (mf * theta).sin() / theta.sin()
}

/// `2cos(jπ/m)`, `j = 1..m-1`, ascending.
pub fn critical_points_fm(m: u32) -> Vec<f64> {
    let mut c: Vec<f64> = (1..m).map(|j| 2.0 * (j as f64 * PI / m as f64).cos()).collect();
    c.reverse();
    c
}

/// `∫ log|f_m'| D` over `[-2, 2]`.
pub fn average_lyapunov_quadrature(m: u32, tol: &ToleranceSpec) -> Result<LyapunovResult> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("degree m must be at least 2, got {m}")));
    }
    let mut singular = critical_points_fm(m);
    singular.push(-2.0);
    singular.push(2.0);
    let r = quad_singular(
        |x| {
            let d = discriminant_density(x).unwrap_or(0.0);
            if d == 0.0 {
                0.0
            } else {
                genlogistic_derivative(m, x).abs().ln() * d
            }
        },
        -2.0,
        2.0,
        &singular,
        tol,
    )?;
    Ok(LyapunovResult {
        m,
        value: r.value,
        method: LyapunovMethod::Quadrature,
        error_estimate: r.error,
        perturbations: 0,
    })
}

/// Birkhoff average of `log|f_m'|` over `n` iterations after the burn-in.
pub fn average_lyapunov_orbit(m: u32, x0: f64, n: usize) -> Result<LyapunovResult> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("degree m must be at least 2, got {m}")));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one iteration".into()));
    }
    if !(x0 > -2.0 && x0 < 2.0) {
        return Err(Error::Domain(format!("x0 = {x0} must lie in (-2, 2)")));
    }
    let map = MapDescriptor::gen_logistic(m)?;
    let mut x = x0;
    let mut perturbations = 0;
    for _ in 0..BURN_IN {
        x = eval_map(&map, x)?;
    }
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    let mut i = 0;
    while i < n {
        let l = genlogistic_derivative(m, x).abs().ln();
        if !l.is_finite() {
            perturbations += 1;
            x = (x + 1e-9 * perturbations as f64).clamp(-2.0, 2.0);
            if perturbations > 1000 {
                return Err(Error::Numerical(format!("orbit from {x0} keeps hitting critical points")));
            }
            continue;
        }
        sum += l;
        sum_sq += l * l;
        x = eval_map(&map, x)?;
        i += 1;
    }
    let nf = n as f64;
    let mean = sum / nf;
    let var = if n > 1 { ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0) } else { f64::INFINITY };
    Ok(LyapunovResult {
        m,
        value: mean,
        method: LyapunovMethod::OrbitAverage,
        error_estimate: (var / nf).sqrt(),
        perturbations,
    })
}

/// The tent map has slope `±m` everywhere off its breakpoints.
pub fn lyapunov_tent(m: u32) -> Result<LyapunovResult> {
    if m < 1 {
        return Err(Error::InvalidArgument("tent degree must be at least 1".into()));
    }
    Ok(LyapunovResult {
        m,
        value: (m as f64).ln(),
        method: LyapunovMethod::PiecewiseExact,
        error_estimate: 0.0,
        perturbations: 0,
    })
}

/// Roots `2cos((2j+1)π/(2m))` of `f_m`, ascending.
pub fn roots_fm(m: u32) -> Result<Vec<f64>> {
    if m < 1 {
        return Err(Error::InvalidArgument("degree m must be at least 1".into()));
    }
    let mut r: Vec<f64> = (0..m)
        .map(|j| if 2 * j + 1 == m { 0.0 } else { 2.0 * ((2 * j + 1) as f64 * PI / (2 * m) as f64).cos() })
        .collect();
    r.reverse();
    Ok(r)
}

/// `I(a)`, with the singularity at `arcsin(a/2)` declared when `|a| ≤ 2`.
pub fn i_integral(a: f64, tol: &ToleranceSpec) -> Result<f64> {
    if !a.is_finite() {
        return Err(Error::InvalidArgument(format!("I(a) needs a finite a, got {a}")));
    }
    let r = if a.abs() <= 2.0 {
        let y0 = (a / 2.0).asin();
        // 2 sin y - a = 4 cos((y+y0)/2) sin((y-y0)/2) avoids cancellation near y0.
        quad_singular(
            |y| (4.0 * ((y + y0) / 2.0).cos() * ((y - y0) / 2.0).sin()).abs().ln(),
            -FRAC_PI_2,
            FRAC_PI_2,
            &[y0],
            tol,
        )?
    } else {
        quad_singular(|y| (2.0 * y.sin() - a).abs().ln(), -FRAC_PI_2, FRAC_PI_2, &[], tol)?
    };
    Ok(r.value / PI)
}

/// Rows `a,I` for each `a`.
pub fn i_integral_sweep_csv(values: &[f64], tol: &ToleranceSpec) -> Result<String> {
    let mut out = String::from("a,I\n");
    for &a in values {
        writeln!(out, "{a:.16e},{:.16e}", i_integral(a, tol)?).unwrap();
    }
    Ok(out)
}

/// `log m + Σ_j I(a_j)` over the roots of `f_m`.
pub fn lyapunov_decomposition(m: u32, tol: &ToleranceSpec) -> Result<f64> {
    let mut total = (m as f64).ln();
    for a in roots_fm(m)? {
        total += i_integral(a, tol)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{LN_2, SQRT_2};

    #[test]
    fn local_exponents() {
        let t = MapDescriptor::tent(3).unwrap();
        assert!((local_lyapunov(&t, 0.1).unwrap() - 3f64.ln()).abs() < 1e-15);
        assert!(matches!(local_lyapunov(&t, 1.0 / 3.0), Err(Error::Singular(_))));
        let f = MapDescriptor::gen_logistic(2).unwrap();
        assert!((local_lyapunov(&f, 1.0).unwrap() - LN_2).abs() < 1e-15);
        assert!(matches!(local_lyapunov(&f, 0.0), Err(Error::Singular(_))));
    }

    #[test]
    fn trigonometric_derivative_matches_polynomial() {
        for m in 1..=8 {
            let map = MapDescriptor::gen_logistic(m).unwrap();
            for k in 0..=40 {
                let x = -2.0 + 0.1 * k as f64;
                let poly = map_derivative(&map, x).unwrap();
                let trig = genlogistic_derivative(m, x);
                assert!((poly - trig).abs() < 1e-10 * (m * m) as f64, "m={m} x={x}: {poly} vs {trig}");
            }
        }
    }

    #[test]
    fn quadrature_gives_log_m() {
        for m in [2, 3, 7] {
            let r = average_lyapunov_quadrature(m, &ToleranceSpec::quad()).unwrap();
            assert!((r.value - (m as f64).ln()).abs() < 1e-4, "m={m}: {}", r.value);
            assert_eq!(r.method, LyapunovMethod::Quadrature);
        }
    }

    #[test]
    fn short_orbit_is_finite_with_large_error() {
        let r = average_lyapunov_orbit(3, 0.3, 10).unwrap();
        assert!(r.value.is_finite());
        assert!(r.error_estimate > 0.05);
    }

    #[test]
    fn tent_is_exact() {
        let r = lyapunov_tent(4).unwrap();
        assert_eq!(r.value, 4f64.ln());
        assert_eq!(r.error_estimate, 0.0);
    }

    #[test]
    fn root_examples() {
        let r2 = roots_fm(2).unwrap();
        assert!((r2[0] + SQRT_2).abs() < 1e-15 && (r2[1] - SQRT_2).abs() < 1e-15);
        let r3 = roots_fm(3).unwrap();
        let s3 = 3f64.sqrt();
        assert!((r3[0] + s3).abs() < 1e-15 && r3[1] == 0.0 && (r3[2] - s3).abs() < 1e-15);
        assert_eq!(roots_fm(1).unwrap(), vec![0.0]);
    }

    #[test]
    fn integral_examples() {
        let tol = ToleranceSpec::quad();
        assert!(i_integral(0.0, &tol).unwrap().abs() < 1e-6);
        assert!(i_integral(1.0, &tol).unwrap().abs() < 1e-6);
        assert!((i_integral(3.0, &tol).unwrap() - ((3.0 + 5f64.sqrt()) / 2.0).ln()).abs() < 1e-6);
    }

    #[test]
    fn sweep_csv_shape() {
        let csv = i_integral_sweep_csv(&[0.0, 2.5], &ToleranceSpec::quad()).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "a,I");
        assert_eq!(lines.len(), 3);
    }
}
