use super::ToleranceSpec;
use crate::error::{Error, Result};

/// Right-hand side of a first-order system `y' = F(t, y)`.
///
/// `breakpoints` lists abscissae where `F` may be discontinuous or have a kink;
/// the integrator never takes a step across one of them.
pub trait VectorField {
    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]);

    fn breakpoints(&self) -> &[f64] {
        &[]
    }
}

impl<F> VectorField for F
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        self(t, y, dy)
    }
}

/// A closure paired with its declared breakpoints.
pub struct FnField<F> {
    pub f: F,
    pub breakpoints: Vec<f64>,
}

impl<F> FnField<F>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    pub fn new(f: F, breakpoints: Vec<f64>) -> Self {
        Self { f, breakpoints }
    }
}

impl<F> VectorField for FnField<F>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        (self.f)(t, y, dy)
    }

    fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct Stepper {
    n: usize,
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    y_new: Vec<f64>,
}

impl Stepper {
    fn new(n: usize) -> Self {
        Self { n, k: std::array::from_fn(|_| vec![0.0; n]), tmp: vec![0.0; n], y_new: vec![0.0; n] }
    }

    /// One trial step from (t, y) with `k[0] = F(t, y)` already filled.
    /// Returns the scaled error norm; the candidate solution is left in `y_new`
    /// and its derivative in `k[6]`.
    fn attempt<V: VectorField + ?Sized>(&mut self, rhs: &V, t: f64, y: &[f64], h: f64, tol: &ToleranceSpec) -> f64 {
        let n = self.n;
        let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
        let tmp = &mut self.tmp;

        for i in 0..n {
            tmp[i] = y[i] + h * A21 * k1[i];
        }
        rhs.eval(t + C2 * h, tmp, k2);
        for i in 0..n {
            tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        rhs.eval(t + C3 * h, tmp, k3);
        for i in 0..n {
            tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        rhs.eval(t + C4 * h, tmp, k4);
        for i in 0..n {
            tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        rhs.eval(t + C5 * h, tmp, k5);
        for i in 0..n {
            tmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        rhs.eval(t + h, tmp, k6);
        for i in 0..n {
            self.y_new[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        rhs.eval(t + h, &self.y_new, k7);

        let mut err: f64 = 0.0;
        for i in 0..n {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = tol.abs_tol + tol.rel_tol * y[i].abs().max(self.y_new[i].abs());
            err = err.max(e.abs() / scale);
        }
        err
    }
}

/// Integrates `y' = rhs(t, y)` from `t0` to `t1` with an adaptive
/// Dormand–Prince 5(4) pair and returns `y(t1)`.
///
/// Steps are error-controlled per component against
/// `abs_tol + rel_tol * |y|`. The interval is split at every declared
/// breakpoint of `rhs`, so no step straddles one.
pub fn integrate_ivp<V: VectorField + ?Sized>(
    rhs: &V,
    y0: &[f64],
    t0: f64,
    t1: f64,
    tol: &ToleranceSpec,
) -> Result<Vec<f64>> {
    tol.validate()?;
    if !(t0 <= t1) {
        return Err(Error::InvalidArgument(format!("integration interval reversed: [{t0}, {t1}]")));
    }
    let mut y = y0.to_vec();
    if t0 == t1 || y.is_empty() {
        return Ok(y);
    }

    let mut stops: Vec<f64> = rhs.breakpoints().iter().copied().filter(|&b| b > t0 && b < t1).collect();
    stops.sort_by(f64::total_cmp);
    stops.dedup();
    stops.push(t1);

    let mut stepper = Stepper::new(y.len());
    let mut steps = 0usize;
    let mut t = t0;
    let mut h = initial_step(t1 - t0);

    for &stop in &stops {
        rhs.eval(t, &y, &mut stepper.k[0]);
        while t < stop {
            if steps >= tol.max_steps {
                return Err(Error::IvpNonConvergence { steps, t, state: y });
            }
            steps += 1;

            let remaining = stop - t;
            let last = h >= remaining;
            let h_try = if last { remaining } else { h };
            let err = stepper.attempt(rhs, t, &y, h_try, tol);
            if !err.is_finite() {
                h = h_try * 0.1;
                continue;
            }

            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                t = if last { stop } else { t + h_try };
                y.copy_from_slice(&stepper.y_new);
                let (first, rest) = stepper.k.split_at_mut(1);
                first[0].copy_from_slice(&rest[5]);
                h = h_try * factor;
            } else {
                h = h_try * factor.min(1.0);
            }

            if h <= 16.0 * f64::EPSILON * t.abs().max(1.0) && t < stop {
                return Err(Error::IvpNonConvergence { steps, t, state: y });
            }
        }
    }
    Ok(y)
}

fn initial_step(span: f64) -> f64 {
    (span * 1e-3).max(1e-6).min(span)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn tight() -> ToleranceSpec {
        ToleranceSpec::new(1e-12, 1e-12, 1_000_000).unwrap()
    }

    #[test]
    fn zero_field_keeps_state() {
        let rhs = |_t: f64, _y: &[f64], dy: &mut [f64]| dy.fill(0.0);
        let y = integrate_ivp(&rhs, &[1.0, 0.0], 0.0, 5.0, &tight()).unwrap();
        assert_eq!(y, vec![1.0, 0.0]);
    }

    #[test]
    fn harmonic_oscillator_half_period() {
        let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -y[0];
        };
        let y = integrate_ivp(&rhs, &[1.0, 0.0], 0.0, PI, &tight()).unwrap();
        assert_abs_diff_eq!(y[0], -1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(y[1], 0.0, epsilon = 1e-9);
    }

    #[test]
    fn exponential_growth() {
        let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| dy[0] = y[0];
        let y = integrate_ivp(&rhs, &[1.0], 0.0, 1.0, &tight()).unwrap();
        assert_abs_diff_eq!(y[0], std::f64::consts::E, epsilon = 1e-9);
    }

    #[test]
    fn step_budget_exhaustion_reports_state() {
        let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -1e4 * y[0];
        };
        let tol = ToleranceSpec::new(1e-12, 1e-12, 10).unwrap();
        match integrate_ivp(&rhs, &[1.0, 0.0], 0.0, 10.0, &tol) {
            Err(Error::IvpNonConvergence { steps, state, t }) => {
                assert_eq!(steps, 10);
                assert_eq!(state.len(), 2);
                assert!(t < 10.0);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn steps_stop_at_breakpoints() {
        use std::cell::RefCell;
        // Forcing with a kink at t = 0.3; the exact solution is (t - 0.3)^2 / 2 past it.
        let seen = RefCell::new(Vec::new());
        let field = FnField::new(
            |t: f64, _y: &[f64], dy: &mut [f64]| {
                seen.borrow_mut().push(t);
                dy[0] = (t - 0.3).max(0.0);
            },
            vec![0.3],
        );
        let y = integrate_ivp(&field, &[0.0], 0.0, 1.0, &tight()).unwrap();
        assert_abs_diff_eq!(y[0], 0.245, epsilon = 1e-12);
        assert!(seen.borrow().contains(&0.3));
    }

    #[test]
    fn reversed_interval_rejected() {
        let rhs = |_t: f64, _y: &[f64], dy: &mut [f64]| dy.fill(0.0);
        assert!(integrate_ivp(&rhs, &[1.0], 1.0, 0.0, &tight()).is_err());
    }

    #[test]
    fn split_integration_matches_single_pass() {
        let tol = ToleranceSpec::new(1e-10, 1e-10, 1_000_000).unwrap();
        let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = (t.cos() - 3.0) * y[0];
        };
        let whole = integrate_ivp(&rhs, &[1.0, 0.5], 0.0, 4.0, &tol).unwrap();
        let mid = integrate_ivp(&rhs, &[1.0, 0.5], 0.0, 1.7, &tol).unwrap();
        let split = integrate_ivp(&rhs, &mid, 1.7, 4.0, &tol).unwrap();
        for (a, b) in whole.iter().zip(&split) {
            assert!((a - b).abs() <= 2.0 * tol.abs_tol, "{a} vs {b}");
        }
    }
}
