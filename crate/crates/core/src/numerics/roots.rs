use super::ToleranceSpec;
use crate::error::{Error, Result};

/// Locates a zero of `f` in the bracket `[a, b]` with Brent's method
/// (inverse quadratic / secant steps, safeguarded by bisection).
///
/// Terminates once the bracket is narrower than `abs_tol` (plus a few ulps of
/// the iterate) or an exact zero is hit. The result always lies inside the
/// input bracket.
pub fn find_root<F>(mut f: F, a: f64, b: f64, tol: &ToleranceSpec) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    tol.validate()?;
    let (mut a, mut b) = if a <= b { (a, b) } else { (b, a) };
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !fa.is_finite() || !fb.is_finite() || fa.signum() == fb.signum() {
        return Err(Error::InvalidBracket { a, b, fa, fb });
    }

    // `b` is the best iterate, `c` the opposite end of the bracket.
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;

    for _ in 0..tol.max_steps {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }

        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol.abs_tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }

        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }

        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
        if !fb.is_finite() {
            return Err(Error::Numerical(format!("non-finite function value at {b} during root search")));
        }
    }
    let (lo, hi) = if b < c { (b, c) } else { (c, b) };
    Err(Error::RootNonConvergence { iterations: tol.max_steps, a: lo, b: hi })
}
