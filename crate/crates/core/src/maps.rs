//! The iterated maps (logistic, generalized logistic, multiple tent, fold,
//! Chebyshev), the coordinate changes between them, explicit orbit formulas
//! and m-ary digit arithmetic.

use crate::error::{Error, Result};
use crate::hill::{monodromy, monodromy_power, Potential};
use crate::numerics::{find_root, ToleranceSpec};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;

/// Which map, with its parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum MapFamily {
    Logistic { r: f64 },
    GenLogistic { m: u32 },
    Tent { m: u32 },
    Fold { l: u32 },
    Chebyshev { m: u32 },
}

/// A closed interval; `hi` may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapDescriptor {
    pub family: MapFamily,
    pub domain: Interval,
    #[serde(skip)]
    poly: Option<PolynomialCoeffs>,
}

impl MapDescriptor {
    pub fn new(family: MapFamily) -> Result<Self> {
        let (domain, poly) = match family {
            MapFamily::Logistic { r } => {
                if !r.is_finite() {
                    return Err(Error::InvalidArgument(format!("logistic parameter must be finite, got {r}")));
                }
                (Interval::new(0.0, 1.0), None)
            }
            MapFamily::GenLogistic { m } => (Interval::new(-2.0, 2.0), Some(gen_logistic_coeffs(check_degree(m)?))),
            MapFamily::Tent { m } => (Interval::new(0.0, 1.0), check_degree(m).map(|_| None)?),
            MapFamily::Fold { l } => (Interval::new(0.0, f64::INFINITY), check_degree(l).map(|_| None)?),
            MapFamily::Chebyshev { m } => (Interval::new(-1.0, 1.0), check_degree(m).map(|_| None)?),
        };
        Ok(Self { family, domain, poly })
    }

    pub fn logistic(r: f64) -> Result<Self> {
        Self::new(MapFamily::Logistic { r })
    }

    pub fn gen_logistic(m: u32) -> Result<Self> {
        Self::new(MapFamily::GenLogistic { m })
    }

    pub fn tent(m: u32) -> Result<Self> {
        Self::new(MapFamily::Tent { m })
    }

    pub fn fold(l: u32) -> Result<Self> {
        Self::new(MapFamily::Fold { l })
    }

    pub fn chebyshev(m: u32) -> Result<Self> {
        Self::new(MapFamily::Chebyshev { m })
    }

    fn poly(&self) -> std::borrow::Cow<'_, PolynomialCoeffs> {
        match (&self.poly, self.family) {
            (Some(p), _) => std::borrow::Cow::Borrowed(p),
            (None, MapFamily::GenLogistic { m }) => std::borrow::Cow::Owned(gen_logistic_coeffs(m)),
            _ => unreachable!("polynomial requested for a non-polynomial map"),
        }
    }
}

fn check_degree(m: u32) -> Result<u32> {
    if m == 0 {
        return Err(Error::InvalidArgument("map degree must be at least 1".into()));
    }
    Ok(m)
}

/// Polynomial coefficients, highest degree first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialCoeffs {
    pub coefficients: Vec<f64>,
}

impl PolynomialCoeffs {
    pub fn degree(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    /// Horner evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients.iter().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> PolynomialCoeffs {
        let n = self.degree();
        if n == 0 {
            return PolynomialCoeffs { coefficients: vec![0.0] };
        }
        let coefficients = self.coefficients[..n].iter().enumerate().map(|(i, &c)| c * (n - i) as f64).collect();
        PolynomialCoeffs { coefficients }
    }
}

/// Integer coefficients of `f_m`, highest degree first, from
/// `p_0 = 2`, `p_1 = x`, `p_{k+1} = x p_k - p_{k-1}`.
///
/// Returns `None` if a coefficient overflows `i128`.
pub fn gen_logistic_coeffs_int(m: u32) -> Option<Vec<i128>> {
    // Stored lowest degree first while building.
    let mut prev: Vec<i128> = vec![2];
    let mut cur: Vec<i128> = vec![0, 1];
    if m == 0 {
        return Some(prev);
    }
    for _ in 1..m {
        let mut next = vec![0i128; cur.len() + 1];
        for (i, &c) in cur.iter().enumerate() {
            next[i + 1] = c;
        }
        for (i, &c) in prev.iter().enumerate() {
            next[i] = next[i].checked_sub(c)?;
        }
        prev = cur;
        cur = next;
    }
    cur.reverse();
    Some(cur)
}

/// Coefficients of the monic degree-`m` polynomial with `f_m(2cos θ) = 2cos(mθ)`.
pub fn gen_logistic_coeffs(m: u32) -> PolynomialCoeffs {
    if let Some(ints) = gen_logistic_coeffs_int(m) {
        return PolynomialCoeffs { coefficients: ints.into_iter().map(|c| c as f64).collect() };
    }
    let mut prev = vec![2.0];
    let mut cur = vec![0.0, 1.0];
    for _ in 1..m {
        let mut next = vec![0.0; cur.len() + 1];
        next[1..].copy_from_slice(&cur);
        for (i, &c) in prev.iter().enumerate() {
            next[i] -= c;
        }
        prev = cur;
        cur = next;
    }
    cur.reverse();
    PolynomialCoeffs { coefficients: cur }
}

/// Piece index of `m x` under the left-piece rule at breakpoints.
fn piece(m: f64, x: f64) -> f64 {
    ((m * x).ceil() - 1.0).max(0.0)
}

fn zigzag(m: f64, x: f64, p: f64) -> f64 {
    if p % 2.0 == 0.0 {
        m * x - p
    } else {
        p + 1.0 - m * x
    }
}

/// `g_m(x)`; the piece is chosen as the one whose closed interval contains
/// `x` on its right end.
pub fn tent(m: u32, x: f64) -> f64 {
    let mf = m as f64;
    zigzag(mf, x, piece(mf, x).min(mf - 1.0))
}

/// `K_l(x)` on `[0, ∞)`: slope `±l` on every cell `[i/l, (i+1)/l]`.
pub fn fold(l: u32, x: f64) -> f64 {
    let lf = l as f64;
    zigzag(lf, x, piece(lf, x))
}

/// `T_m(x)` by the three-term recurrence.
pub fn chebyshev(m: u32, x: f64) -> f64 {
    let (mut a, mut b) = (1.0, x);
    if m == 0 {
        return a;
    }
    for _ in 1..m {
        let c = 2.0 * x * b - a;
        a = b;
        b = c;
    }
    b
}

/// Applies the map to `x`.
///
/// Polynomial maps whose exact image stays in the domain have their
/// rounded value clamped back into it; an image outside the domain by more
/// than roundoff is returned as is so that iteration can report the escape.
pub fn eval_map(map: &MapDescriptor, x: f64) -> Result<f64> {
    if !map.domain.contains(x) {
        return Err(Error::Domain(format!(
            "x = {x} outside the domain [{}, {}] of {:?}",
            map.domain.lo, map.domain.hi, map.family
        )));
    }
    let y = match map.family {
        MapFamily::Logistic { r } => {
            let y = r * x * (1.0 - x);
            if (0.0..=4.0).contains(&r) {
                y.clamp(0.0, 1.0)
            } else {
                y
            }
        }
        MapFamily::GenLogistic { .. } => map.poly().eval(x).clamp(-2.0, 2.0),
        MapFamily::Tent { m } => tent(m, x),
        MapFamily::Fold { l } => fold(l, x),
        MapFamily::Chebyshev { m } => chebyshev(m, x).clamp(-1.0, 1.0),
    };
    Ok(y)
}

/// Derivative of the map at `x`; tent and fold slopes are `±m`.
pub fn map_derivative(map: &MapDescriptor, x: f64) -> Result<f64> {
    if !map.domain.contains(x) {
        return Err(Error::Domain(format!("x = {x} outside the domain of {:?}", map.family)));
    }
    Ok(match map.family {
        MapFamily::Logistic { r } => r * (1.0 - 2.0 * x),
        MapFamily::GenLogistic { .. } => map.poly().derivative().eval(x),
        MapFamily::Tent { m } | MapFamily::Fold { l: m } => {
            let mf = m as f64;
            let mut p = piece(mf, x);
            if let MapFamily::Tent { .. } = map.family {
                p = p.min(mf - 1.0);
            }
            if p % 2.0 == 0.0 {
                mf
            } else {
                -mf
            }
        }
        MapFamily::Chebyshev { m } => {
            // T_m' = m U_{m-1}.
            let (mut a, mut b) = (1.0, 2.0 * x);
            if m == 1 {
                return Ok(1.0);
            }
            for _ in 2..m {
                let c = 2.0 * x * b - a;
                a = b;
                b = c;
            }
            m as f64 * b
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Orbit {
    pub map: MapDescriptor,
    pub x0: f64,
    pub values: Vec<f64>,
}

impl Orbit {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,value\n");
        for (i, v) in self.values.iter().enumerate() {
            writeln!(out, "{i},{v:.16e}").unwrap();
        }
        out
    }
}

/// `x0, F(x0), …, F^n(x0)`.
pub fn iterate(map: &MapDescriptor, x0: f64, n: usize) -> Result<Orbit> {
    if !map.domain.contains(x0) {
        return Err(Error::Domain(format!("initial value {x0} outside the domain of {:?}", map.family)));
    }
    let mut values = Vec::with_capacity(n + 1);
    values.push(x0);
    let mut x = x0;
    for step in 1..=n {
        x = eval_map(map, x)?;
        if !map.domain.contains(x) || !x.is_finite() {
            return Err(Error::Escape { step, value: x });
        }
        values.push(x);
    }
    Ok(Orbit { map: map.clone(), x0, values })
}

/// `C(x) = 2cos(πx)`, taking `[0, 1]` onto `[-2, 2]`.
pub fn conj_cosine(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("cosine conjugacy expects x in [0, 1], got {x}")));
    }
    Ok(2.0 * (PI * x).cos())
}

pub fn conj_cosine_inv(delta: f64) -> Result<f64> {
    if !(-2.0..=2.0).contains(&delta) {
        return Err(Error::Domain(format!("inverse cosine conjugacy expects delta in [-2, 2], got {delta}")));
    }
    Ok((delta / 2.0).acos() / PI)
}

/// `x = (2 - Δ) / 4`.
pub fn conj_mandelbrot(delta: f64) -> f64 {
    (2.0 - delta) / 4.0
}

/// `Δ = 2 - 4x`.
pub fn conj_mandelbrot_inv(x: f64) -> f64 {
    2.0 - 4.0 * x
}

/// `sin²(2ⁿ arcsin √x0)`, the closed-form logistic orbit.
pub fn sine_formula(x0: f64, n: u32) -> Result<f64> {
    if !(0.0..=1.0).contains(&x0) {
        return Err(Error::Domain(format!("sine formula expects x0 in [0, 1], got {x0}")));
    }
    Ok((2f64.powi(n as i32) * x0.sqrt().asin()).sin().powi(2))
}

/// The orbit formula built from the cosine potential.
///
/// With `V = cos(2πx)` and the eigenvalue problem `y'' + V y = λ y`, the
/// trace of the unit-cell monodromy is `Δ₁(λ)` and `f(λ) = (2 - Δ₁(λ)) / 4`.
/// `f` decreases from 1 at `λ₀` to 0 at `λ_top` (slightly above 0), so it is
/// inverted on `[λ₀, λ_top]`.
#[derive(Debug, Clone)]
pub struct MathieuFormula {
    pub lambda0: f64,
    pub lambda_top: f64,
    tol: ToleranceSpec,
}

impl MathieuFormula {
    pub fn new(tol: &ToleranceSpec) -> Result<Self> {
        let tol = *tol;
        let f = |lam: f64| Self::f_with(&tol, lam);
        let root_tol = ToleranceSpec::root();

        let mut lo = 0.0;
        let step = 0.5;
        while f(lo)? < 1.0 {
            lo -= step;
            if lo < -100.0 {
                return Err(Error::Numerical("no lambda with f(lambda) = 1 found below 0".into()));
            }
        }
        let lambda0 = find_root(|l| f(l).map(|v| v - 1.0).unwrap_or(f64::NAN), lo, lo + step, &root_tol)?;

        let mut hi = 0.0;
        let up = 0.005;
        while f(hi)? > 0.0 {
            hi += up;
            if hi > 1.0 {
                return Err(Error::Numerical("no lambda with f(lambda) = 0 found above 0".into()));
            }
        }
        let lambda_top = find_root(|l| f(l).unwrap_or(f64::NAN), hi - up, hi, &root_tol)?;
        Ok(Self { lambda0, lambda_top, tol })
    }

    fn discriminant_with(tol: &ToleranceSpec, lambda: f64) -> Result<crate::hill::Monodromy> {
        // y'' + cos(2πx) y = λ y is the standard form for cos(2π(x + 1/2)) at -λ;
        // the trace does not see the half-period shift.
        monodromy(&Potential::mathieu(), 1.0, -lambda, tol)
    }

    fn f_with(tol: &ToleranceSpec, lambda: f64) -> Result<f64> {
        Ok(conj_mandelbrot(Self::discriminant_with(tol, lambda)?.trace()))
    }

    /// `f(λ) = (2 - Δ₁(λ)) / 4`.
    pub fn f(&self, lambda: f64) -> Result<f64> {
        Self::f_with(&self.tol, lambda)
    }

    /// `f⁻¹(x0)` on `[λ₀, λ_top]`.
    pub fn invert(&self, x0: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x0) {
            return Err(Error::Domain(format!("x0 must lie in [0, 1], got {x0}")));
        }
        if x0 == 1.0 {
            return Ok(self.lambda0);
        }
        if x0 == 0.0 {
            return Ok(self.lambda_top);
        }
        find_root(
            |l| self.f(l).map(|v| v - x0).unwrap_or(f64::NAN),
            self.lambda0,
            self.lambda_top,
            &ToleranceSpec::root(),
        )
    }

    /// `x_n = (2 - Δ_{2ⁿ}(f⁻¹(x0))) / 4`.
    pub fn eval(&self, x0: f64, n: u32) -> Result<f64> {
        let lambda = self.invert(x0)?;
        let m1 = Self::discriminant_with(&self.tol, lambda)?;
        let mn = monodromy_power(&m1, 1u64 << n)?;
        Ok(conj_mandelbrot(mn.trace()))
    }
}

pub fn mathieu_formula(x0: f64, n: u32, tol: &ToleranceSpec) -> Result<f64> {
    MathieuFormula::new(tol)?.eval(x0, n)
}

/// First `count` digits of the greedy base-`m` expansion of `x ∈ [0, 1)`.
pub fn mary_digits(x: f64, m: u32, count: usize) -> Result<Vec<u32>> {
    if m < 2 {
        return Err(Error::InvalidArgument("digit base must be at least 2".into()));
    }
    if !(0.0..1.0).contains(&x) {
        return Err(Error::Domain(format!("digit expansion expects x in [0, 1), got {x}")));
    }
    let mf = m as f64;
    let mut r = x;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let t = r * mf;
        let d = t.floor().min(mf - 1.0);
        out.push(d as u32);
        r = t - d;
    }
    Ok(out)
}

/// Exact greedy base-`m` digits of a rational in `[0, 1)`.
pub fn mary_digits_exact(x: &BigRational, m: u32, count: usize) -> Result<Vec<u32>> {
    if m < 2 {
        return Err(Error::InvalidArgument("digit base must be at least 2".into()));
    }
    if x.is_negative() || *x >= BigRational::one() {
        return Err(Error::Domain(format!("digit expansion expects x in [0, 1), got {x}")));
    }
    let base = BigRational::from_integer(BigInt::from(m));
    let mut r = x.clone();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let t = &r * &base;
        let d = t.floor();
        out.push(d.to_integer().to_u32().expect("digit below base"));
        r = t - d;
    }
    Ok(out)
}

/// Digits of `g_m(x)` predicted from those of `x`: drop the first digit and
/// flip the rest (`d → m-1-d`) when it was odd.
pub fn digit_shift_predict(digits: &[u32], m: u32) -> Vec<u32> {
    match digits.split_first() {
        None => Vec::new(),
        Some((first, rest)) if first % 2 == 0 => rest.to_vec(),
        Some((_, rest)) => rest.iter().map(|d| m - 1 - d).collect(),
    }
}

/// `g_m` in exact rational arithmetic, left-piece rule at breakpoints.
pub fn tent_exact(m: u32, x: &BigRational) -> BigRational {
    let mb = BigRational::from_integer(BigInt::from(m));
    let mx = &mb * x;
    let mut p = mx.ceil() - BigRational::one();
    if p.is_negative() {
        p = BigRational::zero();
    }
    let top = &mb - BigRational::one();
    if p > top {
        p = top;
    }
    let even = (p.to_integer() % BigInt::from(2)).is_zero();
    if even {
        mx - p
    } else {
        p + BigRational::one() - mx
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coeffs(m: u32) -> Vec<f64> {
        gen_logistic_coeffs(m).coefficients
    }

    #[test]
    fn small_generalized_logistic_polynomials() {
        assert_eq!(coeffs(1), vec![1.0, 0.0]);
        assert_eq!(coeffs(2), vec![1.0, 0.0, -2.0]);
        assert_eq!(coeffs(3), vec![1.0, 0.0, -3.0, 0.0]);
        assert_eq!(coeffs(4), vec![1.0, 0.0, -4.0, 0.0, 2.0]);
        assert_eq!(coeffs(5), vec![1.0, 0.0, -5.0, 0.0, 5.0, 0.0]);
    }

    fn binomial(n: u64, k: u64) -> u128 {
        (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
    }

    #[test]
    fn coefficients_match_closed_sum() {
        // Coefficient of x^{m-2r} is (-1)^r m/(m-r) C(m-r, r).
        for m in 1..=10u64 {
            let c = gen_logistic_coeffs_int(m as u32).unwrap();
            assert_eq!(c.len() as u64, m + 1);
            for (i, &ci) in c.iter().enumerate() {
                let i = i as u64;
                if i % 2 == 1 {
                    assert_eq!(ci, 0);
                    continue;
                }
                let r = i / 2;
                let expected = if r > m / 2 {
                    0
                } else {
                    let mag = (m as u128 * binomial(m - r, r)) / (m - r) as u128;
                    if r.is_multiple_of(2) {
                        mag as i128
                    } else {
                        -(mag as i128)
                    }
                };
                assert_eq!(ci, expected, "m={m} r={r}");
            }
        }
    }

    #[test]
    fn map_examples() {
        let logistic = MapDescriptor::logistic(4.0).unwrap();
        assert_eq!(eval_map(&logistic, 0.5).unwrap(), 1.0);
        assert_eq!(eval_map(&MapDescriptor::tent(3).unwrap(), 1.0).unwrap(), 1.0);
        let f4 = MapDescriptor::gen_logistic(4).unwrap();
        assert!((eval_map(&f4, 2f64.sqrt()).unwrap() + 2.0).abs() < 1e-12);
        assert!(eval_map(&f4, 2.5).is_err());
        assert!(eval_map(&logistic, -0.1).is_err());
    }

    #[test]
    fn tent_breakpoints_agree() {
        for m in 1..=6u32 {
            for j in 0..=m {
                let x = j as f64 / m as f64;
                let left = zigzag(m as f64, x, (j as f64 - 1.0).max(0.0));
                let right = zigzag(m as f64, x, (j as f64).min(m as f64 - 1.0));
                assert_eq!(left, right);
                assert_eq!(tent(m, x), left);
            }
        }
        assert_eq!(tent(2, 0.5), 1.0);
        assert_eq!(tent(2, 0.25), 0.5);
        assert_eq!(tent(2, 0.75), 0.5);
    }

    #[test]
    fn fold_is_periodic_zigzag() {
        assert_eq!(fold(2, 0.25), 0.5);
        assert_eq!(fold(2, 1.0), 0.0);
        assert_eq!(fold(2, 1.25), 0.5);
        assert_eq!(fold(1, 0.3), 0.3);
        assert!((fold(1, 1.3) - 0.7).abs() < 1e-15);
        assert!((fold(3, 2.0 / 3.0 + 0.1) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn orbit_examples() {
        let o = iterate(&MapDescriptor::logistic(4.0).unwrap(), 0.75, 5).unwrap();
        assert_eq!(o.values, vec![0.75; 6]);
        let f2 = MapDescriptor::gen_logistic(2).unwrap();
        assert_eq!(iterate(&f2, 2.0, 3).unwrap().values, vec![2.0; 4]);
        assert_eq!(iterate(&f2, 0.0, 2).unwrap().values, vec![0.0, -2.0, 2.0]);
        assert!(matches!(iterate(&f2, 2.5, 3), Err(Error::Domain(_))));
        let wild = MapDescriptor::logistic(4.5).unwrap();
        assert!(matches!(iterate(&wild, 0.5, 3), Err(Error::Escape { step: 1, .. })));
    }

    #[test]
    fn orbit_csv() {
        let o = iterate(&MapDescriptor::gen_logistic(2).unwrap(), 0.0, 2).unwrap();
        let csv = o.to_csv();
        assert!(csv.starts_with("step,value\n0,0.0000000000000000e0\n1,-2.0000000000000000e0\n"));
    }

    #[test]
    fn conjugacy_examples() {
        assert_eq!(conj_cosine(0.0).unwrap(), 2.0);
        assert_eq!(conj_cosine(1.0).unwrap(), -2.0);
        assert!(conj_cosine(0.5).unwrap().abs() < 1e-15);
        assert!((conj_cosine(1.0 / 3.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((conj_cosine_inv(1.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(conj_cosine(1.5).is_err());
        assert!(conj_cosine_inv(2.5).is_err());
        assert_eq!(conj_mandelbrot(2.0), 0.0);
        assert_eq!(conj_mandelbrot(-2.0), 1.0);
        assert_eq!(conj_mandelbrot(0.0), 0.5);
        assert_eq!(conj_mandelbrot_inv(0.5), 0.0);
    }

    #[test]
    fn sine_formula_examples() {
        assert_eq!(sine_formula(0.0, 7).unwrap(), 0.0);
        assert!((sine_formula(0.5, 1).unwrap() - 1.0).abs() < 1e-15);
        let direct = iterate(&MapDescriptor::logistic(4.0).unwrap(), 0.3, 6).unwrap();
        assert!((sine_formula(0.3, 6).unwrap() - direct.values[6]).abs() < 1e-6);
    }

    #[test]
    fn mathieu_pipeline() {
        let t = ToleranceSpec::ivp();
        let mf = MathieuFormula::new(&t).unwrap();
        assert!(mf.lambda0 > -10.0 && mf.lambda0 < -9.0, "{}", mf.lambda0);
        // Reference values from an independent scipy integration.
        assert!((mf.lambda0 + 9.366_458_121_555_25).abs() < 1e-6);
        assert!((mf.lambda_top - 0.012_661_594_814_002_475).abs() < 1e-6);
        for x0 in [0.0, 0.001, 0.2, 0.5, 0.9, 1.0] {
            assert!((mf.eval(x0, 0).unwrap() - x0).abs() < 1e-8);
        }
        let direct = iterate(&MapDescriptor::logistic(4.0).unwrap(), 0.2, 4).unwrap();
        assert!((mf.eval(0.2, 4).unwrap() - direct.values[4]).abs() < 1e-5);
    }

    #[test]
    fn digit_examples() {
        assert_eq!(mary_digits(0.5, 2, 3).unwrap(), vec![1, 0, 0]);
        assert_eq!(mary_digits(2.0 / 3.0, 3, 3).unwrap(), vec![2, 0, 0]);
        assert_eq!(mary_digits(5.0 / 9.0, 3, 2).unwrap(), vec![1, 2]);
        let r = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
        assert_eq!(mary_digits_exact(&r(5, 9), 3, 4).unwrap(), vec![1, 2, 0, 0]);
        assert_eq!(digit_shift_predict(&[0, 1, 1], 2), vec![1, 1]);
        assert_eq!(digit_shift_predict(&[1, 0, 1], 2), vec![1, 0]);
        assert_eq!(digit_shift_predict(&[1, 2, 0], 3), vec![0, 2]);
    }

    #[test]
    fn exact_tent_matches_float() {
        let r = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
        for m in 1..=5u32 {
            for k in 0..=40 {
                let x = r(k, 40);
                let exact = tent_exact(m, &x).to_f64().unwrap();
                assert!((exact - tent(m, k as f64 / 40.0)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn chebyshev_values() {
        assert_eq!(chebyshev(0, 0.3), 1.0);
        assert_eq!(chebyshev(1, 0.3), 0.3);
        assert!((chebyshev(3, 0.5) - (4.0 * 0.125 - 1.5)).abs() < 1e-15);
        let c = MapDescriptor::chebyshev(4).unwrap();
        let h = 1e-6;
        let d = (chebyshev(4, 0.3 + h) - chebyshev(4, 0.3 - h)) / (2.0 * h);
        assert!((map_derivative(&c, 0.3).unwrap() - d).abs() < 1e-6);
    }
}
