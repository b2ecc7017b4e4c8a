//! Periodic Hill operators `H = -d²/dx² + V(x)`.
//!
//! The two basis solutions of `Hu = λu` with `φ(0) = ψ'(0) = 1`,
//! `φ'(0) = ψ(0) = 0` are integrated across a cell of length `l` and packed
//! into the monodromy matrix
//!
//! ```text
//! M_l(λ) = [ φ(l)   ψ(l)  ]
//!          [ φ'(l)  ψ'(l) ]
//! ```
//!
//! whose trace (the discriminant) decides spectral membership: `λ` lies in
//! the spectrum iff `|Δ_l(λ)| ≤ 2`.

use crate::error::{Error, Result};
use crate::numerics::{find_root, integrate_ivp, FnField, ToleranceSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;

/// Shape of one period of a potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialKind {
    Constant {
        a: f64,
    },
    /// `amplitude * cos(frequency * x)`.
    Cosine {
        amplitude: f64,
        frequency: f64,
    },
    /// Continuous, linear between `(breakpoints[i], values[i])`, wrapping
    /// from the last breakpoint to the first one plus a period.
    PiecewiseLinear {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
    /// Equally spaced samples `samples[i] = V(i * period / n)`, linearly
    /// interpolated and wrapped periodically.
    Tabulated {
        samples: Vec<f64>,
    },
}

/// A real periodic potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    period: f64,
    kind: PotentialKind,
}

impl Potential {
    /// `V ≡ 0`, taken 1-periodic.
    pub fn free() -> Self {
        Self::constant(0.0)
    }

    /// `V ≡ a`, taken 1-periodic.
    pub fn constant(a: f64) -> Self {
        Self { period: 1.0, kind: PotentialKind::Constant { a } }
    }

    pub fn cosine(amplitude: f64, frequency: f64) -> Result<Self> {
        if !(frequency > 0.0) || !frequency.is_finite() {
            return Err(Error::InvalidArgument(format!("cosine frequency must be positive, got {frequency}")));
        }
        Ok(Self { period: 2.0 * PI / frequency, kind: PotentialKind::Cosine { amplitude, frequency } })
    }

    /// `cos(2πx)`, the 1-periodic Mathieu potential.
    pub fn mathieu() -> Self {
        Self { period: 1.0, kind: PotentialKind::Cosine { amplitude: 1.0, frequency: 2.0 * PI } }
    }

    pub fn piecewise_linear(period: f64, breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_period(period)?;
        if breakpoints.is_empty() || breakpoints.len() != values.len() {
            return Err(Error::InvalidArgument(
                "piecewise-linear potential needs matching, non-empty breakpoints and values".into(),
            ));
        }
        if breakpoints[0] < 0.0 || *breakpoints.last().unwrap() >= period {
            return Err(Error::InvalidArgument("breakpoints must lie in [0, period)".into()));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument("breakpoints must be strictly increasing".into()));
        }
        Ok(Self { period, kind: PotentialKind::PiecewiseLinear { breakpoints, values } })
    }

    pub fn tabulated(period: f64, samples: Vec<f64>) -> Result<Self> {
        check_period(period)?;
        if samples.is_empty() {
            return Err(Error::InvalidArgument("tabulated potential needs at least one sample".into()));
        }
        Ok(Self { period, kind: PotentialKind::Tabulated { samples } })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.kind {
            PotentialKind::Constant { a } => *a,
            PotentialKind::Cosine { amplitude, frequency } => amplitude * (frequency * x).cos(),
            PotentialKind::PiecewiseLinear { breakpoints, values } => {
                let t = x.rem_euclid(self.period);
                let n = breakpoints.len();
                if n == 1 {
                    return values[0];
                }
                // Index of the last breakpoint <= t, wrapping below the first.
                let idx = breakpoints.partition_point(|&b| b <= t);
                let (x0, v0, x1, v1) = if idx == 0 {
                    (breakpoints[n - 1] - self.period, values[n - 1], breakpoints[0], values[0])
                } else if idx == n {
                    (breakpoints[n - 1], values[n - 1], breakpoints[0] + self.period, values[0])
                } else {
                    (breakpoints[idx - 1], values[idx - 1], breakpoints[idx], values[idx])
                };
                v0 + (v1 - v0) * (t - x0) / (x1 - x0)
            }
            PotentialKind::Tabulated { samples } => {
                let n = samples.len();
                let u = x.rem_euclid(self.period) / self.period * n as f64;
                let i = (u.floor() as usize).min(n - 1);
                let frac = u - i as f64;
                samples[i] + (samples[(i + 1) % n] - samples[i]) * frac
            }
        }
    }

    /// Kinks of the potential inside `[0, l]`, declared to the integrator.
    pub fn kinks(&self, l: f64) -> Vec<f64> {
        let local: Vec<f64> = match &self.kind {
            PotentialKind::PiecewiseLinear { breakpoints, .. } => breakpoints.clone(),
            PotentialKind::Tabulated { samples } => {
                let n = samples.len();
                (0..n).map(|i| i as f64 * self.period / n as f64).collect()
            }
            _ => return Vec::new(),
        };
        let cells = (l / self.period).ceil() as usize;
        let mut out = Vec::new();
        for c in 0..=cells {
            for &b in &local {
                let x = b + c as f64 * self.period;
                if x > 0.0 && x < l {
                    out.push(x);
                }
            }
        }
        out
    }

    /// A lower bound for `V`, used to start spectral scans below the spectrum.
    pub fn min_value(&self) -> f64 {
        match &self.kind {
            PotentialKind::Constant { a } => *a,
            PotentialKind::Cosine { amplitude, .. } => -amplitude.abs(),
            PotentialKind::PiecewiseLinear { values, .. } => values.iter().copied().fold(f64::INFINITY, f64::min),
            PotentialKind::Tabulated { samples } => samples.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }

    /// Number of whole periods in `l`; errors unless `l` is a positive
    /// integer multiple of the period.
    pub fn cells_in(&self, l: f64) -> Result<u64> {
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::InvalidArgument(format!("cell length must be positive, got {l}")));
        }
        let ratio = l / self.period;
        let k = ratio.round();
        if k < 1.0 || (ratio - k).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "cell length {l} is not an integer multiple of the period {}",
                self.period
            )));
        }
        Ok(k as u64)
    }
}

fn check_period(period: f64) -> Result<()> {
    if !(period > 0.0) || !period.is_finite() {
        return Err(Error::InvalidArgument(format!("period must be positive, got {period}")));
    }
    Ok(())
}

type Mat2 = [[f64; 2]; 2];

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

fn mat_add(a: &Mat2, b: &Mat2) -> Mat2 {
    [[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]]
}

const IDENTITY: Mat2 = [[1.0, 0.0], [0.0, 1.0]];

/// Transfer matrix of the basis solutions across one cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monodromy {
    pub entries: Mat2,
    pub cell_length: f64,
    pub lambda: f64,
}

impl Monodromy {
    pub fn new(entries: Mat2, cell_length: f64, lambda: f64) -> Self {
        Self { entries, cell_length, lambda }
    }

    pub fn identity(lambda: f64) -> Self {
        Self { entries: IDENTITY, cell_length: 0.0, lambda }
    }

    /// Closed form for `V ≡ 0`, valid for either sign of `λ`.
    pub fn free(l: f64, lambda: f64) -> Self {
        let entries = if lambda > 0.0 {
            let w = lambda.sqrt();
            let (s, c) = (l * w).sin_cos();
            [[c, s / w], [-w * s, c]]
        } else if lambda < 0.0 {
            let w = (-lambda).sqrt();
            let (s, c) = ((l * w).sinh(), (l * w).cosh());
            [[c, s / w], [w * s, c]]
        } else {
            [[1.0, l], [0.0, 1.0]]
        };
        Self { entries, cell_length: l, lambda }
    }

    pub fn det(&self) -> f64 {
        let m = &self.entries;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    /// Magnitude of the products cancelling in `det`; the floating-point
    /// error of `det` scales with it.
    pub fn det_condition(&self) -> f64 {
        let m = &self.entries;
        (m[0][0] * m[1][1]).abs() + (m[0][1] * m[1][0]).abs()
    }

    pub fn trace(&self) -> f64 {
        self.entries[0][0] + self.entries[1][1]
    }

    /// Cocycle composition: `self` over `[0, k]` followed by `next` over
    /// `[k, k + l]` is `next * self`.
    pub fn then(&self, next: &Monodromy) -> Monodromy {
        Monodromy {
            entries: mat_mul(&next.entries, &self.entries),
            cell_length: self.cell_length + next.cell_length,
            lambda: self.lambda,
        }
    }
}

/// Matrix power `M^m` by binary exponentiation; the cell length is
/// multiplied by `m`.
pub fn monodromy_power(m: &Monodromy, power: u64) -> Result<Monodromy> {
    if power == 0 {
        return Err(Error::InvalidArgument("monodromy power must be at least 1".into()));
    }
    let mut result = IDENTITY;
    let mut base = m.entries;
    let mut e = power;
    while e > 0 {
        if e & 1 == 1 {
            result = mat_mul(&result, &base);
        }
        e >>= 1;
        if e > 0 {
            base = mat_mul(&base, &base);
        }
    }
    Ok(Monodromy { entries: result, cell_length: m.cell_length * power as f64, lambda: m.lambda })
}

pub fn discriminant(m: &Monodromy) -> f64 {
    m.trace()
}

/// Eigenvalue structure of a unit-determinant 2×2 matrix from its trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenvalueClass {
    /// `|Δ| < 2`: complex conjugate pair on the unit circle.
    Elliptic,
    /// `|Δ| = 2`: repeated eigenvalue ±1.
    Parabolic,
    /// `|Δ| > 2`: two distinct reals `μ, 1/μ`.
    Hyperbolic,
}

pub fn eigenvalue_class(delta: f64) -> EigenvalueClass {
    let gap = delta.abs() - 2.0;
    if gap.abs() <= 1e-12 {
        EigenvalueClass::Parabolic
    } else if gap < 0.0 {
        EigenvalueClass::Elliptic
    } else {
        EigenvalueClass::Hyperbolic
    }
}

/// Integrates the basis solutions over `[0, l]` for spectral parameter `λ`.
pub fn monodromy(v: &Potential, l: f64, lambda: f64, tol: &ToleranceSpec) -> Result<Monodromy> {
    v.cells_in(l)?;
    let field = FnField::new(
        |x: f64, y: &[f64], dy: &mut [f64]| {
            let q = v.eval(x) - lambda;
            dy[0] = y[1];
            dy[1] = q * y[0];
            dy[2] = y[3];
            dy[3] = q * y[2];
        },
        v.kinks(l),
    );
    let y = integrate_ivp(&field, &[1.0, 0.0, 0.0, 1.0], 0.0, l, tol)?;
    Ok(Monodromy { entries: [[y[0], y[2]], [y[1], y[3]]], cell_length: l, lambda })
}

/// Monodromy over `[0, l]` together with its derivative in `λ`, from the
/// variational equations `z'' = (V - λ) z - y`.
pub fn monodromy_with_derivative(v: &Potential, l: f64, lambda: f64, tol: &ToleranceSpec) -> Result<(Monodromy, Mat2)> {
    let field = FnField::new(
        |x: f64, y: &[f64], dy: &mut [f64]| {
            let q = v.eval(x) - lambda;
            dy[0] = y[1];
            dy[1] = q * y[0];
            dy[2] = y[3];
            dy[3] = q * y[2];
            dy[4] = y[5];
            dy[5] = q * y[4] - y[0];
            dy[6] = y[7];
            dy[7] = q * y[6] - y[2];
        },
        v.kinks(l),
    );
    let y0 = [1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0];
    let y = integrate_ivp(&field, &y0, 0.0, l, tol)?;
    let m = Monodromy { entries: [[y[0], y[2]], [y[1], y[3]]], cell_length: l, lambda };
    Ok((m, [[y[4], y[6]], [y[5], y[7]]]))
}

/// `(M^k, d(M^k)/dλ)` by binary exponentiation with the product rule.
fn power_with_derivative(m: &Mat2, dm: &Mat2, k: u64) -> (Mat2, Mat2) {
    let mut r = (IDENTITY, [[0.0; 2]; 2]);
    let mut b = (*m, *dm);
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            r = (mat_mul(&r.0, &b.0), mat_add(&mat_mul(&r.1, &b.0), &mat_mul(&r.0, &b.1)));
        }
        e >>= 1;
        if e > 0 {
            b = (mat_mul(&b.0, &b.0), mat_add(&mat_mul(&b.1, &b.0), &mat_mul(&b.0, &b.1)));
        }
    }
    r
}

/// `(Δ_l(λ), dΔ_l/dλ)` from one period raised to the number of cells.
pub fn discriminant_with_derivative(v: &Potential, l: f64, lambda: f64, tol: &ToleranceSpec) -> Result<(f64, f64)> {
    let cells = v.cells_in(l)?;
    let (m, dm) = monodromy_with_derivative(v, v.period(), lambda, tol)?;
    let (p, dp) = power_with_derivative(&m.entries, &dm, cells);
    Ok((p[0][0] + p[1][1], dp[0][0] + dp[1][1]))
}

/// A closed spectral band `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lower: f64,
    pub upper: f64,
}

/// Spectral bands below a cutoff, with any scan diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandList {
    pub bands: Vec<Band>,
    pub cell_length: f64,
    pub lambda_max: f64,
    /// The last band was cut off at `lambda_max`.
    pub truncated: bool,
    pub warnings: Vec<String>,
}

impl BandList {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("band list serializes")
    }
}

/// Grid density of the band scan, in points per unit of `√λ`.
pub const SCAN_POINTS_PER_UNIT: f64 = 512.0;

/// Extrema of `Δ` whose overshoot past ±2 is below this are treated as
/// closed gaps (touching bands); the overshoot is recorded as a warning.
pub const TOUCH_TOLERANCE: f64 = 1e-7;

/// All maximal intervals of `{λ ≤ lambda_max : |Δ_l(λ)| ≤ 2}`, split where
/// consecutive bands touch.
///
/// The discriminant is sampled on a grid uniform in `√(λ - λ_start)`;
/// critical points of `Δ` are located from sign changes of `dΔ/dλ`. Between
/// consecutive critical points `Δ` is monotone, so each such piece holds at
/// most one band, whose edges are roots of `Δ ∓ 2`.
pub fn spectrum_bands(v: &Potential, l: f64, lambda_max: f64, tol: &ToleranceSpec) -> Result<BandList> {
    v.cells_in(l)?;
    let start = v.min_value() - 1.0;
    if !(lambda_max > start) {
        return Err(Error::InvalidArgument(format!("lambda_max {lambda_max} is below the spectrum")));
    }
    let s_max = (lambda_max - start).sqrt();
    let n = ((SCAN_POINTS_PER_UNIT * s_max).ceil() as usize).max(16);
    let grid: Vec<f64> = (0..=n)
        .map(|i| {
            let s = s_max * i as f64 / n as f64;
            if i == n {
                lambda_max
            } else {
                start + s * s
            }
        })
        .collect();
    let samples: Vec<(f64, f64)> =
        grid.par_iter().map(|&lam| discriminant_with_derivative(v, l, lam, tol)).collect::<Result<_>>()?;

    let delta = |lam: f64| discriminant_with_derivative(v, l, lam, tol).map(|d| d.0);
    let slope = |lam: f64| discriminant_with_derivative(v, l, lam, tol).map(|d| d.1).unwrap_or(f64::NAN);
    let root_tol = ToleranceSpec::root();

    // Monotone pieces between critical points.
    let mut cuts = vec![start];
    for i in 0..n {
        let (d0, d1) = (samples[i].1, samples[i + 1].1);
        if d0 == 0.0 && i > 0 {
            cuts.push(grid[i]);
        } else if d0.signum() != d1.signum() && d1 != 0.0 {
            let c = find_root(slope, grid[i], grid[i + 1], &root_tol)?;
            cuts.push(c);
        }
    }
    cuts.push(lambda_max);

    let mut warnings = Vec::new();
    let mut bands: Vec<Band> = Vec::new();
    let mut truncated = false;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(b > a) {
            continue;
        }
        let (da, db) = (delta(a)?, delta(b)?);
        let interior_a = a != start;
        let interior_b = b != lambda_max;
        for (c, dc, interior) in [(a, da, interior_a), (b, db, interior_b)] {
            if interior {
                let over = dc.abs() - 2.0;
                if over < -TOUCH_TOLERANCE {
                    warnings
                        .push(format!("discriminant extremum inside a band at lambda = {c:.12e} (delta = {dc:.12e})"));
                } else if over > 0.0 && over <= TOUCH_TOLERANCE {
                    warnings.push(format!(
                        "gap at lambda = {c:.12e} below resolution (overshoot {over:.3e}); treated as closed"
                    ));
                }
            }
        }
        let inside = |d: f64, interior: bool| d.abs() <= 2.0 || (interior && d.abs() <= 2.0 + TOUCH_TOLERANCE);
        let decreasing = db < da;
        // Band edge on the `a` side.
        let lower = if inside(da, interior_a) {
            Some(a)
        } else {
            let target = if decreasing { 2.0 } else { -2.0 };
            let crosses = if decreasing { db <= target } else { db >= target };
            if crosses {
                Some(find_root(|x| delta(x).map(|d| d - target).unwrap_or(f64::NAN), a, b, &root_tol)?)
            } else {
                None
            }
        };
        let Some(lower) = lower else { continue };
        let upper = if inside(db, interior_b) {
            b
        } else {
            let target = if decreasing { -2.0 } else { 2.0 };
            find_root(|x| delta(x).map(|d| d - target).unwrap_or(f64::NAN), lower, b, &root_tol)?
        };
        if upper > lower {
            let expected_start = if bands.len().is_multiple_of(2) { 2.0 } else { -2.0 };
            let start_value = if decreasing == (expected_start > 0.0) { expected_start } else { -expected_start };
            if start_value != expected_start {
                warnings.push(format!(
                    "band {} starting at lambda = {lower:.12e} breaks the alternation of band edges; a narrow band may have been missed",
                    bands.len() + 1
                ));
            }
            truncated = b == lambda_max && inside(db, false);
            bands.push(Band { lower, upper });
        }
    }
    Ok(BandList { bands, cell_length: l, lambda_max, truncated, warnings })
}

/// Solves `Δ_l(λ) = 2 cos(l k)` inside a given band.
pub fn band_value(v: &Potential, l: f64, band: &Band, k: f64, tol: &ToleranceSpec) -> Result<f64> {
    if !(k >= 0.0 && k <= PI / l + 1e-15) {
        return Err(Error::Domain(format!("quasi-momentum {k} outside the reduced zone [0, pi/{l}]")));
    }
    let target = 2.0 * (l * k).cos();
    let g = |lam: f64| discriminant_with_derivative(v, l, lam, tol).map(|d| d.0 - target).unwrap_or(f64::NAN);
    let (ga, gb) = (g(band.lower), g(band.upper));
    // Targets at ±2 sit on the band edges.
    let edge_tol = 1e-8;
    if ga.abs() <= edge_tol && ga.abs() <= gb.abs() {
        return Ok(band.lower);
    }
    if gb.abs() <= edge_tol {
        return Ok(band.upper);
    }
    find_root(g, band.lower, band.upper, &ToleranceSpec::root()).map_err(|e| match e {
        Error::InvalidBracket { .. } => Error::Numerical(format!(
            "dispersion root not bracketed in band [{}, {}]; band edges inaccurate",
            band.lower, band.upper
        )),
        other => other,
    })
}

/// `λ_i(k)`: the band function of band `band_index` (1-based).
pub fn band_function(v: &Potential, l: f64, band_index: usize, k: f64, tol: &ToleranceSpec) -> Result<f64> {
    if band_index == 0 {
        return Err(Error::InvalidArgument("band index is 1-based".into()));
    }
    let start = v.min_value() - 1.0;
    let mut lambda_max = start + (PI * (band_index as f64 + 1.0) / l).powi(2) + 10.0;
    for _ in 0..20 {
        let bands = spectrum_bands(v, l, lambda_max, tol)?;
        let complete = if bands.truncated { bands.bands.len().saturating_sub(1) } else { bands.bands.len() };
        if complete >= band_index {
            return band_value(v, l, &bands.bands[band_index - 1], k, tol);
        }
        lambda_max = start + 2.0 * (lambda_max - start);
    }
    Err(Error::Numerical(format!("could not resolve band {band_index}")))
}

/// Band diagram rows `band_index,k,lambda` over `points` quasi-momenta per band.
pub fn band_diagram_csv(v: &Potential, l: f64, bands: &BandList, points: usize, tol: &ToleranceSpec) -> Result<String> {
    let mut out = String::from("band_index,k,lambda\n");
    let count = if bands.truncated { bands.bands.len().saturating_sub(1) } else { bands.bands.len() };
    let points = points.max(2);
    for (i, band) in bands.bands.iter().take(count).enumerate() {
        for j in 0..points {
            let k = PI / l * j as f64 / (points - 1) as f64;
            let lam = band_value(v, l, band, k, tol)?;
            writeln!(out, "{},{:.16e},{:.16e}", i + 1, k, lam).unwrap();
        }
    }
    Ok(out)
}

/// Density of discriminant values over the spectrum,
/// `D(Δ) = 1 / (π √(4 - Δ²))` on `(-2, 2)`.
pub fn discriminant_density(delta: f64) -> Result<f64> {
    if !(delta.abs() < 2.0) {
        return Err(Error::Domain(format!("discriminant density is defined on (-2, 2), got {delta}")));
    }
    Ok(1.0 / (PI * ((2.0 - delta) * (2.0 + delta)).sqrt()))
}
