//! Density evolution under the piecewise-linear maps and, through the
//! cosine conjugacy, under the generalized logistic maps.
//!
//! Densities on `[-2, 2]` are carried in the coordinate `κ = arccos(Δ/2)/π`,
//! where the invariant density becomes the constant 1 and `f_m` becomes the
//! tent map `g_m`.

use crate::error::{Error, Result};
use crate::maps::fold;
use crate::numerics::{quad_singular, ToleranceSpec};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

/// A piecewise-constant function on `[edges[0], edges[last]]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepDensity {
    edges: Vec<f64>,
    values: Vec<f64>,
}

impl StepDensity {
    /// A nonnegative step density.
    pub fn new(edges: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let p = Self::signed(edges, values)?;
        if p.values.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidArgument("density values must be nonnegative".into()));
        }
        Ok(p)
    }

    /// A step function whose values may take either sign.
    pub fn signed(edges: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 || values.len() + 1 != edges.len() {
            return Err(Error::InvalidArgument(format!(
                "need one value per cell: {} edges, {} values",
                edges.len(),
                values.len()
            )));
        }
        if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument("edges must be finite and strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("density values must be finite".into()));
        }
        Ok(Self { edges, values })
    }

    /// `height` on `[a, b]`.
    pub fn constant(a: f64, b: f64, height: f64) -> Result<Self> {
        Self::new(vec![a, b], vec![height])
    }

    /// `n` equal cells on `[a, b]`.
    pub fn uniform_grid(a: f64, b: f64, values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        let edges = (0..=n).map(|i| if i == n { b } else { a + (b - a) * i as f64 / n as f64 }).collect();
        Self::new(edges, values)
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.edges[0], *self.edges.last().unwrap())
    }

    pub fn widths(&self) -> impl Iterator<Item = f64> + '_ {
        self.edges.windows(2).map(|w| w[1] - w[0])
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().zip(self.widths()).map(|(v, w)| v * w).sum()
    }

    /// `∫|p|`.
    pub fn l1_norm(&self) -> f64 {
        self.values.iter().zip(self.widths()).map(|(v, w)| v.abs() * w).sum()
    }

    pub fn scaled(&self, factor: f64) -> StepDensity {
        StepDensity { edges: self.edges.clone(), values: self.values.iter().map(|v| v * factor).collect() }
    }

    /// Rescaled to unit mass.
    pub fn normalized(&self) -> Result<StepDensity> {
        let mass = self.mass();
        if !(mass > 0.0) {
            return Err(Error::InvalidArgument("cannot normalize a density of nonpositive mass".into()));
        }
        Ok(self.scaled(1.0 / mass))
    }

    fn cell_of(&self, x: f64) -> Option<usize> {
        let (a, b) = self.domain();
        if !(x >= a && x <= b) {
            return None;
        }
        let i = self.edges.partition_point(|&e| e <= x);
        Some(i.saturating_sub(1).min(self.values.len() - 1))
    }

    /// Value at `x`, zero outside the domain.
    pub fn eval(&self, x: f64) -> f64 {
        self.cell_of(x).map_or(0.0, |i| self.values[i])
    }

    /// `∫_a^b p`, with `p` extended by zero.
    pub fn mass_between(&self, a: f64, b: f64) -> f64 {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let mut total = 0.0;
        for (i, w) in self.edges.windows(2).enumerate() {
            let l = w[0].max(lo);
            let r = w[1].min(hi);
            if r > l {
                total += self.values[i] * (r - l);
            }
        }
        if a <= b {
            total
        } else {
            -total
        }
    }

    /// Pointwise linear combination `α p + β q` on the merged grid.
    pub fn combine(&self, alpha: f64, other: &StepDensity, beta: f64) -> Result<StepDensity> {
        check_same_domain(self, other)?;
        let edges = merge_edges(&self.edges, &other.edges);
        let values = edges
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                alpha * self.eval(mid) + beta * other.eval(mid)
            })
            .collect();
        StepDensity::signed(edges, values)
    }

    /// Rows `edge_left,edge_right,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("edge_left,edge_right,value\n");
        for (i, w) in self.edges.windows(2).enumerate() {
            writeln!(out, "{:.16e},{:.16e},{:.16e}", w[0], w[1], self.values[i]).unwrap();
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("step density serializes")
    }
}

fn check_same_domain(p: &StepDensity, q: &StepDensity) -> Result<()> {
    let (a, b) = p.domain();
    let (c, d) = q.domain();
    let scale = 1e-12 * (b - a).abs().max(1.0);
    if (a - c).abs() > scale || (b - d).abs() > scale {
        return Err(Error::Domain(format!("densities live on different domains: [{a}, {b}] vs [{c}, {d}]")));
    }
    Ok(())
}

/// Sorted union of two edge lists, dropping near-duplicates from rounding.
fn merge_edges(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut all: Vec<f64> = a.iter().chain(b).copied().collect();
    dedup_sorted(&mut all);
    all
}

fn dedup_sorted(v: &mut Vec<f64>) {
    v.sort_by(f64::total_cmp);
    v.dedup_by(|x, prev| (*x - *prev).abs() <= 8.0 * f64::EPSILON * prev.abs().max(1.0));
}

/// Frobenius–Perron image of `p` under the zigzag with slope `±m` on the
/// cells `[q/m, (q+1)/m]`, `q ∈ pieces`, landing on `[0, 1]`.
fn pushforward_zigzag(p: &StepDensity, m: u32, pieces: std::ops::Range<u64>) -> StepDensity {
    let mf = m as f64;
    let mut cuts: Vec<f64> = vec![0.0, 1.0];
    cuts.extend(p.edges.iter().map(|&e| fold(m, e)).filter(|y| (0.0..=1.0).contains(y)));
    dedup_sorted(&mut cuts);
    let values = cuts
        .windows(2)
        .map(|w| {
            let y = 0.5 * (w[0] + w[1]);
            let sum: f64 = pieces
                .clone()
                .map(|q| {
                    let qf = q as f64;
                    let x = if q % 2 == 0 { (y + qf) / mf } else { (qf + 1.0 - y) / mf };
                    p.eval(x)
                })
                .sum();
            sum / mf
        })
        .collect();
    StepDensity { edges: cuts, values }
}

/// Exact image of a step function on `[0, 1]` under `g_m`.
pub fn pushforward_tent(p: &StepDensity, m: u32) -> Result<StepDensity> {
    if m == 0 {
        return Err(Error::InvalidArgument("tent degree must be at least 1".into()));
    }
    let (a, b) = p.domain();
    if a < 0.0 || b > 1.0 {
        return Err(Error::Domain(format!("tent pushforward needs a density on [0, 1], got [{a}, {b}]")));
    }
    Ok(pushforward_zigzag(p, m, 0..m as u64))
}

/// Exact image of a boundedly supported step function on `[0, ∞)` under `K_l`.
pub fn pushforward_fold(p: &StepDensity, l: u32) -> Result<StepDensity> {
    if l == 0 {
        return Err(Error::InvalidArgument("fold order must be at least 1".into()));
    }
    let (a, b) = p.domain();
    if a < 0.0 {
        return Err(Error::Domain(format!("fold pushforward needs a density on [0, inf), got [{a}, {b}]")));
    }
    let lf = l as f64;
    let first = (lf * a).floor() as u64;
    let last = ((lf * b).ceil() as u64).max(first + 1);
    Ok(pushforward_zigzag(p, l, first..last))
}

/// Nonnegative density given by a function, with the points where it is
/// unbounded declared.
#[derive(Clone)]
pub struct SmoothDensity {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub domain: (f64, f64),
    pub singularities: Vec<f64>,
}

impl std::fmt::Debug for SmoothDensity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SmoothDensity")
            .field("domain", &self.domain)
            .field("singularities", &self.singularities)
            .finish()
    }
}

impl SmoothDensity {
    pub fn new<F>(f: F, domain: (f64, f64), singularities: Vec<f64>) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(domain.0 < domain.1) || !domain.0.is_finite() || !domain.1.is_finite() {
            return Err(Error::InvalidArgument(format!("invalid domain [{}, {}]", domain.0, domain.1)));
        }
        if singularities.iter().any(|&s| s < domain.0 || s > domain.1) {
            return Err(Error::InvalidArgument("declared singularities must lie in the domain".into()));
        }
        Ok(Self { f: Arc::new(f), domain, singularities })
    }

    /// `D(Δ)` on `[-2, 2]`, unbounded at both ends.
    pub fn discriminant() -> Self {
        Self::new(|d| invariant_density(InvariantKind::DiscriminantD, d).unwrap_or(0.0), (-2.0, 2.0), vec![-2.0, 2.0])
            .unwrap()
    }

    /// `q(x)` on `[0, 1]`, unbounded at both ends.
    pub fn logistic() -> Self {
        Self::new(|x| invariant_density(InvariantKind::LogisticQ, x).unwrap_or(0.0), (0.0, 1.0), vec![0.0, 1.0])
            .unwrap()
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x < self.domain.0 || x > self.domain.1 {
            0.0
        } else {
            (self.f)(x)
        }
    }

    /// A density with a declared point of unboundedness is not of bounded
    /// variation.
    pub fn is_bounded_variation(&self) -> bool {
        self.singularities.is_empty()
    }
}

/// `∫|p - q|` between two step densities on a common domain, exact on the
/// merged grid.
pub fn l1_distance(p: &StepDensity, q: &StepDensity) -> Result<f64> {
    Ok(p.combine(1.0, q, -1.0)?.l1_norm())
}

/// `∫|p - s|` against a smooth density, by quadrature on every cell of `p`
/// split at the declared singularities of `s`.
pub fn l1_distance_smooth(p: &StepDensity, s: &SmoothDensity, tol: &ToleranceSpec) -> Result<f64> {
    let (a, b) = p.domain();
    let scale = 1e-12 * (b - a).abs().max(1.0);
    if (a - s.domain.0).abs() > scale || (b - s.domain.1).abs() > scale {
        return Err(Error::Domain(format!(
            "step density on [{a}, {b}] compared with smooth density on [{}, {}]",
            s.domain.0, s.domain.1
        )));
    }
    let cuts = merge_edges(&p.edges, &s.singularities);
    let total_width = b - a;
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (l, r) = (w[0], w[1]);
        let h = p.eval(0.5 * (l + r));
        let sing: Vec<f64> = [l, r].into_iter().filter(|x| s.singularities.iter().any(|y| y == x)).collect();
        let share = tol.abs_tol * (r - l) / total_width;
        let cell_tol = ToleranceSpec { abs_tol: share.max(f64::MIN_POSITIVE), ..*tol };
        total += quad_singular(|x| (h - s.eval(x)).abs(), l, r, &sing, &cell_tol)?.value;
    }
    Ok(total)
}

/// Total variation of `p` extended by zero outside its domain.
pub fn variation(p: &StepDensity) -> f64 {
    let inner: f64 = p.values.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    p.values[0].abs() + inner + p.values.last().unwrap().abs()
}

/// Step approximation with cells of width `1/l`, sampling at midpoints.
/// The last cell is shortened if the domain length is not a multiple of `1/l`.
pub fn step_approximate(p: &SmoothDensity, l: u32) -> Result<StepDensity> {
    if l == 0 {
        return Err(Error::InvalidArgument("step width 1/l needs l >= 1".into()));
    }
    if !p.is_bounded_variation() {
        return Err(Error::NotBoundedVariation(format!(
            "density is unbounded at {:?}, so it has no step approximation with a variation bound",
            p.singularities
        )));
    }
    let (a, b) = p.domain;
    let lf = l as f64;
    let cells = ((b - a) * lf - 1e-9).ceil().max(1.0) as usize;
    let mut edges: Vec<f64> = (0..cells).map(|i| a + i as f64 / lf).collect();
    edges.push(b);
    let values = edges.windows(2).map(|w| p.eval(0.5 * (w[0] + w[1]))).collect();
    StepDensity::new(edges, values)
}

/// `Σ_{i<i_max} 2^{i/2} 1_{(2^{-(i+1)}, 2^{-i}]}` on `[0, 1]`, with a zero
/// cell on `[0, 2^{-i_max}]`.
pub fn counterexample_density(i_max: u32) -> Result<StepDensity> {
    if i_max == 0 {
        return Err(Error::InvalidArgument("i_max must be at least 1".into()));
    }
    let mut edges = vec![0.0];
    let mut values = vec![0.0];
    for i in (0..i_max).rev() {
        edges.push(0.5f64.powi(i as i32 + 1));
        values.push(2f64.powf(i as f64 / 2.0));
    }
    edges.push(1.0);
    StepDensity::new(edges, values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvariantKind {
    /// `q(x) = 1 / (π √(x(1-x)))` on `(0, 1)`.
    LogisticQ,
    /// `D(Δ) = 1 / (π √(4 - Δ²))` on `(-2, 2)`.
    DiscriminantD,
}

pub fn invariant_density(kind: InvariantKind, x: f64) -> Result<f64> {
    match kind {
        InvariantKind::LogisticQ => {
            if !(x > 0.0 && x < 1.0) {
                return Err(Error::Domain(format!("q is defined on (0, 1), got {x}")));
            }
            Ok(1.0 / (PI * (x * (1.0 - x)).sqrt()))
        }
        InvariantKind::DiscriminantD => crate::hill::discriminant_density(x),
    }
}

/// `F(Δ) = 1/2 + arcsin(Δ/2)/π`.
pub fn invariant_cdf(delta: f64) -> Result<f64> {
    if !(-2.0..=2.0).contains(&delta) {
        return Err(Error::Domain(format!("cdf defined on [-2, 2], got {delta}")));
    }
    Ok(0.5 + (delta / 2.0).asin() / PI)
}

/// `F⁻¹(u) = -2cos(πu)`.
pub fn invariant_quantile(u: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::Domain(format!("quantile defined on [0, 1], got {u}")));
    }
    Ok(-2.0 * (PI * u).cos())
}

/// A density on `[-2, 2]` stored through its `κ`-image on `n` equal cells.
///
/// The `Δ`-density is `v_j · D(Δ)` for `κ(Δ)` in cell `j`, so the `L¹`
/// distance to `D` is `Σ|v_j - 1| / n` exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaDensity {
    values: Vec<f64>,
}

/// Default number of `κ` cells.
pub const DEFAULT_KAPPA_RESOLUTION: usize = 1 << 14;

impl KappaDensity {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidArgument("kappa cell values must be finite and nonnegative".into()));
        }
        Ok(Self { values })
    }

    /// The invariant density: constant 1 in `κ`.
    pub fn invariant(resolution: usize) -> Result<Self> {
        Self::new(vec![1.0; resolution])
    }

    fn cell_delta_bounds(j: usize, n: usize) -> (f64, f64) {
        // κ increases as Δ decreases.
        let lo = 2.0 * (PI * (j + 1) as f64 / n as f64).cos();
        let hi = 2.0 * (PI * j as f64 / n as f64).cos();
        (lo, hi)
    }

    /// Conservative projection of a step density in `Δ`: each `κ` cell keeps
    /// the exact mass of its `Δ`-image.
    pub fn from_delta_step(p: &StepDensity, resolution: usize) -> Result<Self> {
        let (a, b) = p.domain();
        if a < -2.0 || b > 2.0 {
            return Err(Error::Domain(format!("density must live inside [-2, 2], got [{a}, {b}]")));
        }
        if resolution == 0 {
            return Err(Error::InvalidArgument("resolution must be positive".into()));
        }
        let n = resolution as f64;
        let values = (0..resolution)
            .map(|j| {
                let (lo, hi) = Self::cell_delta_bounds(j, resolution);
                p.mass_between(lo, hi) * n
            })
            .collect();
        Self::new(values)
    }

    /// Conservative projection of a smooth `Δ`-density by per-cell quadrature.
    pub fn from_delta_smooth(p: &SmoothDensity, resolution: usize, tol: &ToleranceSpec) -> Result<Self> {
        if resolution == 0 {
            return Err(Error::InvalidArgument("resolution must be positive".into()));
        }
        let n = resolution as f64;
        let mut values = Vec::with_capacity(resolution);
        for j in 0..resolution {
            let (lo, hi) = Self::cell_delta_bounds(j, resolution);
            let (lo, hi) = (lo.max(p.domain.0), hi.min(p.domain.1));
            if hi <= lo {
                values.push(0.0);
                continue;
            }
            let sing: Vec<f64> = p.singularities.iter().copied().filter(|&s| s >= lo && s <= hi).collect();
            let cell_tol = ToleranceSpec { abs_tol: tol.abs_tol / n, ..*tol };
            let mass = match quad_singular(|x| p.eval(x), lo, hi, &sing, &cell_tol) {
                Ok(r) => r.value,
                // Cells against a singularity may stall just above the per-cell share; the
                // total budget still holds.
                Err(Error::QuadNonConvergence { estimate, error, .. }) if error <= tol.abs_tol => estimate,
                Err(e) => return Err(e),
            };
            values.push(mass * n);
        }
        Self::new(values)
    }

    /// Samples a `κ`-space density at cell midpoints.
    pub fn from_kappa_fn<F: Fn(f64) -> f64>(f: F, resolution: usize) -> Result<Self> {
        let n = resolution as f64;
        Self::new((0..resolution).map(|j| f((j as f64 + 0.5) / n)).collect())
    }

    pub fn resolution(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// `∫ p` over `Δ ∈ [a, b]`.
    pub fn mass_between_delta(&self, a: f64, b: f64) -> f64 {
        let k_lo = (b.clamp(-2.0, 2.0) / 2.0).acos() / PI;
        let k_hi = (a.clamp(-2.0, 2.0) / 2.0).acos() / PI;
        self.as_step().mass_between(k_lo, k_hi)
    }

    /// The `κ`-density as a step function on `[0, 1]`.
    pub fn as_step(&self) -> StepDensity {
        StepDensity::uniform_grid(0.0, 1.0, self.values.clone()).expect("valid kappa grid")
    }

    /// `Δ`-density at `Δ ∈ (-2, 2)`.
    pub fn eval_delta(&self, delta: f64) -> Result<f64> {
        let d = crate::hill::discriminant_density(delta)?;
        let kappa = (delta / 2.0).acos() / PI;
        Ok(self.as_step().eval(kappa) * d)
    }

    /// `‖p - D‖₁` over `[-2, 2]`.
    pub fn l1_to_invariant(&self) -> f64 {
        self.values.iter().map(|v| (v - 1.0).abs()).sum::<f64>() / self.values.len() as f64
    }

    /// Exact image under `f_m`, i.e. under `g_m` in `κ`.
    ///
    /// A uniform grid is mapped onto itself: the preimage of output cell `i`
    /// under each branch is a sub-cell of a single input cell.
    pub fn pushforward(&self, m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("degree must be at least 1".into()));
        }
        let n = self.values.len();
        let mu = m as usize;
        let values = (0..n)
            .map(|i| {
                let sum: f64 = (0..mu)
                    .map(|q| {
                        let j = if q % 2 == 0 { (i + q * n) / mu } else { ((q + 1) * n - i - 1) / mu };
                        self.values[j]
                    })
                    .sum();
                sum / m as f64
            })
            .collect();
        Ok(Self { values })
    }

    /// Conservative `Δ`-step version on the image grid `2cos(πj/n)`.
    pub fn to_delta_step(&self) -> StepDensity {
        let n = self.values.len();
        let mut edges = Vec::with_capacity(n + 1);
        let mut values = Vec::with_capacity(n);
        for j in (0..n).rev() {
            let (lo, hi) = Self::cell_delta_bounds(j, n);
            if edges.is_empty() {
                edges.push(-2.0);
            }
            let hi = if j == 0 { 2.0 } else { hi };
            values.push(self.values[j] / n as f64 / (hi - lo));
            edges.push(hi);
        }
        StepDensity { edges, values }
    }
}

/// `f_m`-image of a step density on `[-2, 2]`, computed on `resolution` cells
/// in `κ`.
pub fn pushforward_genlogistic(p: &StepDensity, m: u32, resolution: usize) -> Result<KappaDensity> {
    KappaDensity::from_delta_step(p, resolution)?.pushforward(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionStep {
    pub step: usize,
    pub l1_to_invariant: f64,
    pub mass: f64,
    pub resolution: usize,
}

/// `steps + 1` records, starting with the initial density.
pub fn evolve_genlogistic(initial: &KappaDensity, m: u32, steps: usize) -> Result<(KappaDensity, Vec<EvolutionStep>)> {
    let mut p = initial.clone();
    let mut report = Vec::with_capacity(steps + 1);
    for step in 0..=steps {
        if step > 0 {
            p = p.pushforward(m)?;
        }
        report.push(EvolutionStep {
            step,
            l1_to_invariant: p.l1_to_invariant(),
            mass: p.mass(),
            resolution: p.resolution(),
        });
    }
    Ok((p, report))
}

/// A closed interval with rational endpoints.
pub type RationalInterval = (BigRational, BigRational);

/// Exact rational interval from `f64` endpoints (every finite float is a
/// dyadic rational).
pub fn rational_interval(a: f64, b: f64) -> Result<RationalInterval> {
    let conv =
        |x: f64| BigRational::from_float(x).ok_or_else(|| Error::InvalidArgument(format!("non-finite endpoint {x}")));
    Ok((conv(a)?, conv(b)?))
}

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn check_unit_interval(iv: &RationalInterval) -> Result<()> {
    if iv.0.is_negative() || iv.1 > BigRational::one() || iv.0 > iv.1 {
        return Err(Error::Domain(format!("interval [{}, {}] is not inside [0, 1]", iv.0, iv.1)));
    }
    Ok(())
}

fn merge_intervals(mut v: Vec<RationalInterval>) -> Vec<RationalInterval> {
    v.sort_by(|a, b| a.0.cmp(&b.0));
    let mut out: Vec<RationalInterval> = Vec::with_capacity(v.len());
    for iv in v {
        match out.last_mut() {
            Some(last) if iv.0 <= last.1 => {
                if iv.1 > last.1 {
                    last.1 = iv.1;
                }
            }
            _ => out.push(iv),
        }
    }
    out
}

/// `g_m^{-n}(target)` as a sorted list of disjoint closed intervals, in
/// exact rational arithmetic.
pub fn preimage_intervals(m: u32, n: u32, target: &RationalInterval) -> Result<Vec<RationalInterval>> {
    if m == 0 {
        return Err(Error::InvalidArgument("tent degree must be at least 1".into()));
    }
    check_unit_interval(target)?;
    let mb = BigRational::from_integer(BigInt::from(m));
    let mut current = vec![target.clone()];
    for _ in 0..n {
        let mut next = Vec::with_capacity(current.len() * m as usize);
        for (a, b) in &current {
            for q in 0..m {
                let qb = BigRational::from_integer(BigInt::from(q));
                if q % 2 == 0 {
                    next.push(((a + &qb) / &mb, (b + &qb) / &mb));
                } else {
                    let top = qb + BigRational::one();
                    next.push(((&top - b) / &mb, (&top - a) / &mb));
                }
            }
        }
        current = merge_intervals(next);
    }
    Ok(current)
}

/// `Leb(g_m^{-n}(A) ∩ B) - |A|·|B|`, exactly.
pub fn mixing_correlation(m: u32, n: u32, a: &RationalInterval, b: &RationalInterval) -> Result<BigRational> {
    check_unit_interval(b)?;
    let pre = preimage_intervals(m, n, a)?;
    let mut overlap = BigRational::zero();
    for (l, r) in &pre {
        let lo = if *l > b.0 { l } else { &b.0 };
        let hi = if *r < b.1 { r } else { &b.1 };
        if hi > lo {
            overlap += hi - lo;
        }
    }
    Ok(overlap - (&a.1 - &a.0) * (&b.1 - &b.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    fn unit() -> StepDensity {
        StepDensity::constant(0.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn tent_keeps_lebesgue() {
        for m in 1..=6 {
            let q = pushforward_tent(&unit(), m).unwrap();
            assert!(l1_distance(&q, &unit()).unwrap() < 1e-15);
        }
    }

    #[test]
    fn tent_two_on_left_half() {
        let p = StepDensity::new(vec![0.0, 0.5, 1.0], vec![2.0, 0.0]).unwrap();
        let q = pushforward_tent(&p, 2).unwrap();
        assert!(l1_distance(&q, &unit()).unwrap() < 1e-15);
    }

    #[test]
    fn aligned_width_steps_flatten() {
        // Width 1/m cells map to the constant mass.
        let p = StepDensity::uniform_grid(0.0, 1.0, vec![0.5, 2.0, 0.1, 1.4]).unwrap();
        let q = pushforward_tent(&p, 4).unwrap();
        let flat = StepDensity::constant(0.0, 1.0, p.mass()).unwrap();
        assert!(l1_distance(&q, &flat).unwrap() < 1e-15);
        let r = StepDensity::uniform_grid(0.0, 3.0, vec![0.1, 0.7, 0.2, 0.3, 0.5, 0.2]).unwrap();
        let folded = pushforward_fold(&r, 2).unwrap();
        let flat = StepDensity::constant(0.0, 1.0, r.mass()).unwrap();
        assert!(l1_distance(&folded, &flat).unwrap() < 1e-15);
    }

    #[test]
    fn fold_of_order_one_is_identity_on_unit_interval() {
        let p = StepDensity::new(vec![0.0, 0.2, 0.7, 1.0], vec![0.5, 1.5, 0.25]).unwrap();
        let q = pushforward_fold(&p, 1).unwrap();
        assert!(l1_distance(&q, &p).unwrap() < 1e-15);
    }

    #[test]
    fn counterexample_masses() {
        let one = counterexample_density(1).unwrap();
        assert_eq!(one.mass(), 0.5);
        // Geometric series: (1/2) Σ_{i<k} 2^{-i/2} = (2+√2)/2 (1 - 2^{-k/2}).
        let limit = (2.0 + SQRT_2) / 2.0;
        for k in [1, 5, 20, 40] {
            let mass = counterexample_density(k).unwrap().mass();
            let expected = limit * (1.0 - 2f64.powf(-(k as f64) / 2.0));
            assert!((mass - expected).abs() < 1e-13, "k={k}: {mass} vs {expected}");
        }
        let tail = limit - counterexample_density(20).unwrap().mass();
        assert!((tail - limit * 2f64.powi(-10)).abs() < 1e-13);
    }

    #[test]
    fn counterexample_error_rate() {
        let p = counterexample_density(40).unwrap();
        let mass = p.mass();
        for n in 0..=12 {
            let q = pushforward_fold(&p, 1 << n).unwrap();
            let err = l1_distance(&q, &StepDensity::constant(0.0, 1.0, mass).unwrap()).unwrap();
            let expected = (2.0 + SQRT_2) / 4.0 * 2f64.powf(-(n as f64) / 2.0);
            assert!((err - expected).abs() < 1e-3 * expected, "n={n}: {err} vs {expected}");
        }
    }

    #[test]
    fn variation_examples() {
        assert_eq!(variation(&unit()), 2.0);
        assert_eq!(variation(&StepDensity::constant(0.3, 0.8, 1.5).unwrap()), 3.0);
        let stairs = StepDensity::uniform_grid(0.0, 3.0, vec![1.0, 2.0, 1.0]).unwrap();
        assert_eq!(variation(&stairs), 4.0);
    }

    #[test]
    fn l1_examples() {
        assert_eq!(l1_distance(&unit(), &unit()).unwrap(), 0.0);
        let half = StepDensity::new(vec![0.0, 0.5, 1.0], vec![2.0, 0.0]).unwrap();
        assert!((l1_distance(&unit(), &half).unwrap() - 1.0).abs() < 1e-15);
        let other = StepDensity::constant(0.0, 2.0, 0.5).unwrap();
        assert!(matches!(l1_distance(&unit(), &other), Err(Error::Domain(_))));
    }

    #[test]
    fn uniform_against_discriminant_density() {
        // Oracle: 1/4 and D cross at Δ* = √(4 - 16/π²); the distance is
        // 2∫_{|Δ|<Δ*}(1/4 - D) = Δ* - (4/π) arcsin(Δ*/2).
        let star = (4.0 - 16.0 / (PI * PI)).sqrt();
        let exact = star - 4.0 / PI * (star / 2.0).asin();
        let u = StepDensity::constant(-2.0, 2.0, 0.25).unwrap();
        let d = l1_distance_smooth(&u, &SmoothDensity::discriminant(), &ToleranceSpec::quad()).unwrap();
        assert!((d - exact).abs() < 1e-9, "{d} vs {exact}");
        assert!((exact - 0.421_027_324_706_037).abs() < 1e-12, "{exact:.15}");
    }

    #[test]
    fn step_approximation() {
        let c = SmoothDensity::new(|_| 1.0, (0.0, 1.0), vec![]).unwrap();
        let s = step_approximate(&c, 3).unwrap();
        assert_eq!(l1_distance_smooth(&s, &c, &ToleranceSpec::quad()).unwrap(), 0.0);
        let lin = SmoothDensity::new(|x| x, (0.0, 1.0), vec![]).unwrap();
        let s = step_approximate(&lin, 4).unwrap();
        assert_eq!(s.values().len(), 4);
        let err = l1_distance_smooth(&s, &lin, &ToleranceSpec::quad()).unwrap();
        assert!((err - 1.0 / 16.0).abs() < 1e-10, "{err}");
        assert!(matches!(step_approximate(&SmoothDensity::discriminant(), 4), Err(Error::NotBoundedVariation(_))));
    }

    #[test]
    fn invariant_values() {
        assert!((invariant_density(InvariantKind::LogisticQ, 0.5).unwrap() - 2.0 / PI).abs() < 1e-15);
        assert!((invariant_density(InvariantKind::DiscriminantD, 0.0).unwrap() - 0.5 / PI).abs() < 1e-15);
        let q = invariant_density(InvariantKind::LogisticQ, (2.0 - 1.0) / 4.0).unwrap();
        assert!((q / 4.0 - invariant_density(InvariantKind::DiscriminantD, 1.0).unwrap()).abs() < 1e-15);
        assert!(invariant_density(InvariantKind::LogisticQ, 0.0).is_err());
        assert!(invariant_density(InvariantKind::DiscriminantD, 2.0).is_err());
    }

    #[test]
    fn cdf_and_quantile() {
        assert_eq!(invariant_cdf(0.0).unwrap(), 0.5);
        assert_eq!(invariant_cdf(2.0).unwrap(), 1.0);
        assert!(invariant_quantile(0.5).unwrap().abs() < 1e-15);
        assert!((invariant_quantile(1.0 / 3.0).unwrap() + 1.0).abs() < 1e-15);
        assert!(invariant_cdf(2.1).is_err());
        assert!(invariant_quantile(-0.1).is_err());
    }

    #[test]
    fn preimage_examples() {
        let pre = preimage_intervals(2, 1, &(ratio(0, 1), ratio(1, 2))).unwrap();
        assert_eq!(pre, vec![(ratio(0, 1), ratio(1, 4)), (ratio(3, 4), ratio(1, 1))]);
        let full = preimage_intervals(2, 1, &(ratio(0, 1), ratio(1, 1))).unwrap();
        assert_eq!(full, vec![(ratio(0, 1), ratio(1, 1))]);
        let three = preimage_intervals(3, 1, &(ratio(0, 1), ratio(1, 3))).unwrap();
        assert_eq!(three, vec![(ratio(0, 1), ratio(1, 9)), (ratio(5, 9), ratio(7, 9))]);
    }

    #[test]
    fn mixing_examples() {
        let half = (ratio(0, 1), ratio(1, 2));
        assert!(mixing_correlation(2, 1, &half, &half).unwrap().is_zero());
        let all = (ratio(0, 1), ratio(1, 1));
        for n in 0..4 {
            assert!(mixing_correlation(3, n, &all, &(ratio(1, 7), ratio(3, 5))).unwrap().is_zero());
        }
        // Not m-adic: a nonzero correlation at n = 1.
        let odd = (ratio(0, 1), ratio(1, 3));
        assert!(!mixing_correlation(2, 1, &odd, &odd).unwrap().is_zero());
    }

    #[test]
    fn kappa_pushforward_matches_generic_tent() {
        let values: Vec<f64> = (0..24).map(|j| 0.5 + ((j * 7) % 5) as f64 * 0.25).collect();
        let k = KappaDensity::new(values).unwrap();
        for m in 1..=5 {
            let fast = k.pushforward(m).unwrap().as_step();
            let generic = pushforward_tent(&k.as_step(), m).unwrap();
            assert!(l1_distance(&fast, &generic).unwrap() < 1e-14, "m={m}");
        }
    }

    #[test]
    fn discretized_invariant_is_fixed() {
        let d = KappaDensity::from_delta_smooth(&SmoothDensity::discriminant(), 4096, &ToleranceSpec::quad()).unwrap();
        assert!(d.l1_to_invariant() < 1e-9);
        let pushed = d.pushforward(3).unwrap();
        assert!(pushed.l1_to_invariant() <= 1e-3);
    }

    #[test]
    fn uniform_delta_density_in_kappa() {
        let u = StepDensity::constant(-2.0, 2.0, 0.25).unwrap();
        let k = KappaDensity::from_delta_step(&u, 1 << 14).unwrap();
        assert!((k.mass() - 1.0).abs() < 1e-12);
        // p_κ = (π/2) sin(πκ).
        let mid = k.values()[1 << 13];
        assert!((mid - PI / 2.0).abs() < 1e-6);
        let back = k.to_delta_step();
        assert!((back.mass() - 1.0).abs() < 1e-12);
        assert!((back.eval(0.3) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn even_inputs_give_identical_images_under_f2() {
        let p = StepDensity::new(vec![-2.0, -1.0, 1.0, 2.0], vec![0.4, 0.1, 0.4]).unwrap();
        // f₂ is even, so folding the mass onto Δ ≤ 0 does not change the image.
        let folded = StepDensity::new(vec![-2.0, -1.0, 0.0, 2.0], vec![0.8, 0.2, 0.0]).unwrap();
        let img = pushforward_genlogistic(&p, 2, 1024).unwrap();
        let img_folded = pushforward_genlogistic(&folded, 2, 1024).unwrap();
        assert!((img.mass() - 1.0).abs() < 1e-12);
        let diff: f64 = img.values().iter().zip(img_folded.values()).map(|(a, b)| (a - b).abs()).sum::<f64>() / 1024.0;
        assert!(diff < 1e-12, "{diff}");
    }
}
