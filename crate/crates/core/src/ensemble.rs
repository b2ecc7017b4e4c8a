//! Seeded Monte Carlo ensembles under `f_m` and their Wasserstein-1
//! distance to the invariant measure.
//!
//! Samples are drawn in fixed-size chunks. Chunk `c` uses ChaCha8 seeded from
//! the run seed with stream `c`, so results do not depend on the number of
//! threads.

use crate::error::{Error, Result};
use crate::maps::{eval_map, MapDescriptor};
use crate::transfer::invariant_quantile;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Samples per RNG stream.
pub const CHUNK_SIZE: usize = 1 << 16;

/// `√(2/π) ∫ √(F(1-F)) dΔ` for the arcsine law on `[-2, 2]`: the expected
/// `√n · W₁` of `n` exact invariant samples.
pub const NOISE_FLOOR_C: f64 = 1.420_817_287_977_993;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialKind {
    ShiftedGamma { shape: f64, scale: f64, shift: f64 },
    Uniform { lo: f64, hi: f64 },
}

/// What to do with draws outside `[-2, 2]` when truncating.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutOfDomain {
    #[default]
    Reject,
    Clamp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialDistribution {
    #[serde(flatten)]
    pub kind: InitialKind,
    pub truncated_to_domain: bool,
    #[serde(default)]
    pub out_of_domain: OutOfDomain,
}

impl InitialDistribution {
    /// `Γ(shape, scale) + shift`, truncated by rejection.
    pub fn shifted_gamma(shape: f64, scale: f64, shift: f64) -> Self {
        Self {
            kind: InitialKind::ShiftedGamma { shape, scale, shift },
            truncated_to_domain: true,
            out_of_domain: OutOfDomain::Reject,
        }
    }

    pub fn uniform(lo: f64, hi: f64) -> Self {
        Self { kind: InitialKind::Uniform { lo, hi }, truncated_to_domain: true, out_of_domain: OutOfDomain::Reject }
    }

    pub fn untruncated(mut self) -> Self {
        self.truncated_to_domain = false;
        self
    }

    pub fn clamped(mut self) -> Self {
        self.out_of_domain = OutOfDomain::Clamp;
        self
    }

    fn sampler(&self) -> Result<Sampler> {
        match self.kind {
            InitialKind::ShiftedGamma { shape, scale, shift } => {
                let g = Gamma::new(shape, scale).map_err(|e| {
                    Error::Config(format!("invalid gamma parameters shape={shape}, scale={scale}: {e}"))
                })?;
                if !shift.is_finite() {
                    return Err(Error::Config(format!("invalid shift {shift}")));
                }
                Ok(Sampler::Gamma(g, shift))
            }
            InitialKind::Uniform { lo, hi } => {
                let u = Uniform::new(lo, hi)
                    .map_err(|e| Error::Config(format!("invalid uniform range [{lo}, {hi}): {e}")))?;
                Ok(Sampler::Uniform(u))
            }
        }
    }
}

enum Sampler {
    Gamma(Gamma<f64>, f64),
    Uniform(Uniform<f64>),
}

impl Sampler {
    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Gamma(g, shift) => g.sample(rng) + shift,
            Sampler::Uniform(u) => u.sample(rng),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Samples {
    pub values: Vec<f64>,
    /// Draws outside `[-2, 2]` that were rejected or clamped.
    pub out_of_domain: usize,
    pub draws: usize,
}

impl Samples {
    pub fn out_of_domain_fraction(&self) -> f64 {
        self.out_of_domain as f64 / self.draws as f64
    }
}

fn in_domain(x: f64) -> bool {
    (-2.0..=2.0).contains(&x)
}

/// `n` deterministic draws from `dist`.
pub fn sample_initial(dist: &InitialDistribution, n: usize, seed: u64) -> Result<Samples> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let sampler = dist.sampler()?;
    let chunks = n.div_ceil(CHUNK_SIZE);
    let parts: Vec<Result<(Vec<f64>, usize, usize)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = CHUNK_SIZE.min(n - c * CHUNK_SIZE);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let mut out = Vec::with_capacity(len);
            let (mut bad, mut draws) = (0usize, 0usize);
            while out.len() < len {
                let x = sampler.draw(&mut rng);
                draws += 1;
                if !dist.truncated_to_domain || in_domain(x) {
                    out.push(x);
                    continue;
                }
                bad += 1;
                match dist.out_of_domain {
                    OutOfDomain::Clamp => out.push(x.clamp(-2.0, 2.0)),
                    OutOfDomain::Reject if bad > 2 * len + 64 => {
                        return Err(Error::Config(format!(
                            "{dist:?} rejects more than half of its draws; widen the distribution"
                        )));
                    }
                    OutOfDomain::Reject => {}
                }
            }
            Ok((out, bad, draws))
        })
        .collect();
    let mut values = Vec::with_capacity(n);
    let (mut bad, mut draws) = (0, 0);
    for part in parts {
        let (v, b, d) = part?;
        values.extend(v);
        bad += b;
        draws += d;
    }
    if dist.out_of_domain == OutOfDomain::Reject && 2 * bad > draws {
        return Err(Error::Config(format!(
            "{dist:?} rejected {bad} of {draws} draws (more than 50%); widen the distribution"
        )));
    }
    Ok(Samples { values, out_of_domain: bad, draws })
}

/// `(1/n) Σ |x_(i) - F⁻¹((i - 1/2)/n)|` for ascending samples in `[-2, 2]`.
pub fn wasserstein1(sorted: &[f64]) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::InvalidArgument("wasserstein1 of an empty sample".into()));
    }
    if let Some(x) = sorted.iter().find(|x| !in_domain(**x)) {
        return Err(Error::Domain(format!("sample {x} outside [-2, 2]")));
    }
    if sorted.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("samples must be sorted ascending".into()));
    }
    let n = sorted.len() as f64;
    let mut total = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        total += (x - invariant_quantile((i as f64 + 0.5) / n)?).abs();
    }
    Ok(total / n)
}

/// Sorts a copy and returns its `W₁` to the invariant measure.
pub fn wasserstein1_unsorted(samples: &[f64]) -> Result<f64> {
    let mut v = samples.to_vec();
    v.par_sort_unstable_by(f64::total_cmp);
    wasserstein1(&v)
}

/// `c/√n`.
pub fn noise_floor(n_samples: usize) -> f64 {
    NOISE_FLOOR_C / (n_samples as f64).sqrt()
}

/// `[1, n*]` with `n*` the index before the first distance at or below
/// `3 × noise_floor`.
pub fn detect_linear_region(distances: &[f64], noise_floor: f64) -> Result<(usize, usize)> {
    if distances.len() < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 distances, got {}", distances.len())));
    }
    let threshold = 3.0 * noise_floor;
    let end = distances.iter().skip(1).position(|&d| d <= threshold).map_or(distances.len() - 1, |p| p);
    if end < 2 {
        return Err(Error::Numerical(format!(
            "linear region [1, {end}] is shorter than two points above 3 x noise floor {noise_floor:.3e}; use more samples"
        )));
    }
    Ok((1, end))
}

/// Least-squares slope of `ln d_n` against `n` over `range`.
pub fn fit_log_slope(distances: &[f64], range: (usize, usize)) -> Result<f64> {
    let (a, b) = range;
    if b <= a || b >= distances.len() {
        return Err(Error::InvalidArgument(format!("bad fit range {range:?}")));
    }
    let pts: Vec<(f64, f64)> = (a..=b).map(|n| (n as f64, distances[n].ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub m: u32,
    pub n_samples: usize,
    pub n_iters: usize,
    pub seed: u64,
    pub distribution: InitialDistribution,
    pub out_of_domain: usize,
    pub distances: Vec<f64>,
    pub fitted_slope: Option<f64>,
    pub fit_range: Option<(usize, usize)>,
    pub noise_floor: f64,
}

impl EnsembleReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Rows `iteration,wasserstein1`.
    pub fn distances_csv(&self) -> String {
        let mut out = String::from("iteration,wasserstein1\n");
        for (i, d) in self.distances.iter().enumerate() {
            writeln!(out, "{i},{d:.16e}").unwrap();
        }
        out
    }
}

/// Iterates `f_m` over an ensemble and records `W₁` after every step.
pub fn convergence_experiment(
    m: u32,
    dist: &InitialDistribution,
    n_samples: usize,
    n_iters: usize,
    seed: u64,
) -> Result<EnsembleReport> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("degree m must be at least 2, got {m}")));
    }
    let map = MapDescriptor::gen_logistic(m)?;
    let samples = sample_initial(dist, n_samples, seed)?;
    let describe = |i: usize, x: f64, step: usize| {
        Error::Config(format!(
            "m={m}, seed={seed}, {dist:?}: sample {i} = {x} lies outside [-2, 2] at iteration {step}"
        ))
    };
    let mut xs = samples.values;
    if let Some((i, &x)) = xs.iter().enumerate().find(|(_, x)| !in_domain(**x)) {
        return Err(describe(i, x, 0));
    }
    let mut distances = Vec::with_capacity(n_iters + 1);
    distances.push(wasserstein1_unsorted(&xs)?);
    for step in 1..=n_iters {
        xs.par_iter_mut().try_for_each(|x| -> Result<()> {
            *x = eval_map(&map, *x)?;
            Ok(())
        })?;
        if let Some((i, &x)) = xs.iter().enumerate().find(|(_, x)| !in_domain(**x)) {
            return Err(describe(i, x, step));
        }
        distances.push(wasserstein1_unsorted(&xs)?);
    }
    let floor = noise_floor(n_samples);
    let (fit_range, fitted_slope) = if n_iters >= 2 {
        let range = detect_linear_region(&distances, floor)?;
        (Some(range), Some(fit_log_slope(&distances, range)?))
    } else {
        (None, None)
    };
    Ok(EnsembleReport {
        m,
        n_samples,
        n_iters,
        seed,
        distribution: *dist,
        out_of_domain: samples.out_of_domain,
        distances,
        fitted_slope,
        fit_range,
        noise_floor: floor,
    })
}
