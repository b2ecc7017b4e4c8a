use super::ToleranceSpec;
use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// Result of a quadrature: estimate, error bound and work done.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub subdivisions: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = resk * 0.5;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let hl = half.abs();
    let value = resk * half;
    let resabs = resabs * hl;
    let resasc = resasc * hl;
    let mut error = ((resk - resg) * half).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    let round = 50.0 * f64::EPSILON * resabs;
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(round);
    }
    Panel { a, b, value, error }
}

/// Globally adaptive bisection on `[a, b]` until the summed error estimate
/// drops below `target`. `budget` is decremented per bisection.
fn adaptive<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, target: f64, budget: &mut usize) -> (f64, f64, bool) {
    let first = gauss_kronrod(f, a, b);
    let mut heap = BinaryHeap::new();
    let mut total = first.value;
    let mut err = first.error;
    // Error of panels too narrow to bisect in floating point.
    let mut frozen = 0.0;
    heap.push(first);
    while err > target {
        if *budget == 0 {
            return (total, err, false);
        }
        let worst = match heap.pop() {
            Some(p) if p.error > 0.0 => p,
            Some(p) => {
                heap.push(p);
                return (total, err, false);
            }
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        let scale = worst.a.abs().max(worst.b.abs()).max(f64::MIN_POSITIVE);
        if (worst.b - worst.a).abs() <= 64.0 * f64::EPSILON * scale || mid == worst.a || mid == worst.b {
            frozen += worst.error;
            heap.push(Panel { error: 0.0, ..worst });
            continue;
        }
        *budget -= 1;
        let left = gauss_kronrod(f, worst.a, mid);
        let right = gauss_kronrod(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        if heap.len() % 64 == 0 {
            // Re-sum to stop drift in the running totals.
            total = heap.iter().map(|p| p.value).sum();
            err = heap.iter().map(|p| p.error).sum::<f64>() + frozen;
        }
    }
    let total = heap.iter().map(|p| p.value).sum();
    let err = heap.iter().map(|p| p.error).sum::<f64>() + frozen;
    (total, err, true)
}

/// Wynn's epsilon algorithm applied to partial sums. Returns the extrapolated
/// limit and an error estimate built from the spread of the last extrapolants.
fn wynn_epsilon(seq: &[f64]) -> Option<(f64, f64)> {
    let n = seq.len();
    if n < 3 {
        return None;
    }
    // prev = column k-1, cur = column k.
    let mut prev: Vec<f64> = vec![0.0; n + 1];
    let mut cur: Vec<f64> = seq.to_vec();
    let mut best: Option<(f64, f64)> = None;
    let mut k = 0usize;
    let mut last_even_tail: Option<f64> = None;
    while cur.len() >= 2 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let diff = cur[i + 1] - cur[i];
            if diff == 0.0 || !diff.is_finite() {
                return best.or_else(|| Some((seq[n - 1], (seq[n - 1] - seq[n - 2]).abs())));
            }
            next.push(prev[i + 1] + 1.0 / diff);
        }
        prev = cur;
        cur = next;
        k += 1;
        if k.is_multiple_of(2) && cur.len() >= 2 {
            let last = cur[cur.len() - 1];
            let spread = (last - cur[cur.len() - 2]).abs();
            let jump = last_even_tail.map_or(spread, |t: f64| (last - t).abs());
            let e = spread.max(jump);
            if best.is_none_or(|(_, be)| e < be) {
                best = Some((last, e));
            }
            last_even_tail = Some(last);
        }
    }
    best
}

/// Integral over `[s, e]` where `s` is a singular endpoint. The piece is cut
/// into geometrically shrinking panels toward `s`; the partial sums are
/// accelerated with the epsilon algorithm, which also recovers the part of
/// the integral that lies below floating-point resolution around `s`.
fn singular_piece<F: FnMut(f64) -> f64>(
    f: &mut F,
    s: f64,
    e: f64,
    target: f64,
    budget: &mut usize,
) -> (f64, f64, bool) {
    let h = e - s;
    let min_width = 1e5 * f64::EPSILON * s.abs().max(f64::MIN_POSITIVE.sqrt());
    let mut partial = Vec::new();
    let mut total = 0.0;
    let mut err_sum = 0.0;
    let mut ok = true;
    let mut k = 0i32;
    let mut last_term = f64::INFINITY;
    let mut prev_term = f64::INFINITY;
    loop {
        let outer = s + h * 0.5f64.powi(k);
        let inner = s + h * 0.5f64.powi(k + 1);
        let width = (outer - inner).abs();
        if width < min_width || inner == s || k > 1000 {
            break;
        }
        let panel_target = target / 128.0;
        let (lo, hi) = if inner < outer { (inner, outer) } else { (outer, inner) };
        let (v, er, conv) = adaptive(f, lo, hi, panel_target, budget);
        ok &= conv;
        total += v;
        err_sum += er;
        partial.push(total);
        prev_term = last_term;
        last_term = v;
        k += 1;
        // Converged geometrically without help: the remaining tail is tiny.
        if k >= 8 && v.abs() < 0.01 * target && prev_term.abs() >= v.abs() {
            let tail = v.abs();
            return (total, err_sum + tail, ok);
        }
    }
    let raw_tail = if prev_term.is_finite() && last_term.abs() < prev_term.abs() {
        let r = last_term.abs() / prev_term.abs();
        last_term.abs() * r / (1.0 - r)
    } else {
        last_term.abs()
    };
    // Extrapolate using a window of the most recent partial sums.
    let window = &partial[partial.len().saturating_sub(16)..];
    match wynn_epsilon(window) {
        Some((lim, e)) if e < raw_tail => (lim, err_sum + e, ok),
        _ => (total, err_sum + raw_tail, ok),
    }
}

/// Computes `∫_a^b f` for integrands with integrable singularities at the
/// listed points (logarithmic or power-law blow-ups, interior or at the ends).
///
/// The interval is split at every singular point. Pieces that touch a
/// singular point are graded geometrically toward it and the sequence of
/// partial sums is extrapolated; other pieces use adaptive Gauss–Kronrod
/// refinement. The rule never evaluates `f` at a singular point.
pub fn quad_singular<F>(mut f: F, a: f64, b: f64, singular_points: &[f64], tol: &ToleranceSpec) -> Result<QuadResult>
where
    F: FnMut(f64) -> f64,
{
    tol.validate()?;
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidArgument("integration limits must be finite".into()));
    }
    if a == b {
        return Ok(QuadResult { value: 0.0, error: 0.0, subdivisions: 0 });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut sing: Vec<f64> = Vec::new();
    for &s in singular_points {
        if !(s >= lo && s <= hi) {
            return Err(Error::InvalidArgument(format!("singular point {s} outside [{lo}, {hi}]")));
        }
        sing.push(s);
    }
    sing.sort_by(f64::total_cmp);
    sing.dedup();

    let mut nodes = vec![lo];
    nodes.extend(sing.iter().copied().filter(|&s| s > lo && s < hi));
    nodes.push(hi);
    let is_sing = |x: f64| sing.contains(&x);

    // Pieces with at most one singular end, oriented (singular end, other end).
    let mut pieces: Vec<(f64, f64, bool)> = Vec::new();
    for w in nodes.windows(2) {
        let (l, r) = (w[0], w[1]);
        match (is_sing(l), is_sing(r)) {
            (true, true) => {
                let m = 0.5 * (l + r);
                pieces.push((l, m, true));
                pieces.push((r, m, true));
            }
            (true, false) => pieces.push((l, r, true)),
            (false, true) => pieces.push((r, l, true)),
            (false, false) => pieces.push((l, r, false)),
        }
    }

    let total_width = hi - lo;
    let mut budget = tol.max_steps;
    let mut value = 0.0;
    let mut error = 0.0;
    let mut converged = true;
    for &(s, e, singular) in &pieces {
        let share = tol.abs_tol * (e - s).abs() / total_width;
        let (v, er, ok) = if singular {
            singular_piece(&mut f, s, e, share, &mut budget)
        } else {
            adaptive(&mut f, s, e, share, &mut budget)
        };
        value += v;
        error += er;
        converged &= ok;
        if !value.is_finite() {
            return Err(Error::Numerical(format!("non-finite integrand on [{s}, {e}]")));
        }
    }
    let subdivisions = tol.max_steps - budget;
    let target = tol.abs_tol.max(tol.rel_tol * value.abs());
    if !converged || error > target {
        return Err(Error::QuadNonConvergence { subdivisions, estimate: sign * value, error });
    }
    Ok(QuadResult { value: sign * value, error, subdivisions })
}
