//! Scans of the geometric inequality |J| ≥ C Π|L(t_j)|^{1/d} Π|t_j − t_i|,
//! its exponential-gain strengthening, and the supporting decomposition
//! and window helpers.

use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::geometry;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// |J(t_1..t_d)| / (Π|L(t_j)|^{1/d} · Π_{i<j}|t_j − t_i|).
pub fn gi_ratio(curve: &Curve, tuple: &[f64]) -> Result<f64> {
    let d = curve.dim();
    if tuple.len() != d {
        return Err(Error::Arity {
            expected: d,
            got: tuple.len(),
        });
    }
    for i in 0..d {
        for j in (i + 1)..d {
            if tuple[i] == tuple[j] {
                return Err(Error::OrderError(format!("tie at t = {}", tuple[i])));
            }
        }
    }
    // det(γ′(t_1)…γ′(t_d)) = V(t) · det(γ′[t_1], γ′[t_1,t_2], …): dividing
    // out the Vandermonde factor through the divided-difference table keeps
    // the quotient accurate for clustered tuples, where the plain determinant
    // loses digits to cancellation.
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(d);
    for &t in tuple {
        cols.push(curve.eval(t, 1)?);
    }
    for level in 1..d {
        for j in (level..d).rev() {
            let dt = tuple[j] - tuple[j - level];
            for i in 0..d {
                cols[j][i] = (cols[j][i] - cols[j - 1][i]) / dt;
            }
        }
    }
    let m = nalgebra::DMatrix::from_fn(d, d, |i, c| cols[c][i]);
    let jac = m.determinant().abs();
    let mut denom = 1.0;
    for &t in tuple {
        let l = geometry::torsion(curve, t, d)?;
        if l == 0.0 {
            return Err(Error::ZeroTorsion { t });
        }
        denom *= l.abs().powf(1.0 / d as f64);
    }
    Ok(jac / denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    Grid,
    #[default]
    SeededRandom,
    LowDiscrepancy,
}

/// One log-spaced histogram bin.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HistBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// Result of a ratio scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GiReport {
    pub n: usize,
    pub inf_ratio: f64,
    pub argmin: Vec<f64>,
    pub seed: u64,
    pub histogram: Vec<HistBin>,
    /// Some ratio fell below the floor 1e−12.
    pub underflow: bool,
    /// Zeros of lower torsions inside the region: scan the pieces separately.
    pub partition_hint: Vec<f64>,
}

fn halton(index: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let mut i = index + 1;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Ordered d-tuples in (lo, hi); the k-th call with the same seed always
/// yields the same k-th tuple, so scans are prefix-stable in n.
fn sample_tuples(
    sampler: Sampler,
    d: usize,
    lo: f64,
    hi: f64,
    n: usize,
    seed: u64,
) -> Vec<Vec<f64>> {
    const PRIMES: [usize; 6] = [2, 3, 5, 7, 11, 13];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    match sampler {
        Sampler::Grid => {
            // smallest m with C(m, d) ≥ n ordered tuples available
            let mut m = d;
            loop {
                let mut comb = 1.0f64;
                for i in 0..d {
                    comb *= (m - i) as f64 / (i + 1) as f64;
                }
                if comb >= n as f64 {
                    break;
                }
                m += 1;
            }
            let mut idx = vec![0usize; d];
            'outer: loop {
                if idx.windows(2).all(|w| w[0] < w[1]) {
                    let tuple: Vec<f64> = idx
                        .iter()
                        .map(|&i| lo + (hi - lo) * (i as f64 + 0.5) / m as f64)
                        .collect();
                    out.push(tuple);
                    if out.len() == n {
                        break;
                    }
                }
                for ax in (0..d).rev() {
                    idx[ax] += 1;
                    if idx[ax] < m {
                        continue 'outer;
                    }
                    idx[ax] = 0;
                }
                break;
            }
        }
        Sampler::SeededRandom => {
            // separation floor: below ~1e-5 of the span the ratio is pure
            // rounding noise (relative error ~ eps/gap), not geometry
            let sep = 1e-5 * (hi - lo);
            while out.len() < n {
                let mut t: Vec<f64> = (0..d).map(|_| rng.gen_range(lo..hi)).collect();
                t.sort_by(|a, b| a.partial_cmp(b).unwrap());
                if t.windows(2).all(|w| w[1] - w[0] > sep) {
                    out.push(t);
                }
            }
        }
        Sampler::LowDiscrepancy => {
            let sep = 1e-5 * (hi - lo);
            let mut k = 0;
            while out.len() < n {
                let mut t: Vec<f64> = (0..d)
                    .map(|ax| lo + (hi - lo) * halton(k, PRIMES[ax % PRIMES.len()]))
                    .collect();
                k += 1;
                t.sort_by(|a, b| a.partial_cmp(b).unwrap());
                if t.windows(2).all(|w| w[1] - w[0] > sep) {
                    out.push(t);
                }
            }
        }
    }
    out
}

/// Nelder–Mead minimization; returns (argmin, min value).
pub(crate) fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    scale: f64,
    iters: usize,
) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v0 = f(x0);
    simplex.push((x0.to_vec(), v0));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += scale;
        let v = f(&x);
        simplex.push((x, v));
    }
    for _ in 0..iters {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let centroid: Vec<f64> = (0..n)
            .map(|i| simplex[..n].iter().map(|(x, _)| x[i]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let refl: Vec<f64> = (0..n)
            .map(|i| centroid[i] + (centroid[i] - worst.0[i]))
            .collect();
        let fr = f(&refl);
        if fr < simplex[0].1 {
            let exp: Vec<f64> = (0..n)
                .map(|i| centroid[i] + 2.0 * (centroid[i] - worst.0[i]))
                .collect();
            let fe = f(&exp);
            simplex[n] = if fe < fr { (exp, fe) } else { (refl, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (refl, fr);
        } else {
            let con: Vec<f64> = (0..n)
                .map(|i| centroid[i] + 0.5 * (worst.0[i] - centroid[i]))
                .collect();
            let fc = f(&con);
            if fc < worst.1 {
                simplex[n] = (con, fc);
            } else {
                let best = simplex[0].0.clone();
                for s in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = (0..n)
                        .map(|i| best[i] + 0.5 * (s.0[i] - best[i]))
                        .collect();
                    let v = f(&x);
                    *s = (x, v);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    simplex[0].clone()
}

const RATIO_FLOOR: f64 = 1e-12;

/// Infimum of `gi_ratio` over sampled tuples, refined by Nelder–Mead from
/// the 5 worst samples.  Deterministic under `seed`.
pub fn gi_scan(
    curve: &Curve,
    lo: f64,
    hi: f64,
    sampler: Sampler,
    n: usize,
    seed: u64,
) -> Result<GiReport> {
    let d = curve.dim();
    if n == 0 {
        return Err(Error::input("need n >= 1"));
    }
    if !(lo < hi) || !curve.domain().contains_interval(lo, hi) {
        return Err(Error::input("scan region not inside the curve domain"));
    }
    // zeros of lower torsions are reported as partition hints, not failures
    let eps = 1e-9 * (hi - lo);
    let mut partition_hint = Vec::new();
    for j in 1..=d {
        let g = |t: f64| geometry::torsion(curve, t, j);
        if let Some(t) = geometry::find_sign_change(&g, lo + eps, hi - eps)? {
            partition_hint.push(t);
        }
    }

    let tuples = sample_tuples(sampler, d, lo, hi, n, seed);
    let mut ratios = Vec::with_capacity(tuples.len());
    let mut worst: Vec<(f64, Vec<f64>)> = Vec::new();
    for t in &tuples {
        if let Ok(r) = gi_ratio(curve, t) {
            ratios.push(r);
            worst.push((r, t.clone()));
        }
    }
    if ratios.is_empty() {
        return Err(Error::input("no valid tuples in the scanned region"));
    }
    worst.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    worst.truncate(5);

    let mut inf = worst[0].0;
    let mut argmin = worst[0].1.clone();
    let scale = (hi - lo) * 0.02;
    for (_, start) in &worst {
        let (x, v) = nelder_mead(
            |x| {
                let mut s = x.to_vec();
                s.sort_by(|a, b| a.partial_cmp(b).unwrap());
                if s[0] <= lo || s[s.len() - 1] >= hi {
                    return f64::INFINITY;
                }
                // same separation floor as the sampler: closer tuples give
                // rounding noise, not smaller true ratios
                if s.windows(2).any(|w| w[1] - w[0] <= 1e-5 * (hi - lo)) {
                    return f64::INFINITY;
                }
                match gi_ratio(curve, &s) {
                    Ok(r) => r.max(RATIO_FLOOR).ln(),
                    Err(_) => f64::INFINITY,
                }
            },
            start,
            scale,
            120,
        );
        let v = v.exp();
        if v.is_finite() && v < inf {
            inf = v;
            argmin = {
                let mut s = x;
                s.sort_by(|a, b| a.partial_cmp(b).unwrap());
                s
            };
        }
    }

    let underflow = inf < RATIO_FLOOR;
    Ok(GiReport {
        n,
        inf_ratio: inf,
        argmin,
        seed,
        histogram: log_histogram(&ratios, 32),
        underflow,
        partition_hint,
    })
}

fn log_histogram(values: &[f64], bins: usize) -> Vec<HistBin> {
    let lo = values
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
        .max(RATIO_FLOOR);
    let hi = values.iter().copied().fold(0.0f64, f64::max).max(lo * (1.0 + 1e-12));
    let (llo, lhi) = (lo.ln(), hi.ln());
    let mut out: Vec<HistBin> = (0..bins)
        .map(|i| HistBin {
            lo: (llo + (lhi - llo) * i as f64 / bins as f64).exp(),
            hi: (llo + (lhi - llo) * (i + 1) as f64 / bins as f64).exp(),
            count: 0,
        })
        .collect();
    for &v in values {
        let x = (v.max(lo).ln() - llo) / (lhi - llo) * bins as f64;
        let i = (x as usize).min(bins - 1);
        out[i].count += 1;
    }
    out
}

/// Largest c ≥ 0 (bisection at resolution 1e−4) keeping the gain-weighted
/// ratio  |J| / (Π|L|^{1/d} Π |Δ_{ij}| e^{c (a_d−a_1) |Δ_{ij}|})  above a
/// 1e−12 floor over n sampled tuples.  Returns (c*, infimum at c*).
pub fn exp_gain_fit(
    curve: &Curve,
    win_lo: f64,
    win_hi: f64,
    n: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let inner = curve
        .exponential_inner()
        .ok_or_else(|| Error::input("curve must be an exponential reparametrization"))?;
    let (exponents, _) = inner
        .monomial_profile()
        .ok_or_else(|| Error::input("inner curve must be monomial or monomial-like"))?;
    let gain = exponents.last().unwrap() - exponents[0];
    let d = curve.dim();
    if !(win_lo < win_hi) || !curve.domain().contains_interval(win_lo, win_hi) {
        return Err(Error::input("window not inside the curve domain"));
    }

    let tuples = sample_tuples(Sampler::SeededRandom, d, win_lo, win_hi, n, seed);
    // per tuple: log gi_ratio and the separation sum Σ|Δ_{ij}|
    let mut terms: Vec<(f64, f64)> = Vec::with_capacity(tuples.len());
    for t in &tuples {
        let r = gi_ratio(curve, t)?;
        let mut sep = 0.0;
        for i in 0..d {
            for j in (i + 1)..d {
                sep += (t[j] - t[i]).abs();
            }
        }
        terms.push((r.max(f64::MIN_POSITIVE).ln(), sep));
    }
    let log_inf = |c: f64| -> f64 {
        terms
            .iter()
            .map(|&(lr, sep)| lr - c * gain * sep)
            .fold(f64::INFINITY, f64::min)
    };
    let floor = RATIO_FLOOR.ln();
    if log_inf(0.0) < floor {
        return Ok((0.0, log_inf(0.0).exp()));
    }
    let mut hi = 1e-4;
    while log_inf(hi) >= floor && hi < 64.0 {
        hi *= 2.0;
    }
    let mut lo = hi / 2.0;
    if hi >= 64.0 {
        return Ok((hi, log_inf(hi).exp()));
    }
    while hi - lo > 1e-4 {
        let mid = 0.5 * (lo + hi);
        if log_inf(mid) >= floor {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, log_inf(lo).exp()))
}

/// Split (lo, hi) at zeros of every L^j and at the increasing→decreasing
/// switch of each |B^k|, returning the resulting subintervals.
pub fn decompose_for_gi(curve: &Curve, lo: f64, hi: f64) -> Result<Vec<(f64, f64)>> {
    let d = curve.dim();
    if !(lo < hi) || !curve.domain().contains_interval(lo, hi) {
        return Err(Error::input("region not inside the curve domain"));
    }
    let eps = 1e-9 * (hi - lo);
    let mut cuts: Vec<f64> = Vec::new();
    // zeros / sign changes of each lower torsion
    for j in 1..=d {
        let g = |t: f64| geometry::torsion(curve, t, j);
        let mut a = lo + eps;
        let b = hi - eps;
        while let Some(t) = geometry::find_sign_change(&g, a, b)? {
            cuts.push(t);
            a = t + eps.max(1e-9 * (b - t).abs());
            if a >= b || cuts.len() > 64 {
                break;
            }
        }
    }
    // interior maximum of each |B^k| (monotone switch of a log-concave B)
    for k in 1..=d {
        let f = |t: f64| -> f64 {
            match geometry::ratio_functions(curve, t, k) {
                Ok((_, b)) => b.abs(),
                Err(_) => f64::NEG_INFINITY,
            }
        };
        if let Some(t) = golden_section_max(&f, lo + eps, hi - eps) {
            cuts.push(t);
        }
    }
    cuts.retain(|&t| t > lo + eps && t < hi - eps);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 10.0 * eps);
    if cuts.len() + 1 > 64 {
        return Err(Error::Complexity(cuts.len() + 1));
    }
    let mut pieces = Vec::with_capacity(cuts.len() + 1);
    let mut start = lo;
    for &c in &cuts {
        pieces.push((start, c));
        start = c;
    }
    pieces.push((start, hi));
    Ok(pieces)
}

/// Golden-section search for a strict interior maximum; None when the max
/// sits at either end (monotone case) or the function is flat.
fn golden_section_max<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Option<f64> {
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    let (mut lo, mut hi) = (a, b);
    let mut c = hi - INVPHI * (hi - lo);
    let mut d = lo + INVPHI * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INVPHI * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INVPHI * (hi - lo);
            fd = f(d);
        }
        if hi - lo < 1e-10 * (b - a) {
            break;
        }
    }
    let t = 0.5 * (lo + hi);
    let v = f(t);
    let span = b - a;
    // reject endpoint maxima and flat profiles
    if t - a < 1e-6 * span || b - t < 1e-6 * span {
        return None;
    }
    let va = f(a + 1e-9 * span);
    let vb = f(b - 1e-9 * span);
    let tol = 1e-9 * v.abs().max(1e-300);
    if v > va + tol && v > vb + tol {
        Some(t)
    } else {
        None
    }
}

/// First t in the scan range after which |L_Γ(t)| e^{At} / |c(a,θ)| stays
/// within 1% of 1 — the operational window start for exponential curves.
pub fn operational_tau(curve: &Curve, lo: f64, hi: f64, n: usize) -> Result<Option<f64>> {
    let inner = curve
        .exponential_inner()
        .ok_or_else(|| Error::input("curve must be an exponential reparametrization"))?;
    let (exponents, thetas0) = inner
        .monomial_profile()
        .ok_or_else(|| Error::input("inner curve must be monomial or monomial-like"))?;
    let d = exponents.len();
    let a_sum: f64 = exponents.iter().sum();
    let mut c = 1.0;
    for i in 0..d {
        c *= exponents[i] * thetas0[i];
    }
    for i in 0..d {
        for j in (i + 1)..d {
            c *= exponents[j] - exponents[i];
        }
    }
    let c = c.abs();
    if c == 0.0 {
        return Err(Error::input("degenerate exponent/limit data"));
    }
    let mut ok_from: Option<usize> = None;
    let mut ts = Vec::with_capacity(n);
    for i in 0..n {
        let t = lo + (hi - lo) * (i as f64 + 0.5) / n as f64;
        let l = geometry::torsion(curve, t, d)?.abs();
        let g = l * (a_sum * t).exp() / c;
        if (g - 1.0).abs() <= 0.01 {
            ok_from.get_or_insert(i);
        } else {
            ok_from = None;
        }
        ts.push(t);
    }
    Ok(ok_from.map(|i| ts[i]))
}
