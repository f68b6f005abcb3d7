//! Numerical checks of the structural hypotheses: almost log-concavity,
//! almost monotonicity, the monomial exponent criterion, and the
//! convex-hull necessary condition.

use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::geometry;
use crate::hull;
use crate::quad::{self, QuadOpts};
use serde::{Deserialize, Serialize};

/// Sampled |f| values on a strictly increasing grid.
#[derive(Debug, Clone)]
pub struct FunctionSamples {
    pub ts: Vec<f64>,
    pub values: Vec<f64>,
    pub all_nonnegative: bool,
}

impl FunctionSamples {
    pub fn new(ts: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if ts.len() != values.len() {
            return Err(Error::input("grid/value length mismatch"));
        }
        if ts.len() < 3 {
            return Err(Error::input("need at least 3 samples"));
        }
        for w in ts.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::input("grid must be strictly increasing"));
            }
        }
        let all_nonnegative = values.iter().all(|&v| v >= 0.0);
        Ok(FunctionSamples {
            ts,
            values,
            all_nonnegative,
        })
    }

    /// Uniform grid over (lo, hi), endpoints excluded by half-step inset.
    pub fn from_fn<F: FnMut(f64) -> Result<f64>>(
        mut f: F,
        lo: f64,
        hi: f64,
        n: usize,
    ) -> Result<Self> {
        let mut ts = Vec::with_capacity(n);
        let mut values = Vec::with_capacity(n);
        for i in 0..n {
            let t = lo + (hi - lo) * (i as f64 + 0.5) / n as f64;
            values.push(f(t)?);
            ts.push(t);
        }
        FunctionSamples::new(ts, values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Outcome of a single hypothesis check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub verdict: Verdict,
    /// Grid points of the worst violating pair/triple, when failing.
    pub witness: Option<Vec<f64>>,
    /// Smallest constant making the property hold on the grid (≥ 1).
    pub best_constant: f64,
}

/// Midpoint log-concavity: M |f((t₁+t₂)/2)| ≥ |f(t₁)f(t₂)|^{1/2} over all
/// grid pairs whose midpoint is itself a grid point.
pub fn check_almost_log_concave(f: &FunctionSamples, m: f64) -> Result<HypothesisReport> {
    if m < 1.0 {
        return Err(Error::input("M must be >= 1"));
    }
    let n = f.ts.len();
    let span = f.ts[n - 1] - f.ts[0];
    let tol = 1e-9 * span;
    let mut best = 1.0f64;
    let mut witness: Option<Vec<f64>> = None;
    for i in 0..n {
        for j in (i + 2)..n {
            let mid_t = 0.5 * (f.ts[i] + f.ts[j]);
            // grid-representable midpoint; uniform grids hit (i+j) even
            let k = match f
                .ts
                .binary_search_by(|t| t.partial_cmp(&mid_t).unwrap())
            {
                Ok(k) => k,
                Err(k) => {
                    if k < n && (f.ts[k] - mid_t).abs() <= tol {
                        k
                    } else if k > 0 && (f.ts[k - 1] - mid_t).abs() <= tol {
                        k - 1
                    } else {
                        continue;
                    }
                }
            };
            let rhs = (f.values[i].abs() * f.values[j].abs()).sqrt();
            let mid = f.values[k].abs();
            let c = if mid > 0.0 {
                rhs / mid
            } else if rhs > 0.0 {
                f64::INFINITY
            } else {
                1.0
            };
            if c > best {
                best = c;
                witness = Some(vec![f.ts[i], f.ts[k], f.ts[j]]);
            }
        }
    }
    let verdict = if best <= m { Verdict::Pass } else { Verdict::Fail };
    Ok(HypothesisReport {
        verdict,
        witness: if verdict == Verdict::Fail { witness } else { None },
        best_constant: best,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MonotoneClass {
    Increasing,
    Decreasing,
    Both,
    Neither,
}

/// Outcome of the C-almost-monotone check, both directions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonotoneReport {
    pub class: MonotoneClass,
    pub increasing: HypothesisReport,
    pub decreasing: HypothesisReport,
}

/// C-almost monotone: f(t₁) ≤ C f(t₂) for t₁ ≤ t₂ (increasing), and the
/// mirrored inequality for decreasing.  Requires nonnegative samples.
pub fn check_almost_monotone(f: &FunctionSamples, c: f64) -> Result<MonotoneReport> {
    if c < 1.0 {
        return Err(Error::input("C must be >= 1"));
    }
    if !f.all_nonnegative {
        return Err(Error::input("samples must be nonnegative"));
    }
    let n = f.ts.len();
    // increasing direction: worst ratio f(t_i)/f(t_j) over i < j
    let mut best_inc = 1.0f64;
    let mut wit_inc = None;
    let mut prefix_max = (f.values[0], f.ts[0]);
    for j in 1..n {
        let (pm, pt) = prefix_max;
        let r = ratio_or_inf(pm, f.values[j]);
        if r > best_inc {
            best_inc = r;
            wit_inc = Some(vec![pt, f.ts[j]]);
        }
        if f.values[j] > pm {
            prefix_max = (f.values[j], f.ts[j]);
        }
    }
    // decreasing direction: worst ratio f(t_j)/f(t_i) over i < j
    let mut best_dec = 1.0f64;
    let mut wit_dec = None;
    let mut suffix_max = (f.values[n - 1], f.ts[n - 1]);
    for i in (0..n - 1).rev() {
        let (sm, st) = suffix_max;
        let r = ratio_or_inf(sm, f.values[i]);
        if r > best_dec {
            best_dec = r;
            wit_dec = Some(vec![f.ts[i], st]);
        }
        if f.values[i] > sm {
            suffix_max = (f.values[i], f.ts[i]);
        }
    }
    let inc_pass = best_inc <= c;
    let dec_pass = best_dec <= c;
    let class = match (inc_pass, dec_pass) {
        (true, true) => MonotoneClass::Both,
        (true, false) => MonotoneClass::Increasing,
        (false, true) => MonotoneClass::Decreasing,
        (false, false) => MonotoneClass::Neither,
    };
    Ok(MonotoneReport {
        class,
        increasing: HypothesisReport {
            verdict: if inc_pass { Verdict::Pass } else { Verdict::Fail },
            witness: if inc_pass { None } else { wit_inc },
            best_constant: best_inc,
        },
        decreasing: HypothesisReport {
            verdict: if dec_pass { Verdict::Pass } else { Verdict::Fail },
            witness: if dec_pass { None } else { wit_dec },
            best_constant: best_dec,
        },
    })
}

fn ratio_or_inf(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else if num > 0.0 {
        f64::INFINITY
    } else {
        1.0
    }
}

/// Exponent of B^k for the monomial curve with exponents `a` (a_0 := 0):
///   a_{d−k+1} + ⋯ + a_d − k a_{d−k} − k(k+1)/2.
/// B^k is log-concave on (0, ∞) iff the value is ≥ 0.
pub fn monomial_b_exponent(a: &[f64], k: usize) -> Result<f64> {
    let d = a.len();
    if d < 2 {
        return Err(Error::input("need at least 2 exponents"));
    }
    for w in a.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::input("exponents must be strictly increasing"));
        }
    }
    if k == 0 || k > d {
        return Err(Error::Range(format!("k = {k} must lie in 1..{d}")));
    }
    let tail: f64 = a[d - k..].iter().sum();
    let a_dk = if k == d { 0.0 } else { a[d - k - 1] };
    Ok(tail - k as f64 * a_dk - (k * (k + 1)) as f64 / 2.0)
}

/// (∫_a^b λ) / vol(ch{γ(t_i)})^{2/(d(d+1))} over n samples of [a, b].
/// The sampled hull under-estimates the true hull, so the returned ratio
/// over-estimates the true ratio.
pub fn convex_hull_probe(curve: &Curve, a: f64, b: f64, n: usize) -> Result<f64> {
    let d = curve.dim();
    if d != 2 && d != 3 {
        return Err(Error::Range(format!("hull probe needs d in {{2,3}}, got {d}")));
    }
    if n < d + 1 {
        return Err(Error::input("need at least d+1 samples"));
    }
    if !(a < b) || !curve.domain().contains_interval(a, b) {
        return Err(Error::input("subinterval not inside the curve domain"));
    }
    // endpoint-inset uniform grid; refining n -> 2n-1 keeps old nodes
    let eps = 1e-9 * (b - a);
    let (lo, hi) = (a + eps, b - eps);
    let mut pts = Vec::with_capacity(n);
    for i in 0..n {
        let t = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        pts.push(curve.eval(t, 0)?);
    }
    let vol = hull::hull_measure(d, &pts)?;
    if vol <= 1e-14 {
        return Err(Error::DegenerateHull(1e-14));
    }
    let mass = quad::integrate(
        |t| geometry::affine_density(curve, t).unwrap_or(0.0),
        a,
        b,
        &QuadOpts::with_tol(1e-9),
    )?;
    let dd = d as f64;
    Ok(mass / vol.powf(2.0 / (dd * (dd + 1.0))))
}
