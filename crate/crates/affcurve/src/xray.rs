//! The X-ray iteration maps Φ^k, Ψ^k, their analytic Jacobians, the
//! associated geometric lower-bound ratios, and a near-injectivity probe.
//!
//! Both maps take d+1 parameters and land in R^{1+d}.  Parity is forced by
//! the dimension: d+1 = 2K uses the even form, d+1 = 2K+1 the odd one.

use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::geometry;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XrayKind {
    Phi,
    Psi,
}

/// Map selector with its base point: (s₀, x₀) for Φ, (t₀, y₀) for Ψ.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct XrayMapSpec {
    pub kind: XrayKind,
    pub base_scalar: f64,
    pub base_point: Vec<f64>,
}

impl XrayMapSpec {
    pub fn phi(s0: f64, x0: Vec<f64>) -> XrayMapSpec {
        XrayMapSpec {
            kind: XrayKind::Phi,
            base_scalar: s0,
            base_point: x0,
        }
    }

    pub fn psi(t0: f64, y0: Vec<f64>) -> XrayMapSpec {
        XrayMapSpec {
            kind: XrayKind::Psi,
            base_scalar: t0,
            base_point: y0,
        }
    }
}

/// Parameter layout for dimension d:
///   Φ, d+1 = 2K:   (t_1, s_1, ..., t_K, s_K)
///   Φ, d+1 = 2K+1: (t_1, s_1, ..., t_K, s_K, t_{K+1})
///   Ψ, d+1 = 2K:   (s_1, t_1, ..., s_K, t_K)
///   Ψ, d+1 = 2K+1: (s_1, t_1, ..., s_K, t_K, s_{K+1})
/// Splits params into (ts, ss) per this layout.
fn split_params(kind: XrayKind, d: usize, params: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if params.len() != d + 1 {
        return Err(Error::Arity {
            expected: d + 1,
            got: params.len(),
        });
    }
    let mut ts = Vec::new();
    let mut ss = Vec::new();
    for (i, &p) in params.iter().enumerate() {
        let is_t = match kind {
            XrayKind::Phi => i % 2 == 0,
            XrayKind::Psi => i % 2 == 1,
        };
        if is_t {
            ts.push(p);
        } else {
            ss.push(p);
        }
    }
    Ok((ts, ss))
}

/// Evaluate the map at `params`; output is (scalar slot, point in R^d).
pub fn xray_map(spec: &XrayMapSpec, curve: &Curve, params: &[f64]) -> Result<Vec<f64>> {
    let d = curve.dim();
    if spec.base_point.len() != d {
        return Err(Error::Arity {
            expected: d,
            got: spec.base_point.len(),
        });
    }
    let (ts, ss) = split_params(spec.kind, d, params)?;
    let mut out = vec![0.0; d + 1];
    match spec.kind {
        XrayKind::Phi => {
            let s0 = spec.base_scalar;
            let k = ss.len();
            // scalar slot: s_K (even) or t_{K+1} (odd)
            out[0] = if ts.len() == k { ss[k - 1] } else { ts[k] };
            let mut x = spec.base_point.clone();
            for j in 0..k {
                let g = curve.eval(ts[j], 0)?;
                let coeff = (if j == 0 { s0 } else { ss[j - 1] }) - ss[j];
                for i in 0..d {
                    x[i] -= coeff * g[i];
                }
            }
            if ts.len() > k {
                let g = curve.eval(ts[k], 0)?;
                for i in 0..d {
                    x[i] -= ss[k - 1] * g[i];
                }
            }
            out[1..].copy_from_slice(&x);
        }
        XrayKind::Psi => {
            let t0 = spec.base_scalar;
            let k = ts.len();
            out[0] = if ss.len() == k { ts[k - 1] } else { ss[k] };
            let mut y = spec.base_point.clone();
            if ss.len() == k {
                // even: y_0 + Σ s_j (γ(t_{j−1}) − γ(t_j))
                for j in 0..k {
                    let prev = if j == 0 {
                        curve.eval(t0, 0)?
                    } else {
                        curve.eval(ts[j - 1], 0)?
                    };
                    let cur = curve.eval(ts[j], 0)?;
                    for i in 0..d {
                        y[i] += ss[j] * (prev[i] - cur[i]);
                    }
                }
            } else {
                // odd: y_0 + s_1 γ(t_0) − Σ (s_j − s_{j+1}) γ(t_j)
                let g0 = curve.eval(t0, 0)?;
                for i in 0..d {
                    y[i] += ss[0] * g0[i];
                }
                for j in 0..k {
                    let g = curve.eval(ts[j], 0)?;
                    let coeff = ss[j] - ss[j + 1];
                    for i in 0..d {
                        y[i] -= coeff * g[i];
                    }
                }
            }
            out[1..].copy_from_slice(&y);
        }
    }
    Ok(out)
}

/// The (d+1)×(d+1) derivative matrix of the map w.r.t. its parameters,
/// from analytic partials.
pub fn xray_jacobian_matrix(
    spec: &XrayMapSpec,
    curve: &Curve,
    params: &[f64],
) -> Result<DMatrix<f64>> {
    let d = curve.dim();
    let (ts, ss) = split_params(spec.kind, d, params)?;
    let mut m = DMatrix::zeros(d + 1, d + 1);
    // column index of t_j / s_j in the flat parameter vector
    let t_col = |j: usize| match spec.kind {
        XrayKind::Phi => 2 * j,
        XrayKind::Psi => 2 * j + 1,
    };
    let s_col = |j: usize| match spec.kind {
        XrayKind::Phi => 2 * j + 1,
        XrayKind::Psi => 2 * j,
    };
    match spec.kind {
        XrayKind::Phi => {
            let s0 = spec.base_scalar;
            let k = ss.len();
            let odd = ts.len() > k;
            // scalar row
            if odd {
                m[(0, t_col(k))] = 1.0;
            } else {
                m[(0, s_col(k - 1))] = 1.0;
            }
            // vector rows: x = x0 − Σ_j (s_{j−1}−s_j) γ(t_j) [− s_K γ(t_{K+1})]
            for j in 0..k {
                let dg = curve.eval(ts[j], 1)?;
                let coeff = (if j == 0 { s0 } else { ss[j - 1] }) - ss[j];
                for i in 0..d {
                    m[(1 + i, t_col(j))] = -coeff * dg[i];
                }
            }
            if odd {
                let dg = curve.eval(ts[k], 1)?;
                for i in 0..d {
                    m[(1 + i, t_col(k))] = -ss[k - 1] * dg[i];
                }
            }
            for j in 0..k {
                let g = curve.eval(ts[j], 0)?;
                let next = if j + 1 < ts.len() {
                    Some(curve.eval(ts[j + 1], 0)?)
                } else {
                    None
                };
                for i in 0..d {
                    m[(1 + i, s_col(j))] = g[i] - next.as_ref().map_or(0.0, |v| v[i]);
                }
            }
        }
        XrayKind::Psi => {
            let t0 = spec.base_scalar;
            let k = ts.len();
            let odd = ss.len() > k;
            if odd {
                m[(0, s_col(k))] = 1.0;
            } else {
                m[(0, t_col(k - 1))] = 1.0;
            }
            if !odd {
                // even: y = y0 + Σ s_j (γ(t_{j−1}) − γ(t_j))
                for j in 0..k {
                    let prev = if j == 0 {
                        curve.eval(t0, 0)?
                    } else {
                        curve.eval(ts[j - 1], 0)?
                    };
                    let cur = curve.eval(ts[j], 0)?;
                    for i in 0..d {
                        m[(1 + i, s_col(j))] = prev[i] - cur[i];
                    }
                }
                for j in 0..k {
                    let dg = curve.eval(ts[j], 1)?;
                    // t_j appears in terms j (−s_j γ) and j+1 (+s_{j+1} γ)
                    let coeff = if j + 1 < k { ss[j + 1] - ss[j] } else { -ss[k - 1] };
                    for i in 0..d {
                        m[(1 + i, t_col(j))] = coeff * dg[i];
                    }
                }
            } else {
                // odd: y = y0 + s_1 γ(t_0) − Σ (s_j − s_{j+1}) γ(t_j)
                for j in 0..=k {
                    let mut col = vec![0.0; d];
                    if j == 0 {
                        let g0 = curve.eval(t0, 0)?;
                        let g1 = curve.eval(ts[0], 0)?;
                        for i in 0..d {
                            col[i] = g0[i] - g1[i];
                        }
                    } else if j < k {
                        let prev = curve.eval(ts[j - 1], 0)?;
                        let cur = curve.eval(ts[j], 0)?;
                        for i in 0..d {
                            col[i] = prev[i] - cur[i];
                        }
                    } else {
                        let g = curve.eval(ts[k - 1], 0)?;
                        col.copy_from_slice(&g);
                    }
                    for i in 0..d {
                        m[(1 + i, s_col(j))] = col[i];
                    }
                }
                for j in 0..k {
                    let dg = curve.eval(ts[j], 1)?;
                    let coeff = -(ss[j] - ss[j + 1]);
                    for i in 0..d {
                        m[(1 + i, t_col(j))] = coeff * dg[i];
                    }
                }
            }
        }
    }
    Ok(m)
}

/// Determinant of the analytic derivative matrix.
pub fn xray_jacobian(spec: &XrayMapSpec, curve: &Curve, params: &[f64]) -> Result<f64> {
    Ok(xray_jacobian_matrix(spec, curve, params)?.determinant())
}

/// The geometric lower bound on |det| for the matching (kind, parity) case.
/// With all t's (including the base t₀ for Ψ) and s's (including s₀ for Φ)
/// distinct, the bound is positive.
pub fn xray_gi_lower_bound(spec: &XrayMapSpec, curve: &Curve, params: &[f64]) -> Result<f64> {
    let d = curve.dim();
    let (ts, ss) = split_params(spec.kind, d, params)?;
    let p = 1.0 / (d + 1) as f64;
    let ell = |t: f64| -> Result<f64> {
        let l = geometry::torsion(curve, t, d)?;
        if l == 0.0 {
            return Err(Error::ZeroTorsion { t });
        }
        Ok(l.abs())
    };
    let check_distinct = |xs: &[f64]| -> Result<()> {
        for i in 0..xs.len() {
            for j in (i + 1)..xs.len() {
                if xs[i] == xs[j] {
                    return Err(Error::OrderError(format!("tie at {}", xs[i])));
                }
            }
        }
        Ok(())
    };
    match spec.kind {
        XrayKind::Phi => {
            // all_t = (t_1, ..., t_K[, t_{K+1}]); all_s = (s_0, s_1, ..., s_K)
            let mut all_s = vec![spec.base_scalar];
            all_s.extend_from_slice(&ss);
            check_distinct(&ts)?;
            check_distinct(&all_s)?;
            let k = ss.len();
            let odd = ts.len() > k;
            let mut bound = 1.0;
            for i in 0..k {
                bound *= (all_s[i + 1] - all_s[i]).abs() * ell(ts[i])?.powf(2.0 * p);
                for (j, &tj) in ts.iter().enumerate() {
                    if j != i {
                        bound *= (tj - ts[i]).powi(2).abs();
                    }
                }
            }
            if odd {
                bound *= ell(ts[k])?.powf(p);
            }
            Ok(bound)
        }
        XrayKind::Psi => {
            // all_t = (t_0, t_1, ..., t_K); all_s = (s_1, ..., s_K[, s_{K+1}])
            let mut all_t = vec![spec.base_scalar];
            all_t.extend_from_slice(&ts);
            check_distinct(&all_t)?;
            check_distinct(&ss)?;
            let k = ts.len();
            let odd = ss.len() > k;
            let mut bound = 1.0;
            // inner factors run over t_1..t_{K−1} (even) or t_1..t_K (odd)
            let top = if odd { k } else { k - 1 };
            for i in 1..=top {
                bound *= (ss[i] - ss[i - 1]).abs() * ell(all_t[i])?.powf(2.0 * p);
                for (j, &tj) in all_t.iter().enumerate() {
                    if j != i {
                        bound *= (tj - all_t[i]).powi(2).abs();
                    }
                }
            }
            bound *= ell(all_t[0])?.powf(p);
            if !odd {
                bound *= ell(all_t[k])?.powf(p) * (all_t[k] - all_t[0]).abs();
            }
            Ok(bound)
        }
    }
}

/// |det D(map)| / lower bound; finite and positive on nondegenerate params.
pub fn xray_gi_ratio(spec: &XrayMapSpec, curve: &Curve, params: &[f64]) -> Result<f64> {
    let det = xray_jacobian(spec, curve, params)?.abs();
    let bound = xray_gi_lower_bound(spec, curve, params)?;
    Ok(det / bound)
}

/// Near-injectivity probe result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InjectivityReport {
    pub n: usize,
    pub seed: u64,
    /// Largest number of pairwise-distinct parameter points confirmed (by
    /// Newton refinement) to share one image.
    pub max_multiplicity: usize,
    pub candidate_collisions: usize,
    pub unconfirmed: usize,
}

/// Sample n parameter points in `box_` (per-parameter ranges), bin images at
/// cell size `tol`, and confirm candidate collisions by Newton refinement.
pub fn injectivity_probe(
    spec: &XrayMapSpec,
    curve: &Curve,
    box_: &[(f64, f64)],
    n: usize,
    tol: f64,
    seed: u64,
) -> Result<InjectivityReport> {
    let d = curve.dim();
    if box_.len() != d + 1 {
        return Err(Error::Arity {
            expected: d + 1,
            got: box_.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut images: Vec<Vec<f64>> = Vec::with_capacity(n);
    for _ in 0..n {
        let p: Vec<f64> = box_.iter().map(|&(lo, hi)| rng.gen_range(lo..hi)).collect();
        if let Ok(img) = xray_map(spec, curve, &p) {
            images.push(img);
            params.push(p);
        }
    }
    // bin images on a grid of cell size tol
    use std::collections::HashMap;
    let mut bins: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for (i, img) in images.iter().enumerate() {
        let key: Vec<i64> = img.iter().map(|&x| (x / tol).floor() as i64).collect();
        bins.entry(key).or_default().push(i);
    }
    let sep = {
        // distinctness threshold in parameter space
        let w = box_
            .iter()
            .map(|&(lo, hi)| hi - lo)
            .fold(f64::INFINITY, f64::min);
        1e-4 * w
    };
    let mut max_mult = 1usize.min(n.max(1));
    let mut candidates = 0usize;
    let mut unconfirmed = 0usize;
    for members in bins.values() {
        if members.len() < 2 {
            continue;
        }
        let anchor = members[0];
        let q = images[anchor].clone();
        let mut confirmed: Vec<Vec<f64>> = vec![params[anchor].clone()];
        for &other in &members[1..] {
            candidates += 1;
            match newton_to_image(spec, curve, &params[other], &q) {
                Some(p_star) => {
                    let distinct = confirmed.iter().all(|c| {
                        c.iter()
                            .zip(&p_star)
                            .map(|(a, b)| (a - b).abs())
                            .fold(0.0f64, f64::max)
                            > sep
                    });
                    if distinct {
                        confirmed.push(p_star);
                    }
                }
                None => unconfirmed += 1,
            }
        }
        max_mult = max_mult.max(confirmed.len());
    }
    Ok(InjectivityReport {
        n,
        seed,
        max_multiplicity: max_mult,
        candidate_collisions: candidates,
        unconfirmed,
    })
}

/// Newton solve map(p) = q from `start`; None on divergence.
fn newton_to_image(
    spec: &XrayMapSpec,
    curve: &Curve,
    start: &[f64],
    q: &[f64],
) -> Option<Vec<f64>> {
    let mut p = start.to_vec();
    let scale = q.iter().map(|x| x.abs()).fold(1.0f64, f64::max);
    for _ in 0..50 {
        let img = xray_map(spec, curve, &p).ok()?;
        let r = DVector::from_iterator(q.len(), img.iter().zip(q).map(|(a, b)| a - b));
        if r.amax() <= 1e-12 * scale {
            return Some(p);
        }
        let jac = xray_jacobian_matrix(spec, curve, &p).ok()?;
        let step = jac.lu().solve(&r)?;
        if !step.iter().all(|x| x.is_finite()) {
            return None;
        }
        for i in 0..p.len() {
            p[i] -= step[i];
        }
    }
    None
}
