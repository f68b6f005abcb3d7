//! Adaptive Gauss–Kronrod quadrature (7–15 point pair).

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Accuracy targets for adaptive quadrature.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct QuadOpts {
    #[serde(default = "default_abs_tol")]
    pub abs_tol: f64,
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_max_depth")]
    pub max_depth: usize,
}

fn default_abs_tol() -> f64 {
    1e-9
}
fn default_rel_tol() -> f64 {
    1e-9
}
fn default_max_depth() -> usize {
    30
}

impl Default for QuadOpts {
    fn default() -> Self {
        QuadOpts {
            abs_tol: 1e-9,
            rel_tol: 1e-9,
            max_depth: 30,
        }
    }
}

impl QuadOpts {
    pub fn with_tol(tol: f64) -> Self {
        QuadOpts {
            abs_tol: tol,
            rel_tol: tol,
            max_depth: 30,
        }
    }

    /// Tolerance tightened for one nesting level of a multi-level integral.
    pub fn nested(&self, level: u32) -> Self {
        let f = 3f64.powi(level as i32);
        QuadOpts {
            abs_tol: self.abs_tol / f,
            rel_tol: self.rel_tol / f,
            max_depth: self.max_depth,
        }
    }
}

// Kronrod-15 abscissae on [-1, 1] (positive half) and weights; the
// embedded Gauss-7 rule uses the even-indexed nodes.
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// One G7/K15 panel; returns (kronrod estimate, error estimate).
fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = fc.abs() * WGK[7];
    for i in 0..7 {
        let dx = half * XGK[i];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[i] = f1;
        fv2[i] = f2;
        res_k += WGK[i] * (f1 + f2);
        res_abs += WGK[i] * (f1.abs() + f2.abs());
        if i % 2 == 1 {
            res_g += WG[i / 2] * (f1 + f2);
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = (fc - mean).abs() * WGK[7];
    for i in 0..7 {
        res_asc += WGK[i] * ((fv1[i] - mean).abs() + (fv2[i] - mean).abs());
    }
    let res_k = res_k * half;
    let res_g = res_g * half;
    let res_asc = res_asc * half.abs();
    let mut err = (res_k - res_g).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * 1f64.min((200.0 * err / res_asc).powf(1.5));
    }
    let res_abs = res_abs * half.abs();
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (res_k, err)
}

/// Single non-adaptive G7/K15 panel value; for short, smooth cells.
pub fn gk15_value<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> f64 {
    gk15(&mut f, a, b).0
}

/// Adaptive integration of `f` over [a, b].
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, opts: &QuadOpts) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (value, err) = adapt(&mut f, a, b, opts, 0);
    let tol = opts.abs_tol.max(opts.rel_tol * value.abs());
    if err > tol.max(1e-14) * 10.0 {
        return Err(Error::Accuracy {
            estimate: value,
            error: err,
        });
    }
    Ok(value)
}

fn adapt<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    opts: &QuadOpts,
    depth: usize,
) -> (f64, f64) {
    let (v, e) = gk15(f, a, b);
    let tol = opts.abs_tol.max(opts.rel_tol * v.abs());
    if e <= tol || depth >= opts.max_depth {
        return (v, e);
    }
    let mid = 0.5 * (a + b);
    let sub = QuadOpts {
        abs_tol: opts.abs_tol * 0.5,
        ..*opts
    };
    let (v1, e1) = adapt(f, a, mid, &sub, depth + 1);
    let (v2, e2) = adapt(f, mid, b, &sub, depth + 1);
    (v1 + v2, e1 + e2)
}

/// Integrate over (a, b] where the integrand may blow up (integrably) at `a`.
///
/// Works inward over dyadic slices toward `a` and extrapolates the
/// geometric tail. Fails if the tail estimate is not below `tail_frac`
/// of the running total.
pub fn integrate_improper_lower<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    opts: &QuadOpts,
    tail_frac: f64,
) -> Result<f64> {
    if a >= b {
        return Ok(0.0);
    }
    let len = b - a;
    let mut total = 0.0;
    let mut hi = b;
    let mut prev_slice = f64::INFINITY;
    for k in 1..=60 {
        let lo = a + len * 0.5f64.powi(k);
        let (v, _) = adapt(&mut f, lo, hi, opts, 0);
        total += v;
        let slice = v.abs();
        if slice < 1e-300 || slice <= opts.abs_tol {
            return Ok(total);
        }
        // Geometric tail extrapolation once the slices are decaying.
        if prev_slice.is_finite() && slice < prev_slice {
            let r = slice / prev_slice;
            if r < 0.9 {
                let tail = slice * r / (1.0 - r);
                if tail <= tail_frac * total.abs().max(opts.abs_tol) {
                    return Ok(total + tail * v.signum());
                }
            }
        }
        prev_slice = slice;
        hi = lo;
    }
    Err(Error::Accuracy {
        estimate: total,
        error: prev_slice,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = integrate(|t| t * t, 0.0, 1.0, &QuadOpts::default()).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn oscillatory() {
        let v = integrate(|t| (10.0 * t).sin(), 0.0, 2.0, &QuadOpts::default()).unwrap();
        let exact = (1.0 - (20.0f64).cos()) / 10.0;
        assert!((v - exact).abs() < 1e-9);
    }

    #[test]
    fn improper_inverse_sqrt() {
        // int_0^1 t^{-1/2} dt = 2
        let v = integrate_improper_lower(|t| t.powf(-0.5), 0.0, 1.0, &QuadOpts::default(), 1e-3)
            .unwrap();
        assert!((v - 2.0).abs() < 1e-6, "v = {v}");
    }

    #[test]
    fn nested_tightens() {
        let o = QuadOpts::default();
        assert!(o.nested(2).abs_tol < o.abs_tol / 8.0);
    }
}
