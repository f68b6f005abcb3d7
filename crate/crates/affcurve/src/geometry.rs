//! Torsion, affine arclength density, ratio functions, and the two
//! Jacobian evaluations (direct determinant vs. nested-integral recursion).

use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::quad::{self, QuadOpts};
use nalgebra::DMatrix;
use std::cell::RefCell;

/// L^j(t): determinant of the j×j matrix of derivatives 1..j of the first
/// j components.  j = 0 (or any j ≤ 0 by convention) returns 1.
pub fn torsion(curve: &Curve, t: f64, j: usize) -> Result<f64> {
    if j == 0 {
        return Ok(1.0);
    }
    if j > curve.dim() {
        return Err(Error::UnsupportedOrder {
            order: j,
            max: curve.dim(),
        });
    }
    let derivs = curve.eval_all(t, j)?;
    let m = DMatrix::from_fn(j, j, |i, c| derivs[c + 1][i]);
    Ok(m.determinant())
}

fn torsion_conv(curve: &Curve, t: f64, j: isize) -> Result<f64> {
    if j <= 0 {
        Ok(1.0)
    } else {
        torsion(curve, t, j as usize)
    }
}

/// λ(t) = |L(t)|^{2/(d(d+1))}.
pub fn affine_density(curve: &Curve, t: f64) -> Result<f64> {
    let d = curve.dim() as f64;
    let l = torsion(curve, t, curve.dim())?;
    Ok(l.abs().powf(2.0 / (d * (d + 1.0))))
}

/// (A^k, B^k) at t:
///   A^k = L^{d−k−1} L^{d−k+1} / (L^{d−k})²
///   B^k = L (L^{d−k−1})^k (L^{d−k})^{−(k+1)}
pub fn ratio_functions(curve: &Curve, t: f64, k: usize) -> Result<(f64, f64)> {
    let d = curve.dim();
    if k == 0 || k > d {
        return Err(Error::Range(format!("k = {k} must lie in 1..{d}")));
    }
    let di = d as isize;
    let ki = k as isize;
    let lm1 = torsion_conv(curve, t, di - ki - 1)?;
    let l0 = torsion_conv(curve, t, di - ki)?;
    let lp1 = torsion_conv(curve, t, di - ki + 1)?;
    let l = torsion(curve, t, d)?;
    if l0 == 0.0 {
        return Err(Error::SingularTorsion { j: d - k, t });
    }
    let a = lm1 * lp1 / (l0 * l0);
    let b = l * lm1.powi(k as i32) / l0.powi(k as i32 + 1);
    Ok((a, b))
}

/// det(γ′(t_1), ..., γ′(t_d)); sign follows the column order as given.
pub fn jacobian_direct(curve: &Curve, tuple: &[f64]) -> Result<f64> {
    let d = curve.dim();
    if tuple.len() != d {
        return Err(Error::Arity {
            expected: d,
            got: tuple.len(),
        });
    }
    let mut cols = Vec::with_capacity(d);
    for &t in tuple {
        cols.push(curve.eval(t, 1)?);
    }
    let m = DMatrix::from_fn(d, d, |i, c| cols[c][i]);
    Ok(m.determinant())
}

/// Locate a sign change or zero of t ↦ f(t) on [a, b]; sampling at 64
/// Chebyshev points, refined by bisection.  Returns the crossing point.
pub(crate) fn find_sign_change<F: Fn(f64) -> Result<f64>>(
    f: &F,
    a: f64,
    b: f64,
) -> Result<Option<f64>> {
    let n = 64;
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut prev_t = a;
    let mut prev_v = f(a)?;
    for i in (0..n).rev() {
        let t = mid + half * (std::f64::consts::PI * (2 * i + 1) as f64 / (2 * n) as f64).cos();
        let v = f(t)?;
        if v == 0.0 {
            return Ok(Some(t));
        }
        if prev_v != 0.0 && v.signum() != prev_v.signum() {
            // bisect [prev_t, t]
            let (mut lo, mut hi) = (prev_t, t);
            let (mut flo, _) = (prev_v, v);
            for _ in 0..80 {
                let m = 0.5 * (lo + hi);
                let fm = f(m)?;
                if fm == 0.0 {
                    return Ok(Some(m));
                }
                if fm.signum() == flo.signum() {
                    lo = m;
                    flo = fm;
                } else {
                    hi = m;
                }
            }
            return Ok(Some(0.5 * (lo + hi)));
        }
        prev_t = t;
        prev_v = v;
    }
    let vb = f(b)?;
    if vb == 0.0 || (prev_v != 0.0 && vb.signum() != prev_v.signum()) {
        return Ok(Some(0.5 * (prev_t + b)));
    }
    Ok(None)
}

/// Verify every L^j is nonvanishing on [a, b]; reports the first offender.
pub fn check_nonvanishing_torsions(curve: &Curve, a: f64, b: f64) -> Result<()> {
    for j in 1..=curve.dim() {
        let f = |t: f64| torsion(curve, t, j);
        if let Some(t) = find_sign_change(&f, a, b)? {
            return Err(Error::SingularTorsion { j, t });
        }
    }
    Ok(())
}

/// The nested-integral Jacobian:
///   J^1(t) = A^1(t)
///   J^k(t_1..t_k) = Π_i A^k(t_i) · ∫_{t_1}^{t_2}···∫_{t_{k−1}}^{t_k} J^{k−1}(s) ds
/// (the s_i range independently over [t_i, t_{i+1}]).  Equals the direct
/// determinant up to sign convention when every L^j is nonvanishing.
pub fn jacobian_recursive(curve: &Curve, tuple: &[f64], quad: &QuadOpts) -> Result<f64> {
    let d = curve.dim();
    if tuple.len() != d {
        return Err(Error::Arity {
            expected: d,
            got: tuple.len(),
        });
    }
    for w in tuple.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::OrderError(format!("{:?}", tuple)));
        }
    }
    check_nonvanishing_torsions(curve, tuple[0], tuple[d - 1])?;
    let err: RefCell<Option<Error>> = RefCell::new(None);
    let v = jk(curve, tuple, quad, 0, &err);
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    Ok(v)
}

fn jk(curve: &Curve, tuple: &[f64], quad: &QuadOpts, level: u32, err: &RefCell<Option<Error>>) -> f64 {
    let k = tuple.len();
    let ratio = |t: f64| match ratio_functions(curve, t, k) {
        Ok((a, _)) => a,
        Err(e) => {
            err.borrow_mut().get_or_insert(e);
            0.0
        }
    };
    if k == 1 {
        return ratio(tuple[0]);
    }
    let mut prod = 1.0;
    for &t in tuple {
        prod *= ratio(t);
    }
    // innermost variable varies fastest; integrate the box iteratively
    let inner = nested_box_integral(curve, tuple, &mut Vec::with_capacity(k - 1), 0, quad, level, err);
    prod * inner
}

fn nested_box_integral(
    curve: &Curve,
    tuple: &[f64],
    s: &mut Vec<f64>,
    axis: usize,
    quad: &QuadOpts,
    level: u32,
    err: &RefCell<Option<Error>>,
) -> f64 {
    let k = tuple.len();
    if axis == k - 1 {
        return jk(curve, s, quad, level, err);
    }
    let opts = quad.nested(level + axis as u32 + 1);
    let res = quad::integrate(
        |x| {
            s.push(x);
            let v = nested_box_integral(curve, tuple, s, axis + 1, quad, level, err);
            s.pop();
            v
        },
        tuple[axis],
        tuple[axis + 1],
        &opts,
    );
    match res {
        Ok(v) => v,
        Err(e) => {
            err.borrow_mut().get_or_insert(e);
            0.0
        }
    }
}

/// φ(t) = ∫_{t0}^{t} λ.
pub fn cumulative_arclength(curve: &Curve, t0: f64, t: f64, quad: &QuadOpts) -> Result<f64> {
    let dom = curve.domain();
    let (lo, hi) = (t0.min(t), t0.max(t));
    if !dom.contains_interval(lo, hi) {
        return Err(Error::Domain {
            t: if dom.contains(t0) { t } else { t0 },
            lo: dom.lo,
            hi: dom.hi,
        });
    }
    let e: RefCell<Option<Error>> = RefCell::new(None);
    let v = quad::integrate(
        |x| match affine_density(curve, x) {
            Ok(l) => l,
            Err(er) => {
                e.borrow_mut().get_or_insert(er);
                0.0
            }
        },
        t0,
        t,
        quad,
    )?;
    if let Some(er) = e.into_inner() {
        return Err(er);
    }
    Ok(v)
}

/// Tabulated φ over [lo, hi] with a monotone-cubic inverse h.
pub struct ArclengthParam<'a> {
    curve: &'a Curve,
    pub t0: f64,
    ts: Vec<f64>,
    phis: Vec<f64>,
    slopes: Vec<f64>, // dt/dφ at the table nodes (Fritsch–Carlson limited)
}

impl<'a> ArclengthParam<'a> {
    pub fn build(curve: &'a Curve, t0: f64, lo: f64, hi: f64, quad: &QuadOpts) -> Result<Self> {
        const N: usize = 1024;
        if !(lo < hi) || !curve.domain().contains_interval(lo, hi) || t0 < lo || t0 > hi {
            return Err(Error::input("arclength table range invalid"));
        }
        let mut ts = Vec::with_capacity(N + 1);
        for i in 0..=N {
            ts.push(lo + (hi - lo) * i as f64 / N as f64);
        }
        // cumulative sums of per-cell integrals, shifted so φ(t0) = 0
        let mut phis = vec![0.0; N + 1];
        let cell = quad.nested(1);
        for i in 0..N {
            let v = quad::integrate(
                |x| affine_density(curve, x).unwrap_or(0.0),
                ts[i],
                ts[i + 1],
                &cell,
            )?;
            phis[i + 1] = phis[i] + v;
        }
        let shift = cumulative_arclength(curve, lo, t0, quad)?;
        for p in phis.iter_mut() {
            *p -= shift;
        }
        // slopes of the inverse: dt/dφ = 1/λ, clamped where λ degenerates
        let slopes: Vec<f64> = ts
            .iter()
            .map(|&t| {
                let l = affine_density(curve, t).unwrap_or(0.0);
                if l > 1e-300 {
                    1.0 / l
                } else {
                    0.0
                }
            })
            .collect();
        Ok(ArclengthParam {
            curve,
            t0,
            ts,
            phis,
            slopes,
        })
    }

    pub fn total_range(&self) -> (f64, f64) {
        (self.phis[0], *self.phis.last().unwrap())
    }

    pub fn phi(&self, t: f64) -> Result<f64> {
        cumulative_arclength(self.curve, self.t0, t, &QuadOpts::default())
    }

    /// h(ρ): the t with φ(t) = ρ, |φ(h(ρ)) − ρ| ≤ 1e−9 (1 + ρ).
    pub fn inverse(&self, rho: f64) -> Result<f64> {
        let (a, b) = self.total_range();
        if rho < a - 1e-12 || rho > b + 1e-12 {
            return Err(Error::Range(format!("rho = {rho} outside [{a}, {b}]")));
        }
        let rho = rho.clamp(a, b);
        // bracketing cell by binary search on the monotone φ table
        let idx = match self
            .phis
            .binary_search_by(|p| p.partial_cmp(&rho).unwrap())
        {
            Ok(i) => return Ok(self.ts[i]),
            Err(i) => i.clamp(1, self.phis.len() - 1) - 1,
        };
        let (p0, p1) = (self.phis[idx], self.phis[idx + 1]);
        let (t0, t1) = (self.ts[idx], self.ts[idx + 1]);
        let mut t = if p1 > p0 {
            // cubic Hermite in φ with monotonicity-limited slopes
            let h = p1 - p0;
            let x = (rho - p0) / h;
            let (mut m0, mut m1) = (self.slopes[idx], self.slopes[idx + 1]);
            let sec = (t1 - t0) / h;
            if sec > 0.0 {
                m0 = m0.min(3.0 * sec);
                m1 = m1.min(3.0 * sec);
            }
            let x2 = x * x;
            let x3 = x2 * x;
            t0 * (2.0 * x3 - 3.0 * x2 + 1.0)
                + m0 * h * (x3 - 2.0 * x2 + x)
                + t1 * (-2.0 * x3 + 3.0 * x2)
                + m1 * h * (x3 - x2)
        } else {
            0.5 * (t0 + t1)
        };
        // Newton polish on φ(t) − ρ, φ within the cell by a single GK panel
        let tol = 1e-10 * (1.0 + rho.abs());
        for _ in 0..40 {
            let phi_t = p0 + quad::gk15_value(|x| affine_density(self.curve, x).unwrap_or(0.0), t0, t);
            let r = phi_t - rho;
            if r.abs() <= tol {
                break;
            }
            let l = affine_density(self.curve, t).unwrap_or(0.0);
            if l <= 1e-300 {
                break;
            }
            t = (t - r / l).clamp(t0.min(t1), t0.max(t1));
        }
        Ok(t)
    }
}

/// Sampled profile of every L^j and λ on a grid; serializes to CSV with
/// columns t, L1, ..., Ld, lambda.
pub struct TorsionProfile {
    pub ts: Vec<f64>,
    /// row per grid point, entry per j = 1..d
    pub torsions: Vec<Vec<f64>>,
    pub lambdas: Vec<f64>,
}

impl TorsionProfile {
    pub fn sample(curve: &Curve, lo: f64, hi: f64, n: usize) -> Result<TorsionProfile> {
        if n < 2 {
            return Err(Error::input("profile needs at least 2 points"));
        }
        let d = curve.dim();
        let mut ts = Vec::with_capacity(n);
        let mut torsions = Vec::with_capacity(n);
        let mut lambdas = Vec::with_capacity(n);
        for i in 0..n {
            // strictly interior grid
            let t = lo + (hi - lo) * (i as f64 + 0.5) / n as f64;
            let row: Result<Vec<f64>> = (1..=d).map(|j| torsion(curve, t, j)).collect();
            let row = row?;
            let dd = d as f64;
            lambdas.push(row[d - 1].abs().powf(2.0 / (dd * (dd + 1.0))));
            torsions.push(row);
            ts.push(t);
        }
        Ok(TorsionProfile {
            ts,
            torsions,
            lambdas,
        })
    }

    pub fn to_csv(&self) -> String {
        let d = self.torsions.first().map_or(0, |r| r.len());
        let mut s = String::from("t");
        for j in 1..=d {
            s.push_str(&format!(",L{j}"));
        }
        s.push_str(",lambda\n");
        for i in 0..self.ts.len() {
            s.push_str(&format!("{}", self.ts[i]));
            for v in &self.torsions[i] {
                s.push_str(&format!(",{v}"));
            }
            s.push_str(&format!(",{}\n", self.lambdas[i]));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{BuiltinName, Curve};

    fn parabola() -> Curve {
        Curve::moment(2, -10.0, 10.0).unwrap()
    }

    #[test]
    fn parabola_torsions() {
        let c = parabola();
        assert!((torsion(&c, 0.3, 2).unwrap() - 2.0).abs() < 1e-12);
        assert!((torsion(&c, 0.3, 1).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(torsion(&c, 0.3, 0).unwrap(), 1.0);
    }

    #[test]
    fn monomial_torsion_formula() {
        // a = (1,3): L(t) = 1·3·(3−1)·t^{1+3−3} = 6t, so L(2) = 12
        let c = Curve::monomial_unit(&[1.0, 3.0], 0.0, 10.0).unwrap();
        assert!((torsion(&c, 2.0, 2).unwrap() - 12.0).abs() < 1e-10);
    }

    #[test]
    fn helix_torsion() {
        let c = Curve::builtin(BuiltinName::Helix, -100.0, 100.0).unwrap();
        for &t in &[0.0, 1.0, -3.7, 55.0] {
            assert!((torsion(&c, t, 3).unwrap() + 1.0).abs() < 1e-10, "t={t}");
        }
    }

    #[test]
    fn densities() {
        let c = parabola();
        assert!((affine_density(&c, 0.1).unwrap() - 2f64.powf(1.0 / 3.0)).abs() < 1e-12);
        let h = Curve::builtin(BuiltinName::Helix, -10.0, 10.0).unwrap();
        assert!((affine_density(&h, 1.0).unwrap() - 1.0).abs() < 1e-12);
        // density vanishes at a zero of L
        let m = Curve::monomial_unit(&[1.0, 3.0], -1.0, 1.0).unwrap();
        assert_eq!(affine_density(&m, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn parabola_ratios() {
        let (a, b) = ratio_functions(&parabola(), 0.7, 1).unwrap();
        assert!((a - 2.0).abs() < 1e-12);
        assert!((b - 2.0).abs() < 1e-12);
    }

    #[test]
    fn b_at_top_is_torsion() {
        // B^d = L, moment curve d=3
        let c = Curve::moment(3, -5.0, 5.0).unwrap();
        let (_, b) = ratio_functions(&c, 0.4, 3).unwrap();
        assert!((b - 12.0).abs() < 1e-9);
    }

    #[test]
    fn product_identity() {
        // Π_{j≤k} (A^j)^j = B^k
        let curves = [
            Curve::moment(3, 0.0, 2.0).unwrap(),
            Curve::monomial_unit(&[1.0, 2.0, 4.0], 0.0, 2.0).unwrap(),
            Curve::monomial_unit(&[-1.0, 1.0, 2.0], 0.0, 2.0).unwrap(),
        ];
        for c in &curves {
            for i in 0..20 {
                let t = 0.05 + 1.9 * (i as f64 + 0.5) / 20.0;
                for k in 1..=3usize {
                    let mut prod = 1.0;
                    for j in 1..=k {
                        let (a, _) = ratio_functions(c, t, j).unwrap();
                        prod *= a.powi(j as i32);
                    }
                    let (_, b) = ratio_functions(c, t, k).unwrap();
                    assert!(
                        (prod - b).abs() <= 1e-9 * b.abs().max(1.0),
                        "k={k} t={t}: {prod} vs {b}"
                    );
                }
            }
        }
    }

    #[test]
    fn direct_jacobian_values() {
        let c = parabola();
        assert!((jacobian_direct(&c, &[0.0, 1.0]).unwrap() - 2.0).abs() < 1e-12);
        // repeated entry -> 0
        assert_eq!(jacobian_direct(&c, &[0.5, 0.5]).unwrap(), 0.0);
        let m3 = Curve::moment(3, -5.0, 5.0).unwrap();
        assert!((jacobian_direct(&m3, &[0.0, 1.0, 2.0]).unwrap() - 12.0).abs() < 1e-9);
    }

    #[test]
    fn direct_jacobian_alternates_sign() {
        let c = parabola();
        let a = jacobian_direct(&c, &[0.1, 0.9]).unwrap();
        let b = jacobian_direct(&c, &[0.9, 0.1]).unwrap();
        assert!((a + b).abs() < 1e-14);
    }

    #[test]
    fn recursive_matches_direct_d2() {
        let c = Curve::moment(2, -0.5, 1.5).unwrap();
        let q = QuadOpts::with_tol(1e-9);
        let r = jacobian_recursive(&c, &[0.0, 1.0], &q).unwrap();
        assert!((r - 2.0).abs() < 1e-8, "r = {r}");
    }

    #[test]
    fn recursive_matches_direct_d3() {
        let c = Curve::moment(3, 0.0, 1.0).unwrap();
        let q = QuadOpts::with_tol(1e-9);
        let tuple = [0.1, 0.5, 0.9];
        let r = jacobian_recursive(&c, &tuple, &q).unwrap();
        let dir = jacobian_direct(&c, &tuple).unwrap();
        assert!((r - dir).abs() <= 1e-8 * dir.abs(), "{r} vs {dir}");
    }

    #[test]
    fn recursive_rejects_ties_and_disorder() {
        let c = parabola();
        let q = QuadOpts::default();
        assert!(matches!(
            jacobian_recursive(&c, &[0.5, 0.5], &q),
            Err(Error::OrderError(_))
        ));
        assert!(matches!(
            jacobian_recursive(&c, &[0.9, 0.1], &q),
            Err(Error::OrderError(_))
        ));
    }

    #[test]
    fn recursive_detects_torsion_zero() {
        // (t, t^3): L = 6t changes sign at 0
        let c = Curve::monomial_unit(&[1.0, 3.0], -1.0, 1.0).unwrap();
        let q = QuadOpts::default();
        match jacobian_recursive(&c, &[-0.5, 0.5], &q) {
            Err(Error::SingularTorsion { j: 2, t }) => assert!(t.abs() < 1e-6),
            other => panic!("expected singular torsion, got {other:?}"),
        }
    }

    #[test]
    fn arclength_constant_density() {
        let c = Curve::moment(2, -1.0, 2.0).unwrap();
        let q = QuadOpts::default();
        let v = cumulative_arclength(&c, 0.0, 1.0, &q).unwrap();
        assert!((v - 2f64.powf(1.0 / 3.0)).abs() < 1e-10);
    }

    #[test]
    fn arclength_inverse() {
        let c = Curve::moment(2, -1.0, 2.0).unwrap();
        let q = QuadOpts::default();
        let p = ArclengthParam::build(&c, 0.0, 0.0, 1.0, &q).unwrap();
        // h(0) = t0
        assert!((p.inverse(0.0).unwrap() - 0.0).abs() < 1e-9);
        // constant density: h(λ/2) = 1/2
        let lam = 2f64.powf(1.0 / 3.0);
        assert!((p.inverse(lam / 2.0).unwrap() - 0.5).abs() < 1e-9);
        // round trip at random levels
        for i in 1..10 {
            let rho = lam * i as f64 / 10.0;
            let t = p.inverse(rho).unwrap();
            let back = cumulative_arclength(&c, 0.0, t, &q).unwrap();
            assert!((back - rho).abs() <= 1e-9 * (1.0 + rho), "rho={rho}");
        }
        assert!(p.inverse(100.0).is_err());
    }

    #[test]
    fn profile_csv_shape() {
        let c = parabola();
        let p = TorsionProfile::sample(&c, 0.0, 1.0, 16).unwrap();
        let csv = p.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "t,L1,L2,lambda");
        assert_eq!(lines.count(), 16);
    }

    #[test]
    fn reparam_covariance() {
        // |L_{γ∘φ}(t)| = |φ'(t)|^{d(d+1)/2} |L_γ(φ(t))| for power maps
        let base = Curve::monomial_unit(&[1.0, 2.0], 0.0, 10.0).unwrap();
        let k = 2.0;
        let re = base.reparametrize(crate::curve::ReparamMap::Power(k)).unwrap();
        for &t in &[0.3, 0.9, 1.7, 2.5] {
            let lhs = torsion(&re, t, 2).unwrap().abs();
            let phi = t * t;
            let dphi = k * t;
            let rhs = dphi.abs().powi(3) * torsion(&base, phi, 2).unwrap().abs();
            assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0), "t={t}");
        }
    }

    #[test]
    fn exponential_reparam_torsion_decay() {
        // a = (1,2) under e^{-t}: |L_Γ(t)| = 2 e^{-3t}
        let base = Curve::monomial_unit(&[1.0, 2.0], 0.0, 1.0).unwrap();
        let g = base.reparametrize(crate::curve::ReparamMap::Exponential).unwrap();
        for &t in &[0.5, 1.0, 3.0, 7.0] {
            let l = torsion(&g, t, 2).unwrap().abs();
            let expect = 2.0 * (-3.0 * t).exp();
            assert!((l - expect).abs() <= 1e-10 * expect, "t={t}");
        }
    }

    #[test]
    fn affine_equivariance() {
        // L_{Aγ+b} = det(A) L_γ
        let c = parabola();
        let img = c
            .affine_image(vec![vec![2.0, 0.0], vec![0.0, 1.0]], vec![3.0, -1.0])
            .unwrap();
        for &t in &[-0.5, 0.2, 1.8] {
            let a = torsion(&img, t, 2).unwrap();
            let b = 2.0 * torsion(&c, t, 2).unwrap();
            assert!((a - b).abs() < 1e-10);
        }
        let flip = c
            .affine_image(vec![vec![1.0, 0.0], vec![0.0, -1.0]], vec![0.0, 0.0])
            .unwrap();
        let a = torsion(&flip, 0.4, 2).unwrap();
        assert!((a + 2.0).abs() < 1e-12);
    }
}
