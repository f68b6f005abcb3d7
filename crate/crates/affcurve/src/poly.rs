//! Exact polynomial machinery: torsion as a polynomial, root location,
//! decomposition of the line into comparability pieces |L| ~ C|t−a|^k,
//! and the unweighted exponent region.

use crate::curve::{Curve, CurveKind};
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Dense real polynomial, coefficients ascending in degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn new(mut coeffs: Vec<f64>) -> Poly {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Poly(coeffs)
    }

    pub fn zero() -> Poly {
        Poly(vec![0.0])
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }

    pub fn degree(&self) -> usize {
        self.0.len() - 1
    }

    pub fn leading(&self) -> f64 {
        *self.0.last().unwrap()
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.0
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Poly {
        if self.0.len() == 1 {
            return Poly::zero();
        }
        Poly::new(
            self.0[1..]
                .iter()
                .enumerate()
                .map(|(i, &c)| c * (i + 1) as f64)
                .collect(),
        )
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![0.0; self.0.len() + other.0.len() - 1];
        for (i, &a) in self.0.iter().enumerate() {
            for (j, &b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn add_scaled(&self, other: &Poly, s: f64) -> Poly {
        let n = self.0.len().max(other.0.len());
        let mut out = vec![0.0; n];
        for (i, &a) in self.0.iter().enumerate() {
            out[i] += a;
        }
        for (i, &b) in other.0.iter().enumerate() {
            out[i] += s * b;
        }
        Poly::new(out)
    }
}

/// L_γ as an exact polynomial (cofactor expansion over polynomial entries).
pub fn poly_torsion(curve: &Curve) -> Result<Poly> {
    let rows = match curve.kind() {
        CurveKind::Polynomial(rows) => rows.clone(),
        CurveKind::Monomial(spec) => {
            let mut rows = Vec::with_capacity(curve.dim());
            for (&a, &c) in spec.exponents.iter().zip(&spec.coeffs) {
                if a < 0.0 || a.fract() != 0.0 {
                    return Err(Error::input(
                        "torsion polynomial requires nonnegative integer exponents",
                    ));
                }
                let mut row = vec![0.0; a as usize + 1];
                row[a as usize] = c;
                rows.push(row);
            }
            rows
        }
        _ => return Err(Error::input("torsion polynomial requires a polynomial curve")),
    };
    let d = curve.dim();
    // entry (i, m): the (m+1)-th derivative of γ_{i+1}
    let mut mat: Vec<Vec<Poly>> = Vec::with_capacity(d);
    for row in rows {
        let mut derivs = Vec::with_capacity(d);
        let mut p = Poly::new(row.clone());
        for _ in 0..d {
            p = p.derivative();
            derivs.push(p.clone());
        }
        mat.push(derivs);
    }
    Ok(poly_det(&mat))
}

fn poly_det(m: &[Vec<Poly>]) -> Poly {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut det = Poly::zero();
    for i in 0..n {
        let minor: Vec<Vec<Poly>> = m
            .iter()
            .enumerate()
            .filter(|&(r, _)| r != i)
            .map(|(_, row)| row[1..].to_vec())
            .collect();
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        det = det.add_scaled(&m[i][0].mul(&poly_det(&minor)), sign);
    }
    det
}

/// All complex roots with multiplicity (companion-matrix eigenvalues,
/// Aberth-polished).
pub fn complex_roots(p: &Poly) -> Result<Vec<Complex64>> {
    if p.is_zero() {
        return Err(Error::input("zero polynomial has no root set"));
    }
    let n = p.degree();
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = p.leading();
    let monic: Vec<f64> = p.0[..n].iter().map(|&c| c / lead).collect();
    let companion = nalgebra::DMatrix::from_fn(n, n, |i, j| {
        if j == n - 1 {
            -monic[i]
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let mut z: Vec<Complex64> = companion.complex_eigenvalues().iter().copied().collect();
    let dp = p.derivative();
    // Aberth sweeps; converges for clusters where plain Newton stalls
    for _ in 0..40 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let pv = p.eval_complex(z[i]);
            let dv = dp.eval_complex(z[i]);
            if pv.norm() == 0.0 {
                continue;
            }
            let newton = if dv.norm() > 0.0 {
                pv / dv
            } else {
                Complex64::new(1e-12, 1e-12)
            };
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    let diff = z[i] - z[j];
                    if diff.norm() > 1e-300 {
                        s += diff.inv();
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - newton * s;
            let w = if denom.norm() > 1e-300 { newton / denom } else { newton };
            z[i] -= w;
            moved = moved.max(w.norm());
        }
        if moved < 1e-14 {
            break;
        }
    }
    // A root of multiplicity m limits Aberth to ~eps^{1/m} accuracy.  Snap
    // each cluster to one value polished on p^{(m-1)}, where it is simple.
    let scale = z.iter().map(|r| r.norm()).fold(1.0f64, f64::max);
    // coarse clustering: a multiplicity-m root is only accurate to ~eps^{1/m}
    let clusters = cluster_roots(&z, scale, 1e-3);
    let mut out = Vec::with_capacity(n);
    for (mean, m) in clusters {
        let mut v = mean;
        if m > 1 {
            let mut q = p.clone();
            for _ in 0..(m - 1) {
                q = q.derivative();
            }
            let dq = q.derivative();
            for _ in 0..50 {
                let qv = q.eval_complex(v);
                let dv = dq.eval_complex(v);
                if dv.norm() < 1e-300 {
                    break;
                }
                let step = qv / dv;
                v -= step;
                if step.norm() < 1e-15 * (1.0 + v.norm()) {
                    break;
                }
            }
            // drop a spurious imaginary part from an even-sized real cluster
            if v.im.abs() <= 1e-7 * scale.max(1.0) {
                v.im = 0.0;
            }
        }
        for _ in 0..m {
            out.push(v);
        }
    }
    Ok(out)
}

/// Sorted deduplicated real parts of all complex roots.
pub fn real_parts_of_roots(p: &Poly) -> Result<Vec<f64>> {
    let roots = complex_roots(p)?;
    let mut re: Vec<f64> = roots.iter().map(|z| z.re).collect();
    re.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out: Vec<f64> = Vec::new();
    for r in re {
        match out.last() {
            Some(&last) if (r - last).abs() <= 1e-10 => {}
            _ => out.push(r),
        }
    }
    Ok(out)
}

/// An interval on which |L(t)| ~ C |t − a|^k.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecompositionPiece {
    pub lo: f64,
    pub hi: f64,
    pub anchor: f64,
    pub order: usize,
    pub constant: f64,
}

/// Distinct root clusters (value, multiplicity) at a relative tolerance.
fn cluster_roots(roots: &[Complex64], scale: f64, rel_tol: f64) -> Vec<(Complex64, usize)> {
    let tol = rel_tol * scale.max(1.0);
    let mut remaining: Vec<Complex64> = roots.to_vec();
    let mut out: Vec<(Complex64, usize)> = Vec::new();
    while let Some(seed) = remaining.pop() {
        let mut members = vec![seed];
        remaining.retain(|&z| {
            if (z - seed).norm() <= tol {
                members.push(z);
                false
            } else {
                true
            }
        });
        let mean = members.iter().sum::<Complex64>() / members.len() as f64;
        out.push((mean, members.len()));
    }
    out
}

/// Split `region` into pieces on which one monomial profile C|t−a|^k of
/// |L| is dominant.  Anchors come from Z (Voronoi by distance on the line);
/// within a cell the candidate profiles are the prefix products of root
/// factors by distance from the anchor, and pieces are cut at profile
/// crossings and annulus radii so the selected profile dominates throughout.
pub fn decompose(l: &Poly, z: &[f64], lo: f64, hi: f64) -> Result<Vec<DecompositionPiece>> {
    if l.is_zero() {
        return Err(Error::input("zero polynomial"));
    }
    if !(lo < hi) {
        return Err(Error::input("empty region"));
    }
    if l.degree() == 0 {
        return Ok(vec![DecompositionPiece {
            lo,
            hi,
            anchor: 0.5 * (lo + hi),
            order: 0,
            constant: l.leading().abs(),
        }]);
    }
    let roots = complex_roots(l)?;
    let scale = roots.iter().map(|r| r.norm()).fold(1.0f64, f64::max);
    let clusters = cluster_roots(&roots, scale, 1e-6);
    let anchors: Vec<f64> = if z.is_empty() {
        vec![0.5 * (lo + hi)]
    } else {
        z.to_vec()
    };

    // cell boundaries: Voronoi midpoints of consecutive anchors, clipped
    let mut cell_edges = vec![lo];
    for w in anchors.windows(2) {
        let m = 0.5 * (w[0] + w[1]);
        if m > lo && m < hi {
            cell_edges.push(m);
        }
    }
    cell_edges.push(hi);

    let lead = l.leading().abs();
    let mut pieces: Vec<DecompositionPiece> = Vec::new();
    for (ci, cell) in cell_edges.windows(2).enumerate() {
        let (clo, chi) = (cell[0], cell[1]);
        // the anchor whose Voronoi cell this is
        let a = *anchors
            .iter()
            .min_by(|&&x, &&y| {
                let mx = (x - 0.5 * (clo + chi)).abs();
                let my = (y - 0.5 * (clo + chi)).abs();
                mx.partial_cmp(&my).unwrap()
            })
            .unwrap();
        let _ = ci;

        // candidate profiles: anchored prefix by complex distance from a
        let mut by_dist: Vec<(f64, usize, Complex64)> = clusters
            .iter()
            .map(|&(zr, k)| {
                let mut dist = (Complex64::new(a, 0.0) - zr).norm();
                // roots numerically at the anchor are anchored from the start
                if dist <= 1e-7 * scale.max(1.0) {
                    dist = 0.0;
                }
                (dist, k, zr)
            })
            .collect();
        by_dist.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        // profile for prefix radius D: order = Σ mult of roots with dist ≤ D,
        //                              constant = lead · Π_{dist > D} |a − z|^mult
        let tol = 1e-9 * scale.max(1.0);
        let tail_constant = |from: usize| -> f64 {
            let mut c = lead;
            for &(_, k, zr) in &by_dist[from..] {
                c *= (Complex64::new(a, 0.0) - zr).norm().powi(k as i32);
            }
            c
        };
        let mut profiles: Vec<(usize, f64, f64)> = Vec::new(); // (order, C, activation radius)
        if by_dist.first().map_or(true, |f| f.0 > 0.0) {
            let c0 = tail_constant(0);
            if c0 > 0.0 {
                profiles.push((0, c0, 0.0));
            }
        }
        let mut order = 0usize;
        let mut idx = 0;
        while idx < by_dist.len() {
            let d0 = by_dist[idx].0;
            while idx < by_dist.len() && by_dist[idx].0 <= d0 + tol {
                order += by_dist[idx].1;
                idx += 1;
            }
            let c = tail_constant(idx);
            if c > 0.0 {
                profiles.push((order, c, d0));
            }
        }
        profiles.dedup_by_key(|p| p.0);

        // cut radii: annulus boundaries (half the activation radii) and
        // pairwise profile crossings
        let mut radii: Vec<f64> = Vec::new();
        for &(_, _, r) in &profiles {
            if r > 0.0 {
                radii.push(0.5 * r);
                radii.push(r);
            }
        }
        for i in 0..profiles.len() {
            for j in (i + 1)..profiles.len() {
                let (k1, c1, _) = profiles[i];
                let (k2, c2, _) = profiles[j];
                if k1 != k2 && c1 > 0.0 && c2 > 0.0 {
                    let s = (c1 / c2).powf(1.0 / (k2 as f64 - k1 as f64));
                    if s.is_finite() && s > 0.0 {
                        radii.push(s);
                    }
                }
            }
        }
        let mut cuts: Vec<f64> = vec![clo, chi];
        for &r in &radii {
            for t in [a - r, a + r] {
                if t > clo && t < chi {
                    cuts.push(t);
                }
            }
        }
        cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        cuts.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * (hi - lo));

        for w in cuts.windows(2) {
            let (plo, phi) = (w[0], w[1]);
            if !(plo < phi) {
                continue;
            }
            let s_mid = (0.5 * (plo + phi) - a).abs();
            // dominant profile at the midpoint
            // ties (s_mid at the anchor) resolve to the lowest order: the
            // s → 0 dominant profile
            let (order, c, _) = *profiles
                .iter()
                .max_by(|x, y| {
                    let vx = x.1 * s_mid.powi(x.0 as i32);
                    let vy = y.1 * s_mid.powi(y.0 as i32);
                    vx.partial_cmp(&vy)
                        .unwrap()
                        .then(y.0.cmp(&x.0))
                })
                .unwrap();
            // merge with the previous piece when nothing changed
            if let Some(last) = pieces.last_mut() {
                if last.anchor == a
                    && last.order == order
                    && (last.constant - c).abs() <= 1e-12 * c.max(1.0)
                    && (last.hi - plo).abs() <= 1e-12 * (hi - lo)
                {
                    last.hi = phi;
                    continue;
                }
            }
            pieces.push(DecompositionPiece {
                lo: plo,
                hi: phi,
                anchor: a,
                order,
                constant: c,
            });
        }
    }
    if pieces.len() > 64 * z.len().max(1) {
        return Err(Error::Complexity(pieces.len()));
    }
    Ok(pieces)
}

/// Per piece, max over n samples of max(|L|/(C|t−a|^k), C|t−a|^k/|L|).
pub fn verify_comparability(pieces: &[DecompositionPiece], l: &Poly, n: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(pieces.len());
    for p in pieces {
        let mut worst = 1.0f64;
        for i in 0..n {
            let t = p.lo + (p.hi - p.lo) * (i as f64 + 0.5) / n as f64;
            let s = (t - p.anchor).abs();
            let model = p.constant * s.powi(p.order as i32);
            let actual = l.eval(t).abs();
            if actual == 0.0 {
                if p.order == 0 {
                    return Err(Error::input(format!(
                        "L vanishes at t = {t} inside a piece of order 0"
                    )));
                }
                continue;
            }
            if model == 0.0 {
                continue;
            }
            worst = worst.max(actual / model).max(model / actual);
        }
        out.push(worst);
    }
    Ok(out)
}

/// Endpoint exponents and the unweighted exponent region vertices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExponentRegion {
    pub n_loc: usize,
    pub n_glob: usize,
    pub theta_loc: f64,
    pub theta_glob: f64,
    /// (1/p, 1/q) vertices in the order loc, glob, loc-dual, glob-dual.
    pub vertices: [[f64; 2]; 4],
}

/// θ and region vertices from the vanishing orders of L:
///   N_loc = max multiplicity of a real root, N_glob = deg L,
///   θ_• = (1 + 2N_•/(d(d+1)))^{−1}.
pub fn exponent_region(curve: &Curve) -> Result<ExponentRegion> {
    let l = poly_torsion(curve)?;
    if l.is_zero() {
        return Err(Error::input("torsion vanishes identically; curve is degenerate"));
    }
    let d = curve.dim() as f64;
    let n_glob = l.degree();
    let n_loc = if n_glob == 0 {
        0
    } else {
        let roots = complex_roots(&l)?;
        let scale = roots.iter().map(|r| r.norm()).fold(1.0f64, f64::max);
        cluster_roots(&roots, scale, 1e-6)
            .iter()
            .filter(|(z, _)| z.im.abs() <= 1e-6 * scale.max(1.0))
            .map(|&(_, k)| k)
            .max()
            .unwrap_or(0)
    };
    // θ = (1 + 2N/(d(d+1)))^{-1} = d(d+1)/(d(d+1) + 2N), one exact division
    let dd1 = curve.dim() * (curve.dim() + 1);
    let theta = |nn: usize| dd1 as f64 / (dd1 + 2 * nn) as f64;
    let theta_loc = theta(n_loc);
    let theta_glob = theta(n_glob);
    let inv_p = 2.0 / (d + 1.0);
    let inv_q = 2.0 * (d - 1.0) / (d * (d + 1.0));
    Ok(ExponentRegion {
        n_loc,
        n_glob,
        theta_loc,
        theta_glob,
        vertices: [
            [theta_loc * inv_p, theta_loc * inv_q],
            [theta_glob * inv_p, theta_glob * inv_q],
            [1.0 - theta_loc * inv_q, 1.0 - theta_loc * inv_p],
            [1.0 - theta_glob * inv_q, 1.0 - theta_glob * inv_p],
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry;

    #[test]
    fn torsion_polys() {
        let c = Curve::moment(2, -1.0, 1.0).unwrap();
        assert_eq!(poly_torsion(&c).unwrap(), Poly(vec![2.0]));
        let c = Curve::polynomial(vec![vec![0.0, 1.0], vec![0.0, 0.0, 0.0, 1.0]], -1.0, 1.0).unwrap();
        assert_eq!(poly_torsion(&c).unwrap(), Poly(vec![0.0, 6.0]));
        let c = Curve::moment(3, -1.0, 1.0).unwrap();
        assert_eq!(poly_torsion(&c).unwrap(), Poly(vec![12.0]));
    }

    #[test]
    fn torsion_poly_matches_pointwise() {
        let c = Curve::polynomial(
            vec![vec![0.0, 1.0, 0.5], vec![1.0, 0.0, -2.0, 1.0], vec![0.0, 0.0, 0.0, 0.0, 3.0]],
            -2.0,
            2.0,
        )
        .unwrap();
        let p = poly_torsion(&c).unwrap();
        for i in 0..20 {
            let t = -1.9 + 3.8 * i as f64 / 19.0;
            let direct = geometry::torsion(&c, t, 3).unwrap();
            let via_poly = p.eval(t);
            assert!(
                (direct - via_poly).abs() <= 1e-10 * direct.abs().max(1.0),
                "t={t}: {direct} vs {via_poly}"
            );
        }
    }

    #[test]
    fn root_real_parts() {
        // 6t -> {0}
        assert_eq!(real_parts_of_roots(&Poly(vec![0.0, 6.0])).unwrap(), vec![0.0]);
        // t^2+1 -> roots ±i, real part 0
        let z = real_parts_of_roots(&Poly(vec![1.0, 0.0, 1.0])).unwrap();
        assert_eq!(z.len(), 1);
        assert!(z[0].abs() < 1e-9);
        // t^2 (t-1)^3
        let p = Poly(vec![0.0, 0.0, 1.0]).mul(&Poly(vec![-1.0, 1.0]).mul(&Poly(vec![-1.0, 1.0]).mul(&Poly(vec![-1.0, 1.0]))));
        let z = real_parts_of_roots(&p).unwrap();
        assert_eq!(z.len(), 2);
        assert!(z[0].abs() < 1e-7 && (z[1] - 1.0).abs() < 1e-7);
    }

    #[test]
    fn roots_satisfy_polynomial() {
        let p = Poly(vec![-6.0, 11.0, -6.0, 1.0]); // (t-1)(t-2)(t-3)
        let roots = complex_roots(&p).unwrap();
        assert_eq!(roots.len(), 3);
        for z in roots {
            assert!(p.eval_complex(z).norm() < 1e-8);
        }
    }

    fn example_l() -> Poly {
        // t^2 (t-1)^3 (t^2+1)
        let t2 = Poly(vec![0.0, 0.0, 1.0]);
        let m1 = Poly(vec![-1.0, 1.0]);
        let q = Poly(vec![1.0, 0.0, 1.0]);
        t2.mul(&m1).mul(&m1).mul(&m1).mul(&q)
    }

    #[test]
    fn decompose_constant() {
        let pieces = decompose(&Poly(vec![2.0]), &[], -1.0, 1.0).unwrap();
        assert_eq!(pieces.len(), 1);
        assert_eq!(pieces[0].order, 0);
        assert_eq!(pieces[0].constant, 2.0);
    }

    #[test]
    fn decompose_pure_monomial() {
        let pieces = decompose(&Poly(vec![0.0, 6.0]), &[0.0], 0.0, 1.0).unwrap();
        assert_eq!(pieces.len(), 1);
        assert_eq!(pieces[0].anchor, 0.0);
        assert_eq!(pieces[0].order, 1);
        assert!((pieces[0].constant - 6.0).abs() < 1e-9);
        let worst = verify_comparability(&pieces, &Poly(vec![0.0, 6.0]), 100).unwrap();
        assert!((worst[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn decompose_example_curve() {
        let l = example_l();
        let z = real_parts_of_roots(&l).unwrap();
        let pieces = decompose(&l, &z, -2.0, 3.0).unwrap();
        // pieces tile (-2,3)
        assert!((pieces[0].lo + 2.0).abs() < 1e-12);
        assert!((pieces.last().unwrap().hi - 3.0).abs() < 1e-12);
        for w in pieces.windows(2) {
            assert!((w[0].hi - w[1].lo).abs() < 1e-12);
        }
        // local behavior at both anchors
        let near0 = pieces
            .iter()
            .find(|p| p.lo < 0.0 && p.hi > 0.0)
            .expect("piece containing 0");
        assert!(near0.anchor.abs() < 1e-9);
        assert_eq!(near0.order, 2);
        assert!((near0.constant - 1.0).abs() < 1e-6, "C = {}", near0.constant);
        let near1 = pieces
            .iter()
            .find(|p| p.lo < 1.0 && p.hi > 1.0)
            .expect("piece containing 1");
        assert!((near1.anchor - 1.0).abs() < 1e-9);
        assert_eq!(near1.order, 3);
        assert!((near1.constant - 2.0).abs() < 1e-6, "C = {}", near1.constant);
        // comparability on every piece
        let worst = verify_comparability(&pieces, &l, 1000).unwrap();
        for (p, w) in pieces.iter().zip(&worst) {
            assert!(*w <= 100.0, "piece {p:?} factor {w}");
        }
    }

    #[test]
    fn comparability_grows_with_samples() {
        let l = example_l();
        let z = real_parts_of_roots(&l).unwrap();
        let pieces = decompose(&l, &z, -2.0, 3.0).unwrap();
        let a = verify_comparability(&pieces, &l, 100).unwrap();
        let b = verify_comparability(&pieces, &l, 1000).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!(y >= x || (y - x).abs() < 1e-12);
        }
    }

    #[test]
    fn exponent_regions() {
        // (t, t^2): nonvanishing torsion
        let c = Curve::moment(2, -1.0, 1.0).unwrap();
        let r = exponent_region(&c).unwrap();
        assert_eq!((r.n_loc, r.n_glob), (0, 0));
        assert_eq!(r.theta_loc, 1.0);
        assert_eq!(r.theta_glob, 1.0);
        assert!((r.vertices[0][0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((r.vertices[0][1] - 1.0 / 3.0).abs() < 1e-15);
        // (t, t^3): L = 6t
        let c = Curve::polynomial(vec![vec![0.0, 1.0], vec![0.0, 0.0, 0.0, 1.0]], -1.0, 1.0).unwrap();
        let r = exponent_region(&c).unwrap();
        assert_eq!((r.n_loc, r.n_glob), (1, 1));
        assert_eq!(r.theta_loc, 0.75);
        assert_eq!(r.theta_glob, 0.75);
        // (t, t^4): L = 12t^2
        let c = Curve::polynomial(vec![vec![0.0, 1.0], vec![0.0, 0.0, 0.0, 0.0, 1.0]], -1.0, 1.0).unwrap();
        let r = exponent_region(&c).unwrap();
        assert_eq!((r.n_loc, r.n_glob), (2, 2));
        assert_eq!(r.theta_loc, 0.6);
        assert_eq!(r.theta_glob, 0.6);
    }

    #[test]
    fn degenerate_curve_rejected() {
        let line = Curve::polynomial(vec![vec![0.0, 1.0], vec![0.0, 2.0]], -1.0, 1.0).unwrap();
        assert!(exponent_region(&line).is_err());
    }
}
