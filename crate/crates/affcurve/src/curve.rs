//! Curves γ: I → R^d with exact derivatives up to order d.
//!
//! Only closed-form curve kinds are supported; every derivative up to
//! order d is evaluated by differentiation rules, never by differencing.
//! Torsion is a d×d determinant of derivatives, and differencing noise
//! is fatal for flat curves like e^{-1/t}.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Open interval (lo, hi); `hi` may be +∞.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::input(format!("empty interval ({lo}, {hi})")));
        }
        Ok(Interval { lo, hi })
    }

    /// Strict interior membership; endpoints are excluded.
    pub fn contains(&self, t: f64) -> bool {
        t > self.lo && t < self.hi
    }

    pub fn contains_interval(&self, lo: f64, hi: f64) -> bool {
        lo >= self.lo && hi <= self.hi
    }
}

/// Falling factorial a(a-1)...(a-m+1); empty product for m = 0.
pub(crate) fn falling(a: f64, m: usize) -> f64 {
    let mut p = 1.0;
    for i in 0..m {
        p *= a - i as f64;
    }
    p
}

/// t^e for real e, exact for integer exponents (negative t allowed there).
pub(crate) fn pow_real(t: f64, e: f64) -> f64 {
    if e == 0.0 {
        return 1.0;
    }
    if e.fract() == 0.0 && e.abs() < 2147483647.0 {
        t.powi(e as i32)
    } else {
        t.powf(e)
    }
}

/// Derivatives of e^{-1/t} up to `max`: (e^{-1/t})^{(m)} = P_m(1/t) e^{-1/t}
/// with P_{m+1}(u) = u^2 (P_m(u) - P_m'(u)).  Flushed to exactly 0 once the
/// true value underflows the double range.
pub(crate) fn exp_inv_derivs(t: f64, max: usize) -> Vec<f64> {
    let u = 1.0 / t;
    if u > 700.0 {
        return vec![0.0; max + 1];
    }
    let e = (-u).exp();
    // polynomial coefficients of P_m in u, ascending
    let mut p = vec![1.0f64];
    let mut out = Vec::with_capacity(max + 1);
    for _ in 0..=max {
        let val: f64 = p.iter().rev().fold(0.0, |acc, &c| acc * u + c);
        out.push(val * e);
        // next: u^2 * (P - P')
        let mut q = vec![0.0; p.len() + 2];
        for (k, &c) in p.iter().enumerate() {
            q[k + 2] += c;
            if k >= 1 {
                q[k + 1] -= k as f64 * c;
            }
        }
        p = q;
    }
    out
}

/// Partial Bell polynomials B_{n,k}(g_1, ..., g_{n-k+1}).
fn bell_table(g: &[f64], n: usize) -> Vec<Vec<f64>> {
    let mut binom = vec![vec![0.0f64; n + 1]; n + 1];
    for i in 0..=n {
        binom[i][0] = 1.0;
        for j in 1..=i {
            binom[i][j] = binom[i - 1][j - 1] + if j <= i - 1 { binom[i - 1][j] } else { 0.0 };
        }
    }
    let mut b = vec![vec![0.0f64; n + 1]; n + 1];
    b[0][0] = 1.0;
    for nn in 1..=n {
        for k in 1..=nn {
            let mut s = 0.0;
            for j in 1..=(nn - k + 1) {
                s += binom[nn - 1][j - 1] * g[j] * b[nn - j][k - 1];
            }
            b[nn][k] = s;
        }
    }
    b
}

/// Faà di Bruno: nth derivative of f∘g from f^{(k)}(g(t)) and g^{(j)}(t).
fn compose_deriv(f_at_g: &[Vec<f64>], g_derivs: &[f64], n: usize) -> Vec<f64> {
    if n == 0 {
        return f_at_g[0].clone();
    }
    let b = bell_table(g_derivs, n);
    let d = f_at_g[0].len();
    let mut out = vec![0.0; d];
    for k in 1..=n {
        let w = b[n][k];
        if w != 0.0 {
            for i in 0..d {
                out[i] += w * f_at_g[k][i];
            }
        }
    }
    out
}

/// Perturbation factor θ(t) for monomial-like curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Perturbation {
    /// θ(t) = c
    Constant { c: f64 },
    /// θ(t) = 1 + c t^p, p > 0
    Power { c: f64, p: f64 },
    /// θ(t) = 1 + c e^{-1/t}
    FlatExp { c: f64 },
}

impl Perturbation {
    pub fn validate(&self) -> Result<()> {
        match self {
            Perturbation::Constant { c } if *c == 0.0 => {
                Err(Error::input("constant perturbation must be nonzero"))
            }
            Perturbation::Power { p, .. } if *p <= 0.0 => {
                Err(Error::input("power perturbation requires p > 0"))
            }
            _ => Ok(()),
        }
    }

    /// Limit θ(0+).
    pub fn at_zero(&self) -> f64 {
        match self {
            Perturbation::Constant { c } => *c,
            Perturbation::Power { .. } | Perturbation::FlatExp { .. } => 1.0,
        }
    }

    fn derivs(&self, t: f64, max: usize) -> Vec<f64> {
        match self {
            Perturbation::Constant { c } => {
                let mut v = vec![0.0; max + 1];
                v[0] = *c;
                v
            }
            Perturbation::Power { c, p } => (0..=max)
                .map(|m| {
                    let f = falling(*p, m);
                    if f == 0.0 {
                        if m == 0 {
                            1.0
                        } else {
                            0.0
                        }
                    } else if m == 0 {
                        1.0 + c * pow_real(t, *p)
                    } else {
                        c * f * pow_real(t, *p - m as f64)
                    }
                })
                .collect(),
            Perturbation::FlatExp { c } => {
                let e = exp_inv_derivs(t, max);
                (0..=max)
                    .map(|m| if m == 0 { 1.0 + c * e[0] } else { c * e[m] })
                    .collect()
            }
        }
    }
}

/// Monomial curve data: γ(t) = (c_1 t^{a_1}, ..., c_d t^{a_d}).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonomialSpec {
    pub exponents: Vec<f64>,
    pub coeffs: Vec<f64>,
}

impl MonomialSpec {
    pub fn new(exponents: Vec<f64>, coeffs: Vec<f64>) -> Result<Self> {
        if exponents.len() != coeffs.len() || exponents.len() < 2 {
            return Err(Error::input("need matching exponents/coeffs, d >= 2"));
        }
        for w in exponents.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::input("exponents must be strictly increasing"));
            }
        }
        if exponents.iter().any(|&a| a == 0.0) {
            return Err(Error::input("exponents must be nonzero"));
        }
        if coeffs.iter().any(|&c| c == 0.0) {
            return Err(Error::input("coefficients must be nonzero"));
        }
        Ok(MonomialSpec { exponents, coeffs })
    }

    /// A = Σ a_i.
    pub fn exponent_sum(&self) -> f64 {
        self.exponents.iter().sum()
    }

    /// w(a) = Π|a_i c_i|^{2/(d(d+1))} Π_{i<j} (a_j - a_i)^{2/(d(d+1))},
    /// the constant in front of the affine arclength.
    pub fn arclength_constant(&self) -> f64 {
        self.torsion_constant().abs().powf(self.pow_2dd1())
    }

    /// Π a_i c_i Π_{i<j}(a_j - a_i): the constant in |L_Γ| ~ c e^{-At}.
    pub fn torsion_constant(&self) -> f64 {
        let d = self.exponents.len();
        let mut c = 1.0;
        for i in 0..d {
            c *= self.exponents[i] * self.coeffs[i];
        }
        for i in 0..d {
            for j in (i + 1)..d {
                c *= self.exponents[j] - self.exponents[i];
            }
        }
        c
    }

    fn pow_2dd1(&self) -> f64 {
        let d = self.exponents.len() as f64;
        2.0 / (d * (d + 1.0))
    }
}

/// Named built-in curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuiltinName {
    /// γ¹(t) = (t, sin(t^{-k}) e^{-t^{-2}})
    Sjolin { k: u32 },
    /// γ²(t) = ((1+e^{-t}) cos t, (1+e^{-t}) sin t)
    SlowSpiral,
    /// γ³(t) = (t, sin t, cos t)
    Helix,
    /// (t, e^{-1/t})
    FlatExp,
    /// (e^{-1/t}, t e^{-1/t})
    FlatExpPair,
}

impl BuiltinName {
    pub fn dim(&self) -> usize {
        match self {
            BuiltinName::Helix => 3,
            _ => 2,
        }
    }
}

/// Reparametrization map φ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReparamMap {
    /// φ(t) = t^k, k ≠ 0; requires the inner domain inside (0, ∞)
    Power(f64),
    /// φ(t) = e^{-t}
    Exponential,
    /// φ(t) = a t + b, a ≠ 0
    Affine(f64, f64),
}

impl ReparamMap {
    /// Value of the reparametrization map at `t`.
    pub fn apply(&self, t: f64) -> f64 {
        match self {
            ReparamMap::Power(k) => pow_real(t, *k),
            ReparamMap::Exponential => (-t).exp(),
            ReparamMap::Affine(a, b) => a * t + b,
        }
    }

    fn derivs(&self, t: f64, max: usize) -> Vec<f64> {
        match self {
            ReparamMap::Power(k) => (0..=max)
                .map(|m| {
                    let f = falling(*k, m);
                    if f == 0.0 {
                        0.0
                    } else {
                        f * pow_real(t, *k - m as f64)
                    }
                })
                .collect(),
            ReparamMap::Exponential => {
                let e = (-t).exp();
                (0..=max)
                    .map(|m| if m % 2 == 0 { e } else { -e })
                    .collect()
            }
            ReparamMap::Affine(a, b) => {
                let mut v = vec![0.0; max + 1];
                v[0] = a * t + b;
                if max >= 1 {
                    v[1] = *a;
                }
                v
            }
        }
    }

    /// Preimage of (lo, hi), oriented increasing.
    fn preimage(&self, lo: f64, hi: f64) -> Result<Interval> {
        match self {
            ReparamMap::Power(k) => {
                if *k == 0.0 {
                    return Err(Error::input("power map requires k != 0"));
                }
                if lo < 0.0 {
                    return Err(Error::input("power map requires domain in (0, inf)"));
                }
                let inv = 1.0 / k;
                let (a, b) = if *k > 0.0 {
                    (lo.powf(inv), hi.powf(inv))
                } else {
                    let a = if hi.is_infinite() { 0.0 } else { hi.powf(inv) };
                    let b = if lo == 0.0 { f64::INFINITY } else { lo.powf(inv) };
                    (a, b)
                };
                Interval::new(a, b)
            }
            ReparamMap::Exponential => {
                if lo < 0.0 {
                    return Err(Error::input("exponential map requires domain in (0, inf)"));
                }
                let a = if hi.is_infinite() {
                    f64::NEG_INFINITY
                } else {
                    -hi.ln()
                };
                let b = if lo == 0.0 { f64::INFINITY } else { -lo.ln() };
                Interval::new(a, b)
            }
            ReparamMap::Affine(a, b) => {
                if *a == 0.0 {
                    return Err(Error::input("affine map requires a != 0"));
                }
                let (x, y) = ((lo - b) / a, (hi - b) / a);
                Interval::new(x.min(y), x.max(y))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CurveKind {
    Monomial(MonomialSpec),
    /// Row i holds the coefficients of γ_i, ascending degree.
    Polynomial(Vec<Vec<f64>>),
    MonomialLike {
        exponents: Vec<f64>,
        perturbations: Vec<Perturbation>,
    },
    Builtin(BuiltinName),
    Reparam {
        map: ReparamMap,
        inner: Box<Curve>,
    },
    AffineImage {
        matrix: Vec<Vec<f64>>,
        shift: Vec<f64>,
        inner: Box<Curve>,
    },
}

/// An immutable curve γ: I → R^d with derivative evaluation to order d.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    dim: usize,
    domain: Interval,
    kind: CurveKind,
}

impl Curve {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn kind(&self) -> &CurveKind {
        &self.kind
    }

    pub fn monomial(exponents: Vec<f64>, coeffs: Vec<f64>, lo: f64, hi: f64) -> Result<Curve> {
        let spec = MonomialSpec::new(exponents, coeffs)?;
        Ok(Curve {
            dim: spec.exponents.len(),
            domain: Interval::new(lo, hi)?,
            kind: CurveKind::Monomial(spec),
        })
    }

    /// Monomial with unit coefficients.
    pub fn monomial_unit(exponents: &[f64], lo: f64, hi: f64) -> Result<Curve> {
        Curve::monomial(exponents.to_vec(), vec![1.0; exponents.len()], lo, hi)
    }

    pub fn polynomial(coeff_matrix: Vec<Vec<f64>>, lo: f64, hi: f64) -> Result<Curve> {
        let d = coeff_matrix.len();
        if d < 2 {
            return Err(Error::input("polynomial curve needs d >= 2 components"));
        }
        if coeff_matrix.iter().any(|row| row.is_empty()) {
            return Err(Error::input("empty coefficient row"));
        }
        Ok(Curve {
            dim: d,
            domain: Interval::new(lo, hi)?,
            kind: CurveKind::Polynomial(coeff_matrix),
        })
    }

    /// The moment curve (t, t², ..., t^d).
    pub fn moment(d: usize, lo: f64, hi: f64) -> Result<Curve> {
        let rows = (1..=d)
            .map(|i| {
                let mut row = vec![0.0; i + 1];
                row[i] = 1.0;
                row
            })
            .collect();
        Curve::polynomial(rows, lo, hi)
    }

    pub fn monomial_like(
        exponents: Vec<f64>,
        perturbations: Vec<Perturbation>,
        t_max: f64,
    ) -> Result<Curve> {
        let spec = MonomialSpec::new(exponents.clone(), vec![1.0; exponents.len()])?;
        if perturbations.len() != exponents.len() {
            return Err(Error::input("one perturbation per component required"));
        }
        for p in &perturbations {
            p.validate()?;
        }
        Ok(Curve {
            dim: spec.exponents.len(),
            domain: Interval::new(0.0, t_max)?,
            kind: CurveKind::MonomialLike {
                exponents,
                perturbations,
            },
        })
    }

    pub fn builtin(name: BuiltinName, lo: f64, hi: f64) -> Result<Curve> {
        if let BuiltinName::Sjolin { k } = name {
            if k == 0 {
                return Err(Error::input("sjolin parameter k must be a positive integer"));
            }
        }
        Ok(Curve {
            dim: name.dim(),
            domain: Interval::new(lo, hi)?,
            kind: CurveKind::Builtin(name),
        })
    }

    /// γ∘φ with domain φ^{-1}(I), oriented increasing.
    pub fn reparametrize(&self, map: ReparamMap) -> Result<Curve> {
        if matches!(map, ReparamMap::Power(_) | ReparamMap::Exponential) && self.domain.lo < 0.0 {
            return Err(Error::input(
                "power/exponential reparametrization requires a domain in (0, inf)",
            ));
        }
        let domain = map.preimage(self.domain.lo, self.domain.hi)?;
        Ok(Curve {
            dim: self.dim,
            domain,
            kind: CurveKind::Reparam {
                map,
                inner: Box::new(self.clone()),
            },
        })
    }

    /// Aγ + b for invertible A.
    pub fn affine_image(&self, matrix: Vec<Vec<f64>>, shift: Vec<f64>) -> Result<Curve> {
        let d = self.dim;
        if matrix.len() != d || matrix.iter().any(|r| r.len() != d) || shift.len() != d {
            return Err(Error::input("matrix/shift dimension mismatch"));
        }
        let m = nalgebra::DMatrix::from_fn(d, d, |i, j| matrix[i][j]);
        if m.determinant().abs() < 1e-300 {
            return Err(Error::SingularMatrix);
        }
        Ok(Curve {
            dim: d,
            domain: self.domain,
            kind: CurveKind::AffineImage {
                matrix,
                shift,
                inner: Box::new(self.clone()),
            },
        })
    }

    /// γ^{(order)}(t).
    pub fn eval(&self, t: f64, order: usize) -> Result<Vec<f64>> {
        if order > self.dim {
            return Err(Error::UnsupportedOrder {
                order,
                max: self.dim,
            });
        }
        if !self.domain.contains(t) {
            return Err(Error::Domain {
                t,
                lo: self.domain.lo,
                hi: self.domain.hi,
            });
        }
        Ok(self.eval_raw(t, order))
    }

    /// All derivatives 0..=max at once (max ≤ d).
    pub fn eval_all(&self, t: f64, max: usize) -> Result<Vec<Vec<f64>>> {
        if max > self.dim {
            return Err(Error::UnsupportedOrder {
                order: max,
                max: self.dim,
            });
        }
        if !self.domain.contains(t) {
            return Err(Error::Domain {
                t,
                lo: self.domain.lo,
                hi: self.domain.hi,
            });
        }
        Ok((0..=max).map(|m| self.eval_raw(t, m)).collect())
    }

    fn eval_raw(&self, t: f64, order: usize) -> Vec<f64> {
        match &self.kind {
            CurveKind::Monomial(spec) => spec
                .exponents
                .iter()
                .zip(&spec.coeffs)
                .map(|(&a, &c)| {
                    let f = falling(a, order);
                    if f == 0.0 {
                        0.0
                    } else {
                        c * f * pow_real(t, a - order as f64)
                    }
                })
                .collect(),
            CurveKind::Polynomial(rows) => rows
                .iter()
                .map(|row| {
                    // order-th derivative of Σ c_k t^k, Horner on the shifted coeffs
                    let mut v = 0.0;
                    for k in (order..row.len()).rev() {
                        v = v * t + row[k] * falling(k as f64, order);
                    }
                    v
                })
                .collect(),
            CurveKind::MonomialLike {
                exponents,
                perturbations,
            } => {
                // Leibniz over t^{a_i} θ_i(t)
                let binom = binom_row(order);
                exponents
                    .iter()
                    .zip(perturbations)
                    .map(|(&a, pert)| {
                        let th = pert.derivs(t, order);
                        let mut s = 0.0;
                        for j in 0..=order {
                            let f = falling(a, j);
                            if f == 0.0 && j > 0 {
                                continue;
                            }
                            let mono = if j == 0 {
                                pow_real(t, a)
                            } else {
                                f * pow_real(t, a - j as f64)
                            };
                            s += binom[j] * mono * th[order - j];
                        }
                        s
                    })
                    .collect()
            }
            CurveKind::Builtin(name) => builtin_eval(*name, t, order),
            CurveKind::Reparam { map, inner } => {
                let g = map.derivs(t, order.max(1));
                let f_at_g: Vec<Vec<f64>> = (0..=order).map(|m| inner.eval_raw(g[0], m)).collect();
                compose_deriv(&f_at_g, &g, order)
            }
            CurveKind::AffineImage {
                matrix,
                shift,
                inner,
            } => {
                let v = inner.eval_raw(t, order);
                let d = self.dim;
                (0..d)
                    .map(|i| {
                        let mut s: f64 = (0..d).map(|j| matrix[i][j] * v[j]).sum();
                        if order == 0 {
                            s += shift[i];
                        }
                        s
                    })
                    .collect()
            }
        }
    }

    /// The monomial data of this curve or its exponential-reparametrized
    /// inner curve, if any: (exponents, limits θ_i(0), coefficient scale).
    pub fn monomial_profile(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match &self.kind {
            CurveKind::Monomial(spec) => Some((spec.exponents.clone(), spec.coeffs.clone())),
            CurveKind::MonomialLike {
                exponents,
                perturbations,
            } => Some((
                exponents.clone(),
                perturbations.iter().map(|p| p.at_zero()).collect(),
            )),
            _ => None,
        }
    }

    /// For Reparam(Exponential) curves: the inner curve.
    pub fn exponential_inner(&self) -> Option<&Curve> {
        match &self.kind {
            CurveKind::Reparam {
                map: ReparamMap::Exponential,
                inner,
            } => Some(inner),
            _ => None,
        }
    }
}

fn binom_row(n: usize) -> Vec<f64> {
    let mut row = vec![1.0];
    for k in 1..=n {
        let prev = row[k - 1];
        row.push(prev * (n - k + 1) as f64 / k as f64);
    }
    row
}

fn builtin_eval(name: BuiltinName, t: f64, order: usize) -> Vec<f64> {
    match name {
        BuiltinName::Helix => {
            let first = match order {
                0 => t,
                1 => 1.0,
                _ => 0.0,
            };
            let half_pi = std::f64::consts::FRAC_PI_2;
            vec![
                first,
                (t + order as f64 * half_pi).sin(),
                (t + order as f64 * half_pi).cos(),
            ]
        }
        BuiltinName::SlowSpiral => {
            // (1+e^{-t}) e^{it} in complex form: e^{it} + e^{(-1+i)t}
            let i = Complex64::new(0.0, 1.0);
            let z = i.powu(order as u32) * (i * t).exp()
                + Complex64::new(-1.0, 1.0).powu(order as u32) * (Complex64::new(-1.0, 1.0) * t).exp();
            vec![z.re, z.im]
        }
        BuiltinName::FlatExp => {
            let e = exp_inv_derivs(t, order);
            let first = match order {
                0 => t,
                1 => 1.0,
                _ => 0.0,
            };
            vec![first, e[order]]
        }
        BuiltinName::FlatExpPair => {
            let e = exp_inv_derivs(t, order);
            let second = if order == 0 {
                t * e[0]
            } else {
                t * e[order] + order as f64 * e[order - 1]
            };
            vec![e[order], second]
        }
        BuiltinName::Sjolin { k } => {
            let first = match order {
                0 => t,
                1 => 1.0,
                _ => 0.0,
            };
            vec![first, sjolin_component(k, t, order)]
        }
    }
}

/// Derivatives of sin(t^{-k}) e^{-t^{-2}} for orders 0..=2.
fn sjolin_component(k: u32, t: f64, order: usize) -> f64 {
    let v = t.powi(-2);
    if v > 600.0 {
        return 0.0;
    }
    let kf = k as f64;
    let u = t.powi(-(k as i32));
    let e = (-v).exp();
    let (su, cu) = u.sin_cos();
    let up = -kf * pow_real(t, -kf - 1.0);
    let vp = -2.0 * t.powi(-3);
    match order {
        0 => su * e,
        1 => e * (cu * up - su * vp),
        2 => {
            let upp = kf * (kf + 1.0) * pow_real(t, -kf - 2.0);
            let vpp = 6.0 * t.powi(-4);
            e * (-vp * (cu * up - su * vp) - su * up * up + cu * upp
                - cu * up * vp
                - su * vpp)
        }
        _ => panic!("sjolin curve supports derivatives up to order 2"),
    }
}
