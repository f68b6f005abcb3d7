//! Finite unions of axis-parallel boxes with exact measure and exact
//! translate-intersection volumes.
//!
//! Sets are stored canonically as pairwise-disjoint boxes, so measures are
//! plain sums of box volumes and intersections reduce to per-axis interval
//! overlaps.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// One axis-parallel box: per-axis [lo, hi].
pub type Box_ = Vec<[f64; 2]>;

fn box_volume(b: &Box_) -> f64 {
    b.iter().map(|[lo, hi]| hi - lo).product()
}

/// Pieces of `b` not covered by `cutter` (disjoint, exact).
fn subtract(b: &Box_, cutter: &Box_) -> Vec<Box_> {
    // no overlap -> b survives whole
    for (s, c) in b.iter().zip(cutter) {
        if c[0] >= s[1] || c[1] <= s[0] {
            return vec![b.clone()];
        }
    }
    let mut pieces = Vec::new();
    let mut core = b.clone();
    for axis in 0..b.len() {
        let [lo, hi] = core[axis];
        let clo = cutter[axis][0].max(lo);
        let chi = cutter[axis][1].min(hi);
        if clo > lo {
            let mut p = core.clone();
            p[axis] = [lo, clo];
            pieces.push(p);
        }
        if chi < hi {
            let mut p = core.clone();
            p[axis] = [chi, hi];
            pieces.push(p);
        }
        core[axis] = [clo, chi];
    }
    pieces
}

/// A finite union of boxes in R^dim, kept pairwise disjoint.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RawIndicatorSet")]
pub struct IndicatorSet {
    pub dim: usize,
    pub boxes: Vec<Box_>,
}

#[derive(Deserialize)]
struct RawIndicatorSet {
    dim: usize,
    boxes: Vec<Box_>,
}

impl TryFrom<RawIndicatorSet> for IndicatorSet {
    type Error = Error;
    fn try_from(raw: RawIndicatorSet) -> Result<IndicatorSet> {
        IndicatorSet::new(raw.dim, raw.boxes)
    }
}

impl IndicatorSet {
    /// Build from arbitrary (possibly overlapping) boxes; the stored
    /// decomposition is disjoint and covers exactly the union.
    pub fn new(dim: usize, boxes: Vec<Box_>) -> Result<IndicatorSet> {
        if dim == 0 {
            return Err(Error::input("set dimension must be positive"));
        }
        let mut canon: Vec<Box_> = Vec::new();
        for (bi, b) in boxes.into_iter().enumerate() {
            if b.len() != dim {
                return Err(Error::Config {
                    field: format!("/boxes/{bi}"),
                    message: format!("box has {} axes, set dimension is {dim}", b.len()),
                });
            }
            for (ai, [lo, hi]) in b.iter().enumerate() {
                if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                    return Err(Error::Config {
                        field: format!("/boxes/{bi}/{ai}"),
                        message: format!("invalid interval [{lo}, {hi}]"),
                    });
                }
            }
            // clip the new box against everything already placed
            let mut pending = vec![b];
            for existing in &canon {
                let mut next = Vec::new();
                for p in &pending {
                    next.extend(subtract(p, existing));
                }
                pending = next;
                if pending.is_empty() {
                    break;
                }
            }
            canon.extend(pending);
        }
        Ok(IndicatorSet { dim, boxes: canon })
    }

    pub fn measure(&self) -> f64 {
        self.boxes.iter().map(box_volume).sum()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        self.boxes.iter().any(|b| {
            b.iter()
                .zip(p)
                .all(|([lo, hi], x)| *lo <= *x && *x < *hi)
        })
    }

    /// Smallest box containing the set, or None when empty.
    pub fn bounding_box(&self) -> Option<Box_> {
        if self.boxes.is_empty() {
            return None;
        }
        let mut bb = self.boxes[0].clone();
        for b in &self.boxes[1..] {
            for (acc, [lo, hi]) in bb.iter_mut().zip(b) {
                acc[0] = acc[0].min(*lo);
                acc[1] = acc[1].max(*hi);
            }
        }
        Some(bb)
    }

    /// Exact volume of (self + v) ∩ other.
    pub fn translate_intersection_volume(&self, v: &[f64], other: &IndicatorSet) -> Result<f64> {
        if v.len() != self.dim || other.dim != self.dim {
            return Err(Error::Arity {
                expected: self.dim,
                got: if v.len() != self.dim { v.len() } else { other.dim },
            });
        }
        let mut total = 0.0;
        for a in &self.boxes {
            for b in &other.boxes {
                let mut vol = 1.0;
                for i in 0..self.dim {
                    let lo = (a[i][0] + v[i]).max(b[i][0]);
                    let hi = (a[i][1] + v[i]).min(b[i][1]);
                    if hi <= lo {
                        vol = 0.0;
                        break;
                    }
                    vol *= hi - lo;
                }
                total += vol;
            }
        }
        Ok(total)
    }

    /// Repeated-query helper for translate-intersection volumes against
    /// `other`; prunes box pairs via the first axis.
    pub fn translate_volume_query<'a>(&'a self, other: &'a IndicatorSet) -> TranslateVolume<'a> {
        let mut order: Vec<usize> = (0..other.boxes.len()).collect();
        order.sort_by(|&a, &b| {
            other.boxes[a][0][0]
                .partial_cmp(&other.boxes[b][0][0])
                .unwrap()
        });
        let max_w0 = other
            .boxes
            .iter()
            .map(|b| b[0][1] - b[0][0])
            .fold(0.0f64, f64::max);
        TranslateVolume {
            e: self,
            f: other,
            order,
            max_w0,
        }
    }

    /// Exact 1D measure of {s : s ∈ I, x + s·dir ∈ self} for the segment
    /// parameter interval I = [s_lo, s_hi]; used for line integrals.
    pub fn line_segment_measure(&self, x: &[f64], dir: &[f64], s_lo: f64, s_hi: f64) -> f64 {
        let mut total = 0.0;
        for b in &self.boxes {
            let mut lo = s_lo;
            let mut hi = s_hi;
            let mut ok = true;
            for i in 0..self.dim {
                if dir[i] == 0.0 {
                    if x[i] < b[i][0] || x[i] >= b[i][1] {
                        ok = false;
                        break;
                    }
                } else {
                    let mut a = (b[i][0] - x[i]) / dir[i];
                    let mut c = (b[i][1] - x[i]) / dir[i];
                    if a > c {
                        std::mem::swap(&mut a, &mut c);
                    }
                    lo = lo.max(a);
                    hi = hi.min(c);
                    if hi <= lo {
                        ok = false;
                        break;
                    }
                }
            }
            if ok && hi > lo {
                total += hi - lo;
            }
        }
        total
    }
}

/// See [`IndicatorSet::translate_volume_query`].
pub struct TranslateVolume<'a> {
    e: &'a IndicatorSet,
    f: &'a IndicatorSet,
    /// indices of f's boxes sorted by first-axis lower edge
    order: Vec<usize>,
    max_w0: f64,
}

impl TranslateVolume<'_> {
    /// vol((E + v) ∩ F), identical to `translate_intersection_volume`.
    pub fn volume(&self, v: &[f64]) -> f64 {
        let dim = self.e.dim;
        let mut total = 0.0;
        for a in &self.e.boxes {
            let lo0 = a[0][0] + v[0];
            let hi0 = a[0][1] + v[0];
            // f-boxes overlapping on axis 0 have lo0 in [lo0 − max_w0, hi0)
            let start = self
                .order
                .partition_point(|&i| self.f.boxes[i][0][0] < lo0 - self.max_w0);
            for &fi in &self.order[start..] {
                let b = &self.f.boxes[fi];
                if b[0][0] >= hi0 {
                    break;
                }
                if b[0][1] <= lo0 {
                    continue;
                }
                let mut vol = (hi0.min(b[0][1]) - lo0.max(b[0][0])).max(0.0);
                for i in 1..dim {
                    let lo = (a[i][0] + v[i]).max(b[i][0]);
                    let hi = (a[i][1] + v[i]).min(b[i][1]);
                    if hi <= lo {
                        vol = 0.0;
                        break;
                    }
                    vol *= hi - lo;
                }
                total += vol;
            }
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disjoint_boxes_add() {
        let e = IndicatorSet::new(
            2,
            vec![
                vec![[0.0, 1.0], [0.0, 1.0]],
                vec![[2.0, 3.0], [0.0, 1.0]],
            ],
        )
        .unwrap();
        assert!((e.measure() - 2.0).abs() < 1e-15);
        assert_eq!(e.boxes.len(), 2);
    }

    #[test]
    fn duplicate_box_idempotent() {
        let e = IndicatorSet::new(
            2,
            vec![
                vec![[0.0, 1.0], [0.0, 1.0]],
                vec![[0.0, 1.0], [0.0, 1.0]],
            ],
        )
        .unwrap();
        assert!((e.measure() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn half_overlap() {
        let e = IndicatorSet::new(
            2,
            vec![
                vec![[0.0, 1.0], [0.0, 1.0]],
                vec![[0.5, 1.5], [0.0, 1.0]],
            ],
        )
        .unwrap();
        assert!((e.measure() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn invalid_interval_flagged_with_path() {
        let err = IndicatorSet::new(2, vec![vec![[0.0, 1.0], [1.0, 0.5]]]).unwrap_err();
        match err {
            Error::Config { field, .. } => assert_eq!(field, "/boxes/0/1"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn translate_intersection_exact() {
        let e = IndicatorSet::new(2, vec![vec![[0.0, 1.0], [0.0, 1.0]]]).unwrap();
        let f = IndicatorSet::new(2, vec![vec![[0.0, 1.0], [0.0, 1.0]]]).unwrap();
        // shift by (0.25, 0.5): overlap 0.75 × 0.5
        let v = e.translate_intersection_volume(&[0.25, 0.5], &f).unwrap();
        assert!((v - 0.375).abs() < 1e-15);
        // far shift: empty
        let v = e.translate_intersection_volume(&[5.0, 0.0], &f).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn translate_intersection_with_union() {
        let e = IndicatorSet::new(1, vec![vec![[0.0, 1.0]], vec![[2.0, 3.0]]]).unwrap();
        let f = IndicatorSet::new(1, vec![vec![[0.5, 2.5]]]).unwrap();
        // e + 0 meets f in [0.5,1] ∪ [2,2.5]
        let v = e.translate_intersection_volume(&[0.0], &f).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn monte_carlo_cross_check() {
        use rand::{Rng, SeedableRng};
        let e = IndicatorSet::new(
            2,
            vec![
                vec![[0.0, 2.0], [0.0, 1.0]],
                vec![[1.0, 3.0], [0.5, 2.0]],
                vec![[-1.0, 0.5], [-0.5, 0.7]],
            ],
        )
        .unwrap();
        let exact = e.measure();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut hits = 0usize;
        let n = 200_000;
        for _ in 0..n {
            let p = [rng.gen_range(-1.0..3.0), rng.gen_range(-0.5..2.0)];
            if e.contains(&p) {
                hits += 1;
            }
        }
        let est = hits as f64 / n as f64 * 4.0 * 2.5;
        assert!((est - exact).abs() < 0.05 * exact, "{est} vs {exact}");
    }

    #[test]
    fn line_segment_measure_box() {
        let e = IndicatorSet::new(2, vec![vec![[0.0, 1.0], [0.0, 1.0]]]).unwrap();
        // diagonal line from (-1,-1) direction (1,1): inside for s in (1,2)
        let m = e.line_segment_measure(&[-1.0, -1.0], &[1.0, 1.0], -10.0, 10.0);
        assert!((m - 1.0).abs() < 1e-14);
        // axis-parallel with a frozen coordinate inside
        let m = e.line_segment_measure(&[0.5, 0.5], &[1.0, 0.0], -10.0, 10.0);
        assert!((m - 1.0).abs() < 1e-14);
        // frozen coordinate outside
        let m = e.line_segment_measure(&[0.5, 2.0], &[1.0, 0.0], -10.0, 10.0);
        assert_eq!(m, 0.0);
    }

    #[test]
    fn translate_query_matches_direct() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let mk = |rng: &mut rand_chacha::ChaCha8Rng| {
                let boxes: Vec<Box_> = (0..rng.gen_range(1..6))
                    .map(|_| {
                        (0..2)
                            .map(|_| {
                                let lo = rng.gen_range(-2.0..2.0);
                                [lo, lo + rng.gen_range(0.1..1.5)]
                            })
                            .collect()
                    })
                    .collect();
                IndicatorSet::new(2, boxes).unwrap()
            };
            let e = mk(&mut rng);
            let f = mk(&mut rng);
            let q = e.translate_volume_query(&f);
            for _ in 0..20 {
                let v = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
                let direct = e.translate_intersection_volume(&v, &f).unwrap();
                assert!((q.volume(&v) - direct).abs() <= 1e-12 * direct.max(1.0));
            }
        }
    }

    #[test]
    fn serde_round_trip() {
        let e = IndicatorSet::new(
            2,
            vec![
                vec![[0.0, 1.0], [0.0, 1.0]],
                vec![[0.5, 1.5], [0.0, 1.0]],
            ],
        )
        .unwrap();
        let s = serde_json::to_string(&e).unwrap();
        let back: IndicatorSet = serde_json::from_str(&s).unwrap();
        assert!((back.measure() - e.measure()).abs() < 1e-15);
        // overlapping input through serde is canonicalized too
        let raw = r#"{"dim":1,"boxes":[[[0.0,1.0]],[[0.5,2.0]]]}"#;
        let set: IndicatorSet = serde_json::from_str(raw).unwrap();
        assert!((set.measure() - 2.0).abs() < 1e-15);
    }
}
