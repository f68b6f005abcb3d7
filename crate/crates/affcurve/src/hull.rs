//! Exact convex hull measures for point clouds in 2D and 3D.

use crate::error::{Error, Result};

/// Area of the convex hull of 2D points (monotone chain + shoelace).
pub fn hull_area_2d(points: &[[f64; 2]]) -> f64 {
    let mut pts: Vec<[f64; 2]> = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    if pts.len() < 3 {
        return 0.0;
    }
    let cross = |o: &[f64; 2], a: &[f64; 2], b: &[f64; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut lower: Vec<[f64; 2]> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], &p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::with_capacity(pts.len());
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], &p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    let mut hull = lower;
    hull.extend(upper);
    if hull.len() < 3 {
        return 0.0;
    }
    let mut area2 = 0.0;
    for i in 0..hull.len() {
        let a = hull[i];
        let b = hull[(i + 1) % hull.len()];
        area2 += a[0] * b[1] - b[0] * a[1];
    }
    0.5 * area2.abs()
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[derive(Clone)]
struct Face {
    v: [usize; 3],
    normal: [f64; 3], // outward, not normalized
    offset: f64,      // normal · x = offset on the face plane
}

impl Face {
    fn new(pts: &[[f64; 3]], a: usize, b: usize, c: usize, interior: [f64; 3]) -> Face {
        let mut v = [a, b, c];
        let mut normal = cross3(sub(pts[b], pts[a]), sub(pts[c], pts[a]));
        let mut offset = dot(normal, pts[a]);
        if dot(normal, interior) > offset {
            v.swap(1, 2);
            normal = [-normal[0], -normal[1], -normal[2]];
            offset = -offset;
        }
        Face { v, normal, offset }
    }

    fn sees(&self, p: [f64; 3], eps: f64) -> bool {
        dot(self.normal, p) - self.offset > eps
    }
}

/// Volume of the convex hull of 3D points (incremental construction).
/// Returns 0 for degenerate (coplanar) inputs.
pub fn hull_volume_3d(points: &[[f64; 3]]) -> f64 {
    let pts: Vec<[f64; 3]> = points.to_vec();
    let n = pts.len();
    if n < 4 {
        return 0.0;
    }
    let scale = pts
        .iter()
        .flat_map(|p| p.iter())
        .fold(0.0f64, |m, &x| m.max(x.abs()))
        .max(1.0);
    let eps = 1e-12 * scale * scale;

    // initial tetrahedron: extreme pair, farthest from line, farthest from plane
    let mut i0 = 0;
    let mut i1 = 0;
    let mut best = -1.0;
    for a in 0..n {
        for b in (a + 1)..n {
            let d = dot(sub(pts[a], pts[b]), sub(pts[a], pts[b]));
            if d > best {
                best = d;
                i0 = a;
                i1 = b;
            }
        }
    }
    if best <= eps * eps {
        return 0.0;
    }
    let dir = sub(pts[i1], pts[i0]);
    let mut i2 = 0;
    best = -1.0;
    for c in 0..n {
        let d = cross3(dir, sub(pts[c], pts[i0]));
        let d2 = dot(d, d);
        if d2 > best {
            best = d2;
            i2 = c;
        }
    }
    if best <= eps * eps {
        return 0.0;
    }
    let nrm = cross3(dir, sub(pts[i2], pts[i0]));
    let mut i3 = 0;
    best = -1.0;
    for c in 0..n {
        let d = dot(nrm, sub(pts[c], pts[i0])).abs();
        if d > best {
            best = d;
            i3 = c;
        }
    }
    if best <= eps {
        return 0.0;
    }
    let interior = [
        (pts[i0][0] + pts[i1][0] + pts[i2][0] + pts[i3][0]) / 4.0,
        (pts[i0][1] + pts[i1][1] + pts[i2][1] + pts[i3][1]) / 4.0,
        (pts[i0][2] + pts[i1][2] + pts[i2][2] + pts[i3][2]) / 4.0,
    ];
    let mut faces = vec![
        Face::new(&pts, i0, i1, i2, interior),
        Face::new(&pts, i0, i1, i3, interior),
        Face::new(&pts, i0, i2, i3, interior),
        Face::new(&pts, i1, i2, i3, interior),
    ];

    for p in 0..n {
        if p == i0 || p == i1 || p == i2 || p == i3 {
            continue;
        }
        let visible: Vec<usize> = (0..faces.len())
            .filter(|&f| faces[f].sees(pts[p], eps))
            .collect();
        if visible.is_empty() {
            continue;
        }
        // horizon = edges of visible faces shared with an invisible face
        use std::collections::HashMap;
        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        for &f in &visible {
            let v = faces[f].v;
            for e in [(v[0], v[1]), (v[1], v[2]), (v[2], v[0])] {
                let key = (e.0.min(e.1), e.0.max(e.1));
                *edge_count.entry(key).or_insert(0) += 1;
            }
        }
        let horizon: Vec<(usize, usize)> = edge_count
            .into_iter()
            .filter(|&(_, c)| c == 1)
            .map(|(e, _)| e)
            .collect();
        let mut keep: Vec<Face> = (0..faces.len())
            .filter(|f| !visible.contains(f))
            .map(|f| faces[f].clone())
            .collect();
        for (a, b) in horizon {
            keep.push(Face::new(&pts, a, b, p, interior));
        }
        faces = keep;
    }

    let mut vol6 = 0.0;
    for f in &faces {
        let (a, b, c) = (pts[f.v[0]], pts[f.v[1]], pts[f.v[2]]);
        vol6 += dot(a, cross3(b, c));
    }
    vol6.abs() / 6.0
}

/// Hull measure dispatch for d ∈ {2, 3}.
pub fn hull_measure(dim: usize, points: &[Vec<f64>]) -> Result<f64> {
    match dim {
        2 => Ok(hull_area_2d(
            &points.iter().map(|p| [p[0], p[1]]).collect::<Vec<_>>(),
        )),
        3 => Ok(hull_volume_3d(
            &points.iter().map(|p| [p[0], p[1], p[2]]).collect::<Vec<_>>(),
        )),
        _ => Err(Error::Range(format!(
            "hull measure only supported for d = 2 or 3, got {dim}"
        ))),
    }
}
