//! Convex polyhedra clipped by half-spaces.
//!
//! Each vertex carries the labels of the three planes meeting at it and each
//! face the label of its plane, so clipped cells can be glued into a global
//! face lattice by label sets. Generator planes use the generator id as label
//! and the six window planes use negative labels.

use std::collections::HashMap;

use super::{GeometryError, MarkedPoint, Vec3, Window, DEGENERACY_TOL};

/// Label of the window plane `axis = lo` (`upper = false`) or `axis = hi`.
pub fn box_label(axis: usize, upper: bool) -> i64 {
    -(1 + 2 * axis as i64 + upper as i64)
}

#[derive(Debug, Clone)]
pub struct PolyVertex {
    pub pos: Vec3,
    /// Sorted labels of the three planes through the vertex.
    pub labels: [i64; 3],
}

#[derive(Debug, Clone)]
pub struct PolyFace {
    pub label: i64,
    /// Vertex indices, counter-clockwise seen from outside.
    pub cycle: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct ConvexCell {
    pub verts: Vec<PolyVertex>,
    pub faces: Vec<PolyFace>,
}

impl ConvexCell {
    /// Axis-aligned box `[lo, hi]`.
    pub fn cube(lo: Vec3, hi: Vec3) -> Self {
        let corner = |b: usize| {
            Vec3::new(
                if b & 1 == 0 { lo.x } else { hi.x },
                if b & 2 == 0 { lo.y } else { hi.y },
                if b & 4 == 0 { lo.z } else { hi.z },
            )
        };
        let verts: Vec<PolyVertex> = (0..8)
            .map(|b| {
                let mut labels = [
                    box_label(0, b & 1 != 0),
                    box_label(1, b & 2 != 0),
                    box_label(2, b & 4 != 0),
                ];
                labels.sort_unstable();
                PolyVertex {
                    pos: corner(b),
                    labels,
                }
            })
            .collect();
        let mut faces = Vec::new();
        for axis in 0..3 {
            for upper in [false, true] {
                let bit = 1 << axis;
                let mut members: Vec<usize> = (0..8).filter(|&b| (b & bit != 0) == upper).collect();
                let mut normal = Vec3::zeros();
                normal[axis] = if upper { 1.0 } else { -1.0 };
                let pts: Vec<Vec3> = members.iter().map(|&b| corner(b)).collect();
                let order = ccw_order(&pts, &normal);
                members = order.into_iter().map(|k| members[k]).collect();
                faces.push(PolyFace {
                    label: box_label(axis, upper),
                    cycle: members,
                });
            }
        }
        ConvexCell { verts, faces }
    }

    /// Keeps the part with `n . x <= c`. Returns `false` when nothing is left.
    /// A vertex closer to the plane than `tol` is reported as a degeneracy.
    pub fn clip(&mut self, n: &Vec3, c: f64, label: i64, tol: f64) -> Result<bool, GeometryError> {
        let nn = n.norm();
        let s: Vec<f64> = self
            .verts
            .iter()
            .map(|v| (n.dot(&v.pos) - c) / nn)
            .collect();
        if let Some(v) = s.iter().position(|x| x.abs() < tol) {
            return Err(GeometryError::Degenerate(format!(
                "cell vertex {:?} lies on a further bisector plane",
                self.verts[v].pos
            )));
        }
        if s.iter().all(|&x| x < 0.0) {
            return Ok(true);
        }
        if s.iter().all(|&x| x > 0.0) {
            self.verts.clear();
            self.faces.clear();
            return Ok(false);
        }
        let mut verts: Vec<PolyVertex> = Vec::new();
        let mut remap = vec![usize::MAX; self.verts.len()];
        for (i, v) in self.verts.iter().enumerate() {
            if s[i] < 0.0 {
                remap[i] = verts.len();
                verts.push(v.clone());
            }
        }
        let mut on_edge: HashMap<(usize, usize), usize> = HashMap::new();
        let mut cap_next: HashMap<usize, usize> = HashMap::new();
        let mut faces = Vec::with_capacity(self.faces.len() + 1);
        for face in &self.faces {
            let m = face.cycle.len();
            let mut cycle = Vec::with_capacity(m + 1);
            let (mut exit, mut enter) = (None, None);
            for k in 0..m {
                let u = face.cycle[k];
                let v = face.cycle[(k + 1) % m];
                if s[u] < 0.0 {
                    cycle.push(remap[u]);
                }
                if (s[u] < 0.0) != (s[v] < 0.0) {
                    let key = (u.min(v), u.max(v));
                    let x = match on_edge.get(&key) {
                        Some(&x) => x,
                        None => {
                            let (a, b) = (&self.verts[u], &self.verts[v]);
                            let shared: Vec<i64> = a
                                .labels
                                .iter()
                                .copied()
                                .filter(|l| b.labels.contains(l))
                                .collect();
                            if shared.len() != 2 {
                                return Err(GeometryError::Degenerate(
                                    "clipped edge is not bounded by two planes".into(),
                                ));
                            }
                            let mut labels = [shared[0], shared[1], label];
                            labels.sort_unstable();
                            let t = s[u] / (s[u] - s[v]);
                            verts.push(PolyVertex {
                                pos: a.pos + (b.pos - a.pos) * t,
                                labels,
                            });
                            on_edge.insert(key, verts.len() - 1);
                            verts.len() - 1
                        }
                    };
                    cycle.push(x);
                    if s[u] < 0.0 {
                        exit = Some(x);
                    } else {
                        enter = Some(x);
                    }
                }
            }
            if let (Some(a), Some(b)) = (exit, enter) {
                cap_next.insert(b, a);
            }
            if cycle.len() >= 3 {
                faces.push(PolyFace {
                    label: face.label,
                    cycle,
                });
            }
        }
        let start = *cap_next.keys().min().expect("a cut polyhedron has a cap");
        let mut cap = vec![start];
        let mut cur = cap_next[&start];
        while cur != start {
            if cap.len() > cap_next.len() {
                return Err(GeometryError::Degenerate(
                    "cap polygon does not close".into(),
                ));
            }
            cap.push(cur);
            cur = *cap_next
                .get(&cur)
                .ok_or_else(|| GeometryError::Degenerate("cap polygon does not close".into()))?;
        }
        faces.push(PolyFace { label, cycle: cap });
        self.verts = verts;
        self.faces = faces;
        Ok(true)
    }

    pub fn is_empty(&self) -> bool {
        self.verts.is_empty()
    }

    /// Largest distance from `center` to a vertex.
    pub fn radius_from(&self, center: &Vec3) -> f64 {
        self.verts
            .iter()
            .map(|v| (v.pos - center).norm())
            .fold(0.0, f64::max)
    }

    pub fn volume(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        let o = self.verts[0].pos;
        let mut vol = 0.0;
        for f in &self.faces {
            let a = self.verts[f.cycle[0]].pos - o;
            for k in 1..f.cycle.len() - 1 {
                let b = self.verts[f.cycle[k]].pos - o;
                let c = self.verts[f.cycle[k + 1]].pos - o;
                vol += a.dot(&b.cross(&c));
            }
        }
        vol / 6.0
    }
}

/// Order of coplanar points counter-clockwise around `normal`.
pub(crate) fn ccw_order(pts: &[Vec3], normal: &Vec3) -> Vec<usize> {
    let c = pts.iter().fold(Vec3::zeros(), |a, p| a + p) / pts.len() as f64;
    let seed = if normal.x.abs() < 0.9 {
        Vec3::x()
    } else {
        Vec3::y()
    };
    let u = normal.cross(&seed).normalize();
    let v = normal.normalize().cross(&u);
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    let ang = |i: usize| {
        let d = pts[i] - c;
        d.dot(&v).atan2(d.dot(&u))
    };
    idx.sort_by(|&a, &b| ang(a).total_cmp(&ang(b)));
    idx
}

/// Plane `n . x <= c` of points with smaller power distance to `(xi, wi)`
/// than to `(xj, wj)`.
pub(crate) fn power_halfspace(xi: &Vec3, wi: f64, xj: &Vec3, wj: f64) -> (Vec3, f64) {
    let n = 2.0 * (xj - xi);
    let c = xj.norm_squared() - xi.norm_squared() - wj + wi;
    (n, c)
}

/// Clips the starting box against the candidates nearest first, skipping the
/// ones too far away to reach the current cell.
pub(crate) fn clip_cell(
    mut cell: ConvexCell,
    center: &Vec3,
    weight: f64,
    candidates: &mut [(Vec3, f64, i64)],
    tol: f64,
) -> Result<Option<ConvexCell>, GeometryError> {
    let w_max = candidates.iter().map(|c| c.1).fold(weight, f64::max);
    candidates.sort_by(|a, b| {
        (a.0 - center)
            .norm_squared()
            .total_cmp(&(b.0 - center).norm_squared())
    });
    for (x, w, label) in candidates.iter() {
        let r = cell.radius_from(center);
        let reach = r + (r * r - weight + w_max).max(0.0).sqrt();
        let d = (x - center).norm();
        if d > reach {
            break;
        }
        let (n, c) = power_halfspace(center, weight, x, *w);
        if !cell.clip(&n, c, *label, tol)? {
            return Ok(None);
        }
    }
    Ok(Some(cell))
}

/// Cell vertices of every generator by direct half-space clipping. On
/// periodic windows the vertices are given in the frame of the generator
/// (not wrapped).
pub fn brute_force_cells(
    points: &[MarkedPoint],
    window: Window,
) -> Result<Vec<Option<Vec<Vec3>>>, GeometryError> {
    window.validate()?;
    let l = window.edge_length;
    let tol = DEGENERACY_TOL * l;
    let mut out = Vec::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        let mut cand = Vec::new();
        for (j, q) in points.iter().enumerate() {
            if window.periodic {
                for ox in -1..=1 {
                    for oy in -1..=1 {
                        for oz in -1..=1 {
                            if i == j && ox == 0 && oy == 0 && oz == 0 {
                                continue;
                            }
                            let x = q.location + Vec3::new(ox as f64, oy as f64, oz as f64) * l;
                            cand.push((x, q.weight(), j as i64));
                        }
                    }
                }
            } else if i != j {
                cand.push((q.location, q.weight(), j as i64));
            }
        }
        let start = if window.periodic {
            ConvexCell::cube(p.location - Vec3::repeat(l), p.location + Vec3::repeat(l))
        } else {
            ConvexCell::cube(Vec3::zeros(), Vec3::repeat(l))
        };
        let cell = clip_cell(start, &p.location, p.weight(), &mut cand, tol)?;
        out.push(cell.map(|c| c.verts.into_iter().map(|v| v.pos).collect()));
    }
    Ok(out)
}
