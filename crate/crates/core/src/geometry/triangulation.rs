//! Incremental regular (weighted Delaunay) triangulation in three dimensions.
//!
//! Points are inserted in Morton order with a visibility walk for location
//! and cavity retriangulation: all tetrahedra in conflict with the new
//! weighted point are removed and the cavity boundary is coned to it. A point
//! whose containing tetrahedron is not in conflict is redundant and its
//! Laguerre cell is empty; vertices swallowed by a cavity become redundant.
//! The triangulation starts from a large enclosing tetrahedron whose four
//! vertices are appended after the real points.

use std::cmp::Ordering;
use std::collections::HashMap;

use super::predicates::{in_conflict, orient3d};
use super::{GeometryError, Vec3};

pub(crate) const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Tet {
    /// Positively oriented vertices.
    pub v: [u32; 4],
    /// `n[i]` is the neighbour across the face opposite `v[i]`.
    pub n: [u32; 4],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum VertexState {
    Pending,
    Active,
    Hidden,
}

pub(crate) struct RegularTriangulation {
    pts: Vec<Vec3>,
    weights: Vec<f64>,
    n_real: usize,
    tets: Vec<Tet>,
    alive: Vec<bool>,
    free: Vec<u32>,
    state: Vec<VertexState>,
    vertex_tet: Vec<u32>,
    mark: Vec<u32>,
    stamp: u32,
    last: u32,
    walk_rng: u64,
    link: HashMap<(u32, u32), (u32, u8)>,
}

fn degenerate(what: &str) -> GeometryError {
    GeometryError::Degenerate(format!("{what}: generators are not in general position"))
}

impl RegularTriangulation {
    /// Triangulates the weighted points.
    pub fn new(points: &[Vec3], weights: &[f64]) -> Result<Self, GeometryError> {
        assert_eq!(points.len(), weights.len());
        let n = points.len();
        let (lo, hi) = points.iter().fold(
            (Vec3::repeat(f64::INFINITY), Vec3::repeat(f64::NEG_INFINITY)),
            |(lo, hi), p| (lo.inf(p), hi.sup(p)),
        );
        let (center, extent) = if n == 0 {
            (Vec3::zeros(), 1.0)
        } else {
            ((lo + hi) * 0.5, (hi - lo).max().max(1e-3))
        };
        let s = 1e3 * extent;
        let mut pts = points.to_vec();
        let mut ws = weights.to_vec();
        for d in [
            Vec3::new(1.0, 1.0, 1.0),
            Vec3::new(1.0, -1.0, -1.0),
            Vec3::new(-1.0, 1.0, -1.0),
            Vec3::new(-1.0, -1.0, 1.0),
        ] {
            pts.push(center + d * s);
            ws.push(0.0);
        }
        let total = pts.len();
        let mut tri = RegularTriangulation {
            pts,
            weights: ws,
            n_real: n,
            tets: Vec::new(),
            alive: Vec::new(),
            free: Vec::new(),
            state: vec![VertexState::Pending; total],
            vertex_tet: vec![NONE; total],
            mark: Vec::new(),
            stamp: 0,
            last: 0,
            walk_rng: 0x9e37_79b9_7f4a_7c15,
            link: HashMap::new(),
        };
        let s0 = n as u32;
        let mut sv = [s0, s0 + 1, s0 + 2, s0 + 3];
        if tri.orient(sv) == Ordering::Less {
            sv.swap(0, 1);
        }
        tri.new_tet(sv, [NONE; 4]);
        for k in 0..4 {
            tri.state[n + k] = VertexState::Active;
        }
        for i in morton_order(points, &lo, &hi) {
            tri.insert(i as u32)?;
        }
        Ok(tri)
    }

    pub fn is_super(&self, v: u32) -> bool {
        v as usize >= self.n_real
    }

    pub fn state(&self, v: u32) -> VertexState {
        self.state[v as usize]
    }

    pub fn tet(&self, t: u32) -> &Tet {
        &self.tets[t as usize]
    }

    pub fn alive_tets(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.tets.len() as u32).filter(move |&t| self.alive[t as usize])
    }

    fn orient(&self, v: [u32; 4]) -> Ordering {
        let p = |i: usize| &self.pts[v[i] as usize];
        orient3d(p(0), p(1), p(2), p(3))
    }

    /// Conflict test with ties broken by symbolic perturbation: weight
    /// `w_i` becomes `w_i + eps^(n - i)`, so higher ids dominate. The
    /// derivative of the lifted determinant in `w_k` is the orientation of
    /// the tetrahedron with vertex `k` replaced by `p`, and in `w_p` it is
    /// minus the tetrahedron's orientation.
    fn conflict(&self, t: u32, p: u32) -> Option<bool> {
        let v = self.tets[t as usize].v;
        let pw = |i: u32| (&self.pts[i as usize], self.weights[i as usize]);
        if let Some(c) = in_conflict([pw(v[0]), pw(v[1]), pw(v[2]), pw(v[3])], pw(p)) {
            return Some(c);
        }
        let mut order = [
            (p, None),
            (v[0], Some(0)),
            (v[1], Some(1)),
            (v[2], Some(2)),
            (v[3], Some(3)),
        ];
        order.sort_unstable_by_key(|a| std::cmp::Reverse(a.0));
        for (_, slot) in order {
            let Some(k) = slot else {
                return Some(true);
            };
            let mut w = v;
            w[k] = p;
            match self.orient(w) {
                Ordering::Less => return Some(true),
                Ordering::Greater => return Some(false),
                Ordering::Equal => continue,
            }
        }
        None
    }

    fn new_tet(&mut self, v: [u32; 4], n: [u32; 4]) -> u32 {
        let tet = Tet { v, n };
        let id = if let Some(id) = self.free.pop() {
            self.tets[id as usize] = tet;
            self.alive[id as usize] = true;
            self.mark[id as usize] = 0;
            id
        } else {
            self.tets.push(tet);
            self.alive.push(true);
            self.mark.push(0);
            (self.tets.len() - 1) as u32
        };
        for &x in &v {
            self.vertex_tet[x as usize] = id;
        }
        id
    }

    fn next_rand(&mut self) -> u64 {
        let mut x = self.walk_rng;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.walk_rng = x;
        x
    }

    /// Tetrahedron containing point `p` (closed).
    fn locate(&mut self, p: u32) -> Result<u32, GeometryError> {
        let mut t = self.last;
        if !self.alive[t as usize] {
            t = self
                .alive_tets()
                .next()
                .expect("triangulation has no tetrahedra");
        }
        let max_steps = 4 * self.tets.len() + 64;
        for _ in 0..max_steps {
            let tet = self.tets[t as usize];
            let start = (self.next_rand() % 4) as usize;
            let mut moved = false;
            for k in 0..4 {
                let i = (start + k) % 4;
                let mut v = tet.v;
                v[i] = p;
                if self.orient(v) == Ordering::Less {
                    if tet.n[i] == NONE {
                        return Err(GeometryError::InvalidInput(
                            "point outside the enclosing tetrahedron".into(),
                        ));
                    }
                    t = tet.n[i];
                    moved = true;
                    break;
                }
            }
            if !moved {
                return Ok(t);
            }
        }
        // the walk should always terminate; fall back to a scan regardless
        for t in 0..self.tets.len() as u32 {
            if !self.alive[t as usize] {
                continue;
            }
            let tet = self.tets[t as usize];
            if (0..4).all(|i| {
                let mut v = tet.v;
                v[i] = p;
                self.orient(v) != Ordering::Less
            }) {
                return Ok(t);
            }
        }
        Err(degenerate("point location failed"))
    }

    fn insert(&mut self, p: u32) -> Result<(), GeometryError> {
        let t0 = self.locate(p)?;
        match self.conflict(t0, p) {
            None => return Err(degenerate("power-equidistant generators")),
            Some(false) => {
                self.state[p as usize] = VertexState::Hidden;
                return Ok(());
            }
            Some(true) => {}
        }
        self.stamp += 1;
        let in_mark = 2 * self.stamp;
        let out_mark = 2 * self.stamp + 1;
        let mut conflict = vec![t0];
        self.mark[t0 as usize] = in_mark;
        let mut boundary: Vec<(u32, usize)> = Vec::new();
        let mut k = 0;
        while k < conflict.len() {
            let t = conflict[k];
            k += 1;
            for i in 0..4 {
                let nb = self.tets[t as usize].n[i];
                if nb == NONE {
                    boundary.push((t, i));
                    continue;
                }
                let m = self.mark[nb as usize];
                if m == in_mark {
                    continue;
                }
                if m == out_mark {
                    boundary.push((t, i));
                    continue;
                }
                match self.conflict(nb, p) {
                    None => return Err(degenerate("power-equidistant generators")),
                    Some(true) => {
                        self.mark[nb as usize] = in_mark;
                        conflict.push(nb);
                    }
                    Some(false) => {
                        self.mark[nb as usize] = out_mark;
                        boundary.push((t, i));
                    }
                }
            }
        }

        let mut candidates: Vec<u32> = conflict
            .iter()
            .flat_map(|&t| self.tets[t as usize].v)
            .collect();
        candidates.sort_unstable();
        candidates.dedup();

        self.link.clear();
        let mut created = Vec::with_capacity(boundary.len());
        for &(t, i) in &boundary {
            let old = self.tets[t as usize];
            let mut v = old.v;
            v[i] = p;
            if self.orient(v) != Ordering::Greater {
                return Err(degenerate("flat tetrahedron in cavity"));
            }
            let nb = old.n[i];
            let mut n = [NONE; 4];
            n[i] = nb;
            created.push((v, n, nb, t, i));
        }
        // slots freed by earlier insertions are reused; this insertion's
        // conflict tets are released only once the cavity is rebuilt
        let new_ids: Vec<u32> = created
            .iter()
            .map(|&(v, n, _, _, _)| self.new_tet(v, n))
            .collect();
        for (idx, &(v, _, nb, t_old, i)) in created.iter().enumerate() {
            let nt = new_ids[idx];
            if nb != NONE {
                let nbt = &mut self.tets[nb as usize];
                if let Some(j) = nbt.n.iter().position(|&x| x == t_old) {
                    nbt.n[j] = nt;
                }
            }
            for kf in 0..4 {
                if kf == i {
                    continue;
                }
                let mut pair = [NONE; 2];
                let mut c = 0;
                for m in 0..4 {
                    if m != i && m != kf {
                        pair[c] = v[m];
                        c += 1;
                    }
                }
                let key = (pair[0].min(pair[1]), pair[0].max(pair[1]));
                if let Some((ot, of)) = self.link.remove(&key) {
                    self.tets[nt as usize].n[kf] = ot;
                    self.tets[ot as usize].n[of as usize] = nt;
                } else {
                    self.link.insert(key, (nt, kf as u8));
                }
            }
        }
        if !self.link.is_empty() {
            return Err(degenerate("cavity boundary is not a closed surface"));
        }
        for &t in &conflict {
            self.alive[t as usize] = false;
            self.free.push(t);
        }
        self.state[p as usize] = VertexState::Active;
        for v in candidates {
            if v == p {
                continue;
            }
            let still_present = new_ids
                .iter()
                .any(|&nt| self.tets[nt as usize].v.contains(&v));
            if !still_present {
                if self.is_super(v) {
                    return Err(degenerate("enclosing vertex swallowed"));
                }
                self.state[v as usize] = VertexState::Hidden;
            }
        }
        self.last = new_ids[0];
        Ok(())
    }

    /// Alive tetrahedra incident to vertex `v`.
    pub fn star(&self, v: u32) -> Vec<u32> {
        let start = self.vertex_tet[v as usize];
        if start == NONE || !self.alive[start as usize] || !self.tets[start as usize].v.contains(&v)
        {
            return Vec::new();
        }
        let mut out = vec![start];
        let mut k = 0;
        while k < out.len() {
            let t = out[k];
            k += 1;
            let tet = self.tets[t as usize];
            for i in 0..4 {
                if tet.v[i] == v {
                    continue;
                }
                let nb = tet.n[i];
                if nb != NONE && !out.contains(&nb) {
                    out.push(nb);
                }
            }
        }
        out
    }

    /// Orthocenter of a tetrahedron and its power (squared orthoradius).
    pub fn orthocenter(&self, t: u32) -> (Vec3, f64) {
        let v = self.tets[t as usize].v;
        let p: Vec<(Vec3, f64)> = v
            .iter()
            .map(|&i| (self.pts[i as usize], self.weights[i as usize]))
            .collect();
        orthocenter(&p)
    }

    /// Rejects tetrahedra whose neighbours' opposite vertices are (nearly)
    /// on their orthosphere: the dual vertex would have more than four
    /// incident cells.
    pub fn check_power_gap(
        &self,
        t: u32,
        center: &Vec3,
        power: f64,
        tol: f64,
    ) -> Result<(), GeometryError> {
        let tet = self.tets[t as usize];
        for &nb in &tet.n {
            if nb == NONE {
                continue;
            }
            let Some(e) = self.tets[nb as usize]
                .v
                .iter()
                .copied()
                .find(|x| !tet.v.contains(x))
            else {
                continue;
            };
            let gap =
                (center - self.pts[e as usize]).norm_squared() - self.weights[e as usize] - power;
            if gap <= tol {
                return Err(GeometryError::Degenerate(format!(
                    "five generators are (nearly) power-equidistant from {center:?}"
                )));
            }
        }
        Ok(())
    }
}

/// Orthocenter of four weighted points: the point with equal power distance
/// `|c - p_i|^2 - w_i` to all of them.
pub(crate) fn orthocenter(p: &[(Vec3, f64)]) -> (Vec3, f64) {
    let (p0, w0) = p[0];
    let mut a = nalgebra::Matrix3::zeros();
    let mut b = Vec3::zeros();
    for i in 1..4 {
        let d = p[i].0 - p0;
        a.set_row(i - 1, &(2.0 * d).transpose());
        b[i - 1] = d.norm_squared() - p[i].1 + w0;
    }
    let x = a.lu().solve(&b).unwrap_or_else(|| Vec3::repeat(f64::NAN));
    (p0 + x, x.norm_squared() - w0)
}

fn morton_order(points: &[Vec3], lo: &Vec3, hi: &Vec3) -> Vec<usize> {
    fn spread(mut x: u64) -> u64 {
        x &= 0x1f_ffff;
        x = (x | x << 32) & 0x1f_0000_0000_ffff;
        x = (x | x << 16) & 0x1f_0000_ff00_00ff;
        x = (x | x << 8) & 0x100f_00f0_0f00_f00f;
        x = (x | x << 4) & 0x10c3_0c30_c30c_30c3;
        x = (x | x << 2) & 0x1249_2492_4924_9249;
        x
    }
    let ext = (hi - lo).map(|e| if e > 0.0 { e } else { 1.0 });
    let scale = ((1u64 << 21) - 1) as f64;
    let mut keyed: Vec<(u64, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let q = |k: usize| (((p[k] - lo[k]) / ext[k]).clamp(0.0, 1.0) * scale) as u64;
            (spread(q(0)) | spread(q(1)) << 1 | spread(q(2)) << 2, i)
        })
        .collect();
    keyed.sort_unstable();
    keyed.into_iter().map(|(_, i)| i).collect()
}
