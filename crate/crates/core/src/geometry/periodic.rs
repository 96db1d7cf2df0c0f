//! Periodic Laguerre tessellations through a replicated regular triangulation.
//!
//! Generators are copied into the 26 neighbouring windows, keeping only copies
//! within a margin `delta` of the central window. Every tetrahedron incident
//! to a central generator is certified: the ball that could contain a point
//! in conflict with it must lie inside the replicated region. Failing that the
//! margin is doubled, up to full replication. Faces are then read off the
//! dual and identified modulo translation by the offsets of their generators.

use std::collections::HashMap;

use super::triangulation::{RegularTriangulation, VertexState};
use super::{Face, GeometryError, MarkedPoint, Tessellation, Vec3, Window, DEGENERACY_TOL};

type Site = (u32, [i8; 3]);

/// Translation-invariant key of a set of generator copies.
fn canonical(sites: &[Site]) -> Vec<Site> {
    let mut best: Option<Vec<Site>> = None;
    for anchor in sites {
        let mut v: Vec<Site> = sites
            .iter()
            .map(|(g, o)| {
                (
                    *g,
                    [o[0] - anchor.1[0], o[1] - anchor.1[1], o[2] - anchor.1[2]],
                )
            })
            .collect();
        v.sort_unstable();
        if best.as_ref().is_none_or(|b| v < *b) {
            best = Some(v);
        }
    }
    best.unwrap_or_default()
}

pub(super) fn build(points: &[MarkedPoint], window: Window) -> Result<Tessellation, GeometryError> {
    let l = window.edge_length;
    let spacing = l / (points.len() as f64).cbrt();
    let mut delta = (2.0 * spacing).min(l);
    loop {
        if let Some(t) = attempt(points, window, delta)? {
            return Ok(t);
        }
        if delta >= l {
            return Err(GeometryError::WindowTooSmall(format!(
                "{} generators on a window of edge {l} do not determine a periodic \
                 tessellation from a single layer of images",
                points.len()
            )));
        }
        log::debug!("periodic margin {delta} insufficient, doubling");
        delta = (2.0 * delta).min(l);
    }
}

struct Replicated {
    sites: Vec<Site>,
    tri: RegularTriangulation,
}

impl Replicated {
    fn site(&self, v: u32) -> Site {
        self.sites[v as usize]
    }

    fn key(&self, vs: &[u32]) -> Vec<Site> {
        let s: Vec<Site> = vs.iter().map(|&v| self.site(v)).collect();
        canonical(&s)
    }
}

fn attempt(
    points: &[MarkedPoint],
    window: Window,
    delta: f64,
) -> Result<Option<Tessellation>, GeometryError> {
    let l = window.edge_length;
    let n = points.len();
    let mut sites: Vec<Site> = Vec::new();
    let mut locs = Vec::new();
    let mut weights = Vec::new();
    // central copies first so vertex ids below n are the generators
    for (g, p) in points.iter().enumerate() {
        sites.push((g as u32, [0, 0, 0]));
        locs.push(p.location);
        weights.push(p.weight());
    }
    for ox in -1i8..=1 {
        for oy in -1i8..=1 {
            for oz in -1i8..=1 {
                if ox == 0 && oy == 0 && oz == 0 {
                    continue;
                }
                let shift = Vec3::new(ox as f64, oy as f64, oz as f64) * l;
                for (g, p) in points.iter().enumerate() {
                    let x = p.location + shift;
                    if x.iter().all(|&c| c >= -delta && c < l + delta) {
                        sites.push((g as u32, [ox, oy, oz]));
                        locs.push(x);
                        weights.push(p.weight());
                    }
                }
            }
        }
    }
    let w_max = weights.iter().cloned().fold(0.0, f64::max);
    let tri = RegularTriangulation::new(&locs, &weights)?;
    let rep = Replicated { sites, tri };
    let tri = &rep.tri;

    let mut stars: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut ortho: HashMap<u32, (Vec3, f64)> = HashMap::new();
    for a in 0..n as u32 {
        if tri.state(a) != VertexState::Active {
            continue;
        }
        let star = tri.star(a);
        if star.is_empty() {
            return Err(GeometryError::Invariant(format!(
                "active generator {a} has no incident tetrahedra"
            )));
        }
        for &t in &star {
            let tet = tri.tet(t);
            if tet.v.iter().any(|&v| tri.is_super(v)) {
                return Ok(None);
            }
            let (c, pw) = *ortho.entry(t).or_insert_with(|| tri.orthocenter(t));
            let r = (pw + w_max).max(0.0).sqrt();
            if !c
                .iter()
                .all(|&x| x.is_finite() && x - r >= -delta && x + r <= l + delta)
            {
                return Ok(None);
            }
            tri.check_power_gap(t, &c, pw, DEGENERACY_TOL * l * l)?;
        }
        stars[a as usize] = star;
    }

    let mut positions: Vec<Vec3> = Vec::new();
    let mut vertex_cells: Vec<Vec<usize>> = Vec::new();
    let mut vertex_of: HashMap<Vec<Site>, usize> = HashMap::new();
    let mut tet_vertex: HashMap<u32, usize> = HashMap::new();
    let mut edges: Vec<Face> = Vec::new();
    let mut edge_of: HashMap<Vec<Site>, usize> = HashMap::new();

    // vertices and edges
    for a in 0..n {
        for &t in &stars[a] {
            let tet = *tri.tet(t);
            let vid = *vertex_of.entry(rep.key(&tet.v)).or_insert_with(|| {
                positions.push(window.wrap_point(&ortho[&t].0));
                vertex_cells.push(tet.v.iter().map(|&v| rep.site(v).0 as usize).collect());
                positions.len() - 1
            });
            tet_vertex.insert(t, vid);
        }
    }
    // Frames follow the replicated orthocenters and generator copies, which
    // stay correct for faces wider than half the window. Each coordinate is
    // stored as the wrapped position plus a whole lattice translate.
    let frame = |tets: &[u32], gens: &[u32], vertices: Vec<usize>, boundary: Vec<usize>| {
        let origin = ortho[&tets[0]].0;
        let base = positions[vertices[0]];
        let place = |true_pos: Vec3, wrapped: Vec3| {
            wrapped + window.translate(&(base + true_pos - origin - wrapped)) * l
        };
        Face {
            coords: tets
                .iter()
                .zip(&vertices)
                .map(|(t, &v)| place(ortho[t].0, positions[v]))
                .collect(),
            vertices,
            boundary,
            cofaces: vec![],
            cells: gens.iter().map(|&v| rep.site(v).0 as usize).collect(),
            cell_centers: gens
                .iter()
                .map(|&v| place(locs[v as usize], points[rep.site(v).0 as usize].location))
                .collect(),
        }
    };

    for a in 0..n {
        for &t in &stars[a] {
            let tet = *tri.tet(t);
            for i in 0..4 {
                if tet.v[i] == a as u32 {
                    continue;
                }
                let tri_verts: Vec<u32> = (0..4).filter(|&k| k != i).map(|k| tet.v[k]).collect();
                let key = rep.key(&tri_verts);
                if edge_of.contains_key(&key) {
                    continue;
                }
                let u = tet_vertex[&t];
                let w = tet_vertex[&tet.n[i]];
                edge_of.insert(key, edges.len());
                edges.push(frame(&[t, tet.n[i]], &tri_verts, vec![u, w], vec![u, w]));
            }
        }
    }

    // 2-faces, one per triangulation edge, with vertices in ring order
    let mut faces2: Vec<Face> = Vec::new();
    let mut face_of: HashMap<Vec<Site>, usize> = HashMap::new();
    let mut cells: Vec<Face> = Vec::new();
    for a in 0..n {
        if stars[a].is_empty() {
            continue;
        }
        let a32 = a as u32;
        let mut cell_boundary = Vec::new();
        let mut cell_vertices: Vec<usize> = Vec::new();
        let mut seen_b: Vec<u32> = Vec::new();
        for &t in &stars[a] {
            let tet = *tri.tet(t);
            cell_vertices.push(tet_vertex[&t]);
            for &b in &tet.v {
                if b == a32 || seen_b.contains(&b) {
                    continue;
                }
                seen_b.push(b);
                let key = rep.key(&[a32, b]);
                let id = match face_of.get(&key) {
                    Some(&id) => id,
                    None => {
                        let (ring, tris) = ring_around(tri, t, a32, b)?;
                        let vertices = ring.iter().map(|t| tet_vertex[t]).collect();
                        let boundary = tris.iter().map(|tv| edge_of[&rep.key(tv)]).collect();
                        face_of.insert(key, faces2.len());
                        faces2.push(frame(&ring, &[a32, b], vertices, boundary));
                        faces2.len() - 1
                    }
                };
                cell_boundary.push(id);
            }
        }
        let mut corners: Vec<(usize, u32)> = cell_vertices
            .into_iter()
            .zip(stars[a].iter().copied())
            .collect();
        corners.sort_unstable();
        if corners.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(GeometryError::WindowTooSmall(format!(
                "cell of generator {a} meets its own periodic image"
            )));
        }
        let (ids, tets): (Vec<usize>, Vec<u32>) = corners.into_iter().unzip();
        cells.push(frame(&tets, &[a32], ids, cell_boundary));
    }

    let mut vertices_count_ok = true;
    for f in &edges {
        vertices_count_ok &= f.cells.len() == 3;
    }
    for f in &faces2 {
        vertices_count_ok &= f.cells.len() == 2 && f.vertices.len() >= 3;
    }
    if !vertices_count_ok || vertex_cells.iter().any(|c| c.len() != 4) {
        return Err(GeometryError::Invariant(
            "periodic dual has faces with the wrong number of incident cells".into(),
        ));
    }

    // vertex cells are derived from the incident edges during assembly
    let tess = Tessellation::assemble(
        3,
        window,
        points.to_vec(),
        positions,
        vec![edges, faces2, cells],
    )?;
    tess.validate()?;
    Ok(Some(tess))
}

/// Tetrahedra around the triangulation edge `ab`, starting at `t0`, with the
/// triangle shared by each one and its successor.
fn ring_around(
    tri: &RegularTriangulation,
    t0: u32,
    a: u32,
    b: u32,
) -> Result<(Vec<u32>, Vec<[u32; 3]>), GeometryError> {
    let first = *tri.tet(t0);
    let mut pivot = first
        .v
        .iter()
        .copied()
        .find(|&v| v != a && v != b)
        .expect("tetrahedron has four distinct vertices");
    let mut cur = t0;
    let mut ring = Vec::new();
    let mut tris = Vec::new();
    loop {
        let tet = *tri.tet(cur);
        let i = tet.v.iter().position(|&v| v == pivot).ok_or_else(|| {
            GeometryError::Invariant("broken adjacency while walking around an edge".into())
        })?;
        let mut triangle = [0u32; 3];
        let mut k = 0;
        for (m, &v) in tet.v.iter().enumerate() {
            if m != i {
                triangle[k] = v;
                k += 1;
            }
        }
        let r = triangle
            .iter()
            .copied()
            .find(|&v| v != a && v != b)
            .unwrap();
        ring.push(cur);
        tris.push(triangle);
        cur = tet.n[i];
        pivot = r;
        if cur == t0 {
            break;
        }
        if ring.len() > 10_000 {
            return Err(GeometryError::Invariant("edge ring does not close".into()));
        }
    }
    Ok((ring, tris))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_key_ignores_translation() {
        let a = [(3, [0, 0, 0]), (5, [1, 0, -1])];
        let b = [(5, [0, 1, 0]), (3, [-1, 1, 1])];
        assert_eq!(canonical(&a), canonical(&b));
        let c = [(3, [0, 0, 0]), (5, [1, 0, 0])];
        assert_ne!(canonical(&a), canonical(&c));
    }
}
