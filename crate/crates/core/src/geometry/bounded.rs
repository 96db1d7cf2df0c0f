//! Laguerre tessellations restricted to a bounded cubic window.
//!
//! Each cell is the window box clipped by the power bisectors to its
//! neighbours in the regular triangulation. Faces are glued across cells by
//! the sets of plane labels that define them: a vertex by its cell and its
//! three planes, an edge by its cell and two planes, a 2-face by its cell and
//! one plane.

use std::collections::{BTreeSet, HashMap};

use super::clip::{clip_cell, ConvexCell};
use super::triangulation::{RegularTriangulation, VertexState};
use super::{Face, GeometryError, MarkedPoint, Tessellation, Vec3, Window, DEGENERACY_TOL};

type Key = Vec<i64>;

fn key(own: usize, labels: &[i64]) -> Key {
    let mut k: BTreeSet<i64> = labels.iter().copied().collect();
    k.insert(own as i64);
    k.into_iter().collect()
}

fn generators_of(k: &Key) -> Vec<usize> {
    k.iter().filter(|&&x| x >= 0).map(|&x| x as usize).collect()
}

pub(super) fn build(points: &[MarkedPoint], window: Window) -> Result<Tessellation, GeometryError> {
    let l = window.edge_length;
    let tol = DEGENERACY_TOL * l;
    let locs: Vec<Vec3> = points.iter().map(|p| p.location).collect();
    let weights: Vec<f64> = points.iter().map(|p| p.weight()).collect();
    let tri = RegularTriangulation::new(&locs, &weights)?;
    for t in tri.alive_tets() {
        if tri.tet(t).v.iter().any(|&v| tri.is_super(v)) {
            continue;
        }
        let (c, pw) = tri.orthocenter(t);
        tri.check_power_gap(t, &c, pw, DEGENERACY_TOL * l * l)?;
    }

    let mut cells: Vec<(usize, ConvexCell)> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        if tri.state(i as u32) != VertexState::Active {
            continue;
        }
        let mut nbrs: Vec<u32> = tri
            .star(i as u32)
            .into_iter()
            .flat_map(|t| tri.tet(t).v)
            .filter(|&v| v != i as u32 && !tri.is_super(v))
            .collect();
        nbrs.sort_unstable();
        nbrs.dedup();
        let mut cand: Vec<(Vec3, f64, i64)> = nbrs
            .iter()
            .map(|&j| (locs[j as usize], weights[j as usize], j as i64))
            .collect();
        let start = ConvexCell::cube(Vec3::zeros(), Vec3::repeat(l));
        if let Some(cell) = clip_cell(start, &p.location, p.weight(), &mut cand, tol)? {
            cells.push((i, cell));
        }
    }

    let blank = |vertices: Vec<usize>, boundary: Vec<usize>, cells: Vec<usize>| Face {
        vertices,
        coords: vec![],
        boundary,
        cofaces: vec![],
        cells,
        cell_centers: vec![],
    };

    let mut positions: Vec<Vec3> = Vec::new();
    let mut vertex_of: HashMap<Key, usize> = HashMap::new();
    let mut edges: Vec<Face> = Vec::new();
    let mut edge_of: HashMap<Key, usize> = HashMap::new();
    let mut faces2: Vec<Face> = Vec::new();
    let mut face_of: HashMap<Key, usize> = HashMap::new();
    let mut cell_faces: Vec<Face> = Vec::new();

    for (i, cell) in &cells {
        let i = *i;
        let mut local_vertex = Vec::with_capacity(cell.verts.len());
        for v in &cell.verts {
            let k = key(i, &v.labels);
            let id = match vertex_of.get(&k) {
                Some(&id) => {
                    if (positions[id] - v.pos).norm() > 1e3 * tol.max(f64::EPSILON * l) {
                        return Err(GeometryError::Degenerate(format!(
                            "cells disagree on the position of vertex {:?}",
                            v.pos
                        )));
                    }
                    id
                }
                None => {
                    positions.push(v.pos);
                    vertex_of.insert(k, positions.len() - 1);
                    positions.len() - 1
                }
            };
            local_vertex.push(id);
        }
        let mut boundary = Vec::new();
        for f in &cell.faces {
            let fk = key(i, &[f.label]);
            if let Some(&id) = face_of.get(&fk) {
                boundary.push(id);
                continue;
            }
            let m = f.cycle.len();
            let mut fb = Vec::with_capacity(m);
            for k in 0..m {
                let (u, w) = (f.cycle[k], f.cycle[(k + 1) % m]);
                let other: Vec<i64> = cell.verts[u]
                    .labels
                    .iter()
                    .copied()
                    .filter(|x| *x != f.label && cell.verts[w].labels.contains(x))
                    .collect();
                if other.len() != 1 {
                    return Err(GeometryError::Degenerate(
                        "cell edge is not the meeting of exactly two planes".into(),
                    ));
                }
                let ek = key(i, &[f.label, other[0]]);
                let eid = *edge_of.entry(ek.clone()).or_insert_with(|| {
                    let (a, b) = (local_vertex[u], local_vertex[w]);
                    edges.push(blank(vec![a, b], vec![a, b], generators_of(&ek)));
                    edges.len() - 1
                });
                fb.push(eid);
            }
            let verts = f.cycle.iter().map(|&u| local_vertex[u]).collect();
            face_of.insert(fk.clone(), faces2.len());
            faces2.push(blank(verts, fb, generators_of(&fk)));
            boundary.push(faces2.len() - 1);
        }
        let mut vs = local_vertex.clone();
        vs.sort_unstable();
        cell_faces.push(blank(vs, boundary, vec![i]));
    }
    let tess = Tessellation::assemble(
        3,
        window,
        points.to_vec(),
        positions,
        vec![edges, faces2, cell_faces],
    )?;
    tess.validate()?;
    if tess.euler_characteristic() != 1 {
        return Err(GeometryError::Invariant(format!(
            "bounded complex has Euler characteristic {}",
            tess.euler_characteristic()
        )));
    }
    Ok(tess)
}
