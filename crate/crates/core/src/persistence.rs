//! Persistence over Z/2 by boundary-matrix reduction, persistent Betti
//! numbers, M-localized Betti numbers and Euler characteristic curves.

use std::collections::HashMap;
use std::io::Write;

use rayon::prelude::*;
use thiserror::Error;

use crate::filtration::{face_values, select_faces, FaceValues, FilteredComplex, NoiseConfig};
use crate::geometry::{Tessellation, Vec3};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PersistenceError {
    #[error("face at filtration index {face} precedes its boundary face {boundary}")]
    OrderViolation { face: usize, boundary: usize },
    #[error("birth level {b} exceeds death level {d}")]
    BirthAfterDeath { b: f64, d: f64 },
    #[error("localization radius {m} must be positive and below half the window edge {half}")]
    BadLocalization { m: f64, half: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feature {
    pub dim: usize,
    pub birth: f64,
    /// `INFINITY` for features alive at the end of the filtration.
    pub death: f64,
    /// Tessellation id of the `dim`-face creating the feature.
    pub birth_face: usize,
    /// Tessellation id of the `(dim+1)`-face killing it.
    pub killing_face: Option<usize>,
}

impl Feature {
    pub fn is_essential(&self) -> bool {
        self.killing_face.is_none()
    }

    pub fn lifetime(&self) -> f64 {
        self.death - self.birth
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PersistenceDiagram {
    /// Finite pairs in order of the killing face, then essential features in
    /// order of the birth face. Zero-persistence pairs are kept.
    pub features: Vec<Feature>,
}

/// Result of reducing a filtered complex: the pairing by filtration index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pairing {
    /// `partner[i]` is the index paired with `i`, if any.
    pub partner: Vec<Option<usize>>,
}

impl Pairing {
    /// Whether index `i` kills a feature.
    pub fn is_negative(&self, i: usize) -> bool {
        matches!(self.partner[i], Some(j) if j < i)
    }
}

fn check_order(cx: &FilteredComplex) -> Result<(), PersistenceError> {
    for (i, f) in cx.faces.iter().enumerate() {
        if let Some(&b) = f.boundary.last() {
            if b >= i {
                return Err(PersistenceError::OrderViolation {
                    face: i,
                    boundary: b,
                });
            }
        }
    }
    Ok(())
}

/// Adds `src` into `dst` over Z/2; both sorted ascending.
fn add_column(dst: &mut Vec<usize>, src: &[usize], scratch: &mut Vec<usize>) {
    scratch.clear();
    let (mut i, mut j) = (0, 0);
    while i < dst.len() && j < src.len() {
        match dst[i].cmp(&src[j]) {
            std::cmp::Ordering::Less => {
                scratch.push(dst[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                scratch.push(src[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    scratch.extend_from_slice(&dst[i..]);
    scratch.extend_from_slice(&src[j..]);
    std::mem::swap(dst, scratch);
}

/// Column reduction with clearing, highest dimension first.
pub fn reduce_pairing(cx: &FilteredComplex) -> Result<Pairing, PersistenceError> {
    check_order(cx)?;
    let n = cx.len();
    let mut partner: Vec<Option<usize>> = vec![None; n];
    // reduced columns, kept only where they end up nonzero
    let mut reduced: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut pivot_owner: Vec<Option<usize>> = vec![None; n];
    let mut cleared = vec![false; n];
    let mut scratch = Vec::new();
    for dim in (1..=cx.max_dim()).rev() {
        for j in 0..n {
            let f = &cx.faces[j];
            if f.dim != dim || cleared[j] {
                continue;
            }
            let mut col = f.boundary.clone();
            while let Some(&low) = col.last() {
                match pivot_owner[low] {
                    Some(k) => add_column(&mut col, &reduced[k], &mut scratch),
                    None => break,
                }
            }
            if let Some(&low) = col.last() {
                pivot_owner[low] = Some(j);
                partner[low] = Some(j);
                partner[j] = Some(low);
                cleared[low] = true;
                reduced[j] = col;
            }
        }
    }
    Ok(Pairing { partner })
}

/// Persistence diagram of a filtered complex.
pub fn reduce(cx: &FilteredComplex) -> Result<PersistenceDiagram, PersistenceError> {
    let pairing = reduce_pairing(cx)?;
    Ok(diagram_from_pairing(cx, &pairing))
}

pub fn diagram_from_pairing(cx: &FilteredComplex, pairing: &Pairing) -> PersistenceDiagram {
    let mut features = Vec::new();
    for (j, f) in cx.faces.iter().enumerate() {
        if let Some(i) = pairing.partner[j] {
            if i < j {
                let b = &cx.faces[i];
                features.push(Feature {
                    dim: b.dim,
                    birth: b.value,
                    death: f.value,
                    birth_face: b.id,
                    killing_face: Some(f.id),
                });
            }
        }
    }
    for (i, f) in cx.faces.iter().enumerate() {
        if pairing.partner[i].is_none() {
            features.push(Feature {
                dim: f.dim,
                birth: f.value,
                death: f64::INFINITY,
                birth_face: f.id,
                killing_face: None,
            });
        }
    }
    PersistenceDiagram { features }
}

/// Standard reduction on dense bit columns, without clearing. A reference
/// for [`reduce_pairing`].
pub fn reduce_pairing_dense(cx: &FilteredComplex) -> Result<Pairing, PersistenceError> {
    check_order(cx)?;
    let n = cx.len();
    let words = n.div_ceil(64);
    let mut m = vec![vec![0u64; words]; n];
    for (j, f) in cx.faces.iter().enumerate() {
        for &i in &f.boundary {
            m[j][i / 64] ^= 1 << (i % 64);
        }
    }
    let low = |col: &[u64]| {
        col.iter()
            .rposition(|&w| w != 0)
            .map(|k| 64 * k + 63 - col[k].leading_zeros() as usize)
    };
    // column whose reduced low is each row
    let mut owner: Vec<Option<usize>> = vec![None; n];
    let mut partner = vec![None; n];
    for j in 0..n {
        while let Some(l) = low(&m[j]) {
            let Some(k) = owner[l] else {
                owner[l] = Some(j);
                partner[l] = Some(j);
                partner[j] = Some(l);
                break;
            };
            let (done, rest) = m.split_at_mut(j);
            for (x, y) in rest[0].iter_mut().zip(&done[k]) {
                *x ^= y;
            }
        }
    }
    Ok(Pairing { partner })
}

impl PersistenceDiagram {
    pub fn of_dim(&self, q: usize) -> impl Iterator<Item = &Feature> {
        self.features.iter().filter(move |f| f.dim == q)
    }

    /// Essential features per dimension, i.e. the Betti numbers of the full
    /// complex.
    pub fn betti(&self, max_dim: usize) -> Vec<usize> {
        let mut b = vec![0; max_dim + 1];
        for f in self.features.iter().filter(|f| f.is_essential()) {
            if f.dim <= max_dim {
                b[f.dim] += 1;
            }
        }
        b
    }

    /// `(dim, birth, death, birth_face, killing_face)`; essential features
    /// have death `inf` and an empty killing face.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "dim,birth,death,birth_face,killing_face")?;
        for f in &self.features {
            let death = if f.death.is_finite() {
                format!("{:?}", f.death)
            } else {
                "inf".to_string()
            };
            let kill = f.killing_face.map(|k| k.to_string()).unwrap_or_default();
            writeln!(
                w,
                "{},{:?},{},{},{}",
                f.dim, f.birth, death, f.birth_face, kill
            )?;
        }
        Ok(())
    }
}

/// Number of `q`-features with birth `<= b` and death `>= d`.
pub fn persistent_betti(
    diagram: &PersistenceDiagram,
    q: usize,
    b: f64,
    d: f64,
) -> Result<usize, PersistenceError> {
    if b > d {
        return Err(PersistenceError::BirthAfterDeath { b, d });
    }
    Ok(diagram
        .of_dim(q)
        .filter(|f| f.birth <= b && f.death >= d)
        .count())
}

/// `chi(s)` at each grid value: alternating count of faces with value `<= s`.
pub fn euler_curve(cx: &FilteredComplex, grid: &[f64]) -> Vec<i64> {
    let mut out = Vec::with_capacity(grid.len());
    let mut chi = 0i64;
    let mut k = 0;
    for &s in grid {
        while k < cx.faces.len() && cx.faces[k].value <= s {
            chi += if cx.faces[k].dim % 2 == 0 { 1 } else { -1 };
            k += 1;
        }
        out.push(chi);
    }
    out
}

/// Birth and death of the feature each selected `(q+1)`-face kills in its
/// local complex, in the order of [`select_faces`]. `None` where the face is
/// not in its local complex or is positive there.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalPairs {
    pub faces: Vec<usize>,
    pub pairs: Vec<Option<(f64, f64)>>,
}

impl LocalPairs {
    /// Number of localized `q`-features with birth `<= b` and death `>= d`.
    pub fn count(&self, b: f64, d: f64) -> Result<usize, PersistenceError> {
        if b > d {
            return Err(PersistenceError::BirthAfterDeath { b, d });
        }
        Ok(self
            .pairs
            .iter()
            .flatten()
            .filter(|(bf, df)| *bf <= b && *df >= d)
            .count())
    }
}

/// Local complex around a face: every closed cell whose vertices all lie in
/// `z + [-m, m]^p`, with `z` the face centroid.
fn local_cells(tess: &Tessellation, z: &Vec3, m: f64) -> Vec<usize> {
    let w = tess.window();
    let p = tess.dim();
    (0..tess.cell_count())
        .filter(|&c| {
            tess.cells()[c].vertices.iter().all(|&v| {
                let d = w.displacement(z, &tess.vertex_position(v));
                (0..p).all(|k| d[k].abs() <= m)
            })
        })
        .collect()
}

/// Closure of a set of cells, as a per-dimension membership mask.
fn closure(tess: &Tessellation, cells: &[usize]) -> Vec<Vec<bool>> {
    let p = tess.dim();
    let mut mask: Vec<Vec<bool>> = (0..=p).map(|q| vec![false; tess.faces(q).len()]).collect();
    for &c in cells {
        mask[p][c] = true;
    }
    for q in (1..=p).rev() {
        for id in 0..tess.faces(q).len() {
            if mask[q][id] {
                for &b in &tess.face(q, id).boundary {
                    mask[q - 1][b] = true;
                }
            }
        }
    }
    mask
}

fn local_pairs_for(
    tess: &Tessellation,
    fv: &FaceValues,
    cells: &[usize],
    q: usize,
    faces: &[usize],
) -> Vec<Option<(f64, f64)>> {
    let mask = closure(tess, cells);
    let cx = FilteredComplex::from_values(tess, fv, |d, id| mask[d][id]);
    let pairing = reduce_pairing(&cx).expect("filtration values are repaired to be monotone");
    faces
        .iter()
        .map(|&f| {
            let j = cx.position(q + 1, f)?;
            match pairing.partner[j] {
                Some(i) if i < j => Some((cx.faces[i].value, cx.faces[j].value)),
                _ => None,
            }
        })
        .collect()
}

fn check_localization(tess: &Tessellation, m: f64) -> Result<(), PersistenceError> {
    let half = tess.window().edge_length / 2.0;
    let ok = m > 0.0 && (!tess.window().periodic || m < half);
    if ok {
        Ok(())
    } else {
        Err(PersistenceError::BadLocalization { m, half })
    }
}

/// Localized pairs for the `(q+1)`-faces selected with parameter `m`. Faces
/// whose sub-windows contain the same cells share one reduction.
pub fn m_localized_pairs(
    tess: &Tessellation,
    m: f64,
    q: usize,
    noise: &NoiseConfig,
) -> Result<LocalPairs, PersistenceError> {
    check_localization(tess, m)?;
    let fv = face_values(tess, noise);
    let faces = select_faces(tess, q + 1, m);
    let signatures: Vec<Vec<usize>> = faces
        .par_iter()
        .map(|&f| local_cells(tess, &tess.face(q + 1, f).centroid(), m))
        .collect();
    let mut groups: HashMap<&[usize], Vec<usize>> = HashMap::new();
    for (k, sig) in signatures.iter().enumerate() {
        groups.entry(sig.as_slice()).or_default().push(k);
    }
    let mut groups: Vec<(&[usize], Vec<usize>)> = groups.into_iter().collect();
    groups.sort_by_key(|(_, members)| members[0]);
    let solved: Vec<(Vec<usize>, Vec<Option<(f64, f64)>>)> = groups
        .par_iter()
        .map(|(cells, members)| {
            let ids: Vec<usize> = members.iter().map(|&k| faces[k]).collect();
            (members.clone(), local_pairs_for(tess, &fv, cells, q, &ids))
        })
        .collect();
    let mut pairs = vec![None; faces.len()];
    for (members, res) in solved {
        for (k, r) in members.into_iter().zip(res) {
            pairs[k] = r;
        }
    }
    Ok(LocalPairs { faces, pairs })
}

/// The same pairs with one reduction per face and no sharing.
pub fn m_localized_pairs_naive(
    tess: &Tessellation,
    m: f64,
    q: usize,
    noise: &NoiseConfig,
) -> Result<LocalPairs, PersistenceError> {
    check_localization(tess, m)?;
    let fv = face_values(tess, noise);
    let faces = select_faces(tess, q + 1, m);
    let pairs = faces
        .iter()
        .map(|&f| {
            let cells = local_cells(tess, &tess.face(q + 1, f).centroid(), m);
            local_pairs_for(tess, &fv, &cells, q, &[f])[0]
        })
        .collect();
    Ok(LocalPairs { faces, pairs })
}

/// M-localized persistent Betti number of `q`-features.
pub fn m_localized_betti(
    tess: &Tessellation,
    m: f64,
    q: usize,
    b: f64,
    d: f64,
    noise: &NoiseConfig,
) -> Result<usize, PersistenceError> {
    if b > d {
        return Err(PersistenceError::BirthAfterDeath { b, d });
    }
    m_localized_pairs(tess, m, q, noise)?.count(b, d)
}
