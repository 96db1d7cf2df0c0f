//! Tessellation-adapted filtration: whole faces enter in order of the
//! circumradius of their (optionally perturbed) vertex sets.

use std::cmp::Ordering;
use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, UnitBall};
use serde::{Deserialize, Serialize};

use crate::generators::rng_from;
use crate::geometry::{face_eccentricity, face_inradius, min_enclosing_ball, Tessellation, Vec3};
use crate::seeds::mix;

/// Law of the per-edge thicknesses used by the inradius statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThicknessLaw {
    Constant { rho: f64 },
    Uniform { low: f64, high: f64 },
}

/// Measurement noise. The default is noiseless.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Radius of the ball each vertex is displaced within.
    #[serde(default)]
    pub vertex_noise_h0: f64,
    #[serde(default)]
    pub edge_thickness: Option<ThicknessLaw>,
    #[serde(default)]
    pub seed: u64,
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.vertex_noise_h0.is_finite() && self.vertex_noise_h0 >= 0.0) {
            return Err(format!(
                "vertex_noise_h0 must be nonnegative, got {}",
                self.vertex_noise_h0
            ));
        }
        match self.edge_thickness {
            Some(ThicknessLaw::Constant { rho }) if !(rho.is_finite() && rho >= 0.0) => {
                Err(format!("edge thickness must be nonnegative, got {rho}"))
            }
            Some(ThicknessLaw::Uniform { low, high })
                if !(low.is_finite() && high.is_finite() && 0.0 <= low && low <= high) =>
            {
                Err(format!("edge thickness range [{low}, {high}] is invalid"))
            }
            _ => Ok(()),
        }
    }

    /// Displacement of every vertex, uniform in the ball of radius `h0`.
    pub fn vertex_offsets(&self, n_vertices: usize) -> Vec<Vec3> {
        if self.vertex_noise_h0 == 0.0 {
            return vec![Vec3::zeros(); n_vertices];
        }
        let mut rng = rng_from(mix(self.seed, &[1]));
        (0..n_vertices)
            .map(|_| {
                let [x, y, z]: [f64; 3] = UnitBall.sample(&mut rng);
                Vec3::new(x, y, z) * self.vertex_noise_h0
            })
            .collect()
    }

    /// One thickness per edge of the tessellation, `None` without a law.
    pub fn edge_thicknesses(&self, n_edges: usize) -> Option<Vec<f64>> {
        let law = self.edge_thickness?;
        let mut rng = rng_from(mix(self.seed, &[2]));
        Some(
            (0..n_edges)
                .map(|_| match law {
                    ThicknessLaw::Constant { rho } => rho,
                    ThicknessLaw::Uniform { low, high } => {
                        if high > low {
                            rng.random_range(low..high)
                        } else {
                            low
                        }
                    }
                })
                .collect(),
        )
    }
}

/// One face in filtration order.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredFace {
    pub dim: usize,
    /// Id of the face in the tessellation.
    pub id: usize,
    pub value: f64,
    /// Sorted vertex ids.
    pub vertices: Vec<usize>,
    /// Center of the minimum enclosing ball, wrapped into the window.
    pub center: Vec3,
    /// Positions of the boundary faces with odd multiplicity, ascending.
    pub boundary: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct FilteredComplex {
    pub faces: Vec<FilteredFace>,
    /// Values that had to be raised to their boundary's maximum by more
    /// than round-off.
    pub fixups: usize,
    /// `position[q][id]` is the filtration index of a face, if present.
    position: Vec<Vec<Option<usize>>>,
}

/// Filtration value and enclosing-ball center of every face, before any
/// monotonicity repair.
#[derive(Debug, Clone)]
pub struct FaceValues {
    pub values: Vec<Vec<f64>>,
    pub centers: Vec<Vec<Vec3>>,
    pub fixups: usize,
}

/// Circumradii of all faces on the perturbed vertex positions, raised where
/// needed so every face is at least as late as its boundary.
pub fn face_values(tess: &Tessellation, noise: &NoiseConfig) -> FaceValues {
    let offsets = noise.vertex_offsets(tess.faces(0).len());
    let window = tess.window();
    let mut values: Vec<Vec<f64>> = Vec::with_capacity(tess.dim() + 1);
    let mut centers: Vec<Vec<Vec3>> = Vec::with_capacity(tess.dim() + 1);
    let mut fixups = 0;
    for q in 0..=tess.dim() {
        let mut vq = Vec::with_capacity(tess.faces(q).len());
        let mut cq = Vec::with_capacity(tess.faces(q).len());
        for f in tess.faces(q) {
            if q == 0 {
                vq.push(0.0);
                cq.push(window.wrap_point(&(f.coords[0] + offsets[f.vertices[0]])));
                continue;
            }
            let pts: Vec<Vec3> = f
                .coords
                .iter()
                .zip(&f.vertices)
                .map(|(c, &v)| c + offsets[v])
                .collect();
            let ball = min_enclosing_ball(&pts);
            let floor = f
                .boundary
                .iter()
                .map(|&b| values[q - 1][b])
                .fold(0.0, f64::max);
            let mut value = ball.radius;
            if value < floor {
                // round-off in the enclosing ball is repaired but not reported
                if floor - value > 1e-12 * floor {
                    fixups += 1;
                }
                value = floor;
            }
            vq.push(value);
            cq.push(window.wrap_point(&ball.center));
        }
        values.push(vq);
        centers.push(cq);
    }
    FaceValues {
        values,
        centers,
        fixups,
    }
}

fn order(a: &FilteredFace, b: &FilteredFace) -> Ordering {
    a.value
        .total_cmp(&b.value)
        .then(a.dim.cmp(&b.dim))
        .then(a.center.x.total_cmp(&b.center.x))
        .then(a.center.y.total_cmp(&b.center.y))
        .then(a.center.z.total_cmp(&b.center.z))
        .then(a.id.cmp(&b.id))
}

impl FilteredComplex {
    /// Orders the faces selected by `keep` by (value, dimension, left-most
    /// enclosing-ball center, id). `keep` must select a closed subcomplex.
    pub fn from_values(
        tess: &Tessellation,
        fv: &FaceValues,
        mut keep: impl FnMut(usize, usize) -> bool,
    ) -> FilteredComplex {
        let mut faces = Vec::new();
        for q in 0..=tess.dim() {
            for (id, f) in tess.faces(q).iter().enumerate() {
                if !keep(q, id) {
                    continue;
                }
                let mut vertices = f.vertices.clone();
                vertices.sort_unstable();
                vertices.dedup();
                faces.push(FilteredFace {
                    dim: q,
                    id,
                    value: fv.values[q][id],
                    vertices,
                    center: fv.centers[q][id],
                    boundary: Vec::new(),
                });
            }
        }
        faces.sort_by(order);
        let mut position: Vec<Vec<Option<usize>>> = (0..=tess.dim())
            .map(|q| vec![None; tess.faces(q).len()])
            .collect();
        for (i, f) in faces.iter().enumerate() {
            position[f.dim][f.id] = Some(i);
        }
        for f in faces.iter_mut() {
            if f.dim == 0 {
                continue;
            }
            let mut b: Vec<usize> = tess
                .face(f.dim, f.id)
                .boundary
                .iter()
                .map(|&g| position[f.dim - 1][g].expect("filtration subset must be closed"))
                .collect();
            b.sort_unstable();
            // Z/2 coefficients: faces met twice cancel
            let mut odd = Vec::with_capacity(b.len());
            let mut k = 0;
            while k < b.len() {
                let mut m = 1;
                while k + m < b.len() && b[k + m] == b[k] {
                    m += 1;
                }
                if m % 2 == 1 {
                    odd.push(b[k]);
                }
                k += m;
            }
            f.boundary = odd;
        }
        FilteredComplex {
            faces,
            fixups: fv.fixups,
            position,
        }
    }

    /// Complex from faces already in filtration order, with `boundary` given
    /// as filtration indices. Face ids must be unique per dimension.
    pub fn from_faces(faces: Vec<FilteredFace>) -> FilteredComplex {
        let max_dim = faces.iter().map(|f| f.dim).max().unwrap_or(0);
        let mut position: Vec<Vec<Option<usize>>> = vec![Vec::new(); max_dim + 1];
        for (i, f) in faces.iter().enumerate() {
            let slot = &mut position[f.dim];
            if slot.len() <= f.id {
                slot.resize(f.id + 1, None);
            }
            slot[f.id] = Some(i);
        }
        FilteredComplex {
            faces,
            fixups: 0,
            position,
        }
    }

    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    /// Filtration index of a tessellation face.
    pub fn position(&self, q: usize, id: usize) -> Option<usize> {
        self.position.get(q)?.get(id).copied().flatten()
    }

    pub fn max_dim(&self) -> usize {
        self.faces.iter().map(|f| f.dim).max().unwrap_or(0)
    }

    /// `(face id, dim, value, vertex ids)` per face in filtration order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "face_id,dim,value,vertex_ids")?;
        for f in &self.faces {
            let vs: Vec<String> = f.vertices.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{},{},{:?},{}", f.id, f.dim, f.value, vs.join(" "))?;
        }
        Ok(())
    }
}

/// Full tessellation-adapted filtration.
pub fn build_filtration(tess: &Tessellation, noise: &NoiseConfig) -> FilteredComplex {
    let fv = face_values(tess, noise);
    FilteredComplex::from_values(tess, &fv, |_, _| true)
}

/// Faces with eccentricity at most `m` and, for 2-faces, inradius at least
/// `1/m`. `m = inf` keeps every face. Faces without a defined eccentricity
/// (window-boundary faces) are dropped for finite `m`.
pub fn select_faces(tess: &Tessellation, q: usize, m: f64) -> Vec<usize> {
    let n = tess.faces(q).len();
    if m == f64::INFINITY {
        return (0..n).collect();
    }
    (0..n)
        .filter(|&id| {
            let Ok(ecc) = face_eccentricity(tess, q, id) else {
                return false;
            };
            if ecc > m {
                return false;
            }
            if q == 2 {
                matches!(face_inradius(tess.face(2, id), None), Ok(r) if r >= 1.0 / m)
            } else {
                true
            }
        })
        .collect()
}
