//! Per-face measures such as area and inradius.

use nalgebra::{Matrix3, Vector2};
use thiserror::Error;

use super::{Face, GeometryError, Tessellation, Vec3};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InradiusError {
    #[error("a polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon has zero area")]
    Flat,
    #[error("polygon vertices are not coplanar")]
    NonPlanar,
    #[error("polygon is not convex")]
    NonConvex,
    #[error("expected {expected} edge thicknesses, got {got}")]
    ThicknessCount { expected: usize, got: usize },
    #[error("edge thickness {0} is negative or not finite")]
    BadThickness(f64),
}

/// Orthonormal frame in the plane of a polygon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceFrame {
    pub origin: Vec3,
    pub u: Vec3,
    pub v: Vec3,
    pub normal: Vec3,
}

impl FaceFrame {
    pub fn project(&self, p: &Vec3) -> Vector2<f64> {
        let d = p - self.origin;
        Vector2::new(d.dot(&self.u), d.dot(&self.v))
    }

    pub fn lift(&self, q: &Vector2<f64>) -> Vec3 {
        self.origin + self.u * q.x + self.v * q.y
    }
}

fn newell(coords: &[Vec3]) -> Vec3 {
    let n = coords.len();
    let c = coords.iter().fold(Vec3::zeros(), |a, p| a + p) / n.max(1) as f64;
    (0..n).fold(Vec3::zeros(), |acc, k| {
        acc + (coords[k] - c).cross(&(coords[(k + 1) % n] - c))
    })
}

/// Area of a planar polygon given in cyclic order.
pub fn polygon_area(coords: &[Vec3]) -> f64 {
    if coords.len() < 3 {
        return 0.0;
    }
    0.5 * newell(coords).norm()
}

/// Frame with origin at the vertex centroid and normal along the polygon's
/// orientation. `None` for polygons of zero area.
pub fn face_frame(coords: &[Vec3]) -> Option<FaceFrame> {
    if coords.len() < 3 {
        return None;
    }
    let nv = newell(coords);
    let len = nv.norm();
    if !(len > 0.0) {
        return None;
    }
    let normal = nv / len;
    let origin = coords.iter().fold(Vec3::zeros(), |a, p| a + p) / coords.len() as f64;
    let far = coords
        .iter()
        .max_by(|a, b| (*a - origin).norm().total_cmp(&(*b - origin).norm()))?;
    let d = far - origin;
    let u = (d - normal * d.dot(&normal)).try_normalize(0.0)?;
    let v = normal.cross(&u);
    Some(FaceFrame {
        origin,
        u,
        v,
        normal,
    })
}

/// Largest `t` such that some point of the polygon is at distance at least
/// `t + rho_j` from every edge line `j`, clamped at 0. Edge `j` joins
/// vertex `j` to vertex `j + 1`.
///
/// The maximum is a 3-variable LP; its optimum sits on a vertex of the
/// feasible region, so the vertices are enumerated directly.
pub fn polygon_inradius(coords: &[Vec3], thickness: Option<&[f64]>) -> Result<f64, InradiusError> {
    let m = coords.len();
    if m < 3 {
        return Err(InradiusError::TooFewVertices(m));
    }
    if let Some(t) = thickness {
        if t.len() != m {
            return Err(InradiusError::ThicknessCount {
                expected: m,
                got: t.len(),
            });
        }
        if let Some(&bad) = t.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(InradiusError::BadThickness(bad));
        }
    }
    let frame = face_frame(coords).ok_or(InradiusError::Flat)?;
    let scale = coords
        .iter()
        .map(|p| (p - frame.origin).norm())
        .fold(0.0, f64::max);
    if coords
        .iter()
        .any(|p| (p - frame.origin).dot(&frame.normal).abs() > 1e-8 * scale)
    {
        return Err(InradiusError::NonPlanar);
    }
    let q: Vec<Vector2<f64>> = coords.iter().map(|p| frame.project(p)).collect();
    // the Newell normal makes the projected polygon counter-clockwise
    for k in 0..m {
        let a = q[(k + 1) % m] - q[k];
        let b = q[(k + 2) % m] - q[(k + 1) % m];
        if a.perp(&b) < -1e-12 * scale * scale {
            return Err(InradiusError::NonConvex);
        }
    }

    // rows: n_x x + n_y y - t >= rhs
    let mut rows: Vec<(Vector2<f64>, f64)> = Vec::with_capacity(m);
    for k in 0..m {
        let a = q[k];
        let d = q[(k + 1) % m] - a;
        let len = d.norm();
        if len <= 1e-14 * scale {
            continue;
        }
        let n = Vector2::new(-d.y, d.x) / len;
        let rho = thickness.map_or(0.0, |t| t[k]);
        rows.push((n, n.dot(&a) + rho));
    }
    if rows.len() < 3 {
        return Err(InradiusError::Flat);
    }
    let eps = 1e-12 * scale.max(1e-300);
    let mut best = f64::NEG_INFINITY;
    let r = rows.len();
    for i in 0..r {
        for j in i + 1..r {
            for k in j + 1..r {
                let mat = Matrix3::new(
                    rows[i].0.x,
                    rows[i].0.y,
                    -1.0,
                    rows[j].0.x,
                    rows[j].0.y,
                    -1.0,
                    rows[k].0.x,
                    rows[k].0.y,
                    -1.0,
                );
                let rhs = Vec3::new(rows[i].1, rows[j].1, rows[k].1);
                let Some(sol) = mat.lu().solve(&rhs) else {
                    continue;
                };
                if !sol.iter().all(|x| x.is_finite()) || sol.z <= best {
                    continue;
                }
                let x = Vector2::new(sol.x, sol.y);
                if rows.iter().all(|(n, c)| n.dot(&x) - sol.z >= c - eps) {
                    best = sol.z;
                }
            }
        }
    }
    if !best.is_finite() {
        return Err(InradiusError::Flat);
    }
    Ok(best.max(0.0))
}

/// Inradius of a 2-face with optional per-edge thicknesses.
pub fn face_inradius(face: &Face, thickness: Option<&[f64]>) -> Result<f64, InradiusError> {
    polygon_inradius(&face.coords, thickness)
}

/// Largest distance between a point of the face and the center of an
/// incident cell. On 3D tessellations 2-faces need exactly two incident
/// cells; other faces use all their cells.
pub fn face_eccentricity(tess: &Tessellation, q: usize, id: usize) -> Result<f64, GeometryError> {
    let face = tess.face(q, id);
    let needs_two = tess.dim() == 3 && q == 2;
    if (needs_two && face.cells.len() != 2) || face.cells.is_empty() {
        return Err(GeometryError::NotInterior {
            face: id,
            cells: face.cells.len(),
        });
    }
    Ok(eccentricity_of(face))
}

pub(crate) fn eccentricity_of(face: &Face) -> f64 {
    let mut best = 0.0f64;
    for p in &face.coords {
        for c in &face.cell_centers {
            best = best.max((p - c).norm());
        }
    }
    best
}
