//! Laguerre (power) tessellations on cubic windows and per-face geometric
//! measures.
//!
//! A [`Tessellation`] is stored as a full face lattice: vertices, edges,
//! 2-faces and cells with symmetric incidence. Construction goes through a
//! regular triangulation of the weighted generators; on periodic windows the
//! generators are replicated into neighbouring copies of the window and faces
//! are deduplicated modulo translation.

mod bounded;
pub mod clip;
mod format;
mod measures;
mod meb;
mod periodic;
pub mod predicates;
mod triangulation;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use format::{export_tessellation, import_tessellation, read_tessellation, write_tessellation};
pub use measures::{
    face_eccentricity, face_frame, face_inradius, polygon_area, polygon_inradius, FaceFrame,
    InradiusError,
};
pub use meb::{circumradius, min_enclosing_ball, Ball};

pub type Vec3 = nalgebra::Vector3<f64>;

/// Relative tolerance below which power-equidistance is treated as a
/// degeneracy.
pub const DEGENERACY_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("need at least {required} generators, got {got}")]
    TooFewPoints { required: usize, got: usize },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("periodic window too small for the generator configuration: {0}")]
    WindowTooSmall(String),
    #[error("face {face} has {cells} incident cell(s); eccentricity needs exactly two")]
    NotInterior { face: usize, cells: usize },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("tessellation invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Inradius(#[from] InradiusError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Generator location with its Laguerre radius (weight = radius squared).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkedPoint {
    pub location: Vec3,
    pub radius: f64,
}

impl MarkedPoint {
    pub fn new(location: Vec3, radius: f64) -> Self {
        MarkedPoint { location, radius }
    }

    pub fn unmarked(location: Vec3) -> Self {
        MarkedPoint {
            location,
            radius: 0.0,
        }
    }

    pub fn weight(&self) -> f64 {
        self.radius * self.radius
    }
}

/// Cubic observation window `[0, edge_length)^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub edge_length: f64,
    pub periodic: bool,
}

impl Window {
    pub fn periodic(edge_length: f64) -> Self {
        Window {
            edge_length,
            periodic: true,
        }
    }

    pub fn bounded(edge_length: f64) -> Self {
        Window {
            edge_length,
            periodic: false,
        }
    }

    pub fn unit_torus() -> Self {
        Self::periodic(1.0)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.edge_length > 0.0 && self.edge_length.is_finite()) {
            return Err(GeometryError::InvalidInput(format!(
                "window edge length must be positive, got {}",
                self.edge_length
            )));
        }
        Ok(())
    }

    pub fn volume(&self, dim: usize) -> f64 {
        self.edge_length.powi(dim as i32)
    }

    /// Wraps a coordinate into `[0, L)` on periodic windows.
    pub fn wrap(&self, x: f64) -> f64 {
        if !self.periodic {
            return x;
        }
        let l = self.edge_length;
        let y = x - l * (x / l).floor();
        if y >= l {
            0.0
        } else {
            y
        }
    }

    pub fn wrap_point(&self, p: &Vec3) -> Vec3 {
        Vec3::new(self.wrap(p.x), self.wrap(p.y), self.wrap(p.z))
    }

    /// Minimum-image displacement `b - a`.
    pub fn displacement(&self, a: &Vec3, b: &Vec3) -> Vec3 {
        let mut d = b - a;
        if self.periodic {
            let l = self.edge_length;
            for k in 0..3 {
                d[k] -= l * (d[k] / l).round();
            }
        }
        d
    }

    /// Translate of `p` nearest to `anchor`.
    pub fn unwrap_near(&self, anchor: &Vec3, p: &Vec3) -> Vec3 {
        p + self.translate(&(anchor - p)) * self.edge_length
    }

    /// Lattice translate, in units of the edge length, nearest to `d`. Zero
    /// on bounded windows.
    pub fn translate(&self, d: &Vec3) -> Vec3 {
        if self.periodic {
            (d / self.edge_length).map(f64::round)
        } else {
            Vec3::zeros()
        }
    }

    pub fn distance(&self, a: &Vec3, b: &Vec3) -> f64 {
        self.displacement(a, b).norm()
    }
}

/// One `q`-face of a tessellation.
///
/// `coords` and `cell_centers` are expressed in a single unwrapped frame, so
/// measures can be computed on the record alone. On periodic windows the
/// first vertex keeps its wrapped position and the others sit at the
/// translates that make the face connected.
#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    /// Vertex ids. For 2-faces the order is cyclic around the polygon.
    pub vertices: Vec<usize>,
    pub coords: Vec<Vec3>,
    /// Ids of the `(q-1)`-faces, with multiplicity.
    pub boundary: Vec<usize>,
    /// Ids of the incident `(q+1)`-faces.
    pub cofaces: Vec<usize>,
    /// Generator ids of the incident cells.
    pub cells: Vec<usize>,
    pub cell_centers: Vec<Vec3>,
}

impl Face {
    pub fn centroid(&self) -> Vec3 {
        let n = self.coords.len().max(1) as f64;
        self.coords.iter().fold(Vec3::zeros(), |acc, c| acc + c) / n
    }
}

/// Full face lattice of a Laguerre tessellation.
#[derive(Debug, Clone)]
pub struct Tessellation {
    dim: usize,
    window: Window,
    generators: Vec<MarkedPoint>,
    empty: Vec<bool>,
    faces: Vec<Vec<Face>>,
    cell_of_generator: Vec<Option<usize>>,
}

impl Tessellation {
    /// Assembles a tessellation from its parts. Cofaces, cell lookup and the
    /// per-face frames are derived here; callers supply vertex ids, boundary
    /// lists and incident cells.
    pub(crate) fn assemble(
        dim: usize,
        window: Window,
        generators: Vec<MarkedPoint>,
        vertex_positions: Vec<Vec3>,
        mut faces: Vec<Vec<Face>>,
    ) -> Result<Self, GeometryError> {
        assert_eq!(faces.len(), dim);
        let mut verts: Vec<Face> = vertex_positions
            .iter()
            .enumerate()
            .map(|(i, p)| Face {
                vertices: vec![i],
                coords: vec![*p],
                boundary: vec![],
                cofaces: vec![],
                cells: vec![],
                cell_centers: vec![],
            })
            .collect();
        faces.insert(0, std::mem::take(&mut verts));
        for list in faces.iter_mut() {
            for f in list.iter_mut() {
                f.boundary.sort_unstable();
            }
        }
        let mut tess = Tessellation {
            dim,
            window,
            empty: vec![true; generators.len()],
            cell_of_generator: vec![None; generators.len()],
            generators,
            faces,
        };
        tess.derive_cofaces();
        tess.derive_vertex_cells();
        tess.refresh_frames();
        if tess.window.periodic {
            if let Some(msg) = tess.self_image_contact() {
                return Err(GeometryError::WindowTooSmall(msg));
            }
        }
        for (ci, cell) in tess.faces[dim].iter().enumerate() {
            let g = *cell
                .cells
                .first()
                .ok_or_else(|| GeometryError::Invariant(format!("cell {ci} has no generator")))?;
            if g >= tess.generators.len() {
                return Err(GeometryError::Invariant(format!(
                    "cell {ci} refers to unknown generator {g}"
                )));
            }
            if tess.cell_of_generator[g].is_some() {
                return Err(GeometryError::Invariant(format!(
                    "generator {g} owns more than one cell"
                )));
            }
            tess.cell_of_generator[g] = Some(ci);
            tess.empty[g] = false;
        }
        Ok(tess)
    }

    /// A face touching its own periodic image cannot be described by vertex
    /// ids alone: its boundary faces then sit at translates that disagree
    /// with the face's own unwrapping.
    fn self_image_contact(&self) -> Option<String> {
        let tol = 1e-9 * self.window.edge_length;
        for e in self.faces.get(1).into_iter().flatten() {
            if e.vertices.first() == e.vertices.last() {
                return Some(format!(
                    "an edge joins vertex {} to its own image",
                    e.vertices[0]
                ));
            }
        }
        for q in 2..=self.dim {
            for (i, f) in self.faces[q].iter().enumerate() {
                let mut ids = f.vertices.clone();
                ids.sort_unstable();
                ids.dedup();
                if ids.len() != f.vertices.len() {
                    return Some(format!(
                        "{q}-face {i} repeats a vertex through its periodic image"
                    ));
                }
                let at = |v: usize| f.vertices.iter().position(|&w| w == v).map(|k| f.coords[k]);
                for &b in &f.boundary {
                    let g = &self.faces[q - 1][b];
                    let Some(first) = at(g.vertices[0]) else {
                        return Some(format!("{q}-face {i} misses a boundary vertex"));
                    };
                    let shift = first - g.coords[0];
                    for (v, c) in g.vertices.iter().zip(&g.coords) {
                        match at(*v) {
                            Some(p) if (p - c - shift).norm() <= tol => {}
                            _ => {
                                return Some(format!(
                                "{q}-face {i} sees boundary face {b} at two different translates"
                            ))
                            }
                        }
                    }
                }
            }
        }
        None
    }

    fn derive_cofaces(&mut self) {
        for q in 1..=self.dim {
            let (lower, upper) = self.faces.split_at_mut(q);
            for f in lower[q - 1].iter_mut() {
                f.cofaces.clear();
            }
            for (fi, f) in upper[0].iter().enumerate() {
                for &b in &f.boundary {
                    let cof = &mut lower[q - 1][b].cofaces;
                    if !cof.contains(&fi) {
                        cof.push(fi);
                    }
                }
            }
        }
    }

    /// Vertices take their incident cells from the edges around them when the
    /// caller did not provide them.
    fn derive_vertex_cells(&mut self) {
        if self.dim < 1 {
            return;
        }
        for vi in 0..self.faces[0].len() {
            if !self.faces[0][vi].cells.is_empty() {
                continue;
            }
            let mut cells: Vec<usize> = Vec::new();
            for &e in &self.faces[0][vi].cofaces {
                for &c in &self.faces[1][e].cells {
                    if !cells.contains(&c) {
                        cells.push(c);
                    }
                }
            }
            cells.sort_unstable();
            self.faces[0][vi].cells = cells;
        }
    }

    /// Fills in every face's coordinate frame from the vertex positions.
    /// Frames a builder already supplied, with one coordinate per vertex,
    /// are kept.
    pub(crate) fn refresh_frames(&mut self) {
        let positions: Vec<Vec3> = self.faces[0].iter().map(|v| v.coords[0]).collect();
        let window = self.window;
        // vertex pairs of each face's edges, for unwrapping faces wider than
        // half the window one short step at a time
        let mut face_edges: Vec<Vec<Vec<(usize, usize)>>> = vec![Vec::new(); self.faces.len()];
        if self.faces.len() > 1 {
            face_edges[1] = self.faces[1]
                .iter()
                .map(|e| vec![(e.vertices[0], e.vertices[e.vertices.len() - 1])])
                .collect();
        }
        for q in 2..self.faces.len() {
            face_edges[q] = self.faces[q]
                .iter()
                .map(|f| {
                    let mut edges: Vec<(usize, usize)> = f
                        .boundary
                        .iter()
                        .flat_map(|&g| face_edges[q - 1][g].iter().copied())
                        .collect();
                    edges.sort_unstable();
                    edges.dedup();
                    edges
                })
                .collect();
        }
        let gens = &self.generators;
        for (q, list) in self.faces.iter_mut().enumerate() {
            for (id, f) in list.iter_mut().enumerate() {
                let anchor = positions[f.vertices[0]];
                let supplied = q > 0 && f.coords.len() == f.vertices.len();
                if q == 1 && !supplied {
                    f.coords = f
                        .vertices
                        .iter()
                        .map(|&v| window.unwrap_near(&anchor, &positions[v]))
                        .collect();
                } else if q > 1 && !supplied {
                    let mut placed: HashMap<usize, Vec3> = HashMap::new();
                    placed.insert(f.vertices[0], anchor);
                    let edges = &face_edges[q][id];
                    let mut grew = true;
                    while grew && placed.len() < f.vertices.len() {
                        grew = false;
                        for &(a, b) in edges {
                            for (from, to) in [(a, b), (b, a)] {
                                if let (Some(&p), false) =
                                    (placed.get(&from), placed.contains_key(&to))
                                {
                                    placed.insert(to, window.unwrap_near(&p, &positions[to]));
                                    grew = true;
                                }
                            }
                        }
                    }
                    f.coords = f
                        .vertices
                        .iter()
                        .map(|v| {
                            placed
                                .get(v)
                                .copied()
                                .unwrap_or_else(|| window.unwrap_near(&anchor, &positions[*v]))
                        })
                        .collect();
                }
                if supplied && f.cell_centers.len() == f.cells.len() {
                    continue;
                }
                let reference = if q > 0 { f.centroid() } else { anchor };
                f.cell_centers = f
                    .cells
                    .iter()
                    .map(|&c| window.unwrap_near(&reference, &gens[c].location))
                    .collect();
            }
        }
    }

    /// Ambient dimension `p`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn generators(&self) -> &[MarkedPoint] {
        &self.generators
    }

    /// Whether the generator's Laguerre cell is empty.
    pub fn is_empty_cell(&self, generator: usize) -> bool {
        self.empty[generator]
    }

    pub fn empty_cell_count(&self) -> usize {
        self.empty.iter().filter(|&&e| e).count()
    }

    /// All `q`-faces, `q = 0..=dim`.
    pub fn faces(&self, q: usize) -> &[Face] {
        &self.faces[q]
    }

    pub fn face(&self, q: usize, id: usize) -> &Face {
        &self.faces[q][id]
    }

    pub fn vertex_position(&self, id: usize) -> Vec3 {
        self.faces[0][id].coords[0]
    }

    pub fn cells(&self) -> &[Face] {
        &self.faces[self.dim]
    }

    pub fn cell_count(&self) -> usize {
        self.faces[self.dim].len()
    }

    /// Cell id of a generator, `None` for empty cells.
    pub fn cell_of_generator(&self, generator: usize) -> Option<usize> {
        self.cell_of_generator[generator]
    }

    /// Face counts per dimension.
    pub fn face_counts(&self) -> Vec<usize> {
        self.faces.iter().map(Vec::len).collect()
    }

    /// Alternating sum of the face counts.
    pub fn euler_characteristic(&self) -> i64 {
        self.faces
            .iter()
            .enumerate()
            .map(|(q, f)| {
                if q % 2 == 0 {
                    f.len() as i64
                } else {
                    -(f.len() as i64)
                }
            })
            .sum()
    }

    /// Incident generator with the lexicographically smallest location.
    pub fn cell_of_face(&self, q: usize, id: usize) -> Option<usize> {
        self.faces[q][id].cells.iter().copied().min_by(|&a, &b| {
            let pa = &self.generators[a].location;
            let pb = &self.generators[b].location;
            pa.x.total_cmp(&pb.x)
                .then(pa.y.total_cmp(&pb.y))
                .then(pa.z.total_cmp(&pb.z))
                .then(a.cmp(&b))
        })
    }

    /// 2-faces shared by two cells. In bounded windows the remaining
    /// 2-faces lie on the window boundary.
    pub fn interior_faces(&self) -> impl Iterator<Item = (usize, &Face)> {
        let q = 2.min(self.dim);
        let need = if self.dim == 2 { 1 } else { 2 };
        self.faces[q]
            .iter()
            .enumerate()
            .filter(move |(_, f)| f.cells.len() >= need)
    }

    /// Checks the structural invariants and returns the list of violations.
    pub fn check_invariants(&self) -> Vec<String> {
        let mut problems = Vec::new();
        if self.faces.len() != self.dim + 1 {
            problems.push(format!(
                "expected {} face dimensions, found {}",
                self.dim + 1,
                self.faces.len()
            ));
            return problems;
        }
        for q in 0..self.dim {
            for (i, f) in self.faces[q].iter().enumerate() {
                if f.cofaces.is_empty() {
                    problems.push(format!("{q}-face {i} has no incident {}-face", q + 1));
                }
                for &c in &f.cofaces {
                    if !self.faces[q + 1][c].boundary.contains(&i) {
                        problems.push(format!(
                            "{q}-face {i} lists coface {c} which does not list it back"
                        ));
                    }
                }
            }
        }
        for q in 1..=self.dim {
            for (i, f) in self.faces[q].iter().enumerate() {
                if f.vertices.is_empty() {
                    problems.push(format!("{q}-face {i} has no vertices"));
                }
                for &b in &f.boundary {
                    if b >= self.faces[q - 1].len() {
                        problems.push(format!("{q}-face {i} has unknown boundary face {b}"));
                        continue;
                    }
                    let lower = &self.faces[q - 1][b];
                    if !lower.vertices.iter().all(|v| f.vertices.contains(v)) {
                        problems.push(format!(
                            "{q}-face {i}: boundary face {b} has vertices outside the face"
                        ));
                    }
                }
                if q >= 2 {
                    // every vertex of the face lies on some boundary face
                    for v in &f.vertices {
                        let covered = f.boundary.iter().any(|&b| {
                            self.faces[q - 1]
                                .get(b)
                                .is_some_and(|g| g.vertices.contains(v))
                        });
                        if !covered {
                            problems
                                .push(format!("{q}-face {i}: vertex {v} is not on its boundary"));
                        }
                    }
                }
            }
        }
        for (i, e) in self.faces[1.min(self.dim)].iter().enumerate() {
            if self.dim >= 1 && e.boundary.len() != 2 {
                problems.push(format!("edge {i} has {} endpoints", e.boundary.len()));
            }
        }
        if self.window.periodic && self.euler_characteristic() != 0 {
            problems.push(format!(
                "periodic complex has Euler characteristic {} instead of 0",
                self.euler_characteristic()
            ));
        }
        problems
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let problems = self.check_invariants();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(GeometryError::Invariant(problems.join("; ")))
        }
    }
}

/// Builds the Laguerre tessellation of marked points in a cubic window.
///
/// Periodic windows need at least five generators; bounded windows accept any
/// nonempty set and clip the cells to the window. Generators whose cell is
/// empty stay in the generator list and are reported by
/// [`Tessellation::is_empty_cell`].
pub fn build_laguerre(
    points: &[MarkedPoint],
    window: Window,
) -> Result<Tessellation, GeometryError> {
    window.validate()?;
    for (i, p) in points.iter().enumerate() {
        if !(p.location.iter().all(|x| x.is_finite()) && p.radius.is_finite() && p.radius >= 0.0) {
            return Err(GeometryError::InvalidInput(format!(
                "generator {i} has non-finite location or invalid radius"
            )));
        }
        let l = window.edge_length;
        if p.location.iter().any(|&x| !(0.0..l).contains(&x)) {
            return Err(GeometryError::InvalidInput(format!(
                "generator {i} lies outside the window [0, {l})^3"
            )));
        }
    }
    if window.periodic {
        if points.len() < 5 {
            return Err(GeometryError::TooFewPoints {
                required: 5,
                got: points.len(),
            });
        }
        periodic::build(points, window)
    } else {
        if points.is_empty() {
            return Err(GeometryError::TooFewPoints {
                required: 1,
                got: 0,
            });
        }
        bounded::build(points, window)
    }
}

/// Voronoi tessellation: [`build_laguerre`] with all radii zero.
pub fn build_voronoi(points: &[Vec3], window: Window) -> Result<Tessellation, GeometryError> {
    let marked: Vec<MarkedPoint> = points.iter().map(|&p| MarkedPoint::unmarked(p)).collect();
    build_laguerre(&marked, window)
}

/// Per-generator cell vertices computed by clipping against every other
/// generator (and its periodic images). Independent of the triangulation.
pub fn halfspace_cells(
    points: &[MarkedPoint],
    window: Window,
) -> Result<Vec<Option<Vec<Vec3>>>, GeometryError> {
    clip::brute_force_cells(points, window)
}
