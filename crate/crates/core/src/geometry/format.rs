//! Plain-text tessellation format.
//!
//! ```text
//! tessgof-tessellation v1
//! dim 3
//! window 1 periodic            # or: bounded
//! [generators]
//! 0 0.12 0.5 0.33 0.0          # id x y z radius
//! [vertices]
//! 0 0.2 0.41 0.9               # id x y z
//! [faces q=1]
//! 0 ; 3 7 ; 0 4 9              # id ; vertex ids ; incident cell (generator) ids
//! [faces q=2]
//! ...
//! [faces q=3]
//! ...
//! ```
//!
//! Ids in each section run from 0 in order. 2-face vertices are listed in
//! cyclic order. Boundary relations are derived from vertex-set inclusion.
//!
//! Face lines in periodic files may carry a fourth field with the lattice
//! translate of every vertex and then of every incident generator, three
//! integers apiece, placing the face in one unwrapped frame:
//!
//! ```text
//! 12 ; 3 7 ; 0 4 9 ; 0 0 0 1 0 0 0 0 0 0 0 0 1 0 0
//! ```
//!
//! Without it the frame is rebuilt by walking the face's edges, which fails
//! when an edge is longer than half the window.
//! Two-dimensional complexes use `dim 2`, z = 0 and sections up to `q=2`.
//! Everything after `#` on a line is ignored.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{Face, GeometryError, MarkedPoint, Tessellation, Vec3, Window};

pub const HEADER: &str = "tessgof-tessellation v1";

pub fn write_tessellation<W: Write>(tess: &Tessellation, mut w: W) -> std::io::Result<()> {
    let win = tess.window();
    writeln!(w, "{HEADER}")?;
    writeln!(w, "dim {}", tess.dim())?;
    writeln!(
        w,
        "window {:?} {}",
        win.edge_length,
        if win.periodic { "periodic" } else { "bounded" }
    )?;
    writeln!(w, "[generators]")?;
    writeln!(w, "# id x y z radius")?;
    for (i, g) in tess.generators().iter().enumerate() {
        let p = g.location;
        writeln!(w, "{i} {:?} {:?} {:?} {:?}", p.x, p.y, p.z, g.radius)?;
    }
    writeln!(w, "[vertices]")?;
    writeln!(w, "# id x y z")?;
    for i in 0..tess.faces(0).len() {
        let p = tess.vertex_position(i);
        writeln!(w, "{i} {:?} {:?} {:?}", p.x, p.y, p.z)?;
    }
    for q in 1..=tess.dim() {
        writeln!(w, "[faces q={q}]")?;
        if win.periodic {
            writeln!(w, "# id ; vertex ids ; incident cells ; lattice translates")?;
        } else {
            writeln!(w, "# id ; vertex ids ; incident cells")?;
        }
        for (i, f) in tess.faces(q).iter().enumerate() {
            let vs: Vec<String> = f.vertices.iter().map(|v| v.to_string()).collect();
            let cs: Vec<String> = f.cells.iter().map(|c| c.to_string()).collect();
            write!(w, "{i} ; {} ; {}", vs.join(" "), cs.join(" "))?;
            if win.periodic {
                let wrapped = f
                    .vertices
                    .iter()
                    .map(|&v| tess.vertex_position(v))
                    .chain(f.cells.iter().map(|&c| tess.generators()[c].location));
                let framed = f.coords.iter().chain(&f.cell_centers);
                let m: Vec<String> = wrapped
                    .zip(framed)
                    .flat_map(|(p, c)| {
                        let t = win.translate(&(c - p));
                        [t.x, t.y, t.z].map(|x| (x as i64).to_string())
                    })
                    .collect();
                write!(w, " ; {}", m.join(" "))?;
            }
            writeln!(w)?;
        }
    }
    Ok(())
}

pub fn export_tessellation(
    tess: &Tessellation,
    path: impl AsRef<Path>,
) -> Result<(), GeometryError> {
    let mut w = BufWriter::new(File::create(path)?);
    write_tessellation(tess, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn import_tessellation(path: impl AsRef<Path>) -> Result<Tessellation, GeometryError> {
    read_tessellation(BufReader::new(File::open(path)?))
}

fn perr(line: usize, msg: impl Into<String>) -> GeometryError {
    GeometryError::Parse {
        line,
        msg: msg.into(),
    }
}

#[derive(Debug, PartialEq)]
enum Section {
    Preamble,
    Generators,
    Vertices,
    Faces(usize),
}

fn parse_f64(tok: Option<&str>, line: usize, field: &str) -> Result<f64, GeometryError> {
    let tok = tok.ok_or_else(|| perr(line, format!("missing field `{field}`")))?;
    let x: f64 = tok
        .parse()
        .map_err(|_| perr(line, format!("field `{field}`: `{tok}` is not a number")))?;
    if !x.is_finite() {
        return Err(perr(line, format!("field `{field}` is not finite")));
    }
    Ok(x)
}

fn parse_ids(s: &str, line: usize, field: &str) -> Result<Vec<usize>, GeometryError> {
    s.split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| perr(line, format!("field `{field}`: `{t}` is not an id")))
        })
        .collect()
}

pub fn read_tessellation<R: BufRead>(r: R) -> Result<Tessellation, GeometryError> {
    let mut section = Section::Preamble;
    let mut seen_header = false;
    let mut dim: Option<usize> = None;
    let mut window: Option<Window> = None;
    let mut generators: Vec<MarkedPoint> = Vec::new();
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut faces: Vec<Option<Vec<Face>>> = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in r.lines().enumerate() {
        let ln = idx + 1;
        last_line = ln;
        let raw = raw?;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if !seen_header {
            if line != HEADER {
                return Err(perr(
                    ln,
                    format!("expected header `{HEADER}`, found `{line}`"),
                ));
            }
            seen_header = true;
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let d = dim.ok_or_else(|| perr(ln, "section before `dim` line"))?;
            if window.is_none() {
                return Err(perr(ln, "section before `window` line"));
            }
            section = match name.trim() {
                "generators" => Section::Generators,
                "vertices" => Section::Vertices,
                other => {
                    let q = other
                        .strip_prefix("faces q=")
                        .and_then(|q| q.trim().parse::<usize>().ok())
                        .ok_or_else(|| perr(ln, format!("unknown section `[{other}]`")))?;
                    if q == 0 || q > d {
                        return Err(perr(ln, format!("face dimension {q} outside 1..={d}")));
                    }
                    if faces[q - 1].is_some() {
                        return Err(perr(ln, format!("duplicate section `[faces q={q}]`")));
                    }
                    faces[q - 1] = Some(Vec::new());
                    Section::Faces(q)
                }
            };
            continue;
        }
        match section {
            Section::Preamble => {
                let mut toks = line.split_whitespace();
                match toks.next() {
                    Some("dim") => {
                        let d: usize = toks
                            .next()
                            .and_then(|t| t.parse().ok())
                            .ok_or_else(|| perr(ln, "field `dim` must be 2 or 3"))?;
                        if !(d == 2 || d == 3) {
                            return Err(perr(ln, format!("field `dim` must be 2 or 3, got {d}")));
                        }
                        dim = Some(d);
                        faces = (0..d).map(|_| None).collect();
                    }
                    Some("window") => {
                        let l = parse_f64(toks.next(), ln, "window edge length")?;
                        let periodic = match toks.next() {
                            Some("periodic") => true,
                            Some("bounded") => false,
                            other => {
                                return Err(perr(
                                    ln,
                                    format!(
                                        "field `window kind` must be periodic or bounded, got {other:?}"
                                    ),
                                ))
                            }
                        };
                        let w = Window {
                            edge_length: l,
                            periodic,
                        };
                        w.validate().map_err(|e| perr(ln, e.to_string()))?;
                        window = Some(w);
                    }
                    _ => return Err(perr(ln, format!("unexpected line `{line}`"))),
                }
            }
            Section::Generators | Section::Vertices => {
                let mut toks = line.split_whitespace();
                let id: usize = toks
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| perr(ln, "field `id` is not an id"))?;
                let list_len = if section == Section::Generators {
                    generators.len()
                } else {
                    vertices.len()
                };
                if id != list_len {
                    return Err(perr(
                        ln,
                        format!("field `id`: expected {list_len}, got {id}"),
                    ));
                }
                let p = Vec3::new(
                    parse_f64(toks.next(), ln, "x")?,
                    parse_f64(toks.next(), ln, "y")?,
                    parse_f64(toks.next(), ln, "z")?,
                );
                if section == Section::Generators {
                    let radius = parse_f64(toks.next(), ln, "radius")?;
                    if radius < 0.0 {
                        return Err(perr(ln, "field `radius` is negative"));
                    }
                    generators.push(MarkedPoint::new(p, radius));
                } else {
                    vertices.push(p);
                }
                if let Some(extra) = toks.next() {
                    return Err(perr(ln, format!("unexpected trailing field `{extra}`")));
                }
            }
            Section::Faces(q) => {
                let parts: Vec<&str> = line.split(';').collect();
                if parts.len() != 3 && parts.len() != 4 {
                    return Err(perr(
                        ln,
                        "face line must have the form `id ; vertex ids ; cell ids [; translates]`",
                    ));
                }
                let list = faces[q - 1].as_mut().expect("section opened");
                let id: usize = parts[0]
                    .trim()
                    .parse()
                    .map_err(|_| perr(ln, "field `id` is not an id"))?;
                if id != list.len() {
                    return Err(perr(
                        ln,
                        format!("field `id`: expected {}, got {id}", list.len()),
                    ));
                }
                let vs = parse_ids(parts[1], ln, "vertex ids")?;
                let cs = parse_ids(parts[2], ln, "cell ids")?;
                if vs.is_empty() {
                    return Err(perr(ln, "field `vertex ids` is empty"));
                }
                if let Some(v) = vs.iter().find(|&&v| v >= vertices.len()) {
                    return Err(perr(ln, format!("field `vertex ids`: unknown vertex {v}")));
                }
                if let Some(c) = cs.iter().find(|&&c| c >= generators.len()) {
                    return Err(perr(ln, format!("field `cell ids`: unknown generator {c}")));
                }
                let (mut coords, mut cell_centers) = (vec![], vec![]);
                if let Some(field) = parts.get(3) {
                    let win = window.expect("checked at section start");
                    if !win.periodic {
                        return Err(perr(
                            ln,
                            "field `translates` is only allowed in periodic files",
                        ));
                    }
                    let m: Vec<i64> = field
                        .split_whitespace()
                        .map(|t| {
                            t.parse().map_err(|_| {
                                perr(ln, format!("field `translates`: `{t}` is not an integer"))
                            })
                        })
                        .collect::<Result<_, _>>()?;
                    if m.len() != 3 * (vs.len() + cs.len()) {
                        return Err(perr(
                            ln,
                            format!(
                                "field `translates`: expected {} integers, got {}",
                                3 * (vs.len() + cs.len()),
                                m.len()
                            ),
                        ));
                    }
                    let l = win.edge_length;
                    let shifted = |p: Vec3, k: usize| {
                        p + Vec3::new(m[3 * k] as f64, m[3 * k + 1] as f64, m[3 * k + 2] as f64) * l
                    };
                    coords = vs
                        .iter()
                        .enumerate()
                        .map(|(k, &v)| shifted(vertices[v], k))
                        .collect();
                    cell_centers = cs
                        .iter()
                        .enumerate()
                        .map(|(k, &c)| shifted(generators[c].location, vs.len() + k))
                        .collect();
                }
                list.push(Face {
                    vertices: vs,
                    coords,
                    boundary: vec![],
                    cofaces: vec![],
                    cells: cs,
                    cell_centers,
                });
            }
        }
    }

    let end = last_line + 1;
    if !seen_header {
        return Err(perr(end, format!("missing header `{HEADER}`")));
    }
    let dim = dim.ok_or_else(|| perr(end, "missing `dim` line"))?;
    let window = window.ok_or_else(|| perr(end, "missing `window` line"))?;
    if section == Section::Preamble {
        return Err(perr(end, "missing section [generators]"));
    }
    if generators.is_empty() {
        return Err(perr(end, "missing section [generators] or it is empty"));
    }
    if vertices.is_empty() {
        return Err(perr(end, "missing section [vertices] or it is empty"));
    }
    for (i, g) in generators.iter().enumerate() {
        if dim == 2 && g.location.z != 0.0 {
            return Err(perr(end, format!("generator {i} has z != 0 in a 2D file")));
        }
    }
    let mut lists = Vec::with_capacity(dim);
    for (k, f) in faces.into_iter().enumerate() {
        lists.push(f.ok_or_else(|| perr(end, format!("missing section [faces q={}]", k + 1)))?);
    }
    derive_boundaries(&mut lists);
    let tess = Tessellation::assemble(dim, window, generators, vertices, lists)?;
    tess.validate()?;
    Ok(tess)
}

/// Boundary of each q-face: the (q-1)-faces whose vertex sets it contains.
fn derive_boundaries(lists: &mut [Vec<Face>]) {
    for f in lists[0].iter_mut() {
        f.boundary = f.vertices.clone();
    }
    for q in 1..lists.len() {
        let (lower, upper) = lists.split_at_mut(q);
        let lower = &lower[q - 1];
        let mut by_vertex: HashMap<usize, Vec<usize>> = HashMap::new();
        for (fi, f) in upper[0].iter().enumerate() {
            for &v in &f.vertices {
                by_vertex.entry(v).or_default().push(fi);
            }
        }
        for f in upper[0].iter_mut() {
            f.boundary.clear();
        }
        for (gi, g) in lower.iter().enumerate() {
            let Some(parents) = by_vertex.get(&g.vertices[0]) else {
                continue;
            };
            for &fi in parents {
                let f = &mut upper[0][fi];
                if g.vertices.iter().all(|v| f.vertices.contains(v)) {
                    f.boundary.push(gi);
                }
            }
        }
    }
}
