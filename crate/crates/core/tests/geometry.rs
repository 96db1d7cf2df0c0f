use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tessgof_core::geometry::*;

fn uniform(n: usize, l: f64, seed: u64) -> Vec<Vec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            Vec3::new(
                rng.random::<f64>() * l,
                rng.random::<f64>() * l,
                rng.random::<f64>() * l,
            )
        })
        .collect()
}

fn marked(pts: &[Vec3], rmax: f64, seed: u64) -> Vec<MarkedPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pts.iter()
        .map(|&p| MarkedPoint::new(p, rng.random::<f64>() * rmax))
        .collect()
}

/// Each built cell's vertices (relative to its generator) must match the
/// half-space construction one to one.
fn compare_with_halfspaces(pts: &[MarkedPoint], window: Window) {
    let tess = build_laguerre(pts, window).unwrap();
    let oracle = halfspace_cells(pts, window).unwrap();
    for (g, cell) in oracle.iter().enumerate() {
        match (cell, tess.cell_of_generator(g)) {
            (None, None) => assert!(tess.is_empty_cell(g)),
            (Some(expected), Some(ci)) => {
                let x = pts[g].location;
                let got: Vec<Vec3> = tess.cells()[ci]
                    .vertices
                    .iter()
                    .map(|&v| window.displacement(&x, &tess.vertex_position(v)))
                    .collect();
                let exp: Vec<Vec3> = expected.iter().map(|p| p - x).collect();
                assert_eq!(got.len(), exp.len(), "vertex count of cell {g}");
                for e in &exp {
                    let d = got
                        .iter()
                        .map(|q| (q - e).norm())
                        .fold(f64::INFINITY, f64::min);
                    assert!(d < 1e-9, "cell {g}: vertex {e:?} missing (closest {d})");
                }
            }
            (a, b) => panic!(
                "generator {g}: oracle {:?} vs tessellation {:?}",
                a.is_some(),
                b
            ),
        }
    }
}

#[test]
fn periodic_voronoi_300_points() {
    let pts = uniform(300, 1.0, 1);
    let tess = build_voronoi(&pts, Window::unit_torus()).unwrap();
    assert_eq!(tess.cell_count(), 300);
    assert_eq!(tess.euler_characteristic(), 0);
    assert!(tess.check_invariants().is_empty());
    for v in tess.faces(0) {
        assert_eq!(v.cells.len(), 4);
        assert_eq!(v.cofaces.len(), 4);
    }
    let marked: Vec<MarkedPoint> = pts.iter().map(|&p| MarkedPoint::unmarked(p)).collect();
    compare_with_halfspaces(&marked, Window::unit_torus());
}

#[test]
fn periodic_laguerre_matches_halfspaces() {
    for seed in 0..5 {
        let pts = marked(&uniform(60, 1.0, 10 + seed), 0.15, seed);
        compare_with_halfspaces(&pts, Window::unit_torus());
        let tess = build_laguerre(&pts, Window::unit_torus()).unwrap();
        assert_eq!(tess.euler_characteristic(), 0);
    }
}

#[test]
fn bounded_laguerre_matches_halfspaces() {
    for seed in 0..5 {
        let pts = marked(&uniform(50, 2.0, 20 + seed), 0.3, seed);
        compare_with_halfspaces(&pts, Window::bounded(2.0));
    }
}

#[test]
fn small_periodic_windows() {
    for n in [5, 6, 8, 12] {
        let pts = uniform(n, 1.0, 100 + n as u64);
        match build_voronoi(&pts, Window::unit_torus()) {
            Ok(t) => {
                assert_eq!(t.euler_characteristic(), 0);
                assert_eq!(t.cell_count(), n);
            }
            Err(GeometryError::WindowTooSmall(_)) => {}
            Err(e) => panic!("{n} points: {e}"),
        }
    }
}

/// Volume of a cell as pyramids from its generator over its boundary
/// faces, each face moved into the cell's frame.
fn cell_volume(tess: &Tessellation, ci: usize) -> f64 {
    let cell = &tess.cells()[ci];
    let c = cell.cell_centers[0];
    cell.boundary
        .iter()
        .map(|&b| {
            let f = &tess.faces(2)[b];
            let k = cell
                .vertices
                .iter()
                .position(|&v| v == f.vertices[0])
                .unwrap();
            let shift = cell.coords[k] - f.coords[0];
            let pts: Vec<Vec3> = f.coords.iter().map(|p| p + shift).collect();
            let frame = face_frame(&pts).unwrap();
            polygon_area(&pts) * frame.normal.dot(&(pts[0] - c)).abs() / 3.0
        })
        .sum()
}

#[test]
fn faces_wider_than_half_the_window() {
    // this configuration has an edge longer than half the torus
    let w = Window::unit_torus();
    let pts = tessgof_core::generators::sample_binomial(51, &w, 5355160722354686786);
    let tess = build_voronoi(&pts, w).unwrap();
    let widest = tess
        .faces(2)
        .iter()
        .map(|f| {
            let (lo, hi) = f
                .coords
                .iter()
                .fold((f.coords[0], f.coords[0]), |(lo, hi), p| {
                    (lo.inf(p), hi.sup(p))
                });
            (hi - lo).max()
        })
        .fold(0.0, f64::max);
    assert!(widest > 0.5, "{widest}");
    let total: f64 = (0..tess.cell_count())
        .map(|ci| cell_volume(&tess, ci))
        .sum();
    assert!((total - 1.0).abs() < 1e-12, "{total}");

    let mut buf = Vec::new();
    write_tessellation(&tess, &mut buf).unwrap();
    let back = read_tessellation(buf.as_slice()).unwrap();
    same_lattice(&tess, &back, 0.0);
    // without translates the edge walk cannot place the long edge
    let text = String::from_utf8(buf).unwrap();
    let stripped: String = text
        .lines()
        .map(|l| match l.match_indices(';').nth(2) {
            Some((i, _)) => l[..i].trim_end().to_string(),
            None => l.to_string(),
        })
        .collect::<Vec<_>>()
        .join("\n");
    assert!(matches!(
        read_tessellation(stripped.as_bytes()),
        Err(GeometryError::WindowTooSmall(_))
    ));
}

#[test]
fn translates_field_is_checked() {
    let tess = build_voronoi(&uniform(20, 1.0, 3), Window::unit_torus()).unwrap();
    let mut buf = Vec::new();
    write_tessellation(&tess, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let line = text
        .lines()
        .find(|l| l.starts_with("0 ;") && l.matches(';').count() == 3)
        .unwrap();
    let short = text.replacen(line, line.rsplit_once(' ').unwrap().0, 1);
    match read_tessellation(short.as_bytes()) {
        Err(GeometryError::Parse { msg, .. }) => assert!(msg.contains("translates"), "{msg}"),
        other => panic!("expected parse error, got {other:?}"),
    }
    let bounded = build_voronoi(&uniform(5, 1.0, 4), Window::bounded(1.0)).unwrap();
    let mut buf = Vec::new();
    write_tessellation(&bounded, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(
        text.lines().filter(|l| l.matches(';').count() == 3).count(),
        0
    );
    let line = text
        .lines()
        .find(|l| !l.starts_with("#") && l.matches(";").count() == 2)
        .unwrap();
    let extra = text.replacen(line, &format!("{line} ; 0 0 0"), 1);
    assert!(matches!(
        read_tessellation(extra.as_bytes()),
        Err(GeometryError::Parse { .. })
    ));
}

#[test]
fn two_points_split_bounded_window() {
    let pts = vec![Vec3::new(0.3, 0.5, 0.5), Vec3::new(0.7, 0.4, 0.6)];
    let tess = build_voronoi(&pts, Window::bounded(1.0)).unwrap();
    assert_eq!(tess.cell_count(), 2);
    assert_eq!(tess.interior_faces().count(), 1);
    assert_eq!(tess.euler_characteristic(), 1);
}

#[test]
fn cube_corners_are_degenerate() {
    let mut pts = Vec::new();
    for &x in &[0.25, 0.75] {
        for &y in &[0.25, 0.75] {
            for &z in &[0.25, 0.75] {
                pts.push(Vec3::new(x, y, z));
            }
        }
    }
    assert!(matches!(
        build_voronoi(&pts, Window::bounded(1.0)),
        Err(GeometryError::Degenerate(_))
    ));
}

fn same_lattice(a: &Tessellation, b: &Tessellation, tol: f64) {
    assert_eq!(a.face_counts(), b.face_counts());
    for q in 0..=a.dim() {
        for (fa, fb) in a.faces(q).iter().zip(b.faces(q)) {
            assert_eq!(fa.vertices, fb.vertices);
            assert_eq!(fa.boundary, fb.boundary);
            assert_eq!(fa.cells, fb.cells);
            for (pa, pb) in fa.coords.iter().zip(&fb.coords) {
                assert!((pa - pb).norm() <= tol);
            }
        }
    }
}

#[test]
fn voronoi_equals_zero_and_equal_radii() {
    let pts = uniform(80, 1.0, 5);
    for window in [Window::unit_torus(), Window::bounded(1.0)] {
        let v = build_voronoi(&pts, window).unwrap();
        let zero: Vec<MarkedPoint> = pts.iter().map(|&p| MarkedPoint::new(p, 0.0)).collect();
        same_lattice(&v, &build_laguerre(&zero, window).unwrap(), 0.0);
        let equal: Vec<MarkedPoint> = pts.iter().map(|&p| MarkedPoint::new(p, 0.1)).collect();
        same_lattice(&v, &build_laguerre(&equal, window).unwrap(), 1e-9);
    }
}

#[test]
fn export_import_round_trip() {
    let pts = marked(&uniform(50, 1.0, 9), 0.1, 2);
    for window in [Window::unit_torus(), Window::bounded(1.0)] {
        let tess = build_laguerre(&pts, window).unwrap();
        let mut buf = Vec::new();
        write_tessellation(&tess, &mut buf).unwrap();
        let back = read_tessellation(buf.as_slice()).unwrap();
        same_lattice(&tess, &back, 0.0);
        for q in 0..=3 {
            for (fa, fb) in tess.faces(q).iter().zip(back.faces(q)) {
                assert_eq!(fa.cofaces, fb.cofaces);
                assert_eq!(fa.cell_centers, fb.cell_centers);
            }
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.tess");
        export_tessellation(&tess, &path).unwrap();
        same_lattice(&tess, &import_tessellation(&path).unwrap(), 0.0);
    }
}

#[test]
fn truncated_file_names_missing_section() {
    let pts = uniform(20, 1.0, 3);
    let tess = build_voronoi(&pts, Window::unit_torus()).unwrap();
    let mut buf = Vec::new();
    write_tessellation(&tess, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let cut = text.find("[faces q=3]").unwrap();
    match read_tessellation(&text.as_bytes()[..cut]) {
        Err(GeometryError::Parse { msg, .. }) => assert!(msg.contains("[faces q=3]"), "{msg}"),
        other => panic!("expected parse error, got {other:?}"),
    }
    let bad = text.replacen("window 1.0 periodic", "window -1 periodic", 1);
    assert!(matches!(
        read_tessellation(bad.as_bytes()),
        Err(GeometryError::Parse { line: 3, .. })
    ));
}

#[test]
fn hand_written_two_cell_file() {
    // two unit cubes side by side in a bounded window of edge 2 (the window
    // is only used for frames here, cells need not fill it)
    let text = "\
tessgof-tessellation v1
dim 3
window 2 bounded
[generators]
0 0.5 0.5 0.5 0
1 1.5 0.5 0.5 0
[vertices]
0 0 0 0
1 1 0 0
2 2 0 0
3 0 1 0
4 1 1 0
5 2 1 0
6 0 0 1
7 1 0 1
8 2 0 1
9 0 1 1
10 1 1 1
11 2 1 1
[faces q=1]
0 ; 0 1 ; 0
1 ; 1 2 ; 1
2 ; 3 4 ; 0
3 ; 4 5 ; 1
4 ; 6 7 ; 0
5 ; 7 8 ; 1
6 ; 9 10 ; 0
7 ; 10 11 ; 1
8 ; 0 3 ; 0
9 ; 1 4 ; 0 1
10 ; 2 5 ; 1
11 ; 6 9 ; 0
12 ; 7 10 ; 0 1
13 ; 8 11 ; 1
14 ; 0 6 ; 0
15 ; 1 7 ; 0 1
16 ; 2 8 ; 1
17 ; 3 9 ; 0
18 ; 4 10 ; 0 1
19 ; 5 11 ; 1
[faces q=2]
0 ; 1 4 10 7 ; 0 1   # shared face x = 1
1 ; 0 6 9 3 ; 0
2 ; 2 5 11 8 ; 1
3 ; 0 1 7 6 ; 0
4 ; 1 2 8 7 ; 1
5 ; 3 9 10 4 ; 0
6 ; 4 10 11 5 ; 1
7 ; 0 3 4 1 ; 0
8 ; 1 4 5 2 ; 1
9 ; 6 7 10 9 ; 0
10 ; 7 8 11 10 ; 1
[faces q=3]
0 ; 0 1 3 4 6 7 9 10 ; 0
1 ; 1 2 4 5 7 8 10 11 ; 1
";
    let tess = read_tessellation(text.as_bytes()).unwrap();
    assert_eq!(tess.face_counts(), vec![12, 20, 11, 2]);
    assert_eq!(tess.interior_faces().count(), 1);
    assert_eq!(tess.euler_characteristic(), 1);
    assert_eq!(tess.cells()[0].boundary.len(), 6);
    assert!((face_inradius(tess.face(2, 0), None).unwrap() - 0.5).abs() < 1e-15);
    assert!((face_eccentricity(&tess, 2, 0).unwrap() - 0.75f64.sqrt()).abs() < 1e-15);
    assert!(matches!(
        face_eccentricity(&tess, 2, 1),
        Err(GeometryError::NotInterior { cells: 1, .. })
    ));
}

#[test]
fn eccentricity_examples() {
    // square face with both centers on its axis, every vertex at distance 1
    let h = (1.0f64 - 0.5).sqrt();
    let face = Face {
        vertices: vec![0, 1, 2, 3],
        coords: vec![
            Vec3::new(-0.5, -0.5, 0.0),
            Vec3::new(0.5, -0.5, 0.0),
            Vec3::new(0.5, 0.5, 0.0),
            Vec3::new(-0.5, 0.5, 0.0),
        ],
        boundary: vec![],
        cofaces: vec![],
        cells: vec![0, 1],
        cell_centers: vec![Vec3::new(0.0, 0.0, -h), Vec3::new(0.0, 0.0, h)],
    };
    assert!((ecc(&face) - 1.0).abs() < 1e-15);
    let unit = Face {
        coords: vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(1.0, 1.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
        ],
        cell_centers: vec![Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 1.0, 0.0)],
        ..face
    };
    assert!((ecc(&unit) - 2f64.sqrt()).abs() < 1e-15);
}

fn ecc(face: &Face) -> f64 {
    face.coords
        .iter()
        .flat_map(|p| face.cell_centers.iter().map(move |c| (p - c).norm()))
        .fold(0.0, f64::max)
}

#[test]
fn eccentricity_matches_dense_boundary_sampling() {
    let pts = uniform(40, 1.0, 77);
    let tess = build_voronoi(&pts, Window::unit_torus()).unwrap();
    for (id, f) in tess.interior_faces().take(30) {
        let e = face_eccentricity(&tess, 2, id).unwrap();
        let m = f.coords.len();
        let mut best = 0.0f64;
        for k in 0..m {
            let (a, b) = (f.coords[k], f.coords[(k + 1) % m]);
            for s in 0..=200 {
                let p = a + (b - a) * (s as f64 / 200.0);
                for c in &f.cell_centers {
                    best = best.max((p - c).norm());
                }
            }
        }
        assert!((e - best).abs() < 1e-12, "face {id}: {e} vs {best}");
    }
}

#[test]
fn inradius_bounded_by_circumradius_and_scales() {
    let pts = uniform(40, 1.0, 8);
    let marked_pts = marked(&pts, 0.1, 4);
    let tess = build_laguerre(&marked_pts, Window::unit_torus()).unwrap();
    let lambda = 2.5;
    let scaled: Vec<MarkedPoint> = marked_pts
        .iter()
        .map(|p| MarkedPoint::new(p.location * lambda, p.radius * lambda))
        .collect();
    let big = build_laguerre(&scaled, Window::periodic(lambda)).unwrap();
    assert_eq!(tess.face_counts(), big.face_counts());
    for (id, f) in tess.interior_faces() {
        let r = face_inradius(f, None).unwrap();
        assert!(r <= circumradius(&f.coords) + 1e-15);
        let g = big.face(2, id);
        assert!((face_inradius(g, None).unwrap() - lambda * r).abs() < 1e-9);
        assert!((circumradius(&g.coords) - lambda * circumradius(&f.coords)).abs() < 1e-9);
        assert!(
            (face_eccentricity(&big, 2, id).unwrap()
                - lambda * face_eccentricity(&tess, 2, id).unwrap())
            .abs()
                < 1e-9
        );
    }
}

#[test]
fn rigid_motion_leaves_measures_invariant() {
    // generators in the middle of a large bounded window; the interior cells
    // do not touch the window boundary
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let pts: Vec<Vec3> = (0..60)
        .map(|_| {
            Vec3::new(
                4.0 + rng.random::<f64>(),
                4.0 + rng.random::<f64>(),
                4.0 + rng.random::<f64>(),
            )
        })
        .collect();
    let rot = nalgebra::Rotation3::from_euler_angles(0.4, 1.2, -0.3);
    let center = Vec3::repeat(4.5);
    let moved: Vec<Vec3> = pts
        .iter()
        .map(|p| rot * (p - center) + center + Vec3::new(0.3, -0.2, 0.1))
        .collect();
    let a = build_voronoi(&pts, Window::bounded(10.0)).unwrap();
    let b = build_voronoi(&moved, Window::bounded(10.0)).unwrap();
    let summary = |t: &Tessellation| {
        let mut v: Vec<(Vec<usize>, f64, f64, f64)> = t
            .interior_faces()
            .filter(|(_, f)| {
                f.coords
                    .iter()
                    .all(|p| p.iter().all(|x| *x > 0.0 && *x < 10.0))
            })
            .map(|(id, f)| {
                let mut cells = f.cells.clone();
                cells.sort();
                (
                    cells,
                    face_inradius(f, None).unwrap(),
                    face_eccentricity(t, 2, id).unwrap(),
                    circumradius(&f.coords),
                )
            })
            .collect();
        v.sort_by(|x, y| x.0.cmp(&y.0));
        v
    };
    let (sa, sb) = (summary(&a), summary(&b));
    // faces touching the window boundary may differ; compare the common ones
    let mut matched = 0;
    for x in &sa {
        if let Some(y) = sb.iter().find(|y| y.0 == x.0) {
            if (x.3 - y.3).abs() > 1e-6 {
                continue; // clipped by the window in one of the two
            }
            assert!((x.1 - y.1).abs() < 1e-9);
            assert!((x.2 - y.2).abs() < 1e-9);
            assert!((x.3 - y.3).abs() < 1e-9);
            matched += 1;
        }
    }
    assert!(matched > 50, "only {matched} faces compared");
}
