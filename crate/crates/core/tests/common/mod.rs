//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

pub mod props;

use nalgebra::{Matrix3, Vector2};
use tessgof_core::generators::sample_binomial;
use tessgof_core::geometry::{build_voronoi, Tessellation, Vec3, Window};

pub fn random_tess(n: usize, periodic: bool, seed: u64) -> Tessellation {
    let w = if periodic {
        Window::periodic(1.0)
    } else {
        Window::bounded(1.0)
    };
    build_voronoi(&sample_binomial(n, &w, seed), w).unwrap()
}

/// Area as a fan of triangles from the first vertex.
pub fn fan_area(coords: &[Vec3]) -> f64 {
    let mut n = Vec3::zeros();
    for k in 1..coords.len().saturating_sub(1) {
        n += (coords[k] - coords[0]).cross(&(coords[k + 1] - coords[0]));
    }
    0.5 * n.norm()
}

fn plane(coords: &[Vec3]) -> (Vec3, Vec3, Vec3) {
    let o = coords[0];
    let u = (coords[1] - o).normalize();
    let far = coords
        .iter()
        .max_by(|a, b| {
            let da = (*a - o).cross(&u).norm();
            let db = (*b - o).cross(&u).norm();
            da.total_cmp(&db)
        })
        .unwrap();
    let n = u.cross(&(far - o)).normalize();
    (o, u, n.cross(&u))
}

fn project(coords: &[Vec3]) -> Vec<Vector2<f64>> {
    let (o, u, v) = plane(coords);
    coords
        .iter()
        .map(|p| Vector2::new((p - o).dot(&u), (p - o).dot(&v)))
        .collect()
}

/// Maximum of a concave function on a box by nested ternary search.
fn maximize_concave(lo: Vector2<f64>, hi: Vector2<f64>, g: impl Fn(&Vector2<f64>) -> f64) -> f64 {
    let ternary = |a: f64, b: f64, f: &dyn Fn(f64) -> f64| {
        let (mut a, mut b) = (a, b);
        for _ in 0..100 {
            let m1 = a + (b - a) / 3.0;
            let m2 = b - (b - a) / 3.0;
            if f(m1) < f(m2) {
                a = m1;
            } else {
                b = m2;
            }
        }
        f(0.5 * (a + b))
    };
    let column = |x: f64| ternary(lo.y, hi.y, &|y| g(&Vector2::new(x, y)));
    ternary(lo.x, hi.x, &column)
}

fn bbox(q: &[Vector2<f64>]) -> (Vector2<f64>, Vector2<f64>) {
    let (mut lo, mut hi) = (q[0], q[0]);
    for p in q {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    (lo, hi)
}

/// Smallest `r` at which the edges dilated by `r` cover the polygon. The
/// coverage margin (distance to the edge set inside the polygon, minus the
/// distance to the polygon outside) is concave for convex polygons.
pub fn dilation_inradius(coords: &[Vec3]) -> f64 {
    let q = project(coords);
    let m = q.len();
    let margin = |x: &Vector2<f64>| {
        let mut pos = true;
        let mut neg = true;
        let mut dist = f64::INFINITY;
        for k in 0..m {
            let (a, b) = (q[k], q[(k + 1) % m]);
            let d = b - a;
            let c = d.perp(&(x - a));
            pos &= c >= 0.0;
            neg &= c <= 0.0;
            let t = ((x - a).dot(&d) / d.norm_squared()).clamp(0.0, 1.0);
            dist = dist.min((x - (a + d * t)).norm());
        }
        if pos || neg {
            dist
        } else {
            -dist
        }
    };
    let (lo, hi) = bbox(&q);
    maximize_concave(lo, hi, margin).max(0.0)
}

/// Largest `t` with a point at distance at least `t + rho_j` from every
/// edge line `j`, by direct search over the offset lines.
pub fn offset_line_inradius(coords: &[Vec3], rho: &[f64]) -> f64 {
    let q = project(coords);
    let m = q.len();
    let orient = {
        let mut s = 0.0;
        for k in 0..m {
            s += q[k].perp(&q[(k + 1) % m]);
        }
        s.signum()
    };
    let margin = |x: &Vector2<f64>| {
        (0..m)
            .map(|k| {
                let (a, b) = (q[k], q[(k + 1) % m]);
                let d = b - a;
                orient * d.perp(&(x - a)) / d.norm() - rho[k]
            })
            .fold(f64::INFINITY, f64::min)
    };
    let (lo, hi) = bbox(&q);
    maximize_concave(lo, hi, margin).max(0.0)
}

/// Minimum enclosing ball radius by trying every ball through two, three
/// or four of the points.
pub fn brute_meb_radius(p: &[Vec3]) -> f64 {
    let n = p.len();
    if n == 1 {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    let mut consider = |c: Vec3, r: f64| {
        if r < best
            && p.iter()
                .all(|x| (x - c).norm() <= r * (1.0 + 1e-12) + 1e-15)
        {
            best = r;
        }
    };
    for i in 0..n {
        for j in i + 1..n {
            let c = (p[i] + p[j]) / 2.0;
            consider(c, (p[i] - c).norm());
            for k in j + 1..n {
                // circumcenter of a triangle, within its plane
                let (a, b) = (p[j] - p[i], p[k] - p[i]);
                let axb = a.cross(&b);
                let d = 2.0 * axb.norm_squared();
                if d > 1e-24 {
                    let c = p[i]
                        + (b.cross(&axb) * a.norm_squared() + axb.cross(&a) * b.norm_squared()) / d;
                    consider(c, (p[i] - c).norm());
                }
                for l in k + 1..n {
                    let rows = [p[j] - p[i], p[k] - p[i], p[l] - p[i]];
                    let m = Matrix3::from_rows(&[
                        rows[0].transpose(),
                        rows[1].transpose(),
                        rows[2].transpose(),
                    ]);
                    let rhs = Vec3::new(
                        rows[0].norm_squared() / 2.0,
                        rows[1].norm_squared() / 2.0,
                        rows[2].norm_squared() / 2.0,
                    );
                    if m.determinant().abs() < 1e-12 {
                        continue;
                    }
                    if let Some(x) = m.lu().solve(&rhs) {
                        consider(p[i] + x, x.norm());
                    }
                }
            }
        }
    }
    best
}
