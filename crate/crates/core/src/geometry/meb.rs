//! Minimum enclosing balls (Welzl's algorithm with move-to-front).

use super::Vec3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball {
    pub center: Vec3,
    pub radius: f64,
}

impl Ball {
    fn contains(&self, p: &Vec3) -> bool {
        (p - self.center).norm() <= self.radius * (1.0 + 1e-12) + 1e-14
    }
}

/// Smallest ball with all of `support` on its boundary and center in their
/// affine hull. `None` when the points are affinely dependent.
pub(crate) fn ball_through(support: &[Vec3]) -> Option<Ball> {
    let p0 = *support.first()?;
    let k = support.len() - 1;
    if k == 0 {
        return Some(Ball {
            center: p0,
            radius: 0.0,
        });
    }
    let d: Vec<Vec3> = support[1..].iter().map(|p| p - p0).collect();
    let mut g = nalgebra::DMatrix::<f64>::zeros(k, k);
    let mut b = nalgebra::DVector::<f64>::zeros(k);
    for i in 0..k {
        for j in 0..k {
            g[(i, j)] = 2.0 * d[i].dot(&d[j]);
        }
        b[i] = d[i].norm_squared();
    }
    // reject nearly dependent supports; the solve would be meaningless
    let scale = d.iter().map(|v| v.norm_squared()).fold(0.0, f64::max);
    let det = g.determinant();
    if !(det.abs() > 1e-24 * (2.0 * scale).powi(k as i32)) {
        return None;
    }
    let lambda = g.lu().solve(&b)?;
    let offset = d
        .iter()
        .zip(lambda.iter())
        .fold(Vec3::zeros(), |acc, (v, l)| acc + v * *l);
    let center = p0 + offset;
    let radius = support
        .iter()
        .map(|p| (p - center).norm())
        .fold(0.0, f64::max);
    Some(Ball { center, radius })
}

/// Smallest enclosing ball of a small point set by enumerating supports.
fn brute_ball(points: &[Vec3]) -> Ball {
    let n = points.len();
    let mut best: Option<Ball> = None;
    let mut consider = |s: &[Vec3]| {
        if let Some(b) = ball_through(s) {
            if best.is_none_or(|x| b.radius < x.radius) && points.iter().all(|p| b.contains(p)) {
                best = Some(b);
            }
        }
    };
    for i in 0..n {
        consider(&[points[i]]);
        for j in i + 1..n {
            consider(&[points[i], points[j]]);
            for k in j + 1..n {
                consider(&[points[i], points[j], points[k]]);
                for l in k + 1..n {
                    consider(&[points[i], points[j], points[k], points[l]]);
                }
            }
        }
    }
    best.expect("some support always encloses the set")
}

fn support_ball(support: &[Vec3]) -> Ball {
    match support.len() {
        0 => Ball {
            center: Vec3::zeros(),
            radius: -1.0,
        },
        _ => ball_through(support).unwrap_or_else(|| brute_ball(support)),
    }
}

fn welzl(pts: &mut Vec<Vec3>, n: usize, support: &mut Vec<Vec3>) -> Ball {
    let mut ball = support_ball(support);
    if support.len() == 4 {
        return ball;
    }
    for i in 0..n {
        let p = pts[i];
        if ball.radius >= 0.0 && ball.contains(&p) {
            continue;
        }
        support.push(p);
        ball = welzl(pts, i, support);
        support.pop();
        pts.remove(i);
        pts.insert(0, p);
    }
    ball
}

/// Minimum enclosing ball of a nonempty point set.
pub fn min_enclosing_ball(points: &[Vec3]) -> Ball {
    assert!(!points.is_empty(), "minimum enclosing ball of an empty set");
    let mut pts = points.to_vec();
    let mut support = Vec::with_capacity(4);
    let n = pts.len();
    welzl(&mut pts, n, &mut support)
}

/// Radius of the minimum enclosing ball; 0 for a single point.
pub fn circumradius(points: &[Vec3]) -> f64 {
    min_enclosing_ball(points).radius
}
