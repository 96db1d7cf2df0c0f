//! Filtered exact predicates for orientation and power (weighted in-sphere)
//! tests.
//!
//! Each predicate first evaluates its determinant in floating point together
//! with a conservative error bound. Only when the sign cannot be certified is
//! the determinant recomputed exactly over big integers, using the fact that
//! every finite `f64` is an integer multiple of a power of two.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use std::cmp::Ordering;

use super::Vec3;

/// Relative error factor for the floating-point filters. Far larger than the
/// worst-case rounding of the cofactor expansions below.
const FILTER_EPS: f64 = 256.0 * f64::EPSILON;

/// Sign of `det[b - a; c - a; d - a]`. Positive means `(a, b, c, d)` is a
/// right-handed (positively oriented) tetrahedron.
pub fn orient3d(a: &Vec3, b: &Vec3, c: &Vec3, d: &Vec3) -> Ordering {
    let u = b - a;
    let v = c - a;
    let w = d - a;
    let m0 = v.y * w.z - v.z * w.y;
    let m1 = v.x * w.z - v.z * w.x;
    let m2 = v.x * w.y - v.y * w.x;
    let det = u.x * m0 - u.y * m1 + u.z * m2;
    let perm = u.x.abs() * (v.y.abs() * w.z.abs() + v.z.abs() * w.y.abs())
        + u.y.abs() * (v.x.abs() * w.z.abs() + v.z.abs() * w.x.abs())
        + u.z.abs() * (v.x.abs() * w.y.abs() + v.y.abs() * w.x.abs());
    if det.abs() > FILTER_EPS * perm {
        return det.partial_cmp(&0.0).unwrap_or(Ordering::Equal);
    }
    orient3d_exact(a, b, c, d)
}

fn orient3d_exact(a: &Vec3, b: &Vec3, c: &Vec3, d: &Vec3) -> Ordering {
    let pts = [a, b, c, d];
    let vals: Vec<f64> = pts.iter().flat_map(|p| [p.x, p.y, p.z]).collect();
    let ints = to_common_scale(&vals);
    let row = |i: usize| -> [BigInt; 3] {
        [
            &ints[3 * i] - &ints[0],
            &ints[3 * i + 1] - &ints[1],
            &ints[3 * i + 2] - &ints[2],
        ]
    };
    let m = [row(1), row(2), row(3)];
    sign(&det3(&m))
}

/// Sign of the lifted determinant with rows `(p_i - e, |p_i - e|^2 - w_i + w_e)`
/// for `p_i` in `tet`.
///
/// For a positively oriented `tet`, a negative result means that `e` is in
/// conflict with the tetrahedron: its power distance to the orthocenter is
/// smaller than the common power of the tetrahedron's vertices.
pub fn power_det(tet: [(&Vec3, f64); 4], e: (&Vec3, f64)) -> Ordering {
    let (pe, we) = e;
    let mut rows = [[0.0f64; 4]; 4];
    let mut abs_rows = [[0.0f64; 4]; 4];
    for (i, (p, w)) in tet.iter().enumerate() {
        let d = *p - pe;
        let sq = d.x * d.x + d.y * d.y + d.z * d.z;
        rows[i] = [d.x, d.y, d.z, sq - w + we];
        abs_rows[i] = [d.x.abs(), d.y.abs(), d.z.abs(), sq + w.abs() + we.abs()];
    }
    let det = det4_f64(&rows);
    let perm = det4_f64_perm(&abs_rows);
    if det.abs() > FILTER_EPS * perm {
        return det.partial_cmp(&0.0).unwrap_or(Ordering::Equal);
    }
    power_det_exact(tet, e)
}

/// Conflict test for a positively oriented tetrahedron. `None` signals the
/// degenerate case where `e` is power-equidistant with the vertices.
pub fn in_conflict(tet: [(&Vec3, f64); 4], e: (&Vec3, f64)) -> Option<bool> {
    match power_det(tet, e) {
        Ordering::Less => Some(true),
        Ordering::Greater => Some(false),
        Ordering::Equal => None,
    }
}

fn power_det_exact(tet: [(&Vec3, f64); 4], e: (&Vec3, f64)) -> Ordering {
    let mut coords = Vec::with_capacity(15);
    let mut weights = Vec::with_capacity(5);
    for (p, w) in tet.iter().chain(std::iter::once(&e)) {
        coords.extend_from_slice(&[p.x, p.y, p.z]);
        weights.push(*w);
    }
    let (ci, ce) = to_common_scale_exp(&coords);
    let (wi, we) = to_common_scale_exp(&weights);
    // lifted column lives at scale 2^min(2 ce, we)
    let s = (2 * ce).min(we);
    let sq_shift = (2 * ce - s) as usize;
    let w_shift = (we - s) as usize;
    let mut m: Vec<[BigInt; 4]> = Vec::with_capacity(4);
    for i in 0..4 {
        let dx = &ci[3 * i] - &ci[12];
        let dy = &ci[3 * i + 1] - &ci[13];
        let dz = &ci[3 * i + 2] - &ci[14];
        let sq: BigInt = &dx * &dx + &dy * &dy + &dz * &dz;
        let dw: BigInt = &wi[i] - &wi[4];
        let lifted = (sq << sq_shift) - (dw << w_shift);
        m.push([dx, dy, dz, lifted]);
    }
    sign(&det4_big(&m))
}

fn sign(v: &BigInt) -> Ordering {
    if v.is_zero() {
        Ordering::Equal
    } else if v.is_positive() {
        Ordering::Greater
    } else {
        Ordering::Less
    }
}

/// Decomposes a finite float into `(mantissa, exponent)` with
/// `value = mantissa * 2^exponent`.
fn decompose(x: f64) -> (i64, i32) {
    assert!(x.is_finite(), "non-finite coordinate in exact predicate");
    if x == 0.0 {
        return (0, 0);
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 0 { 1i64 } else { -1i64 };
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = (bits & ((1u64 << 52) - 1)) as i64;
    if exp == 0 {
        (sign * frac, -1074)
    } else {
        (sign * (frac | (1i64 << 52)), exp - 1075)
    }
}

fn to_common_scale_exp(vals: &[f64]) -> (Vec<BigInt>, i32) {
    let parts: Vec<(i64, i32)> = vals.iter().map(|&v| decompose(v)).collect();
    let emin = parts
        .iter()
        .filter(|(m, _)| *m != 0)
        .map(|(_, e)| *e)
        .min()
        .unwrap_or(0);
    let ints = parts
        .iter()
        .map(|&(m, e)| {
            if m == 0 {
                BigInt::zero()
            } else {
                BigInt::from(m) << ((e - emin) as usize)
            }
        })
        .collect();
    (ints, emin)
}

fn to_common_scale(vals: &[f64]) -> Vec<BigInt> {
    to_common_scale_exp(vals).0
}

fn det3(m: &[[BigInt; 3]; 3]) -> BigInt {
    let c0 = &m[1][1] * &m[2][2] - &m[1][2] * &m[2][1];
    let c1 = &m[1][0] * &m[2][2] - &m[1][2] * &m[2][0];
    let c2 = &m[1][0] * &m[2][1] - &m[1][1] * &m[2][0];
    &m[0][0] * c0 - &m[0][1] * c1 + &m[0][2] * c2
}

fn det4_big(m: &[[BigInt; 4]]) -> BigInt {
    // Laplace expansion along the first row
    let mut total = BigInt::zero();
    for col in 0..4 {
        let minor: [[BigInt; 3]; 3] = std::array::from_fn(|r| {
            let mut it = (0..4).filter(|&c| c != col);
            std::array::from_fn(|_| m[r + 1][it.next().unwrap()].clone())
        });
        let term = &m[0][col] * det3(&minor);
        if col % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

fn det4_f64(m: &[[f64; 4]; 4]) -> f64 {
    let s0 = m[0][0] * m[1][1] - m[1][0] * m[0][1];
    let s1 = m[0][0] * m[1][2] - m[1][0] * m[0][2];
    let s2 = m[0][0] * m[1][3] - m[1][0] * m[0][3];
    let s3 = m[0][1] * m[1][2] - m[1][1] * m[0][2];
    let s4 = m[0][1] * m[1][3] - m[1][1] * m[0][3];
    let s5 = m[0][2] * m[1][3] - m[1][2] * m[0][3];
    let c5 = m[2][2] * m[3][3] - m[3][2] * m[2][3];
    let c4 = m[2][1] * m[3][3] - m[3][1] * m[2][3];
    let c3 = m[2][1] * m[3][2] - m[3][1] * m[2][2];
    let c2 = m[2][0] * m[3][3] - m[3][0] * m[2][3];
    let c1 = m[2][0] * m[3][2] - m[3][0] * m[2][2];
    let c0 = m[2][0] * m[3][1] - m[3][0] * m[2][1];
    s0 * c5 - s1 * c4 + s2 * c3 + s3 * c2 - s4 * c1 + s5 * c0
}

/// Same expansion as [`det4_f64`] with every subtraction turned into an
/// addition; the input must already be entrywise absolute bounds.
fn det4_f64_perm(m: &[[f64; 4]; 4]) -> f64 {
    let s0 = m[0][0] * m[1][1] + m[1][0] * m[0][1];
    let s1 = m[0][0] * m[1][2] + m[1][0] * m[0][2];
    let s2 = m[0][0] * m[1][3] + m[1][0] * m[0][3];
    let s3 = m[0][1] * m[1][2] + m[1][1] * m[0][2];
    let s4 = m[0][1] * m[1][3] + m[1][1] * m[0][3];
    let s5 = m[0][2] * m[1][3] + m[1][2] * m[0][3];
    let c5 = m[2][2] * m[3][3] + m[3][2] * m[2][3];
    let c4 = m[2][1] * m[3][3] + m[3][1] * m[2][3];
    let c3 = m[2][1] * m[3][2] + m[3][1] * m[2][2];
    let c2 = m[2][0] * m[3][3] + m[3][0] * m[2][3];
    let c1 = m[2][0] * m[3][2] + m[3][0] * m[2][2];
    let c0 = m[2][0] * m[3][1] + m[3][0] * m[2][1];
    s0 * c5 + s1 * c4 + s2 * c3 + s3 * c2 + s4 * c1 + s5 * c0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: f64, y: f64, z: f64) -> Vec3 {
        Vec3::new(x, y, z)
    }

    #[test]
    fn unit_tetrahedron_is_positive() {
        let o = v(0.0, 0.0, 0.0);
        assert_eq!(
            orient3d(&o, &v(1.0, 0.0, 0.0), &v(0.0, 1.0, 0.0), &v(0.0, 0.0, 1.0)),
            Ordering::Greater
        );
        assert_eq!(
            orient3d(&o, &v(0.0, 1.0, 0.0), &v(1.0, 0.0, 0.0), &v(0.0, 0.0, 1.0)),
            Ordering::Less
        );
    }

    #[test]
    fn coplanar_points_are_exactly_zero() {
        let a = v(0.1, 0.2, 0.3);
        let b = v(0.7, 0.2, 0.3);
        let c = v(0.1, 0.9, 0.3);
        let d = v(0.55, 0.45, 0.3);
        assert_eq!(orient3d(&a, &b, &c, &d), Ordering::Equal);
    }

    #[test]
    fn nearly_coplanar_resolved_exactly() {
        let a = v(0.0, 0.0, 0.0);
        let b = v(1.0, 0.0, 0.0);
        let c = v(0.0, 1.0, 0.0);
        let d = v(0.3, 0.3, 1e-300);
        assert_eq!(orient3d(&a, &b, &c, &d), Ordering::Greater);
        let d = v(0.3, 0.3, -1e-300);
        assert_eq!(orient3d(&a, &b, &c, &d), Ordering::Less);
    }

    #[test]
    fn conflict_matches_circumsphere() {
        let t = [
            v(0.0, 0.0, 0.0),
            v(1.0, 0.0, 0.0),
            v(0.0, 1.0, 0.0),
            v(0.0, 0.0, 1.0),
        ];
        let tet = [(&t[0], 0.0), (&t[1], 0.0), (&t[2], 0.0), (&t[3], 0.0)];
        assert_eq!(in_conflict(tet, (&v(0.25, 0.25, 0.25), 0.0)), Some(true));
        assert_eq!(in_conflict(tet, (&v(2.0, 2.0, 2.0), 0.0)), Some(false));
        // (1,1,1) lies exactly on the circumsphere centred at (0.5,0.5,0.5)
        assert_eq!(in_conflict(tet, (&v(1.0, 1.0, 1.0), 0.0)), None);
    }

    #[test]
    fn weight_pushes_point_into_conflict() {
        let t = [
            v(0.0, 0.0, 0.0),
            v(1.0, 0.0, 0.0),
            v(0.0, 1.0, 0.0),
            v(0.0, 0.0, 1.0),
        ];
        let tet = [(&t[0], 0.0), (&t[1], 0.0), (&t[2], 0.0), (&t[3], 0.0)];
        let e = v(1.2, 1.2, 1.2);
        assert_eq!(in_conflict(tet, (&e, 0.0)), Some(false));
        // |e - c|^2 = 3 * 0.7^2 = 1.47, orthoradius^2 = 0.75
        assert_eq!(in_conflict(tet, (&e, 0.8)), Some(true));
        assert_eq!(in_conflict(tet, (&e, 0.5)), Some(false));
    }

    #[test]
    fn equal_weight_shift_keeps_sign() {
        let t = [
            v(0.1, 0.2, 0.0),
            v(0.9, 0.1, 0.3),
            v(0.2, 0.8, 0.1),
            v(0.3, 0.3, 0.9),
        ];
        let e = v(0.45, 0.4, 0.35);
        for c in [0.0, 0.01, 0.37] {
            let tet = [(&t[0], c), (&t[1], c), (&t[2], c), (&t[3], c)];
            assert_eq!(in_conflict(tet, (&e, c)), Some(true));
        }
    }

    #[test]
    fn exact_path_agrees_with_filter_on_generic_input() {
        let t = [
            v(0.13, 0.2, 0.05),
            v(0.9, 0.11, 0.3),
            v(0.2, 0.83, 0.1),
            v(0.31, 0.3, 0.97),
        ];
        let tet = [(&t[0], 0.01), (&t[1], 0.02), (&t[2], 0.0), (&t[3], 0.005)];
        for e in [v(0.4, 0.4, 0.4), v(3.0, -1.0, 0.2), v(0.6, 0.6, 0.6)] {
            assert_eq!(
                power_det(tet, (&e, 0.003)),
                power_det_exact(tet, (&e, 0.003))
            );
        }
        assert_eq!(
            orient3d(&t[0], &t[1], &t[2], &t[3]),
            orient3d_exact(&t[0], &t[1], &t[2], &t[3])
        );
    }

    #[test]
    fn decompose_round_trips() {
        for x in [1.0, -0.375, 1e-310, 123456.789, -2.0f64.powi(-60)] {
            let (m, e) = decompose(x);
            assert_eq!(m as f64 * 2f64.powi(e), x);
        }
    }
}
