//! Randomized properties shared by the proptest suites and the acceptance
//! report.

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use tessgof_core::filtration::{build_filtration, NoiseConfig};
use tessgof_core::generators::{pair_count, sample_binomial};
use tessgof_core::geometry::{circumradius, Vec3, Window};
use tessgof_core::persistence::{euler_curve, persistent_betti, reduce};

use super::random_tess;

/// Parameters of a random Voronoi tessellation.
/// Periodic windows get at least 20 generators so no cell touches its own
/// image.
pub fn tess_case() -> impl Strategy<Value = (usize, bool, u64)> {
    (any::<bool>(), any::<u64>()).prop_flat_map(|(periodic, seed)| {
        let range = if periodic { 20..45usize } else { 5..45usize };
        (range, Just(periodic), Just(seed))
    })
}

/// Every face enters after its boundary with a value at least as large;
/// noiseless values are the circumradii of the vertex sets and need no
/// repair.
pub fn filtration_validity(
    (n, periodic, seed): (usize, bool, u64),
    h0: f64,
) -> Result<(), TestCaseError> {
    let tess = random_tess(n, periodic, seed);
    let noise = NoiseConfig {
        vertex_noise_h0: h0,
        seed: seed ^ 0x5eed,
        ..NoiseConfig::default()
    };
    let cx = build_filtration(&tess, &noise);
    let total: usize = tess.face_counts().iter().sum();
    prop_assert_eq!(cx.len(), total);
    for (i, f) in cx.faces.iter().enumerate() {
        for &b in &f.boundary {
            prop_assert!(b < i, "face {} precedes boundary {}", i, b);
            prop_assert!(cx.faces[b].value <= f.value);
        }
        if h0 == 0.0 && f.dim > 0 {
            let r = circumradius(&tess.face(f.dim, f.id).coords);
            prop_assert!(
                (r - f.value).abs() <= 1e-12,
                "value {} vs circumradius {}",
                f.value,
                r
            );
        }
    }
    if h0 == 0.0 {
        prop_assert_eq!(cx.fixups, 0);
    }
    Ok(())
}

/// Persistent Betti numbers grow with `b` and shrink with `d`.
pub fn betti_monotone(
    case: (usize, bool, u64),
    q: usize,
    levels: [f64; 4],
) -> Result<(), TestCaseError> {
    let tess = random_tess(case.0, case.1, case.2);
    let diagram = reduce(&build_filtration(&tess, &NoiseConfig::default())).unwrap();
    let mut l = levels;
    l.sort_by(f64::total_cmp);
    let [b1, b2, d1, d2] = l;
    let at = |b, d| persistent_betti(&diagram, q, b, d).unwrap();
    prop_assert!(at(b1, d1) <= at(b2, d1));
    prop_assert!(at(b1, d1) >= at(b1, d2));
    prop_assert!(at(b2, d2) <= at(b2, d1));
    prop_assert!(persistent_betti(&diagram, q, d2 + 1.0, d2).is_err());
    Ok(())
}

/// `chi(s)` equals the alternating sum of the Betti numbers of the
/// sublevel complex at every level.
pub fn euler_consistency(case: (usize, bool, u64), n_levels: usize) -> Result<(), TestCaseError> {
    let tess = random_tess(case.0, case.1, case.2);
    let cx = build_filtration(&tess, &NoiseConfig::default());
    let diagram = reduce(&cx).unwrap();
    let top = cx.faces.last().unwrap().value;
    let grid: Vec<f64> = (0..=n_levels)
        .map(|k| top * 1.1 * k as f64 / n_levels as f64)
        .collect();
    let chi = euler_curve(&cx, &grid);
    for (s, c) in grid.iter().zip(&chi) {
        let alt: i64 = diagram
            .features
            .iter()
            .filter(|f| f.birth <= *s && f.death > *s)
            .map(|f| if f.dim % 2 == 0 { 1 } else { -1 })
            .sum();
        prop_assert_eq!(alt, *c, "level {}", s);
    }
    Ok(())
}

/// A periodic tessellation is a 3-torus: Euler characteristic 0, Betti
/// numbers 1, 3, 3, 1.
pub fn torus_euler(n: usize, seed: u64) -> Result<(), TestCaseError> {
    let tess = random_tess(n, true, seed);
    prop_assert_eq!(tess.euler_characteristic(), 0);
    let cx = build_filtration(&tess, &NoiseConfig::default());
    let top = cx.faces.last().unwrap().value;
    prop_assert_eq!(euler_curve(&cx, &[top]), vec![0]);
    prop_assert_eq!(reduce(&cx).unwrap().betti(3), vec![1, 3, 3, 1]);
    Ok(())
}

/// Pair counts ignore labels and torus translations.
pub fn pair_count_symmetry(
    n: usize,
    seed: u64,
    r0: f64,
    shift: [f64; 3],
    rotate: usize,
) -> Result<(), TestCaseError> {
    let w = Window::unit_torus();
    let pts = sample_binomial(n, &w, seed);
    let base = pair_count(&pts, r0, &w);
    let mut relabeled = pts.clone();
    relabeled.rotate_left(rotate % n.max(1));
    relabeled.reverse();
    prop_assert_eq!(pair_count(&relabeled, r0, &w), base);
    let s = Vec3::from(shift);
    let moved: Vec<Vec3> = pts.iter().map(|p| w.wrap_point(&(p + s))).collect();
    // translation may move a distance across r0 by rounding only
    let lo = pair_count(&moved, r0 - 1e-12, &w);
    let hi = pair_count(&moved, r0 + 1e-12, &w);
    prop_assert!(lo <= base && base <= hi, "{} not in [{}, {}]", base, lo, hi);
    Ok(())
}
