//! Generator point processes: Binomial, fixed-N Strauss and force-biased
//! sphere packings, plus radius laws for Laguerre marks.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{MarkedPoint, Vec3, Window};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeneratorError {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error(
        "packing did not converge after {iterations} iterations: \
         {overlapping_pairs} pairs still overlap, deepest overlap {max_overlap:e}"
    )]
    NonConvergence {
        iterations: usize,
        overlapping_pairs: usize,
        max_overlap: f64,
    },
}

pub(crate) fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uniform_point<R: Rng>(rng: &mut R, l: f64) -> Vec3 {
    let mut c = || {
        let x = rng.random::<f64>() * l;
        if x >= l {
            0.0
        } else {
            x
        }
    };
    Vec3::new(c(), c(), c())
}

/// `n` i.i.d. uniform points in the window.
pub fn sample_binomial(n: usize, window: &Window, seed: u64) -> Vec<Vec3> {
    let mut rng = rng_from(seed);
    (0..n)
        .map(|_| uniform_point(&mut rng, window.edge_length))
        .collect()
}

/// Uniform cell grid for fixed-range neighbour queries.
struct Grid {
    k: usize,
    size: f64,
    periodic: bool,
    buckets: Vec<Vec<usize>>,
}

impl Grid {
    /// `None` when fewer than three cells fit per axis, where wrapped
    /// neighbourhoods would overlap.
    fn new(points: &[Vec3], range: f64, window: &Window) -> Option<Grid> {
        let l = window.edge_length;
        let k = ((l / range).floor() as usize).min(256);
        if k < 3 {
            return None;
        }
        let mut g = Grid {
            k,
            size: l / k as f64,
            periodic: window.periodic,
            buckets: vec![Vec::new(); k * k * k],
        };
        for (i, p) in points.iter().enumerate() {
            let b = g.index(g.cell(p));
            g.buckets[b].push(i);
        }
        Some(g)
    }

    fn cell(&self, p: &Vec3) -> [usize; 3] {
        let f = |x: f64| ((x / self.size).floor().max(0.0) as usize).min(self.k - 1);
        [f(p.x), f(p.y), f(p.z)]
    }

    fn index(&self, c: [usize; 3]) -> usize {
        (c[0] * self.k + c[1]) * self.k + c[2]
    }

    /// Calls `f` on every point in the 27 cells around `p`.
    fn for_near(&self, p: &Vec3, mut f: impl FnMut(usize)) {
        let c = self.cell(p);
        let k = self.k as isize;
        for dx in -1..=1isize {
            for dy in -1..=1isize {
                for dz in -1..=1isize {
                    let mut n = [0usize; 3];
                    let mut inside = true;
                    for (a, d) in [dx, dy, dz].into_iter().enumerate() {
                        let v = c[a] as isize + d;
                        if self.periodic {
                            n[a] = v.rem_euclid(k) as usize;
                        } else if (0..k).contains(&v) {
                            n[a] = v as usize;
                        } else {
                            inside = false;
                        }
                    }
                    if inside {
                        for &j in &self.buckets[self.index(n)] {
                            f(j);
                        }
                    }
                }
            }
        }
    }
}

/// Unordered pairs `(i, j)`, `i < j`, at distance at most `range`.
fn near_pairs(points: &[Vec3], range: f64, window: &Window) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    match Grid::new(points, range, window) {
        Some(grid) => {
            for (i, p) in points.iter().enumerate() {
                grid.for_near(p, |j| {
                    if j > i && window.distance(p, &points[j]) <= range {
                        out.push((i, j));
                    }
                });
            }
        }
        None => {
            for i in 0..points.len() {
                for j in i + 1..points.len() {
                    if window.distance(&points[i], &points[j]) <= range {
                        out.push((i, j));
                    }
                }
            }
        }
    }
    out
}

/// Number of unordered pairs at distance at most `r0` (torus distance on
/// periodic windows).
pub fn pair_count(points: &[Vec3], r0: f64, window: &Window) -> usize {
    near_pairs(points, r0, window).len()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StraussParams {
    pub n_points: usize,
    pub gamma: f64,
    pub r0: f64,
    #[serde(default = "default_sweeps")]
    pub n_sweeps: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_sweeps() -> usize {
    500
}

impl StraussParams {
    pub fn validate(&self, window: &Window) -> Result<(), GeneratorError> {
        if self.n_points == 0 {
            return Err(GeneratorError::InvalidParams(
                "n_points must be positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(GeneratorError::InvalidParams(format!(
                "gamma must lie in [0, 1], got {}",
                self.gamma
            )));
        }
        if !(self.r0 > 0.0 && self.r0 < window.edge_length / 2.0) {
            return Err(GeneratorError::InvalidParams(format!(
                "r0 must lie in (0, L/2), got {}",
                self.r0
            )));
        }
        if self.n_sweeps == 0 {
            return Err(GeneratorError::InvalidParams(
                "n_sweeps must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct StraussSample {
    pub points: Vec<Vec3>,
    /// Pair count after each sweep, burn-in included.
    pub s_trace: Vec<usize>,
    /// Acceptance rate over the last sweep.
    pub final_acceptance: f64,
    /// Acceptance rate over the sweeps after burn-in.
    pub acceptance: f64,
}

/// Fixed-N Strauss process by Metropolis-Hastings relocation of one point at
/// a time. Starts from a Binomial configuration and runs
/// `n_sweeps * n_points` proposals; the first half of the sweeps is burn-in.
pub fn sample_strauss_fixed_n(
    params: &StraussParams,
    window: &Window,
) -> Result<StraussSample, GeneratorError> {
    params.validate(window)?;
    let n = params.n_points;
    let mut rng = rng_from(params.seed);
    let mut pts: Vec<Vec3> = (0..n)
        .map(|_| uniform_point(&mut rng, window.edge_length))
        .collect();
    let neighbours = |pts: &[Vec3], i: usize, p: &Vec3| {
        pts.iter()
            .enumerate()
            .filter(|&(j, q)| j != i && window.distance(p, q) <= params.r0)
            .count()
    };
    let mut s = pair_count(&pts, params.r0, window);
    let mut s_trace = Vec::with_capacity(params.n_sweeps);
    let burn_in = params.n_sweeps / 2;
    let (mut accepted_after, mut proposed_after) = (0usize, 0usize);
    let mut final_acceptance = 0.0;
    for sweep in 0..params.n_sweeps {
        let mut accepted = 0usize;
        for _ in 0..n {
            let i = rng.random_range(0..n);
            let cand = uniform_point(&mut rng, window.edge_length);
            let before = neighbours(&pts, i, &pts[i]) as i64;
            let after = neighbours(&pts, i, &cand) as i64;
            let delta = after - before;
            let u: f64 = rng.random();
            let accept = if delta <= 0 {
                true
            } else if params.gamma == 0.0 {
                false
            } else {
                u < params.gamma.powi(delta as i32)
            };
            if accept {
                pts[i] = cand;
                s = (s as i64 + delta) as usize;
                accepted += 1;
            }
        }
        s_trace.push(s);
        if sweep >= burn_in {
            accepted_after += accepted;
            proposed_after += n;
        }
        final_acceptance = accepted as f64 / n as f64;
    }
    if final_acceptance < 0.005 {
        log::warn!(
            "Strauss chain accepted {:.3}% of the last sweep's proposals; \
             the sample may not have converged",
            100.0 * final_acceptance
        );
    }
    Ok(StraussSample {
        points: pts,
        s_trace,
        final_acceptance,
        acceptance: accepted_after as f64 / proposed_after.max(1) as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackingParams {
    pub radii: Vec<f64>,
    #[serde(default = "default_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_overlap_tolerance")]
    pub overlap_tolerance: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_iterations() -> usize {
    200_000
}

fn default_overlap_tolerance() -> f64 {
    1e-9
}

/// Densest volume fraction accepted; random close packing sits near 0.64.
pub const MAX_VOLUME_FRACTION: f64 = 0.64;

/// Total ball volume over window volume.
pub fn volume_fraction(radii: &[f64], window: &Window) -> f64 {
    radii
        .iter()
        .map(|r| 4.0 / 3.0 * PI * r.powi(3))
        .sum::<f64>()
        / window.volume(3)
}

impl PackingParams {
    pub fn n_spheres(&self) -> usize {
        self.radii.len()
    }

    pub fn validate(&self, window: &Window) -> Result<(), GeneratorError> {
        if self.radii.is_empty() {
            return Err(GeneratorError::InvalidParams("no spheres to pack".into()));
        }
        if let Some(r) = self.radii.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(GeneratorError::InvalidParams(format!(
                "sphere radii must be positive, got {r}"
            )));
        }
        let rmax = self.radii.iter().copied().fold(0.0, f64::max);
        if 4.0 * rmax >= window.edge_length {
            return Err(GeneratorError::InvalidParams(format!(
                "largest radius {rmax} is too large for window edge {}",
                window.edge_length
            )));
        }
        let phi = volume_fraction(&self.radii, window);
        if phi > MAX_VOLUME_FRACTION {
            return Err(GeneratorError::InvalidParams(format!(
                "volume fraction {phi:.4} exceeds {MAX_VOLUME_FRACTION}"
            )));
        }
        if !(self.overlap_tolerance > 0.0) {
            return Err(GeneratorError::InvalidParams(
                "overlap_tolerance must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Collective-rearrangement packing. Centers start uniform; in each
/// iteration every overlapping pair pushes both spheres apart by half the
/// overlap along the center line, and all pushes are applied at once.
/// Stops when no overlap exceeds the tolerance.
pub fn sample_force_biased(
    params: &PackingParams,
    window: &Window,
) -> Result<Vec<MarkedPoint>, GeneratorError> {
    params.validate(window)?;
    let mut rng = rng_from(params.seed);
    let centers = params
        .radii
        .iter()
        .map(|_| uniform_point(&mut rng, window.edge_length))
        .collect();
    relax_packing(centers, params, window, &mut rng)
}

/// Runs the rearrangement from the given centers. `rng` only breaks ties
/// between coincident centers.
pub fn relax_packing(
    mut centers: Vec<Vec3>,
    params: &PackingParams,
    window: &Window,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<MarkedPoint>, GeneratorError> {
    assert_eq!(centers.len(), params.radii.len());
    let l = window.edge_length;
    let radii = &params.radii;
    let rmax = radii.iter().copied().fold(0.0, f64::max);
    // Verlet list: candidate pairs within 2 rmax + skin, rebuilt once some
    // sphere has moved more than skin / 2 since the last build
    let skin = 0.2 * rmax;
    let mut candidates: Vec<(usize, usize)> = Vec::new();
    let mut moved = vec![0.0f64; centers.len()];
    let mut stale = true;
    let mut disp = vec![Vec3::zeros(); centers.len()];
    let mut last = (0usize, 0.0f64);
    for _ in 0..params.max_iterations {
        if stale {
            candidates = near_pairs(&centers, 2.0 * rmax + skin, window);
            moved.iter_mut().for_each(|m| *m = 0.0);
            stale = false;
        }
        disp.iter_mut().for_each(|d| *d = Vec3::zeros());
        let mut pairs = 0usize;
        let mut deepest = 0.0f64;
        for &(i, j) in &candidates {
            let d = window.displacement(&centers[i], &centers[j]);
            let dist = d.norm();
            let overlap = radii[i] + radii[j] - dist;
            if overlap <= params.overlap_tolerance {
                continue;
            }
            pairs += 1;
            deepest = deepest.max(overlap);
            let dir = if dist > 0.0 {
                d / dist
            } else {
                let v = Vec3::new(
                    rng.random::<f64>() - 0.5,
                    rng.random::<f64>() - 0.5,
                    rng.random::<f64>() - 0.5,
                );
                v / v.norm()
            };
            disp[i] -= dir * (0.5 * overlap);
            disp[j] += dir * (0.5 * overlap);
        }
        if pairs == 0 {
            return Ok(centers
                .iter()
                .zip(radii)
                .map(|(&c, &r)| MarkedPoint::new(c, r))
                .collect());
        }
        last = (pairs, deepest);
        for ((c, d), m) in centers.iter_mut().zip(&disp).zip(moved.iter_mut()) {
            let next = *c + d;
            *c = if window.periodic {
                window.wrap_point(&next)
            } else {
                next.map(|x| x.clamp(0.0, l * (1.0 - f64::EPSILON)))
            };
            *m += d.norm();
            if *m > 0.5 * skin {
                stale = true;
            }
        }
    }
    Err(GeneratorError::NonConvergence {
        iterations: params.max_iterations,
        overlapping_pairs: last.0,
        max_overlap: last.1,
    })
}

/// Distribution of Laguerre radii.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadiusLaw {
    Constant {
        radius: f64,
    },
    /// Ball volume `V` with `ln V ~ N(mu, sigma^2)`.
    LognormalVolume {
        mu: f64,
        sigma: f64,
    },
}

impl RadiusLaw {
    pub fn validate(&self) -> Result<(), GeneratorError> {
        match *self {
            RadiusLaw::Constant { radius } if !(radius.is_finite() && radius >= 0.0) => Err(
                GeneratorError::InvalidParams(format!("radius must be nonnegative, got {radius}")),
            ),
            RadiusLaw::LognormalVolume { mu, sigma } if !(mu.is_finite() && sigma > 0.0) => {
                Err(GeneratorError::InvalidParams(format!(
                    "lognormal law needs finite mu and positive sigma, got ({mu}, {sigma})"
                )))
            }
            _ => Ok(()),
        }
    }

    /// Expected ball volume.
    pub fn mean_volume(&self) -> f64 {
        match *self {
            RadiusLaw::Constant { radius } => 4.0 / 3.0 * PI * radius.powi(3),
            RadiusLaw::LognormalVolume { mu, sigma } => (mu + 0.5 * sigma * sigma).exp(),
        }
    }
}

/// Radius of the ball with volume `v`.
pub fn ball_radius(v: f64) -> f64 {
    (3.0 * v / (4.0 * PI)).cbrt()
}

pub fn sample_radii(law: &RadiusLaw, n: usize, seed: u64) -> Result<Vec<f64>, GeneratorError> {
    law.validate()?;
    Ok(match *law {
        RadiusLaw::Constant { radius } => vec![radius; n],
        RadiusLaw::LognormalVolume { mu, sigma } => {
            let dist = LogNormal::new(mu, sigma)
                .map_err(|e| GeneratorError::InvalidParams(e.to_string()))?;
            let mut rng = rng_from(seed);
            (0..n).map(|_| ball_radius(dist.sample(&mut rng))).collect()
        }
    })
}
