//! Test statistics, Monte-Carlo calibration under a null model, z-tests and
//! power tables.

pub mod dist;

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::erf::erfc;
use thiserror::Error;

use crate::filtration::{build_filtration, NoiseConfig};
use crate::geometry::{face_eccentricity, face_inradius, polygon_area, Face, Tessellation};
use crate::models::{ModelError, ModelSpec};
use crate::persistence::{m_localized_pairs, reduce, PersistenceDiagram, PersistenceError};
use crate::seeds::{replication_seed, Phase};

pub use dist::{
    anderson_darling_normal, density_export, ks_two_sample, mean, quantile, skewness, variance,
    Bandwidth, Density,
};

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("calibration variance is zero; the statistic is constant under the null")]
    ZeroVariance,
    #[error("replication {rep} of model `{model}` failed: {source}")]
    Sampling {
        model: String,
        rep: usize,
        #[source]
        source: ModelError,
    },
    #[error("{0}")]
    Persistence(#[from] PersistenceError),
    #[error("invalid statistic: {0}")]
    InvalidSpec(String),
    #[error("seed reuse: {0}")]
    SeedReuse(String),
    #[error("degenerate sample: {0}")]
    Degenerate(String),
}

/// Number of interior 2-faces with area above `a`.
pub fn t_area(tess: &Tessellation, a: f64) -> usize {
    tess.interior_faces()
        .filter(|(_, f)| polygon_area(&f.coords) > a)
        .count()
}

/// Thickness of each polygon edge (vertex `j` to `j + 1`) of a 2-face, from
/// per-edge values indexed by tessellation edge id.
pub fn face_edge_thicknesses(tess: &Tessellation, face: &Face, per_edge: &[f64]) -> Vec<f64> {
    let n = face.vertices.len();
    (0..n)
        .map(|j| {
            let (a, b) = (face.vertices[j], face.vertices[(j + 1) % n]);
            face.boundary
                .iter()
                .find(|&&e| {
                    let v = &tess.face(1, e).vertices;
                    (v[0] == a && v[1] == b) || (v[0] == b && v[1] == a)
                })
                .map_or(0.0, |&e| per_edge[e])
        })
        .collect()
}

fn inradius_of(tess: &Tessellation, face: &Face, thickness: Option<&[f64]>) -> f64 {
    let t = thickness.map(|per_edge| face_edge_thicknesses(tess, face, per_edge));
    // a face the LP cannot handle has nothing inside its dilated edges
    face_inradius(face, t.as_deref()).unwrap_or(0.0)
}

/// Number of interior 2-faces with inradius above `a`. `thickness` holds
/// one value per tessellation edge.
pub fn t_inradius(tess: &Tessellation, a: f64, thickness: Option<&[f64]>) -> usize {
    tess.interior_faces()
        .filter(|(_, f)| inradius_of(tess, f, thickness) > a)
        .count()
}

/// Edge-based M-bounded persistent Betti number: interior 2-faces with
/// inradius above `s` and eccentricity at most `m`.
pub fn edge_betti(tess: &Tessellation, m: f64, s: f64, thickness: Option<&[f64]>) -> usize {
    tess.interior_faces()
        .filter(|&(id, f)| {
            inradius_of(tess, f, thickness) > s
                && face_eccentricity(tess, 2, id).is_ok_and(|e| e <= m)
        })
        .count()
}

/// Number of `q`-features with finite death and lifetime above `a`.
pub fn t_persistence(diagram: &PersistenceDiagram, q: usize, a: f64) -> usize {
    diagram
        .of_dim(q)
        .filter(|f| !f.is_essential() && f.lifetime() > a)
        .count()
}

/// Sum of the finite lifetimes of `q`-features.
pub fn total_persistence(diagram: &PersistenceDiagram, q: usize) -> f64 {
    diagram
        .of_dim(q)
        .filter(|f| !f.is_essential())
        .map(|f| f.lifetime())
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticKind {
    /// Face areas above the threshold.
    Area,
    /// Face inradii above the threshold.
    Inradius,
    /// Global lifetimes of `q`-features above the threshold.
    Persistence,
    /// Inradii above the threshold among faces of eccentricity at most `m`.
    EdgeBetti,
    /// Lifetimes of M-localized `q`-features above the threshold.
    LocalizedBetti,
    /// Euler characteristic of the filtration at the threshold level.
    Euler,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Threshold {
    /// Quantile level in (0, 1) of the pooled null observable.
    Quantile(f64),
    Absolute(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pooling {
    /// Quantile of all per-face or per-feature values over all replications.
    #[default]
    Pooled,
    /// Median over replications of the per-replication quantile.
    PerRepMedian,
}

fn default_q() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatisticSpec {
    pub kind: StatisticKind,
    pub threshold: Threshold,
    /// Feature dimension for the persistence kinds.
    #[serde(default = "default_q")]
    pub q_dim: usize,
    /// Eccentricity bound and localization radius; `None` is unbounded.
    #[serde(default)]
    pub m: Option<f64>,
    #[serde(default)]
    pub pooling: Pooling,
    #[serde(default)]
    pub noise: NoiseConfig,
}

impl StatisticSpec {
    pub fn new(kind: StatisticKind, threshold: Threshold) -> Self {
        StatisticSpec {
            kind,
            threshold,
            q_dim: 1,
            m: None,
            pooling: Pooling::Pooled,
            noise: NoiseConfig::default(),
        }
    }

    /// The three study statistics at their 40%, 60% and 70% quantiles.
    pub fn study() -> [StatisticSpec; 3] {
        [
            StatisticSpec::new(StatisticKind::Area, Threshold::Quantile(0.4)),
            StatisticSpec::new(StatisticKind::Inradius, Threshold::Quantile(0.6)),
            StatisticSpec::new(StatisticKind::Persistence, Threshold::Quantile(0.7)),
        ]
    }

    /// Short label such as `area@q0.4`.
    pub fn label(&self) -> String {
        let kind = match self.kind {
            StatisticKind::Area => "area",
            StatisticKind::Inradius => "inradius",
            StatisticKind::Persistence => "persistence",
            StatisticKind::EdgeBetti => "edge_betti",
            StatisticKind::LocalizedBetti => "localized_betti",
            StatisticKind::Euler => "euler",
        };
        match self.threshold {
            Threshold::Quantile(p) => format!("{kind}@q{p}"),
            Threshold::Absolute(a) => format!("{kind}@{a}"),
        }
    }

    pub fn validate(&self) -> Result<(), StatsError> {
        match self.threshold {
            Threshold::Quantile(p) if !(p > 0.0 && p < 1.0) => {
                return Err(StatsError::InvalidSpec(format!(
                    "threshold.quantile must lie in (0, 1), got {p}"
                )))
            }
            Threshold::Absolute(a) if !a.is_finite() => {
                return Err(StatsError::InvalidSpec(format!(
                    "threshold.absolute must be finite, got {a}"
                )))
            }
            _ => {}
        }
        if let Some(m) = self.m {
            if !(m > 0.0) {
                return Err(StatsError::InvalidSpec(format!(
                    "m must be positive, got {m}"
                )));
            }
        }
        if self.kind == StatisticKind::LocalizedBetti && self.m.is_none() {
            return Err(StatsError::InvalidSpec(
                "localized_betti needs a finite m".into(),
            ));
        }
        self.noise.validate().map_err(StatsError::InvalidSpec)
    }
}

/// Per-replication values a statistic counts: the statistic at threshold
/// `a` is `offset + sum of weights[i] over values[i] > a`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Observables {
    pub values: Vec<f64>,
    pub weights: Vec<i64>,
    pub offset: i64,
}

impl Observables {
    fn counting(values: Vec<f64>) -> Self {
        let weights = vec![1; values.len()];
        Observables {
            values,
            weights,
            offset: 0,
        }
    }

    pub fn statistic(&self, a: f64) -> f64 {
        let above: i64 = self
            .values
            .iter()
            .zip(&self.weights)
            .filter(|(v, _)| **v > a)
            .map(|(_, w)| *w)
            .sum();
        (self.offset + above) as f64
    }
}

/// Observables of one statistic on one tessellation.
pub fn observables(tess: &Tessellation, spec: &StatisticSpec) -> Result<Observables, StatsError> {
    let thickness = spec.noise.edge_thicknesses(tess.faces(1).len());
    let m = spec.m.unwrap_or(f64::INFINITY);
    Ok(match spec.kind {
        StatisticKind::Area => Observables::counting(
            tess.interior_faces()
                .map(|(_, f)| polygon_area(&f.coords))
                .collect(),
        ),
        StatisticKind::Inradius => Observables::counting(
            tess.interior_faces()
                .map(|(_, f)| inradius_of(tess, f, thickness.as_deref()))
                .collect(),
        ),
        StatisticKind::EdgeBetti => Observables::counting(
            tess.interior_faces()
                .filter(|&(id, _)| face_eccentricity(tess, 2, id).is_ok_and(|e| e <= m))
                .map(|(_, f)| inradius_of(tess, f, thickness.as_deref()))
                .collect(),
        ),
        StatisticKind::Persistence => {
            let diagram = reduce(&build_filtration(tess, &spec.noise))?;
            Observables::counting(
                diagram
                    .of_dim(spec.q_dim)
                    .filter(|f| !f.is_essential() && f.lifetime() > 0.0)
                    .map(|f| f.lifetime())
                    .collect(),
            )
        }
        StatisticKind::LocalizedBetti => {
            let local = m_localized_pairs(tess, m, spec.q_dim, &spec.noise)?;
            Observables::counting(
                local
                    .pairs
                    .iter()
                    .flatten()
                    .map(|(b, d)| d - b)
                    .filter(|l| *l > 0.0)
                    .collect(),
            )
        }
        StatisticKind::Euler => {
            let cx = build_filtration(tess, &spec.noise);
            let sign = |dim: usize| if dim % 2 == 0 { 1 } else { -1 };
            let total: i64 = cx.faces.iter().map(|f| sign(f.dim)).sum();
            Observables {
                values: cx.faces.iter().map(|f| f.value).collect(),
                weights: cx.faces.iter().map(|f| -sign(f.dim)).collect(),
                offset: total,
            }
        }
    })
}

/// Threshold a spec resolves to on a set of null replications.
pub fn resolve_threshold(spec: &StatisticSpec, reps: &[Observables]) -> Result<f64, StatsError> {
    match spec.threshold {
        Threshold::Absolute(a) => Ok(a),
        Threshold::Quantile(p) => match spec.pooling {
            Pooling::Pooled => {
                let pooled: Vec<f64> = reps.iter().flat_map(|o| o.values.iter().copied()).collect();
                if pooled.is_empty() {
                    return Err(StatsError::Degenerate(format!(
                        "no observations to resolve the {p} quantile"
                    )));
                }
                Ok(quantile(&pooled, p))
            }
            Pooling::PerRepMedian => {
                let per_rep: Vec<f64> = reps
                    .iter()
                    .filter(|o| !o.values.is_empty())
                    .map(|o| quantile(&o.values, p))
                    .collect();
                if per_rep.is_empty() {
                    return Err(StatsError::Degenerate(format!(
                        "no observations to resolve the {p} quantile"
                    )));
                }
                Ok(quantile(&per_rep, 0.5))
            }
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub null_model: String,
    pub statistic: String,
    pub n_reps: usize,
    pub mean: f64,
    pub variance: f64,
    pub threshold: f64,
    /// Statistic of every calibration replication, by replication index.
    pub values: Vec<f64>,
}

impl Calibration {
    pub fn from_observables(
        null_model: &str,
        spec: &StatisticSpec,
        reps: &[Observables],
    ) -> Result<Calibration, StatsError> {
        if reps.len() < 2 {
            return Err(StatsError::InvalidSpec(format!(
                "calibration needs at least 2 replications, got {}",
                reps.len()
            )));
        }
        let threshold = resolve_threshold(spec, reps)?;
        let values: Vec<f64> = reps.iter().map(|o| o.statistic(threshold)).collect();
        Ok(Calibration {
            null_model: null_model.to_string(),
            statistic: spec.label(),
            n_reps: reps.len(),
            mean: mean(&values),
            variance: variance(&values),
            threshold,
            values,
        })
    }
}

/// Observables of every spec on replications `0..n_reps` of a model, by
/// replication index.
pub fn simulate(
    model: &ModelSpec,
    specs: &[StatisticSpec],
    phase: Phase,
    n_reps: usize,
    master_seed: u64,
) -> Result<Vec<Vec<Observables>>, StatsError> {
    (0..n_reps)
        .into_par_iter()
        .map(|rep| {
            let seed = replication_seed(master_seed, phase, &model.name, rep as u64);
            let tess = model.sample(seed).map_err(|source| StatsError::Sampling {
                model: model.name.clone(),
                rep,
                source,
            })?;
            specs.iter().map(|s| observables(&tess, s)).collect()
        })
        .collect()
}

/// Calibrates one statistic on `n_reps` null replications.
pub fn calibrate(
    model: &ModelSpec,
    spec: &StatisticSpec,
    n_reps: usize,
    master_seed: u64,
) -> Result<Calibration, StatsError> {
    spec.validate()?;
    let reps: Vec<Observables> = simulate(
        model,
        std::slice::from_ref(spec),
        Phase::Calibration,
        n_reps,
        master_seed,
    )?
    .into_iter()
    .map(|mut v| v.remove(0))
    .collect();
    Calibration::from_observables(&model.name, spec, &reps)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub statistic: String,
    pub value: f64,
    pub threshold: f64,
    pub mean: f64,
    pub variance: f64,
    pub z: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub reject: bool,
}

/// Two-sided p-value of a standard normal z-score.
pub fn two_sided_p(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2)
}

/// `Phi^{-1}(1 - alpha / 2)`.
pub fn critical_value(alpha: f64) -> f64 {
    Normal::standard().inverse_cdf(1.0 - alpha / 2.0)
}

/// Two-sided z-test of an observed statistic against its calibration.
/// Rejects when `|z|` strictly exceeds the critical value.
pub fn gof_test(value: f64, cal: &Calibration, alpha: f64) -> Result<TestReport, StatsError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StatsError::InvalidSpec(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    if !(cal.variance > 0.0) {
        return Err(StatsError::ZeroVariance);
    }
    let z = (value - cal.mean) / cal.variance.sqrt();
    Ok(TestReport {
        statistic: cal.statistic.clone(),
        value,
        threshold: cal.threshold,
        mean: cal.mean,
        variance: cal.variance,
        z,
        p_value: two_sided_p(z),
        alpha,
        reject: z.abs() > critical_value(alpha),
    })
}

/// Master seed and phase of one stream of replication seeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedStream {
    pub master: u64,
    pub phase: Phase,
}

impl SeedStream {
    pub fn seed(&self, model: &str, rep: usize) -> u64 {
        replication_seed(self.master, self.phase, model, rep as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerTable {
    pub statistic: String,
    pub nulls: Vec<String>,
    pub alternatives: Vec<String>,
    /// `rates[i][j]`: share of alternative `j` replications rejected under
    /// the calibration of null `i`.
    pub rates: Vec<Vec<f64>>,
    pub calibrations: Vec<Calibration>,
}

/// Checks that no replication seed is shared between calibration and test.
pub fn check_seed_streams(
    calibration: &SeedStream,
    test: &SeedStream,
    nulls: &[&ModelSpec],
    alternatives: &[&ModelSpec],
    n_calib: usize,
    n_test: usize,
) -> Result<(), StatsError> {
    if calibration == test {
        return Err(StatsError::SeedReuse(
            "calibration and test phases use the same seed stream".into(),
        ));
    }
    let used: HashSet<u64> = nulls
        .iter()
        .flat_map(|m| (0..n_calib).map(|r| calibration.seed(&m.name, r)))
        .collect();
    for m in alternatives {
        for r in 0..n_test {
            if used.contains(&test.seed(&m.name, r)) {
                return Err(StatsError::SeedReuse(format!(
                    "test replication {r} of `{}` repeats a calibration seed",
                    m.name
                )));
            }
        }
    }
    Ok(())
}

fn simulate_stream(
    model: &ModelSpec,
    specs: &[StatisticSpec],
    stream: &SeedStream,
    n: usize,
) -> Result<Vec<Vec<Observables>>, StatsError> {
    simulate(model, specs, stream.phase, n, stream.master)
}

/// Rejection rates of every (null, alternative) pair for several statistics
/// at once. Each model is simulated once per phase and all statistics are
/// evaluated on the same replications.
#[allow(clippy::too_many_arguments)]
pub fn power_tables(
    nulls: &[&ModelSpec],
    alternatives: &[&ModelSpec],
    specs: &[StatisticSpec],
    n_calib: usize,
    n_test: usize,
    alpha: f64,
    calibration: SeedStream,
    test: SeedStream,
) -> Result<Vec<PowerTable>, StatsError> {
    for s in specs {
        s.validate()?;
    }
    check_seed_streams(&calibration, &test, nulls, alternatives, n_calib, n_test)?;
    let calib_obs: Vec<Vec<Vec<Observables>>> = nulls
        .iter()
        .map(|m| simulate_stream(m, specs, &calibration, n_calib))
        .collect::<Result<_, _>>()?;
    let test_obs: Vec<Vec<Vec<Observables>>> = alternatives
        .iter()
        .map(|m| simulate_stream(m, specs, &test, n_test))
        .collect::<Result<_, _>>()?;
    power_tables_from(nulls, alternatives, specs, &calib_obs, &test_obs, alpha)
}

/// Power tables from precomputed observables, indexed `[model][rep][spec]`.
pub fn power_tables_from(
    nulls: &[&ModelSpec],
    alternatives: &[&ModelSpec],
    specs: &[StatisticSpec],
    calib_obs: &[Vec<Vec<Observables>>],
    test_obs: &[Vec<Vec<Observables>>],
    alpha: f64,
) -> Result<Vec<PowerTable>, StatsError> {
    let crit = critical_value(alpha);
    specs
        .iter()
        .enumerate()
        .map(|(k, spec)| {
            let mut calibrations = Vec::with_capacity(nulls.len());
            let mut rates = Vec::with_capacity(nulls.len());
            for (i, null) in nulls.iter().enumerate() {
                let reps: Vec<Observables> = calib_obs[i].iter().map(|r| r[k].clone()).collect();
                let cal = Calibration::from_observables(&null.name, spec, &reps)?;
                if !(cal.variance > 0.0) {
                    return Err(StatsError::ZeroVariance);
                }
                let sd = cal.variance.sqrt();
                let row = test_obs
                    .iter()
                    .map(|reps| {
                        let rejected = reps
                            .iter()
                            .filter(|r| {
                                ((r[k].statistic(cal.threshold) - cal.mean) / sd).abs() > crit
                            })
                            .count();
                        rejected as f64 / reps.len().max(1) as f64
                    })
                    .collect();
                rates.push(row);
                calibrations.push(cal);
            }
            Ok(PowerTable {
                statistic: spec.label(),
                nulls: nulls.iter().map(|m| m.name.clone()).collect(),
                alternatives: alternatives.iter().map(|m| m.name.clone()).collect(),
                rates,
                calibrations,
            })
        })
        .collect()
}

/// Power table of a single statistic.
#[allow(clippy::too_many_arguments)]
pub fn power_table(
    nulls: &[&ModelSpec],
    alternatives: &[&ModelSpec],
    spec: &StatisticSpec,
    n_calib: usize,
    n_test: usize,
    alpha: f64,
    calibration: SeedStream,
    test: SeedStream,
) -> Result<PowerTable, StatsError> {
    let mut t = power_tables(
        nulls,
        alternatives,
        std::slice::from_ref(spec),
        n_calib,
        n_test,
        alpha,
        calibration,
        test,
    )?;
    Ok(t.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cal(mean: f64, variance: f64) -> Calibration {
        Calibration {
            null_model: "m".into(),
            statistic: "s".into(),
            n_reps: 10,
            mean,
            variance,
            threshold: 0.0,
            values: vec![],
        }
    }

    #[test]
    fn z_test_conventions() {
        let r = gof_test(3.0, &cal(3.0, 2.0), 0.05).unwrap();
        assert_eq!((r.z, r.p_value, r.reject), (0.0, 1.0, false));
        let c = critical_value(0.05);
        assert!(!gof_test(c, &cal(0.0, 1.0), 0.05).unwrap().reject);
        assert!(gof_test(c + 1e-9, &cal(0.0, 1.0), 0.05).unwrap().reject);
        assert!(matches!(
            gof_test(1.0, &cal(1.0, 0.0), 0.05),
            Err(StatsError::ZeroVariance)
        ));
    }

    #[test]
    fn large_z_score_pair() {
        let p = two_sided_p(12.8);
        assert!((p / 1.6e-37 - 1.0).abs() < 0.05, "{p:e}");
    }

    #[test]
    fn affine_rescaling_keeps_z() {
        let a = gof_test(7.3, &cal(5.0, 4.0), 0.05).unwrap();
        let (s, t) = (3.7, -11.0);
        let b = gof_test(s * 7.3 + t, &cal(s * 5.0 + t, s * s * 4.0), 0.05).unwrap();
        assert!((a.z - b.z).abs() < 1e-12);
    }

    #[test]
    fn observable_statistic() {
        let o = Observables::counting(vec![0.1, 0.5, 0.9]);
        assert_eq!(o.statistic(0.5), 1.0);
        assert_eq!(o.statistic(0.0), 3.0);
        let spec = StatisticSpec::new(StatisticKind::Area, Threshold::Absolute(0.25));
        assert_eq!(resolve_threshold(&spec, &[o]).unwrap(), 0.25);
    }
}
