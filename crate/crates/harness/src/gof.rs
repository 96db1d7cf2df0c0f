//! Goodness-of-fit test of an imported tessellation against a null model.

use std::path::Path;

use serde::Serialize;
use tessgof_core::geometry::import_tessellation;
use tessgof_core::seeds::Phase;
use tessgof_core::stats::{
    gof_test, observables, simulate, Calibration, StatisticKind, StatisticSpec, TestReport,
    Threshold,
};

use crate::config::Experiment;
use crate::error::HarnessError;

#[derive(Debug, Clone, Serialize)]
pub struct GofOutcome {
    pub config_sha256: String,
    pub master_seed: u64,
    pub data: String,
    pub null_model: String,
    pub n_calibration: usize,
    pub report: TestReport,
}

/// Parses `kind@qLEVEL` (quantile threshold), `kind@VALUE` (absolute
/// threshold) or a JSON statistic spec.
pub fn parse_stat(text: &str) -> Result<StatisticSpec, HarnessError> {
    let text = text.trim();
    let bad = |msg: String| HarnessError::Config(format!("statistic `{text}`: {msg}"));
    let spec = if text.starts_with('{') {
        serde_json::from_str(text).map_err(|e| bad(e.to_string()))?
    } else {
        let (kind, threshold) = text
            .split_once('@')
            .ok_or_else(|| bad("expected `kind@qLEVEL`, `kind@VALUE` or a JSON spec".into()))?;
        let kind = match kind {
            "area" => StatisticKind::Area,
            "inradius" => StatisticKind::Inradius,
            "persistence" => StatisticKind::Persistence,
            "edge_betti" => StatisticKind::EdgeBetti,
            "localized_betti" => StatisticKind::LocalizedBetti,
            "euler" => StatisticKind::Euler,
            other => return Err(bad(format!("unknown kind `{other}`"))),
        };
        let number = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| bad(format!("`{s}` is not a number")))
        };
        let threshold = match threshold.strip_prefix('q') {
            Some(level) => Threshold::Quantile(number(level)?),
            None => Threshold::Absolute(number(threshold)?),
        };
        StatisticSpec::new(kind, threshold)
    };
    spec.validate().map_err(|e| bad(e.to_string()))?;
    Ok(spec)
}

/// Calibrates `spec` under the null model and tests the tessellation in
/// `data` against it. The null is the named model, or the experiment's only
/// null when there is one.
pub fn run_gof_on_import(
    data: &Path,
    exp: &Experiment,
    model: Option<&str>,
    spec: &StatisticSpec,
    alpha: f64,
) -> Result<GofOutcome, HarnessError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(HarnessError::Config(format!(
            "alpha: must lie in (0, 1), got {alpha}"
        )));
    }
    let name = match model {
        Some(n) => n.to_string(),
        None if exp.nulls.len() == 1 => exp.nulls[0].clone(),
        None => {
            return Err(HarnessError::Config(format!(
                "the config has {} null models; choose one with --model",
                exp.nulls.len()
            )))
        }
    };
    let null = exp
        .model(&name)
        .ok_or_else(|| HarnessError::Config(format!("--model: unknown model `{name}`")))?;
    let tess = import_tessellation(data).map_err(|source| HarnessError::Import {
        path: data.to_path_buf(),
        source,
    })?;
    if tess.window() != &null.window {
        log::warn!(
            "data window {:?} differs from the null model window {:?}; counts scale with volume",
            tess.window(),
            null.window
        );
    }
    log::info!("{name}: {} calibration replications", exp.n_calibration);
    let reps = simulate(
        null,
        std::slice::from_ref(spec),
        Phase::Calibration,
        exp.n_calibration,
        exp.master_seed,
    )?;
    let reps: Vec<_> = reps.into_iter().map(|mut r| r.remove(0)).collect();
    let cal = Calibration::from_observables(&name, spec, &reps)?;
    let value = observables(&tess, spec)?.statistic(cal.threshold);
    let report = gof_test(value, &cal, alpha)?;
    Ok(GofOutcome {
        config_sha256: exp.hash(),
        master_seed: exp.master_seed,
        data: data.display().to_string(),
        null_model: name,
        n_calibration: exp.n_calibration,
        report,
    })
}
