//! Experiment runs and the files they leave behind.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use tessgof_core::filtration::build_filtration;
use tessgof_core::geometry::write_tessellation;
use tessgof_core::models::ModelSpec;
use tessgof_core::persistence::reduce;
use tessgof_core::seeds::Phase;
use tessgof_core::stats::{
    anderson_darling_normal, check_seed_streams, critical_value, density_export, power_tables_from,
    simulate, skewness, Bandwidth, Observables, PowerTable, SeedStream, StatisticKind, StatsError,
};

use crate::config::Experiment;
use crate::error::HarnessError;

/// Everything a run produced, in memory.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub config_sha256: String,
    pub tables: Vec<PowerTable>,
    pub files: Vec<PathBuf>,
}

/// First line of every CSV and tessellation file.
pub fn provenance_line(hash: &str, seed: u64) -> String {
    format!("# tessgof config_sha256={hash} master_seed={seed}\n")
}

/// `area@q0.4` becomes `area_q0.4`.
fn file_label(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '.' || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

struct Writer<'a> {
    dir: &'a Path,
    header: String,
    files: Vec<PathBuf>,
}

impl Writer<'_> {
    fn write(&mut self, rel: &str, body: &str) -> Result<(), HarnessError> {
        let path = self.dir.join(rel);
        let io = |source| HarnessError::Io {
            path: path.clone(),
            source,
        };
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(io)?;
        }
        let mut text = self.header.clone();
        text.push_str(body);
        fs::write(&path, text).map_err(io)?;
        self.files.push(path);
        Ok(())
    }
}

fn stream(exp: &Experiment, phase: Phase) -> SeedStream {
    SeedStream {
        master: exp.master_seed,
        phase,
    }
}

fn simulate_all(
    exp: &Experiment,
    names: &[String],
    phase: Phase,
    n: usize,
) -> Result<Vec<Vec<Vec<Observables>>>, HarnessError> {
    names
        .iter()
        .map(|name| {
            let model = exp.model(name).expect("names resolved");
            log::info!("{name}: {n} {phase:?} replications");
            simulate(model, &exp.statistics, phase, n, exp.master_seed).map_err(HarnessError::from)
        })
        .collect()
}

/// Runs the experiment and writes its artifacts to `out_dir`.
pub fn run_experiment(exp: &Experiment, out_dir: &Path) -> Result<RunOutput, HarnessError> {
    let hash = exp.hash();
    let nulls: Vec<&ModelSpec> = exp.nulls.iter().map(|n| exp.model(n).unwrap()).collect();
    let alts: Vec<&ModelSpec> = exp
        .alternatives
        .iter()
        .map(|n| exp.model(n).unwrap())
        .collect();
    let calibration = stream(exp, Phase::Calibration);
    let test = stream(exp, Phase::Test);
    check_seed_streams(
        &calibration,
        &test,
        &nulls,
        &alts,
        exp.n_calibration,
        exp.n_test,
    )?;

    let calib_obs = simulate_all(exp, &exp.nulls, Phase::Calibration, exp.n_calibration)?;
    let test_obs = simulate_all(exp, &exp.alternatives, Phase::Test, exp.n_test)?;
    let tables = power_tables_from(
        &nulls,
        &alts,
        &exp.statistics,
        &calib_obs,
        &test_obs,
        exp.alpha,
    )?;

    let mut w = Writer {
        dir: out_dir,
        header: provenance_line(&hash, exp.master_seed),
        files: Vec::new(),
    };
    let config_json = serde_json::json!({
        "config_sha256": hash,
        "master_seed": exp.master_seed,
        "experiment": exp,
    });
    w.header.clear();
    w.write(
        "config.json",
        &(serde_json::to_string_pretty(&config_json).expect("serializes") + "\n"),
    )?;
    w.header = provenance_line(&hash, exp.master_seed);

    let mut calib = String::from("null_model,statistic,rep,seed,value\n");
    let mut summary = String::from(
        "null_model,statistic,threshold,mean,variance,skewness,anderson_darling_a2,anderson_darling_p\n",
    );
    for t in &tables {
        for cal in &t.calibrations {
            for (r, v) in cal.values.iter().enumerate() {
                let seed = calibration.seed(&cal.null_model, r);
                writeln!(
                    calib,
                    "{},{},{r},{seed},{v:?}",
                    cal.null_model, cal.statistic
                )
                .unwrap();
            }
            let (a2, p) = match anderson_darling_normal(&cal.values) {
                Ok((a2, p)) => (format!("{a2:?}"), format!("{p:?}")),
                Err(_) => (String::new(), String::new()),
            };
            writeln!(
                summary,
                "{},{},{:?},{:?},{:?},{:?},{a2},{p}",
                cal.null_model,
                cal.statistic,
                cal.threshold,
                cal.mean,
                cal.variance,
                skewness(&cal.values)
            )
            .unwrap();
        }
    }
    w.write("calibration.csv", &calib)?;
    w.write("calibration_summary.csv", &summary)?;

    let crit = critical_value(exp.alpha);
    let mut tests = String::from("null_model,alternative,statistic,rep,seed,value,z,reject\n");
    for (k, t) in tables.iter().enumerate() {
        for cal in &t.calibrations {
            let sd = cal.variance.sqrt();
            for (j, alt) in alts.iter().enumerate() {
                for (r, obs) in test_obs[j].iter().enumerate() {
                    let v = obs[k].statistic(cal.threshold);
                    let z = (v - cal.mean) / sd;
                    writeln!(
                        tests,
                        "{},{},{},{r},{},{v:?},{z:?},{}",
                        cal.null_model,
                        alt.name,
                        cal.statistic,
                        test.seed(&alt.name, r),
                        z.abs() > crit
                    )
                    .unwrap();
                }
            }
        }
    }
    w.write("test.csv", &tests)?;

    for t in &tables {
        let mut body = format!("null\\alternative,{}\n", t.alternatives.join(","));
        for (null, row) in t.nulls.iter().zip(&t.rates) {
            let cells: Vec<String> = row.iter().map(|r| format!("{r:?}")).collect();
            writeln!(body, "{null},{}", cells.join(",")).unwrap();
        }
        w.write(&format!("power_{}.csv", file_label(&t.statistic)), &body)?;
    }

    if exp.exports.densities {
        for t in &tables {
            for cal in &t.calibrations {
                let sd = cal.variance.sqrt();
                if !(sd > 0.0) {
                    continue;
                }
                let z: Vec<f64> = cal.values.iter().map(|v| (v - cal.mean) / sd).collect();
                let d = density_export(&z, Bandwidth::Silverman, exp.exports.density_grid)?;
                let mut body = format!("# bandwidth={:?}\nz,density\n", d.bandwidth);
                for (x, y) in d.grid.iter().zip(&d.density) {
                    writeln!(body, "{x:?},{y:?}").unwrap();
                }
                let name = format!(
                    "densities/{}_{}.csv",
                    file_label(&cal.null_model),
                    file_label(&cal.statistic)
                );
                w.write(&name, &body)?;
            }
        }
    }

    if exp.exports.diagrams || exp.exports.tessellations {
        // the noise of the first persistence statistic, if any
        let noise = exp
            .statistics
            .iter()
            .find(|s| s.kind == StatisticKind::Persistence)
            .map(|s| s.noise)
            .unwrap_or_default();
        for m in &exp.models {
            let phase = if exp.nulls.contains(&m.name) {
                calibration
            } else {
                test
            };
            let seed = phase.seed(&m.name, 0);
            let tess = m.sample(seed).map_err(|source| StatsError::Sampling {
                model: m.name.clone(),
                rep: 0,
                source,
            })?;
            if exp.exports.diagrams {
                let diagram = reduce(&build_filtration(&tess, &noise)).map_err(StatsError::from)?;
                let mut buf = Vec::new();
                diagram.write_csv(&mut buf).expect("writes to memory");
                let body = String::from_utf8(buf).expect("utf-8");
                w.write(&format!("diagrams/{}.csv", file_label(&m.name)), &body)?;
            }
            if exp.exports.tessellations {
                let mut buf = Vec::new();
                write_tessellation(&tess, &mut buf).expect("writes to memory");
                let body = String::from_utf8(buf).expect("utf-8");
                w.write(
                    &format!("tessellations/{}.tess", file_label(&m.name)),
                    &body,
                )?;
            }
        }
    }

    Ok(RunOutput {
        config_sha256: hash,
        tables,
        files: w.files,
    })
}

/// Plain-text rendering of the power tables in percent.
pub fn format_tables(tables: &[PowerTable]) -> String {
    let mut out = String::new();
    for t in tables {
        writeln!(
            out,
            "{} (rejection rate, %; rows: null, columns: alternative)",
            t.statistic
        )
        .unwrap();
        write!(out, "{:>10}", "").unwrap();
        for a in &t.alternatives {
            write!(out, " {a:>8}").unwrap();
        }
        writeln!(out).unwrap();
        for (null, row) in t.nulls.iter().zip(&t.rates) {
            write!(out, "{null:>10}").unwrap();
            for r in row {
                write!(out, " {:>8.1}", 100.0 * r).unwrap();
            }
            writeln!(out).unwrap();
        }
        writeln!(out).unwrap();
    }
    out
}
