use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tessgof::{
    exit, format_tables, formats, parse_stat, run_experiment, run_gof_on_import, with_workers,
    worker_count, ExperimentConfig, HarnessError,
};
use tessgof_core::geometry::write_tessellation;
use tessgof_core::models::study_model;

const AFTER_HELP: &str = "\
Environment:
  TESSGOF_WORKERS  worker threads, overrides the config's `workers`
  RUST_LOG         log level on stderr (default: info)

Exit codes:
  0 success, 1 other failure, 2 invalid command line, config or statistic,
  3 generator did not converge, 4 degenerate geometry or window too small,
  5 file could not be read or written, 6 malformed tessellation file";

#[derive(Parser)]
#[command(name = "tessgof", version, about = "Goodness-of-fit tests for random tessellations", after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write its power tables.
    Run {
        config: PathBuf,
        /// Overrides the config's output_dir.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Test one tessellation file against a null model of a config.
    Test {
        /// Tessellation file (see `export-formats`).
        #[arg(long)]
        data: PathBuf,
        /// Experiment config holding the null model and calibration size.
        #[arg(long)]
        null: PathBuf,
        /// `kind@qLEVEL`, `kind@VALUE` or a JSON statistic spec.
        #[arg(long)]
        stat: String,
        /// Null model name, needed when the config has several nulls.
        #[arg(long)]
        model: Option<String>,
        /// Overrides the config's alpha.
        #[arg(long)]
        alpha: Option<f64>,
        /// Also write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the file formats, or write them with examples to a directory.
    ExportFormats {
        #[arg(long)]
        dir: Option<PathBuf>,
    },
}

fn write(path: &Path, text: &str) -> Result<(), HarnessError> {
    fs::write(path, text).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn export_formats(dir: Option<&Path>) -> Result<(), HarnessError> {
    let Some(dir) = dir else {
        print!("{}", formats::all());
        return Ok(());
    };
    fs::create_dir_all(dir).map_err(|source| HarnessError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    write(&dir.join("formats.txt"), &formats::all())?;
    let example = serde_json::json!({
        "schema_version": 1,
        "name": "example",
        "models": [
            { "preset": "bin-vor", "n_cells": 50 },
            { "preset": "fb-vor", "n_cells": 50 }
        ],
        "nulls": ["bin-vor"],
        "statistics": [
            { "kind": "area", "threshold": { "quantile": 0.4 } },
            { "kind": "persistence", "threshold": { "quantile": 0.7 } }
        ],
        "n_calibration": 50,
        "n_test": 20,
        "alpha": 0.05,
        "master_seed": 1,
        "output_dir": "out/example"
    });
    write(
        &dir.join("example_config.json"),
        &(serde_json::to_string_pretty(&example).expect("serializes") + "\n"),
    )?;
    let tess = study_model("bin-vor", 50)
        .expect("known preset")
        .sample(1)
        .map_err(|source| tessgof_core::stats::StatsError::Sampling {
            model: "bin-vor".into(),
            rep: 0,
            source,
        })?;
    let mut buf = Vec::new();
    write_tessellation(&tess, &mut buf).expect("writes to memory");
    write(
        &dir.join("example.tess"),
        &String::from_utf8(buf).expect("utf-8"),
    )?;
    println!(
        "wrote formats.txt, example_config.json and example.tess to {}",
        dir.display()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Run { config, out_dir } => {
            let cfg = ExperimentConfig::load(&config)?;
            let exp = cfg.resolve()?;
            let out_dir = out_dir.unwrap_or_else(|| cfg.output_dir.clone());
            let workers = worker_count(cfg.workers)?;
            log::info!(
                "{}: config_sha256={} workers={workers:?}",
                exp.name,
                exp.hash()
            );
            let out = with_workers(workers, || run_experiment(&exp, &out_dir))??;
            print!("{}", format_tables(&out.tables));
            log::info!("wrote {} files to {}", out.files.len(), out_dir.display());
        }
        Command::Test {
            data,
            null,
            stat,
            model,
            alpha,
            out,
        } => {
            let cfg = ExperimentConfig::load(&null)?;
            let exp = cfg.resolve()?;
            let spec = parse_stat(&stat)?;
            let alpha = alpha.unwrap_or(exp.alpha);
            let workers = worker_count(cfg.workers)?;
            let outcome = with_workers(workers, || {
                run_gof_on_import(&data, &exp, model.as_deref(), &spec, alpha)
            })??;
            let json = serde_json::to_string_pretty(&outcome).expect("serializes") + "\n";
            if let Some(path) = out {
                write(&path, &json)?;
            }
            print!("{json}");
        }
        Command::ExportFormats { dir } => export_formats(dir.as_deref())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                exit::CONFIG as u8
            } else {
                0
            });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::from(exit::OK as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
