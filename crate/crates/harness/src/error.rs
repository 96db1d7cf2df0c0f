use std::path::PathBuf;

use tessgof_core::generators::GeneratorError;
use tessgof_core::geometry::GeometryError;
use tessgof_core::models::ModelError;
use tessgof_core::stats::StatsError;
use thiserror::Error;

/// Process exit codes of the `tessgof` binary.
pub mod exit {
    pub const OK: i32 = 0;
    /// Any failure not listed below.
    pub const FAILURE: i32 = 1;
    /// Invalid command line, configuration or statistic spec.
    pub const CONFIG: i32 = 2;
    /// A generator did not converge, e.g. a packing with residual overlaps.
    pub const NON_CONVERGENCE: i32 = 3;
    /// Degenerate geometry, including a window too small for its
    /// configuration.
    pub const DEGENERACY: i32 = 4;
    /// A file could not be read or written.
    pub const IO: i32 = 5;
    /// A tessellation file is malformed.
    pub const DATA: i32 = 6;
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot import {}: {source}", path.display())]
    Import {
        path: PathBuf,
        #[source]
        source: GeometryError,
    },
    #[error(transparent)]
    Stats(#[from] StatsError),
}

fn geometry_code(e: &GeometryError) -> i32 {
    match e {
        GeometryError::Io(_) => exit::IO,
        GeometryError::Parse { .. } => exit::DATA,
        GeometryError::InvalidInput(_) => exit::CONFIG,
        _ => exit::DEGENERACY,
    }
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => exit::CONFIG,
            HarnessError::Io { .. } => exit::IO,
            HarnessError::Import { source, .. } => geometry_code(source),
            HarnessError::Stats(e) => match e {
                StatsError::Sampling { source, .. } => match source {
                    ModelError::Generator(GeneratorError::NonConvergence { .. }) => {
                        exit::NON_CONVERGENCE
                    }
                    ModelError::Generator(GeneratorError::InvalidParams(_)) => exit::CONFIG,
                    ModelError::Geometry(g) => geometry_code(g),
                },
                StatsError::InvalidSpec(_) | StatsError::SeedReuse(_) => exit::CONFIG,
                _ => exit::FAILURE,
            },
        }
    }
}
