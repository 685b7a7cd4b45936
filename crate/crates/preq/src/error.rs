use std::path::PathBuf;

use thiserror::Error;

/// Errors of the scenario engine and the command-line front end.
#[derive(Debug, Error)]
pub enum AppError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Model(#[from] preq_core::Error),
    #[error("integration stopped at step {step}: {source}")]
    Integration {
        step: usize,
        #[source]
        source: preq_core::Error,
        /// Files written before the failure.
        partial: Vec<PathBuf>,
    },
    #[error("requested speed {speed} exceeds the momentum budget {budget} (perturbation ratio {ratio:.3})")]
    BudgetExceeded { speed: f64, budget: f64, ratio: f64 },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl AppError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 2 for failures of the physics (collisions and
    /// other breakdowns of the model), 1 for invalid input and IO.
    pub fn exit_code(&self) -> i32 {
        use preq_core::Error as E;
        match self {
            AppError::Integration { .. } => 2,
            AppError::Model(
                E::Collision { .. }
                | E::DegenerateSubspace { .. }
                | E::DegenerateMean
                | E::InsufficientSamples { .. },
            ) => 2,
            _ => 1,
        }
    }
}

pub type AppResult<T> = Result<T, AppError>;
