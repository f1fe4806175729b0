//! Model files, grid evaluation, reports and the command surface of the
//! `nconn` tool.

pub mod emit;
pub mod grid;
pub mod model;
pub mod report;
pub mod run;

use std::path::PathBuf;

use serde_json::json;
use thiserror::Error;

use crate::expr::ParseError;
use crate::sample::SetupError;
use crate::solver::SolveError;

pub use emit::{to_json, write_artifacts};
pub use grid::GridSpec;
pub use model::{Model, ModelFile};
pub use report::{Report, Status};
pub use run::{run, with_jobs, Command, RunOptions};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("schema: {0}")]
    Schema(String),
    #[error("{section}: cannot parse '{text}': {source}")]
    Expression {
        section: String,
        text: String,
        source: ParseError,
    },
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Setup(#[from] SetupError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

impl HarnessError {
    pub fn kind(&self) -> &'static str {
        match self {
            HarnessError::Schema(_) => "schema",
            HarnessError::Expression { .. } => "expression",
            HarnessError::Invalid(_) => "invalid",
            HarnessError::Io { .. } => "io",
            HarnessError::Setup(_) => "setup",
            HarnessError::Solve(_) => "solve",
        }
    }

    /// 3 for numeric failures inside the solver, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Solve(
                SolveError::Relax(_) | SolveError::Ray { .. } | SolveError::Quadrature { .. },
            ) => 3,
            _ => 2,
        }
    }

    /// Structured diagnostic for stderr.
    pub fn diagnostic(&self) -> serde_json::Value {
        let mut d = json!({
            "kind": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        });
        if let HarnessError::Expression { section, text, source } = self {
            d["section"] = json!(section);
            d["text"] = json!(text);
            d["offset"] = json!(source.offset());
        }
        json!({ "error": d })
    }
}
