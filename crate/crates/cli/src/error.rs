use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use rgcost::graph::GraphError;
use rgcost::rewiring::RewiringError;
use rgcost::schreier::SchreierError;
use rgcost::stats::StatsError;
use rgcost::trichotomy::TrichotomyError;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input file or argument; exit code 2.
    #[error("{}{}: {message}", path.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "input".into()), line.map(|l| format!(":{l}")).unwrap_or_default())]
    Input {
        path: Option<PathBuf>,
        line: Option<usize>,
        message: String,
    },
    /// An analysis ran on valid input but could not complete; exit code 1.
    #[error("{0}")]
    Analysis(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Machine-readable error entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ErrorEntry {
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analysis: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError::Input {
            path: None,
            line: None,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Analysis(_) => 1,
            CliError::Input { .. } | CliError::Io { .. } => 2,
        }
    }

    pub fn entry(&self, analysis: Option<&str>) -> ErrorEntry {
        let (kind, path, line, message) = match self {
            CliError::Input { path, line, message } => ("input", path.clone(), *line, message.clone()),
            CliError::Analysis(m) => ("analysis", None, None, m.clone()),
            CliError::Io { path, source } => ("io", Some(path.clone()), None, source.to_string()),
        };
        ErrorEntry {
            kind,
            analysis: analysis.map(str::to_string),
            path: path.map(|p| p.display().to_string()),
            line,
            message,
        }
    }

    /// Attaches a file path to an input error that lacks one.
    pub fn at(self, p: &Path) -> Self {
        match self {
            CliError::Input {
                path: None,
                line,
                message,
            } => CliError::Input {
                path: Some(p.to_path_buf()),
                line,
                message,
            },
            other => other,
        }
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::Parse { line, message } => CliError::Input {
                path: None,
                line: Some(line),
                message,
            },
            other => CliError::input(other.to_string()),
        }
    }
}

impl From<SchreierError> for CliError {
    fn from(e: SchreierError) -> Self {
        match e {
            SchreierError::Parse { line, message } => CliError::Input {
                path: None,
                line: Some(line),
                message,
            },
            SchreierError::CapExceeded { .. } | SchreierError::RelatorFailure { .. } | SchreierError::NotInSubgroup(_) => {
                CliError::Analysis(e.to_string())
            }
            other => CliError::input(other.to_string()),
        }
    }
}

impl From<RewiringError> for CliError {
    fn from(e: RewiringError) -> Self {
        match e {
            RewiringError::Graph(g) => g.into(),
            RewiringError::InvalidInput(_)
            | RewiringError::VertexMismatch { .. }
            | RewiringError::ZeroLipschitz
            | RewiringError::ZeroBudget
            | RewiringError::EmptySequence => CliError::input(e.to_string()),
            other => CliError::Analysis(other.to_string()),
        }
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        match e {
            StatsError::Graph(g) => g.into(),
            other => CliError::input(other.to_string()),
        }
    }
}

impl From<TrichotomyError> for CliError {
    fn from(e: TrichotomyError) -> Self {
        match e {
            TrichotomyError::Schreier(s) => s.into(),
            other => CliError::input(other.to_string()),
        }
    }
}
