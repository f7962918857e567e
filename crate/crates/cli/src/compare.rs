//! File-pair comparison and model dumping.

use std::fmt;
use std::fs;
use std::path::Path;

use refscan_core::model::serialize_model;
use refscan_core::{detect, match_models, parse, report_behavior_changes, ParseError};

use crate::report::ComparisonReport;

#[derive(Debug)]
pub enum AnalysisError {
    Io { path: String, message: String },
    Parse { path: String, error: ParseError },
}

impl fmt::Display for AnalysisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalysisError::Io { path, message } => write!(f, "{path}: {message}"),
            AnalysisError::Parse { path, error } => {
                write!(f, "{path}: {error}")
            }
        }
    }
}

impl std::error::Error for AnalysisError {}

fn read(path: &Path) -> Result<String, AnalysisError> {
    fs::read_to_string(path).map_err(|e| AnalysisError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn parse_named(source: &str, name: &str) -> Result<refscan_core::CodeModel, AnalysisError> {
    parse(source, name).map_err(|error| AnalysisError::Parse {
        path: name.to_string(),
        error,
    })
}

/// Parse, match, detect, and optionally report behavior changes for two
/// in-memory sources.
pub fn compare_sources(
    before_source: &str,
    after_source: &str,
    before_name: &str,
    after_name: &str,
    report_behavior: bool,
) -> Result<ComparisonReport, AnalysisError> {
    let before = parse_named(before_source, before_name)?;
    let after = parse_named(after_source, after_name)?;
    let diff = match_models(&before, &after);
    let refactorings = detect(&diff, &before, &after);
    let behavior_changes = if report_behavior {
        report_behavior_changes(&diff, &refactorings)
    } else {
        Vec::new()
    };
    Ok(ComparisonReport {
        before: before_name.to_string(),
        after: after_name.to_string(),
        refactorings,
        behavior_changes,
    })
}

pub fn compare_files(
    before_path: &Path,
    after_path: &Path,
    report_behavior: bool,
) -> Result<ComparisonReport, AnalysisError> {
    let before = read(before_path)?;
    let after = read(after_path)?;
    compare_sources(
        &before,
        &after,
        &before_path.display().to_string(),
        &after_path.display().to_string(),
        report_behavior,
    )
}

/// Parse one file and return its interchange document.
pub fn dump_model(path: &Path) -> Result<String, AnalysisError> {
    let source = read(path)?;
    let model = parse_named(&source, &path.display().to_string())?;
    let bytes = serialize_model(&model);
    Ok(String::from_utf8(bytes).expect("model serialization is utf-8"))
}
