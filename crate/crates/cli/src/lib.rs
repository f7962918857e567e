//! Library backing the `refscan` binary: file-pair comparison, git
//! revision comparison, model dumps, and corpus evaluation.

pub mod compare;
pub mod eval;
pub mod git;
pub mod report;

pub use compare::{compare_files, compare_sources, dump_model, AnalysisError};
pub use eval::{run_eval, EvalResult};
pub use git::{compare_commits, CommitComparison};
pub use report::{ComparisonReport, TOOL_VERSION};
