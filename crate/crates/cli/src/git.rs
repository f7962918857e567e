//! Git revision comparison: pairs files by identical path across two
//! revisions and runs the file-pair pipeline on each pair.

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use crate::compare::compare_sources;
use crate::report::{ComparisonReport, ReportDoc};

pub struct CommitComparison {
    pub reports: Vec<ComparisonReport>,
    pub added_files: Vec<String>,
    pub removed_files: Vec<String>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct CommitComparisonDoc {
    reports: Vec<ReportDoc>,
    added_files: Vec<String>,
    removed_files: Vec<String>,
}

impl CommitComparison {
    pub fn to_json(&self) -> String {
        let doc = CommitComparisonDoc {
            reports: self.reports.iter().map(ComparisonReport::to_doc).collect(),
            added_files: self.added_files.clone(),
            removed_files: self.removed_files.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("report serialization")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for report in &self.reports {
            out.push_str(&report.to_text());
        }
        for path in &self.added_files {
            out.push_str(&format!("added file: {path}\n"));
        }
        for path in &self.removed_files {
            out.push_str(&format!("removed file: {path}\n"));
        }
        out
    }
}

fn git(repo: &Path, args: &[&str]) -> Result<String> {
    let output = Command::new("git")
        .arg("-C")
        .arg(repo)
        .args(args)
        .output()
        .with_context(|| format!("running git {}", args.join(" ")))?;
    if !output.status.success() {
        bail!(
            "git {} failed: {}",
            args.join(" "),
            String::from_utf8_lossy(&output.stderr).trim()
        );
    }
    String::from_utf8(output.stdout).context("git output is not utf-8")
}

fn list_files(repo: &Path, rev: &str) -> Result<BTreeSet<String>> {
    let out = git(repo, &["ls-tree", "-r", "--name-only", rev])?;
    Ok(out.lines().map(str::to_string).collect())
}

fn show(repo: &Path, rev: &str, path: &str) -> Result<String> {
    git(repo, &["show", &format!("{rev}:{path}")])
}

pub fn compare_commits(
    repo: &Path,
    rev_before: &str,
    rev_after: &str,
    path_filter: Option<&str>,
    report_behavior: bool,
) -> Result<CommitComparison> {
    let pattern = path_filter
        .map(glob::Pattern::new)
        .transpose()
        .context("invalid --path glob")?;
    let keep = |p: &String| pattern.as_ref().is_none_or(|g| g.matches(p));

    let before_files: BTreeSet<String> = list_files(repo, rev_before)?
        .into_iter()
        .filter(keep)
        .collect();
    let after_files: BTreeSet<String> = list_files(repo, rev_after)?
        .into_iter()
        .filter(keep)
        .collect();

    let mut reports = Vec::new();
    for path in before_files.intersection(&after_files) {
        let before_src = show(repo, rev_before, path)?;
        let after_src = show(repo, rev_after, path)?;
        let before_name = format!("{rev_before}:{path}");
        let after_name = format!("{rev_after}:{path}");
        let report = compare_sources(
            &before_src,
            &after_src,
            &before_name,
            &after_name,
            report_behavior,
        )?;
        reports.push(report);
    }
    Ok(CommitComparison {
        reports,
        added_files: after_files.difference(&before_files).cloned().collect(),
        removed_files: before_files.difference(&after_files).cloned().collect(),
    })
}
