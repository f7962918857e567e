//! Comparison report assembly plus the text and JSON renderings.

use refscan_core::{BehaviorChange, Refactoring};
use serde::{Deserialize, Serialize};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// One before/after comparison with its findings.
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub before: String,
    pub after: String,
    pub refactorings: Vec<Refactoring>,
    pub behavior_changes: Vec<BehaviorChange>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportDoc {
    pub before: String,
    pub after: String,
    pub refactorings: Vec<RefactoringDoc>,
    pub behavior_changes: Vec<BehaviorChangeDoc>,
    pub tool_version: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RefactoringDoc {
    #[serde(rename = "type")]
    pub refactoring_type: String,
    pub description: String,
    pub affected_lines: Vec<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BehaviorChangeDoc {
    pub kind: String,
    pub lines: [u32; 2],
}

impl ComparisonReport {
    pub fn to_doc(&self) -> ReportDoc {
        ReportDoc {
            before: self.before.clone(),
            after: self.after.clone(),
            refactorings: self
                .refactorings
                .iter()
                .map(|f| RefactoringDoc {
                    refactoring_type: f.refactoring_type.as_str().to_string(),
                    description: f.description.clone(),
                    affected_lines: f.affected_lines_after.iter().copied().collect(),
                })
                .collect(),
            behavior_changes: self
                .behavior_changes
                .iter()
                .map(|c| BehaviorChangeDoc {
                    kind: c.kind.as_str().to_string(),
                    lines: [c.line_span.0, c.line_span.1],
                })
                .collect(),
            tool_version: TOOL_VERSION.to_string(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("report serialization")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("comparing {} -> {}\n", self.before, self.after));
        out.push_str(&format!("refactorings ({}):\n", self.refactorings.len()));
        for f in &self.refactorings {
            let lines: Vec<String> = f.affected_lines_after.iter().map(u32::to_string).collect();
            out.push_str(&format!(
                "  {} [lines {}]\n",
                f.description,
                lines.join(",")
            ));
        }
        if self.behavior_changes.is_empty() {
            out.push_str("behavior changes (0):\n");
        } else {
            out.push_str(&format!(
                "behavior changes ({}):\n",
                self.behavior_changes.len()
            ));
            for c in &self.behavior_changes {
                let (a, b) = c.line_span;
                if a == b {
                    out.push_str(&format!("  {} line {}\n", c.kind.as_str(), a));
                } else {
                    out.push_str(&format!("  {} lines {}-{}\n", c.kind.as_str(), a, b));
                }
            }
        }
        out
    }
}
