//! Reports behavior-affecting changes left over after refactorings are
//! accounted for: added/removed methods and added/removed/modified
//! statements. A change explained by a detected refactoring is consumed,
//! and after-file changes overlapping a refactoring's affected lines are
//! suppressed.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::detect::{Refactoring, RefactoringType};
use crate::matcher::{apply_substitution, MatchKind, ModelDiff};
use crate::model::SourceLocation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BehaviorChangeKind {
    MethodAdded,
    MethodRemoved,
    StatementAdded,
    StatementRemoved,
    StatementModified,
}

impl BehaviorChangeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BehaviorChangeKind::MethodAdded => "method-added",
            BehaviorChangeKind::MethodRemoved => "method-removed",
            BehaviorChangeKind::StatementAdded => "statement-added",
            BehaviorChangeKind::StatementRemoved => "statement-removed",
            BehaviorChangeKind::StatementModified => "statement-modified",
        }
    }

    /// Added/modified changes point into the after file; removed changes
    /// point into the before file.
    pub fn is_after_file(&self) -> bool {
        !matches!(
            self,
            BehaviorChangeKind::MethodRemoved | BehaviorChangeKind::StatementRemoved
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BehaviorChange {
    pub kind: BehaviorChangeKind,
    pub location: SourceLocation,
    pub line_span: (u32, u32),
}

fn span(loc: SourceLocation) -> (u32, u32) {
    (loc.start_line, loc.end_line)
}

fn intersects(span: (u32, u32), lines: &BTreeSet<u32>) -> bool {
    lines.range(span.0..=span.1).next().is_some()
}

/// Operations consumed by move/pull-up/extract/inline findings, keyed as
/// `class::name` in the relevant file.
fn consumed_operations(findings: &[Refactoring]) -> (BTreeSet<String>, BTreeSet<String>) {
    let mut added = BTreeSet::new();
    let mut removed = BTreeSet::new();
    for f in findings {
        let d = &f.detail;
        match f.refactoring_type {
            RefactoringType::MoveMethod | RefactoringType::PullUpMethod => {
                removed.insert(format!("{}::{}", d["sourceClass"], d["method"]));
                added.insert(format!("{}::{}", d["targetClass"], d["method"]));
            }
            RefactoringType::ExtractMethod => {
                added.insert(format!("{}::{}", d["class"], d["extractedMethod"]));
            }
            RefactoringType::ExtractAndMoveMethod => {
                added.insert(format!("{}::{}", d["targetClass"], d["extractedMethod"]));
            }
            RefactoringType::InlineMethod => {
                removed.insert(format!("{}::{}", d["sourceClass"], d["inlinedMethod"]));
            }
            _ => {}
        }
    }
    (added, removed)
}

/// Normalized texts of before-body leaves that an extract finding moved
/// into the extracted operation, keyed by `class::sourceMethod`.
fn extract_moved_texts(
    diff: &ModelDiff,
    findings: &[Refactoring],
) -> BTreeMap<String, BTreeSet<String>> {
    let mut out: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for f in findings {
        let (source_class, target_class) = match f.refactoring_type {
            RefactoringType::ExtractMethod => (&f.detail["class"], &f.detail["class"]),
            RefactoringType::ExtractAndMoveMethod => {
                (&f.detail["sourceClass"], &f.detail["targetClass"])
            }
            _ => continue,
        };
        let source_method = &f.detail["sourceMethod"];
        let extracted = &f.detail["extractedMethod"];
        let Some(cm_b) = diff
            .class_matches
            .iter()
            .find(|cm| &cm.after_qualified == target_class)
        else {
            continue;
        };
        let Some(bop) = cm_b.added_operations.iter().find(|o| &o.name == extracted) else {
            continue;
        };
        let btexts: BTreeSet<String> = bop
            .body
            .iter()
            .flat_map(|b| b.leaves())
            .map(|l| l.normalized_text.clone())
            .collect();
        let Some(cm_a) = diff
            .class_matches
            .iter()
            .find(|cm| &cm.after_qualified == source_class)
        else {
            continue;
        };
        let Some(om) = cm_a
            .operation_matches
            .iter()
            .find(|om| &om.after.name == source_method)
        else {
            continue;
        };
        let Some(body) = &om.body else { continue };
        let subst = body.substitution_map();
        let key = format!("{}::{}", source_class, source_method);
        let entry = out.entry(key).or_default();
        for removed in &body.removed_leaves {
            let rewritten = apply_substitution(&removed.normalized_text, &subst).0;
            if btexts.contains(&rewritten) {
                entry.insert(removed.normalized_text.clone());
            }
        }
    }
    out
}

pub fn report_behavior_changes(diff: &ModelDiff, findings: &[Refactoring]) -> Vec<BehaviorChange> {
    let (consumed_added, consumed_removed) = consumed_operations(findings);
    let extract_consumed = extract_moved_texts(diff, findings);
    let refactored_lines: BTreeSet<u32> = findings
        .iter()
        .flat_map(|f| f.affected_lines_after.iter().copied())
        .collect();

    let mut changes = Vec::new();
    for cm in &diff.class_matches {
        for op in &cm.added_operations {
            if consumed_added.contains(&format!("{}::{}", cm.after_qualified, op.name)) {
                continue;
            }
            changes.push(BehaviorChange {
                kind: BehaviorChangeKind::MethodAdded,
                location: op.location,
                line_span: span(op.location),
            });
        }
        for op in &cm.removed_operations {
            if consumed_removed.contains(&format!("{}::{}", cm.before_qualified, op.name)) {
                continue;
            }
            changes.push(BehaviorChange {
                kind: BehaviorChangeKind::MethodRemoved,
                location: op.location,
                line_span: span(op.location),
            });
        }
        for om in &cm.operation_matches {
            let Some(body) = &om.body else { continue };
            let moved_out =
                extract_consumed.get(&format!("{}::{}", cm.after_qualified, om.after.name));
            for m in &body.mappings {
                if m.match_kind != MatchKind::Modified {
                    continue;
                }
                let loc = m.after.location;
                let line_span = if m.after.kind.is_leaf() {
                    span(loc)
                } else {
                    (loc.start_line, loc.start_line)
                };
                changes.push(BehaviorChange {
                    kind: BehaviorChangeKind::StatementModified,
                    location: loc,
                    line_span,
                });
            }
            for stmt in &body.added_leaves {
                changes.push(BehaviorChange {
                    kind: BehaviorChangeKind::StatementAdded,
                    location: stmt.location,
                    line_span: span(stmt.location),
                });
            }
            for stmt in &body.removed_leaves {
                if moved_out.is_some_and(|texts| texts.contains(&stmt.normalized_text)) {
                    continue;
                }
                changes.push(BehaviorChange {
                    kind: BehaviorChangeKind::StatementRemoved,
                    location: stmt.location,
                    line_span: span(stmt.location),
                });
            }
        }
    }

    changes.retain(|c| !(c.kind.is_after_file() && intersects(c.line_span, &refactored_lines)));
    changes.sort_by(|a, b| {
        a.line_span
            .cmp(&b.line_span)
            .then_with(|| a.kind.cmp(&b.kind))
            .then_with(|| a.location.cmp(&b.location))
    });
    changes.dedup();
    changes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detect::detect;
    use crate::matcher::match_models;
    use crate::parser::parse;

    const CIRCLE_V1: &str = "class Circle{\n  double PI = 3.14159;\npublic:\n  double getArea(double r){\n    return PI * r * r;\n  }\n  double calcCircumference(double radius){\n    double diameter = radius * radius; //bug\n    return PI * diameter;\n  }\n};\n";
    const CIRCLE_V2: &str = "class CircleCalculator{\n  inline static const double PI = 3.14159;\npublic:\n  static double calcArea(double radius){\n    return PI * radius * radius;\n  }\n  static double calcSectorArea(double radius,\n                               double angle){\n    return angle / 360 * calcArea(radius);\n  }\n  static double calcCircumference(double radius){\n    double diameter = radius + radius;\n    return PI * diameter;\n  }\n};\n";

    fn run(before_src: &str, after_src: &str) -> (Vec<Refactoring>, Vec<BehaviorChange>) {
        let before = parse(before_src, "before.cpp").unwrap();
        let after = parse(after_src, "after.cpp").unwrap();
        let diff = match_models(&before, &after);
        let findings = detect(&diff, &before, &after);
        let changes = report_behavior_changes(&diff, &findings);
        (findings, changes)
    }

    #[test]
    fn golden_example_reports_two_behavior_changes() {
        let (_, changes) = run(CIRCLE_V1, CIRCLE_V2);
        let summary: Vec<(BehaviorChangeKind, (u32, u32))> =
            changes.iter().map(|c| (c.kind, c.line_span)).collect();
        assert_eq!(
            summary,
            [
                (BehaviorChangeKind::MethodAdded, (7, 10)),
                (BehaviorChangeKind::StatementModified, (12, 12)),
            ],
            "changes: {changes:#?}"
        );
    }

    #[test]
    fn behavior_lines_disjoint_from_refactored_lines() {
        let (findings, changes) = run(CIRCLE_V1, CIRCLE_V2);
        let refactored: BTreeSet<u32> = findings
            .iter()
            .flat_map(|f| f.affected_lines_after.iter().copied())
            .collect();
        for c in changes.iter().filter(|c| c.kind.is_after_file()) {
            assert!(
                !intersects(c.line_span, &refactored),
                "{c:?} overlaps {refactored:?}"
            );
        }
    }

    #[test]
    fn identity_reports_nothing() {
        let (_, changes) = run(CIRCLE_V2, CIRCLE_V2);
        assert!(changes.is_empty(), "{changes:#?}");
    }

    #[test]
    fn single_expression_edit_is_statement_modified() {
        let before = "class M {\npublic:\n  int f(int a, int b){\n    return a + b;\n  }\n};\n";
        let after = "class M {\npublic:\n  int f(int a, int b){\n    return a - b;\n  }\n};\n";
        let (findings, changes) = run(before, after);
        assert!(findings.is_empty(), "{findings:#?}");
        assert_eq!(changes.len(), 1, "{changes:#?}");
        assert_eq!(changes[0].kind, BehaviorChangeKind::StatementModified);
        assert_eq!(changes[0].line_span, (4, 4));
    }

    #[test]
    fn removed_method_is_reported() {
        let before =
            "class M {\npublic:\n  int f(){\n    return 1;\n  }\n  int g(){\n    return 2;\n  }\n};\n";
        let after = "class M {\npublic:\n  int f(){\n    return 1;\n  }\n};\n";
        let (_, changes) = run(before, after);
        assert_eq!(changes.len(), 1, "{changes:#?}");
        assert_eq!(changes[0].kind, BehaviorChangeKind::MethodRemoved);
        assert_eq!(changes[0].line_span, (6, 8));
    }
}
