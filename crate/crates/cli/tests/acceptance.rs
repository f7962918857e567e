//! Acceptance gate: one pass/fail line per criterion, failing the test if
//! any criterion fails.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Instant;

use refscan_cli::{compare_files, run_eval};
use refscan_core::model::{deserialize_model, lookup_class, serialize_model};
use refscan_core::{match_models, parse, CodeModel, RefactoringType};

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(rel)
}

fn all_fixture_files() -> Vec<PathBuf> {
    let mut out = Vec::new();
    for sub in ["golden", "corpus", "extra", "negative"] {
        for entry in std::fs::read_dir(fixture(sub)).unwrap() {
            let path = entry.unwrap().path();
            if path.extension().is_some_and(|e| e == "cpp") {
                out.push(path);
            }
        }
    }
    out.sort();
    out
}

fn all_fixture_pairs() -> Vec<(PathBuf, PathBuf)> {
    let mut out = vec![(
        fixture("golden/circle_v1.cpp"),
        fixture("golden/circle_v2.cpp"),
    )];
    for file in all_fixture_files() {
        let name = file.file_name().unwrap().to_str().unwrap();
        if let Some(stem) = name.strip_suffix("_before.cpp") {
            let after = file.with_file_name(format!("{stem}_after.cpp"));
            if after.exists() {
                out.push((file.clone(), after));
            }
        }
    }
    out
}

fn parse_file(path: &Path) -> CodeModel {
    let src = std::fs::read_to_string(path).unwrap();
    parse(&src, path.file_name().unwrap().to_str().unwrap())
        .unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn golden_findings() -> Result<(), String> {
    let start = Instant::now();
    let report = compare_files(
        &fixture("golden/circle_v1.cpp"),
        &fixture("golden/circle_v2.cpp"),
        true,
    )
    .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let mut got: Vec<(RefactoringType, Vec<u32>)> = report
        .refactorings
        .iter()
        .map(|f| {
            (
                f.refactoring_type,
                f.affected_lines_after.iter().copied().collect(),
            )
        })
        .collect();
    let mut expected = vec![
        (RefactoringType::RenameClass, vec![1]),
        (RefactoringType::AddAttributeModifier, vec![2]),
        (RefactoringType::AddAttributeModifier, vec![2]),
        (RefactoringType::AddAttributeModifier, vec![2]),
        (RefactoringType::RenameMethod, vec![4]),
        (RefactoringType::AddMethodModifier, vec![4]),
        (RefactoringType::RenameParameter, vec![4, 5]),
        (RefactoringType::AddMethodModifier, vec![11]),
    ];
    got.sort();
    expected.sort();
    if got != expected {
        return Err(format!("findings mismatch: got {got:?}"));
    }
    if elapsed.as_secs_f64() >= 1.0 {
        return Err(format!("took {elapsed:?}, budget is 1s"));
    }
    Ok(())
}

fn golden_behavior() -> Result<(), String> {
    let report = compare_files(
        &fixture("golden/circle_v1.cpp"),
        &fixture("golden/circle_v2.cpp"),
        true,
    )
    .map_err(|e| e.to_string())?;
    let got: Vec<(&str, (u32, u32))> = report
        .behavior_changes
        .iter()
        .map(|c| (c.kind.as_str(), c.line_span))
        .collect();
    if got != [("method-added", (7, 10)), ("statement-modified", (12, 12))] {
        return Err(format!("behavior mismatch: got {got:?}"));
    }
    let refactored: BTreeSet<u32> = report
        .refactorings
        .iter()
        .flat_map(|f| f.affected_lines_after.iter().copied())
        .collect();
    for c in &report.behavior_changes {
        if (c.line_span.0..=c.line_span.1).any(|l| refactored.contains(&l)) {
            return Err(format!("behavior change {c:?} on refactored line"));
        }
    }
    Ok(())
}

fn corpus_eval() -> Result<(), String> {
    let start = Instant::now();
    let result = run_eval(&fixture("corpus")).map_err(|e| format!("{e:#}"))?;
    let elapsed = start.elapsed();
    if result.fixtures.len() != 16 {
        return Err(format!(
            "expected 16 fixtures, found {}",
            result.fixtures.len()
        ));
    }
    if result.precision != 1.0 || result.recall != 1.0 {
        return Err(format!(
            "precision {} recall {}\n{}",
            result.precision,
            result.recall,
            result.to_text()
        ));
    }
    if elapsed.as_secs_f64() >= 10.0 {
        return Err(format!("took {elapsed:?}, budget is 10s"));
    }
    Ok(())
}

fn identity_property() -> Result<(), String> {
    for file in all_fixture_files() {
        let report = compare_files(&file, &file, true).map_err(|e| e.to_string())?;
        if !report.refactorings.is_empty() || !report.behavior_changes.is_empty() {
            return Err(format!(
                "{}: {} refactorings, {} behavior changes",
                file.display(),
                report.refactorings.len(),
                report.behavior_changes.len()
            ));
        }
    }
    Ok(())
}

fn round_trip_property() -> Result<(), String> {
    for file in all_fixture_files() {
        let model = parse_file(&file);
        let back = deserialize_model(&serialize_model(&model))
            .map_err(|e| format!("{}: {e:?}", file.display()))?;
        if back != model {
            return Err(format!("{}: round-trip mismatch", file.display()));
        }
    }
    Ok(())
}

fn count_leaves(model: &CodeModel, class: &str, op_sig: Option<&str>) -> usize {
    let c = lookup_class(model, class).unwrap();
    c.operations
        .iter()
        .filter(|o| op_sig.is_none_or(|s| o.signature_key() == s))
        .filter_map(|o| o.body.as_ref())
        .map(|b| b.leaves().len())
        .sum()
}

fn partition_property() -> Result<(), String> {
    for (before_path, after_path) in all_fixture_pairs() {
        let before = parse_file(&before_path);
        let after = parse_file(&after_path);
        let diff = match_models(&before, &after);
        let label = format!("{} vs {}", before_path.display(), after_path.display());

        // Classes.
        if diff.class_matches.len() + diff.removed_classes.len() != before.classes.len()
            || diff.class_matches.len() + diff.added_classes.len() != after.classes.len()
        {
            return Err(format!("{label}: class partition mismatch"));
        }

        // Operations, attributes, and leaf statements.
        let mut before_ops = 0usize;
        let mut after_ops = 0usize;
        let mut before_attrs = 0usize;
        let mut after_attrs = 0usize;
        let mut before_leaves = 0usize;
        let mut after_leaves = 0usize;
        for cm in &diff.class_matches {
            before_ops += cm.operation_matches.len() + cm.removed_operations.len();
            after_ops += cm.operation_matches.len() + cm.added_operations.len();
            before_attrs += cm.attribute_matches.len() + cm.removed_attributes.len();
            after_attrs += cm.attribute_matches.len() + cm.added_attributes.len();
            for om in &cm.operation_matches {
                match &om.body {
                    Some(body) => {
                        let leaf_mappings = body
                            .mappings
                            .iter()
                            .filter(|m| m.before.kind.is_leaf())
                            .count();
                        before_leaves += leaf_mappings + body.removed_leaves.len();
                        after_leaves += leaf_mappings + body.added_leaves.len();
                    }
                    None => {
                        before_leaves += om.before.body.as_ref().map_or(0, |b| b.leaves().len());
                        after_leaves += om.after.body.as_ref().map_or(0, |b| b.leaves().len());
                    }
                }
            }
            for op in &cm.removed_operations {
                before_leaves += op.body.as_ref().map_or(0, |b| b.leaves().len());
            }
            for op in &cm.added_operations {
                after_leaves += op.body.as_ref().map_or(0, |b| b.leaves().len());
            }
        }
        for name in &diff.removed_classes {
            let c = lookup_class(&before, name).unwrap();
            before_ops += c.operations.len();
            before_attrs += c.attributes.len();
            before_leaves += count_leaves(&before, name, None);
        }
        for name in &diff.added_classes {
            let c = lookup_class(&after, name).unwrap();
            after_ops += c.operations.len();
            after_attrs += c.attributes.len();
            after_leaves += count_leaves(&after, name, None);
        }

        let total = |m: &CodeModel| {
            let ops: usize = m.classes.iter().map(|c| c.operations.len()).sum();
            let attrs: usize = m.classes.iter().map(|c| c.attributes.len()).sum();
            let leaves: usize = m
                .classes
                .iter()
                .flat_map(|c| &c.operations)
                .filter_map(|o| o.body.as_ref())
                .map(|b| b.leaves().len())
                .sum();
            (ops, attrs, leaves)
        };
        let (bo, ba, bl) = total(&before);
        let (ao, aa, al) = total(&after);
        if (before_ops, before_attrs, before_leaves) != (bo, ba, bl) {
            return Err(format!(
                "{label}: before partition mismatch ops {before_ops}/{bo} attrs {before_attrs}/{ba} leaves {before_leaves}/{bl}"
            ));
        }
        if (after_ops, after_attrs, after_leaves) != (ao, aa, al) {
            return Err(format!(
                "{label}: after partition mismatch ops {after_ops}/{ao} attrs {after_attrs}/{aa} leaves {after_leaves}/{al}"
            ));
        }
    }
    Ok(())
}

fn multiple_inheritance() -> Result<(), String> {
    let report = compare_files(
        &fixture("extra/multibase_before.cpp"),
        &fixture("extra/multibase_after.cpp"),
        true,
    )
    .map_err(|e| e.to_string())?;
    let pull_ups: Vec<(&str, &str)> = report
        .refactorings
        .iter()
        .filter(|f| f.refactoring_type == RefactoringType::PullUpField)
        .map(|f| (f.detail["field"].as_str(), f.detail["targetClass"].as_str()))
        .collect();
    if pull_ups != [("x", "A"), ("y", "B")] {
        return Err(format!("got {pull_ups:?}"));
    }
    Ok(())
}

type Criterion = (&'static str, fn() -> Result<(), String>);

#[test]
fn acceptance() {
    let criteria: Vec<Criterion> = vec![
        (
            "golden example: 8 findings with exact affected lines",
            golden_findings,
        ),
        (
            "behavior report: method-added 7-10 and statement-modified 12",
            golden_behavior,
        ),
        ("seeded corpus: precision 1.0 and recall 1.0", corpus_eval),
        (
            "identity: self-comparison of every fixture file is empty",
            identity_property,
        ),
        (
            "round-trip: serialize/deserialize of every fixture file",
            round_trip_property,
        ),
        (
            "partition: matched + added + removed reconcile for every pair",
            partition_property,
        ),
        (
            "multiple inheritance: two Pull Up Field findings",
            multiple_inheritance,
        ),
    ];
    let mut failures = 0usize;
    for (name, check) in criteria {
        match check() {
            Ok(()) => println!("PASS {name}"),
            Err(message) => {
                println!("FAIL {name}: {message}");
                failures += 1;
            }
        }
    }
    assert_eq!(failures, 0, "{failures} acceptance criteria failed");
}
