//! Seeded-corpus evaluation: runs detection over manifest-described
//! before/after pairs and scores detected findings against expectations
//! by (type, detail) only.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use refscan_core::RefactoringType;
use serde::{Deserialize, Serialize};

use crate::compare::compare_sources;

#[derive(Debug, Deserialize)]
struct Manifest {
    id: String,
    before: String,
    after: String,
    expected: Vec<ExpectedFinding>,
    #[serde(default)]
    #[allow(dead_code)]
    notes: String,
}

#[derive(Debug, Deserialize)]
struct ExpectedFinding {
    #[serde(rename = "type")]
    refactoring_type: RefactoringType,
    #[serde(default)]
    detail: BTreeMap<String, String>,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FixtureResult {
    pub id: String,
    pub true_positives: usize,
    pub false_positives: Vec<String>,
    pub false_negatives: Vec<String>,
}

#[derive(Debug, Default, Serialize, Clone, Copy)]
#[serde(rename_all = "camelCase")]
pub struct TypeTally {
    pub expected: usize,
    pub detected: usize,
    pub true_positives: usize,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EvalResult {
    pub fixtures: Vec<FixtureResult>,
    pub per_type: BTreeMap<String, TypeTally>,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub warning: Option<String>,
}

impl EvalResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("eval serialization")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let width = self
            .per_type
            .keys()
            .map(String::len)
            .max()
            .unwrap_or(4)
            .max(4);
        out.push_str(&format!(
            "{:width$}  expected  detected  true-pos\n",
            "type",
            width = width
        ));
        for (ty, tally) in &self.per_type {
            out.push_str(&format!(
                "{:width$}  {:8}  {:8}  {:8}\n",
                ty,
                tally.expected,
                tally.detected,
                tally.true_positives,
                width = width
            ));
        }
        for fixture in &self.fixtures {
            for miss in &fixture.false_negatives {
                out.push_str(&format!("{}: missed {}\n", fixture.id, miss));
            }
            for extra in &fixture.false_positives {
                out.push_str(&format!("{}: unexpected {}\n", fixture.id, extra));
            }
        }
        out.push_str(&format!(
            "precision {:.3}  recall {:.3}  f1 {:.3}\n",
            self.precision, self.recall, self.f1
        ));
        if let Some(warning) = &self.warning {
            out.push_str(&format!("warning: {warning}\n"));
        }
        out
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

pub fn run_eval(corpus_dir: &Path) -> Result<EvalResult> {
    let mut manifest_paths = Vec::new();
    for entry in fs::read_dir(corpus_dir)
        .with_context(|| format!("reading corpus directory {}", corpus_dir.display()))?
    {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "json") {
            manifest_paths.push(path);
        }
    }
    manifest_paths.sort();

    let mut fixtures = Vec::new();
    let mut per_type: BTreeMap<String, TypeTally> = BTreeMap::new();
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut fn_ = 0usize;

    for manifest_path in &manifest_paths {
        let raw = fs::read_to_string(manifest_path)
            .with_context(|| format!("reading manifest {}", manifest_path.display()))?;
        let manifest: Manifest = serde_json::from_str(&raw)
            .with_context(|| format!("invalid manifest {}", manifest_path.display()))?;
        let before_path = corpus_dir.join(&manifest.before);
        let after_path = corpus_dir.join(&manifest.after);
        let before = fs::read_to_string(&before_path).with_context(|| {
            format!("fixture {}: reading {}", manifest.id, before_path.display())
        })?;
        let after = fs::read_to_string(&after_path).with_context(|| {
            format!("fixture {}: reading {}", manifest.id, after_path.display())
        })?;
        let report = compare_sources(&before, &after, &manifest.before, &manifest.after, false)
            .with_context(|| format!("fixture {}", manifest.id))?;

        let mut claimed = vec![false; report.refactorings.len()];
        let mut false_negatives = Vec::new();
        let mut fixture_tp = 0usize;
        for expected in &manifest.expected {
            let tally = per_type
                .entry(expected.refactoring_type.as_str().to_string())
                .or_default();
            tally.expected += 1;
            let hit = report.refactorings.iter().enumerate().find(|(i, f)| {
                !claimed[*i]
                    && f.refactoring_type == expected.refactoring_type
                    && expected
                        .detail
                        .iter()
                        .all(|(k, v)| f.detail.get(k) == Some(v))
            });
            match hit {
                Some((i, _)) => {
                    claimed[i] = true;
                    fixture_tp += 1;
                    tally.true_positives += 1;
                }
                None => false_negatives.push(format!(
                    "{} {:?}",
                    expected.refactoring_type.as_str(),
                    expected.detail
                )),
            }
        }
        let false_positives: Vec<String> = report
            .refactorings
            .iter()
            .zip(&claimed)
            .filter(|(_, claimed)| !**claimed)
            .map(|(f, _)| f.description.clone())
            .collect();
        for f in &report.refactorings {
            per_type
                .entry(f.refactoring_type.as_str().to_string())
                .or_default()
                .detected += 1;
        }
        tp += fixture_tp;
        fp += false_positives.len();
        fn_ += false_negatives.len();
        fixtures.push(FixtureResult {
            id: manifest.id,
            true_positives: fixture_tp,
            false_positives,
            false_negatives,
        });
    }

    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    let warning = if fixtures.is_empty() {
        Some(format!(
            "no fixtures found in {}; metrics are vacuous",
            corpus_dir.display()
        ))
    } else {
        None
    };
    Ok(EvalResult {
        fixtures,
        per_type,
        precision,
        recall,
        f1,
        warning,
    })
}
