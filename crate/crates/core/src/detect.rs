//! Rule-based refactoring detectors over a [`ModelDiff`].
//!
//! Emits typed findings for rename/move/extract/inline/pull-up families,
//! type changes, and modifier additions/removals. Pull-up findings suppress
//! the corresponding move findings, and extract/inline findings consume the
//! added/removed operations they explain. Output order is deterministic:
//! by after-location, then type name, then description.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::matcher::{
    apply_substitution, operation_body_similarity, ClassMatch, ModelDiff, OperationMatch,
};
use crate::model::{lookup_class, CodeModel, OperationDecl, SourceLocation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RefactoringType {
    #[serde(rename = "Rename Class")]
    RenameClass,
    #[serde(rename = "Move Class")]
    MoveClass,
    #[serde(rename = "Rename Method")]
    RenameMethod,
    #[serde(rename = "Move Method")]
    MoveMethod,
    #[serde(rename = "Pull Up Method")]
    PullUpMethod,
    #[serde(rename = "Extract Method")]
    ExtractMethod,
    #[serde(rename = "Inline Method")]
    InlineMethod,
    #[serde(rename = "Extract And Move Method")]
    ExtractAndMoveMethod,
    #[serde(rename = "Rename Parameter")]
    RenameParameter,
    #[serde(rename = "Rename Variable")]
    RenameVariable,
    #[serde(rename = "Rename Field")]
    RenameField,
    #[serde(rename = "Move Field")]
    MoveField,
    #[serde(rename = "Pull Up Field")]
    PullUpField,
    #[serde(rename = "Change Parameter Type")]
    ChangeParameterType,
    #[serde(rename = "Change Return Type")]
    ChangeReturnType,
    #[serde(rename = "Change Variable Type")]
    ChangeVariableType,
    #[serde(rename = "Change Field Type")]
    ChangeFieldType,
    #[serde(rename = "Add Method Modifier")]
    AddMethodModifier,
    #[serde(rename = "Remove Method Modifier")]
    RemoveMethodModifier,
    #[serde(rename = "Add Attribute Modifier")]
    AddAttributeModifier,
    #[serde(rename = "Remove Attribute Modifier")]
    RemoveAttributeModifier,
}

impl RefactoringType {
    pub fn as_str(&self) -> &'static str {
        match self {
            RefactoringType::RenameClass => "Rename Class",
            RefactoringType::MoveClass => "Move Class",
            RefactoringType::RenameMethod => "Rename Method",
            RefactoringType::MoveMethod => "Move Method",
            RefactoringType::PullUpMethod => "Pull Up Method",
            RefactoringType::ExtractMethod => "Extract Method",
            RefactoringType::InlineMethod => "Inline Method",
            RefactoringType::ExtractAndMoveMethod => "Extract And Move Method",
            RefactoringType::RenameParameter => "Rename Parameter",
            RefactoringType::RenameVariable => "Rename Variable",
            RefactoringType::RenameField => "Rename Field",
            RefactoringType::MoveField => "Move Field",
            RefactoringType::PullUpField => "Pull Up Field",
            RefactoringType::ChangeParameterType => "Change Parameter Type",
            RefactoringType::ChangeReturnType => "Change Return Type",
            RefactoringType::ChangeVariableType => "Change Variable Type",
            RefactoringType::ChangeFieldType => "Change Field Type",
            RefactoringType::AddMethodModifier => "Add Method Modifier",
            RefactoringType::RemoveMethodModifier => "Remove Method Modifier",
            RefactoringType::AddAttributeModifier => "Add Attribute Modifier",
            RefactoringType::RemoveAttributeModifier => "Remove Attribute Modifier",
        }
    }
}

/// One detected refactoring with the after-file lines it affects and a
/// type-specific key/value payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Refactoring {
    pub refactoring_type: RefactoringType,
    pub description: String,
    pub before_location: SourceLocation,
    pub after_location: SourceLocation,
    pub affected_lines_after: BTreeSet<u32>,
    pub detail: BTreeMap<String, String>,
}

/// After-file lines affected by a finding.
pub fn affected_lines(finding: &Refactoring) -> &BTreeSet<u32> {
    &finding.affected_lines_after
}

fn line_range(loc: SourceLocation) -> BTreeSet<u32> {
    (loc.start_line..=loc.end_line).collect()
}

fn detail(entries: &[(&str, &str)]) -> BTreeMap<String, String> {
    entries
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

/// Lines of after-side mapped statements whose substitution used `key`,
/// within one operation match.
fn usage_lines(om: &OperationMatch, key: &str) -> BTreeSet<u32> {
    let mut out = BTreeSet::new();
    if let Some(body) = &om.body {
        for m in &body.mappings {
            if m.used_renames.contains(key) {
                out.insert(m.after.location.start_line);
            }
        }
    }
    out
}

struct Detector<'a> {
    diff: &'a ModelDiff,
    after: &'a CodeModel,
    findings: Vec<Refactoring>,
    /// `class::signature` keys of added operations explained by a
    /// move/pull-up/extract finding.
    consumed_added: BTreeSet<String>,
    /// Same for removed operations (move/pull-up/inline).
    consumed_removed: BTreeSet<String>,
}

fn op_key(class_qualified: &str, op: &OperationDecl) -> String {
    format!("{}::{}", class_qualified, op.signature_key())
}

impl<'a> Detector<'a> {
    fn push(
        &mut self,
        refactoring_type: RefactoringType,
        description: String,
        before_location: SourceLocation,
        after_location: SourceLocation,
        affected_lines_after: BTreeSet<u32>,
        detail: BTreeMap<String, String>,
    ) {
        self.findings.push(Refactoring {
            refactoring_type,
            description,
            before_location,
            after_location,
            affected_lines_after,
            detail,
        });
    }

    fn class_level(&mut self, cm: &ClassMatch, before: &CodeModel) {
        let (Some(bc), Some(ac)) = (
            lookup_class(before, &cm.before_qualified),
            lookup_class(self.after, &cm.after_qualified),
        ) else {
            return;
        };
        let mut line = BTreeSet::new();
        line.insert(ac.location.start_line);
        if bc.simple_name != ac.simple_name {
            self.push(
                RefactoringType::RenameClass,
                format!("Rename Class: {} -> {}", bc.simple_name, ac.simple_name),
                bc.location,
                ac.location,
                line.clone(),
                detail(&[("oldName", &bc.simple_name), ("newName", &ac.simple_name)]),
            );
        }
        if bc.package != ac.package {
            self.push(
                RefactoringType::MoveClass,
                format!(
                    "Move Class: {} -> {}",
                    cm.before_qualified, cm.after_qualified
                ),
                bc.location,
                ac.location,
                line,
                detail(&[
                    ("class", &ac.simple_name),
                    ("oldPackage", &bc.package),
                    ("newPackage", &ac.package),
                ]),
            );
        }
    }

    fn attribute_level(&mut self, cm: &ClassMatch) {
        for am in &cm.attribute_matches {
            let decl_line = am.after.location.start_line;
            let mut decl_lines = BTreeSet::new();
            decl_lines.insert(decl_line);
            if am.renamed {
                let mut lines = decl_lines.clone();
                for om in &cm.operation_matches {
                    lines.extend(usage_lines(om, &am.before.name));
                }
                self.push(
                    RefactoringType::RenameField,
                    format!("Rename Field: {} -> {}", am.before.name, am.after.name),
                    am.before.location,
                    am.after.location,
                    lines,
                    detail(&[
                        ("class", &cm.after_qualified),
                        ("oldName", &am.before.name),
                        ("newName", &am.after.name),
                    ]),
                );
            }
            if am.before.ty != am.after.ty {
                self.push(
                    RefactoringType::ChangeFieldType,
                    format!(
                        "Change Field Type ({}): {} -> {}",
                        am.after.name,
                        am.before.ty.render(),
                        am.after.ty.render()
                    ),
                    am.before.location,
                    am.after.location,
                    decl_lines.clone(),
                    detail(&[
                        ("class", &cm.after_qualified),
                        ("field", &am.after.name),
                        ("oldType", &am.before.ty.render()),
                        ("newType", &am.after.ty.render()),
                    ]),
                );
            }
            for m in am.after.modifiers.difference(&am.before.modifiers) {
                self.push(
                    RefactoringType::AddAttributeModifier,
                    format!("Add Attribute Modifier ({}): {}", m.as_str(), am.after.name),
                    am.before.location,
                    am.after.location,
                    decl_lines.clone(),
                    detail(&[
                        ("class", &cm.after_qualified),
                        ("attribute", &am.after.name),
                        ("modifier", m.as_str()),
                    ]),
                );
            }
            for m in am.before.modifiers.difference(&am.after.modifiers) {
                self.push(
                    RefactoringType::RemoveAttributeModifier,
                    format!(
                        "Remove Attribute Modifier ({}): {}",
                        m.as_str(),
                        am.after.name
                    ),
                    am.before.location,
                    am.after.location,
                    decl_lines.clone(),
                    detail(&[
                        ("class", &cm.after_qualified),
                        ("attribute", &am.after.name),
                        ("modifier", m.as_str()),
                    ]),
                );
            }
        }
    }

    fn operation_level(&mut self, cm: &ClassMatch) {
        for om in &cm.operation_matches {
            let decl_line: BTreeSet<u32> = [om.after.location.start_line].into_iter().collect();
            if om.before.name != om.after.name {
                self.push(
                    RefactoringType::RenameMethod,
                    format!("Rename Method: {} -> {}", om.before.name, om.after.name),
                    om.before.location,
                    om.after.location,
                    decl_line.clone(),
                    detail(&[
                        ("class", &cm.after_qualified),
                        ("oldName", &om.before.name),
                        ("newName", &om.after.name),
                    ]),
                );
            }
            for m in om.after.modifiers.difference(&om.before.modifiers) {
                self.push(
                    RefactoringType::AddMethodModifier,
                    format!("Add Method Modifier ({}): {}", m.as_str(), om.after.name),
                    om.before.location,
                    om.after.location,
                    decl_line.clone(),
                    detail(&[
                        ("class", &cm.after_qualified),
                        ("operation", &om.after.name),
                        ("modifier", m.as_str()),
                    ]),
                );
            }
            for m in om.before.modifiers.difference(&om.after.modifiers) {
                self.push(
                    RefactoringType::RemoveMethodModifier,
                    format!("Remove Method Modifier ({}): {}", m.as_str(), om.after.name),
                    om.before.location,
                    om.after.location,
                    decl_line.clone(),
                    detail(&[
                        ("class", &cm.after_qualified),
                        ("operation", &om.after.name),
                        ("modifier", m.as_str()),
                    ]),
                );
            }
            if let (Some(bt), Some(at)) = (&om.before.return_type, &om.after.return_type) {
                if bt != at {
                    self.push(
                        RefactoringType::ChangeReturnType,
                        format!(
                            "Change Return Type: {} -> {} for {}",
                            bt.render(),
                            at.render(),
                            om.after.name
                        ),
                        om.before.location,
                        om.after.location,
                        decl_line.clone(),
                        detail(&[
                            ("class", &cm.after_qualified),
                            ("operation", &om.after.name),
                            ("oldType", &bt.render()),
                            ("newType", &at.render()),
                        ]),
                    );
                }
            }
            if om.before.parameters.len() == om.after.parameters.len() {
                for (bp, ap) in om.before.parameters.iter().zip(&om.after.parameters) {
                    let param_line: BTreeSet<u32> = [ap.location.start_line].into_iter().collect();
                    if bp.name != ap.name && !bp.name.is_empty() && !ap.name.is_empty() {
                        let mut lines = param_line.clone();
                        lines.extend(usage_lines(om, &bp.name));
                        self.push(
                            RefactoringType::RenameParameter,
                            format!(
                                "Rename Parameter: {} -> {} in {}",
                                bp.name, ap.name, om.after.name
                            ),
                            bp.location,
                            ap.location,
                            lines,
                            detail(&[
                                ("class", &cm.after_qualified),
                                ("operation", &om.after.name),
                                ("oldName", &bp.name),
                                ("newName", &ap.name),
                            ]),
                        );
                    }
                    if bp.ty != ap.ty {
                        self.push(
                            RefactoringType::ChangeParameterType,
                            format!(
                                "Change Parameter Type ({}): {} -> {} in {}",
                                ap.name,
                                bp.ty.render(),
                                ap.ty.render(),
                                om.after.name
                            ),
                            bp.location,
                            ap.location,
                            param_line,
                            detail(&[
                                ("class", &cm.after_qualified),
                                ("operation", &om.after.name),
                                ("parameter", &ap.name),
                                ("oldType", &bp.ty.render()),
                                ("newType", &ap.ty.render()),
                            ]),
                        );
                    }
                }
            }
            if let Some(body) = &om.body {
                for lp in &body.local_pairs {
                    let stmt_line: BTreeSet<u32> = [lp.after_statement.location.start_line]
                        .into_iter()
                        .collect();
                    if lp.before_name != lp.after_name {
                        let mut lines = stmt_line.clone();
                        lines.extend(usage_lines(om, &lp.before_name));
                        self.push(
                            RefactoringType::RenameVariable,
                            format!(
                                "Rename Variable: {} -> {} in {}",
                                lp.before_name, lp.after_name, om.after.name
                            ),
                            lp.before_statement.location,
                            lp.after_statement.location,
                            lines,
                            detail(&[
                                ("class", &cm.after_qualified),
                                ("operation", &om.after.name),
                                ("oldName", &lp.before_name),
                                ("newName", &lp.after_name),
                            ]),
                        );
                    }
                    if lp.before_type != lp.after_type {
                        self.push(
                            RefactoringType::ChangeVariableType,
                            format!(
                                "Change Variable Type ({}): {} -> {} in {}",
                                lp.after_name,
                                lp.before_type.render(),
                                lp.after_type.render(),
                                om.after.name
                            ),
                            lp.before_statement.location,
                            lp.after_statement.location,
                            stmt_line,
                            detail(&[
                                ("class", &cm.after_qualified),
                                ("operation", &om.after.name),
                                ("variable", &lp.after_name),
                                ("oldType", &lp.before_type.render()),
                                ("newType", &lp.after_type.render()),
                            ]),
                        );
                    }
                }
            }
        }
    }

    /// Members removed from one matched class and added to another:
    /// move, upgraded to pull-up when a generalization path in the after
    /// model leads from the source class to the target.
    fn moves(&mut self) {
        for (xi, cm_x) in self.diff.class_matches.iter().enumerate() {
            for rop in &cm_x.removed_operations {
                let rkey = op_key(&cm_x.before_qualified, rop);
                if self.consumed_removed.contains(&rkey) {
                    continue;
                }
                'target: for (yi, cm_y) in self.diff.class_matches.iter().enumerate() {
                    if xi == yi {
                        continue;
                    }
                    for aop in &cm_y.added_operations {
                        let akey = op_key(&cm_y.after_qualified, aop);
                        if self.consumed_added.contains(&akey) || rop.name != aop.name {
                            continue;
                        }
                        let sig_equal = rop.parameter_types() == aop.parameter_types();
                        let similar = sig_equal
                            || operation_body_similarity(rop, aop, &BTreeMap::new()) >= 0.5;
                        if !similar {
                            continue;
                        }
                        let pull_up = self
                            .after
                            .is_ancestor(&cm_x.after_qualified, &cm_y.after_qualified);
                        let (ty, verb) = if pull_up {
                            (RefactoringType::PullUpMethod, "Pull Up Method")
                        } else {
                            (RefactoringType::MoveMethod, "Move Method")
                        };
                        self.push(
                            ty,
                            format!(
                                "{}: {} from {} to {}",
                                verb, aop.name, cm_x.after_qualified, cm_y.after_qualified
                            ),
                            rop.location,
                            aop.location,
                            line_range(aop.location),
                            detail(&[
                                ("method", &aop.name),
                                ("sourceClass", &cm_x.after_qualified),
                                ("targetClass", &cm_y.after_qualified),
                            ]),
                        );
                        self.consumed_removed.insert(rkey.clone());
                        self.consumed_added.insert(akey);
                        break 'target;
                    }
                }
            }
            for rattr in &cm_x.removed_attributes {
                'target_attr: for (yi, cm_y) in self.diff.class_matches.iter().enumerate() {
                    if xi == yi {
                        continue;
                    }
                    for aattr in &cm_y.added_attributes {
                        if rattr.name != aattr.name || rattr.ty != aattr.ty {
                            continue;
                        }
                        let pull_up = self
                            .after
                            .is_ancestor(&cm_x.after_qualified, &cm_y.after_qualified);
                        let (ty, verb) = if pull_up {
                            (RefactoringType::PullUpField, "Pull Up Field")
                        } else {
                            (RefactoringType::MoveField, "Move Field")
                        };
                        self.push(
                            ty,
                            format!(
                                "{}: {} from {} to {}",
                                verb, aattr.name, cm_x.after_qualified, cm_y.after_qualified
                            ),
                            rattr.location,
                            aattr.location,
                            line_range(aattr.location),
                            detail(&[
                                ("field", &aattr.name),
                                ("sourceClass", &cm_x.after_qualified),
                                ("targetClass", &cm_y.after_qualified),
                            ]),
                        );
                        break 'target_attr;
                    }
                }
            }
        }
    }

    /// Extract: a new operation B holds at least one leaf that used to live
    /// in a matched operation's before-body but not its after-body, and the
    /// residual after-body calls B.
    fn extracts(&mut self) {
        let mut emitted = Vec::new();
        for cm_a in &self.diff.class_matches {
            for om in &cm_a.operation_matches {
                let Some(body) = &om.body else { continue };
                let subst = body.substitution_map();
                let before_texts: BTreeSet<String> = om
                    .before
                    .body
                    .iter()
                    .flat_map(|b| b.leaves())
                    .map(|l| apply_substitution(&l.normalized_text, &subst).0)
                    .collect();
                let after_texts: BTreeSet<String> = om
                    .after
                    .body
                    .iter()
                    .flat_map(|b| b.leaves())
                    .map(|l| l.normalized_text.clone())
                    .collect();
                let after_refs = om
                    .after
                    .body
                    .as_ref()
                    .map(|b| {
                        b.all_referenced_identifiers()
                            .into_iter()
                            .map(ToString::to_string)
                            .collect::<BTreeSet<String>>()
                    })
                    .unwrap_or_default();
                for cm_b in &self.diff.class_matches {
                    for bop in &cm_b.added_operations {
                        let bkey = op_key(&cm_b.after_qualified, bop);
                        if self.consumed_added.contains(&bkey) {
                            continue;
                        }
                        let Some(bbody) = &bop.body else { continue };
                        let moved = bbody.leaves().iter().any(|l| {
                            before_texts.contains(&l.normalized_text)
                                && !after_texts.contains(&l.normalized_text)
                        });
                        if !moved || !after_refs.contains(&bop.name) {
                            continue;
                        }
                        let same_class = cm_b.after_qualified == cm_a.after_qualified;
                        let mut lines = line_range(om.after.location);
                        lines.extend(line_range(bop.location));
                        let (ty, desc, det) = if same_class {
                            (
                                RefactoringType::ExtractMethod,
                                format!(
                                    "Extract Method: {} extracted from {}",
                                    bop.name, om.after.name
                                ),
                                detail(&[
                                    ("class", &cm_a.after_qualified),
                                    ("sourceMethod", &om.after.name),
                                    ("extractedMethod", &bop.name),
                                ]),
                            )
                        } else {
                            (
                                RefactoringType::ExtractAndMoveMethod,
                                format!(
                                    "Extract And Move Method: {} extracted from {}::{} to {}",
                                    bop.name,
                                    cm_a.after_qualified,
                                    om.after.name,
                                    cm_b.after_qualified
                                ),
                                detail(&[
                                    ("sourceClass", &cm_a.after_qualified),
                                    ("sourceMethod", &om.after.name),
                                    ("extractedMethod", &bop.name),
                                    ("targetClass", &cm_b.after_qualified),
                                ]),
                            )
                        };
                        emitted.push((ty, desc, om.before.location, om.after.location, lines, det));
                        self.consumed_added.insert(bkey);
                    }
                }
            }
        }
        for (ty, desc, bl, al, lines, det) in emitted {
            self.push(ty, desc, bl, al, lines, det);
        }
    }

    /// Inline: the mirror image of extract, over removed operations.
    fn inlines(&mut self) {
        let mut emitted = Vec::new();
        for cm_b in &self.diff.class_matches {
            for bop in &cm_b.removed_operations {
                let bkey = op_key(&cm_b.before_qualified, bop);
                if self.consumed_removed.contains(&bkey) {
                    continue;
                }
                let Some(bbody) = &bop.body else { continue };
                'source: for cm_a in &self.diff.class_matches {
                    for om in &cm_a.operation_matches {
                        let Some(body) = &om.body else { continue };
                        let subst = body.substitution_map();
                        let before_texts: BTreeSet<String> = om
                            .before
                            .body
                            .iter()
                            .flat_map(|b| b.leaves())
                            .map(|l| apply_substitution(&l.normalized_text, &subst).0)
                            .collect();
                        let after_texts: BTreeSet<String> = om
                            .after
                            .body
                            .iter()
                            .flat_map(|b| b.leaves())
                            .map(|l| l.normalized_text.clone())
                            .collect();
                        let before_refs = om
                            .before
                            .body
                            .as_ref()
                            .map(|b| {
                                b.all_referenced_identifiers()
                                    .into_iter()
                                    .map(ToString::to_string)
                                    .collect::<BTreeSet<String>>()
                            })
                            .unwrap_or_default();
                        let moved = bbody.leaves().iter().any(|l| {
                            let rewritten = apply_substitution(&l.normalized_text, &subst).0;
                            after_texts.contains(&rewritten) && !before_texts.contains(&rewritten)
                        });
                        if !moved || !before_refs.contains(&bop.name) {
                            continue;
                        }
                        emitted.push((
                            format!("Inline Method: {} inlined into {}", bop.name, om.after.name),
                            bop.location,
                            om.after.location,
                            line_range(om.after.location),
                            detail(&[
                                ("class", &cm_a.after_qualified),
                                ("sourceClass", &cm_b.after_qualified),
                                ("inlinedMethod", &bop.name),
                                ("targetMethod", &om.after.name),
                            ]),
                        ));
                        self.consumed_removed.insert(bkey.clone());
                        break 'source;
                    }
                }
            }
        }
        for (desc, bl, al, lines, det) in emitted {
            self.push(RefactoringType::InlineMethod, desc, bl, al, lines, det);
        }
    }
}

/// Runs every detector over the diff and returns findings in deterministic
/// order.
pub fn detect(diff: &ModelDiff, before: &CodeModel, after: &CodeModel) -> Vec<Refactoring> {
    let mut det = Detector {
        diff,
        after,
        findings: Vec::new(),
        consumed_added: BTreeSet::new(),
        consumed_removed: BTreeSet::new(),
    };
    det.moves();
    det.extracts();
    det.inlines();
    for cm in &diff.class_matches {
        det.class_level(cm, before);
        det.attribute_level(cm);
        det.operation_level(cm);
    }
    let mut findings = det.findings;
    findings.sort_by(|a, b| {
        a.after_location
            .cmp(&b.after_location)
            .then_with(|| a.refactoring_type.as_str().cmp(b.refactoring_type.as_str()))
            .then_with(|| a.description.cmp(&b.description))
    });
    findings.dedup();
    findings
}
