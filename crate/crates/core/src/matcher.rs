//! Aligns two code models: classes first, then members, then statements.
//!
//! Class pairing runs in two passes: exact qualified-name matches, then
//! greedy pairing of the leftovers by descending similarity with a 0.5
//! acceptance threshold (signature similarity, with a body-similarity
//! fallback so fully renamed classes still pair). Member pairing inside a
//! class match is exact signature first, then name-equal with a changed
//! signature, then body similarity. Statement bodies are matched leaf-wise
//! in three passes: exact normalized text, equal text under a consistent
//! identifier substitution, and positional pairing of leftovers flagged
//! `modified`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::model::{AttributeDecl, ClassDecl, CodeModel, OperationDecl, Statement, TypeRef};

/// How a pair of statements was aligned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchKind {
    Exact,
    RenamedIdentifier,
    Modified,
}

/// Where a rename substitution entry came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubstitutionOrigin {
    Parameter,
    LocalVariable,
    Attribute,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenameSubstitution {
    pub from: String,
    pub to: String,
    pub origin: SubstitutionOrigin,
}

/// A matched pair of statements. Both sides are stored by value; statements
/// are immutable once parsed.
#[derive(Debug, Clone)]
pub struct StatementMapping {
    pub before: Statement,
    pub after: Statement,
    pub match_kind: MatchKind,
    /// Non-identity substitution keys (before-side identifiers) that were
    /// applied to reach this match.
    pub used_renames: BTreeSet<String>,
}

/// Positionally corresponding local variables of one operation match.
#[derive(Debug, Clone)]
pub struct LocalPair {
    pub before_name: String,
    pub after_name: String,
    pub before_type: TypeRef,
    pub after_type: TypeRef,
    pub before_statement: Statement,
    pub after_statement: Statement,
}

#[derive(Debug, Clone, Default)]
pub struct OperationBodyMatch {
    pub mappings: Vec<StatementMapping>,
    pub added_leaves: Vec<Statement>,
    pub removed_leaves: Vec<Statement>,
    pub substitutions: Vec<RenameSubstitution>,
    pub local_pairs: Vec<LocalPair>,
}

impl OperationBodyMatch {
    /// Leaf statements aligned exact or renamed, used as the body
    /// similarity numerator.
    fn matched_leaf_count(&self) -> usize {
        self.mappings
            .iter()
            .filter(|m| m.before.kind.is_leaf() && m.match_kind != MatchKind::Modified)
            .count()
    }

    pub fn substitution_map(&self) -> BTreeMap<String, String> {
        self.substitutions
            .iter()
            .map(|s| (s.from.clone(), s.to.clone()))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct OperationMatch {
    pub before: OperationDecl,
    pub after: OperationDecl,
    pub signature_changed: bool,
    pub score: f64,
    pub body: Option<OperationBodyMatch>,
}

#[derive(Debug, Clone)]
pub struct AttributeMatch {
    pub before: AttributeDecl,
    pub after: AttributeDecl,
    /// True when the pair was aligned by type and initializer rather than
    /// by name.
    pub renamed: bool,
}

#[derive(Debug, Clone)]
pub struct ClassMatch {
    pub before_qualified: String,
    pub after_qualified: String,
    pub score: f64,
    pub operation_matches: Vec<OperationMatch>,
    pub attribute_matches: Vec<AttributeMatch>,
    pub added_operations: Vec<OperationDecl>,
    pub removed_operations: Vec<OperationDecl>,
    pub added_attributes: Vec<AttributeDecl>,
    pub removed_attributes: Vec<AttributeDecl>,
}

/// Matched/added/removed partition of two models.
#[derive(Debug, Clone, Default)]
pub struct ModelDiff {
    pub class_matches: Vec<ClassMatch>,
    pub added_classes: Vec<String>,
    pub removed_classes: Vec<String>,
}

const CLASS_MATCH_THRESHOLD: f64 = 0.5;
const BODY_MATCH_THRESHOLD: f64 = 0.5;

/// Set-overlap similarity of two classes' member signature keys:
/// `|A ∩ B| / max(|A|, |B|, 1)`; two empty classes score 1.0.
pub fn member_similarity(a: &ClassDecl, b: &ClassDecl) -> f64 {
    let keys = |c: &ClassDecl| -> BTreeSet<String> {
        let mut set: BTreeSet<String> = c.operations.iter().map(|o| o.signature_key()).collect();
        for attr in &c.attributes {
            set.insert(alloc::format!("{}:{}", attr.name, attr.ty.render()));
        }
        set
    };
    let sa = keys(a);
    let sb = keys(b);
    if sa.is_empty() && sb.is_empty() {
        return 1.0;
    }
    let inter = sa.intersection(&sb).count();
    inter as f64 / core::cmp::max(sa.len(), sb.len()).max(1) as f64
}

/// Applies an identifier substitution to a normalized text, replacing whole
/// identifier words only. Returns the rewritten text and the set of keys
/// that fired.
pub(crate) fn apply_substitution(
    text: &str,
    subst: &BTreeMap<String, String>,
) -> (String, BTreeSet<String>) {
    let mut out = String::with_capacity(text.len());
    let mut used = BTreeSet::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            match subst.get(&word) {
                Some(repl) => {
                    used.insert(word);
                    out.push_str(repl);
                }
                None => out.push_str(&word),
            }
        } else if c.is_ascii_digit() {
            // Numbers may contain identifier-like suffixes; keep them whole.
            while i < chars.len()
                && (chars[i].is_ascii_alphanumeric()
                    || chars[i] == '_'
                    || chars[i] == '.'
                    || chars[i] == '\'')
            {
                out.push(chars[i]);
                i += 1;
            }
        } else {
            out.push(c);
            i += 1;
        }
    }
    (out, used)
}

/// Aligns two models into a [`ModelDiff`] satisfying the partition
/// invariant: every class, member, and leaf statement of both models shows
/// up exactly once as matched, added, or removed.
pub fn match_models(before: &CodeModel, after: &CodeModel) -> ModelDiff {
    let mut matched_before: BTreeSet<usize> = BTreeSet::new();
    let mut matched_after: BTreeSet<usize> = BTreeSet::new();
    let mut pairs: Vec<(usize, usize, f64)> = Vec::new();

    // Pass 1: exact qualified names.
    let after_by_name: BTreeMap<String, usize> = after
        .classes
        .iter()
        .enumerate()
        .map(|(i, c)| (c.qualified_name(), i))
        .collect();
    for (bi, bc) in before.classes.iter().enumerate() {
        if let Some(&ai) = after_by_name.get(&bc.qualified_name()) {
            matched_before.insert(bi);
            matched_after.insert(ai);
            pairs.push((bi, ai, 1.0));
        }
    }

    // Pass 2: greedy similarity pairing of the leftovers.
    let mut candidates: Vec<(f64, String, String, usize, usize)> = Vec::new();
    for (bi, bc) in before.classes.iter().enumerate() {
        if matched_before.contains(&bi) {
            continue;
        }
        for (ai, ac) in after.classes.iter().enumerate() {
            if matched_after.contains(&ai) {
                continue;
            }
            let sig = member_similarity(bc, ac);
            let score = if sig >= CLASS_MATCH_THRESHOLD {
                sig
            } else {
                // Fallback: fraction of operation bodies that still match
                // (exact or renamed) across the candidate pair.
                let body = class_body_similarity(bc, ac);
                if body >= CLASS_MATCH_THRESHOLD {
                    body
                } else {
                    continue;
                }
            };
            candidates.push((score, bc.qualified_name(), ac.qualified_name(), bi, ai));
        }
    }
    candidates.sort_by(|a, b| {
        b.0.total_cmp(&a.0)
            .then_with(|| a.1.cmp(&b.1))
            .then_with(|| a.2.cmp(&b.2))
    });
    for (score, _, _, bi, ai) in candidates {
        if matched_before.contains(&bi) || matched_after.contains(&ai) {
            continue;
        }
        matched_before.insert(bi);
        matched_after.insert(ai);
        pairs.push((bi, ai, score));
    }

    pairs.sort_by_key(|p| p.0);
    let mut diff = ModelDiff::default();
    for (bi, ai, score) in pairs {
        diff.class_matches.push(match_class_members(
            &before.classes[bi],
            &after.classes[ai],
            score,
        ));
    }
    for (bi, bc) in before.classes.iter().enumerate() {
        if !matched_before.contains(&bi) {
            diff.removed_classes.push(bc.qualified_name());
        }
    }
    for (ai, ac) in after.classes.iter().enumerate() {
        if !matched_after.contains(&ai) {
            diff.added_classes.push(ac.qualified_name());
        }
    }
    diff
}

// Fraction of operations whose bodies match (exact or renamed leaves
// making up at least half), over the larger operation count.
fn class_body_similarity(before: &ClassDecl, after: &ClassDecl) -> f64 {
    let nb = before.operations.len();
    let na = after.operations.len();
    if nb == 0 || na == 0 {
        return 0.0;
    }
    let mut taken = alloc::vec![false; na];
    let mut matched = 0usize;
    for bop in &before.operations {
        let mut best: Option<(f64, usize)> = None;
        for (ai, aop) in after.operations.iter().enumerate() {
            if taken[ai] {
                continue;
            }
            let sim = operation_body_similarity(bop, aop, &BTreeMap::new());
            if sim >= BODY_MATCH_THRESHOLD && best.map(|(s, _)| sim > s).unwrap_or(true) {
                best = Some((sim, ai));
            }
        }
        if let Some((_, ai)) = best {
            taken[ai] = true;
            matched += 1;
        }
    }
    matched as f64 / core::cmp::max(nb, na) as f64
}

/// Fraction of leaf statements aligned exact-or-renamed between two
/// operation bodies, over the larger leaf count. Bodiless operations score
/// 0 against everything.
pub fn operation_body_similarity(
    before: &OperationDecl,
    after: &OperationDecl,
    attribute_renames: &BTreeMap<String, String>,
) -> f64 {
    let (Some(_), Some(_)) = (&before.body, &after.body) else {
        return 0.0;
    };
    let m = match_operation_bodies(before, after, attribute_renames);
    let nb = before.body.as_ref().unwrap().leaves().len();
    let na = after.body.as_ref().unwrap().leaves().len();
    m.matched_leaf_count() as f64 / core::cmp::max(nb, na).max(1) as f64
}

/// Matches two operation bodies: infers a rename substitution from
/// parameter positions, local declaration order, and attribute-level
/// renames, then aligns leaves in three passes and composites by header.
pub fn match_operation_bodies(
    before: &OperationDecl,
    after: &OperationDecl,
    attribute_renames: &BTreeMap<String, String>,
) -> OperationBodyMatch {
    let mut out = OperationBodyMatch::default();
    let mut subst: BTreeMap<String, String> = BTreeMap::new();

    // Parameters pair by position when arity is equal.
    if before.parameters.len() == after.parameters.len() {
        for (bp, ap) in before.parameters.iter().zip(&after.parameters) {
            if bp.name.is_empty() || ap.name.is_empty() {
                continue;
            }
            if bp.name != ap.name && !subst.contains_key(&bp.name) {
                subst.insert(bp.name.clone(), ap.name.clone());
                out.substitutions.push(RenameSubstitution {
                    from: bp.name.clone(),
                    to: ap.name.clone(),
                    origin: SubstitutionOrigin::Parameter,
                });
            }
        }
    }

    let (bbody, abody) = match (&before.body, &after.body) {
        (Some(b), Some(a)) => (b, a),
        _ => return out,
    };

    // Locals pair by declaration order.
    let bdecls = bbody.all_declared_variables();
    let adecls = abody.all_declared_variables();
    for ((bd, bstmt), (ad, astmt)) in bdecls.iter().zip(adecls.iter()) {
        out.local_pairs.push(LocalPair {
            before_name: bd.name.clone(),
            after_name: ad.name.clone(),
            before_type: bd.ty.clone(),
            after_type: ad.ty.clone(),
            before_statement: (*bstmt).clone(),
            after_statement: (*astmt).clone(),
        });
        if bd.name != ad.name && !subst.contains_key(&bd.name) {
            subst.insert(bd.name.clone(), ad.name.clone());
            out.substitutions.push(RenameSubstitution {
                from: bd.name.clone(),
                to: ad.name.clone(),
                origin: SubstitutionOrigin::LocalVariable,
            });
        }
    }

    // Attribute-level renames, lowest priority.
    for (from, to) in attribute_renames {
        if from != to && !subst.contains_key(from) {
            subst.insert(from.clone(), to.clone());
            out.substitutions.push(RenameSubstitution {
                from: from.clone(),
                to: to.clone(),
                origin: SubstitutionOrigin::Attribute,
            });
        }
    }

    let mut unmatched_before = Vec::new();
    let mut unmatched_after = Vec::new();
    match_statement_lists(
        &bbody.children,
        &abody.children,
        &subst,
        &mut out.mappings,
        &mut unmatched_before,
        &mut unmatched_after,
    );
    for stmt in unmatched_before {
        collect_leaves_owned(&stmt, &mut out.removed_leaves);
    }
    for stmt in unmatched_after {
        collect_leaves_owned(&stmt, &mut out.added_leaves);
    }
    out
}

fn collect_leaves_owned(stmt: &Statement, out: &mut Vec<Statement>) {
    if stmt.kind.is_leaf() {
        out.push(stmt.clone());
    } else {
        for child in &stmt.children {
            collect_leaves_owned(child, out);
        }
    }
}

fn leaf_text_multiset(
    stmt: &Statement,
    subst: Option<&BTreeMap<String, String>>,
) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for leaf in stmt.leaves() {
        let text = match subst {
            Some(map) => apply_substitution(&leaf.normalized_text, map).0,
            None => leaf.normalized_text.clone(),
        };
        *out.entry(text).or_insert(0) += 1;
    }
    out
}

// A composite pair is considered aligned when at least half of the larger
// side's leaves agree textually (under the substitution for renamed mode).
fn children_majority_match(
    b: &Statement,
    a: &Statement,
    subst: Option<&BTreeMap<String, String>>,
) -> bool {
    let bm = leaf_text_multiset(b, subst);
    let am = leaf_text_multiset(a, None);
    let total_b: usize = bm.values().sum();
    let total_a: usize = am.values().sum();
    let max_total = core::cmp::max(total_b, total_a);
    if max_total == 0 {
        return true;
    }
    let mut common = 0usize;
    for (text, nb) in &bm {
        if let Some(na) = am.get(text) {
            common += core::cmp::min(*nb, *na);
        }
    }
    common * 2 >= max_total
}

fn match_statement_lists(
    before: &[Statement],
    after: &[Statement],
    subst: &BTreeMap<String, String>,
    mappings: &mut Vec<StatementMapping>,
    unmatched_before: &mut Vec<Statement>,
    unmatched_after: &mut Vec<Statement>,
) {
    let mut btaken = alloc::vec![false; before.len()];
    let mut ataken = alloc::vec![false; after.len()];

    // Pass 1: exact normalized text.
    for (bi, b) in before.iter().enumerate() {
        for (ai, a) in after.iter().enumerate() {
            if ataken[ai] || b.kind != a.kind {
                continue;
            }
            let header_eq = b.normalized_text == a.normalized_text;
            let ok = if b.kind.is_leaf() {
                header_eq
            } else {
                header_eq && children_majority_match(b, a, None)
            };
            if ok {
                btaken[bi] = true;
                ataken[ai] = true;
                pair_statements(
                    b,
                    a,
                    MatchKind::Exact,
                    BTreeSet::new(),
                    subst,
                    mappings,
                    unmatched_before,
                    unmatched_after,
                );
                break;
            }
        }
    }

    // Pass 2: equal text after applying the rename substitution.
    for (bi, b) in before.iter().enumerate() {
        if btaken[bi] {
            continue;
        }
        for (ai, a) in after.iter().enumerate() {
            if ataken[ai] || b.kind != a.kind {
                continue;
            }
            let (rewritten, used) = apply_substitution(&b.normalized_text, subst);
            let header_eq = rewritten == a.normalized_text;
            let ok = if b.kind.is_leaf() {
                header_eq
            } else {
                header_eq && children_majority_match(b, a, Some(subst))
            };
            if ok {
                btaken[bi] = true;
                ataken[ai] = true;
                pair_statements(
                    b,
                    a,
                    MatchKind::RenamedIdentifier,
                    used,
                    subst,
                    mappings,
                    unmatched_before,
                    unmatched_after,
                );
                break;
            }
        }
    }

    // Pass 3: positional pairing of same-kind leftovers, flagged modified.
    let leftover_b: Vec<usize> = (0..before.len()).filter(|i| !btaken[*i]).collect();
    let leftover_a: Vec<usize> = (0..after.len()).filter(|i| !ataken[*i]).collect();
    let mut a_cursor = 0usize;
    for &bi in &leftover_b {
        let b = &before[bi];
        let mut found = None;
        for (offset, &ai) in leftover_a.iter().enumerate().skip(a_cursor) {
            if ataken[ai] {
                continue;
            }
            if after[ai].kind == b.kind {
                found = Some((offset, ai));
                break;
            }
        }
        if let Some((offset, ai)) = found {
            btaken[bi] = true;
            ataken[ai] = true;
            a_cursor = offset + 1;
            pair_statements(
                b,
                &after[ai],
                MatchKind::Modified,
                BTreeSet::new(),
                subst,
                mappings,
                unmatched_before,
                unmatched_after,
            );
        }
    }

    for (bi, b) in before.iter().enumerate() {
        if !btaken[bi] {
            unmatched_before.push(b.clone());
        }
    }
    for (ai, a) in after.iter().enumerate() {
        if !ataken[ai] {
            unmatched_after.push(a.clone());
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn pair_statements(
    b: &Statement,
    a: &Statement,
    kind: MatchKind,
    used: BTreeSet<String>,
    subst: &BTreeMap<String, String>,
    mappings: &mut Vec<StatementMapping>,
    unmatched_before: &mut Vec<Statement>,
    unmatched_after: &mut Vec<Statement>,
) {
    mappings.push(StatementMapping {
        before: b.clone(),
        after: a.clone(),
        match_kind: kind,
        used_renames: used,
    });
    if !b.kind.is_leaf() && !a.kind.is_leaf() {
        match_statement_lists(
            &b.children,
            &a.children,
            subst,
            mappings,
            unmatched_before,
            unmatched_after,
        );
    }
}

fn match_class_members(before: &ClassDecl, after: &ClassDecl, score: f64) -> ClassMatch {
    let mut cm = ClassMatch {
        before_qualified: before.qualified_name(),
        after_qualified: after.qualified_name(),
        score,
        operation_matches: Vec::new(),
        attribute_matches: Vec::new(),
        added_operations: Vec::new(),
        removed_operations: Vec::new(),
        added_attributes: Vec::new(),
        removed_attributes: Vec::new(),
    };

    // Attributes: by name first, then renamed pairs by type + initializer.
    let mut btaken = alloc::vec![false; before.attributes.len()];
    let mut ataken = alloc::vec![false; after.attributes.len()];
    for (bi, ba) in before.attributes.iter().enumerate() {
        if let Some(ai) = after.attributes.iter().position(|aa| aa.name == ba.name) {
            if !ataken[ai] {
                btaken[bi] = true;
                ataken[ai] = true;
                cm.attribute_matches.push(AttributeMatch {
                    before: ba.clone(),
                    after: after.attributes[ai].clone(),
                    renamed: false,
                });
            }
        }
    }
    for (bi, ba) in before.attributes.iter().enumerate() {
        if btaken[bi] {
            continue;
        }
        for (ai, aa) in after.attributes.iter().enumerate() {
            if ataken[ai] {
                continue;
            }
            if ba.ty == aa.ty && ba.initializer_text == aa.initializer_text {
                btaken[bi] = true;
                ataken[ai] = true;
                cm.attribute_matches.push(AttributeMatch {
                    before: ba.clone(),
                    after: aa.clone(),
                    renamed: true,
                });
                break;
            }
        }
    }
    for (bi, ba) in before.attributes.iter().enumerate() {
        if !btaken[bi] {
            cm.removed_attributes.push(ba.clone());
        }
    }
    for (ai, aa) in after.attributes.iter().enumerate() {
        if !ataken[ai] {
            cm.added_attributes.push(aa.clone());
        }
    }

    let attribute_renames: BTreeMap<String, String> = cm
        .attribute_matches
        .iter()
        .filter(|m| m.renamed)
        .map(|m| (m.before.name.clone(), m.after.name.clone()))
        .collect();

    // Operations: exact signature, then name-equal with changed signature,
    // then body similarity.
    let mut btaken = alloc::vec![false; before.operations.len()];
    let mut ataken = alloc::vec![false; after.operations.len()];
    let mut op_pairs: Vec<(usize, usize, bool, f64)> = Vec::new();

    for (bi, bo) in before.operations.iter().enumerate() {
        for (ai, ao) in after.operations.iter().enumerate() {
            if ataken[ai] {
                continue;
            }
            if bo.signature_key() == ao.signature_key() {
                btaken[bi] = true;
                ataken[ai] = true;
                op_pairs.push((bi, ai, false, 1.0));
                break;
            }
        }
    }
    for (bi, bo) in before.operations.iter().enumerate() {
        if btaken[bi] {
            continue;
        }
        for (ai, ao) in after.operations.iter().enumerate() {
            if ataken[ai] {
                continue;
            }
            if bo.name == ao.name {
                btaken[bi] = true;
                ataken[ai] = true;
                op_pairs.push((bi, ai, true, 1.0));
                break;
            }
        }
    }
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (bi, bo) in before.operations.iter().enumerate() {
        if btaken[bi] {
            continue;
        }
        for (ai, ao) in after.operations.iter().enumerate() {
            if ataken[ai] {
                continue;
            }
            let sim = operation_body_similarity(bo, ao, &attribute_renames);
            if sim >= BODY_MATCH_THRESHOLD {
                candidates.push((sim, bi, ai));
            }
        }
    }
    candidates.sort_by(|a, b| {
        b.0.total_cmp(&a.0)
            .then_with(|| a.1.cmp(&b.1))
            .then_with(|| a.2.cmp(&b.2))
    });
    for (sim, bi, ai) in candidates {
        if btaken[bi] || ataken[ai] {
            continue;
        }
        btaken[bi] = true;
        ataken[ai] = true;
        let sig_changed =
            before.operations[bi].signature_key() != after.operations[ai].signature_key();
        op_pairs.push((bi, ai, sig_changed, sim));
    }

    op_pairs.sort_by_key(|p| p.0);
    for (bi, ai, signature_changed, score) in op_pairs {
        let bo = &before.operations[bi];
        let ao = &after.operations[ai];
        let body = match (&bo.body, &ao.body) {
            (Some(_), Some(_)) => Some(match_operation_bodies(bo, ao, &attribute_renames)),
            _ => None,
        };
        cm.operation_matches.push(OperationMatch {
            before: bo.clone(),
            after: ao.clone(),
            signature_changed,
            score,
            body,
        });
    }
    for (bi, bo) in before.operations.iter().enumerate() {
        if !btaken[bi] {
            cm.removed_operations.push(bo.clone());
        }
    }
    for (ai, ao) in after.operations.iter().enumerate() {
        if !ataken[ai] {
            cm.added_operations.push(ao.clone());
        }
    }
    cm
}
