//! Property tests over generated C++ sources: serialization round-trips,
//! identity diffs are clean, and class partitioning is a reconciliation.

use proptest::prelude::*;

use refscan_core::matcher::MatchKind;
use refscan_core::model::{deserialize_model, serialize_model, CodeModel};
use refscan_core::{detect, match_models, member_similarity, parse, report_behavior_changes};

#[derive(Debug, Clone)]
struct ClassSpec {
    name: String,
    attrs: Vec<(String, &'static str)>,
    ops: Vec<OpSpec>,
}

#[derive(Debug, Clone)]
struct OpSpec {
    name: String,
    ret: &'static str,
    params: Vec<(String, &'static str)>,
    body: Vec<String>,
}

fn ident() -> impl Strategy<Value = String> {
    "[a-z][a-z0-9]{0,5}".prop_filter("not a keyword", |s| {
        !matches!(
            s.as_str(),
            "if" | "for"
                | "while"
                | "do"
                | "int"
                | "return"
                | "class"
                | "new"
                | "try"
                | "case"
                | "else"
                | "break"
                | "const"
                | "void"
                | "bool"
                | "char"
                | "long"
                | "float"
                | "double"
                | "static"
                | "inline"
                | "this"
                | "true"
                | "false"
                | "switch"
        )
    })
}

fn ty() -> impl Strategy<Value = &'static str> {
    prop_oneof![Just("int"), Just("double"), Just("long"), Just("bool")]
}

fn op_spec(idx: usize) -> impl Strategy<Value = OpSpec> {
    (
        ident(),
        ty(),
        prop::collection::vec((ident(), ty()), 0..3),
        prop::collection::vec(0u8..4, 0..4),
    )
        .prop_map(move |(name, ret, params, body_picks)| {
            let mut body: Vec<String> = body_picks
                .iter()
                .enumerate()
                .map(|(i, pick)| match pick {
                    0 => format!("int t{i} = {i};"),
                    1 => format!("t{i} = t{i} + 1;", i = i.max(1) - 1),
                    2 => format!("helper({i});"),
                    _ => "break;".to_string(),
                })
                .collect();
            body.push("return 0;".to_string());
            OpSpec {
                name: format!("{name}{idx}"),
                ret,
                params: params
                    .into_iter()
                    .enumerate()
                    .map(|(i, (n, t))| (format!("{n}{i}"), t))
                    .collect(),
                body,
            }
        })
}

fn class_spec(idx: usize) -> impl Strategy<Value = ClassSpec> {
    (
        ident(),
        prop::collection::vec((ident(), ty()), 0..3),
        prop::collection::vec(0usize..1000, 0..3),
    )
        .prop_flat_map(move |(name, attrs, op_seeds)| {
            let ops: Vec<BoxedStrategy<OpSpec>> = op_seeds
                .iter()
                .enumerate()
                .map(|(i, _)| op_spec(i).boxed())
                .collect();
            (Just(name), Just(attrs), ops)
        })
        .prop_map(move |(name, attrs, ops)| ClassSpec {
            name: format!("{}{}{}", name[..1].to_uppercase(), &name[1..], idx),
            attrs: attrs
                .into_iter()
                .enumerate()
                .map(|(i, (n, t))| (format!("{n}{i}"), t))
                .collect(),
            ops,
        })
}

fn source() -> impl Strategy<Value = String> {
    prop::collection::vec(0usize..1000, 0..4)
        .prop_flat_map(|seeds| {
            let classes: Vec<BoxedStrategy<ClassSpec>> = seeds
                .iter()
                .enumerate()
                .map(|(i, _)| class_spec(i).boxed())
                .collect();
            classes
        })
        .prop_map(|classes| {
            let mut src = String::new();
            for c in &classes {
                src.push_str(&format!("class {} {{\npublic:\n", c.name));
                for (n, t) in &c.attrs {
                    src.push_str(&format!("  {t} {n};\n"));
                }
                for op in &c.ops {
                    let params = op
                        .params
                        .iter()
                        .map(|(n, t)| format!("{t} {n}"))
                        .collect::<Vec<_>>()
                        .join(", ");
                    src.push_str(&format!("  {} {}({}) {{\n", op.ret, op.name, params));
                    for stmt in &op.body {
                        src.push_str(&format!("    {stmt}\n"));
                    }
                    src.push_str("  }\n");
                }
                src.push_str("};\n");
            }
            src
        })
}

fn parse_ok(src: &str, name: &str) -> CodeModel {
    parse(src, name).unwrap_or_else(|e| panic!("parse failed: {e}\n{src}"))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn serialization_round_trips(src in source()) {
        let model = parse_ok(&src, "a.cpp");
        let bytes = serialize_model(&model);
        let back = deserialize_model(&bytes).unwrap();
        prop_assert_eq!(model, back);
    }

    #[test]
    fn serialization_is_deterministic(src in source()) {
        let model = parse_ok(&src, "a.cpp");
        prop_assert_eq!(serialize_model(&model), serialize_model(&model));
    }

    #[test]
    fn identity_diff_is_clean(src in source()) {
        let model = parse_ok(&src, "a.cpp");
        let diff = match_models(&model, &model);
        prop_assert!(diff.added_classes.is_empty());
        prop_assert!(diff.removed_classes.is_empty());
        prop_assert_eq!(diff.class_matches.len(), model.classes.len());
        for cm in &diff.class_matches {
            prop_assert_eq!(&cm.before_qualified, &cm.after_qualified);
            prop_assert!(cm.added_operations.is_empty());
            prop_assert!(cm.removed_operations.is_empty());
            prop_assert!(cm.added_attributes.is_empty());
            prop_assert!(cm.removed_attributes.is_empty());
            for om in &cm.operation_matches {
                if let Some(body) = &om.body {
                    prop_assert!(body.added_leaves.is_empty());
                    prop_assert!(body.removed_leaves.is_empty());
                    for m in &body.mappings {
                        prop_assert_eq!(m.match_kind, MatchKind::Exact);
                    }
                }
            }
        }
        let findings = detect(&diff, &model, &model);
        prop_assert!(findings.is_empty(), "unexpected findings {:#?}", findings);
        let changes = report_behavior_changes(&diff, &findings);
        prop_assert!(changes.is_empty(), "unexpected changes {:#?}", changes);
    }

    #[test]
    fn class_partition_reconciles(a in source(), b in source()) {
        let before = parse_ok(&a, "a.cpp");
        let after = parse_ok(&b, "b.cpp");
        let diff = match_models(&before, &after);

        let mut before_seen: Vec<&str> =
            diff.class_matches.iter().map(|cm| cm.before_qualified.as_str()).collect();
        before_seen.extend(diff.removed_classes.iter().map(|c| c.as_str()));
        before_seen.sort_unstable();
        let mut before_all: Vec<String> =
            before.classes.iter().map(|c| c.qualified_name()).collect();
        before_all.sort_unstable();
        prop_assert_eq!(before_seen, before_all.iter().map(|s| s.as_str()).collect::<Vec<_>>());

        let mut after_seen: Vec<&str> =
            diff.class_matches.iter().map(|cm| cm.after_qualified.as_str()).collect();
        after_seen.extend(diff.added_classes.iter().map(|c| c.as_str()));
        after_seen.sort_unstable();
        let mut after_all: Vec<String> =
            after.classes.iter().map(|c| c.qualified_name()).collect();
        after_all.sort_unstable();
        prop_assert_eq!(after_seen, after_all.iter().map(|s| s.as_str()).collect::<Vec<_>>());
    }

    #[test]
    fn similarity_is_bounded_and_reflexive(a in source(), b in source()) {
        let ma = parse_ok(&a, "a.cpp");
        let mb = parse_ok(&b, "b.cpp");
        for ca in &ma.classes {
            prop_assert!((member_similarity(ca, ca) - 1.0).abs() < 1e-9 || ca.operations.is_empty() && ca.attributes.is_empty());
            for cb in &mb.classes {
                let s = member_similarity(ca, cb);
                prop_assert!((0.0..=1.0).contains(&s), "similarity {} out of range", s);
                prop_assert!((s - member_similarity(cb, ca)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn detection_never_panics_and_is_deterministic(a in source(), b in source()) {
        let before = parse_ok(&a, "a.cpp");
        let after = parse_ok(&b, "b.cpp");
        let diff = match_models(&before, &after);
        let f1 = detect(&diff, &before, &after);
        let f2 = detect(&diff, &before, &after);
        prop_assert_eq!(&f1, &f2);
        let c1 = report_behavior_changes(&diff, &f1);
        let c2 = report_behavior_changes(&diff, &f1);
        prop_assert_eq!(c1, c2);
    }
}
