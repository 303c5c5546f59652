//! Property tests for the condition algebra, the frontend, and graph
//! persistence.

use std::collections::BTreeMap;

use proptest::prelude::*;

use exposure_core::ast::{Argument, ArgumentKind, AstNode};
use exposure_core::bdg::{load_bdg_bytes, to_json_bytes, Bdg, BdgEdge, BdgMetadata, BdgNode, EdgeKind, NodeKind};
use exposure_core::cond::{
    count_variants, to_dnf, Atom, Condition, ConfigOption, ConfigurationAssignment, OptionOrigin,
    Tri,
};
use exposure_core::eval::{DeliverableKind, LibraryKind};
use exposure_core::parse::parse_source;
use exposure_core::span::SourceSpan;

fn atom_strategy() -> impl Strategy<Value = Atom> {
    prop_oneof![
        (0..6u32).prop_map(|i| Atom::Truthy {
            option: format!("O{i}")
        }),
        (0..4u32, "[a-z]{1,3}").prop_map(|(i, v)| Atom::Equals {
            option: format!("O{i}"),
            literal: v
        }),
        (0..3u32).prop_map(|i| Atom::Defined {
            option: format!("O{i}")
        }),
        "[a-z ]{3,12}".prop_map(Atom::opaque),
    ]
}

/// Raw formula trees, not normalized.
fn raw_condition() -> impl Strategy<Value = Condition> {
    let leaf = prop_oneof![
        Just(Condition::True),
        Just(Condition::False),
        atom_strategy().prop_map(Condition::Atom),
    ];
    leaf.prop_recursive(4, 24, 4, |inner| {
        prop_oneof![
            inner.clone().prop_map(|c| Condition::Not(Box::new(c))),
            prop::collection::vec(inner.clone(), 1..4).prop_map(Condition::And),
            prop::collection::vec(inner, 1..4).prop_map(Condition::Or),
        ]
    })
}

/// Conditions built through the normalizing operations.
fn normalized_condition() -> impl Strategy<Value = Condition> {
    raw_condition().prop_map(normalize)
}

fn normalize(c: Condition) -> Condition {
    match c {
        Condition::Not(inner) => normalize(*inner).negate(),
        Condition::And(cs) => Condition::and_all(cs.into_iter().map(normalize)),
        Condition::Or(cs) => Condition::or_all(cs.into_iter().map(normalize)),
        other => other,
    }
}

fn eval_under(c: &Condition, map: &BTreeMap<&Atom, bool>) -> bool {
    match c {
        Condition::True => true,
        Condition::False => false,
        Condition::Atom(a) => map[a],
        Condition::Not(inner) => !eval_under(inner, map),
        Condition::And(cs) => cs.iter().all(|c| eval_under(c, map)),
        Condition::Or(cs) => cs.iter().any(|c| eval_under(c, map)),
    }
}

proptest! {
    /// The DNF agrees with the input on every assignment of its atoms.
    #[test]
    fn dnf_preserves_truth_table(c in raw_condition()) {
        let atoms: Vec<Atom> = c.atoms().into_iter().cloned().collect();
        prop_assume!(atoms.len() <= 16);
        if let Some(dnf) = to_dnf(&c, 1 << 16) {
            let back = dnf.to_condition();
            for bits in 0..(1u64 << atoms.len()) {
                let map: BTreeMap<&Atom, bool> = atoms
                    .iter()
                    .enumerate()
                    .map(|(i, a)| (a, bits >> i & 1 == 1))
                    .collect();
                prop_assert_eq!(eval_under(&c, &map), eval_under(&back, &map));
            }
        }
    }

    /// Canonical text round-trips for op-built conditions, given the opaque
    /// source table.
    #[test]
    fn canonical_text_round_trips(c in normalized_condition()) {
        let text = c.to_string();
        let sources = c.opaque_sources();
        let back = Condition::parse_with_sources(&text, &sources).unwrap();
        prop_assert_eq!(back, c);
    }

    /// Counting a condition and its negation partitions the option space.
    #[test]
    fn count_partitions_space(c in normalized_condition()) {
        let options: Vec<ConfigOption> = (0..6)
            .map(|i| ConfigOption::boolean(format!("O{i}"), Some("OFF"), OptionOrigin::OptionCommand))
            .collect();
        let yes = count_variants(&c, &options, 20);
        let no = count_variants(&c.clone().negate(), &options, 20);
        if yes.exact && no.exact {
            let names = c.option_names();
            let space: u64 = 1 << names.len();
            prop_assert_eq!(yes.count + no.count, space);
        }
    }

    /// A decided partial evaluation never flips under extension.
    #[test]
    fn evaluation_is_monotone(c in normalized_condition(), bits in 0u64..64, mask in 0u64..64) {
        let options: Vec<String> = (0..6).map(|i| format!("O{i}")).collect();
        let partial_values: Vec<(String, String)> = options
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(i, name)| {
                (name.clone(), if bits >> i & 1 == 1 { "ON" } else { "OFF" }.to_string())
            })
            .collect();
        let partial = ConfigurationAssignment::partial(partial_values.clone());
        let verdict = c.evaluate(&partial);
        if verdict != Tri::Unknown {
            // Extend with every remaining option pinned both ways.
            for extension_bits in [0u64, u64::MAX] {
                let mut values = partial_values.clone();
                for (i, name) in options.iter().enumerate() {
                    if mask >> i & 1 == 0 {
                        values.push((
                            name.clone(),
                            if extension_bits >> i & 1 == 1 { "ON" } else { "OFF" }.to_string(),
                        ));
                    }
                }
                let total = ConfigurationAssignment::partial(values);
                // Opaque atoms stay unknown under any extension; skip.
                if c.contains_opaque() {
                    continue;
                }
                prop_assert_eq!(c.evaluate(&total), verdict);
            }
        }
    }

    /// Re-serializing any command invocation parses back to the same node.
    #[test]
    fn command_round_trip(
        name in "[a-z_][a-z0-9_]{0,12}",
        args in prop::collection::vec(
            prop_oneof![
                "[A-Za-z0-9_./${}-]{1,12}".prop_map(|t| (ArgumentKind::Unquoted, t)),
                "[ -~]{0,12}".prop_filter("no quote/backslash", |s| !s.contains('"') && !s.contains('\\'))
                    .prop_map(|t| (ArgumentKind::Quoted, t)),
                "[ -~]{0,12}".prop_map(|t| (ArgumentKind::Bracket, t)),
            ],
            0..6,
        ),
    ) {
        prop_assume!(!matches!(
            name.as_str(),
            "if" | "elseif" | "else" | "endif" | "foreach" | "endforeach" | "while"
                | "endwhile" | "function" | "endfunction" | "macro" | "endmacro"
        ));
        let span = SourceSpan::new("t.cmake", 1, 1);
        let invocation = exposure_core::ast::CommandInvocation {
            name: name.clone(),
            args: args
                .iter()
                .map(|(kind, text)| Argument {
                    kind: *kind,
                    raw_text: text.clone(),
                    span: span.clone(),
                })
                .collect(),
            span: span.clone(),
        };
        let source = invocation.to_source();
        let parsed = parse_source(&source, "t.cmake").unwrap();
        prop_assert_eq!(parsed.len(), 1);
        match &parsed[0] {
            AstNode::Command(c) => {
                prop_assert_eq!(&c.name, &name);
                prop_assert_eq!(c.args.len(), invocation.args.len());
                for (a, b) in c.args.iter().zip(invocation.args.iter()) {
                    prop_assert_eq!(a.kind, b.kind);
                    prop_assert_eq!(&a.raw_text, &b.raw_text);
                }
            }
            other => prop_assert!(false, "expected command, got {:?}", other),
        }
    }

    /// The frontend never panics on arbitrary input.
    #[test]
    fn frontend_total_on_arbitrary_input(text in "\\PC{0,200}") {
        let _ = parse_source(&text, "fuzz.cmake");
    }

    /// Persistence round-trips structurally.
    #[test]
    fn bdg_round_trip(bdg in bdg_strategy()) {
        let bytes = to_json_bytes(&bdg);
        let loaded = load_bdg_bytes(&bytes).unwrap();
        prop_assert_eq!(loaded, bdg);
    }

    /// Truncating a payload before the closing brace is always rejected.
    #[test]
    fn truncated_bdg_rejected(bdg in bdg_strategy(), fraction in 0.05f64..0.95) {
        let bytes = to_json_bytes(&bdg);
        let closing = bytes.iter().rposition(|b| *b == b'}').unwrap();
        let cut = ((closing as f64) * fraction) as usize;
        prop_assume!(cut >= 1);
        prop_assert!(load_bdg_bytes(&bytes[..cut]).is_err());
    }
}

fn guard_strategy() -> impl Strategy<Value = Condition> {
    prop_oneof![
        Just(Condition::True),
        (0..4u32).prop_map(|i| Condition::truthy(format!("O{i}"))),
        (0..4u32).prop_map(|i| Condition::truthy(format!("O{i}")).negate()),
        (0..4u32, 0..4u32).prop_map(|(i, j)| {
            Condition::truthy(format!("O{i}")).and(Condition::truthy(format!("O{j}")))
        }),
        "[a-z]{4,10}".prop_map(Condition::opaque),
    ]
}

prop_compose! {
    fn bdg_strategy()(
        n_deliverables in 1..5usize,
        n_sources in 1..6usize,
        n_externals in 0..3usize,
        kinds in prop::collection::vec(0..5u8, 5),
        exists in prop::collection::vec(guard_strategy(), 5),
        compile_picks in prop::collection::vec((0..5usize, 0..6usize, guard_strategy()), 0..10),
        link_picks in prop::collection::vec((0..5usize, 0..8usize, guard_strategy()), 0..6),
    ) -> Bdg {
        let mut nodes = Vec::new();
        for i in 0..n_deliverables {
            let kind = match kinds[i] {
                0 => DeliverableKind::Executable,
                1 => DeliverableKind::Library(LibraryKind::Static),
                2 => DeliverableKind::Library(LibraryKind::Shared),
                3 => DeliverableKind::Library(LibraryKind::Module),
                _ => DeliverableKind::Library(LibraryKind::Interface),
            };
            nodes.push(BdgNode {
                id: format!("target_{i}"),
                kind: NodeKind::Deliverable(kind),
                display_name: format!("target_{i}"),
                exists_guard: exists[i].clone(),
            });
        }
        for i in 0..n_externals {
            nodes.push(BdgNode {
                id: format!("ext_{i}"),
                kind: NodeKind::ExternalLibrary,
                display_name: format!("ext_{i}"),
                exists_guard: Condition::True,
            });
        }
        for i in 0..n_sources {
            nodes.push(BdgNode {
                id: format!("dir{}/file_{i}.c", i % 2),
                kind: NodeKind::SourceFile,
                display_name: format!("dir{}/file_{i}.c", i % 2),
                exists_guard: Condition::True,
            });
        }
        let mut edges: Vec<BdgEdge> = Vec::new();
        let span = SourceSpan::new("CMakeLists.txt", 3, 1);
        for (d, s, guard) in compile_picks {
            let from = format!("target_{}", d % n_deliverables);
            let to = format!("dir{}/file_{}.c", (s % n_sources) % 2, s % n_sources);
            if !edges.iter().any(|e| e.from == from && e.to == to) {
                edges.push(BdgEdge { from, to, kind: EdgeKind::Compiles, guard, spans: vec![span.clone()] });
            }
        }
        for (a, b, guard) in link_picks {
            let from = format!("target_{}", a % n_deliverables);
            let to = if n_externals > 0 && b % 2 == 0 {
                format!("ext_{}", (b / 2) % n_externals)
            } else {
                format!("target_{}", b % n_deliverables)
            };
            if from != to && !edges.iter().any(|e| e.from == from && e.to == to) {
                edges.push(BdgEdge { from, to, kind: EdgeKind::Links, guard, spans: vec![span.clone()] });
            }
        }
        let mut options: Vec<ConfigOption> = (0..4)
            .map(|i| ConfigOption::boolean(format!("O{i}"), Some("OFF"), OptionOrigin::OptionCommand))
            .collect();
        options.push(ConfigOption::opaque("ENV{CC}", None, OptionOrigin::Environment));
        nodes.sort_by(|a, b| {
            let rank = |k: &NodeKind| match k {
                NodeKind::Deliverable(_) => 0u8,
                NodeKind::ExternalLibrary => 1,
                NodeKind::SourceFile => 2,
            };
            (rank(&a.kind), &a.id).cmp(&(rank(&b.kind), &b.id))
        });
        edges.sort_by(|a, b| (&a.from, &a.to, a.kind).cmp(&(&b.from, &b.to, b.kind)));
        let mut warning_summary = BTreeMap::new();
        warning_summary.insert("UNSUPPORTED_COMMAND".to_string(), 2u64);
        Bdg {
            nodes,
            edges,
            options,
            metadata: BdgMetadata {
                root: "/tmp/project".to_string(),
                analyzer_version: "0.1.0".to_string(),
                warning_summary,
            },
        }
    }
}
