use super::*;
use crate::cond::{ConfigurationAssignment, Tri};
use crate::eval::evaluate_project;
use crate::project::ParsedProject;

fn graph_of(text: &str) -> (Bdg, Vec<Warning>) {
    let project = ParsedProject::from_sources("/proj", [("CMakeLists.txt", text)]).unwrap();
    let out = evaluate_project(&project, &ConfigurationAssignment::empty());
    build_bdg(&out.trace, &out.env)
}

const CURL_FIXTURE: &str = "\
option(FEATURE_CURL \"enable curl download support\" OFF)
set(CLIENT_SRC client_main.c client_net.c)
add_executable(etl ${CLIENT_SRC})
if(FEATURE_CURL)
  target_sources(etl PRIVATE dl_main_curl.c)
endif()
";

fn edge<'a>(bdg: &'a Bdg, from: &str, to: &str) -> &'a BdgEdge {
    bdg.edges
        .iter()
        .find(|e| e.from == from && e.to == to)
        .unwrap_or_else(|| panic!("no edge {from} -> {to}"))
}

#[test]
fn conditional_source_edge_carries_option_guard() {
    let (bdg, warnings) = graph_of(CURL_FIXTURE);
    assert!(warnings.is_empty(), "{warnings:?}");
    let etl = bdg.node("etl").expect("etl node");
    assert!(etl.kind.is_deliverable());
    assert!(etl.exists_guard.is_true());

    let curl_edge = edge(&bdg, "etl", "dl_main_curl.c");
    assert_eq!(curl_edge.kind, EdgeKind::Compiles);
    assert_eq!(curl_edge.guard, Condition::truthy("FEATURE_CURL"));

    for client in ["client_main.c", "client_net.c"] {
        assert!(edge(&bdg, "etl", client).guard.is_true());
    }
    assert_eq!(bdg.options.len(), 1);
    assert_eq!(bdg.options[0].name, "FEATURE_CURL");
}

#[test]
fn empty_trace_builds_empty_graph() {
    let trace = DeclarationTrace::default();
    let env = SymbolicEnv::new(20);
    let (bdg, warnings) = build_bdg(&trace, &env);
    assert!(bdg.nodes.is_empty());
    assert!(bdg.edges.is_empty());
    assert!(warnings.is_empty());
}

#[test]
fn same_source_under_complementary_guards_merges_to_true() {
    let text = "\
option(F \"\" OFF)
add_executable(x base.c)
if(F)
  target_sources(x PRIVATE shared.c)
else()
  target_sources(x PRIVATE shared.c)
endif()
";
    let (bdg, _) = graph_of(text);
    let merged = edge(&bdg, "x", "shared.c");
    // Disjunction merge: F || !F must cover all four option assignments.
    assert!(merged.guard.is_true(), "guard: {}", merged.guard);
    for value in ["ON", "OFF"] {
        let assignment =
            ConfigurationAssignment::partial([("F".to_string(), value.to_string())]);
        assert_eq!(merged.guard.evaluate(&assignment), Tri::True);
    }
}

#[test]
fn dangling_attach_warns_and_skips() {
    let (bdg, warnings) = graph_of("target_sources(ghost PRIVATE a.c)\n");
    assert!(bdg.nodes.is_empty());
    assert!(warnings
        .iter()
        .any(|w| w.code == WarningCode::DanglingReference));
}

#[test]
fn alias_links_resolve_to_real_target() {
    let text = "\
add_library(core STATIC core.c)
add_library(project::core ALIAS core)
add_executable(app main.c)
target_link_libraries(app project::core)
";
    let (bdg, _) = graph_of(text);
    let link = edge(&bdg, "app", "core");
    assert_eq!(link.kind, EdgeKind::Links);
    assert!(bdg.node("project::core").is_none());
}

#[test]
fn unknown_link_names_become_external_nodes() {
    let (bdg, _) = graph_of("add_executable(app main.c)\ntarget_link_libraries(app m pthread)\n");
    for external in ["m", "pthread"] {
        let node = bdg.node(external).expect("external node");
        assert_eq!(node.kind, NodeKind::ExternalLibrary);
        assert!(node.exists_guard.is_true());
    }
}

#[test]
fn link_cycle_warns() {
    let text = "\
add_library(a STATIC a.c)
add_library(b STATIC b.c)
target_link_libraries(a b)
target_link_libraries(b a)
";
    let (_, warnings) = graph_of(text);
    assert!(warnings.iter().any(|w| w.code == WarningCode::LinkCycle));
}

#[test]
fn node_order_and_edge_order_deterministic() {
    let (one, _) = graph_of(CURL_FIXTURE);
    let (two, _) = graph_of(CURL_FIXTURE);
    assert_eq!(one, two);
    assert_eq!(to_json_bytes(&one), to_json_bytes(&two));
    assert_eq!(export_dot(&one), export_dot(&two));
}

#[test]
fn save_load_round_trip() {
    let (mut bdg, _) = graph_of(CURL_FIXTURE);
    bdg.metadata.root = "/proj".to_string();
    bdg.metadata.warning_summary.insert("UNSUPPORTED_COMMAND".into(), 3);
    let bytes = to_json_bytes(&bdg);
    let loaded = load_bdg_bytes(&bytes).unwrap();
    assert_eq!(bdg, loaded);
}

#[test]
fn round_trip_preserves_opaque_guards() {
    let text = "\
add_executable(x base.c)
if(LIBFOO MATCHES \"^2\\\\.\")
  target_sources(x PRIVATE foo2.c)
endif()
";
    let (bdg, _) = graph_of(text);
    let bytes = to_json_bytes(&bdg);
    let loaded = load_bdg_bytes(&bytes).unwrap();
    assert_eq!(bdg, loaded);
}

#[test]
fn truncated_payload_is_corrupt() {
    let (bdg, _) = graph_of(CURL_FIXTURE);
    let bytes = to_json_bytes(&bdg);
    let err = load_bdg_bytes(&bytes[..bytes.len() / 2]).unwrap_err();
    assert!(matches!(err, BdgIoError::CorruptPayload(_)), "{err}");
}

#[test]
fn future_schema_version_rejected() {
    let (bdg, _) = graph_of(CURL_FIXTURE);
    let text = String::from_utf8(to_json_bytes(&bdg)).unwrap();
    let bumped = text.replace("\"schema_version\": 1", "\"schema_version\": 99");
    let err = load_bdg_bytes(bumped.as_bytes()).unwrap_err();
    assert!(matches!(
        err,
        BdgIoError::SchemaVersionMismatch { found: 99 }
    ));
}

#[test]
fn dot_labels_conditions_and_leaves_true_unlabeled() {
    let (bdg, _) = graph_of(CURL_FIXTURE);
    let dot = export_dot(&bdg);
    assert!(dot.contains("\"etl\" -> \"dl_main_curl.c\" [label=\"FEATURE_CURL\"]"));
    assert!(dot.contains("\"etl\" -> \"client_main.c\";"));
    assert!(dot.starts_with("digraph bdg {"));
}

#[test]
fn dot_of_empty_graph() {
    let trace = DeclarationTrace::default();
    let env = SymbolicEnv::new(20);
    let (bdg, _) = build_bdg(&trace, &env);
    assert_eq!(export_dot(&bdg), "digraph bdg {\n}\n");
}

#[test]
fn dot_two_nodes_one_edge() {
    let (bdg, _) = graph_of("add_executable(x a.c)\n");
    let dot = export_dot(&bdg);
    let edge_lines = dot.lines().filter(|l| l.contains("->")).count();
    assert_eq!(edge_lines, 1);
}

#[test]
fn interface_library_participates() {
    let text = "\
add_library(headers INTERFACE)
add_executable(app main.c)
target_link_libraries(app headers)
";
    let (bdg, _) = graph_of(text);
    let node = bdg.node("headers").unwrap();
    assert_eq!(
        node.kind,
        NodeKind::Deliverable(crate::eval::DeliverableKind::Library(
            crate::eval::LibraryKind::Interface
        ))
    );
    assert_eq!(edge(&bdg, "app", "headers").kind, EdgeKind::Links);
}
