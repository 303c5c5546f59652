//! Cross-validation of the symbolic analysis against concrete
//! per-configuration evaluation.
//!
//! For generated projects in the supported subset (boolean options only, no
//! opaque predicates), and for every total configuration, the impacted
//! deliverable set computed symbolically (guard evaluation over the graph)
//! must equal the set computed by evaluating the project concretely under
//! that configuration and running plain reachability over the resulting
//! trace. The reachability oracle below is deliberately independent of the
//! graph and query code paths.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use exposure_core::cond::ConfigurationAssignment;
use exposure_core::eval::{evaluate_project, TraceEvent};
use exposure_core::exposure::{impacted_deliverables, Impact};
use exposure_core::project::{load_project, ParsedProject};
use exposure_core::synth::generate_project;

fn write_project(dir: &Path, files: &[(String, String)]) {
    for (rel, text) in files {
        let path = dir.join(rel);
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(path, text).unwrap();
    }
}

/// Deliverables reaching `file` in a concrete (fully configured) trace:
/// adjacency is taken directly from the trace events, reachability is a
/// plain breadth-first search ignoring guards.
fn concrete_impacted(
    project: &ParsedProject,
    values: &BTreeMap<String, String>,
    file: &str,
) -> BTreeSet<String> {
    let overrides = ConfigurationAssignment::partial(values.clone());
    let outcome = evaluate_project(project, &overrides);

    let mut declared: BTreeSet<String> = BTreeSet::new();
    for event in &outcome.trace.events {
        if let TraceEvent::DeclareDeliverable { name, guard, .. } = event {
            assert!(guard.is_true(), "concrete mode must fold guards");
            declared.insert(name.clone());
        }
    }
    let mut successors: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for event in &outcome.trace.events {
        match event {
            TraceEvent::AttachSources {
                target, sources, ..
            } => {
                if declared.contains(target) {
                    successors
                        .entry(target.clone())
                        .or_default()
                        .extend(sources.iter().cloned());
                }
            }
            TraceEvent::LinkDependency { from, to, .. } => {
                if declared.contains(from) && declared.contains(to) {
                    successors
                        .entry(from.clone())
                        .or_default()
                        .insert(to.clone());
                }
            }
            _ => {}
        }
    }

    declared
        .iter()
        .filter(|deliverable| {
            let mut queue = vec![(*deliverable).clone()];
            let mut seen = BTreeSet::new();
            while let Some(node) = queue.pop() {
                if node == file {
                    return true;
                }
                if !seen.insert(node.clone()) {
                    continue;
                }
                if let Some(nexts) = successors.get(&node) {
                    queue.extend(nexts.iter().cloned());
                }
            }
            false
        })
        .cloned()
        .collect()
}

fn all_configurations(options: &[String]) -> Vec<BTreeMap<String, String>> {
    let mut out = Vec::new();
    for bits in 0..(1u64 << options.len()) {
        out.push(
            options
                .iter()
                .enumerate()
                .map(|(i, name)| {
                    (
                        name.clone(),
                        if bits >> i & 1 == 1 { "ON" } else { "OFF" }.to_string(),
                    )
                })
                .collect(),
        );
    }
    out
}

#[test]
fn symbolic_equals_concrete_on_generated_projects() {
    let mut checked_projects = 0;
    let mut checked_configurations = 0;
    for seed in 0..30u64 {
        let synth = generate_project(seed);
        let tmp = tempfile::TempDir::new().unwrap();
        write_project(tmp.path(), &synth.files);
        let project = load_project(tmp.path()).unwrap();

        let outcome = evaluate_project(&project, &ConfigurationAssignment::empty());
        let (bdg, _) = exposure_core::bdg::build_bdg(&outcome.trace, &outcome.env);

        // Query files: every source the generator referenced, capped for
        // suite runtime.
        let mut files: Vec<&String> = synth.sources.iter().collect();
        files.dedup();
        files.truncate(6);

        for values in all_configurations(&synth.options) {
            checked_configurations += 1;
            let assignment = ConfigurationAssignment::partial(values.clone());
            for file in &files {
                let change = exposure_core::exposure::ChangeSet::new(
                    "oracle",
                    [(*file).clone()],
                );
                let report = impacted_deliverables(&bdg, &change, &assignment);
                assert!(
                    report.ids_with(Impact::Unknown).is_empty(),
                    "seed {seed}: no opaque atoms, nothing may be unknown"
                );
                let symbolic: BTreeSet<String> = report
                    .ids_with(Impact::Yes)
                    .into_iter()
                    .map(str::to_string)
                    .collect();
                let concrete = concrete_impacted(&project, &values, file);
                assert_eq!(
                    symbolic, concrete,
                    "seed {seed}, file {file}, configuration {values:?}\n\
                     project:\n{}",
                    synth.files[0].1
                );
            }
        }
        checked_projects += 1;
    }
    assert!(checked_projects >= 25);
    assert!(checked_configurations >= checked_projects);
}
