//! Output rendering. JSON goes to standard output as a single document with
//! deterministic key order; human output mirrors the graph-and-conditions
//! shape of the reports.

use std::collections::BTreeMap;
use std::path::Path;

use serde_json::{json, Value};

use exposure_core::bdg::{Bdg, SCHEMA_VERSION};
use exposure_core::cond::ConfigurationAssignment;
use exposure_core::exposure::{
    propagation_conditions, ChangeSet, ExposureReport, Impact, PathObject, RankedPatch,
    ATOM_CAP,
};
use exposure_core::scoring::{ListScore, RankScore};

use crate::Format;

const VARIANT_SEMANTICS: &str = "satisfying-assignments-over-appearing-options";

fn emit(doc: Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(&doc).expect("report serialization cannot fail")
    );
}

fn impact_label(impact: Impact) -> &'static str {
    match impact {
        Impact::Yes => "yes",
        Impact::No => "no",
        Impact::Unknown => "unknown",
    }
}

pub fn print_analyze_summary(
    bdg: &Bdg,
    out: &Path,
    warnings: &BTreeMap<String, u64>,
    format: Format,
) {
    match format {
        Format::Json => emit(json!({
            "schema_version": SCHEMA_VERSION,
            "kind": "analyze_summary",
            "bdg": out.display().to_string(),
            "nodes": bdg.nodes.len(),
            "edges": bdg.edges.len(),
            "deliverables": bdg.deliverables().count(),
            "options": bdg.options.iter().map(|o| o.name.clone()).collect::<Vec<_>>(),
            "warnings": warnings,
        })),
        Format::Human => {
            println!("wrote {}", out.display());
            println!(
                "graph: {} nodes ({} deliverables), {} edges, {} options",
                bdg.nodes.len(),
                bdg.deliverables().count(),
                bdg.edges.len(),
                bdg.options.len()
            );
            if warnings.is_empty() {
                println!("no warnings");
            } else {
                println!("warnings:");
                for (code, count) in warnings {
                    println!("  {code}: {count}");
                }
            }
        }
    }
}

pub fn print_impact(report: &ExposureReport, format: Format) {
    match format {
        Format::Json => {
            let deliverables: Vec<Value> = report
                .deliverables
                .iter()
                .map(|d| {
                    json!({
                        "id": d.id,
                        "impacted": impact_label(d.impacted),
                        "guard": d.guard.to_string(),
                        "variant_count": d.variant_count.count,
                        "variant_count_exact": d.variant_count.exact,
                    })
                })
                .collect();
            emit(json!({
                "schema_version": SCHEMA_VERSION,
                "kind": "exposure_report",
                "changeset": report.changeset_id,
                "assignment": report.assignment.values,
                "assignment_total": report.assignment.total,
                "variant_semantics": VARIANT_SEMANTICS,
                "impacted": report.ids_with(Impact::Yes),
                "not_impacted": report.ids_with(Impact::No),
                "unknown": report.ids_with(Impact::Unknown),
                "deliverables": deliverables,
            }));
        }
        Format::Human => {
            println!("changeset: {}", report.changeset_id);
            let assignment: Vec<String> = report
                .assignment
                .values
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect();
            println!(
                "configuration: {}{}",
                if assignment.is_empty() {
                    "(defaults)".to_string()
                } else {
                    assignment.join(" ")
                },
                if report.assignment.total {
                    ""
                } else {
                    " (partial)"
                }
            );
            for impact in [Impact::Yes, Impact::Unknown, Impact::No] {
                let ids = report.ids_with(impact);
                if ids.is_empty() {
                    continue;
                }
                let heading = match impact {
                    Impact::Yes => "impacted",
                    Impact::Unknown => "unknown",
                    Impact::No => "not impacted",
                };
                println!("{heading}:");
                for id in ids {
                    let entry = report
                        .deliverables
                        .iter()
                        .find(|d| d.id == id)
                        .expect("id from report");
                    println!("  {id}  [{}]", entry.guard);
                }
            }
        }
    }
}

/// Per-deliverable propagation conditions, Fig-style: one line per
/// deliverable with the condition under which the change reaches it.
pub fn print_conditions(
    bdg: &Bdg,
    changes: &ChangeSet,
    format: Format,
) -> Result<(), String> {
    let mut rows = Vec::new();
    for node in bdg.deliverables() {
        let condition =
            propagation_conditions(bdg, changes, &node.id).map_err(|e| e.to_string())?;
        let count = exposure_core::cond::count_variants(&condition, &bdg.options, ATOM_CAP);
        rows.push((node.id.clone(), condition, count));
    }
    match format {
        Format::Json => {
            let deliverables: Vec<Value> = rows
                .iter()
                .map(|(id, condition, count)| {
                    json!({
                        "id": id,
                        "condition": condition.to_string(),
                        "reachable": !condition.is_false(),
                        "variant_count": count.count,
                        "variant_count_exact": count.exact,
                    })
                })
                .collect();
            emit(json!({
                "schema_version": SCHEMA_VERSION,
                "kind": "exposure_conditions",
                "changeset": changes.id,
                "changed_files": changes.changed_files,
                "variant_semantics": VARIANT_SEMANTICS,
                "deliverables": deliverables,
            }));
        }
        Format::Human => {
            println!("changeset: {}", changes.id);
            for (id, condition, count) in rows {
                let exact = if count.exact { "" } else { "≥" };
                println!("  {id}: {condition}  (variants: {exact}{})", count.count);
            }
        }
    }
    Ok(())
}

pub fn print_paths(changes: &ChangeSet, objects: &[PathObject], format: Format) {
    match format {
        Format::Json => {
            let objects: Vec<Value> = objects
                .iter()
                .map(|object| {
                    let entries: Vec<Value> = object
                        .entries
                        .iter()
                        .map(|entry| {
                            let paths: Vec<Value> = entry
                                .paths
                                .iter()
                                .map(|p| {
                                    json!({
                                        "nodes": p.nodes,
                                        "guard": p.guard.to_string(),
                                    })
                                })
                                .collect();
                            json!({
                                "deliverable": entry.deliverable,
                                "aggregate_guard": entry.aggregate_guard.to_string(),
                                "truncated": entry.truncated,
                                "paths": paths,
                            })
                        })
                        .collect();
                    json!({
                        "changed_file": object.changed_file,
                        "known": object.known,
                        "entries": entries,
                    })
                })
                .collect();
            emit(json!({
                "schema_version": SCHEMA_VERSION,
                "kind": "path_objects",
                "changeset": changes.id,
                "path_objects": objects,
            }));
        }
        Format::Human => {
            for object in objects {
                println!("{}", object.changed_file);
                if !object.known {
                    println!("  (not part of the build graph)");
                    continue;
                }
                if object.entries.is_empty() {
                    println!("  (no deliverable depends on this file)");
                    continue;
                }
                for entry in &object.entries {
                    println!("  {}  [{}]", entry.deliverable, entry.aggregate_guard);
                    for path in &entry.paths {
                        println!("    {}  [{}]", path.nodes.join(" -> "), path.guard);
                    }
                    if entry.truncated {
                        println!("    ... (path listing truncated)");
                    }
                }
            }
        }
    }
}

pub fn print_ranking(ranking: &[RankedPatch], by_variants: bool, format: Format) {
    match format {
        Format::Json => {
            let rows: Vec<Value> = ranking
                .iter()
                .map(|r| json!({"id": r.id, "score": r.score, "exact": r.exact}))
                .collect();
            emit(json!({
                "schema_version": SCHEMA_VERSION,
                "kind": "patch_ranking",
                "by": if by_variants { "variants" } else { "deliverables" },
                "variant_semantics": VARIANT_SEMANTICS,
                "ranking": rows,
            }));
        }
        Format::Human => {
            let unit = if by_variants {
                "impacted variants"
            } else {
                "impacted deliverables"
            };
            for (position, r) in ranking.iter().enumerate() {
                let exact = if r.exact { "" } else { "≥" };
                println!("{}. {}  ({unit}: {exact}{})", position + 1, r.id, r.score);
            }
        }
    }
}

pub enum FilterDesc {
    Deliverable(String),
    Variant(ConfigurationAssignment),
}

pub fn print_filter(matches: &[String], target: &FilterDesc, format: Format) {
    match format {
        Format::Json => {
            let target = match target {
                FilterDesc::Deliverable(id) => json!({"deliverable": id}),
                FilterDesc::Variant(assignment) => json!({
                    "assignment": assignment.values,
                    "assignment_total": assignment.total,
                }),
            };
            emit(json!({
                "schema_version": SCHEMA_VERSION,
                "kind": "patch_filter",
                "target": target,
                "matches": matches,
            }));
        }
        Format::Human => {
            match target {
                FilterDesc::Deliverable(id) => println!("patches affecting {id}:"),
                FilterDesc::Variant(assignment) => {
                    let pairs: Vec<String> = assignment
                        .values
                        .iter()
                        .map(|(k, v)| format!("{k}={v}"))
                        .collect();
                    println!("patches affecting the variant {}:", pairs.join(" "));
                }
            }
            for id in matches {
                println!("  {id}");
            }
            if matches.is_empty() {
                println!("  (none)");
            }
        }
    }
}

pub fn print_list_score(score: &ListScore, format: Format) {
    match format {
        Format::Json => emit(json!({
            "schema_version": SCHEMA_VERSION,
            "kind": "list_score",
            "precision": score.precision,
            "recall": score.recall,
            "f_measure": score.f_measure,
            "estimated_size": score.estimated_size,
            "actual_size": score.actual_size,
            "intersection_size": score.intersection_size,
            "empty_estimate": score.empty_estimate,
        })),
        Format::Human => {
            println!("precision: {:.6}", score.precision);
            println!("recall:    {:.6}", score.recall);
            println!("f-measure: {:.6}", score.f_measure);
            if score.empty_estimate {
                println!("note: estimate was empty; precision reported as 0");
            }
        }
    }
}

pub fn print_rank_score(score: &RankScore, format: Format) {
    match format {
        Format::Json => emit(json!({
            "schema_version": SCHEMA_VERSION,
            "kind": "rank_score",
            "tau_distance": score.tau_distance,
            "discordant_pairs": score.discordant_pairs,
            "total_pairs": score.total_pairs,
        })),
        Format::Human => {
            println!(
                "kendall tau distance: {:.6} ({} of {} pairs discordant)",
                score.tau_distance, score.discordant_pairs, score.total_pairs
            );
        }
    }
}
