//! Exposure queries over a build dependency graph: which deliverables a
//! change reaches, under which configurations, and how patches compare.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bdg::{Bdg, EdgeKind, NodeKind};
use crate::cond::{
    count_variants, satisfiable, to_dnf, Condition, ConfigurationAssignment, Tri, VariantCount,
};
use crate::paths;

/// Default enumeration bound for variant counting in reports.
pub const ATOM_CAP: usize = 20;
/// Default retained paths per (deliverable, changed file) pair.
pub const PATH_CAP: usize = 100;
/// Clause bound when canonicalizing propagation conditions.
pub const DNF_CLAUSE_CAP: usize = 64;

/// A patch reduced to its set of changed files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangeSet {
    pub id: String,
    /// Normalized root-relative paths, deduplicated and sorted.
    pub changed_files: Vec<String>,
}

impl ChangeSet {
    pub fn new(id: impl Into<String>, files: impl IntoIterator<Item = String>) -> ChangeSet {
        let id = id.into();
        debug_assert!(!id.is_empty(), "changeset id must be non-empty");
        let files: BTreeSet<String> = files
            .into_iter()
            .map(|f| paths::normalize(&f))
            .filter(|f| !f.is_empty())
            .collect();
        ChangeSet {
            id,
            changed_files: files.into_iter().collect(),
        }
    }
}

/// One acyclic deliverable → … → changed-file path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyPath {
    /// Node ids, deliverable first, changed file last.
    pub nodes: Vec<String>,
    /// Conjunction of the edge guards along the path and the deliverable's
    /// existence guard.
    pub guard: Condition,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathEntry {
    pub deliverable: String,
    pub paths: Vec<DependencyPath>,
    /// Disjunction over all paths (not just the retained listing).
    pub aggregate_guard: Condition,
    /// True when the listing was cut at the path cap.
    pub truncated: bool,
}

/// All conditional dependency paths from deliverables to one changed file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathObject {
    pub changed_file: String,
    /// Present in the graph as a source file?
    pub known: bool,
    pub entries: Vec<PathEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Impact {
    Yes,
    No,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeliverableExposure {
    pub id: String,
    pub impacted: Impact,
    pub guard: Condition,
    pub variant_count: VariantCount,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExposureReport {
    pub changeset_id: String,
    pub assignment: ConfigurationAssignment,
    pub deliverables: Vec<DeliverableExposure>,
}

impl ExposureReport {
    pub fn ids_with(&self, impact: Impact) -> Vec<&str> {
        self.deliverables
            .iter()
            .filter(|d| d.impacted == impact)
            .map(|d| d.id.as_str())
            .collect()
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ExposureError {
    #[error("unknown deliverable {0}")]
    UnknownDeliverable(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RankKey {
    /// |impacted deliverables| under a configuration.
    DeliverableCount(ConfigurationAssignment),
    /// Satisfying-assignment count of the patch's propagation condition.
    VariantCount,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedPatch {
    pub id: String,
    pub score: u64,
    pub exact: bool,
}

/// Per-deliverable guards under which a change to one file propagates to
/// the deliverable.
///
/// R(d) = exists(d) ∧ (compile(d → file) ∨ ⋁ over links d → d' of
/// (link guard ∧ R(d'))). Existence guards of every deliverable along the
/// chain participate: a change cannot propagate through a library that does
/// not exist in the selected variant. The recursion equals the disjunction
/// over all acyclic paths, so aggregate guards stay exact even when path
/// listings are truncated.
fn reach_guards(bdg: &Bdg, file_id: &str) -> BTreeMap<String, Condition> {
    let exists: BTreeMap<&str, &Condition> = bdg
        .nodes
        .iter()
        .map(|n| (n.id.as_str(), &n.exists_guard))
        .collect();
    let mut compile_edges: BTreeMap<&str, Condition> = BTreeMap::new();
    let mut link_edges: BTreeMap<&str, Vec<(&str, &Condition)>> = BTreeMap::new();
    for edge in &bdg.edges {
        match edge.kind {
            EdgeKind::Compiles if edge.to == file_id => {
                let entry = compile_edges
                    .entry(edge.from.as_str())
                    .or_insert(Condition::False);
                *entry = std::mem::replace(entry, Condition::False).or(edge.guard.clone());
            }
            EdgeKind::Links => link_edges
                .entry(edge.from.as_str())
                .or_default()
                .push((edge.to.as_str(), &edge.guard)),
            _ => {}
        }
    }

    struct Dfs<'a> {
        exists: &'a BTreeMap<&'a str, &'a Condition>,
        compile_edges: &'a BTreeMap<&'a str, Condition>,
        link_edges: &'a BTreeMap<&'a str, Vec<(&'a str, &'a Condition)>>,
        memo: BTreeMap<String, Condition>,
        stack: Vec<String>,
    }
    impl Dfs<'_> {
        /// Returns the guard and whether a cycle cut made it order-dependent
        /// (in which case it is not memoized).
        fn go(&mut self, node: &str) -> (Condition, bool) {
            if let Some(hit) = self.memo.get(node) {
                return (hit.clone(), false);
            }
            if self.stack.iter().any(|n| n == node) {
                // A simple path cannot revisit; contributes nothing.
                return (Condition::False, true);
            }
            self.stack.push(node.to_string());
            let mut guard = self
                .compile_edges
                .get(node)
                .cloned()
                .unwrap_or(Condition::False);
            let mut cut = false;
            if let Some(children) = self.link_edges.get(node) {
                for (child, link_guard) in children {
                    let (child_guard, child_cut) = self.go(child);
                    cut |= child_cut;
                    guard = guard.or((*link_guard).clone().and(child_guard));
                }
            }
            let node_exists = self
                .exists
                .get(node)
                .map(|c| (*c).clone())
                .unwrap_or(Condition::True);
            guard = node_exists.and(guard);
            self.stack.pop();
            if !cut {
                self.memo.insert(node.to_string(), guard.clone());
            }
            (guard, cut)
        }
    }

    let mut dfs = Dfs {
        exists: &exists,
        compile_edges: &compile_edges,
        link_edges: &link_edges,
        memo: BTreeMap::new(),
        stack: Vec::new(),
    };
    let mut out = BTreeMap::new();
    for node in bdg.deliverables() {
        let (guard, _) = dfs.go(&node.id);
        if !guard.is_false() {
            out.insert(node.id.clone(), guard);
        }
    }
    out
}

/// Enumerate acyclic paths from `deliverable` to `file_id` (shortest first,
/// deterministic), up to `path_cap` retained. Returns (paths, truncated).
fn enumerate_paths(
    bdg: &Bdg,
    deliverable: &str,
    file_id: &str,
    exists_guard: &Condition,
    path_cap: usize,
) -> (Vec<DependencyPath>, bool) {
    let explored_cap = path_cap.saturating_mul(64).max(4096);
    let exists: BTreeMap<&str, &Condition> = bdg
        .nodes
        .iter()
        .map(|n| (n.id.as_str(), &n.exists_guard))
        .collect();
    let mut link_edges: BTreeMap<&str, Vec<(&str, &Condition)>> = BTreeMap::new();
    let mut compile_edges: BTreeMap<&str, Vec<&Condition>> = BTreeMap::new();
    for edge in &bdg.edges {
        match edge.kind {
            EdgeKind::Links => link_edges
                .entry(edge.from.as_str())
                .or_default()
                .push((edge.to.as_str(), &edge.guard)),
            EdgeKind::Compiles if edge.to == file_id => compile_edges
                .entry(edge.from.as_str())
                .or_default()
                .push(&edge.guard),
            _ => {}
        }
    }

    let mut found: Vec<DependencyPath> = Vec::new();
    let mut explored = 0usize;
    let mut capped = false;

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        node: &str,
        trail: &mut Vec<String>,
        guard: Condition,
        exists: &BTreeMap<&str, &Condition>,
        link_edges: &BTreeMap<&str, Vec<(&str, &Condition)>>,
        compile_edges: &BTreeMap<&str, Vec<&Condition>>,
        file_id: &str,
        found: &mut Vec<DependencyPath>,
        explored: &mut usize,
        explored_cap: usize,
        capped: &mut bool,
    ) {
        if *explored >= explored_cap {
            *capped = true;
            return;
        }
        if let Some(guards) = compile_edges.get(node) {
            for edge_guard in guards {
                *explored += 1;
                let mut nodes = trail.clone();
                nodes.push(file_id.to_string());
                let full = guard.clone().and((*edge_guard).clone());
                if !full.is_false() {
                    found.push(DependencyPath { nodes, guard: full });
                }
            }
        }
        if let Some(children) = link_edges.get(node) {
            for (child, link_guard) in children {
                if trail.iter().any(|n| n == child) {
                    continue;
                }
                let child_exists = exists
                    .get(child)
                    .map(|c| (*c).clone())
                    .unwrap_or(Condition::True);
                let next_guard = guard.clone().and((*link_guard).clone()).and(child_exists);
                if next_guard.is_false() {
                    continue;
                }
                trail.push(child.to_string());
                dfs(
                    child,
                    trail,
                    next_guard,
                    exists,
                    link_edges,
                    compile_edges,
                    file_id,
                    found,
                    explored,
                    explored_cap,
                    capped,
                );
                trail.pop();
            }
        }
    }

    let mut trail = vec![deliverable.to_string()];
    dfs(
        deliverable,
        &mut trail,
        exists_guard.clone(),
        &exists,
        &link_edges,
        &compile_edges,
        file_id,
        &mut found,
        &mut explored,
        explored_cap,
        &mut capped,
    );

    found.sort_by(|a, b| (a.nodes.len(), &a.nodes).cmp(&(b.nodes.len(), &b.nodes)));
    let truncated = capped || found.len() > path_cap;
    found.truncate(path_cap);
    (found, truncated)
}

/// All conditional dependency paths from deliverables to each changed file.
pub fn paths_for_change(bdg: &Bdg, changes: &ChangeSet, path_cap: usize) -> Vec<PathObject> {
    let path_cap = path_cap.max(1);
    changes
        .changed_files
        .iter()
        .map(|file| {
            let known = bdg
                .node(file)
                .map(|n| n.kind == NodeKind::SourceFile)
                .unwrap_or(false);
            if !known {
                return PathObject {
                    changed_file: file.clone(),
                    known: false,
                    entries: Vec::new(),
                };
            }
            let reach = reach_guards(bdg, file);
            let mut entries = Vec::new();
            for node in bdg.deliverables() {
                let Some(aggregate) = reach.get(&node.id).cloned() else {
                    continue;
                };
                if satisfiable(&aggregate, &bdg.options, ATOM_CAP) == Tri::False {
                    continue;
                }
                let (paths, truncated) =
                    enumerate_paths(bdg, &node.id, file, &node.exists_guard, path_cap);
                entries.push(PathEntry {
                    deliverable: node.id.clone(),
                    paths,
                    aggregate_guard: simplify(aggregate),
                    truncated,
                });
            }
            entries.sort_by(|a, b| a.deliverable.cmp(&b.deliverable));
            PathObject {
                changed_file: file.clone(),
                known: true,
                entries,
            }
        })
        .collect()
}

/// Canonicalize via DNF when it stays under the clause cap.
fn simplify(cond: Condition) -> Condition {
    match to_dnf(&cond, DNF_CLAUSE_CAP) {
        Some(dnf) => dnf.to_condition(),
        None => cond,
    }
}

/// The condition under which a change to any of the files propagates to one
/// deliverable; FALSE when unreachable.
pub fn propagation_conditions(
    bdg: &Bdg,
    changes: &ChangeSet,
    deliverable: &str,
) -> Result<Condition, ExposureError> {
    bdg.node(deliverable)
        .filter(|n| n.kind.is_deliverable())
        .ok_or_else(|| ExposureError::UnknownDeliverable(deliverable.to_string()))?;
    let mut out = Condition::False;
    for file in &changes.changed_files {
        if let Some(guard) = reach_guards(bdg, file).get(deliverable) {
            out = out.or(guard.clone());
        }
    }
    Ok(simplify(out))
}

/// Impact verdict for every deliverable under a configuration assignment.
pub fn impacted_deliverables(
    bdg: &Bdg,
    changes: &ChangeSet,
    assignment: &ConfigurationAssignment,
) -> ExposureReport {
    let mut guards: BTreeMap<&str, Condition> = bdg
        .deliverables()
        .map(|n| (n.id.as_str(), Condition::False))
        .collect();
    for file in &changes.changed_files {
        for (deliverable, guard) in reach_guards(bdg, file) {
            if let Some(entry) = guards.get_mut(deliverable.as_str()) {
                *entry = std::mem::replace(entry, Condition::False).or(guard);
            }
        }
    }
    let deliverables = bdg
        .deliverables()
        .map(|node| {
            let guard = simplify(guards.remove(node.id.as_str()).unwrap_or(Condition::False));
            let impacted = match guard.evaluate(assignment) {
                Tri::True => Impact::Yes,
                Tri::False => Impact::No,
                Tri::Unknown => Impact::Unknown,
            };
            let variant_count = count_variants(&guard, &bdg.options, ATOM_CAP);
            DeliverableExposure {
                id: node.id.clone(),
                impacted,
                guard,
                variant_count,
            }
        })
        .collect();
    ExposureReport {
        changeset_id: changes.id.clone(),
        assignment: assignment.clone(),
        deliverables,
    }
}

/// Rank patches descending by score; ties broken by changeset id ascending.
pub fn rank_patches(bdg: &Bdg, patches: &[ChangeSet], key: &RankKey) -> Vec<RankedPatch> {
    let mut ranked: Vec<RankedPatch> = patches
        .iter()
        .map(|patch| match key {
            RankKey::DeliverableCount(assignment) => {
                let report = impacted_deliverables(bdg, patch, assignment);
                RankedPatch {
                    id: patch.id.clone(),
                    score: report.ids_with(Impact::Yes).len() as u64,
                    exact: true,
                }
            }
            RankKey::VariantCount => {
                let mut combined = Condition::False;
                for file in &patch.changed_files {
                    for (_, guard) in reach_guards(bdg, file) {
                        combined = combined.or(guard);
                    }
                }
                let count = count_variants(&combined, &bdg.options, ATOM_CAP);
                RankedPatch {
                    id: patch.id.clone(),
                    score: count.count,
                    exact: count.exact,
                }
            }
        })
        .collect();
    ranked.sort_by(|a, b| b.score.cmp(&a.score).then_with(|| a.id.cmp(&b.id)));
    ranked
}

/// Which patches can affect a deliverable or a concrete variant. Preserves
/// input order.
pub enum FilterTarget<'a> {
    Deliverable(&'a str),
    Variant(&'a ConfigurationAssignment),
}

pub fn filter_patches(
    bdg: &Bdg,
    patches: &[ChangeSet],
    target: FilterTarget<'_>,
) -> Result<Vec<String>, ExposureError> {
    match target {
        FilterTarget::Deliverable(deliverable) => {
            bdg.node(deliverable)
                .filter(|n| n.kind.is_deliverable())
                .ok_or_else(|| ExposureError::UnknownDeliverable(deliverable.to_string()))?;
            let mut out = Vec::new();
            for patch in patches {
                let cond = propagation_conditions(bdg, patch, deliverable)?;
                if satisfiable(&cond, &bdg.options, ATOM_CAP) != Tri::False {
                    out.push(patch.id.clone());
                }
            }
            Ok(out)
        }
        FilterTarget::Variant(assignment) => {
            let mut out = Vec::new();
            for patch in patches {
                let report = impacted_deliverables(bdg, patch, assignment);
                if !report.ids_with(Impact::Yes).is_empty() {
                    out.push(patch.id.clone());
                }
            }
            Ok(out)
        }
    }
}
