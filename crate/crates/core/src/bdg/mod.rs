//! The Build Dependency Graph: deliverables, source files, and external
//! libraries, with condition-labeled edges.

mod dot;
mod io;

pub use dot::export_dot;
pub use io::{load_bdg, load_bdg_bytes, save_bdg, to_json_bytes, BdgIoError, SCHEMA_VERSION};

use std::collections::{BTreeMap, BTreeSet};

use crate::cond::{satisfiable, Condition, ConfigOption, Tri};
use crate::eval::{DeclarationTrace, DeliverableKind, SymbolicEnv, TraceEvent};
use crate::span::SourceSpan;
use crate::warn::{Warning, WarningCode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum NodeKind {
    Deliverable(DeliverableKind),
    ExternalLibrary,
    SourceFile,
}

impl NodeKind {
    pub fn label(&self) -> &'static str {
        match self {
            NodeKind::Deliverable(k) => k.label(),
            NodeKind::ExternalLibrary => "external_library",
            NodeKind::SourceFile => "source_file",
        }
    }

    pub fn from_label(label: &str) -> Option<NodeKind> {
        use crate::eval::LibraryKind::*;
        Some(match label {
            "executable" => NodeKind::Deliverable(DeliverableKind::Executable),
            "static_library" => NodeKind::Deliverable(DeliverableKind::Library(Static)),
            "shared_library" => NodeKind::Deliverable(DeliverableKind::Library(Shared)),
            "module_library" => NodeKind::Deliverable(DeliverableKind::Library(Module)),
            "interface_library" => NodeKind::Deliverable(DeliverableKind::Library(Interface)),
            "external_library" => NodeKind::ExternalLibrary,
            "source_file" => NodeKind::SourceFile,
            _ => return None,
        })
    }

    pub fn is_deliverable(&self) -> bool {
        matches!(self, NodeKind::Deliverable(_))
    }

    fn rank(&self) -> u8 {
        match self {
            NodeKind::Deliverable(_) => 0,
            NodeKind::ExternalLibrary => 1,
            NodeKind::SourceFile => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BdgNode {
    pub id: String,
    pub kind: NodeKind,
    pub display_name: String,
    pub exists_guard: Condition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EdgeKind {
    /// Deliverable → source file.
    Compiles,
    /// Deliverable → deliverable or external library.
    Links,
}

impl EdgeKind {
    pub fn label(&self) -> &'static str {
        match self {
            EdgeKind::Compiles => "compiles",
            EdgeKind::Links => "links",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BdgEdge {
    pub from: String,
    pub to: String,
    pub kind: EdgeKind,
    pub guard: Condition,
    /// Declaring command locations.
    pub spans: Vec<SourceSpan>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BdgMetadata {
    pub root: String,
    pub analyzer_version: String,
    pub warning_summary: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bdg {
    pub nodes: Vec<BdgNode>,
    pub edges: Vec<BdgEdge>,
    pub options: Vec<ConfigOption>,
    pub metadata: BdgMetadata,
}

impl Bdg {
    pub fn node(&self, id: &str) -> Option<&BdgNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn deliverables(&self) -> impl Iterator<Item = &BdgNode> {
        self.nodes.iter().filter(|n| n.kind.is_deliverable())
    }

    pub fn source_files(&self) -> impl Iterator<Item = &BdgNode> {
        self.nodes
            .iter()
            .filter(|n| n.kind == NodeKind::SourceFile)
    }

    /// Every edge endpoint must exist; checked after build and load.
    pub fn check_integrity(&self) -> Result<(), String> {
        let ids: BTreeSet<&str> = self.nodes.iter().map(|n| n.id.as_str()).collect();
        if ids.len() != self.nodes.len() {
            return Err("duplicate node ids".to_string());
        }
        for edge in &self.edges {
            if !ids.contains(edge.from.as_str()) {
                return Err(format!("edge from unknown node {}", edge.from));
            }
            if !ids.contains(edge.to.as_str()) {
                return Err(format!("edge to unknown node {}", edge.to));
            }
        }
        Ok(())
    }
}

/// Materialize the graph from a declaration trace.
pub fn build_bdg(trace: &DeclarationTrace, env: &SymbolicEnv) -> (Bdg, Vec<Warning>) {
    let mut warnings = Vec::new();
    let options = env.options.clone();
    let atom_cap = env.atom_cap;

    // Alias → real target, resolved through chains.
    let mut aliases: BTreeMap<String, String> = BTreeMap::new();
    for event in &trace.events {
        if let TraceEvent::DeclareAlias { alias, target, .. } = event {
            aliases.insert(alias.clone(), target.clone());
        }
    }
    let resolve = |name: &str| -> String {
        let mut current = name.to_string();
        for _ in 0..16 {
            match aliases.get(&current) {
                Some(next) => current = next.clone(),
                None => break,
            }
        }
        current
    };

    // Deliverable nodes, guards merged by disjunction.
    let mut deliverables: BTreeMap<String, (DeliverableKind, Condition)> = BTreeMap::new();
    let mut declaration_order: Vec<String> = Vec::new();
    for event in &trace.events {
        if let TraceEvent::DeclareDeliverable {
            name, kind, guard, ..
        } = event
        {
            match deliverables.get_mut(name) {
                Some((existing_kind, existing_guard)) => {
                    if existing_kind != kind {
                        warnings.push(Warning::new(
                            WarningCode::DuplicateTarget,
                            format!(
                                "target {name} re-declared as {} (was {})",
                                kind.label(),
                                existing_kind.label()
                            ),
                        ));
                    }
                    *existing_guard =
                        std::mem::replace(existing_guard, Condition::False).or(guard.clone());
                }
                None => {
                    deliverables.insert(name.clone(), (*kind, guard.clone()));
                    declaration_order.push(name.clone());
                }
            }
        }
    }

    let mut sources: BTreeSet<String> = BTreeSet::new();
    let mut externals: BTreeSet<String> = BTreeSet::new();
    let mut edges: BTreeMap<(String, String, EdgeKind), (Condition, Vec<SourceSpan>)> =
        BTreeMap::new();
    let mut merge_edge = |from: String, to: String, kind: EdgeKind, guard: &Condition, span: &SourceSpan| {
        let entry = edges
            .entry((from, to, kind))
            .or_insert_with(|| (Condition::False, Vec::new()));
        entry.0 = std::mem::replace(&mut entry.0, Condition::False).or(guard.clone());
        if !entry.1.contains(span) {
            entry.1.push(span.clone());
        }
    };

    for event in &trace.events {
        match event {
            TraceEvent::AttachSources {
                target,
                sources: paths,
                guard,
                span,
            } => {
                let target = resolve(target);
                if !deliverables.contains_key(&target) {
                    warnings.push(Warning::at(
                        WarningCode::DanglingReference,
                        format!("sources attached to undeclared target {target}"),
                        span.clone(),
                    ));
                    continue;
                }
                for path in paths {
                    sources.insert(path.clone());
                    merge_edge(target.clone(), path.clone(), EdgeKind::Compiles, guard, span);
                }
            }
            TraceEvent::LinkDependency {
                from,
                to,
                guard,
                span,
            } => {
                let from = resolve(from);
                if !deliverables.contains_key(&from) {
                    warnings.push(Warning::at(
                        WarningCode::DanglingReference,
                        format!("link dependency declared for undeclared target {from}"),
                        span.clone(),
                    ));
                    continue;
                }
                let to = resolve(to);
                if !deliverables.contains_key(&to) {
                    externals.insert(to.clone());
                }
                merge_edge(from, to, EdgeKind::Links, guard, span);
            }
            _ => {}
        }
    }

    let mut nodes = Vec::new();
    for name in &declaration_order {
        let (kind, guard) = &deliverables[name];
        nodes.push(BdgNode {
            id: name.clone(),
            kind: NodeKind::Deliverable(*kind),
            display_name: name.clone(),
            exists_guard: guard.clone(),
        });
    }
    for name in &externals {
        nodes.push(BdgNode {
            id: name.clone(),
            kind: NodeKind::ExternalLibrary,
            display_name: name.clone(),
            // Impact never propagates into prebuilt externals.
            exists_guard: Condition::True,
        });
    }
    for path in &sources {
        let id = if deliverables.contains_key(path) || externals.contains(path) {
            warnings.push(Warning::new(
                WarningCode::DuplicateTarget,
                format!("source path {path} collides with a target name; suffixed"),
            ));
            format!("{path} (file)")
        } else {
            path.clone()
        };
        nodes.push(BdgNode {
            id,
            kind: NodeKind::SourceFile,
            display_name: path.clone(),
            exists_guard: Condition::True,
        });
    }
    nodes.sort_by(|a, b| (a.kind.rank(), &a.id).cmp(&(b.kind.rank(), &b.id)));

    let mut edge_list: Vec<BdgEdge> = edges
        .into_iter()
        .map(|((from, to, kind), (guard, spans))| {
            let to = if kind == EdgeKind::Compiles
                && (deliverables.contains_key(&to) || externals.contains(&to))
            {
                format!("{to} (file)")
            } else {
                to
            };
            BdgEdge {
                from,
                to,
                kind,
                guard,
                spans,
            }
        })
        .collect();
    edge_list.sort_by(|a, b| (&a.from, &a.to, a.kind).cmp(&(&b.from, &b.to, b.kind)));

    // Flag (but keep) edges that cannot coexist with their source node.
    for edge in &edge_list {
        if let Some((_, exists)) = deliverables.get(&edge.from) {
            let combined = edge.guard.clone().and(exists.clone());
            if satisfiable(&combined, &options, atom_cap) == Tri::False {
                warnings.push(Warning::new(
                    WarningCode::DanglingReference,
                    format!(
                        "edge {} -> {} can never be active together with its target's existence",
                        edge.from, edge.to
                    ),
                ));
            }
        }
    }

    // CMake forbids static link cycles, but malformed inputs may contain
    // them; record and continue.
    if let Some(cycle) = find_link_cycle(&edge_list) {
        warnings.push(Warning::new(
            WarningCode::LinkCycle,
            format!("link cycle detected: {}", cycle.join(" -> ")),
        ));
    }

    let bdg = Bdg {
        nodes,
        edges: edge_list,
        options,
        metadata: BdgMetadata {
            root: String::new(),
            analyzer_version: env!("CARGO_PKG_VERSION").to_string(),
            warning_summary: BTreeMap::new(),
        },
    };
    debug_assert!(bdg.check_integrity().is_ok());
    (bdg, warnings)
}

fn find_link_cycle(edges: &[BdgEdge]) -> Option<Vec<String>> {
    let mut adjacency: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for e in edges {
        if e.kind == EdgeKind::Links {
            adjacency.entry(e.from.as_str()).or_default().push(e.to.as_str());
        }
    }
    let mut done: BTreeSet<&str> = BTreeSet::new();
    for &start in adjacency.keys() {
        if done.contains(start) {
            continue;
        }
        let mut stack = vec![(start, 0usize)];
        let mut path = vec![start];
        let mut on_path: BTreeSet<&str> = [start].into();
        while let Some((node, child_idx)) = stack.last_mut() {
            let children = adjacency.get(*node).map(Vec::as_slice).unwrap_or(&[]);
            if let Some(&child) = children.get(*child_idx) {
                *child_idx += 1;
                if on_path.contains(child) {
                    let pos = path.iter().position(|n| *n == child).unwrap_or(0);
                    let mut cycle: Vec<String> =
                        path[pos..].iter().map(|s| s.to_string()).collect();
                    cycle.push(child.to_string());
                    return Some(cycle);
                }
                if !done.contains(child) {
                    stack.push((child, 0));
                    path.push(child);
                    on_path.insert(child);
                }
            } else {
                done.insert(node);
                on_path.remove(*node);
                path.pop();
                stack.pop();
            }
        }
    }
    None
}

#[cfg(test)]
mod tests;
