//! Versioned JSON persistence for the graph.
//!
//! Guards serialize as canonical condition strings; opaque atoms keep their
//! source text in a metadata side table keyed by stable id, so loading
//! reconstructs structurally equal conditions.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cond::{ConfigOption, Condition};
use crate::span::SourceSpan;

use super::{Bdg, BdgEdge, BdgMetadata, BdgNode, EdgeKind, NodeKind};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum BdgIoError {
    #[error("unsupported schema version {found} (supported: {SCHEMA_VERSION})")]
    SchemaVersionMismatch { found: u32 },
    #[error("corrupt graph payload: {0}")]
    CorruptPayload(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Serialize, Deserialize)]
struct FileRec {
    schema_version: u32,
    kind: String,
    options: Vec<ConfigOption>,
    nodes: Vec<NodeRec>,
    edges: Vec<EdgeRec>,
    metadata: MetadataRec,
}

#[derive(Serialize, Deserialize)]
struct NodeRec {
    id: String,
    kind: String,
    display_name: String,
    exists_guard: String,
}

#[derive(Serialize, Deserialize)]
struct EdgeRec {
    from: String,
    to: String,
    kind: String,
    guard: String,
    spans: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct MetadataRec {
    root: String,
    analyzer_version: String,
    /// How variant counts are defined: satisfying assignments over the
    /// options appearing in a condition.
    variant_semantics: String,
    warnings: BTreeMap<String, u64>,
    #[serde(default)]
    opaque_sources: BTreeMap<String, String>,
}

fn span_to_string(span: &SourceSpan) -> String {
    format!("{}:{}:{}", span.file, span.line, span.column)
}

fn span_from_string(text: &str) -> Option<SourceSpan> {
    let mut parts = text.rsplitn(3, ':');
    let column: u32 = parts.next()?.parse().ok()?;
    let line: u32 = parts.next()?.parse().ok()?;
    let file = parts.next()?;
    Some(SourceSpan::new(file, line, column))
}

/// Serialize to deterministic, diffable JSON bytes.
pub fn to_json_bytes(bdg: &Bdg) -> Vec<u8> {
    let mut opaque_sources = BTreeMap::new();
    for node in &bdg.nodes {
        opaque_sources.extend(node.exists_guard.opaque_sources());
    }
    for edge in &bdg.edges {
        opaque_sources.extend(edge.guard.opaque_sources());
    }
    let rec = FileRec {
        schema_version: SCHEMA_VERSION,
        kind: "bdg".to_string(),
        options: bdg.options.clone(),
        nodes: bdg
            .nodes
            .iter()
            .map(|n| NodeRec {
                id: n.id.clone(),
                kind: n.kind.label().to_string(),
                display_name: n.display_name.clone(),
                exists_guard: n.exists_guard.to_string(),
            })
            .collect(),
        edges: bdg
            .edges
            .iter()
            .map(|e| EdgeRec {
                from: e.from.clone(),
                to: e.to.clone(),
                kind: e.kind.label().to_string(),
                guard: e.guard.to_string(),
                spans: e.spans.iter().map(span_to_string).collect(),
            })
            .collect(),
        metadata: MetadataRec {
            root: bdg.metadata.root.clone(),
            analyzer_version: bdg.metadata.analyzer_version.clone(),
            variant_semantics: "satisfying-assignments-over-appearing-options".to_string(),
            warnings: bdg.metadata.warning_summary.clone(),
            opaque_sources,
        },
    };
    let mut bytes = serde_json::to_vec_pretty(&rec).expect("graph serialization cannot fail");
    bytes.push(b'\n');
    bytes
}

/// Write the graph to `destination`, returning the bytes written.
pub fn save_bdg(bdg: &Bdg, destination: &Path) -> Result<u64, BdgIoError> {
    let bytes = to_json_bytes(bdg);
    std::fs::write(destination, &bytes)?;
    Ok(bytes.len() as u64)
}

pub fn load_bdg(source: &Path) -> Result<Bdg, BdgIoError> {
    let bytes = std::fs::read(source)?;
    load_bdg_bytes(&bytes)
}

pub fn load_bdg_bytes(bytes: &[u8]) -> Result<Bdg, BdgIoError> {
    #[derive(Deserialize)]
    struct VersionProbe {
        schema_version: u32,
    }
    let probe: VersionProbe = serde_json::from_slice(bytes)
        .map_err(|e| BdgIoError::CorruptPayload(e.to_string()))?;
    if probe.schema_version != SCHEMA_VERSION {
        return Err(BdgIoError::SchemaVersionMismatch {
            found: probe.schema_version,
        });
    }
    let rec: FileRec =
        serde_json::from_slice(bytes).map_err(|e| BdgIoError::CorruptPayload(e.to_string()))?;
    let sources = &rec.metadata.opaque_sources;
    let parse_guard = |text: &str| -> Result<Condition, BdgIoError> {
        Condition::parse_with_sources(text, sources)
            .map_err(|e| BdgIoError::CorruptPayload(format!("bad condition `{text}`: {e}")))
    };

    let mut nodes = Vec::with_capacity(rec.nodes.len());
    for n in &rec.nodes {
        let kind = NodeKind::from_label(&n.kind)
            .ok_or_else(|| BdgIoError::CorruptPayload(format!("unknown node kind {}", n.kind)))?;
        nodes.push(BdgNode {
            id: n.id.clone(),
            kind,
            display_name: n.display_name.clone(),
            exists_guard: parse_guard(&n.exists_guard)?,
        });
    }
    let mut edges = Vec::with_capacity(rec.edges.len());
    for e in &rec.edges {
        let kind = match e.kind.as_str() {
            "compiles" => EdgeKind::Compiles,
            "links" => EdgeKind::Links,
            other => {
                return Err(BdgIoError::CorruptPayload(format!(
                    "unknown edge kind {other}"
                )))
            }
        };
        edges.push(BdgEdge {
            from: e.from.clone(),
            to: e.to.clone(),
            kind,
            guard: parse_guard(&e.guard)?,
            spans: e
                .spans
                .iter()
                .map(|s| {
                    span_from_string(s)
                        .ok_or_else(|| BdgIoError::CorruptPayload(format!("bad span `{s}`")))
                })
                .collect::<Result<_, _>>()?,
        });
    }
    let bdg = Bdg {
        nodes,
        edges,
        options: rec.options,
        metadata: BdgMetadata {
            root: rec.metadata.root,
            analyzer_version: rec.metadata.analyzer_version,
            warning_summary: rec.metadata.warnings,
        },
    };
    bdg.check_integrity().map_err(BdgIoError::CorruptPayload)?;
    Ok(bdg)
}
