//! Trace of conditional target and source declarations produced by
//! evaluation, consumed by graph construction.

use serde::{Deserialize, Serialize};

use crate::cond::Condition;
use crate::span::SourceSpan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LibraryKind {
    Static,
    Shared,
    Module,
    Interface,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeliverableKind {
    Executable,
    Library(LibraryKind),
}

impl DeliverableKind {
    pub fn label(&self) -> &'static str {
        match self {
            DeliverableKind::Executable => "executable",
            DeliverableKind::Library(LibraryKind::Static) => "static_library",
            DeliverableKind::Library(LibraryKind::Shared) => "shared_library",
            DeliverableKind::Library(LibraryKind::Module) => "module_library",
            DeliverableKind::Library(LibraryKind::Interface) => "interface_library",
        }
    }
}

/// One observed declaration, guarded by the path condition under which the
/// declaring command runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceEvent {
    DeclareDeliverable {
        name: String,
        kind: DeliverableKind,
        guard: Condition,
        span: SourceSpan,
    },
    AttachSources {
        target: String,
        /// Normalized root-relative source paths.
        sources: Vec<String>,
        guard: Condition,
        span: SourceSpan,
    },
    LinkDependency {
        from: String,
        /// Target name, alias, or external library name.
        to: String,
        guard: Condition,
        span: SourceSpan,
    },
    DeclareAlias {
        alias: String,
        target: String,
        guard: Condition,
        span: SourceSpan,
    },
}

impl TraceEvent {
    pub fn guard(&self) -> &Condition {
        match self {
            TraceEvent::DeclareDeliverable { guard, .. }
            | TraceEvent::AttachSources { guard, .. }
            | TraceEvent::LinkDependency { guard, .. }
            | TraceEvent::DeclareAlias { guard, .. } => guard,
        }
    }
}

/// Ordered list of declaration events; order follows source order and branch
/// order, so identical inputs yield identical traces.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DeclarationTrace {
    pub events: Vec<TraceEvent>,
}

impl DeclarationTrace {
    pub fn push(&mut self, event: TraceEvent) {
        self.events.push(event);
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}
