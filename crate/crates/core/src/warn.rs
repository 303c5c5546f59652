//! Non-fatal diagnostics collected during loading, evaluation, and graph
//! construction. Every warning carries a machine-readable code so callers can
//! aggregate and filter without string matching.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::span::SourceSpan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum WarningCode {
    UnsupportedCommand,
    UnsupportedConstruct,
    UnresolvedInclude,
    MissingInclude,
    IncludeCycle,
    IncludeDepthExceeded,
    UndefinedVariable,
    UnresolvedEnvironment,
    BranchOverflow,
    UnrollCapExceeded,
    CallDepthExceeded,
    GeneratorExpression,
    OpaqueCondition,
    DanglingReference,
    DuplicateTarget,
    LinkCycle,
    InvalidUtf8,
    ParseFailure,
    InvalidArguments,
    UnknownOption,
}

impl WarningCode {
    pub fn as_str(&self) -> &'static str {
        match self {
            WarningCode::UnsupportedCommand => "UNSUPPORTED_COMMAND",
            WarningCode::UnsupportedConstruct => "UNSUPPORTED_CONSTRUCT",
            WarningCode::UnresolvedInclude => "UNRESOLVED_INCLUDE",
            WarningCode::MissingInclude => "MISSING_INCLUDE",
            WarningCode::IncludeCycle => "INCLUDE_CYCLE",
            WarningCode::IncludeDepthExceeded => "INCLUDE_DEPTH_EXCEEDED",
            WarningCode::UndefinedVariable => "UNDEFINED_VARIABLE",
            WarningCode::UnresolvedEnvironment => "UNRESOLVED_ENVIRONMENT",
            WarningCode::BranchOverflow => "BRANCH_OVERFLOW",
            WarningCode::UnrollCapExceeded => "UNROLL_CAP_EXCEEDED",
            WarningCode::CallDepthExceeded => "CALL_DEPTH_EXCEEDED",
            WarningCode::GeneratorExpression => "GENERATOR_EXPRESSION",
            WarningCode::OpaqueCondition => "OPAQUE_CONDITION",
            WarningCode::DanglingReference => "DANGLING_REFERENCE",
            WarningCode::DuplicateTarget => "DUPLICATE_TARGET",
            WarningCode::LinkCycle => "LINK_CYCLE",
            WarningCode::InvalidUtf8 => "INVALID_UTF8",
            WarningCode::ParseFailure => "PARSE_FAILURE",
            WarningCode::InvalidArguments => "INVALID_ARGUMENTS",
            WarningCode::UnknownOption => "UNKNOWN_OPTION",
        }
    }
}

impl fmt::Display for WarningCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Warning {
    pub code: WarningCode,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub span: Option<SourceSpan>,
}

impl Warning {
    pub fn new(code: WarningCode, message: impl Into<String>) -> Self {
        Warning {
            code,
            message: message.into(),
            span: None,
        }
    }

    pub fn at(code: WarningCode, message: impl Into<String>, span: SourceSpan) -> Self {
        Warning {
            code,
            message: message.into(),
            span: Some(span),
        }
    }
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.span {
            Some(span) => write!(f, "{}: {} [{}]", span, self.message, self.code),
            None => write!(f, "{} [{}]", self.message, self.code),
        }
    }
}

/// Counts per warning code, used in BDG metadata and CLI summaries.
pub fn summarize(warnings: &[Warning]) -> BTreeMap<String, u64> {
    let mut out = BTreeMap::new();
    for w in warnings {
        *out.entry(w.code.as_str().to_string()).or_insert(0) += 1;
    }
    out
}
