//! Static analysis of CMake build specifications.
//!
//! The pipeline: parse listfiles into an AST, symbolically evaluate them
//! under an unconstrained configuration to flatten variables, materialize a
//! condition-labeled build dependency graph, and answer change-exposure
//! queries over it (impacted deliverables, dependency paths, propagation
//! conditions, patch ranking and filtering).

pub mod ast;
pub mod bdg;
pub mod cond;
pub mod diff;
pub mod eval;
pub mod exposure;
pub mod lex;
pub mod parse;
pub mod paths;
pub mod project;
pub mod scoring;
pub mod span;
pub mod synth;
pub mod warn;

pub use span::SourceSpan;
pub use warn::{Warning, WarningCode};

use std::path::Path;

use bdg::Bdg;
use cond::ConfigurationAssignment;
use project::{LoadError, ParsedProject};

/// Everything one full analysis produces.
#[derive(Debug)]
pub struct Analysis {
    pub project: ParsedProject,
    pub bdg: Bdg,
    pub warnings: Vec<Warning>,
}

/// Load, symbolically evaluate, and build the dependency graph for the
/// project rooted at `root_dir`.
pub fn analyze_project(root_dir: &Path) -> Result<Analysis, LoadError> {
    let project = project::load_project(root_dir)?;
    let outcome = eval::evaluate_project(&project, &ConfigurationAssignment::empty());
    let (mut bdg, build_warnings) = bdg::build_bdg(&outcome.trace, &outcome.env);
    let mut warnings = project.warnings.clone();
    warnings.extend(outcome.warnings);
    warnings.extend(build_warnings);
    bdg.metadata.root = project.root_abs.clone();
    bdg.metadata.warning_summary = warn::summarize(&warnings);
    Ok(Analysis {
        project,
        bdg,
        warnings,
    })
}
