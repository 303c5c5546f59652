//! Symbolic interpretation of parsed listfiles.
//!
//! Every command is interpreted under a path condition. With no overrides
//! the evaluation is fully symbolic: branching on configuration options
//! splits path conditions and variable values instead of picking a side.
//! With total overrides the same interpreter runs concretely — that mode is
//! the per-configuration oracle used to cross-check the symbolic results.

mod commands;
mod cond_build;
mod env;
mod expand;
mod trace;
#[cfg(test)]
mod tests;

pub use env::{FlattenedVariable, ScopeKind, SymbolicEnv};
pub use trace::{DeclarationTrace, DeliverableKind, LibraryKind, TraceEvent};

use crate::ast::{AstNode, ForeachBlock, IfBlock, RoutineKind};
use crate::cond::{satisfiable, Condition, ConfigurationAssignment, Tri};
use crate::paths;
use crate::project::ParsedProject;
use crate::span::SourceSpan;
use crate::warn::{Warning, WarningCode};

/// Expansion, recursion, and unrolling bounds.
#[derive(Debug, Clone)]
pub struct EvalCaps {
    /// Branch combinations per argument expansion.
    pub expand_branches: usize,
    /// Loop iterations per guard branch.
    pub foreach_unroll: usize,
    /// Nested function/macro calls.
    pub call_depth: usize,
    /// Nested include/add_subdirectory during evaluation.
    pub include_depth: usize,
    /// Enumeration bound for guard satisfiability pruning.
    pub atom_cap: usize,
    /// Retained warnings before summarizing the rest.
    pub max_warnings: usize,
}

impl Default for EvalCaps {
    fn default() -> Self {
        EvalCaps {
            expand_branches: 64,
            foreach_unroll: 512,
            call_depth: 16,
            include_depth: 32,
            atom_cap: 20,
            max_warnings: 50_000,
        }
    }
}

/// Result of evaluating a project.
#[derive(Debug)]
pub struct EvalOutcome {
    pub env: SymbolicEnv,
    pub trace: DeclarationTrace,
    pub warnings: Vec<Warning>,
}

/// Evaluate a parsed project. `overrides` pins options to concrete values;
/// pass an empty assignment for the fully symbolic mode.
pub fn evaluate_project(
    project: &ParsedProject,
    overrides: &ConfigurationAssignment,
) -> EvalOutcome {
    evaluate_project_with(project, overrides, EvalCaps::default())
}

pub fn evaluate_project_with(
    project: &ParsedProject,
    overrides: &ConfigurationAssignment,
    caps: EvalCaps,
) -> EvalOutcome {
    let mut ev = Evaluator {
        project,
        overrides,
        env: SymbolicEnv::new(caps.atom_cap),
        trace: DeclarationTrace::default(),
        warnings: Vec::new(),
        warnings_dropped: 0,
        caps,
        include_stack: vec![project.root_file.clone()],
        call_depth: 0,
    };
    ev.init_root_variables();
    let root = project
        .files
        .get(&project.root_file)
        .cloned()
        .unwrap_or_default();
    let frame = FileFrame::root();
    ev.eval_nodes(&root, &frame, &Condition::True);
    if ev.warnings_dropped > 0 {
        let dropped = ev.warnings_dropped;
        ev.warnings.push(Warning::new(
            WarningCode::UnsupportedConstruct,
            format!("{dropped} further warnings suppressed"),
        ));
    }
    EvalOutcome {
        env: ev.env,
        trace: ev.trace,
        warnings: ev.warnings,
    }
}

/// Per-file evaluation context.
#[derive(Debug, Clone)]
pub(crate) struct FileFrame {
    /// Directory scope (CMAKE_CURRENT_SOURCE_DIR), root-relative. Source
    /// paths resolve against this.
    pub dir_scope: String,
    /// Directory of the listfile being executed (CMAKE_CURRENT_LIST_DIR),
    /// root-relative. Includes resolve against this.
    pub list_dir: String,
}

impl FileFrame {
    fn root() -> Self {
        FileFrame {
            dir_scope: String::new(),
            list_dir: String::new(),
        }
    }
}

pub(crate) struct Evaluator<'p> {
    pub(crate) project: &'p ParsedProject,
    pub(crate) overrides: &'p ConfigurationAssignment,
    pub(crate) env: SymbolicEnv,
    pub(crate) trace: DeclarationTrace,
    pub(crate) warnings: Vec<Warning>,
    warnings_dropped: u64,
    pub(crate) caps: EvalCaps,
    pub(crate) include_stack: Vec<String>,
    pub(crate) call_depth: usize,
}

impl<'p> Evaluator<'p> {
    pub(crate) fn warn(&mut self, warning: Warning) {
        if self.warnings.len() < self.caps.max_warnings {
            self.warnings.push(warning);
        } else {
            self.warnings_dropped += 1;
        }
    }

    pub(crate) fn guard_satisfiable(&self, guard: &Condition) -> bool {
        satisfiable(guard, &self.env.options, self.caps.atom_cap) != Tri::False
    }

    fn init_root_variables(&mut self) {
        let root = self.project.root_abs.clone();
        for name in [
            "CMAKE_SOURCE_DIR",
            "CMAKE_CURRENT_SOURCE_DIR",
            "CMAKE_CURRENT_LIST_DIR",
            "PROJECT_SOURCE_DIR",
        ] {
            self.set_constant(name, root.clone());
        }
        // Binary directories are modeled as an opaque location outside the
        // source tree; generated files never match changed source paths.
        for name in ["CMAKE_BINARY_DIR", "CMAKE_CURRENT_BINARY_DIR", "PROJECT_BINARY_DIR"] {
            self.set_constant(name, "<binary>".to_string());
        }
    }

    pub(crate) fn set_constant(&mut self, name: &str, value: String) {
        self.env
            .set_var(name, &Condition::True, vec![(Condition::True, vec![value])]);
    }

    pub(crate) fn abs_dir(&self, rel_dir: &str) -> String {
        if rel_dir.is_empty() {
            self.project.root_abs.clone()
        } else {
            format!("{}/{rel_dir}", self.project.root_abs)
        }
    }

    pub(crate) fn eval_nodes(&mut self, nodes: &[AstNode], frame: &FileFrame, pc: &Condition) {
        for node in nodes {
            self.eval_node(node, frame, pc);
        }
    }

    fn eval_node(&mut self, node: &AstNode, frame: &FileFrame, pc: &Condition) {
        match node {
            AstNode::Command(cmd) => self.eval_command(cmd, frame, pc),
            AstNode::If(block) => self.eval_if(block, frame, pc),
            AstNode::Foreach(block) => self.eval_foreach(block, frame, pc),
            AstNode::While(block) => {
                self.warn(Warning::at(
                    WarningCode::UnsupportedCommand,
                    "while() loops are not interpreted; body skipped".to_string(),
                    block.span.clone(),
                ));
            }
            AstNode::Routine(def) => self.env.define_routine(def.clone()),
        }
    }

    /// Clause i runs under pc ∧ ¬c1 ∧ … ∧ ¬c(i−1) ∧ ci; the else body under
    /// the conjunction of all negations. Unsatisfiable branches are skipped.
    fn eval_if(&mut self, block: &IfBlock, frame: &FileFrame, pc: &Condition) {
        let mut remainder = pc.clone();
        for clause in &block.clauses {
            if remainder.is_false() {
                return;
            }
            let cond = self.build_condition(&clause.condition, &clause.span);
            let branch_pc = remainder.clone().and(cond.clone());
            if !branch_pc.is_false() && self.guard_satisfiable(&branch_pc) {
                self.eval_nodes(&clause.body, frame, &branch_pc);
            }
            remainder = remainder.and(cond.negate());
        }
        if !remainder.is_false()
            && !block.else_body.is_empty()
            && self.guard_satisfiable(&remainder)
        {
            self.eval_nodes(&block.else_body, frame, &remainder);
        }
    }

    fn eval_foreach(&mut self, block: &ForeachBlock, frame: &FileFrame, pc: &Condition) {
        let Some((loop_var, item_branches)) = self.foreach_items(block, pc) else {
            return;
        };
        let snapshot = self.env.snapshot_var(&loop_var);
        for (guard, items) in item_branches {
            if items.len() > self.caps.foreach_unroll {
                self.warn(Warning::at(
                    WarningCode::UnrollCapExceeded,
                    format!(
                        "foreach over {} items exceeds the unroll cap of {}; body skipped",
                        items.len(),
                        self.caps.foreach_unroll
                    ),
                    block.span.clone(),
                ));
                continue;
            }
            for item in items {
                self.env
                    .set_var(&loop_var, &guard, vec![(guard.clone(), vec![item])]);
                self.eval_nodes(&block.body, frame, &guard);
            }
        }
        self.env.restore_var(&loop_var, snapshot);
    }

    /// Decode a foreach header into the loop variable and per-guard item
    /// lists. Guards are already conjoined with `pc`.
    fn foreach_items(
        &mut self,
        block: &ForeachBlock,
        pc: &Condition,
    ) -> Option<(String, Vec<(Condition, Vec<String>)>)> {
        let header = &block.header;
        let Some(var_arg) = header.first() else {
            self.warn(Warning::at(
                WarningCode::InvalidArguments,
                "foreach() requires a loop variable".to_string(),
                block.span.clone(),
            ));
            return None;
        };
        let loop_var = var_arg.raw_text.clone();
        let rest = &header[1..];

        // RANGE form: bounds must be concrete per branch.
        if rest.first().map(|a| a.raw_text.as_str()) == Some("RANGE") {
            let bound_args = &rest[1..];
            let branches = self.expand_args_joined(bound_args, pc);
            let mut out = Vec::new();
            for (guard, bounds) in branches {
                let nums: Option<Vec<i64>> =
                    bounds.iter().map(|b| b.parse::<i64>().ok()).collect();
                match nums.as_deref() {
                    Some([stop]) => out.push((guard, range_items(0, *stop, 1))),
                    Some([start, stop]) => out.push((guard, range_items(*start, *stop, 1))),
                    Some([start, stop, step]) if *step != 0 => {
                        out.push((guard, range_items(*start, *stop, *step)))
                    }
                    _ => self.warn(Warning::at(
                        WarningCode::InvalidArguments,
                        format!("foreach(RANGE) with non-numeric bounds {bounds:?}"),
                        block.span.clone(),
                    )),
                }
            }
            return Some((loop_var, out));
        }

        // IN LISTS/ITEMS form; plain form is a bare item list.
        let item_args: Vec<crate::ast::Argument> =
            if rest.first().map(|a| a.raw_text.as_str()) == Some("IN") {
                let mut args = Vec::new();
                let mut mode = "";
                for arg in &rest[1..] {
                    match arg.raw_text.as_str() {
                        "LISTS" => mode = "lists",
                        "ITEMS" => mode = "items",
                        "ZIP_LISTS" => {
                            self.warn(Warning::at(
                                WarningCode::UnsupportedConstruct,
                                "foreach(ZIP_LISTS) is not interpreted".to_string(),
                                block.span.clone(),
                            ));
                            return None;
                        }
                        _ => match mode {
                            "lists" => {
                                // Reading a list variable is the same as
                                // expanding a reference to it.
                                let mut synthetic = arg.clone();
                                synthetic.raw_text = format!("${{{}}}", arg.raw_text);
                                args.push(synthetic);
                            }
                            _ => args.push(arg.clone()),
                        },
                    }
                }
                args
            } else {
                rest.to_vec()
            };
        Some((loop_var, self.expand_args_joined(&item_args, pc)))
    }

    /// Invoke a user-defined function or macro.
    pub(crate) fn call_routine(
        &mut self,
        def: &crate::ast::RoutineDef,
        args: &[crate::ast::Argument],
        frame: &FileFrame,
        pc: &Condition,
        span: &SourceSpan,
    ) {
        if self.call_depth >= self.caps.call_depth {
            self.warn(Warning::at(
                WarningCode::CallDepthExceeded,
                format!(
                    "call depth exceeds {} at {}(); body skipped",
                    self.caps.call_depth, def.name
                ),
                span.clone(),
            ));
            return;
        }
        self.call_depth += 1;
        let arg_branches = self.expand_args_joined(args, pc);

        let is_function = def.kind == RoutineKind::Function;
        if is_function {
            self.env.push_scope(ScopeKind::Function);
        }
        // Macros bind parameters in the caller's scope; remember what to undo.
        let mut saved: Vec<(String, Option<FlattenedVariable>)> = Vec::new();
        let mut bind = |ev: &mut Self, name: &str, branches: Vec<(Condition, Vec<String>)>| {
            if !is_function {
                saved.push((name.to_string(), ev.env.snapshot_var(name)));
            }
            ev.env.set_var(name, pc, branches);
        };

        let max_args = arg_branches.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
        for (i, param) in def.params.iter().enumerate() {
            let branches = arg_branches
                .iter()
                .map(|(g, items)| {
                    (
                        g.clone(),
                        items.get(i).cloned().map(|v| vec![v]).unwrap_or_default(),
                    )
                })
                .collect();
            bind(self, param, branches);
        }
        let argn: Vec<(Condition, Vec<String>)> = arg_branches
            .iter()
            .map(|(g, items)| {
                (
                    g.clone(),
                    items.iter().skip(def.params.len()).cloned().collect(),
                )
            })
            .collect();
        bind(self, "ARGN", argn);
        let argv: Vec<(Condition, Vec<String>)> = arg_branches
            .iter()
            .map(|(g, items)| (g.clone(), items.clone()))
            .collect();
        bind(self, "ARGV", argv.clone());
        let argc: Vec<(Condition, Vec<String>)> = arg_branches
            .iter()
            .map(|(g, items)| (g.clone(), vec![items.len().to_string()]))
            .collect();
        bind(self, "ARGC", argc);
        for i in 0..max_args.min(10) {
            let branches = arg_branches
                .iter()
                .map(|(g, items)| {
                    (
                        g.clone(),
                        items.get(i).cloned().map(|v| vec![v]).unwrap_or_default(),
                    )
                })
                .collect();
            bind(self, &format!("ARGV{i}"), branches);
        }

        self.eval_nodes(&def.body, frame, pc);

        if is_function {
            self.env.pop_scope();
        } else {
            for (name, snapshot) in saved.into_iter().rev() {
                self.env.restore_var(&name, snapshot);
            }
        }
        self.call_depth -= 1;
    }

    /// Push include context and evaluate another listfile in place.
    pub(crate) fn eval_listfile(
        &mut self,
        rel_path: &str,
        frame: FileFrame,
        pc: &Condition,
        span: &SourceSpan,
        new_dir_scope: bool,
    ) {
        if self.include_stack.iter().any(|p| p == rel_path) {
            self.warn(Warning::at(
                WarningCode::IncludeCycle,
                format!("include cycle through {rel_path}; skipped"),
                span.clone(),
            ));
            return;
        }
        if self.include_stack.len() >= self.caps.include_depth {
            self.warn(Warning::at(
                WarningCode::IncludeDepthExceeded,
                format!(
                    "include depth exceeds {} at {rel_path}; skipped",
                    self.caps.include_depth
                ),
                span.clone(),
            ));
            return;
        }
        let Some(nodes) = self.project.files.get(rel_path).cloned() else {
            self.warn(Warning::at(
                WarningCode::UnresolvedInclude,
                format!("{rel_path} was not loaded; its contents are not analyzed"),
                span.clone(),
            ));
            return;
        };
        self.include_stack.push(rel_path.to_string());
        if new_dir_scope {
            self.env.push_scope(ScopeKind::Directory);
            self.set_constant(
                "CMAKE_CURRENT_SOURCE_DIR",
                self.abs_dir(&frame.dir_scope),
            );
            self.set_constant(
                "CMAKE_CURRENT_BINARY_DIR",
                format!("<binary>/{}", frame.dir_scope),
            );
        }
        let saved_list_dir = self.env.snapshot_var("CMAKE_CURRENT_LIST_DIR");
        self.set_constant("CMAKE_CURRENT_LIST_DIR", self.abs_dir(&frame.list_dir));

        self.eval_nodes(&nodes, &frame, pc);

        self.env.restore_var("CMAKE_CURRENT_LIST_DIR", saved_list_dir);
        if new_dir_scope {
            self.env.pop_scope();
        }
        self.include_stack.pop();
    }

    /// Normalize a source path against the current directory scope.
    pub(crate) fn normalize_source(&self, frame: &FileFrame, raw: &str) -> String {
        paths::resolve(&self.project.root_abs, &frame.dir_scope, raw)
    }
}

fn range_items(start: i64, stop: i64, step: i64) -> Vec<String> {
    let mut out = Vec::new();
    let mut i = start;
    if step > 0 {
        while i <= stop {
            out.push(i.to_string());
            i += step;
        }
    } else {
        while i >= stop {
            out.push(i.to_string());
            i += step;
        }
    }
    out
}
