//! The symbolic environment: flattened variables, option registration, and
//! CMake's copy-on-entry scoping.

use std::collections::BTreeMap;

use crate::ast::RoutineDef;
use crate::cond::{satisfiable, Condition, ConfigOption, Tri};

/// A variable's complete set of (guard, value list) alternatives across all
/// configurations. Guards are pairwise exclusive and jointly exhaustive; an
/// empty value list means the variable is unset or empty under that guard.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlattenedVariable {
    pub name: String,
    pub alternatives: Vec<(Condition, Vec<String>)>,
}

impl FlattenedVariable {
    pub fn constant(name: impl Into<String>, values: Vec<String>) -> Self {
        FlattenedVariable {
            name: name.into(),
            alternatives: vec![(Condition::True, values)],
        }
    }
}

/// Merge alternatives with identical value lists by disjoining their guards,
/// and drop alternatives whose guard is definitely unsatisfiable.
fn compact(
    alternatives: Vec<(Condition, Vec<String>)>,
    options: &[ConfigOption],
    atom_cap: usize,
) -> Vec<(Condition, Vec<String>)> {
    let mut merged: Vec<(Condition, Vec<String>)> = Vec::new();
    for (guard, values) in alternatives {
        if guard.is_false() {
            continue;
        }
        match merged.iter_mut().find(|(_, v)| *v == values) {
            Some((g, _)) => *g = std::mem::replace(g, Condition::False).or(guard),
            None => merged.push((guard, values)),
        }
    }
    merged.retain(|(g, _)| satisfiable(g, options, atom_cap) != Tri::False);
    merged
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScopeKind {
    Directory,
    Function,
}

#[derive(Debug, Clone)]
struct Scope {
    vars: BTreeMap<String, FlattenedVariable>,
    #[allow(dead_code)]
    kind: ScopeKind,
}

/// Variable scopes plus the global option and routine registries.
#[derive(Debug, Clone)]
pub struct SymbolicEnv {
    scopes: Vec<Scope>,
    pub options: Vec<ConfigOption>,
    routines: BTreeMap<String, RoutineDef>,
    /// Enumeration bound shared by guard satisfiability checks.
    pub atom_cap: usize,
}

impl SymbolicEnv {
    pub fn new(atom_cap: usize) -> Self {
        SymbolicEnv {
            scopes: vec![Scope {
                vars: BTreeMap::new(),
                kind: ScopeKind::Directory,
            }],
            options: Vec::new(),
            routines: BTreeMap::new(),
            atom_cap,
        }
    }

    /// Enter a child scope; variables are copied, CMake style, so reads see
    /// the parent's values at entry time and writes stay local.
    pub fn push_scope(&mut self, kind: ScopeKind) {
        let vars = self.scopes.last().expect("root scope").vars.clone();
        self.scopes.push(Scope { vars, kind });
    }

    pub fn pop_scope(&mut self) {
        assert!(self.scopes.len() > 1, "cannot pop the root scope");
        self.scopes.pop();
    }

    pub fn depth(&self) -> usize {
        self.scopes.len()
    }

    pub fn get_var(&self, name: &str) -> Option<&FlattenedVariable> {
        self.scopes.last().expect("root scope").vars.get(name)
    }

    /// Snapshot of one variable binding, for save/restore around loops.
    pub fn snapshot_var(&self, name: &str) -> Option<FlattenedVariable> {
        self.get_var(name).cloned()
    }

    pub fn restore_var(&mut self, name: &str, snapshot: Option<FlattenedVariable>) {
        let vars = &mut self.scopes.last_mut().expect("root scope").vars;
        match snapshot {
            Some(v) => {
                vars.insert(name.to_string(), v);
            }
            None => {
                vars.remove(name);
            }
        }
    }

    /// Write `branches` (guards already conjoined with the path condition
    /// `pc` and partitioning it) into the variable, keeping the previous
    /// alternatives outside `pc`.
    pub fn set_var(
        &mut self,
        name: &str,
        pc: &Condition,
        branches: Vec<(Condition, Vec<String>)>,
    ) {
        let options = self.options.clone();
        let atom_cap = self.atom_cap;
        let scope = self.scopes.last_mut().expect("root scope");
        Self::write_into(&mut scope.vars, name, pc, branches, &options, atom_cap);
    }

    /// Like [`SymbolicEnv::set_var`] but targeting the parent scope
    /// (`set(... PARENT_SCOPE)`). Returns false at root scope.
    pub fn set_var_parent(
        &mut self,
        name: &str,
        pc: &Condition,
        branches: Vec<(Condition, Vec<String>)>,
    ) -> bool {
        let options = self.options.clone();
        let atom_cap = self.atom_cap;
        let n = self.scopes.len();
        if n < 2 {
            return false;
        }
        let scope = &mut self.scopes[n - 2];
        Self::write_into(&mut scope.vars, name, pc, branches, &options, atom_cap);
        true
    }

    fn write_into(
        vars: &mut BTreeMap<String, FlattenedVariable>,
        name: &str,
        pc: &Condition,
        branches: Vec<(Condition, Vec<String>)>,
        options: &[ConfigOption],
        atom_cap: usize,
    ) {
        let mut alternatives = Vec::new();
        if !pc.is_true() {
            let not_pc = pc.clone().negate();
            match vars.get(name) {
                Some(prev) => {
                    for (g, values) in &prev.alternatives {
                        alternatives.push((g.clone().and(not_pc.clone()), values.clone()));
                    }
                }
                None => alternatives.push((not_pc, Vec::new())),
            }
        }
        alternatives.extend(branches);
        let alternatives = compact(alternatives, options, atom_cap);
        vars.insert(
            name.to_string(),
            FlattenedVariable {
                name: name.to_string(),
                alternatives,
            },
        );
    }

    /// Register a configuration option; the first registration of a name
    /// wins, so re-running an `option()` is idempotent.
    pub fn register_option(&mut self, option: ConfigOption) {
        if !self.options.iter().any(|o| o.name == option.name) {
            self.options.push(option);
        }
    }

    pub fn find_option(&self, name: &str) -> Option<&ConfigOption> {
        self.options.iter().find(|o| o.name == name)
    }

    pub fn define_routine(&mut self, def: RoutineDef) {
        self.routines.insert(def.name.clone(), def);
    }

    pub fn find_routine(&self, name: &str) -> Option<RoutineDef> {
        self.routines.get(name).cloned()
    }
}
