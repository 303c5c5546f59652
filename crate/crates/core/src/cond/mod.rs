//! Presence conditions: boolean formulas over configuration-option atoms.
//!
//! Conditions label every value alternative, trace event, and graph edge
//! produced by the analysis. The algebra keeps formulas lightly normalized
//! (constant folding, idempotence, complementary-literal detection, sorted
//! n-ary children) so that structurally equal conditions compare equal;
//! full canonicalization is the job of [`to_dnf`].

mod count;
mod dnf;
mod options;
mod text;

pub use count::{count_variants, satisfiable, VariantCount};
pub use dnf::{to_dnf, Clause, Dnf};
pub use options::{
    cmake_truthy, ConfigOption, ConfigurationAssignment, Domain, OptionOrigin, OptionValue,
};
pub use text::CondParseError;

use std::collections::BTreeSet;
use std::fmt::Write as _;

/// Three-valued evaluation result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tri {
    True,
    False,
    Unknown,
}

impl Tri {
    pub fn from_bool(b: bool) -> Tri {
        if b {
            Tri::True
        } else {
            Tri::False
        }
    }

    pub fn negate(self) -> Tri {
        match self {
            Tri::True => Tri::False,
            Tri::False => Tri::True,
            Tri::Unknown => Tri::Unknown,
        }
    }
}

/// An atomic predicate over one configuration option.
///
/// Unsupported predicates become `Opaque` atoms; two opaque atoms with the
/// same source text share one stable id, so `!u && u` still folds to FALSE.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    /// CMake if-truthiness of the option's value.
    Truthy { option: String },
    /// String equality of the option's value against a literal.
    Equals { option: String, literal: String },
    /// Whether the option is defined at all.
    Defined { option: String },
    /// A predicate the analysis does not interpret. `id` is derived from the
    /// source text, so identical text yields one atom.
    Opaque { id: String, source_text: String },
}

impl Atom {
    pub fn opaque(source_text: impl Into<String>) -> Atom {
        let source_text = source_text.into();
        Atom::Opaque {
            id: opaque_id(&source_text),
            source_text,
        }
    }

    /// Reconstructs an opaque atom from a persisted id. The source text may
    /// be reattached later from a side table.
    pub(crate) fn opaque_from_id(id: String, source_text: String) -> Atom {
        Atom::Opaque { id, source_text }
    }

    /// The option this atom constrains; `None` for opaque atoms.
    pub fn option_name(&self) -> Option<&str> {
        match self {
            Atom::Truthy { option } | Atom::Equals { option, .. } | Atom::Defined { option } => {
                Some(option)
            }
            Atom::Opaque { .. } => None,
        }
    }
}

/// FNV-1a over the source text; hex, stable across runs.
fn opaque_id(text: &str) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.as_bytes() {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut out = String::with_capacity(16);
    write!(out, "{hash:016x}").expect("writing to string");
    out
}

/// A presence-condition formula.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Condition {
    True,
    False,
    Atom(Atom),
    Not(Box<Condition>),
    And(Vec<Condition>),
    Or(Vec<Condition>),
}

impl From<Atom> for Condition {
    fn from(a: Atom) -> Self {
        Condition::Atom(a)
    }
}

impl Condition {
    pub fn truthy(option: impl Into<String>) -> Condition {
        Condition::Atom(Atom::Truthy {
            option: option.into(),
        })
    }

    pub fn equals(option: impl Into<String>, literal: impl Into<String>) -> Condition {
        Condition::Atom(Atom::Equals {
            option: option.into(),
            literal: literal.into(),
        })
    }

    pub fn defined(option: impl Into<String>) -> Condition {
        Condition::Atom(Atom::Defined {
            option: option.into(),
        })
    }

    pub fn opaque(source_text: impl Into<String>) -> Condition {
        Condition::Atom(Atom::opaque(source_text))
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Condition::True)
    }

    pub fn is_false(&self) -> bool {
        matches!(self, Condition::False)
    }

    /// Conjunction with constant folding, idempotence, and complementary
    /// literal detection.
    pub fn and(self, rhs: Condition) -> Condition {
        let mut children = Vec::new();
        for c in [self, rhs] {
            match c {
                Condition::True => {}
                Condition::False => return Condition::False,
                Condition::And(cs) => children.extend(cs),
                other => children.push(other),
            }
        }
        normalize_nary(children, true)
    }

    /// Disjunction; dual of [`Condition::and`].
    pub fn or(self, rhs: Condition) -> Condition {
        let mut children = Vec::new();
        for c in [self, rhs] {
            match c {
                Condition::False => {}
                Condition::True => return Condition::True,
                Condition::Or(cs) => children.extend(cs),
                other => children.push(other),
            }
        }
        normalize_nary(children, false)
    }

    /// Negation with double-negation elimination.
    pub fn negate(self) -> Condition {
        match self {
            Condition::True => Condition::False,
            Condition::False => Condition::True,
            Condition::Not(inner) => *inner,
            other => Condition::Not(Box::new(other)),
        }
    }

    pub fn and_all(conds: impl IntoIterator<Item = Condition>) -> Condition {
        conds
            .into_iter()
            .fold(Condition::True, |acc, c| acc.and(c))
    }

    pub fn or_all(conds: impl IntoIterator<Item = Condition>) -> Condition {
        conds
            .into_iter()
            .fold(Condition::False, |acc, c| acc.or(c))
    }

    /// Three-valued evaluation under a (possibly partial) assignment.
    pub fn evaluate(&self, assignment: &ConfigurationAssignment) -> Tri {
        self.eval_by(&|name| assignment.resolve(name))
    }

    /// Evaluation against an arbitrary option-value lookup.
    pub(crate) fn eval_by(&self, lookup: &dyn Fn(&str) -> OptionValue) -> Tri {
        match self {
            Condition::True => Tri::True,
            Condition::False => Tri::False,
            Condition::Atom(atom) => match atom {
                Atom::Truthy { option } => match lookup(option) {
                    OptionValue::Set(v) => Tri::from_bool(cmake_truthy(&v)),
                    OptionValue::Undefined => Tri::False,
                    OptionValue::Unknown => Tri::Unknown,
                },
                Atom::Equals { option, literal } => match lookup(option) {
                    OptionValue::Set(v) => Tri::from_bool(v == *literal),
                    OptionValue::Undefined => Tri::False,
                    OptionValue::Unknown => Tri::Unknown,
                },
                Atom::Defined { option } => match lookup(option) {
                    OptionValue::Set(_) => Tri::True,
                    OptionValue::Undefined => Tri::False,
                    OptionValue::Unknown => Tri::Unknown,
                },
                Atom::Opaque { .. } => Tri::Unknown,
            },
            Condition::Not(inner) => inner.eval_by(lookup).negate(),
            Condition::And(cs) => {
                let mut out = Tri::True;
                for c in cs {
                    match c.eval_by(lookup) {
                        Tri::False => return Tri::False,
                        Tri::Unknown => out = Tri::Unknown,
                        Tri::True => {}
                    }
                }
                out
            }
            Condition::Or(cs) => {
                let mut out = Tri::False;
                for c in cs {
                    match c.eval_by(lookup) {
                        Tri::True => return Tri::True,
                        Tri::Unknown => out = Tri::Unknown,
                        Tri::False => {}
                    }
                }
                out
            }
        }
    }

    /// All atoms in the formula, deduplicated and ordered.
    pub fn atoms(&self) -> BTreeSet<&Atom> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut BTreeSet<&'a Atom>) {
        match self {
            Condition::True | Condition::False => {}
            Condition::Atom(a) => {
                out.insert(a);
            }
            Condition::Not(inner) => inner.collect_atoms(out),
            Condition::And(cs) | Condition::Or(cs) => {
                for c in cs {
                    c.collect_atoms(out);
                }
            }
        }
    }

    /// Names of the options constrained by the formula.
    pub fn option_names(&self) -> BTreeSet<&str> {
        self.atoms()
            .into_iter()
            .filter_map(Atom::option_name)
            .collect()
    }

    pub fn contains_opaque(&self) -> bool {
        self.atoms()
            .iter()
            .any(|a| matches!(a, Atom::Opaque { .. }))
    }

    /// Id → source text for every opaque atom in the formula. Persisted as a
    /// side table so canonical strings (which carry only ids) stay loadable.
    pub fn opaque_sources(&self) -> std::collections::BTreeMap<String, String> {
        self.atoms()
            .into_iter()
            .filter_map(|a| match a {
                Atom::Opaque { id, source_text } => Some((id.clone(), source_text.clone())),
                _ => None,
            })
            .collect()
    }

    /// Re-parse a canonical string, reattaching opaque source text.
    pub fn parse_with_sources(
        text: &str,
        sources: &std::collections::BTreeMap<String, String>,
    ) -> Result<Condition, CondParseError> {
        text::parse_condition_with_sources(text, sources)
    }
}

/// Shared tail of `and`/`or`: sort children by their structural key, drop
/// duplicates, detect complementary pairs, unwrap singletons.
fn normalize_nary(mut children: Vec<Condition>, is_and: bool) -> Condition {
    children.sort();
    children.dedup();
    for c in &children {
        if let Condition::Not(inner) = c {
            if children.binary_search(inner).is_ok() {
                return if is_and {
                    Condition::False
                } else {
                    Condition::True
                };
            }
        }
    }
    match children.len() {
        0 => {
            if is_and {
                Condition::True
            } else {
                Condition::False
            }
        }
        1 => children.pop().expect("len checked"),
        _ => {
            if is_and {
                Condition::And(children)
            } else {
                Condition::Or(children)
            }
        }
    }
}

impl std::ops::BitAnd for Condition {
    type Output = Condition;
    fn bitand(self, rhs: Condition) -> Condition {
        self.and(rhs)
    }
}

impl std::ops::BitOr for Condition {
    type Output = Condition;
    fn bitor(self, rhs: Condition) -> Condition {
        self.or(rhs)
    }
}

impl std::ops::Not for Condition {
    type Output = Condition;
    fn not(self) -> Condition {
        self.negate()
    }
}
