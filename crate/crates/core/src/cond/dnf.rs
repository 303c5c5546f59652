//! Disjunctive normal form with duplicate and subsumption pruning.
//!
//! Used to canonicalize propagation conditions for reports. No minimality
//! guarantee beyond subsumption removal; callers that hit the clause cap
//! fall back to the raw formula tree.

use std::collections::BTreeMap;

use super::{Atom, Condition};

/// A conjunction of literals, keyed by atom. `true` is a positive literal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Clause {
    pub literals: BTreeMap<Atom, bool>,
}

impl Clause {
    fn empty() -> Clause {
        Clause {
            literals: BTreeMap::new(),
        }
    }

    fn unit(atom: Atom, positive: bool) -> Clause {
        let mut literals = BTreeMap::new();
        literals.insert(atom, positive);
        Clause { literals }
    }

    /// Merge two clauses; `None` on a complementary literal pair.
    fn merge(&self, other: &Clause) -> Option<Clause> {
        let mut literals = self.literals.clone();
        for (atom, positive) in &other.literals {
            match literals.insert(atom.clone(), *positive) {
                Some(prev) if prev != *positive => return None,
                _ => {}
            }
        }
        Some(Clause { literals })
    }

    /// True when every literal of `self` appears in `other` (so `other`
    /// implies `self` and is redundant in a disjunction).
    fn subsumes(&self, other: &Clause) -> bool {
        self.literals
            .iter()
            .all(|(a, p)| other.literals.get(a) == Some(p))
    }

    pub fn to_condition(&self) -> Condition {
        Condition::and_all(self.literals.iter().map(|(atom, positive)| {
            let c = Condition::Atom(atom.clone());
            if *positive {
                c
            } else {
                c.negate()
            }
        }))
    }
}

/// A disjunction of clauses. The empty disjunction is FALSE; a single empty
/// clause is TRUE.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dnf {
    pub clauses: Vec<Clause>,
}

impl Dnf {
    pub fn to_condition(&self) -> Condition {
        Condition::or_all(self.clauses.iter().map(Clause::to_condition))
    }

    pub fn is_true(&self) -> bool {
        self.clauses.len() == 1 && self.clauses[0].literals.is_empty()
    }

    pub fn is_false(&self) -> bool {
        self.clauses.is_empty()
    }
}

/// Convert to DNF. Returns `None` (overflow, a value rather than an error)
/// when the clause count would exceed `clause_cap`.
pub fn to_dnf(condition: &Condition, clause_cap: usize) -> Option<Dnf> {
    // Intermediate products may be larger than the final pruned form; allow
    // some slack before giving up.
    let work_cap = clause_cap.saturating_mul(16).max(1024);
    let clauses = convert(condition, true, work_cap)?;
    let clauses = prune(clauses);
    if clauses.len() > clause_cap {
        return None;
    }
    Some(Dnf { clauses })
}

fn convert(c: &Condition, positive: bool, work_cap: usize) -> Option<Vec<Clause>> {
    match (c, positive) {
        (Condition::True, true) | (Condition::False, false) => Some(vec![Clause::empty()]),
        (Condition::True, false) | (Condition::False, true) => Some(Vec::new()),
        (Condition::Atom(a), _) => Some(vec![Clause::unit(a.clone(), positive)]),
        (Condition::Not(inner), _) => convert(inner, !positive, work_cap),
        (Condition::And(cs), true) | (Condition::Or(cs), false) => {
            let mut acc = vec![Clause::empty()];
            for child in cs {
                let rhs = convert(child, positive, work_cap)?;
                let mut next = Vec::new();
                for a in &acc {
                    for b in &rhs {
                        if let Some(m) = a.merge(b) {
                            next.push(m);
                            if next.len() > work_cap {
                                return None;
                            }
                        }
                    }
                }
                acc = next;
                if acc.is_empty() {
                    break;
                }
            }
            Some(acc)
        }
        (Condition::Or(cs), true) | (Condition::And(cs), false) => {
            let mut acc = Vec::new();
            for child in cs {
                acc.extend(convert(child, positive, work_cap)?);
                if acc.len() > work_cap {
                    return None;
                }
            }
            Some(acc)
        }
    }
}

/// Sort, dedup, and drop subsumed clauses.
fn prune(mut clauses: Vec<Clause>) -> Vec<Clause> {
    clauses.sort_by_key(|c| (c.literals.len(), format!("{:?}", c.literals)));
    clauses.dedup();
    let mut kept: Vec<Clause> = Vec::new();
    for clause in clauses {
        if !kept.iter().any(|k| k.subsumes(&clause)) {
            kept.push(clause);
        }
    }
    kept.sort();
    kept
}
