//! Variant counting and satisfiability by bounded enumeration.
//!
//! The configuration space of a condition is the product of the domains of
//! the options appearing in it; options that do not appear never multiply
//! the count. Enumeration splits one option at a time and short-circuits on
//! decided partial evaluations, so the worst case is rare in practice.
//! Opaque atoms, options with non-enumerable domains, and options beyond the
//! cap are explored pessimistically (a configuration counts if some choice
//! for them satisfies the condition) and mark the result inexact.

use std::collections::BTreeMap;

use super::{Condition, ConfigOption, OptionValue, Tri};

/// Number of satisfying assignments over the options appearing in a
/// condition. `exact` is false when opaque atoms, unbounded domains, or the
/// atom cap forced a pessimistic over-approximation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VariantCount {
    pub count: u64,
    pub exact: bool,
}

struct Enumeration {
    /// Options walked exhaustively: (name, domain values).
    enumerated: Vec<(String, Vec<String>)>,
    /// Whether any atom escapes enumeration (opaque atom, opaque domain,
    /// unregistered option, or options dropped by the cap).
    pessimistic: bool,
}

fn plan(c: &Condition, options: &[ConfigOption], atom_cap: usize) -> Enumeration {
    let by_name: BTreeMap<&str, &ConfigOption> =
        options.iter().map(|o| (o.name.as_str(), o)).collect();
    let mut enumerated = Vec::new();
    let mut pessimistic = c.contains_opaque();
    for name in c.option_names() {
        match by_name.get(name).and_then(|o| o.enumerable_values()) {
            Some(values) => enumerated.push((name.to_string(), values)),
            // Unregistered or non-enumerable options cannot be walked.
            None => pessimistic = true,
        }
    }
    if enumerated.len() > atom_cap.max(1) {
        enumerated.truncate(atom_cap.max(1));
        pessimistic = true;
    }
    Enumeration {
        enumerated,
        pessimistic,
    }
}

/// Count satisfying assignments of `c` over the options appearing in it.
pub fn count_variants(c: &Condition, options: &[ConfigOption], atom_cap: usize) -> VariantCount {
    let plan = plan(c, options, atom_cap);
    let mut values: BTreeMap<String, String> = BTreeMap::new();
    let mut unknown_leaves = false;
    let count = count_rec(c, &plan.enumerated, &mut values, &mut unknown_leaves);
    VariantCount {
        count,
        exact: !plan.pessimistic && !unknown_leaves,
    }
}

fn count_rec(
    c: &Condition,
    remaining: &[(String, Vec<String>)],
    values: &mut BTreeMap<String, String>,
    unknown_leaves: &mut bool,
) -> u64 {
    let verdict = c.eval_by(&|name| match values.get(name) {
        Some(v) => OptionValue::Set(v.clone()),
        None => OptionValue::Unknown,
    });
    match verdict {
        Tri::True => space_size(remaining),
        Tri::False => 0,
        Tri::Unknown => match remaining.split_first() {
            Some(((name, domain), rest)) => {
                let mut total = 0u64;
                for value in domain {
                    values.insert(name.clone(), value.clone());
                    total = total.saturating_add(count_rec(c, rest, values, unknown_leaves));
                }
                values.remove(name);
                total
            }
            None => {
                // Every enumerable option is pinned and the condition is
                // still undecided; count it as possibly satisfied.
                *unknown_leaves = true;
                1
            }
        },
    }
}

fn space_size(remaining: &[(String, Vec<String>)]) -> u64 {
    remaining
        .iter()
        .fold(1u64, |acc, (_, d)| acc.saturating_mul(d.len() as u64))
}

/// Whether any configuration satisfies `c`, under the same enumeration
/// regime as [`count_variants`]. Unknown when only pessimistically-explored
/// atoms could make it true.
pub fn satisfiable(c: &Condition, options: &[ConfigOption], atom_cap: usize) -> Tri {
    if c.is_true() {
        return Tri::True;
    }
    if c.is_false() {
        return Tri::False;
    }
    let plan = plan(c, options, atom_cap);
    let mut values = BTreeMap::new();
    sat_rec(c, &plan.enumerated, &mut values)
}

fn sat_rec(
    c: &Condition,
    remaining: &[(String, Vec<String>)],
    values: &mut BTreeMap<String, String>,
) -> Tri {
    let verdict = c.eval_by(&|name| match values.get(name) {
        Some(v) => OptionValue::Set(v.clone()),
        None => OptionValue::Unknown,
    });
    match verdict {
        Tri::True => Tri::True,
        Tri::False => Tri::False,
        Tri::Unknown => match remaining.split_first() {
            Some(((name, domain), rest)) => {
                let mut saw_unknown = false;
                for value in domain {
                    values.insert(name.clone(), value.clone());
                    let sub = sat_rec(c, rest, values);
                    values.remove(name);
                    match sub {
                        Tri::True => return Tri::True,
                        Tri::Unknown => saw_unknown = true,
                        Tri::False => {}
                    }
                }
                if saw_unknown {
                    Tri::Unknown
                } else {
                    Tri::False
                }
            }
            None => Tri::Unknown,
        },
    }
}
