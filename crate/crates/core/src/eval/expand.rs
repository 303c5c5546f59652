//! Argument expansion: `${VAR}` and `$ENV{VAR}` references become per-guard
//! value branches, resolved innermost-first. Generator expressions stay
//! verbatim and are flagged.

use crate::ast::{Argument, ArgumentKind};
use crate::cond::{Condition, ConfigOption, Domain, OptionOrigin};
use crate::span::SourceSpan;
use crate::warn::{Warning, WarningCode};

use super::Evaluator;

/// Expansion branches: (guard, single string). Guards are relative to the
/// surrounding path condition until the caller conjoins it.
type TextBranches = Vec<(Condition, String)>;

struct Overflow;

impl Evaluator<'_> {
    /// Expand one argument under path condition `pc` into (guard, items)
    /// branches. Branch guards are conjoined with `pc` and partition it.
    pub(crate) fn expand(
        &mut self,
        arg: &Argument,
        pc: &Condition,
    ) -> Vec<(Condition, Vec<String>)> {
        if arg.raw_text.contains("$<") {
            self.warn(Warning::at(
                WarningCode::GeneratorExpression,
                format!("generator expression kept verbatim: {}", arg.raw_text),
                arg.span.clone(),
            ));
        }
        let branches = match arg.kind {
            ArgumentKind::Bracket => {
                return vec![(pc.clone(), vec![arg.raw_text.clone()])];
            }
            ArgumentKind::Quoted | ArgumentKind::Unquoted => {
                match self.expand_refs(&arg.raw_text, &arg.span) {
                    Ok(branches) => branches,
                    Err(Overflow) => {
                        self.warn(Warning::at(
                            WarningCode::BranchOverflow,
                            format!(
                                "expansion of `{}` exceeds {} branches; kept verbatim",
                                arg.raw_text, self.caps.expand_branches
                            ),
                            arg.span.clone(),
                        ));
                        return vec![(pc.clone(), vec![arg.raw_text.clone()])];
                    }
                }
            }
        };
        let mut out: Vec<(Condition, Vec<String>)> = Vec::new();
        for (guard, text) in branches {
            let guard = guard.and(pc.clone());
            if guard.is_false() {
                continue;
            }
            let items = match arg.kind {
                ArgumentKind::Quoted => vec![unescape(&text)],
                _ => split_list(&text),
            };
            match out.iter_mut().find(|(_, v)| *v == items) {
                Some((g, _)) => *g = std::mem::replace(g, Condition::False).or(guard),
                None => out.push((guard, items)),
            }
        }
        if out.is_empty() {
            // Every branch guard collapsed; keep the partition intact.
            out.push((pc.clone(), Vec::new()));
        }
        out
    }

    /// Expand several arguments and concatenate their items per branch
    /// combination. Guards partition `pc`.
    pub(crate) fn expand_args_joined(
        &mut self,
        args: &[Argument],
        pc: &Condition,
    ) -> Vec<(Condition, Vec<String>)> {
        let mut acc: Vec<(Condition, Vec<String>)> = vec![(pc.clone(), Vec::new())];
        for arg in args {
            let expanded = self.expand(arg, pc);
            let mut next = Vec::new();
            for (ga, items_a) in &acc {
                for (gb, items_b) in &expanded {
                    let guard = ga.clone().and(gb.clone());
                    if guard.is_false() {
                        continue;
                    }
                    let mut items = items_a.clone();
                    items.extend(items_b.iter().cloned());
                    next.push((guard, items));
                }
            }
            if next.len() > self.caps.expand_branches {
                self.warn(Warning::at(
                    WarningCode::BranchOverflow,
                    format!(
                        "argument list expansion exceeds {} branches; arguments kept verbatim",
                        self.caps.expand_branches
                    ),
                    arg.span.clone(),
                ));
                return vec![(
                    pc.clone(),
                    args.iter().map(|a| a.raw_text.clone()).collect(),
                )];
            }
            acc = next;
        }
        merge_equal(acc)
    }

    /// Resolve all `${}` / `$ENV{}` references in `text`. Escaped dollars
    /// (`\$`) are left alone. Returns per-guard strings with escape
    /// sequences still intact.
    fn expand_refs(&mut self, text: &str, span: &SourceSpan) -> Result<TextBranches, Overflow> {
        let Some((start, is_env)) = find_reference(text) else {
            return Ok(vec![(Condition::True, text.to_string())]);
        };
        let open = start + if is_env { 5 } else { 2 };
        let Some(close) = matching_brace(text, open) else {
            // Unterminated reference; treat the rest as literal text.
            return Ok(vec![(Condition::True, text.to_string())]);
        };
        let prefix = &text[..start];
        let inner = &text[open..close];
        let suffix = &text[close + 1..];

        let inner_branches = self.expand_refs(inner, span)?;
        let suffix_branches = self.expand_refs(suffix, span)?;
        let mut out: TextBranches = Vec::new();
        for (g1, name) in &inner_branches {
            let value_branches = self.resolve_name(name, is_env, span);
            for (g2, value) in &value_branches {
                for (g3, rest) in &suffix_branches {
                    let guard = g1.clone().and(g2.clone()).and(g3.clone());
                    if guard.is_false() {
                        continue;
                    }
                    out.push((guard, format!("{prefix}{value}{rest}")));
                    if out.len() > self.caps.expand_branches {
                        return Err(Overflow);
                    }
                }
            }
        }
        if out.is_empty() {
            out.push((Condition::False, String::new()));
        }
        Ok(merge_equal(out))
    }

    /// The value branches of one variable or environment reference.
    fn resolve_name(&mut self, name: &str, is_env: bool, span: &SourceSpan) -> TextBranches {
        if is_env {
            let option_name = format!("ENV{{{name}}}");
            if let Some(v) = self.overrides.values.get(&option_name) {
                return vec![(Condition::True, v.clone())];
            }
            self.env.register_option(ConfigOption::opaque(
                &option_name,
                None,
                OptionOrigin::Environment,
            ));
            self.warn(Warning::at(
                WarningCode::UnresolvedEnvironment,
                format!("$ENV{{{name}}} is build-time input; reference kept verbatim"),
                span.clone(),
            ));
            return vec![(Condition::True, format!("$ENV{{{name}}}"))];
        }

        if let Some(var) = self.env.get_var(name) {
            return var
                .alternatives
                .iter()
                .map(|(g, values)| (g.clone(), values.join(";")))
                .collect();
        }
        if let Some(v) = self.overrides.values.get(name) {
            return vec![(Condition::True, v.clone())];
        }
        if let Some(option) = self.env.find_option(name).cloned() {
            return match &option.domain {
                Domain::Boolean => vec![
                    (Condition::truthy(name), "ON".to_string()),
                    (Condition::truthy(name).negate(), "OFF".to_string()),
                ],
                Domain::Enumerated { values } => values
                    .iter()
                    .map(|v| (Condition::equals(name, v), v.clone()))
                    .collect(),
                Domain::Opaque => match &option.default {
                    // Without an override the cache holds its default.
                    Some(d) => vec![(Condition::True, d.clone())],
                    None => {
                        self.warn(Warning::at(
                            WarningCode::UnresolvedEnvironment,
                            format!("value of {name} is build-time input; reference kept verbatim"),
                            span.clone(),
                        ));
                        vec![(Condition::True, format!("${{{name}}}"))]
                    }
                },
            };
        }
        self.warn(Warning::at(
            WarningCode::UndefinedVariable,
            format!("variable {name} is not defined; expands to empty"),
            span.clone(),
        ));
        vec![(Condition::True, String::new())]
    }
}

/// First unescaped `${` or `$ENV{`, whichever comes first.
fn find_reference(text: &str) -> Option<(usize, bool)> {
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b'$' => {
                if bytes.get(i + 1) == Some(&b'{') {
                    return Some((i, false));
                }
                if text[i..].starts_with("$ENV{") {
                    return Some((i, true));
                }
                i += 1;
            }
            _ => i += 1,
        }
    }
    None
}

/// Index of the `}` closing the brace opened just before `open`, honoring
/// nested references and escapes.
fn matching_brace(text: &str, open: usize) -> Option<usize> {
    let bytes = text.as_bytes();
    let mut depth = 1usize;
    let mut i = open;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 1,
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
        i += 1;
    }
    None
}

/// Split an expanded unquoted argument into list items at unescaped
/// semicolons; empty items vanish. Semicolons inside generator expressions
/// do not split.
fn split_list(text: &str) -> Vec<String> {
    let mut items = Vec::new();
    let mut current = String::new();
    let mut genex_depth = 0usize;
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '\\' => {
                current.push('\\');
                if let Some(n) = chars.next() {
                    current.push(n);
                }
            }
            '$' if chars.peek() == Some(&'<') => {
                chars.next();
                genex_depth += 1;
                current.push_str("$<");
            }
            '>' if genex_depth > 0 => {
                genex_depth -= 1;
                current.push('>');
            }
            ';' if genex_depth == 0 => {
                if !current.is_empty() {
                    items.push(unescape(&current));
                }
                current.clear();
            }
            c => current.push(c),
        }
    }
    if !current.is_empty() {
        items.push(unescape(&current));
    }
    items
}

/// Decode backslash escapes after splitting.
pub(crate) fn unescape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('t') => out.push('\t'),
            Some('r') => out.push('\r'),
            Some(other) => out.push(other),
            None => out.push('\\'),
        }
    }
    out
}

/// Merge branches with identical payloads by disjoining guards.
fn merge_equal<T: PartialEq>(branches: Vec<(Condition, T)>) -> Vec<(Condition, T)> {
    let mut out: Vec<(Condition, T)> = Vec::new();
    for (guard, value) in branches {
        match out.iter_mut().find(|(_, v)| *v == value) {
            Some((g, _)) => *g = std::mem::replace(g, Condition::False).or(guard),
            None => out.push((guard, value)),
        }
    }
    out
}
