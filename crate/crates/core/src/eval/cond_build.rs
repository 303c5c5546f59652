//! Building presence conditions from `if()` argument lists.
//!
//! References are expanded first (per guard branch), then each branch's
//! token list is parsed with CMake's operator precedence: parentheses, unary
//! tests, binary comparisons, NOT, AND, OR. Truthiness follows CMake rules:
//! quoted operands are literal strings, unquoted operands are constants or
//! variable/option dereferences. Predicates outside the supported set become
//! opaque atoms, which soundly explore both outcomes.

use crate::ast::{Argument, ArgumentKind};
use crate::cond::{cmake_truthy, Condition, ConfigOption, Domain, OptionOrigin};
use crate::span::SourceSpan;
use crate::warn::{Warning, WarningCode};

use super::Evaluator;

#[derive(Debug, Clone, PartialEq)]
struct CondToken {
    text: String,
    quoted: bool,
}

const UNARY_OPAQUE_OPS: &[&str] = &[
    "EXISTS",
    "COMMAND",
    "TARGET",
    "POLICY",
    "TEST",
    "IS_DIRECTORY",
    "IS_SYMLINK",
    "IS_ABSOLUTE",
    "IS_READABLE",
    "IS_WRITABLE",
    "IS_EXECUTABLE",
];

const BINARY_OPS: &[&str] = &[
    "STREQUAL",
    "EQUAL",
    "LESS",
    "GREATER",
    "LESS_EQUAL",
    "GREATER_EQUAL",
    "STRLESS",
    "STRGREATER",
    "STRLESS_EQUAL",
    "STRGREATER_EQUAL",
    "VERSION_LESS",
    "VERSION_GREATER",
    "VERSION_EQUAL",
    "VERSION_LESS_EQUAL",
    "VERSION_GREATER_EQUAL",
    "MATCHES",
    "IN_LIST",
    "PATH_EQUAL",
];

/// Boolean platform and toolchain signals CMake defines from the build
/// environment; referencing one makes it a configuration option.
const BUILTIN_BOOLEAN_OPTIONS: &[&str] = &[
    "WIN32", "UNIX", "APPLE", "MSVC", "MINGW", "CYGWIN", "MSYS", "ANDROID", "IOS", "LINUX",
    "BSD", "EMSCRIPTEN",
];

/// Free-form environment-determined values commonly compared with STREQUAL.
const BUILTIN_OPAQUE_OPTIONS: &[&str] = &[
    "CMAKE_SYSTEM_NAME",
    "CMAKE_HOST_SYSTEM_NAME",
    "CMAKE_SYSTEM_PROCESSOR",
    "CMAKE_BUILD_TYPE",
    "CMAKE_C_COMPILER_ID",
    "CMAKE_CXX_COMPILER_ID",
    "CMAKE_GENERATOR",
];

fn builtin_option(name: &str) -> Option<ConfigOption> {
    if BUILTIN_BOOLEAN_OPTIONS.contains(&name) {
        return Some(ConfigOption::boolean(name, None, OptionOrigin::Environment));
    }
    if BUILTIN_OPAQUE_OPTIONS.contains(&name) {
        return Some(ConfigOption::opaque(name, None, OptionOrigin::Environment));
    }
    if name == "BUILD_SHARED_LIBS" {
        return Some(ConfigOption::boolean(
            name,
            Some("OFF"),
            OptionOrigin::CacheOverride,
        ));
    }
    None
}

/// A true/false constant per CMake's if() rules, or `None` when the token is
/// a variable reference.
fn classify_constant(text: &str) -> Option<bool> {
    if text.is_empty() {
        return Some(false);
    }
    let upper = text.to_ascii_uppercase();
    match upper.as_str() {
        "TRUE" | "ON" | "YES" | "Y" => return Some(true),
        "FALSE" | "OFF" | "NO" | "N" | "IGNORE" | "NOTFOUND" => return Some(false),
        _ => {}
    }
    if upper.ends_with("-NOTFOUND") {
        return Some(false);
    }
    if let Ok(n) = text.parse::<f64>() {
        return Some(n != 0.0);
    }
    None
}

impl Evaluator<'_> {
    /// Build the condition of one if()/elseif() clause. The result is
    /// relative to `pc` (the caller conjoins); expansion branches inside the
    /// arguments fold into the formula as guarded disjuncts.
    pub(crate) fn build_condition(
        &mut self,
        args: &[Argument],
        span: &SourceSpan,
    ) -> Condition {
        if args.is_empty() {
            return Condition::False;
        }
        let branches = match self.condition_tokens(args) {
            Some(b) => b,
            None => {
                let text = raw_text(args);
                self.warn(Warning::at(
                    WarningCode::OpaqueCondition,
                    format!("condition expansion too branchy; treated as opaque: {text}"),
                    span.clone(),
                ));
                return Condition::opaque(text);
            }
        };
        let mut out = Condition::False;
        for (guard, tokens) in branches {
            let parsed = self.parse_tokens(&tokens, span);
            out = out.or(guard.and(parsed));
        }
        out
    }

    /// Expand the raw arguments into per-guard token lists.
    fn condition_tokens(
        &mut self,
        args: &[Argument],
    ) -> Option<Vec<(Condition, Vec<CondToken>)>> {
        let cap = 32usize;
        let mut acc: Vec<(Condition, Vec<CondToken>)> = vec![(Condition::True, Vec::new())];
        for arg in args {
            let expanded: Vec<(Condition, Vec<CondToken>)> = match arg.kind {
                ArgumentKind::Bracket => vec![(
                    Condition::True,
                    vec![CondToken {
                        text: arg.raw_text.clone(),
                        quoted: true,
                    }],
                )],
                ArgumentKind::Quoted => {
                    self.expand(arg, &Condition::True)
                        .into_iter()
                        .map(|(g, items)| {
                            let text = items.into_iter().next().unwrap_or_default();
                            (
                                g,
                                vec![CondToken {
                                    text,
                                    quoted: true,
                                }],
                            )
                        })
                        .collect()
                }
                ArgumentKind::Unquoted => {
                    if arg.raw_text.contains('$')
                        || arg.raw_text.contains('\\')
                        || arg.raw_text.contains(';')
                    {
                        self.expand(arg, &Condition::True)
                            .into_iter()
                            .map(|(g, items)| {
                                (
                                    g,
                                    items
                                        .into_iter()
                                        .map(|text| CondToken {
                                            text,
                                            quoted: false,
                                        })
                                        .collect(),
                                )
                            })
                            .collect()
                    } else {
                        vec![(
                            Condition::True,
                            vec![CondToken {
                                text: arg.raw_text.clone(),
                                quoted: false,
                            }],
                        )]
                    }
                }
            };
            let mut next = Vec::new();
            for (ga, toks_a) in &acc {
                for (gb, toks_b) in &expanded {
                    let guard = ga.clone().and(gb.clone());
                    if guard.is_false() {
                        continue;
                    }
                    let mut toks = toks_a.clone();
                    toks.extend(toks_b.iter().cloned());
                    next.push((guard, toks));
                    if next.len() > cap {
                        return None;
                    }
                }
            }
            acc = next;
        }
        Some(acc)
    }

    fn parse_tokens(&mut self, tokens: &[CondToken], span: &SourceSpan) -> Condition {
        let mut parser = CondParser {
            ev: self,
            tokens,
            pos: 0,
            failed: false,
        };
        let cond = parser.parse_or();
        if parser.failed || parser.pos != tokens.len() {
            let text = tokens
                .iter()
                .map(|t| t.text.as_str())
                .collect::<Vec<_>>()
                .join(" ");
            self.warn(Warning::at(
                WarningCode::OpaqueCondition,
                format!("condition not understood; treated as opaque: {text}"),
                span.clone(),
            ));
            return Condition::opaque(text);
        }
        cond
    }

    /// Truthiness of an unquoted operand: constant, else dereference.
    fn operand_truthiness(&mut self, token: &CondToken) -> Condition {
        if token.quoted {
            return constant(cmake_truthy(&token.text));
        }
        if let Some(value) = classify_constant(&token.text) {
            return constant(value);
        }
        self.deref_truthiness(&token.text)
    }

    fn deref_truthiness(&mut self, name: &str) -> Condition {
        if let Some(var) = self.env.get_var(name) {
            let alts: Vec<(Condition, bool)> = var
                .alternatives
                .iter()
                .map(|(g, values)| (g.clone(), cmake_truthy(&values.join(";"))))
                .collect();
            return Condition::or_all(
                alts.into_iter()
                    .filter(|(_, truthy)| *truthy)
                    .map(|(g, _)| g),
            );
        }
        if let Some(v) = self.overrides.values.get(name) {
            return constant(cmake_truthy(v));
        }
        let option = match self.env.find_option(name).cloned() {
            Some(o) => Some(o),
            None => match builtin_option(name) {
                Some(o) => {
                    self.env.register_option(o.clone());
                    Some(o)
                }
                None => None,
            },
        };
        match option {
            Some(o) => match &o.domain {
                Domain::Enumerated { values } => Condition::or_all(
                    values
                        .iter()
                        .filter(|v| cmake_truthy(v))
                        .map(|v| Condition::equals(name, v)),
                ),
                _ => Condition::truthy(name),
            },
            // CMake: an undefined name used as an operand is false.
            None => Condition::False,
        }
    }

    /// A comparison operand: literal, variable alternatives, or symbolic
    /// option.
    fn comparand(&mut self, token: &CondToken) -> Comparand {
        if token.quoted {
            return Comparand::Lit(token.text.clone());
        }
        if let Some(var) = self.env.get_var(&token.text) {
            return Comparand::Var(
                var.alternatives
                    .iter()
                    .map(|(g, values)| (g.clone(), values.join(";")))
                    .collect(),
            );
        }
        if let Some(v) = self.overrides.values.get(&token.text) {
            return Comparand::Lit(v.clone());
        }
        if self.env.find_option(&token.text).is_some() {
            return Comparand::Opt(token.text.clone());
        }
        if let Some(o) = builtin_option(&token.text) {
            self.env.register_option(o);
            return Comparand::Opt(token.text.clone());
        }
        // Not a defined variable: CMake compares the literal token text.
        Comparand::Lit(token.text.clone())
    }

    fn streq_condition(&mut self, lhs: Comparand, rhs: Comparand, raw: String) -> Condition {
        use Comparand::*;
        match (lhs, rhs) {
            (Lit(a), Lit(b)) => constant(a == b),
            (Lit(a), Var(vs)) | (Var(vs), Lit(a)) => Condition::or_all(
                vs.into_iter()
                    .filter(|(_, v)| *v == a)
                    .map(|(g, _)| g),
            ),
            (Var(vs), Var(ws)) => {
                let mut out = Condition::False;
                for (g, v) in &vs {
                    for (h, w) in &ws {
                        if v == w {
                            out = out.or(g.clone().and(h.clone()));
                        }
                    }
                }
                out
            }
            (Opt(o), Lit(a)) | (Lit(a), Opt(o)) => Condition::equals(o, a),
            (Opt(o), Var(vs)) | (Var(vs), Opt(o)) => Condition::or_all(
                vs.into_iter().map(|(g, v)| g.and(Condition::equals(&o, v))),
            ),
            (Opt(a), Opt(b)) => {
                if a == b {
                    Condition::True
                } else {
                    self.opaque_predicate(raw)
                }
            }
        }
    }

    fn numeric_equal_condition(&mut self, lhs: Comparand, rhs: Comparand, raw: String) -> Condition {
        let concrete = |c: &Comparand| -> Option<Vec<(Condition, f64)>> {
            match c {
                Comparand::Lit(a) => Some(vec![(Condition::True, a.parse().ok()?)]),
                Comparand::Var(vs) => vs
                    .iter()
                    .map(|(g, v)| Some((g.clone(), v.parse().ok()?)))
                    .collect(),
                Comparand::Opt(_) => None,
            }
        };
        match (concrete(&lhs), concrete(&rhs)) {
            (Some(xs), Some(ys)) => {
                let mut out = Condition::False;
                for (g, x) in &xs {
                    for (h, y) in &ys {
                        if x == y {
                            out = out.or(g.clone().and(h.clone()));
                        }
                    }
                }
                out
            }
            _ => self.opaque_predicate(raw),
        }
    }

    fn defined_condition(&mut self, name: &str) -> Condition {
        if let Some(env_name) = name.strip_prefix("ENV{").and_then(|r| r.strip_suffix('}')) {
            let option_name = format!("ENV{{{env_name}}}");
            self.env.register_option(ConfigOption::opaque(
                &option_name,
                None,
                OptionOrigin::Environment,
            ));
            return Condition::defined(option_name);
        }
        if name.starts_with("CACHE{") {
            return self.opaque_predicate(format!("DEFINED {name}"));
        }
        if self.env.get_var(name).is_some()
            || self.overrides.values.contains_key(name)
            || self.env.find_option(name).is_some()
        {
            return Condition::True;
        }
        if let Some(o) = builtin_option(name) {
            self.env.register_option(o);
            return Condition::True;
        }
        Condition::False
    }

    fn opaque_predicate(&mut self, text: String) -> Condition {
        self.warn(Warning::new(
            WarningCode::OpaqueCondition,
            format!("predicate not interpreted; both outcomes explored: {text}"),
        ));
        Condition::opaque(text)
    }
}

enum Comparand {
    Lit(String),
    Var(Vec<(Condition, String)>),
    Opt(String),
}

fn constant(b: bool) -> Condition {
    if b {
        Condition::True
    } else {
        Condition::False
    }
}

fn raw_text(args: &[Argument]) -> String {
    args.iter()
        .map(|a| match a.kind {
            ArgumentKind::Quoted => format!("\"{}\"", a.raw_text),
            _ => a.raw_text.clone(),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

struct CondParser<'a, 'e, 'p> {
    ev: &'e mut Evaluator<'p>,
    tokens: &'a [CondToken],
    pos: usize,
    failed: bool,
}

impl CondParser<'_, '_, '_> {
    fn peek(&self) -> Option<&CondToken> {
        self.tokens.get(self.pos)
    }

    fn keyword(&self, kw: &str) -> bool {
        self.peek().map(|t| !t.quoted && t.text == kw) == Some(true)
    }

    fn fail(&mut self) -> Condition {
        self.failed = true;
        Condition::False
    }

    fn parse_or(&mut self) -> Condition {
        let mut out = self.parse_and();
        while self.keyword("OR") {
            self.pos += 1;
            let rhs = self.parse_and();
            out = out.or(rhs);
        }
        out
    }

    fn parse_and(&mut self) -> Condition {
        let mut out = self.parse_not();
        while self.keyword("AND") {
            self.pos += 1;
            let rhs = self.parse_not();
            out = out.and(rhs);
        }
        out
    }

    fn parse_not(&mut self) -> Condition {
        if self.keyword("NOT") {
            self.pos += 1;
            return self.parse_not().negate();
        }
        self.parse_comparison()
    }

    fn parse_comparison(&mut self) -> Condition {
        // Unary predicates.
        if let Some(tok) = self.peek() {
            if !tok.quoted {
                let op = tok.text.clone();
                if op == "DEFINED" {
                    self.pos += 1;
                    let Some(name) = self.next_operand() else {
                        return self.fail();
                    };
                    return self.ev.defined_condition(&name.text);
                }
                if UNARY_OPAQUE_OPS.contains(&op.as_str()) {
                    self.pos += 1;
                    let Some(operand) = self.next_operand() else {
                        return self.fail();
                    };
                    return self
                        .ev
                        .opaque_predicate(format!("{op} {}", operand.text));
                }
            }
        }

        let lhs = match self.parse_primary() {
            Some(c) => c,
            None => return self.fail(),
        };

        if let Some(tok) = self.peek() {
            if !tok.quoted && BINARY_OPS.contains(&tok.text.as_str()) {
                let op = tok.text.clone();
                self.pos += 1;
                let Primary::Operand(lhs_tok) = lhs else {
                    return self.fail();
                };
                let Some(rhs_tok) = self.next_operand() else {
                    return self.fail();
                };
                let raw = format!("{} {op} {}", lhs_tok.text, rhs_tok.text);
                let l = self.ev.comparand(&lhs_tok);
                let r = self.ev.comparand(&rhs_tok);
                return match op.as_str() {
                    "STREQUAL" => self.ev.streq_condition(l, r, raw),
                    "EQUAL" => self.ev.numeric_equal_condition(l, r, raw),
                    _ => self.ev.opaque_predicate(raw),
                };
            }
        }

        match lhs {
            Primary::Operand(tok) => self.ev.operand_truthiness(&tok),
            Primary::Group(c) => c,
        }
    }

    fn parse_primary(&mut self) -> Option<Primary> {
        let tok = self.peek()?.clone();
        if !tok.quoted && tok.text == "(" {
            self.pos += 1;
            let inner = self.parse_or();
            if !self.keyword(")") {
                self.failed = true;
                return Some(Primary::Group(Condition::False));
            }
            self.pos += 1;
            return Some(Primary::Group(inner));
        }
        self.pos += 1;
        Some(Primary::Operand(tok))
    }

    fn next_operand(&mut self) -> Option<CondToken> {
        let tok = self.peek()?.clone();
        if !tok.quoted && (tok.text == "(" || tok.text == ")") {
            return None;
        }
        self.pos += 1;
        Some(tok)
    }
}

#[derive(Debug)]
enum Primary {
    Operand(CondToken),
    Group(Condition),
}
