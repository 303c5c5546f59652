//! Canonical text form of conditions, used in JSON reports and DOT labels.
//!
//! Grammar: `TRUE`, `FALSE`, `X`, `X=="v"`, `DEFINED(X)`, `OPAQUE#id`, `!c`,
//! `(c && c && ...)`, `(c || c || ...)`. Environment options render as
//! `ENV{NAME}`.

use std::collections::BTreeMap;
use std::fmt::{self, Display};
use std::str::FromStr;

use thiserror::Error;

use super::{Atom, Condition};

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Truthy { option } => f.write_str(option),
            Atom::Equals { option, literal } => {
                write!(f, "{option}==\"{}\"", escape_literal(literal))
            }
            Atom::Defined { option } => write!(f, "DEFINED({option})"),
            Atom::Opaque { id, .. } => write!(f, "OPAQUE#{id}"),
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::True => f.write_str("TRUE"),
            Condition::False => f.write_str("FALSE"),
            Condition::Atom(a) => a.fmt(f),
            Condition::Not(inner) => write!(f, "!{inner}"),
            Condition::And(cs) => write_nary(f, cs, " && "),
            Condition::Or(cs) => write_nary(f, cs, " || "),
        }
    }
}

fn write_nary(f: &mut fmt::Formatter<'_>, cs: &[Condition], sep: &str) -> fmt::Result {
    f.write_str("(")?;
    for (i, c) in cs.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        c.fmt(f)?;
    }
    f.write_str(")")
}

fn escape_literal(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("invalid condition at byte {position}: {message}")]
pub struct CondParseError {
    pub message: String,
    pub position: usize,
}

impl FromStr for Condition {
    type Err = CondParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_condition_with_sources(s, &BTreeMap::new())
    }
}

/// Parse a canonical condition string, reattaching opaque source text from
/// `sources` (id → original predicate text) where available.
pub(crate) fn parse_condition_with_sources(
    s: &str,
    sources: &BTreeMap<String, String>,
) -> Result<Condition, CondParseError> {
    let mut p = Parser {
        bytes: s.as_bytes(),
        pos: 0,
        sources,
    };
    let cond = p.expr()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(p.error("trailing input"));
    }
    Ok(cond)
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
    sources: &'a BTreeMap<String, String>,
}

impl<'a> Parser<'a> {
    fn error(&self, message: impl Into<String>) -> CondParseError {
        CondParseError {
            message: message.into(),
            position: self.pos,
        }
    }

    fn skip_ws(&mut self) {
        while self.bytes.get(self.pos).is_some_and(|b| b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, b: u8) -> Result<(), CondParseError> {
        if self.eat(b) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{}'", b as char)))
        }
    }

    fn expr(&mut self) -> Result<Condition, CondParseError> {
        self.skip_ws();
        match self.peek() {
            Some(b'!') => {
                self.pos += 1;
                Ok(self.expr()?.negate())
            }
            Some(b'(') => {
                self.pos += 1;
                let first = self.expr()?;
                self.skip_ws();
                if self.eat(b')') {
                    return Ok(first);
                }
                let op = self.operator()?;
                let mut children = vec![first, self.expr()?];
                loop {
                    self.skip_ws();
                    if self.eat(b')') {
                        break;
                    }
                    let next_op = self.operator()?;
                    if next_op != op {
                        return Err(self.error("mixed && and || inside one group"));
                    }
                    children.push(self.expr()?);
                }
                Ok(match op {
                    b'&' => Condition::and_all(children),
                    _ => Condition::or_all(children),
                })
            }
            Some(b) if is_name_byte(b) => self.atom_or_keyword(),
            Some(b) => Err(self.error(format!("unexpected character '{}'", b as char))),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn operator(&mut self) -> Result<u8, CondParseError> {
        self.skip_ws();
        match self.peek() {
            Some(b'&') => {
                self.expect(b'&')?;
                self.expect(b'&')?;
                Ok(b'&')
            }
            Some(b'|') => {
                self.expect(b'|')?;
                self.expect(b'|')?;
                Ok(b'|')
            }
            _ => Err(self.error("expected '&&' or '||'")),
        }
    }

    fn atom_or_keyword(&mut self) -> Result<Condition, CondParseError> {
        let name = self.name()?;
        match name.as_str() {
            "TRUE" => return Ok(Condition::True),
            "FALSE" => return Ok(Condition::False),
            "DEFINED" if self.peek() == Some(b'(') => {
                self.pos += 1;
                let inner = self.name()?;
                self.expect(b')')?;
                return Ok(Condition::defined(inner));
            }
            "OPAQUE" if self.peek() == Some(b'#') => {
                self.pos += 1;
                let start = self.pos;
                while self.peek().is_some_and(|b| b.is_ascii_hexdigit()) {
                    self.pos += 1;
                }
                if self.pos == start {
                    return Err(self.error("expected opaque id"));
                }
                let id = std::str::from_utf8(&self.bytes[start..self.pos])
                    .expect("hex digits are utf-8")
                    .to_string();
                let text = self.sources.get(&id).cloned().unwrap_or_default();
                return Ok(Condition::Atom(Atom::opaque_from_id(id, text)));
            }
            _ => {}
        }
        if self.peek() == Some(b'=') && self.bytes.get(self.pos + 1) == Some(&b'=') {
            self.pos += 2;
            let literal = self.quoted_literal()?;
            return Ok(Condition::equals(name, literal));
        }
        Ok(Condition::truthy(name))
    }

    /// An option name, including the `ENV{...}` form.
    fn name(&mut self) -> Result<String, CondParseError> {
        let start = self.pos;
        while self.peek().is_some_and(is_name_byte) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.error("expected an option name"));
        }
        let mut name = std::str::from_utf8(&self.bytes[start..self.pos])
            .map_err(|_| self.error("option name is not utf-8"))?
            .to_string();
        if name == "ENV" && self.peek() == Some(b'{') {
            self.pos += 1;
            let inner_start = self.pos;
            while self.peek().is_some_and(|b| b != b'}') {
                self.pos += 1;
            }
            let inner = std::str::from_utf8(&self.bytes[inner_start..self.pos])
                .map_err(|_| self.error("option name is not utf-8"))?;
            name = format!("ENV{{{inner}}}");
            self.expect(b'}')?;
        }
        Ok(name)
    }

    fn quoted_literal(&mut self) -> Result<String, CondParseError> {
        self.expect(b'"')?;
        let mut out = Vec::new();
        loop {
            match self.peek() {
                None => return Err(self.error("unterminated string literal")),
                Some(b'"') => {
                    self.pos += 1;
                    break;
                }
                Some(b'\\') => {
                    self.pos += 1;
                    match self.peek() {
                        Some(c @ (b'"' | b'\\')) => {
                            out.push(c);
                            self.pos += 1;
                        }
                        _ => return Err(self.error("invalid escape")),
                    }
                }
                Some(c) => {
                    out.push(c);
                    self.pos += 1;
                }
            }
        }
        String::from_utf8(out).map_err(|_| self.error("literal is not utf-8"))
    }
}

fn is_name_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || matches!(b, b'_' | b'.' | b'+' | b'-')
}
