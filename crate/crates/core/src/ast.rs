//! AST for CMake listfiles.
//!
//! The tree keeps arguments unexpanded: `${VAR}` and `$ENV{VAR}` references,
//! escape sequences, and generator expressions stay verbatim until the
//! evaluator runs. Command names are case-insensitive in CMake and stored
//! lower-cased.

use crate::span::SourceSpan;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArgumentKind {
    Unquoted,
    Quoted,
    Bracket,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Argument {
    pub kind: ArgumentKind,
    /// Unexpanded source text (no surrounding quotes/brackets).
    pub raw_text: String,
    pub span: SourceSpan,
}

impl Argument {
    pub fn unquoted(text: impl Into<String>, span: SourceSpan) -> Self {
        Argument {
            kind: ArgumentKind::Unquoted,
            raw_text: text.into(),
            span,
        }
    }

    /// Source form of the argument, usable to re-serialize an invocation.
    pub fn to_source(&self) -> String {
        match self.kind {
            ArgumentKind::Unquoted => self.raw_text.clone(),
            ArgumentKind::Quoted => format!("\"{}\"", self.raw_text),
            ArgumentKind::Bracket => {
                // The lexer closes at the first `]=*]`; pick an `=` level
                // whose closer appears in content+closer only at the end.
                let mut eqs = 0;
                loop {
                    let closer = format!("]{}]", "=".repeat(eqs));
                    let probe = format!("{}{closer}", self.raw_text);
                    if probe.find(&closer) == Some(self.raw_text.len()) {
                        break;
                    }
                    eqs += 1;
                }
                let pad = "=".repeat(eqs);
                format!("[{pad}[{}]{pad}]", self.raw_text)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandInvocation {
    /// Lower-cased command name.
    pub name: String,
    pub args: Vec<Argument>,
    pub span: SourceSpan,
}

impl CommandInvocation {
    pub fn to_source(&self) -> String {
        let args: Vec<String> = self.args.iter().map(Argument::to_source).collect();
        format!("{}({})", self.name, args.join(" "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IfClause {
    /// Raw condition argument list of the `if`/`elseif`.
    pub condition: Vec<Argument>,
    pub body: Vec<AstNode>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IfBlock {
    pub clauses: Vec<IfClause>,
    pub else_body: Vec<AstNode>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForeachBlock {
    pub header: Vec<Argument>,
    pub body: Vec<AstNode>,
    pub span: SourceSpan,
}

/// `while` blocks are parsed for balance but not interpreted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WhileBlock {
    pub header: Vec<Argument>,
    pub body: Vec<AstNode>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoutineKind {
    Function,
    Macro,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoutineDef {
    pub kind: RoutineKind,
    /// Lower-cased routine name (calls are case-insensitive).
    pub name: String,
    pub params: Vec<String>,
    pub body: Vec<AstNode>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AstNode {
    Command(CommandInvocation),
    If(IfBlock),
    Foreach(ForeachBlock),
    While(WhileBlock),
    Routine(RoutineDef),
}

impl AstNode {
    pub fn span(&self) -> &SourceSpan {
        match self {
            AstNode::Command(c) => &c.span,
            AstNode::If(b) => &b.span,
            AstNode::Foreach(b) => &b.span,
            AstNode::While(b) => &b.span,
            AstNode::Routine(r) => &r.span,
        }
    }
}
