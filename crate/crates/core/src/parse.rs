//! Parser: folds the token stream into nested block structures.
//!
//! Unknown commands are preserved as plain invocations and never rejected
//! here; only structural problems (unbalanced blocks, misplaced else) are
//! errors.

use thiserror::Error;

use crate::ast::*;
use crate::lex::{tokenize, LexError, Token, TokenKind};
use crate::span::SourceSpan;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("{found} at {span} has no matching {expected}")]
    UnbalancedBlock {
        span: SourceSpan,
        found: String,
        expected: String,
    },
    #[error("{found} at {span} is not inside an if() block")]
    MisplacedElse { span: SourceSpan, found: String },
    #[error("malformed command at {span}: {message}")]
    MalformedCommand { span: SourceSpan, message: String },
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum FrontendError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Tokenize and parse one listfile.
pub fn parse_source(text: &str, file_path: &str) -> Result<Vec<AstNode>, FrontendError> {
    let tokens = tokenize(text, file_path)?;
    Ok(parse(&tokens)?)
}

/// Parse a token stream into an AST.
pub fn parse(tokens: &[Token]) -> Result<Vec<AstNode>, ParseError> {
    let mut stream = TokenStream { tokens, pos: 0 };
    let mut parser = Parser {
        stack: vec![Frame::top()],
    };
    while let Some(invocation) = stream.next_invocation()? {
        parser.feed(invocation)?;
    }
    parser.finish()
}

struct TokenStream<'a> {
    tokens: &'a [Token],
    pos: usize,
}

impl<'a> TokenStream<'a> {
    fn skip_newlines(&mut self) {
        while matches!(
            self.tokens.get(self.pos).map(|t| &t.kind),
            Some(TokenKind::Newline)
        ) {
            self.pos += 1;
        }
    }

    /// Reads one raw `name(args...)` invocation, or None at end of input.
    fn next_invocation(&mut self) -> Result<Option<CommandInvocation>, ParseError> {
        self.skip_newlines();
        let tok = match self.tokens.get(self.pos) {
            None => return Ok(None),
            Some(t) => t,
        };
        let (name, span) = match &tok.kind {
            TokenKind::Word(w) => (w.to_ascii_lowercase(), tok.span.clone()),
            _ => {
                return Err(ParseError::MalformedCommand {
                    span: tok.span.clone(),
                    message: "expected a command name".into(),
                })
            }
        };
        self.pos += 1;
        self.skip_newlines();
        match self.tokens.get(self.pos).map(|t| &t.kind) {
            Some(TokenKind::LParen) => self.pos += 1,
            _ => {
                return Err(ParseError::MalformedCommand {
                    span,
                    message: format!("expected '(' after command name '{name}'"),
                })
            }
        }
        let mut args = Vec::new();
        let mut depth = 0usize;
        loop {
            let tok = self.tokens.get(self.pos).ok_or_else(|| {
                ParseError::MalformedCommand {
                    span: span.clone(),
                    message: format!("unterminated argument list of '{name}'"),
                }
            })?;
            self.pos += 1;
            match &tok.kind {
                TokenKind::Newline => {}
                TokenKind::LParen => {
                    // Nested parens are preserved as literal arguments; the
                    // if() condition grammar relies on this.
                    depth += 1;
                    args.push(Argument::unquoted("(", tok.span.clone()));
                }
                TokenKind::RParen => {
                    if depth == 0 {
                        break;
                    }
                    depth -= 1;
                    args.push(Argument::unquoted(")", tok.span.clone()));
                }
                TokenKind::Word(w) => args.push(Argument {
                    kind: ArgumentKind::Unquoted,
                    raw_text: w.clone(),
                    span: tok.span.clone(),
                }),
                TokenKind::Quoted(q) => args.push(Argument {
                    kind: ArgumentKind::Quoted,
                    raw_text: q.clone(),
                    span: tok.span.clone(),
                }),
                TokenKind::Bracket(b) => args.push(Argument {
                    kind: ArgumentKind::Bracket,
                    raw_text: b.clone(),
                    span: tok.span.clone(),
                }),
            }
        }
        Ok(Some(CommandInvocation { name, args, span }))
    }
}

enum Frame {
    Top(Vec<AstNode>),
    If {
        span: SourceSpan,
        clauses: Vec<IfClause>,
        current_condition: Vec<Argument>,
        current_span: SourceSpan,
        current_body: Vec<AstNode>,
        in_else: bool,
        else_body: Vec<AstNode>,
    },
    Foreach {
        span: SourceSpan,
        header: Vec<Argument>,
        body: Vec<AstNode>,
    },
    While {
        span: SourceSpan,
        header: Vec<Argument>,
        body: Vec<AstNode>,
    },
    Routine {
        span: SourceSpan,
        kind: RoutineKind,
        name: String,
        params: Vec<String>,
        body: Vec<AstNode>,
    },
}

impl Frame {
    fn top() -> Self {
        Frame::Top(Vec::new())
    }

    fn opener(&self) -> &'static str {
        match self {
            Frame::Top(_) => "file",
            Frame::If { .. } => "if()",
            Frame::Foreach { .. } => "foreach()",
            Frame::While { .. } => "while()",
            Frame::Routine { kind, .. } => match kind {
                RoutineKind::Function => "function()",
                RoutineKind::Macro => "macro()",
            },
        }
    }

    fn closer(&self) -> &'static str {
        match self {
            Frame::Top(_) => "end of file",
            Frame::If { .. } => "endif()",
            Frame::Foreach { .. } => "endforeach()",
            Frame::While { .. } => "endwhile()",
            Frame::Routine { kind, .. } => match kind {
                RoutineKind::Function => "endfunction()",
                RoutineKind::Macro => "endmacro()",
            },
        }
    }
}

struct Parser {
    stack: Vec<Frame>,
}

impl Parser {
    fn body_mut(&mut self) -> &mut Vec<AstNode> {
        match self.stack.last_mut().expect("stack never empty") {
            Frame::Top(body) => body,
            Frame::If {
                in_else,
                else_body,
                current_body,
                ..
            } => {
                if *in_else {
                    else_body
                } else {
                    current_body
                }
            }
            Frame::Foreach { body, .. } => body,
            Frame::While { body, .. } => body,
            Frame::Routine { body, .. } => body,
        }
    }

    fn feed(&mut self, cmd: CommandInvocation) -> Result<(), ParseError> {
        match cmd.name.as_str() {
            "if" => {
                self.stack.push(Frame::If {
                    span: cmd.span.clone(),
                    clauses: Vec::new(),
                    current_condition: cmd.args,
                    current_span: cmd.span,
                    current_body: Vec::new(),
                    in_else: false,
                    else_body: Vec::new(),
                });
                Ok(())
            }
            "elseif" => match self.stack.last_mut() {
                Some(Frame::If {
                    clauses,
                    current_condition,
                    current_span,
                    current_body,
                    in_else,
                    ..
                }) if !*in_else => {
                    clauses.push(IfClause {
                        condition: std::mem::take(current_condition),
                        body: std::mem::take(current_body),
                        span: std::mem::replace(current_span, cmd.span),
                    });
                    *current_condition = cmd.args;
                    Ok(())
                }
                _ => Err(ParseError::MisplacedElse {
                    span: cmd.span,
                    found: "elseif()".into(),
                }),
            },
            "else" => match self.stack.last_mut() {
                Some(Frame::If {
                    clauses,
                    current_condition,
                    current_span,
                    current_body,
                    in_else,
                    ..
                }) if !*in_else => {
                    clauses.push(IfClause {
                        condition: std::mem::take(current_condition),
                        body: std::mem::take(current_body),
                        span: std::mem::replace(current_span, cmd.span),
                    });
                    *in_else = true;
                    Ok(())
                }
                _ => Err(ParseError::MisplacedElse {
                    span: cmd.span,
                    found: "else()".into(),
                }),
            },
            "endif" => self.close(cmd, |frame| match frame {
                Frame::If {
                    span,
                    mut clauses,
                    current_condition,
                    current_span,
                    current_body,
                    in_else,
                    else_body,
                } => {
                    if !in_else {
                        clauses.push(IfClause {
                            condition: current_condition,
                            body: current_body,
                            span: current_span,
                        });
                    }
                    Some(AstNode::If(IfBlock {
                        clauses,
                        else_body,
                        span,
                    }))
                }
                _ => None,
            }),
            "endforeach" => self.close(cmd, |frame| match frame {
                Frame::Foreach { span, header, body } => {
                    Some(AstNode::Foreach(ForeachBlock { header, body, span }))
                }
                _ => None,
            }),
            "endwhile" => self.close(cmd, |frame| match frame {
                Frame::While { span, header, body } => {
                    Some(AstNode::While(WhileBlock { header, body, span }))
                }
                _ => None,
            }),
            "endfunction" | "endmacro" => {
                let want = if cmd.name == "endfunction" {
                    RoutineKind::Function
                } else {
                    RoutineKind::Macro
                };
                self.close(cmd, move |frame| match frame {
                    Frame::Routine {
                        span,
                        kind,
                        name,
                        params,
                        body,
                    } if kind == want => Some(AstNode::Routine(RoutineDef {
                        kind,
                        name,
                        params,
                        body,
                        span,
                    })),
                    _ => None,
                })
            }
            "foreach" => {
                self.stack.push(Frame::Foreach {
                    span: cmd.span,
                    header: cmd.args,
                    body: Vec::new(),
                });
                Ok(())
            }
            "while" => {
                self.stack.push(Frame::While {
                    span: cmd.span,
                    header: cmd.args,
                    body: Vec::new(),
                });
                Ok(())
            }
            "function" | "macro" => {
                let kind = if cmd.name == "function" {
                    RoutineKind::Function
                } else {
                    RoutineKind::Macro
                };
                let mut args = cmd.args.into_iter();
                let name = match args.next() {
                    Some(a) => a.raw_text.to_ascii_lowercase(),
                    None => {
                        return Err(ParseError::MalformedCommand {
                            span: cmd.span,
                            message: format!("{}() requires a name", cmd.name),
                        })
                    }
                };
                self.stack.push(Frame::Routine {
                    span: cmd.span,
                    kind,
                    name,
                    params: args.map(|a| a.raw_text).collect(),
                    body: Vec::new(),
                });
                Ok(())
            }
            _ => {
                self.body_mut().push(AstNode::Command(cmd));
                Ok(())
            }
        }
    }

    fn close(
        &mut self,
        cmd: CommandInvocation,
        build: impl FnOnce(Frame) -> Option<AstNode>,
    ) -> Result<(), ParseError> {
        if self.stack.len() < 2 {
            return Err(ParseError::UnbalancedBlock {
                span: cmd.span,
                found: format!("{}()", cmd.name),
                expected: "matching block opener".into(),
            });
        }
        let frame = self.stack.pop().expect("checked above");
        let opener = frame.opener();
        match build(frame) {
            Some(node) => {
                self.body_mut().push(node);
                Ok(())
            }
            None => Err(ParseError::UnbalancedBlock {
                span: cmd.span,
                found: format!("{}()", cmd.name),
                expected: format!("closer for open {opener}"),
            }),
        }
    }

    fn finish(mut self) -> Result<Vec<AstNode>, ParseError> {
        match self.stack.pop().expect("stack never empty") {
            Frame::Top(body) if self.stack.is_empty() => Ok(body),
            frame => {
                let span = match &frame {
                    Frame::If { span, .. }
                    | Frame::Foreach { span, .. }
                    | Frame::While { span, .. }
                    | Frame::Routine { span, .. } => span.clone(),
                    Frame::Top(_) => SourceSpan::new("<input>", 1, 1),
                };
                Err(ParseError::UnbalancedBlock {
                    span,
                    found: frame.opener().to_string(),
                    expected: frame.closer().to_string(),
                })
            }
        }
    }
}
