//! Tokenizer for the CMake language core.
//!
//! Produces a flat token stream: words (command names and unquoted
//! arguments), quoted arguments, bracket arguments, parentheses, and newline
//! separators. Comments are consumed here and never reach the parser.
//! Escape sequences inside arguments are preserved verbatim; nothing is
//! expanded at this stage.

use thiserror::Error;

use crate::span::SourceSpan;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    /// Command name or unquoted argument. `${VAR}` references stay as text.
    Word(String),
    /// Contents of a `"..."` argument, escapes untouched.
    Quoted(String),
    /// Contents of a `[=*[...]=*]` argument. Never subject to expansion.
    Bracket(String),
    LParen,
    RParen,
    Newline,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum LexError {
    #[error("unterminated quoted argument starting at {0}")]
    UnterminatedString(SourceSpan),
    #[error("unterminated bracket starting at {0}")]
    UnterminatedBracket(SourceSpan),
}

struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    column: u32,
    file: &'a str,
}

impl<'a> Cursor<'a> {
    fn new(text: &str, file: &'a str) -> Self {
        let text = text.strip_prefix('\u{feff}').unwrap_or(text);
        Cursor {
            chars: text.chars().collect(),
            pos: 0,
            line: 1,
            column: 1,
            file,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn span(&self) -> SourceSpan {
        SourceSpan::new(self.file, self.line, self.column)
    }
}

/// Tokenize one listfile. Total: any byte sequence (already decoded to a
/// string) yields either tokens or a structured error.
pub fn tokenize(text: &str, file_path: &str) -> Result<Vec<Token>, LexError> {
    let mut cur = Cursor::new(text, file_path);
    let mut tokens = Vec::new();

    while let Some(c) = cur.peek() {
        match c {
            ' ' | '\t' | '\r' => {
                cur.bump();
            }
            '\n' => {
                let span = cur.span();
                cur.bump();
                tokens.push(Token {
                    kind: TokenKind::Newline,
                    span,
                });
            }
            '#' => {
                let span = cur.span();
                cur.bump();
                if let Some(open) = bracket_open_len(&cur) {
                    consume_bracket(&mut cur, open, span)?;
                } else {
                    while let Some(c) = cur.peek() {
                        if c == '\n' {
                            break;
                        }
                        cur.bump();
                    }
                }
            }
            '(' => {
                let span = cur.span();
                cur.bump();
                tokens.push(Token {
                    kind: TokenKind::LParen,
                    span,
                });
            }
            ')' => {
                let span = cur.span();
                cur.bump();
                tokens.push(Token {
                    kind: TokenKind::RParen,
                    span,
                });
            }
            '"' => {
                let span = cur.span();
                cur.bump();
                let text = lex_quoted(&mut cur, &span)?;
                tokens.push(Token {
                    kind: TokenKind::Quoted(text),
                    span,
                });
            }
            '[' => {
                let span = cur.span();
                if let Some(open) = bracket_open_len(&cur) {
                    let text = consume_bracket(&mut cur, open, span.clone())?;
                    tokens.push(Token {
                        kind: TokenKind::Bracket(text),
                        span,
                    });
                } else {
                    let word = lex_word(&mut cur, &span)?;
                    tokens.push(Token {
                        kind: TokenKind::Word(word),
                        span,
                    });
                }
            }
            _ => {
                let span = cur.span();
                let word = lex_word(&mut cur, &span)?;
                tokens.push(Token {
                    kind: TokenKind::Word(word),
                    span,
                });
            }
        }
    }
    Ok(tokens)
}

/// If the cursor sits on `[` `=`* `[`, returns the number of `=` signs.
fn bracket_open_len(cur: &Cursor) -> Option<usize> {
    if cur.peek() != Some('[') {
        return None;
    }
    let mut eqs = 0;
    loop {
        match cur.peek_at(1 + eqs) {
            Some('=') => eqs += 1,
            Some('[') => return Some(eqs),
            _ => return None,
        }
    }
}

/// Consumes a bracket argument/comment `[=*[ ... ]=*]`, returning the
/// enclosed text. The cursor must sit on the opening `[`.
fn consume_bracket(cur: &mut Cursor, eqs: usize, start: SourceSpan) -> Result<String, LexError> {
    for _ in 0..eqs + 2 {
        cur.bump();
    }
    // A newline immediately after the opener is dropped, per CMake.
    if cur.peek() == Some('\n') {
        cur.bump();
    }
    let mut text = String::new();
    loop {
        match cur.peek() {
            None => return Err(LexError::UnterminatedBracket(start)),
            Some(']') => {
                let mut k = 1;
                let mut matched = true;
                for _ in 0..eqs {
                    if cur.peek_at(k) != Some('=') {
                        matched = false;
                        break;
                    }
                    k += 1;
                }
                if matched && cur.peek_at(k) == Some(']') {
                    for _ in 0..eqs + 2 {
                        cur.bump();
                    }
                    return Ok(text);
                }
                text.push(cur.bump().unwrap());
            }
            Some(_) => text.push(cur.bump().unwrap()),
        }
    }
}

fn lex_quoted(cur: &mut Cursor, start: &SourceSpan) -> Result<String, LexError> {
    let mut text = String::new();
    loop {
        match cur.peek() {
            None => return Err(LexError::UnterminatedString(start.clone())),
            Some('"') => {
                cur.bump();
                return Ok(text);
            }
            Some('\\') => {
                text.push(cur.bump().unwrap());
                match cur.bump() {
                    Some(c) => text.push(c),
                    None => return Err(LexError::UnterminatedString(start.clone())),
                }
            }
            Some(_) => text.push(cur.bump().unwrap()),
        }
    }
}

fn lex_word(cur: &mut Cursor, start: &SourceSpan) -> Result<String, LexError> {
    let mut text = String::new();
    loop {
        match cur.peek() {
            None | Some(' ') | Some('\t') | Some('\r') | Some('\n') | Some('(') | Some(')')
            | Some('#') => return Ok(text),
            Some('\\') => {
                text.push(cur.bump().unwrap());
                if let Some(c) = cur.bump() {
                    text.push(c);
                }
            }
            // Legacy unquoted arguments may embed quoted sections
            // (e.g. -DFOO="bar baz"); keep the quotes in the raw text.
            Some('"') => {
                if text.is_empty() {
                    return Ok(text);
                }
                text.push(cur.bump().unwrap());
                loop {
                    match cur.peek() {
                        None => return Err(LexError::UnterminatedString(start.clone())),
                        Some('\\') => {
                            text.push(cur.bump().unwrap());
                            if let Some(c) = cur.bump() {
                                text.push(c);
                            }
                        }
                        Some('"') => {
                            text.push(cur.bump().unwrap());
                            break;
                        }
                        Some(_) => text.push(cur.bump().unwrap()),
                    }
                }
            }
            Some(_) => text.push(cur.bump().unwrap()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(text: &str) -> Vec<TokenKind> {
        tokenize(text, "t.cmake")
            .unwrap()
            .into_iter()
            .map(|t| t.kind)
            .collect()
    }

    fn word(s: &str) -> TokenKind {
        TokenKind::Word(s.to_string())
    }

    #[test]
    fn command_invocation() {
        assert_eq!(
            kinds("add_executable(etl main.c)"),
            vec![
                word("add_executable"),
                TokenKind::LParen,
                word("etl"),
                word("main.c"),
                TokenKind::RParen,
            ]
        );
    }

    #[test]
    fn quoted_argument_and_comment() {
        assert_eq!(
            kinds("set(A \"x y\") # note"),
            vec![
                word("set"),
                TokenKind::LParen,
                word("A"),
                TokenKind::Quoted("x y".into()),
                TokenKind::RParen,
            ]
        );
    }

    #[test]
    fn bracket_argument_suppresses_expansion() {
        assert_eq!(
            kinds("set(A [[raw ${X}]])"),
            vec![
                word("set"),
                TokenKind::LParen,
                word("A"),
                TokenKind::Bracket("raw ${X}".into()),
                TokenKind::RParen,
            ]
        );
    }

    #[test]
    fn bracket_with_equals_level() {
        assert_eq!(
            kinds("set(A [=[a ]] b]=])"),
            vec![
                word("set"),
                TokenKind::LParen,
                word("A"),
                TokenKind::Bracket("a ]] b".into()),
                TokenKind::RParen,
            ]
        );
    }

    #[test]
    fn bracket_comment_dropped() {
        assert_eq!(
            kinds("#[[ a\nmultiline ]=] comment ]]\nfoo()"),
            vec![
                TokenKind::Newline,
                word("foo"),
                TokenKind::LParen,
                TokenKind::RParen
            ]
        );
    }

    #[test]
    fn quoted_escapes_kept_raw() {
        assert_eq!(
            kinds(r#"set(A "x\"y\\z")"#),
            vec![
                word("set"),
                TokenKind::LParen,
                word("A"),
                TokenKind::Quoted(r#"x\"y\\z"#.into()),
                TokenKind::RParen,
            ]
        );
    }

    #[test]
    fn newline_separators_tokenized() {
        let ks = kinds("a()\nb()");
        assert!(ks.contains(&TokenKind::Newline));
        assert_eq!(ks.iter().filter(|k| matches!(k, TokenKind::Word(_))).count(), 2);
    }

    #[test]
    fn unterminated_string() {
        let err = tokenize("set(A \"oops", "t.cmake").unwrap_err();
        assert!(matches!(err, LexError::UnterminatedString(_)));
    }

    #[test]
    fn unterminated_bracket() {
        let err = tokenize("set(A [[oops)", "t.cmake").unwrap_err();
        assert!(matches!(err, LexError::UnterminatedBracket(_)));
    }

    #[test]
    fn escaped_semicolon_and_space_in_word() {
        assert_eq!(
            kinds(r"set(A a\ b)"),
            vec![
                word("set"),
                TokenKind::LParen,
                word("A"),
                word(r"a\ b"),
                TokenKind::RParen,
            ]
        );
    }

    #[test]
    fn legacy_embedded_quotes() {
        assert_eq!(
            kinds(r#"add_definitions(-DVERSION="1.0 beta")"#),
            vec![
                word("add_definitions"),
                TokenKind::LParen,
                word(r#"-DVERSION="1.0 beta""#),
                TokenKind::RParen,
            ]
        );
    }

    #[test]
    fn spans_are_one_based() {
        let toks = tokenize("a(b)", "f.cmake").unwrap();
        assert_eq!(toks[0].span, SourceSpan::new("f.cmake", 1, 1));
        assert_eq!(toks[2].span, SourceSpan::new("f.cmake", 1, 3));
    }

    #[test]
    fn arbitrary_bytes_do_not_panic() {
        // Totality: lexing never panics on odd input.
        let inputs = ["\\", "\"", "[", "[[", "[=", "((((", "#", "\u{0}", "a\\"];
        for i in inputs {
            let _ = tokenize(i, "x");
        }
    }
}
