//! Token-level front end for the supported C++ subset.
//!
//! Comments and preprocessor directives are retained as tokens so that line
//! numbers stay exact, but they are excluded from parsing.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::model::SourceLocation;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Identifier,
    Keyword,
    Literal,
    Punctuator,
    Comment,
    Preprocessor,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub location: SourceLocation,
}

impl Token {
    pub fn is_code(&self) -> bool {
        !matches!(self.kind, TokenKind::Comment | TokenKind::Preprocessor)
    }
}

/// Lexical error with the offending position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub message: String,
    pub location: SourceLocation,
}

impl fmt::Display for LexError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "lex error at {}: {}", self.location, self.message)
    }
}

const KEYWORDS: &[&str] = &[
    "alignas",
    "alignof",
    "auto",
    "bool",
    "break",
    "case",
    "catch",
    "char",
    "class",
    "const",
    "constexpr",
    "continue",
    "decltype",
    "default",
    "delete",
    "do",
    "double",
    "else",
    "enum",
    "explicit",
    "extern",
    "false",
    "final",
    "float",
    "for",
    "friend",
    "goto",
    "if",
    "inline",
    "int",
    "long",
    "mutable",
    "namespace",
    "new",
    "noexcept",
    "nullptr",
    "operator",
    "override",
    "private",
    "protected",
    "public",
    "return",
    "short",
    "signed",
    "sizeof",
    "static",
    "struct",
    "switch",
    "template",
    "this",
    "throw",
    "true",
    "try",
    "typedef",
    "typename",
    "union",
    "unsigned",
    "using",
    "virtual",
    "void",
    "volatile",
    "wchar_t",
    "while",
];

// Longest-match first.
const PUNCTUATORS: &[&str] = &[
    "<<=", ">>=", "->*", "...", "::", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&",
    "||", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "~", "!", "%", "^", "&", "*", "(", ")",
    "-", "+", "=", "{", "}", "[", "]", "|", ";", ":", "<", ">", ",", ".", "/", "?",
];

struct Cursor {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    col: u32,
}

impl Cursor {
    fn new(source: &str) -> Self {
        Self {
            chars: source.chars().collect(),
            pos: 0,
            line: 1,
            col: 1,
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
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn here(&self) -> (u32, u32) {
        (self.line, self.col)
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Tokenizes one source file. Comment and preprocessor tokens are retained;
/// locations are exact (1-based, inclusive).
pub fn tokenize(source: &str, _file_id: &str) -> Result<Vec<Token>, LexError> {
    let mut cur = Cursor::new(source);
    let mut tokens = Vec::new();
    let mut at_line_start = true;

    while let Some(c) = cur.peek() {
        if c == '\n' {
            cur.bump();
            at_line_start = true;
            continue;
        }
        if c.is_whitespace() {
            cur.bump();
            continue;
        }

        let (start_line, start_col) = cur.here();

        // Preprocessor directive: '#' first on its line, runs to end of
        // line, honoring backslash continuations.
        if c == '#' && at_line_start {
            let mut text = String::new();
            loop {
                match cur.peek() {
                    None => break,
                    Some('\n') => {
                        if text.ends_with('\\') {
                            text.pop();
                            cur.bump();
                            continue;
                        }
                        break;
                    }
                    Some(ch) => {
                        text.push(ch);
                        cur.bump();
                    }
                }
            }
            let (el, ec) = last_pos(&cur);
            tokens.push(Token {
                kind: TokenKind::Preprocessor,
                text,
                location: SourceLocation::new(start_line, start_col, el, ec),
            });
            at_line_start = true;
            continue;
        }
        at_line_start = false;

        if c == '/' && cur.peek_at(1) == Some('/') {
            let mut text = String::new();
            while let Some(ch) = cur.peek() {
                if ch == '\n' {
                    break;
                }
                text.push(ch);
                cur.bump();
            }
            let (el, ec) = last_pos(&cur);
            tokens.push(Token {
                kind: TokenKind::Comment,
                text,
                location: SourceLocation::new(start_line, start_col, el, ec),
            });
            continue;
        }

        if c == '/' && cur.peek_at(1) == Some('*') {
            let mut text = String::new();
            text.push(cur.bump().unwrap());
            text.push(cur.bump().unwrap());
            let mut closed = false;
            while let Some(ch) = cur.bump() {
                text.push(ch);
                if text.ends_with("*/") {
                    closed = true;
                    break;
                }
            }
            if !closed {
                return Err(LexError {
                    message: "unterminated block comment".to_string(),
                    location: SourceLocation::point(start_line, start_col),
                });
            }
            let (el, ec) = last_pos(&cur);
            tokens.push(Token {
                kind: TokenKind::Comment,
                text,
                location: SourceLocation::new(start_line, start_col, el, ec),
            });
            continue;
        }

        if c == '"' || c == '\'' {
            let quote = c;
            let mut text = String::new();
            text.push(cur.bump().unwrap());
            let mut closed = false;
            while let Some(ch) = cur.peek() {
                if ch == '\n' {
                    break;
                }
                text.push(ch);
                cur.bump();
                if ch == '\\' {
                    if let Some(esc) = cur.bump() {
                        text.push(esc);
                    }
                    continue;
                }
                if ch == quote {
                    closed = true;
                    break;
                }
            }
            if !closed {
                let what = if quote == '"' { "string" } else { "character" };
                return Err(LexError {
                    message: format_unterminated(what),
                    location: SourceLocation::point(start_line, start_col),
                });
            }
            let (el, ec) = last_pos(&cur);
            tokens.push(Token {
                kind: TokenKind::Literal,
                text,
                location: SourceLocation::new(start_line, start_col, el, ec),
            });
            continue;
        }

        if c.is_ascii_digit() || (c == '.' && cur.peek_at(1).is_some_and(|d| d.is_ascii_digit())) {
            let mut text = String::new();
            while let Some(ch) = cur.peek() {
                if ch.is_ascii_alphanumeric() || ch == '.' || ch == '\'' || ch == '_' {
                    text.push(ch);
                    cur.bump();
                } else {
                    break;
                }
            }
            let (el, ec) = last_pos(&cur);
            tokens.push(Token {
                kind: TokenKind::Literal,
                text,
                location: SourceLocation::new(start_line, start_col, el, ec),
            });
            continue;
        }

        if is_ident_start(c) {
            let mut text = String::new();
            while let Some(ch) = cur.peek() {
                if is_ident_continue(ch) {
                    text.push(ch);
                    cur.bump();
                } else {
                    break;
                }
            }
            let kind = if KEYWORDS.contains(&text.as_str()) {
                TokenKind::Keyword
            } else {
                TokenKind::Identifier
            };
            let (el, ec) = last_pos(&cur);
            tokens.push(Token {
                kind,
                text,
                location: SourceLocation::new(start_line, start_col, el, ec),
            });
            continue;
        }

        let mut matched = false;
        for p in PUNCTUATORS {
            if remaining_starts_with(&cur, p) {
                for _ in 0..p.chars().count() {
                    cur.bump();
                }
                let (el, ec) = last_pos(&cur);
                tokens.push(Token {
                    kind: TokenKind::Punctuator,
                    text: p.to_string(),
                    location: SourceLocation::new(start_line, start_col, el, ec),
                });
                matched = true;
                break;
            }
        }
        if !matched {
            return Err(LexError {
                message: alloc::format!("unexpected character '{c}'"),
                location: SourceLocation::point(start_line, start_col),
            });
        }
    }
    Ok(tokens)
}

fn format_unterminated(what: &str) -> String {
    alloc::format!("unterminated {what} literal")
}

fn remaining_starts_with(cur: &Cursor, pat: &str) -> bool {
    pat.chars()
        .enumerate()
        .all(|(i, pc)| cur.peek_at(i) == Some(pc))
}

// Position of the last consumed character (inclusive end of a token).
fn last_pos(cur: &Cursor) -> (u32, u32) {
    if cur.col > 1 {
        (cur.line, cur.col - 1)
    } else {
        // Token ended exactly at a line break.
        (cur.line.saturating_sub(1), 1)
    }
}

/// Removes preprocessor tokens. Line numbers of the remaining tokens are
/// unchanged.
pub fn strip_preprocessor(tokens: &[Token]) -> Vec<Token> {
    tokens
        .iter()
        .filter(|t| t.kind != TokenKind::Preprocessor)
        .cloned()
        .collect()
}
