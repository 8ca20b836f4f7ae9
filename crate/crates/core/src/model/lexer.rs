//! Tokenizer for the Java-like source subset.
//!
//! Comments and whitespace never produce tokens. Anything the lexer does not
//! recognize becomes a single-character opaque token, so lexing is total.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Ident,
    Number,
    Str,
    Char,
    Punct,
    Opaque,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub start: usize,
    pub end: usize,
}

impl Token {
    pub fn text<'a>(&self, src: &'a str) -> &'a str {
        &src[self.start..self.end]
    }
}

// `>` is never merged with a following `>` so generic closers stay separate.
const OPERATORS: &[&str] = &[
    "<<=", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=", ">=", "+=", "-=", "*=", "/=", "%=", "&=", "|=",
    "^=", "<<",
];

pub fn lex(src: &str) -> Vec<Token> {
    let bytes = src.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if b.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if b == b'/' && bytes.get(i + 1) == Some(&b'/') {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if b == b'/' && bytes.get(i + 1) == Some(&b'*') {
            i = match src[i + 2..].find("*/") {
                Some(pos) => i + 2 + pos + 2,
                None => bytes.len(),
            };
            continue;
        }
        let start = i;
        let (kind, end) = if b == b'"' {
            lex_string(src, i)
        } else if b == b'\'' {
            lex_quoted(bytes, i, b'\'', TokenKind::Char)
        } else if b.is_ascii_digit() {
            (TokenKind::Number, lex_number(bytes, i))
        } else if is_ident_start(src, i) {
            (TokenKind::Ident, lex_ident(src, i))
        } else if b.is_ascii() {
            let op = OPERATORS.iter().find(|op| src[i..].starts_with(*op));
            match op {
                Some(op) => (TokenKind::Punct, i + op.len()),
                None if b.is_ascii_punctuation() => (TokenKind::Punct, i + 1),
                None => (TokenKind::Opaque, i + 1),
            }
        } else {
            let ch = src[i..].chars().next().map_or(1, char::len_utf8);
            (TokenKind::Opaque, i + ch)
        };
        tokens.push(Token { kind, start, end });
        i = end;
    }
    tokens
}

fn is_ident_start(src: &str, i: usize) -> bool {
    match src[i..].chars().next() {
        Some(c) => c == '_' || c == '$' || c.is_alphabetic(),
        None => false,
    }
}

fn lex_ident(src: &str, start: usize) -> usize {
    let mut end = start;
    for c in src[start..].chars() {
        if c == '_' || c == '$' || c.is_alphanumeric() {
            end += c.len_utf8();
        } else {
            break;
        }
    }
    end
}

fn lex_number(bytes: &[u8], start: usize) -> usize {
    let hex = bytes.get(start) == Some(&b'0') && matches!(bytes.get(start + 1), Some(b'x' | b'X'));
    let mut i = start;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_alphanumeric() || c == b'_' || c == b'.' {
            i += 1;
        } else if (c == b'+' || c == b'-') && i > start {
            let prev = bytes[i - 1];
            let exponent = if hex { matches!(prev, b'p' | b'P') } else { matches!(prev, b'e' | b'E') };
            if exponent && bytes.get(i + 1).is_some_and(u8::is_ascii_digit) {
                i += 1;
            } else {
                break;
            }
        } else {
            break;
        }
    }
    i
}

fn lex_string(src: &str, start: usize) -> (TokenKind, usize) {
    if src[start..].starts_with("\"\"\"") {
        if let Some(pos) = src[start + 3..].find("\"\"\"") {
            return (TokenKind::Str, start + 3 + pos + 3);
        }
    }
    lex_quoted(src.as_bytes(), start, b'"', TokenKind::Str)
}

/// A literal that is not closed on its own line degrades to an opaque quote
/// character, which keeps lexing stable when tokens are re-joined by newlines.
fn lex_quoted(bytes: &[u8], start: usize, quote: u8, kind: TokenKind) -> (TokenKind, usize) {
    let mut i = start + 1;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' if bytes.get(i + 1) != Some(&b'\n') => i += 2,
            b'\n' | b'\\' => break,
            c if c == quote => return (kind, i + 1),
            _ => i += 1,
        }
    }
    (TokenKind::Opaque, start + 1)
}
