use serde::{Deserialize, Serialize};

use super::lexer::{lex, Token};

/// One statement reduced to its token texts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NormalizedStatement {
    pub tokens: Vec<String>,
}

impl NormalizedStatement {
    pub fn new<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self { tokens: tokens.into_iter().map(Into::into).collect() }
    }

    pub fn contains_call(&self, name: &str) -> bool {
        self.tokens.windows(2).any(|w| w[0] == name && w[1] == "(")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StatementSeq {
    pub statements: Vec<NormalizedStatement>,
}

impl StatementSeq {
    pub fn len(&self) -> usize {
        self.statements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.statements.is_empty()
    }

    /// Source form that lexes back to exactly these tokens.
    pub fn to_source(&self) -> String {
        let mut out = String::new();
        for stmt in &self.statements {
            for tok in &stmt.tokens {
                out.push_str(tok);
                out.push('\n');
            }
        }
        out
    }

    pub fn renormalize(&self) -> StatementSeq {
        normalize_body(&self.to_source())
    }

    pub fn contains_call(&self, name: &str) -> bool {
        self.statements.iter().any(|s| s.contains_call(name))
    }
}

/// A statement together with the byte span of its first and last token.
#[derive(Debug, Clone)]
pub(crate) struct SpannedStatement {
    pub statement: NormalizedStatement,
    pub start: usize,
    pub end: usize,
}

pub fn normalize_body(text: &str) -> StatementSeq {
    let tokens = lex(text);
    let statements = split_statements(text, &tokens).into_iter().map(|s| s.statement).collect();
    StatementSeq { statements }
}

/// Splits at semicolons outside parentheses and at block boundaries. An
/// opening brace terminates the statement it belongs to; a closing brace is
/// a statement of its own.
pub(crate) fn split_statements(src: &str, tokens: &[Token]) -> Vec<SpannedStatement> {
    let mut out = Vec::new();
    let mut current: Vec<&Token> = Vec::new();
    let mut depth: usize = 0;
    let mut saved_depths: Vec<usize> = Vec::new();

    fn flush(src: &str, current: &mut Vec<&Token>, out: &mut Vec<SpannedStatement>) {
        if let (Some(first), Some(last)) = (current.first(), current.last()) {
            out.push(SpannedStatement {
                statement: NormalizedStatement::new(current.iter().map(|t| t.text(src))),
                start: first.start,
                end: last.end,
            });
        }
        current.clear();
    }

    for tok in tokens {
        match tok.text(src) {
            "(" | "[" => {
                depth += 1;
                current.push(tok);
            }
            ")" | "]" => {
                depth = depth.saturating_sub(1);
                current.push(tok);
            }
            ";" if depth == 0 => {
                current.push(tok);
                flush(src, &mut current, &mut out);
            }
            "{" => {
                current.push(tok);
                flush(src, &mut current, &mut out);
                saved_depths.push(depth);
                depth = 0;
            }
            "}" => {
                flush(src, &mut current, &mut out);
                current.push(tok);
                flush(src, &mut current, &mut out);
                depth = saved_depths.pop().unwrap_or(0);
            }
            _ => current.push(tok),
        }
    }
    flush(src, &mut current, &mut out);
    out
}
