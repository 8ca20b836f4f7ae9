//! Structural model of the supported Java-like subset.

mod lexer;
mod normalize;
mod parser;

use std::fmt;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

pub use lexer::{lex, Token, TokenKind};
pub use normalize::{normalize_body, NormalizedStatement, StatementSeq};
pub use parser::{parse_source, parse_source_bytes, ParseError};

/// A span of one file, both as 1-based inclusive lines and 0-based byte offsets.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, JsonSchema)]
pub struct CodeRange {
    pub file_path: String,
    pub start_line: u32,
    pub end_line: u32,
    pub start_offset: usize,
    pub end_offset: usize,
}

impl CodeRange {
    pub fn contains_line(&self, line: u32) -> bool {
        self.start_line <= line && line <= self.end_line
    }

    pub fn line_count(&self) -> u32 {
        self.end_line - self.start_line + 1
    }
}

/// Newline positions of one file, for offset to line conversion.
#[derive(Debug, Clone)]
pub struct LineIndex {
    newlines: Vec<usize>,
    len: usize,
}

impl LineIndex {
    pub fn new(text: &str) -> Self {
        let newlines = text.bytes().enumerate().filter(|(_, b)| *b == b'\n').map(|(i, _)| i).collect();
        Self { newlines, len: text.len() }
    }

    /// 1-based line of the byte at `offset`.
    pub fn line_of(&self, offset: usize) -> u32 {
        (self.newlines.partition_point(|&nl| nl < offset) + 1) as u32
    }

    pub fn range(&self, path: &str, start: usize, end: usize) -> CodeRange {
        debug_assert!(start < end && end <= self.len);
        CodeRange {
            file_path: path.to_string(),
            start_line: self.line_of(start),
            end_line: self.line_of(end.saturating_sub(1).max(start)),
            start_offset: start,
            end_offset: end,
        }
    }

    /// Number of lines as an editor would count them.
    pub fn line_count(&self) -> u32 {
        match self.newlines.last() {
            Some(&last) if last + 1 == self.len => self.newlines.len() as u32,
            _ if self.len == 0 => 0,
            _ => self.newlines.len() as u32 + 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "lowercase")]
pub enum Visibility {
    Public,
    Protected,
    Private,
    Package,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Signature {
    pub name: String,
    pub parameter_types: Vec<String>,
    pub parameter_names: Vec<String>,
    pub return_type: String,
    pub visibility: Visibility,
}

impl Signature {
    /// `name(T1,T2)`, the form used inside qualified names.
    pub fn display(&self) -> String {
        format!("{}({})", self.name, self.parameter_types.join(","))
    }

    pub fn parameters(&self) -> impl Iterator<Item = (&str, &str)> {
        self.parameter_names.iter().map(String::as_str).zip(self.parameter_types.iter().map(String::as_str))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EntityKind {
    Package,
    Class,
    Interface,
    Method,
    Field,
    Parameter,
}

impl EntityKind {
    pub fn is_type(self) -> bool {
        matches!(self, EntityKind::Class | EntityKind::Interface)
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            EntityKind::Package => "package",
            EntityKind::Class => "class",
            EntityKind::Interface => "interface",
            EntityKind::Method => "method",
            EntityKind::Field => "field",
            EntityKind::Parameter => "parameter",
        };
        f.write_str(s)
    }
}

/// Line span `(first, last)` of one body statement, parallel to `body`.
pub type LineSpan = (u32, u32);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeEntity {
    pub kind: EntityKind,
    pub simple_name: String,
    pub qualified_name: String,
    pub range: CodeRange,
    pub signature: Option<Signature>,
    pub declared_type: Option<String>,
    pub super_types: Vec<String>,
    pub children: Vec<CodeEntity>,
    pub body: StatementSeq,
    pub statement_lines: Vec<LineSpan>,
    /// Package and import declarations; only set on file roots.
    pub header: Option<CodeRange>,
}

impl CodeEntity {
    pub fn qualified_name(&self) -> &str {
        &self.qualified_name
    }

    /// Depth-first, pre-order walk including `self`.
    pub fn walk(&self) -> Vec<&CodeEntity> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(node) = stack.pop() {
            out.push(node);
            stack.extend(node.children.iter().rev());
        }
        out
    }

    pub fn is_constructor_of(&self, class_simple_name: &str) -> bool {
        self.kind == EntityKind::Method && self.simple_name == class_simple_name
    }
}

/// Qualified name of an entity, as keyed by history queries.
pub fn qualified_name(entity: &CodeEntity) -> String {
    entity.qualified_name.clone()
}
