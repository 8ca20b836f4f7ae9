//! Declaration-level parser.
//!
//! Only the structure down to member declarations is parsed. Method bodies are
//! bracket-matched and handed to the statement normalizer as token runs, so any
//! construct inside a body is accepted.

use super::lexer::{lex, Token, TokenKind};
use super::normalize::{split_statements, StatementSeq};
use super::{CodeEntity, CodeRange, EntityKind, LineIndex, Signature, Visibility};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("{path}:{line}: malformed source: {message}")]
    MalformedSource { path: String, line: u32, message: String },
}

impl ParseError {
    pub fn line(&self) -> u32 {
        match self {
            ParseError::MalformedSource { line, .. } => *line,
        }
    }
}

pub fn parse_source_bytes(bytes: &[u8], path: &str) -> Result<CodeEntity, ParseError> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse_source(text, path),
        Err(err) => {
            let valid = &bytes[..err.valid_up_to()];
            let line = valid.iter().filter(|b| **b == b'\n').count() as u32 + 1;
            Err(ParseError::MalformedSource { path: path.to_string(), line, message: "invalid UTF-8".to_string() })
        }
    }
}

pub fn parse_source(text: &str, path: &str) -> Result<CodeEntity, ParseError> {
    let mut parser = Parser::new(text, path)?;
    parser.compilation_unit()
}

const MODIFIERS: &[&str] = &[
    "public",
    "protected",
    "private",
    "static",
    "final",
    "abstract",
    "native",
    "synchronized",
    "transient",
    "volatile",
    "strictfp",
    "default",
    "sealed",
];

#[derive(Clone, Copy, PartialEq, Eq)]
enum TypeFlavor {
    Class,
    Interface,
    Enum,
    Record,
    Annotation,
}

struct Parser<'a> {
    src: &'a str,
    path: &'a str,
    toks: Vec<Token>,
    lines: LineIndex,
    /// Index of the matching bracket for every `{ } ( ) [ ]` token that has one.
    partner: Vec<Option<usize>>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, path: &'a str) -> Result<Self, ParseError> {
        let toks = lex(src);
        let lines = LineIndex::new(src);
        let mut partner = vec![None; toks.len()];
        let mut braces: Vec<usize> = Vec::new();
        let mut parens: Vec<usize> = Vec::new();
        let mut squares: Vec<usize> = Vec::new();
        for (i, tok) in toks.iter().enumerate() {
            if tok.kind != TokenKind::Punct {
                continue;
            }
            let (stack, closing) = match tok.text(src) {
                "{" => (&mut braces, false),
                "}" => (&mut braces, true),
                "(" => (&mut parens, false),
                ")" => (&mut parens, true),
                "[" => (&mut squares, false),
                "]" => (&mut squares, true),
                _ => continue,
            };
            if !closing {
                stack.push(i);
                continue;
            }
            match stack.pop() {
                Some(open) => {
                    partner[open] = Some(i);
                    partner[i] = Some(open);
                }
                None if tok.text(src) == "}" => {
                    return Err(ParseError::MalformedSource {
                        path: path.to_string(),
                        line: lines.line_of(tok.start),
                        message: "unmatched '}'".to_string(),
                    });
                }
                None => {}
            }
        }
        if let Some(&open) = braces.last() {
            return Err(ParseError::MalformedSource {
                path: path.to_string(),
                line: lines.line_of(toks[open].start),
                message: "unclosed '{'".to_string(),
            });
        }
        Ok(Self { src, path, toks, lines, partner, pos: 0 })
    }

    fn text(&self, i: usize) -> &'a str {
        match self.toks.get(i) {
            Some(t) => t.text(self.src),
            None => "",
        }
    }

    fn at(&self, s: &str) -> bool {
        self.text(self.pos) == s
    }

    fn is_ident(&self, i: usize) -> bool {
        self.toks.get(i).is_some_and(|t| t.kind == TokenKind::Ident)
    }

    fn error(&self, i: usize, message: &str) -> ParseError {
        let offset = self.toks.get(i).map_or(self.src.len(), |t| t.start);
        ParseError::MalformedSource {
            path: self.path.to_string(),
            line: self.lines.line_of(offset),
            message: message.to_string(),
        }
    }

    fn range(&self, first_tok: usize, last_tok: usize) -> CodeRange {
        self.lines.range(self.path, self.toks[first_tok].start, self.toks[last_tok].end)
    }

    fn compilation_unit(&mut self) -> Result<CodeEntity, ParseError> {
        let mut package = String::new();
        let mut header: Option<(usize, usize)> = None;
        let mut children = Vec::new();

        while self.pos < self.toks.len() {
            match self.text(self.pos) {
                kw @ ("package" | "import") => {
                    let start = self.pos;
                    self.pos += 1;
                    let mut name = String::new();
                    while self.pos < self.toks.len() && !self.at(";") {
                        name.push_str(self.text(self.pos));
                        self.pos += 1;
                    }
                    if kw == "package" {
                        package = name;
                    }
                    let end = self.pos.min(self.toks.len() - 1);
                    header = Some((header.map_or(start, |h| h.0), end));
                    self.pos += 1;
                }
                ";" => self.pos += 1,
                _ => {
                    let start = self.pos;
                    let visibility = self.modifiers();
                    if let Some(flavor) = self.type_keyword() {
                        let decl = self.type_declaration(start, flavor, &package, visibility)?;
                        children.push(decl);
                    } else {
                        self.skip_unknown(start, self.toks.len());
                    }
                }
            }
        }

        let range = if self.src.is_empty() {
            CodeRange { file_path: self.path.to_string(), start_line: 1, end_line: 1, start_offset: 0, end_offset: 0 }
        } else {
            self.lines.range(self.path, 0, self.src.len())
        };
        Ok(CodeEntity {
            kind: EntityKind::Package,
            simple_name: package.rsplit('.').next().unwrap_or_default().to_string(),
            qualified_name: package,
            range,
            signature: None,
            declared_type: None,
            super_types: Vec::new(),
            children,
            body: StatementSeq::default(),
            statement_lines: Vec::new(),
            header: header.map(|(s, e)| self.range(s, e)),
        })
    }

    /// Consumes annotations and modifiers, returning the visibility found.
    fn modifiers(&mut self) -> Option<Visibility> {
        let mut visibility = None;
        loop {
            let t = self.text(self.pos);
            if t == "@" && self.text(self.pos + 1) != "interface" {
                self.pos += 1;
                while self.is_ident(self.pos) {
                    self.pos += 1;
                    if self.at(".") && self.is_ident(self.pos + 1) {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                if self.at("(") {
                    self.pos = self.partner[self.pos].map_or(self.pos + 1, |close| close + 1);
                }
            } else if t == "non" && self.text(self.pos + 1) == "-" && self.text(self.pos + 2) == "sealed" {
                self.pos += 3;
            } else if MODIFIERS.contains(&t) {
                visibility = match t {
                    "public" => Some(Visibility::Public),
                    "protected" => Some(Visibility::Protected),
                    "private" => Some(Visibility::Private),
                    _ => visibility,
                };
                self.pos += 1;
            } else {
                return visibility;
            }
        }
    }

    fn type_keyword(&self) -> Option<TypeFlavor> {
        match self.text(self.pos) {
            "class" => Some(TypeFlavor::Class),
            "interface" => Some(TypeFlavor::Interface),
            "enum" if self.is_ident(self.pos + 1) => Some(TypeFlavor::Enum),
            "record" if self.is_ident(self.pos + 1) && self.text(self.pos + 2) != "=" => Some(TypeFlavor::Record),
            "@" if self.text(self.pos + 1) == "interface" => Some(TypeFlavor::Annotation),
            _ => None,
        }
    }

    fn skip_unknown(&mut self, start: usize, limit: usize) {
        if self.pos == start {
            if self.at("{") {
                self.pos = self.partner[self.pos].map_or(self.pos + 1, |c| c + 1);
            } else {
                self.pos += 1;
            }
            return;
        }
        while self.pos < limit {
            match self.text(self.pos) {
                ";" => {
                    self.pos += 1;
                    return;
                }
                "{" => {
                    self.pos = self.partner[self.pos].map_or(self.pos + 1, |c| c + 1);
                    return;
                }
                _ => self.pos += 1,
            }
        }
    }

    fn skip_angle_brackets(&mut self) {
        let mut depth = 0usize;
        while self.pos < self.toks.len() {
            match self.text(self.pos) {
                "<" => depth += 1,
                ">" => {
                    depth -= 1;
                    if depth == 0 {
                        self.pos += 1;
                        return;
                    }
                }
                "{" | "}" | ";" => return,
                _ => {}
            }
            self.pos += 1;
        }
    }

    fn type_declaration(
        &mut self,
        start: usize,
        flavor: TypeFlavor,
        parent: &str,
        visibility: Option<Visibility>,
    ) -> Result<CodeEntity, ParseError> {
        let _ = visibility;
        self.pos += if flavor == TypeFlavor::Annotation { 2 } else { 1 };
        if !self.is_ident(self.pos) {
            return Err(self.error(self.pos, "expected type name"));
        }
        let name = self.text(self.pos).to_string();
        let qualified = join(parent, &name);
        self.pos += 1;
        if self.at("<") {
            self.skip_angle_brackets();
        }
        if flavor == TypeFlavor::Record && self.at("(") {
            self.pos = self.partner[self.pos].map_or(self.pos + 1, |c| c + 1);
        }

        let mut super_types = Vec::new();
        loop {
            match self.text(self.pos) {
                "extends" | "implements" => {
                    self.pos += 1;
                    super_types.extend(self.type_list());
                }
                "permits" => {
                    self.pos += 1;
                    self.type_list();
                }
                _ => break,
            }
        }

        if !self.at("{") {
            return Err(self.error(self.pos, "expected '{' after type header"));
        }
        let open = self.pos;
        let close = self.partner[open].ok_or_else(|| self.error(open, "unclosed '{'"))?;
        self.pos = open + 1;
        if flavor == TypeFlavor::Enum {
            self.skip_enum_constants(close);
        }
        let in_interface = matches!(flavor, TypeFlavor::Interface | TypeFlavor::Annotation);
        let mut children = Vec::new();
        while self.pos < close {
            if let Some(member) = self.member(&qualified, &name, in_interface, close)? {
                children.extend(member);
            }
        }
        self.pos = close + 1;

        let kind = if in_interface { EntityKind::Interface } else { EntityKind::Class };
        Ok(CodeEntity {
            kind,
            simple_name: name,
            qualified_name: qualified,
            range: self.range(start, close),
            signature: None,
            declared_type: None,
            super_types,
            children,
            body: StatementSeq::default(),
            statement_lines: Vec::new(),
            header: None,
        })
    }

    fn skip_enum_constants(&mut self, close: usize) {
        let mut i = self.pos;
        while i < close {
            match self.text(i) {
                ";" => {
                    self.pos = i + 1;
                    return;
                }
                "{" | "(" | "[" => i = self.partner[i].map_or(i + 1, |c| c + 1),
                _ => i += 1,
            }
        }
        self.pos = close;
    }

    fn type_list(&mut self) -> Vec<String> {
        let mut out = Vec::new();
        while let Some(ty) = self.parse_type() {
            out.push(ty);
            if self.at(",") {
                self.pos += 1;
            } else {
                break;
            }
        }
        out
    }

    /// Parses a type name starting at the cursor; generics and array
    /// suffixes stay part of the name. Restores the cursor on failure.
    fn parse_type(&mut self) -> Option<String> {
        let start = self.pos;
        while self.at("@") {
            self.pos += 1;
            if self.is_ident(self.pos) {
                self.pos += 1;
            }
        }
        let first = self.pos;
        if !self.is_ident(self.pos) {
            self.pos = start;
            return None;
        }
        loop {
            if !self.is_ident(self.pos) {
                self.pos = start;
                return None;
            }
            self.pos += 1;
            if self.at("<") {
                let before = self.pos;
                self.skip_angle_brackets();
                if self.text(self.pos - 1) != ">" || self.pos == before {
                    self.pos = start;
                    return None;
                }
            }
            if self.at(".") && self.is_ident(self.pos + 1) {
                self.pos += 1;
            } else {
                break;
            }
        }
        while self.at("[") && self.text(self.pos + 1) == "]" {
            self.pos += 2;
        }
        if self.at("...") {
            self.pos += 1;
        }
        Some(self.join_tokens(first, self.pos))
    }

    fn join_tokens(&self, from: usize, to: usize) -> String {
        let mut out = String::new();
        let mut prev_word = false;
        for i in from..to {
            let t = self.text(i);
            let word = matches!(self.toks[i].kind, TokenKind::Ident | TokenKind::Number);
            if word && prev_word {
                out.push(' ');
            }
            out.push_str(t);
            prev_word = word || t == "?";
        }
        out
    }

    /// Parses one member. Returns `None` for skipped constructs.
    fn member(
        &mut self,
        class_qname: &str,
        class_name: &str,
        in_interface: bool,
        close: usize,
    ) -> Result<Option<Vec<CodeEntity>>, ParseError> {
        match self.text(self.pos) {
            ";" => {
                self.pos += 1;
                return Ok(None);
            }
            "{" => {
                self.pos = self.partner[self.pos].map_or(self.pos + 1, |c| c + 1);
                return Ok(None);
            }
            "static" if self.text(self.pos + 1) == "{" => {
                self.pos = self.partner[self.pos + 1].map_or(self.pos + 2, |c| c + 1);
                return Ok(None);
            }
            _ => {}
        }
        let start = self.pos;
        let declared = self.modifiers();
        let default_visibility = if in_interface { Visibility::Public } else { Visibility::Package };
        let visibility = declared.unwrap_or(default_visibility);

        if let Some(flavor) = self.type_keyword() {
            let nested = self.type_declaration(start, flavor, class_qname, declared)?;
            return Ok(Some(vec![nested]));
        }
        if self.at("<") {
            self.skip_angle_brackets();
        }
        if self.is_ident(self.pos) && self.text(self.pos) == class_name && self.text(self.pos + 1) == "(" {
            let m = self.method(start, class_qname, visibility, String::new())?;
            return Ok(Some(vec![m]));
        }
        let Some(ty) = self.parse_type() else {
            self.skip_unknown(start, close);
            return Ok(None);
        };
        if !self.is_ident(self.pos) {
            self.skip_unknown(start, close);
            return Ok(None);
        }
        if self.text(self.pos + 1) == "(" {
            let m = self.method(start, class_qname, visibility, ty)?;
            return Ok(Some(vec![m]));
        }
        Ok(Some(self.fields(start, class_qname, &ty, close)))
    }

    fn method(
        &mut self,
        start: usize,
        class_qname: &str,
        visibility: Visibility,
        return_type: String,
    ) -> Result<CodeEntity, ParseError> {
        let name = self.text(self.pos).to_string();
        self.pos += 1;
        let open_paren = self.pos;
        let close_paren =
            self.partner[open_paren].ok_or_else(|| self.error(open_paren, "unbalanced parameter list"))?;
        let params = self.parameters(open_paren + 1, close_paren);
        self.pos = close_paren + 1;
        while self.at("[") && self.text(self.pos + 1) == "]" {
            self.pos += 2;
        }
        if self.at("throws") || self.at("default") {
            while self.pos < self.toks.len() && !self.at("{") && !self.at(";") && !self.at("}") {
                self.pos += 1;
            }
        }

        let parameter_types: Vec<String> = params.iter().map(|p| p.1.clone()).collect();
        let parameter_names: Vec<String> = params.iter().map(|p| p.0.clone()).collect();
        let signature = Signature { name: name.clone(), parameter_types, parameter_names, return_type, visibility };
        let qualified = join(class_qname, &signature.display());

        let (end, body, statement_lines) = if self.at("{") {
            let open = self.pos;
            let close = self.partner[open].ok_or_else(|| self.error(open, "unclosed '{'"))?;
            let spanned = split_statements(self.src, &self.toks[open + 1..close]);
            let lines = spanned.iter().map(|s| (self.lines.line_of(s.start), self.lines.line_of(s.end - 1))).collect();
            let body = StatementSeq { statements: spanned.into_iter().map(|s| s.statement).collect() };
            self.pos = close + 1;
            (close, body, lines)
        } else if self.at(";") {
            self.pos += 1;
            (self.pos - 1, StatementSeq::default(), Vec::new())
        } else {
            (self.pos - 1, StatementSeq::default(), Vec::new())
        };

        let children = params
            .into_iter()
            .map(|(pname, ptype, first, last)| CodeEntity {
                kind: EntityKind::Parameter,
                qualified_name: join(&qualified, &pname),
                simple_name: pname,
                range: self.range(first, last),
                signature: None,
                declared_type: Some(ptype),
                super_types: Vec::new(),
                children: Vec::new(),
                body: StatementSeq::default(),
                statement_lines: Vec::new(),
                header: None,
            })
            .collect();

        Ok(CodeEntity {
            kind: EntityKind::Method,
            simple_name: name,
            qualified_name: qualified,
            range: self.range(start, end),
            signature: Some(signature),
            declared_type: None,
            super_types: Vec::new(),
            children,
            body,
            statement_lines,
            header: None,
        })
    }

    /// Returns `(name, type, first token, last token)` per parameter.
    fn parameters(&self, from: usize, to: usize) -> Vec<(String, String, usize, usize)> {
        let mut out = Vec::new();
        let mut seg_start = from;
        let mut i = from;
        let mut angle = 0usize;
        while i <= to {
            let t = if i == to { "," } else { self.text(i) };
            match t {
                "(" | "[" if i < to => {
                    i = self.partner[i].map_or(i + 1, |c| c + 1);
                    continue;
                }
                "<" => angle += 1,
                ">" => angle = angle.saturating_sub(1),
                "," if angle == 0 || i == to => {
                    if let Some(p) = self.parameter(seg_start, i) {
                        out.push(p);
                    }
                    seg_start = i + 1;
                }
                _ => {}
            }
            i += 1;
        }
        out
    }

    fn parameter(&self, from: usize, to: usize) -> Option<(String, String, usize, usize)> {
        let mut first = from;
        loop {
            match self.text(first) {
                "final" if first < to => first += 1,
                "@" if first < to => {
                    first += 1;
                    while first < to && self.is_ident(first) {
                        first += 1;
                        if self.text(first) == "." {
                            first += 1;
                        } else {
                            break;
                        }
                    }
                    if first < to && self.text(first) == "(" {
                        first = self.partner[first].map_or(first + 1, |c| c + 1);
                    }
                }
                _ => break,
            }
        }
        let mut last = to.checked_sub(1)?;
        if last < first {
            return None;
        }
        let mut dims = 0;
        while last >= first + 2 && self.text(last) == "]" && self.text(last - 1) == "[" {
            dims += 1;
            last -= 2;
        }
        if !self.is_ident(last) || last == first {
            return None;
        }
        let name = self.text(last);
        if name == "this" {
            return None;
        }
        let mut ty = self.join_tokens(first, last);
        ty.push_str(&"[]".repeat(dims));
        Some((name.to_string(), ty, from, to - 1))
    }

    fn fields(&mut self, start: usize, class_qname: &str, ty: &str, close: usize) -> Vec<CodeEntity> {
        let mut out = Vec::new();
        let mut decl_start = start;
        while self.pos < close && self.is_ident(self.pos) {
            let name = self.text(self.pos).to_string();
            self.pos += 1;
            let mut declared = ty.to_string();
            while self.at("[") && self.text(self.pos + 1) == "]" {
                declared.push_str("[]");
                self.pos += 2;
            }
            while self.pos < close && !self.at(",") && !self.at(";") {
                match self.text(self.pos) {
                    "(" | "[" | "{" => self.pos = self.partner[self.pos].map_or(self.pos + 1, |c| c + 1),
                    _ => self.pos += 1,
                }
            }
            let last = if self.at(";") { self.pos } else { self.pos - 1 };
            out.push(CodeEntity {
                kind: EntityKind::Field,
                qualified_name: join(class_qname, &name),
                simple_name: name,
                range: self.range(decl_start, last),
                signature: None,
                declared_type: Some(declared),
                super_types: Vec::new(),
                children: Vec::new(),
                body: StatementSeq::default(),
                statement_lines: Vec::new(),
                header: None,
            });
            if self.at(",") {
                self.pos += 1;
                decl_start = self.pos;
            } else {
                if self.at(";") {
                    self.pos += 1;
                }
                break;
            }
        }
        if out.is_empty() {
            self.skip_unknown(start, close);
        }
        out
    }
}

fn join(parent: &str, name: &str) -> String {
    if parent.is_empty() {
        name.to_string()
    } else {
        format!("{parent}.{name}")
    }
}
