//! Refactoring records, their descriptions, grouping and pane layout.

mod rules;

use std::collections::HashMap;
use std::fmt;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::model::CodeRange;

pub use rules::{detect, detect_invocations};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, JsonSchema)]
pub enum RefactoringType {
    RenameClass,
    MoveClass,
    RenameMethod,
    MoveMethod,
    MoveAndRenameMethod,
    ExtractMethod,
    InlineMethod,
    PullUpMethod,
    PushDownMethod,
    RenameParameter,
    AddParameter,
    RemoveParameter,
    ReorderParameters,
    ExtractSuperclass,
}

impl RefactoringType {
    pub const ALL: [RefactoringType; 14] = [
        RefactoringType::RenameClass,
        RefactoringType::MoveClass,
        RefactoringType::RenameMethod,
        RefactoringType::MoveMethod,
        RefactoringType::MoveAndRenameMethod,
        RefactoringType::ExtractMethod,
        RefactoringType::InlineMethod,
        RefactoringType::PullUpMethod,
        RefactoringType::PushDownMethod,
        RefactoringType::RenameParameter,
        RefactoringType::AddParameter,
        RefactoringType::RemoveParameter,
        RefactoringType::ReorderParameters,
        RefactoringType::ExtractSuperclass,
    ];

    /// Stable wire name.
    pub fn wire_name(self) -> &'static str {
        match self {
            RefactoringType::RenameClass => "RenameClass",
            RefactoringType::MoveClass => "MoveClass",
            RefactoringType::RenameMethod => "RenameMethod",
            RefactoringType::MoveMethod => "MoveMethod",
            RefactoringType::MoveAndRenameMethod => "MoveAndRenameMethod",
            RefactoringType::ExtractMethod => "ExtractMethod",
            RefactoringType::InlineMethod => "InlineMethod",
            RefactoringType::PullUpMethod => "PullUpMethod",
            RefactoringType::PushDownMethod => "PushDownMethod",
            RefactoringType::RenameParameter => "RenameParameter",
            RefactoringType::AddParameter => "AddParameter",
            RefactoringType::RemoveParameter => "RemoveParameter",
            RefactoringType::ReorderParameters => "ReorderParameters",
            RefactoringType::ExtractSuperclass => "ExtractSuperclass",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            RefactoringType::RenameClass => "Rename Class",
            RefactoringType::MoveClass => "Move Class",
            RefactoringType::RenameMethod => "Rename Method",
            RefactoringType::MoveMethod => "Move Method",
            RefactoringType::MoveAndRenameMethod => "Move And Rename Method",
            RefactoringType::ExtractMethod => "Extract Method",
            RefactoringType::InlineMethod => "Inline Method",
            RefactoringType::PullUpMethod => "Pull Up Method",
            RefactoringType::PushDownMethod => "Push Down Method",
            RefactoringType::RenameParameter => "Rename Parameter",
            RefactoringType::AddParameter => "Add Parameter",
            RefactoringType::RemoveParameter => "Remove Parameter",
            RefactoringType::ReorderParameters => "Reorder Parameters",
            RefactoringType::ExtractSuperclass => "Extract Superclass",
        }
    }

    pub fn element_level(self) -> ElementLevel {
        match self {
            RefactoringType::RenameClass | RefactoringType::MoveClass | RefactoringType::ExtractSuperclass => {
                ElementLevel::Class
            }
            RefactoringType::RenameParameter
            | RefactoringType::AddParameter
            | RefactoringType::RemoveParameter
            | RefactoringType::ReorderParameters => ElementLevel::Variable,
            _ => ElementLevel::Method,
        }
    }

    pub fn from_wire_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.wire_name() == name)
    }
}

impl fmt::Display for RefactoringType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.wire_name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "lowercase")]
pub enum ElementLevel {
    Package,
    Class,
    Method,
    Variable,
}

impl ElementLevel {
    pub const ORDER: [ElementLevel; 4] =
        [ElementLevel::Package, ElementLevel::Class, ElementLevel::Method, ElementLevel::Variable];

    pub fn as_str(self) -> &'static str {
        match self {
            ElementLevel::Package => "package",
            ElementLevel::Class => "class",
            ElementLevel::Method => "method",
            ElementLevel::Variable => "variable",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Before,
    After,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize, JsonSchema)]
pub struct Parameter {
    pub name: String,
    #[serde(rename = "type")]
    pub type_name: String,
}

impl fmt::Display for Parameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} : {}", self.name, self.type_name)
    }
}

/// Parameters involved in a parameter-level refactoring.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize, JsonSchema)]
pub struct ParameterChange {
    pub before: Vec<Parameter>,
    pub after: Vec<Parameter>,
}

/// A line inside a record's ranges that the refactoring itself does not
/// account for.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, JsonSchema)]
pub struct EditedLine {
    pub side: Side,
    pub file_path: String,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize, JsonSchema)]
pub struct RefactoringRecord {
    #[serde(rename = "type")]
    pub kind: RefactoringType,
    pub description: String,
    pub element_level: ElementLevel,
    pub before_ranges: Vec<CodeRange>,
    pub after_ranges: Vec<CodeRange>,
    pub before_names: Vec<String>,
    pub after_names: Vec<String>,
    pub pure: bool,
    pub group_key: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameters: Option<ParameterChange>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edited_lines: Vec<EditedLine>,
}

impl RefactoringRecord {
    pub fn ranges(&self, side: Side) -> &[CodeRange] {
        match side {
            Side::Before => &self.before_ranges,
            Side::After => &self.after_ranges,
        }
    }

    pub fn is_edited(&self, side: Side, file_path: &str, line: u32) -> bool {
        self.edited_lines.iter().any(|e| e.side == side && e.line == line && e.file_path == file_path)
    }

    pub(crate) fn sort_key(&self) -> (ElementLevel, RefactoringType, &[String], &[String]) {
        (self.element_level, self.kind, &self.before_names, &self.after_names)
    }
}

/// Splits `p.A.m(int)` into `("p.A", "m(int)")`.
pub fn split_member(qualified: &str) -> (&str, &str) {
    let head_end = qualified.find('(').unwrap_or(qualified.len());
    match qualified[..head_end].rfind('.') {
        Some(dot) => (&qualified[..dot], &qualified[dot + 1..]),
        None => ("", qualified),
    }
}

fn member_simple_name(member: &str) -> &str {
    member.split('(').next().unwrap_or(member)
}

fn package_of(class_qname: &str) -> &str {
    class_qname.rfind('.').map_or("", |i| &class_qname[..i])
}

fn change_suffix(pure: bool) -> &'static str {
    if pure {
        "without changes"
    } else {
        "with changes"
    }
}

fn first(names: &[String]) -> &str {
    names.first().map_or("", String::as_str)
}

/// One-sentence description of a record, derived from its names.
pub fn describe(record: &RefactoringRecord) -> String {
    let before = first(&record.before_names);
    let after = first(&record.after_names);
    let (b_class, b_member) = split_member(before);
    let (a_class, a_member) = split_member(after);
    let params = record.parameters.as_ref();
    let list = |ps: &[Parameter]| ps.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ");
    let name = record.kind.display_name();
    match record.kind {
        RefactoringType::RenameClass => {
            let (b_pkg, a_pkg) = (package_of(before), package_of(after));
            if b_pkg == a_pkg {
                format!("{name} {before} renamed to {after}")
            } else {
                format!("{name} {before} renamed to {after} and moved from package {b_pkg} to package {a_pkg}")
            }
        }
        RefactoringType::MoveClass => format!("{name} {before} moved to {after}"),
        RefactoringType::RenameMethod => format!("{name} {b_member} renamed to {a_member} in class {a_class}"),
        RefactoringType::MoveMethod | RefactoringType::PullUpMethod | RefactoringType::PushDownMethod => {
            format!("{name} {b_member} from class {b_class} to class {a_class} {}", change_suffix(record.pure))
        }
        RefactoringType::MoveAndRenameMethod => format!(
            "{name} {b_member} from class {b_class} to {a_member} in class {a_class} {}",
            change_suffix(record.pure)
        ),
        RefactoringType::ExtractMethod => {
            let extracted = record.after_names.get(1).map_or("", |n| split_member(n).1);
            format!("{name} {extracted} extracted from {b_member} in class {a_class}")
        }
        RefactoringType::InlineMethod => {
            let inlined = record.before_names.get(1).map_or("", |n| split_member(n).1);
            format!("{name} {inlined} inlined to {a_member} in class {a_class}")
        }
        RefactoringType::RenameParameter => {
            let (b, a) = params.map_or((String::new(), String::new()), |p| (list(&p.before), list(&p.after)));
            format!("{name} {b} to {a} in method {} in class {a_class}", member_simple_name(a_member))
        }
        RefactoringType::AddParameter => {
            let a = params.map_or(String::new(), |p| list(&p.after));
            format!("{name} {a} to method {} in class {a_class}", member_simple_name(a_member))
        }
        RefactoringType::RemoveParameter => {
            let b = params.map_or(String::new(), |p| list(&p.before));
            format!("{name} {b} from method {} in class {a_class}", member_simple_name(a_member))
        }
        RefactoringType::ReorderParameters => {
            let (b, a) = params.map_or((String::new(), String::new()), |p| (list(&p.before), list(&p.after)));
            format!("{name} [{b}] to [{a}] in method {} in class {a_class}", member_simple_name(a_member))
        }
        RefactoringType::ExtractSuperclass => format!("{name} {after} from class {before}"),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct RefactoringGroup {
    pub group_key: String,
    pub records: Vec<RefactoringRecord>,
}

fn singleton_key(record: &RefactoringRecord) -> String {
    format!("{}:{}->{}", record.kind, record.before_names.join(","), record.after_names.join(","))
}

/// Groups records that share a `group_key`; every other record stands alone.
/// Groups appear in the order of their first member.
pub fn group_related(records: &[RefactoringRecord]) -> Vec<RefactoringGroup> {
    let mut groups: Vec<RefactoringGroup> = Vec::new();
    let mut slot: HashMap<&str, usize> = HashMap::new();
    for record in records {
        match record.group_key.as_deref() {
            Some(key) => match slot.get(key) {
                Some(&i) => groups[i].records.push(record.clone()),
                None => {
                    slot.insert(key, groups.len());
                    groups.push(RefactoringGroup { group_key: key.to_string(), records: vec![record.clone()] });
                }
            },
            None => groups.push(RefactoringGroup { group_key: singleton_key(record), records: vec![record.clone()] }),
        }
    }
    groups
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct Pane {
    pub side: Side,
    pub range: CodeRange,
}

pub type PaneLayout = Vec<Pane>;

/// Panes needed to show one record: before and after location, plus the
/// extracted or inlined method for extract/inline.
pub fn pane_layout(record: &RefactoringRecord) -> PaneLayout {
    let pane = |side: Side, i: usize| record.ranges(side).get(i).map(|range| Pane { side, range: range.clone() });
    let panes = match record.kind {
        RefactoringType::ExtractMethod => vec![pane(Side::Before, 0), pane(Side::After, 0), pane(Side::After, 1)],
        RefactoringType::InlineMethod => vec![pane(Side::Before, 0), pane(Side::After, 0), pane(Side::Before, 1)],
        _ => vec![pane(Side::Before, 0), pane(Side::After, 0)],
    };
    panes.into_iter().flatten().collect()
}
