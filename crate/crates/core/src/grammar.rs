//! Executable form of the C-subset ruleset: keywords, identifiers, single
//! declaration lines, comments and labels.
//!
//! Every rejection is a [`Violation`] that knows which numbered rule it broke,
//! so a failed sample can always be explained in terms of the ruleset.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The 32 reserved words of C, in ruleset order (rule 3).
pub const KEYWORDS: [&str; 32] = [
    "auto", "double", "int", "struct", "break", "else", "long", "switch", "case", "enum",
    "register", "typedef", "char", "extern", "return", "union", "const", "float", "short",
    "unsigned", "continue", "for", "signed", "void", "default", "goto", "sizeof", "volatile",
    "do", "if", "static", "while",
];

/// Variable data types (rule 9). Every entry is also a keyword.
pub const DATA_TYPES: [&str; 5] = ["char", "int", "float", "double", "void"];

/// Upper bound for an assigned value in a generated or validated line.
pub const MAX_VALUE: u8 = 100;

/// Read-only view over the keyword and data-type vocabularies.
#[derive(Debug, Clone, Copy, Default)]
pub struct KeywordSet;

impl KeywordSet {
    pub fn keywords(&self) -> &'static [&'static str] {
        &KEYWORDS
    }

    pub fn data_types(&self) -> &'static [&'static str] {
        &DATA_TYPES
    }

    /// Returns the interned keyword equal to `s`, if any.
    pub fn lookup(&self, s: &str) -> Option<&'static str> {
        KEYWORDS.iter().copied().find(|k| *k == s)
    }
}

/// Case-sensitive keyword membership.
pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

pub fn is_data_type(s: &str) -> bool {
    DATA_TYPES.contains(&s)
}

/// A broken rule. `rule()` gives the rule number it is reported under.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("identifier is empty (rule 4)")]
    EmptyIdentifier,
    #[error("identifier `{ident}` contains {ch:?}; only a-z, A-Z, 0-9 and _ are allowed (rule 4)")]
    DisallowedCharacter { ident: String, ch: char },
    #[error("identifier `{ident}` contains the special character {ch:?} (rule 8)")]
    SpecialCharacter { ident: String, ch: char },
    #[error("identifier `{0}` must start with a letter or underscore (rule 5)")]
    LeadingCharacter(String),
    #[error("keyword `{0}` cannot be used as an identifier (rule 7)")]
    KeywordIdentifier(String),

    #[error("line of code is empty (rule 12)")]
    EmptyLine,
    #[error("line of code must end with `;` (rule 12)")]
    MissingTerminator,
    #[error("`{0}` is not a keyword or data type (rule 3)")]
    UnknownHead(String),
    #[error("line of code `{0}` is not `<keyword> <identifier>[ = <value>];` (rule 12)")]
    MalformedLine(String),
    #[error("assigned value `{0}` is not an integer (rule 10)")]
    NonIntegerValue(String),
    #[error("assigned value `{0}` is outside 0..=100 (rule 10)")]
    ValueOutOfRange(String),

    #[error("comment must begin with `//` or be enclosed in `/*` and `*/` (rule 15)")]
    MissingDelimiter,
    #[error("multi-line comment is not closed with `*/` (rule 15)")]
    UnterminatedComment,
    #[error("text follows the closing `*/` of a multi-line comment (rule 15)")]
    TrailingText,
    #[error("line {0} of a single-line comment does not begin with `//` (rule 15)")]
    UnmarkedContinuation(usize),
    #[error("comment has no text between its delimiters (rule 13)")]
    EmptyCommentBody,

    #[error("label `{0}` is neither `Useful` nor `Not Useful` (rule 16)")]
    UnknownLabel(String),
}

impl Violation {
    /// Ruleset number this violation is reported under.
    pub fn rule(&self) -> u8 {
        use Violation::*;
        match self {
            EmptyIdentifier | DisallowedCharacter { .. } => 4,
            LeadingCharacter(_) => 5,
            KeywordIdentifier(_) => 7,
            SpecialCharacter { .. } => 8,
            UnknownHead(_) => 3,
            NonIntegerValue(_) | ValueOutOfRange(_) => 10,
            EmptyLine | MissingTerminator | MalformedLine(_) => 12,
            EmptyCommentBody => 13,
            MissingDelimiter | UnterminatedComment | TrailingText | UnmarkedContinuation(_) => 15,
            UnknownLabel(_) => 16,
        }
    }
}

/// A validated identifier. Equality is case-sensitive (rule 6).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Identifier(String);

impl Identifier {
    pub fn new(s: &str) -> Result<Self, Violation> {
        validate_identifier(s)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Identifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Checks rules 4, 5, 7 and 8 in that precedence: character set first (ASCII
/// punctuation and whitespace are reported as rule 8 special characters, any
/// other foreign character as rule 4), then the leading character, then
/// keyword reuse.
pub fn validate_identifier(s: &str) -> Result<Identifier, Violation> {
    if s.is_empty() {
        return Err(Violation::EmptyIdentifier);
    }
    if let Some(ch) = s.chars().find(|c| !is_ident_char(*c)) {
        let ident = s.to_string();
        return Err(if ch.is_ascii_punctuation() || ch.is_whitespace() {
            Violation::SpecialCharacter { ident, ch }
        } else {
            Violation::DisallowedCharacter { ident, ch }
        });
    }
    if s.starts_with(|c: char| c.is_ascii_digit()) {
        return Err(Violation::LeadingCharacter(s.to_string()));
    }
    if is_keyword(s) {
        return Err(Violation::KeywordIdentifier(s.to_string()));
    }
    Ok(Identifier(s.to_string()))
}

/// One declaration: `<head> <identifier>;` or `<head> <identifier> = <value>;`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeLine {
    head: &'static str,
    identifier: Identifier,
    value: Option<u8>,
    raw: String,
}

impl CodeLine {
    /// Builds a line from parts, enforcing the value bound.
    pub fn new(head: &str, identifier: Identifier, value: Option<u8>) -> Result<Self, Violation> {
        let head = KeywordSet
            .lookup(head)
            .ok_or_else(|| Violation::UnknownHead(head.to_string()))?;
        if let Some(v) = value {
            if v > MAX_VALUE {
                return Err(Violation::ValueOutOfRange(v.to_string()));
            }
        }
        let raw = render(head, &identifier, value);
        Ok(Self {
            head,
            identifier,
            value,
            raw,
        })
    }

    pub fn head(&self) -> &'static str {
        self.head
    }

    pub fn identifier(&self) -> &Identifier {
        &self.identifier
    }

    pub fn value(&self) -> Option<u8> {
        self.value
    }

    /// Canonical single-space rendering.
    pub fn raw(&self) -> &str {
        &self.raw
    }
}

impl fmt::Display for CodeLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.raw)
    }
}

fn render(head: &str, identifier: &Identifier, value: Option<u8>) -> String {
    match value {
        Some(v) => format!("{head} {identifier} = {v};"),
        None => format!("{head} {identifier};"),
    }
}

/// Parses `head SP+ identifier (SP+ '=' SP+ integer)? ';'`. Surrounding
/// whitespace is ignored; the stored `raw` is always the canonical rendering.
pub fn validate_line(s: &str) -> Result<CodeLine, Violation> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Violation::EmptyLine);
    }
    let body = s.strip_suffix(';').ok_or(Violation::MissingTerminator)?;
    let tokens: Vec<&str> = body.split_whitespace().collect();
    let Some(&head) = tokens.first() else {
        return Err(Violation::MalformedLine(s.to_string()));
    };
    let head = KeywordSet
        .lookup(head)
        .ok_or_else(|| Violation::UnknownHead(head.to_string()))?;
    let value_token = match tokens.len() {
        2 => None,
        4 if tokens[2] == "=" => Some(tokens[3]),
        _ => return Err(Violation::MalformedLine(s.to_string())),
    };
    let identifier = validate_identifier(tokens[1])?;
    let value = value_token.map(parse_value).transpose()?;
    CodeLine::new(head, identifier, value)
}

fn parse_value(token: &str) -> Result<u8, Violation> {
    let digits = token.strip_prefix(['+', '-']).unwrap_or(token);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Violation::NonIntegerValue(token.to_string()));
    }
    if token.starts_with('-') && digits.bytes().any(|b| b != b'0') {
        return Err(Violation::ValueOutOfRange(token.to_string()));
    }
    match digits.parse::<u64>() {
        Ok(v) if v <= MAX_VALUE as u64 => Ok(v as u8),
        _ => Err(Violation::ValueOutOfRange(token.to_string())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CommentStyle {
    /// `// ...`, possibly continued over several physical lines that each
    /// begin with `//`.
    SingleLine,
    /// `/* ... */`, may span lines.
    MultiLine,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Comment {
    style: CommentStyle,
    text: String,
}

impl Comment {
    pub fn style(&self) -> CommentStyle {
        self.style
    }

    pub fn text(&self) -> &str {
        &self.text
    }
}

impl fmt::Display for Comment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

/// Accepts a `//` comment (each physical line must start with `//`) or a
/// `/* ... */` comment with nothing after the first `*/`. Both need some
/// non-blank text inside the delimiters.
pub fn validate_comment(s: &str) -> Result<Comment, Violation> {
    let text = s.trim();
    if let Some(rest) = text.strip_prefix("/*") {
        let inner = rest.strip_suffix("*/").ok_or(Violation::UnterminatedComment)?;
        if inner.contains("*/") {
            return Err(Violation::TrailingText);
        }
        if inner.trim().is_empty() {
            return Err(Violation::EmptyCommentBody);
        }
        return Ok(Comment {
            style: CommentStyle::MultiLine,
            text: text.to_string(),
        });
    }
    if text.starts_with("//") {
        let mut has_text = false;
        for (i, line) in text.split('\n').enumerate() {
            let body = line
                .trim()
                .strip_prefix("//")
                .ok_or(Violation::UnmarkedContinuation(i + 1))?;
            has_text |= !body.trim().is_empty();
        }
        if !has_text {
            return Err(Violation::EmptyCommentBody);
        }
        return Ok(Comment {
            style: CommentStyle::SingleLine,
            text: text.to_string(),
        });
    }
    Err(Violation::MissingDelimiter)
}

/// Comment class. Encoded as Useful = 1, NotUseful = 0 everywhere numeric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "Useful")]
    Useful,
    #[serde(rename = "Not Useful")]
    NotUseful,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Useful, Label::NotUseful];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Useful => "Useful",
            Label::NotUseful => "Not Useful",
        }
    }

    pub fn class_index(self) -> usize {
        match self {
            Label::Useful => 1,
            Label::NotUseful => 0,
        }
    }

    pub fn from_class_index(i: usize) -> Self {
        if i == 1 {
            Label::Useful
        } else {
            Label::NotUseful
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Label::Useful => Label::NotUseful,
            Label::NotUseful => Label::Useful,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Violation;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Useful" => Ok(Label::Useful),
            "Not Useful" => Ok(Label::NotUseful),
            other => Err(Violation::UnknownLabel(other.to_string())),
        }
    }
}

/// A fully validated (line, comment, label) triple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    pub line: CodeLine,
    pub comment: Comment,
    pub label: Label,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Component {
    Line,
    Comment,
    Label,
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Component::Line => "line",
            Component::Comment => "comment",
            Component::Label => "label",
        })
    }
}

/// First violation of each failing component, in line, comment, label order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleViolations(pub Vec<(Component, Violation)>);

impl SampleViolations {
    pub fn iter(&self) -> impl Iterator<Item = &(Component, Violation)> {
        self.0.iter()
    }

    pub fn first(&self) -> &(Component, Violation) {
        &self.0[0]
    }

    pub fn contains(&self, component: Component) -> bool {
        self.0.iter().any(|(c, _)| *c == component)
    }
}

impl fmt::Display for SampleViolations {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (component, violation)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{component}: {violation}")?;
        }
        Ok(())
    }
}

impl std::error::Error for SampleViolations {}

pub fn validate_sample(line: &str, comment: &str, label: &str) -> Result<Sample, SampleViolations> {
    let line = validate_line(line);
    let comment = validate_comment(comment);
    let label = label.parse::<Label>();
    match (line, comment, label) {
        (Ok(line), Ok(comment), Ok(label)) => Ok(Sample {
            line,
            comment,
            label,
        }),
        (line, comment, label) => {
            let mut out = Vec::new();
            if let Err(v) = line {
                out.push((Component::Line, v));
            }
            if let Err(v) = comment {
                out.push((Component::Comment, v));
            }
            if let Err(v) = label {
                out.push((Component::Label, v));
            }
            Err(SampleViolations(out))
        }
    }
}
