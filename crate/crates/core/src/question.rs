//! Question classification against a registry of slot templates.
//!
//! A template is a surface string with `(*p)` and optionally `(*p1)` slots,
//! tagged with a pattern class and a target relation or property. Fixed text
//! matches case-insensitively; slots capture the longest non-empty span that
//! still lets the rest of the template match.

use std::fmt;
use std::io::BufRead;
use std::str::FromStr;
use std::sync::OnceLock;

use regex::Regex;
use serde::Serialize;
use thiserror::Error;

const BUILTIN_TEMPLATES: &str = include_str!("../../../data/templates.txt");

/// Question class: I asks for an object, II for a literal property, III for
/// the relation between two entities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum PatternClass {
    I,
    II,
    III,
}

impl fmt::Display for PatternClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PatternClass::I => "I",
            PatternClass::II => "II",
            PatternClass::III => "III",
        })
    }
}

impl FromStr for PatternClass {
    type Err = TemplateErrorKind;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "I" => Ok(PatternClass::I),
            "II" => Ok(PatternClass::II),
            "III" => Ok(PatternClass::III),
            other => Err(TemplateErrorKind::UnknownClass(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemplateErrorKind {
    #[error("read error: {0}")]
    Io(String),
    #[error("expected 3 '|'-separated fields, found {0}")]
    FieldCount(usize),
    #[error("unknown pattern class {0:?}")]
    UnknownClass(String),
    #[error("class {class} template needs {expected}")]
    Slots {
        class: PatternClass,
        expected: &'static str,
    },
    #[error("class {class} template needs {expected} target")]
    Target {
        class: PatternClass,
        expected: &'static str,
    },
    #[error("duplicate template surface {0:?}")]
    Duplicate(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("template line {line}: {kind}")]
pub struct TemplateError {
    pub line: usize,
    pub kind: TemplateErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("question matches no template")]
pub struct NoTemplateMatch;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    P,
    P1,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Segment {
    Text(Vec<char>),
    Slot(Slot),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuestionTemplate {
    pub class: PatternClass,
    pub surface: String,
    pub target: String,
    segments: Vec<Segment>,
}

fn slot_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\(\s*\*\s*(p1|p)\s*\)").expect("valid slot regex"))
}

/// Collapses whitespace runs and drops a trailing question mark.
fn normalize(text: &str) -> String {
    let collapsed = text.split_whitespace().collect::<Vec<_>>().join(" ");
    match collapsed.strip_suffix('?') {
        Some(rest) => rest.trim_end().to_string(),
        None => collapsed,
    }
}

fn fold(c: char) -> char {
    let mut lower = c.to_lowercase();
    match (lower.next(), lower.next()) {
        (Some(l), None) => l,
        _ => c,
    }
}

impl QuestionTemplate {
    pub fn new(
        class: PatternClass,
        surface: &str,
        target: &str,
    ) -> Result<Self, TemplateErrorKind> {
        let surface = normalize(surface);
        let target = target.trim().to_string();
        let mut segments = Vec::new();
        let mut last = 0;
        for caps in slot_regex().captures_iter(&surface) {
            let whole = caps.get(0).expect("match");
            if whole.start() > last {
                segments.push(Segment::Text(
                    surface[last..whole.start()].chars().map(fold).collect(),
                ));
            }
            segments.push(Segment::Slot(if &caps[1] == "p1" {
                Slot::P1
            } else {
                Slot::P
            }));
            last = whole.end();
        }
        if last < surface.len() {
            segments.push(Segment::Text(surface[last..].chars().map(fold).collect()));
        }

        let count = |slot| {
            segments
                .iter()
                .filter(|s| **s == Segment::Slot(slot))
                .count()
        };
        let (p, p1) = (count(Slot::P), count(Slot::P1));
        match class {
            PatternClass::I | PatternClass::II => {
                if p != 1 || p1 != 0 {
                    return Err(TemplateErrorKind::Slots {
                        class,
                        expected: "exactly one (*p) slot and no (*p1)",
                    });
                }
                if target.is_empty() {
                    return Err(TemplateErrorKind::Target {
                        class,
                        expected: "a non-empty",
                    });
                }
            }
            PatternClass::III => {
                if p != 1 || p1 != 1 {
                    return Err(TemplateErrorKind::Slots {
                        class,
                        expected: "one (*p) and one (*p1) slot",
                    });
                }
                if !target.is_empty() {
                    return Err(TemplateErrorKind::Target {
                        class,
                        expected: "an empty",
                    });
                }
            }
        }
        Ok(Self {
            class,
            surface,
            target,
            segments,
        })
    }

    /// Fills the slots with the given text.
    pub fn instantiate(&self, p: &str, p1: Option<&str>) -> String {
        slot_regex()
            .replace_all(&self.surface, |caps: &regex::Captures<'_>| {
                if &caps[1] == "p1" {
                    p1.unwrap_or_default().to_string()
                } else {
                    p.to_string()
                }
            })
            .into_owned()
    }

    /// Attempts to match a question; returns the `(*p)` and `(*p1)` captures.
    fn capture(&self, question: &[char]) -> Option<(String, Option<String>)> {
        let mut captures = [None, None];
        if self.match_from(0, question, 0, &mut captures) {
            let [p, p1] = captures;
            Some((p?, p1))
        } else {
            None
        }
    }

    fn match_from(
        &self,
        seg: usize,
        question: &[char],
        pos: usize,
        captures: &mut [Option<String>; 2],
    ) -> bool {
        let Some(segment) = self.segments.get(seg) else {
            return pos == question.len();
        };
        match segment {
            Segment::Text(text) => {
                let end = pos + text.len();
                end <= question.len()
                    && question[pos..end]
                        .iter()
                        .zip(text)
                        .all(|(&q, &t)| fold(q) == t)
                    && self.match_from(seg + 1, question, end, captures)
            }
            Segment::Slot(slot) => {
                let idx = match slot {
                    Slot::P => 0,
                    Slot::P1 => 1,
                };
                // longest span first
                for end in (pos + 1..=question.len()).rev() {
                    let span: String = question[pos..end].iter().collect();
                    let span = span.trim();
                    if span.is_empty() {
                        continue;
                    }
                    if self.match_from(seg + 1, question, end, captures) {
                        captures[idx] = Some(span.to_string());
                        return true;
                    }
                }
                false
            }
        }
    }
}

/// Output of classification; only the fields of its class are populated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParsedQuestion {
    pub class: PatternClass,
    pub v1: String,
    pub v2: Option<String>,
    pub rel: Option<String>,
    pub prop: Option<String>,
}

impl ParsedQuestion {
    pub fn object(v1: &str, rel: &str) -> Self {
        Self {
            class: PatternClass::I,
            v1: v1.to_string(),
            v2: None,
            rel: Some(rel.to_string()),
            prop: None,
        }
    }

    pub fn property(v1: &str, prop: &str) -> Self {
        Self {
            class: PatternClass::II,
            v1: v1.to_string(),
            v2: None,
            rel: None,
            prop: Some(prop.to_string()),
        }
    }

    pub fn relationship(v1: &str, v2: &str) -> Self {
        Self {
            class: PatternClass::III,
            v1: v1.to_string(),
            v2: Some(v2.to_string()),
            rel: None,
            prop: None,
        }
    }
}

/// Turns a captured span into a node name.
pub fn entity_name(span: &str) -> String {
    span.split_whitespace().collect::<Vec<_>>().join("_")
}

/// Ordered template collection; earlier templates win.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TemplateRegistry {
    templates: Vec<QuestionTemplate>,
}

impl TemplateRegistry {
    /// The shipped default templates.
    pub fn builtin() -> Self {
        Self::load(BUILTIN_TEMPLATES.as_bytes()).expect("builtin templates are valid")
    }

    /// Reads `class|surface|target` lines. Blank lines and `#` comments are skipped.
    pub fn load<R: BufRead>(source: R) -> Result<Self, TemplateError> {
        let mut registry = Self::default();
        for (idx, line) in source.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.map_err(|e| TemplateError {
                line: line_no,
                kind: TemplateErrorKind::Io(e.to_string()),
            })?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split('|').collect();
            if fields.len() != 3 {
                return Err(TemplateError {
                    line: line_no,
                    kind: TemplateErrorKind::FieldCount(fields.len()),
                });
            }
            let at_line = |kind| TemplateError {
                line: line_no,
                kind,
            };
            let class: PatternClass = fields[0].trim().parse().map_err(at_line)?;
            let template = QuestionTemplate::new(class, fields[1], fields[2]).map_err(at_line)?;
            registry.push(template).map_err(at_line)?;
        }
        Ok(registry)
    }

    pub fn from_templates(templates: Vec<QuestionTemplate>) -> Result<Self, TemplateErrorKind> {
        let mut registry = Self::default();
        for t in templates {
            registry.push(t)?;
        }
        Ok(registry)
    }

    fn push(&mut self, template: QuestionTemplate) -> Result<(), TemplateErrorKind> {
        let key = template.surface.to_lowercase();
        if self
            .templates
            .iter()
            .any(|t| t.surface.to_lowercase() == key)
        {
            return Err(TemplateErrorKind::Duplicate(template.surface));
        }
        self.templates.push(template);
        Ok(())
    }

    pub fn templates(&self) -> &[QuestionTemplate] {
        &self.templates
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn classify(&self, question: &str) -> Result<ParsedQuestion, NoTemplateMatch> {
        let question: Vec<char> = normalize(question).chars().collect();
        for template in &self.templates {
            let Some((p, p1)) = template.capture(&question) else {
                continue;
            };
            let v1 = entity_name(&p);
            return Ok(match template.class {
                PatternClass::I => ParsedQuestion::object(&v1, &template.target),
                PatternClass::II => ParsedQuestion::property(&v1, &template.target),
                PatternClass::III => {
                    let Some(p1) = p1 else { continue };
                    ParsedQuestion::relationship(&v1, &entity_name(&p1))
                }
            });
        }
        Err(NoTemplateMatch)
    }
}
