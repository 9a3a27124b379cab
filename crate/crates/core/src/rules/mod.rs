//! Graph-pattern association rules.
//!
//! A rule has a path-shaped body of 1 to 4 edge atoms and a single head atom
//! over two distinct body variables:
//!
//! ```text
//! (a)-[hasChild]->(b)<-[hasChild]-(d) => (a)-[isMarriedTo]->(d)
//! ```
//!
//! Rules are scored with standard and PCA confidence ([`evaluate_confidence`]),
//! applied to predict missing head facts ([`predict`]) and mined level-wise
//! from a graph ([`mine`]).

mod confidence;
mod mine;
mod parse;

pub(crate) use confidence::predict_with;
pub use confidence::{evaluate_confidence, predict, ConfidenceReport, Prediction};
pub use mine::{mine, MinedRule, MiningParams};
pub use parse::parse_rule;

use std::collections::HashSet;
use std::fmt;
use std::io::BufRead;

use thiserror::Error;

use crate::graph::{Direction, EdgeAtom, PathPattern, PatternError};

const BUILTIN_RULES: &str = include_str!("../../../../rules/ismarriedto.rules");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("syntax error at column {column}: expected {expected}")]
    Syntax { column: usize, expected: String },
    #[error("rule body must have between 1 and 4 atoms, got {0}")]
    BodyLength(usize),
    #[error("head variable {0:?} does not occur in the body")]
    UnsafeHead(String),
    #[error("head must connect two distinct variables")]
    DegenerateHead,
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error("rule head predicts {head:?}, not {requested:?}")]
    HeadMismatch { head: String, requested: String },
    #[error("max_body must be between 1 and 4, got {0}")]
    MaxBody(usize),
    #[error("duplicate rule name {0:?}")]
    DuplicateName(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("rule line {line}: {source}")]
pub struct RuleFileError {
    pub line: usize,
    #[source]
    pub source: RuleError,
}

/// `body => head`, where both head variables occur in the body.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AssociationRule {
    pub name: Option<String>,
    body: PathPattern,
    head: EdgeAtom,
}

impl AssociationRule {
    pub fn new(body: PathPattern, head: EdgeAtom) -> Result<Self, RuleError> {
        for var in [&head.from, &head.to] {
            if !body.contains_var(var) {
                return Err(RuleError::UnsafeHead(var.clone()));
            }
        }
        if head.from == head.to {
            return Err(RuleError::DegenerateHead);
        }
        Ok(Self {
            name: None,
            body,
            head,
        })
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn body(&self) -> &PathPattern {
        &self.body
    }

    pub fn head(&self) -> &EdgeAtom {
        &self.head
    }

    pub fn head_relation(&self) -> &str {
        &self.head.relation
    }

    /// Name if set, otherwise the rule text.
    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.to_string())
    }

    /// Text that is identical for rules equal up to variable renaming and
    /// reading the body path in the opposite direction.
    pub fn canonical_text(&self) -> String {
        if !self.body.is_chain() {
            return self.to_string();
        }
        let atoms = self.body.atoms();
        let mut vars: Vec<&str> = vec![&atoms[0].from];
        vars.extend(atoms.iter().map(|a| a.to.as_str()));
        let steps: Vec<(&str, Direction)> = atoms
            .iter()
            .map(|a| (a.relation.as_str(), a.direction))
            .collect();

        let forward = render_chain(&vars, &steps, &self.head);
        let rev_vars: Vec<&str> = vars.iter().rev().copied().collect();
        let rev_steps: Vec<(&str, Direction)> = steps
            .iter()
            .rev()
            .map(|&(r, d)| (r, d.reversed()))
            .collect();
        let backward = render_chain(&rev_vars, &rev_steps, &self.head);
        forward.min(backward)
    }
}

fn var_letter(i: usize) -> String {
    const LETTERS: &[u8] = b"abcdefghijklmnopqrstuvwxyz";
    match LETTERS.get(i) {
        Some(&c) => (c as char).to_string(),
        None => format!("v{i}"),
    }
}

fn render_chain(vars: &[&str], steps: &[(&str, Direction)], head: &EdgeAtom) -> String {
    let mut seen: Vec<String> = Vec::new();
    let mut rename = |v: &str| -> String {
        let idx = seen.iter().position(|n| n == v).unwrap_or_else(|| {
            seen.push(v.to_string());
            seen.len() - 1
        });
        var_letter(idx)
    };
    let mut out = format!("({})", rename(vars[0]));
    for (i, &(rel, dir)) in steps.iter().enumerate() {
        let to = rename(vars[i + 1]);
        match dir {
            Direction::Forward => out.push_str(&format!("-[{rel}]->({to})")),
            Direction::Backward => out.push_str(&format!("<-[{rel}]-({to})")),
        }
    }
    let src = rename(head.source());
    let dst = rename(head.target());
    out.push_str(&format!(" => ({src})-[{}]->({dst})", head.relation));
    out
}

impl fmt::Display for AssociationRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} => {}", self.body, self.head)
    }
}

/// Named rules in file order. Unnamed rules are called `r1`, `r2`, ... by position.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RuleSet {
    rules: Vec<AssociationRule>,
}

impl RuleSet {
    /// The shipped isMarriedTo rules.
    pub fn builtin() -> Self {
        Self::load(BUILTIN_RULES.as_bytes()).expect("builtin rules are valid")
    }

    pub fn load<R: BufRead>(source: R) -> Result<Self, RuleFileError> {
        let mut rules = Vec::new();
        let mut lines = Vec::new();
        for (idx, line) in source.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.map_err(|e| RuleFileError {
                line: line_no,
                source: RuleError::Syntax {
                    column: 0,
                    expected: format!("readable UTF-8 ({e})"),
                },
            })?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let rule = parse_rule(trimmed).map_err(|source| RuleFileError {
                line: line_no,
                source,
            })?;
            rules.push(rule);
            lines.push(line_no);
        }
        Self::from_rules(rules).map_err(|(i, source)| RuleFileError {
            line: lines[i],
            source,
        })
    }

    /// Fails with the index of the first rule whose name is already taken.
    pub fn from_rules(rules: Vec<AssociationRule>) -> Result<Self, (usize, RuleError)> {
        let mut seen = HashSet::new();
        let mut named = Vec::with_capacity(rules.len());
        for (i, mut rule) in rules.into_iter().enumerate() {
            let name = rule
                .name
                .get_or_insert_with(|| format!("r{}", i + 1))
                .clone();
            if !seen.insert(name.clone()) {
                return Err((i, RuleError::DuplicateName(name)));
            }
            named.push(rule);
        }
        Ok(Self { rules: named })
    }

    pub fn rules(&self) -> &[AssociationRule] {
        &self.rules
    }

    pub fn get(&self, name: &str) -> Option<&AssociationRule> {
        self.rules.iter().find(|r| r.name.as_deref() == Some(name))
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, AssociationRule> {
        self.rules.iter()
    }
}

impl<'a> IntoIterator for &'a RuleSet {
    type Item = &'a AssociationRule;
    type IntoIter = std::slice::Iter<'a, AssociationRule>;

    fn into_iter(self) -> Self::IntoIter {
        self.rules.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_rules_are_named() {
        let rules = RuleSet::builtin();
        assert_eq!(rules.len(), 3);
        let names: Vec<_> = rules.iter().map(|r| r.name.clone().unwrap()).collect();
        assert_eq!(names, ["r1", "r2", "r3"]);
        assert!(rules.iter().all(|r| r.head_relation() == "isMarriedTo"));
        assert_eq!(rules.get("r3").unwrap().body().len(), 3);
    }

    #[test]
    fn unnamed_rules_get_positional_names() {
        let text = "(a)-[x]->(b) => (b)-[y]->(a)\nfoo: (a)-[x]->(b) => (a)-[z]->(b)\n";
        let rules = RuleSet::load(text.as_bytes()).unwrap();
        assert_eq!(rules.rules()[0].name.as_deref(), Some("r1"));
        assert_eq!(rules.rules()[1].name.as_deref(), Some("foo"));
    }

    #[test]
    fn duplicate_names_are_rejected() {
        let text = "# two\nx: (a)-[r]->(b) => (a)-[s]->(b)\n\nx: (a)-[r]->(b) => (b)-[s]->(a)\n";
        let err = RuleSet::load(text.as_bytes()).unwrap_err();
        assert_eq!(err.line, 4);
        assert_eq!(err.source, RuleError::DuplicateName("x".into()));
    }

    #[test]
    fn bad_rule_line_is_reported() {
        let err = RuleSet::load("(a)-[r]->(b) => (c)-[s]->(d)\n".as_bytes()).unwrap_err();
        assert_eq!(err.line, 1);
        assert!(matches!(err.source, RuleError::UnsafeHead(_)));
    }

    #[test]
    fn canonical_text_ignores_naming_and_orientation() {
        let a =
            parse_rule("(a)-[hasChild]->(b)<-[hasChild]-(d) => (a)-[isMarriedTo]->(d)").unwrap();
        let b =
            parse_rule("(x)-[hasChild]->(y)<-[hasChild]-(z) => (z)<-[isMarriedTo]-(x)").unwrap();
        let c =
            parse_rule("(d)-[hasChild]->(b)<-[hasChild]-(a) => (d)-[isMarriedTo]->(a)").unwrap();
        assert_eq!(a.canonical_text(), b.canonical_text());
        assert_eq!(a.canonical_text(), c.canonical_text());
        assert_eq!(
            a.canonical_text(),
            "(a)-[hasChild]->(b)<-[hasChild]-(c) => (a)-[isMarriedTo]->(c)"
        );

        let p = parse_rule("(a)-[actedIn]->(b)<-[directed]-(d) => (a)-[isMarriedTo]->(d)").unwrap();
        let q = parse_rule("(d)-[directed]->(b)<-[actedIn]-(a) => (a)-[isMarriedTo]->(d)").unwrap();
        assert_eq!(p.canonical_text(), q.canonical_text());
        // different head direction is a different rule
        let r = parse_rule("(a)-[actedIn]->(b)<-[directed]-(d) => (d)-[isMarriedTo]->(a)").unwrap();
        assert_ne!(p.canonical_text(), r.canonical_text());
    }
}
