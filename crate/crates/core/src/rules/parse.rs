use crate::graph::{Direction, EdgeAtom, PathPattern};

use super::{AssociationRule, RuleError};

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) {
        let rest = self.rest();
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn error(&self, expected: &str) -> RuleError {
        RuleError::Syntax {
            column: self.text[..self.pos].chars().count() + 1,
            expected: expected.to_string(),
        }
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<(), RuleError> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.error(&format!("{token:?}")))
        }
    }

    fn peek(&mut self, token: &str) -> bool {
        self.skip_ws();
        self.rest().starts_with(token)
    }

    fn variable(&mut self) -> Result<String, RuleError> {
        self.expect("(")?;
        self.skip_ws();
        let len: usize = self
            .rest()
            .chars()
            .take_while(|c| c.is_alphanumeric() || *c == '_')
            .map(char::len_utf8)
            .sum();
        if len == 0 {
            return Err(self.error("variable name"));
        }
        let name = self.rest()[..len].to_string();
        self.pos += len;
        self.expect(")")?;
        Ok(name)
    }

    fn relation(&mut self) -> Result<String, RuleError> {
        self.expect("[")?;
        let Some(end) = self.rest().find(']') else {
            return Err(self.error("\"]\""));
        };
        let relation = self.rest()[..end].trim().to_string();
        if relation.is_empty() || relation.contains(['[', '(', ')']) {
            return Err(self.error("relation name"));
        }
        self.pos += end + 1;
        Ok(relation)
    }

    fn chain(&mut self) -> Result<Vec<EdgeAtom>, RuleError> {
        let mut from = self.variable()?;
        let mut atoms = Vec::new();
        loop {
            let direction = if self.eat("<-") {
                Direction::Backward
            } else if self.eat("-") {
                Direction::Forward
            } else {
                break;
            };
            let relation = self.relation()?;
            match direction {
                Direction::Forward => self.expect("->")?,
                Direction::Backward => self.expect("-")?,
            }
            let to = self.variable()?;
            atoms.push(EdgeAtom {
                from: from.clone(),
                relation,
                to: to.clone(),
                direction,
            });
            from = to;
        }
        Ok(atoms)
    }
}

/// Parses `[name:] body => head`.
///
/// The body is a chain of `(x)-[rel]->(y)` / `(x)<-[rel]-(y)` segments with
/// 1 to 4 edges; the head is a single segment over two body variables.
pub fn parse_rule(text: &str) -> Result<AssociationRule, RuleError> {
    let (name, rule_text, offset) = match text.find('(') {
        Some(open) if text[..open].contains(':') => {
            let colon = text[..open].find(':').expect("checked");
            let name = text[..colon].trim();
            if name.is_empty() {
                return Err(RuleError::Syntax {
                    column: 1,
                    expected: "rule name before ':'".into(),
                });
            }
            (Some(name.to_string()), &text[colon + 1..], colon + 1)
        }
        _ => (None, text, 0),
    };
    let mut cursor = Cursor {
        text: rule_text,
        pos: 0,
    };
    let shift = |e: RuleError| match e {
        RuleError::Syntax { column, expected } => RuleError::Syntax {
            column: column + text[..offset].chars().count(),
            expected,
        },
        other => other,
    };

    let body = cursor.chain().map_err(shift)?;
    if body.is_empty() || body.len() > PathPattern::MAX_ATOMS {
        if body.is_empty() && !cursor.peek("=>") {
            return Err(shift(cursor.error("an edge segment")));
        }
        return Err(RuleError::BodyLength(body.len()));
    }
    cursor.expect("=>").map_err(shift)?;
    let mut head = cursor.chain().map_err(shift)?;
    if head.len() != 1 {
        return Err(shift(cursor.error("exactly one head edge")));
    }
    cursor.skip_ws();
    if !cursor.rest().is_empty() {
        return Err(shift(cursor.error("end of rule")));
    }

    let body = PathPattern::new(body)?;
    let mut rule = AssociationRule::new(body, head.remove(0))?;
    rule.name = name;
    Ok(rule)
}
