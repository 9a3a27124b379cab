//! End-to-end answering: classify, plan, execute, and for object questions
//! fall back to rule predictions when the graph holds no direct answer.

use std::collections::HashSet;
use std::io::BufRead;
use std::sync::OnceLock;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{Direction, PropertyGraph};
use crate::planner::{run_question, PlannerError, QueryResult};
use crate::question::{NoTemplateMatch, ParsedQuestion, PatternClass, TemplateRegistry};
use crate::rules::{evaluate_confidence, predict_with, ConfidenceReport, Prediction, RuleSet};

const BUILTIN_SENTENCES: &str = include_str!("../../../data/sentences.txt");

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnswerOptions {
    /// Predict missing object answers from rules.
    pub use_rules: bool,
    pub min_std_conf: f64,
    pub min_pca_conf: f64,
}

impl Default for AnswerOptions {
    fn default() -> Self {
        Self {
            use_rules: false,
            min_std_conf: 0.5,
            min_pca_conf: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{name} must be within [0, 1], got {value}")]
pub struct ThresholdError {
    pub name: &'static str,
    pub value: f64,
}

impl AnswerOptions {
    pub fn new(
        use_rules: bool,
        min_std_conf: f64,
        min_pca_conf: f64,
    ) -> Result<Self, ThresholdError> {
        for (name, value) in [
            ("min_std_conf", min_std_conf),
            ("min_pca_conf", min_pca_conf),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(ThresholdError { name, value });
            }
        }
        Ok(Self {
            use_rules,
            min_std_conf,
            min_pca_conf,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AnswerStatus {
    Direct,
    Inferred,
    NoAnswer,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnswerValue {
    pub value: String,
    /// Set for relation answers: which way the edge points between the two entities.
    pub direction: Option<Direction>,
    pub provenance: Option<Prediction>,
}

impl AnswerValue {
    fn plain(value: String) -> Self {
        Self {
            value,
            direction: None,
            provenance: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Answer {
    pub status: AnswerStatus,
    pub values: Vec<AnswerValue>,
    pub question_class: PatternClass,
}

impl Answer {
    fn none(class: PatternClass) -> Self {
        Self {
            status: AnswerStatus::NoAnswer,
            values: Vec::new(),
            question_class: class,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnswerError {
    #[error(transparent)]
    NoTemplateMatch(#[from] NoTemplateMatch),
    #[error(transparent)]
    Planner(#[from] PlannerError),
}

/// Graph, templates and rules bundled for repeated questions. Rule
/// confidences are computed on first use and cached.
pub struct Engine<'a> {
    graph: &'a PropertyGraph,
    registry: &'a TemplateRegistry,
    rules: &'a RuleSet,
    reports: Vec<OnceLock<ConfidenceReport>>,
}

impl<'a> Engine<'a> {
    pub fn new(
        graph: &'a PropertyGraph,
        registry: &'a TemplateRegistry,
        rules: &'a RuleSet,
    ) -> Self {
        Self {
            graph,
            registry,
            rules,
            reports: (0..rules.len()).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn graph(&self) -> &PropertyGraph {
        self.graph
    }

    fn report(&self, idx: usize) -> &ConfidenceReport {
        self.reports[idx].get_or_init(|| evaluate_confidence(self.graph, &self.rules.rules()[idx]))
    }

    pub fn classify(&self, question: &str) -> Result<ParsedQuestion, NoTemplateMatch> {
        self.registry.classify(question)
    }

    pub fn answer(&self, question: &str, options: &AnswerOptions) -> Result<Answer, AnswerError> {
        let parsed = self.classify(question)?;
        Ok(self.answer_parsed(&parsed, options)?)
    }

    pub fn answer_parsed(
        &self,
        parsed: &ParsedQuestion,
        options: &AnswerOptions,
    ) -> Result<Answer, PlannerError> {
        let class = parsed.class;
        let result = run_question(self.graph, parsed)?;
        let answer = match result {
            QueryResult::Objects(objects) if !objects.is_empty() => Answer {
                status: AnswerStatus::Direct,
                values: objects.into_iter().map(AnswerValue::plain).collect(),
                question_class: class,
            },
            QueryResult::Objects(_) if options.use_rules => {
                let rel = parsed.rel.as_deref().expect("class I has a relation");
                self.infer(&parsed.v1, rel, options)
            }
            QueryResult::Literal(Some(value)) => Answer {
                status: AnswerStatus::Direct,
                values: vec![AnswerValue::plain(value)],
                question_class: class,
            },
            QueryResult::Relations(hits) if !hits.is_empty() => Answer {
                status: AnswerStatus::Direct,
                values: hits
                    .into_iter()
                    .map(|h| AnswerValue {
                        value: h.relation,
                        direction: Some(h.direction),
                        provenance: None,
                    })
                    .collect(),
                question_class: class,
            },
            _ => Answer::none(class),
        };
        Ok(answer)
    }

    fn infer(&self, subject: &str, relation: &str, options: &AnswerOptions) -> Answer {
        let Some(subject_id) = self.graph.node_by_name(subject) else {
            return Answer::none(PatternClass::I);
        };
        let mut usable: Vec<(usize, &ConfidenceReport)> = self
            .rules
            .iter()
            .enumerate()
            .filter(|(_, rule)| rule.head_relation() == relation)
            .map(|(idx, _)| (idx, self.report(idx)))
            .filter(|(_, report)| report.meets(options.min_std_conf, options.min_pca_conf))
            .collect();
        usable.sort_by(|(ia, a), (ib, b)| {
            b.pca_conf
                .total_cmp(&a.pca_conf)
                .then_with(|| b.std_conf.total_cmp(&a.std_conf))
                .then_with(|| {
                    self.rules.rules()[*ia]
                        .label()
                        .cmp(&self.rules.rules()[*ib].label())
                })
        });

        let mut seen = HashSet::new();
        let mut values = Vec::new();
        for (idx, report) in usable {
            let rule = &self.rules.rules()[idx];
            for prediction in predict_with(self.graph, rule, report, subject_id) {
                if seen.insert(prediction.object.clone()) {
                    values.push(AnswerValue {
                        value: prediction.object.clone(),
                        direction: None,
                        provenance: Some(prediction),
                    });
                }
            }
        }
        if values.is_empty() {
            Answer::none(PatternClass::I)
        } else {
            Answer {
                status: AnswerStatus::Inferred,
                values,
                question_class: PatternClass::I,
            }
        }
    }
}

/// One-shot version of [`Engine::answer`].
pub fn answer(
    graph: &PropertyGraph,
    registry: &TemplateRegistry,
    rules: &RuleSet,
    question: &str,
    options: &AnswerOptions,
) -> Result<Answer, AnswerError> {
    Engine::new(graph, registry, rules).answer(question, options)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("sentence line {line}: expected 'relation|sentence'")]
pub struct SentenceError {
    pub line: usize,
}

/// Relation-keyed answer sentences with `<subject>`, `<object>` and
/// `<value>` placeholders.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SentenceTemplates {
    entries: Vec<(String, String)>,
}

impl SentenceTemplates {
    pub fn builtin() -> Self {
        Self::load(BUILTIN_SENTENCES.as_bytes()).expect("builtin sentences are valid")
    }

    pub fn load<R: BufRead>(source: R) -> Result<Self, SentenceError> {
        let mut entries = Vec::new();
        for (idx, line) in source.lines().enumerate() {
            let line = line.map_err(|_| SentenceError { line: idx + 1 })?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            match trimmed.split_once('|') {
                Some((rel, sentence)) if !rel.trim().is_empty() && !sentence.trim().is_empty() => {
                    entries.push((rel.trim().to_string(), sentence.trim().to_string()));
                }
                _ => return Err(SentenceError { line: idx + 1 }),
            }
        }
        Ok(Self { entries })
    }

    fn template(&self, relation: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(r, _)| r == relation)
            .map(|(_, s)| s.as_str())
    }

    /// Renders one fact, falling back to `<subject> <relation> <object>`.
    pub fn sentence(&self, relation: &str, subject: &str, object: &str) -> String {
        let subject = display_name(subject);
        let object = display_name(object);
        match self.template(relation) {
            Some(t) => t
                .replace("<subject>", &subject)
                .replace("<object>", &object)
                .replace("<value>", &object),
            None => format!("{subject} {relation} {object}"),
        }
    }

    pub fn format(&self, answer: &Answer, parsed: &ParsedQuestion) -> String {
        if answer.status == AnswerStatus::NoAnswer || answer.values.is_empty() {
            return "no answer".to_string();
        }
        let sentences: Vec<String> = answer
            .values
            .iter()
            .map(|v| {
                let mut text = match parsed.class {
                    PatternClass::I => self.sentence(
                        parsed.rel.as_deref().unwrap_or_default(),
                        &parsed.v1,
                        &v.value,
                    ),
                    PatternClass::II => self.sentence(
                        parsed.prop.as_deref().unwrap_or_default(),
                        &parsed.v1,
                        &v.value,
                    ),
                    PatternClass::III => {
                        let v2 = parsed.v2.as_deref().unwrap_or_default();
                        match v.direction {
                            Some(Direction::Backward) => self.sentence(&v.value, v2, &parsed.v1),
                            _ => self.sentence(&v.value, &parsed.v1, v2),
                        }
                    }
                };
                if let Some(p) = &v.provenance {
                    text.push_str(&format!(
                        " (inferred by rule {}, PCA confidence {:.4})",
                        p.rule, p.pca_conf
                    ));
                }
                text
            })
            .collect();
        sentences.join("; ")
    }
}

/// `Malekeh_Jahan` -> `Malekeh Jahan`.
pub fn display_name(name: &str) -> String {
    name.replace('_', " ")
}

/// Formats with the shipped sentence templates.
pub fn format_answer(answer: &Answer, parsed: &ParsedQuestion) -> String {
    SentenceTemplates::builtin().format(answer, parsed)
}
