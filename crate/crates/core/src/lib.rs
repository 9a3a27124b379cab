//! Question answering over a property graph, with association rules that
//! predict missing facts when a direct lookup comes back empty.
//!
//! The flow is: [`question`] turns a natural-language question into a
//! [`question::ParsedQuestion`], [`planner`] maps it onto a graph query and
//! runs it against a [`graph::PropertyGraph`], and [`pipeline`] falls back to
//! [`rules`] when an object question has no direct answer.

pub mod cli;
pub mod graph;
pub mod pipeline;
pub mod planner;
pub mod question;
pub mod rules;

pub use graph::{load_triples, IngestConfig, PropertyGraph};
pub use pipeline::{answer, Answer, AnswerOptions, AnswerStatus, Engine};
pub use question::{ParsedQuestion, PatternClass, TemplateRegistry};
pub use rules::{AssociationRule, RuleSet};
