//! Question-to-query compilation and execution.
//!
//! A [`ParsedQuestion`] becomes a [`GraphComponent`] (node + edge label, node +
//! property key, or node pair), which compiles to a [`GraphQuery`]. Query
//! semantics:
//!
//! * `FindObjects{s, r}`: every `o` with an edge `s -[r]-> o`, sorted by node id.
//! * `FindProperty{s, k}`: the literal stored under key `k` on `s`, if any.
//! * `FindRelations{a, b}`: the label of every edge `a -> b` (tagged forward)
//!   and `b -> a` (tagged backward), forward first, then by relation label.
//!
//! Unknown entity names produce empty results, never errors.

use serde::Serialize;
use thiserror::Error;

use crate::graph::{Direction, PropertyGraph};
use crate::question::{ParsedQuestion, PatternClass};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphComponent {
    NodeEdge {
        node_name: String,
        edge_label: String,
    },
    NodeProperty {
        node_name: String,
        property_key: String,
    },
    NodePair {
        node_name_1: String,
        node_name_2: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphQuery {
    FindObjects {
        subject_name: String,
        relation: String,
    },
    FindProperty {
        subject_name: String,
        key: String,
    },
    FindRelations {
        name_1: String,
        name_2: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelationHit {
    pub relation: String,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QueryResult {
    Objects(Vec<String>),
    Literal(Option<String>),
    Relations(Vec<RelationHit>),
}

impl QueryResult {
    pub fn is_empty(&self) -> bool {
        match self {
            QueryResult::Objects(v) => v.is_empty(),
            QueryResult::Literal(v) => v.is_none(),
            QueryResult::Relations(v) => v.is_empty(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlannerError {
    #[error("class {class} question is missing {field}")]
    MissingField {
        class: PatternClass,
        field: &'static str,
    },
    #[error("class {class} question must not set {field}")]
    UnexpectedField {
        class: PatternClass,
        field: &'static str,
    },
}

fn require<'a>(
    class: PatternClass,
    field: &'static str,
    value: &'a Option<String>,
) -> Result<&'a str, PlannerError> {
    match value.as_deref() {
        Some(v) if !v.is_empty() => Ok(v),
        _ => Err(PlannerError::MissingField { class, field }),
    }
}

fn forbid(
    class: PatternClass,
    field: &'static str,
    value: &Option<String>,
) -> Result<(), PlannerError> {
    match value {
        Some(_) => Err(PlannerError::UnexpectedField { class, field }),
        None => Ok(()),
    }
}

pub fn to_graph_component(q: &ParsedQuestion) -> Result<GraphComponent, PlannerError> {
    let class = q.class;
    if q.v1.is_empty() {
        return Err(PlannerError::MissingField { class, field: "v1" });
    }
    match class {
        PatternClass::I => {
            let rel = require(class, "rel", &q.rel)?;
            forbid(class, "v2", &q.v2)?;
            forbid(class, "prop", &q.prop)?;
            Ok(GraphComponent::NodeEdge {
                node_name: q.v1.clone(),
                edge_label: rel.to_string(),
            })
        }
        PatternClass::II => {
            let prop = require(class, "prop", &q.prop)?;
            forbid(class, "v2", &q.v2)?;
            forbid(class, "rel", &q.rel)?;
            Ok(GraphComponent::NodeProperty {
                node_name: q.v1.clone(),
                property_key: prop.to_string(),
            })
        }
        PatternClass::III => {
            let v2 = require(class, "v2", &q.v2)?;
            forbid(class, "rel", &q.rel)?;
            forbid(class, "prop", &q.prop)?;
            Ok(GraphComponent::NodePair {
                node_name_1: q.v1.clone(),
                node_name_2: v2.to_string(),
            })
        }
    }
}

pub fn to_query(c: &GraphComponent) -> GraphQuery {
    match c {
        GraphComponent::NodeEdge {
            node_name,
            edge_label,
        } => GraphQuery::FindObjects {
            subject_name: node_name.clone(),
            relation: edge_label.clone(),
        },
        GraphComponent::NodeProperty {
            node_name,
            property_key,
        } => GraphQuery::FindProperty {
            subject_name: node_name.clone(),
            key: property_key.clone(),
        },
        GraphComponent::NodePair {
            node_name_1,
            node_name_2,
        } => GraphQuery::FindRelations {
            name_1: node_name_1.clone(),
            name_2: node_name_2.clone(),
        },
    }
}

pub fn execute(graph: &PropertyGraph, query: &GraphQuery) -> QueryResult {
    match query {
        GraphQuery::FindObjects {
            subject_name,
            relation,
        } => {
            let objects = match (
                graph.node_by_name(subject_name),
                graph.relation_id(relation),
            ) {
                (Some(s), Some(r)) => graph
                    .out_neighbors(s, r)
                    .iter()
                    .map(|&o| graph.node_name(o).to_string())
                    .collect(),
                _ => Vec::new(),
            };
            QueryResult::Objects(objects)
        }
        GraphQuery::FindProperty { subject_name, key } => QueryResult::Literal(
            graph
                .node_by_name(subject_name)
                .and_then(|s| graph.property(s, key))
                .map(String::from),
        ),
        GraphQuery::FindRelations { name_1, name_2 } => {
            let (Some(a), Some(b)) = (graph.node_by_name(name_1), graph.node_by_name(name_2))
            else {
                return QueryResult::Relations(Vec::new());
            };
            let hits = |from, to, direction| {
                graph
                    .out_edges(from)
                    .iter()
                    .filter(move |&&(_, n)| n == to)
                    .map(move |&(r, _)| RelationHit {
                        relation: graph.relation_name(r).to_string(),
                        direction,
                    })
            };
            let mut found: Vec<RelationHit> = hits(a, b, Direction::Forward)
                .chain(hits(b, a, Direction::Backward))
                .collect();
            found.sort_by(|x, y| (x.direction, &x.relation).cmp(&(y.direction, &y.relation)));
            QueryResult::Relations(found)
        }
    }
}

/// Classify-free shortcut: component, query and execution in one step.
pub fn run_question(
    graph: &PropertyGraph,
    q: &ParsedQuestion,
) -> Result<QueryResult, PlannerError> {
    Ok(execute(graph, &to_query(&to_graph_component(q)?)))
}
