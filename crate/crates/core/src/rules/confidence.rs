use std::collections::{BTreeSet, HashSet};
use std::ops::ControlFlow;

use serde::Serialize;

use crate::graph::{CompiledPattern, NodeId, PropertyGraph};

use super::{AssociationRule, RuleError};

/// Counts behind a rule's standard and PCA confidence.
///
/// All counts are over distinct `(u, w)` pairs, where `u` and `w` are the
/// nodes bound to the head's source and target variables:
///
/// * `body_count`: pairs for which the body matches.
/// * `support`: body pairs for which the head edge `u -[r]-> w` exists.
/// * `pca_body_count`: body pairs whose `u` has at least one `r` edge.
///
/// A zero denominator gives a confidence of 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConfidenceReport {
    pub support: usize,
    pub body_count: usize,
    pub pca_body_count: usize,
    pub std_conf: f64,
    pub pca_conf: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl ConfidenceReport {
    pub fn from_counts(support: usize, body_count: usize, pca_body_count: usize) -> Self {
        debug_assert!(support <= pca_body_count && pca_body_count <= body_count);
        Self {
            support,
            body_count,
            pca_body_count,
            std_conf: ratio(support, body_count),
            pca_conf: ratio(support, pca_body_count),
        }
    }

    pub fn meets(&self, min_std_conf: f64, min_pca_conf: f64) -> bool {
        self.std_conf >= min_std_conf && self.pca_conf >= min_pca_conf
    }
}

/// Distinct `(head source, head target)` pairs over all body matches.
fn body_pairs(graph: &PropertyGraph, rule: &AssociationRule) -> HashSet<(NodeId, NodeId)> {
    let body = CompiledPattern::compile(graph, rule.body());
    let u = body.var_index(rule.head().source()).expect("safe rule");
    let w = body.var_index(rule.head().target()).expect("safe rule");
    let mut pairs = HashSet::new();
    let _ = body.search(graph).for_each(|nodes| {
        pairs.insert((nodes[u], nodes[w]));
        ControlFlow::Continue(())
    });
    pairs
}

pub fn evaluate_confidence(graph: &PropertyGraph, rule: &AssociationRule) -> ConfidenceReport {
    let pairs = body_pairs(graph, rule);
    let head = graph.relation_id(rule.head_relation());
    let (mut support, mut pca_body) = (0, 0);
    if let Some(r) = head {
        for &(u, w) in &pairs {
            if graph.has_out_edge(u, r) {
                pca_body += 1;
                if graph.has_edge(u, r, w) {
                    support += 1;
                }
            }
        }
    }
    let report = ConfidenceReport::from_counts(support, pairs.len(), pca_body);
    assert!(report.pca_conf >= report.std_conf);
    report
}

/// A head fact missing from the graph but implied by a rule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction {
    pub subject: String,
    pub relation: String,
    pub object: String,
    pub rule: String,
    pub std_conf: f64,
    pub pca_conf: f64,
}

/// Applies `rule` with its head source pinned to `subject`.
///
/// Returns one prediction per distinct object whose head edge is absent,
/// ordered by object node id, each carrying the rule's graph-wide confidence.
/// An unknown subject yields no predictions.
pub fn predict(
    graph: &PropertyGraph,
    rule: &AssociationRule,
    subject: &str,
    relation: &str,
) -> Result<Vec<Prediction>, RuleError> {
    if rule.head_relation() != relation {
        return Err(RuleError::HeadMismatch {
            head: rule.head_relation().to_string(),
            requested: relation.to_string(),
        });
    }
    let Some(subject) = graph.node_by_name(subject) else {
        return Ok(Vec::new());
    };
    let report = evaluate_confidence(graph, rule);
    Ok(predict_with(graph, rule, &report, subject))
}

pub(crate) fn predict_with(
    graph: &PropertyGraph,
    rule: &AssociationRule,
    report: &ConfidenceReport,
    subject: NodeId,
) -> Vec<Prediction> {
    let body = CompiledPattern::compile(graph, rule.body());
    let u = body.var_index(rule.head().source()).expect("safe rule");
    let w = body.var_index(rule.head().target()).expect("safe rule");
    let head = graph.relation_id(rule.head_relation());

    let mut objects = BTreeSet::new();
    let _ = body.search(graph).seed(u, subject).for_each(|nodes| {
        let object = nodes[w];
        if !head.is_some_and(|r| graph.has_edge(subject, r, object)) {
            objects.insert(object);
        }
        ControlFlow::Continue(())
    });
    objects
        .into_iter()
        .map(|object| Prediction {
            subject: graph.node_name(subject).to_string(),
            relation: rule.head_relation().to_string(),
            object: graph.node_name(object).to_string(),
            rule: rule.label(),
            std_conf: report.std_conf,
            pca_conf: report.pca_conf,
        })
        .collect()
}
