//! Level-wise rule mining.
//!
//! Candidates are `(head relation, head anchors, body path)` triples. The body
//! is a path over positional variables `v0 .. vk`; the head connects the
//! variables at two anchor positions, which may lie beyond the current path
//! end while the path is still growing. Paths grow by one atom per level at
//! their end, in either direction, over every relation in the graph.
//!
//! Pruning uses the head-anchored support of a candidate: the number of head
//! facts `r(u, w)` (with `u != w`) for which the body has an injective match
//! placing `u` and `w` at their anchors (anchors past the path end only
//! exclude `u` / `w` from the body). Appending an atom only adds constraints,
//! so this count never grows from one level to the next; a candidate below
//! `min_support` therefore has no descendant rule that could reach it. Once
//! both anchors are on the path the count equals the rule's support.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::graph::{CompiledPattern, Direction, EdgeAtom, PathPattern, PropertyGraph, RelationId};

use super::{
    evaluate_confidence, parse_rule, var_letter, AssociationRule, ConfidenceReport, RuleError,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiningParams {
    pub max_body: usize,
    pub min_support: usize,
    pub min_std_conf: f64,
    pub min_pca_conf: f64,
}

impl Default for MiningParams {
    fn default() -> Self {
        Self {
            max_body: 2,
            min_support: 2,
            min_std_conf: 0.0,
            min_pca_conf: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinedRule {
    pub rule: AssociationRule,
    pub report: ConfidenceReport,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Candidate {
    head: RelationId,
    anchors: (usize, usize),
    steps: Vec<(RelationId, Direction)>,
}

impl Candidate {
    fn len(&self) -> usize {
        self.steps.len()
    }

    fn is_safe(&self) -> bool {
        self.anchors.0 <= self.len() && self.anchors.1 <= self.len()
    }

    // The head atom literally appears in the body.
    fn is_tautology(&self) -> bool {
        let (i, j) = self.anchors;
        self.steps.iter().enumerate().any(|(t, &(r, dir))| {
            r == self.head
                && match dir {
                    Direction::Forward => t == i && t + 1 == j,
                    Direction::Backward => t + 1 == i && t == j,
                }
        })
    }

    fn atoms(&self) -> Vec<(usize, RelationId, usize)> {
        self.steps
            .iter()
            .enumerate()
            .map(|(t, &(r, dir))| match dir {
                Direction::Forward => (t, r, t + 1),
                Direction::Backward => (t + 1, r, t),
            })
            .collect()
    }

    /// Whether the head-anchored support reaches `threshold`.
    fn reaches(&self, graph: &PropertyGraph, threshold: usize) -> bool {
        if threshold == 0 {
            return true;
        }
        let pattern = CompiledPattern::from_atoms(self.len() + 1, &self.atoms());
        let (i, j) = self.anchors;
        let last = self.len();
        let mut count = 0;
        for &(u, w) in graph.relation_edges(self.head) {
            if u == w {
                continue;
            }
            let mut search = pattern.search(graph);
            if i <= last {
                search.seed(i, u);
            } else {
                search.forbid(u);
            }
            if j <= last {
                search.seed(j, w);
            } else {
                search.forbid(w);
            }
            if search.exists() {
                count += 1;
                if count >= threshold {
                    return true;
                }
            }
        }
        false
    }

    fn to_rule(&self, graph: &PropertyGraph) -> AssociationRule {
        let atoms: Vec<EdgeAtom> = self
            .steps
            .iter()
            .enumerate()
            .map(|(t, &(r, direction))| EdgeAtom {
                from: var_letter(t),
                relation: graph.relation_name(r).to_string(),
                to: var_letter(t + 1),
                direction,
            })
            .collect();
        let head = EdgeAtom::forward(
            &var_letter(self.anchors.0),
            graph.relation_name(self.head),
            &var_letter(self.anchors.1),
        );
        let body = PathPattern::new(atoms).expect("mined paths have 1..=4 atoms");
        AssociationRule::new(body, head).expect("safe candidate")
    }
}

fn compare_mined(a: &MinedRule, b: &MinedRule) -> Ordering {
    b.report
        .pca_conf
        .total_cmp(&a.report.pca_conf)
        .then_with(|| b.report.std_conf.total_cmp(&a.report.std_conf))
        .then_with(|| a.rule.to_string().cmp(&b.rule.to_string()))
}

/// Mines path rules with 1 to `max_body` body atoms.
///
/// Every relation in the graph is tried as head and as body atom, in both
/// directions, with the head over any two distinct body variables. Rules
/// whose head repeats a body atom are skipped. A rule is returned when its
/// support, standard confidence and PCA confidence all meet the thresholds.
/// Output is sorted by PCA confidence (descending), then standard confidence
/// (descending), then rule text; rules are named `m1`, `m2`, ... in that order.
pub fn mine(graph: &PropertyGraph, params: &MiningParams) -> Result<Vec<MinedRule>, RuleError> {
    if params.max_body == 0 || params.max_body > PathPattern::MAX_ATOMS {
        return Err(RuleError::MaxBody(params.max_body));
    }
    let relations: Vec<RelationId> = graph.relation_ids().collect();
    let positions = params.max_body + 1;
    let steps: Vec<(RelationId, Direction)> = relations
        .iter()
        .flat_map(|&r| [(r, Direction::Forward), (r, Direction::Backward)])
        .collect();

    let mut frontier: Vec<Candidate> = Vec::new();
    for &head in &relations {
        for i in 0..positions {
            for j in 0..positions {
                if i == j {
                    continue;
                }
                for &step in &steps {
                    frontier.push(Candidate {
                        head,
                        anchors: (i, j),
                        steps: vec![step],
                    });
                }
            }
        }
    }

    let keep = |c: &Candidate| !c.is_tautology() && c.reaches(graph, params.min_support);
    let mut unique: BTreeSet<String> = BTreeSet::new();
    for level in 1..=params.max_body {
        frontier = frontier.into_par_iter().filter(|c| keep(c)).collect();
        for c in frontier.iter().filter(|c| c.is_safe()) {
            unique.insert(c.to_rule(graph).canonical_text());
        }
        if level == params.max_body {
            break;
        }
        frontier = frontier
            .iter()
            .flat_map(|c| {
                steps.iter().map(move |&step| {
                    let mut next = c.clone();
                    next.steps.push(step);
                    next
                })
            })
            .collect();
    }

    let mut mined: Vec<MinedRule> = unique
        .into_par_iter()
        .map(|text| {
            let rule = parse_rule(&text).expect("canonical text parses");
            let report = evaluate_confidence(graph, &rule);
            MinedRule { rule, report }
        })
        .filter(|m| {
            m.report.support >= params.min_support
                && m.report.meets(params.min_std_conf, params.min_pca_conf)
        })
        .collect();
    mined.sort_by(compare_mined);
    for (i, m) in mined.iter_mut().enumerate() {
        m.rule.name = Some(format!("m{}", i + 1));
    }
    Ok(mined)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range_body_size() {
        let g = PropertyGraph::from_edges([("a", "r", "b")]);
        for max_body in [0, 5] {
            let params = MiningParams {
                max_body,
                ..MiningParams::default()
            };
            assert_eq!(mine(&g, &params), Err(RuleError::MaxBody(max_body)));
        }
    }

    #[test]
    fn recovers_planted_rule() {
        let mut triples = Vec::new();
        let names: Vec<(String, String, String)> = (0..4)
            .map(|i| (format!("p{i}"), format!("q{i}"), format!("c{i}")))
            .collect();
        for (p, q, c) in &names {
            triples.push((p.as_str(), "hasChild", c.as_str()));
            triples.push((q.as_str(), "hasChild", c.as_str()));
            triples.push((p.as_str(), "isMarriedTo", q.as_str()));
            triples.push((q.as_str(), "isMarriedTo", p.as_str()));
        }
        let g = PropertyGraph::from_edges(triples);
        let params = MiningParams {
            max_body: 2,
            min_support: 2,
            min_std_conf: 0.0,
            min_pca_conf: 0.0,
        };
        let mined = mine(&g, &params).unwrap();
        let target = "(a)-[hasChild]->(b)<-[hasChild]-(c) => (a)-[isMarriedTo]->(c)";
        let found = mined
            .iter()
            .find(|m| m.rule.to_string() == target)
            .expect("planted rule mined");
        assert_eq!(found.report.std_conf, 1.0);
        assert_eq!(found.report.pca_conf, 1.0);
        // symmetric marriage is itself a perfect level-1 rule
        assert!(mined
            .iter()
            .any(|m| m.rule.to_string() == "(a)-[isMarriedTo]->(b) => (b)-[isMarriedTo]->(a)"));
        // no tautologies
        assert!(mined
            .iter()
            .all(|m| m.rule.to_string() != "(a)-[isMarriedTo]->(b) => (a)-[isMarriedTo]->(b)"));
    }

    #[test]
    fn single_relation_without_paths_yields_level_one_only() {
        let g = PropertyGraph::from_edges([
            ("a", "r", "b"),
            ("b", "r", "a"),
            ("c", "r", "d"),
            ("d", "r", "c"),
        ]);
        let params = MiningParams {
            max_body: 2,
            min_support: 0,
            min_std_conf: 0.0,
            min_pca_conf: 0.0,
        };
        let with_zero_support = mine(&g, &params).unwrap();
        let params = MiningParams {
            min_support: 1,
            ..params
        };
        let mined = mine(&g, &params).unwrap();
        assert!(!mined.is_empty());
        assert!(mined.iter().all(|m| m.rule.body().len() == 1));
        assert!(with_zero_support.iter().any(|m| m.rule.body().len() == 2));
    }

    #[test]
    fn output_order_is_total() {
        let g = PropertyGraph::from_edges([
            ("a", "r", "b"),
            ("b", "s", "a"),
            ("c", "r", "d"),
            ("d", "s", "e"),
        ]);
        let params = MiningParams {
            max_body: 2,
            min_support: 1,
            min_std_conf: 0.0,
            min_pca_conf: 0.0,
        };
        let mined = mine(&g, &params).unwrap();
        for pair in mined.windows(2) {
            assert_ne!(compare_mined(&pair[0], &pair[1]), Ordering::Greater);
        }
        assert_eq!(mined, mine(&g, &params).unwrap());
    }
}
