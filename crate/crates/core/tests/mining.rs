//! Rule mining: recovery of planted rules, agreement with the evaluator and
//! the brute-force oracle, and soundness of support pruning.

mod common;

use common::{load_fixture, random_graph, Facts};
use kgqa::rules::{
    evaluate_confidence, mine, parse_rule, ConfidenceReport, MinedRule, MiningParams,
};
use kgqa::PropertyGraph;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn params(max_body: usize, min_support: usize) -> MiningParams {
    MiningParams {
        max_body,
        min_support,
        min_std_conf: 0.0,
        min_pca_conf: 0.0,
    }
}

fn summary(mined: &[MinedRule]) -> Vec<(String, ConfidenceReport)> {
    mined
        .iter()
        .map(|m| (m.rule.canonical_text(), m.report))
        .collect()
}

fn co_parent_text() -> String {
    parse_rule("(a)-[hasChild]->(b)<-[hasChild]-(c) => (a)-[isMarriedTo]->(c)")
        .unwrap()
        .canonical_text()
}

#[test]
fn planted_graph_recovers_co_parent_rule() {
    let graph = load_fixture("planted_coparents.tsv");
    assert_eq!(graph.node_count(), 50);
    let mined = mine(&graph, &params(2, 2)).unwrap();
    let found = mined
        .iter()
        .find(|m| m.rule.canonical_text() == co_parent_text())
        .expect("co-parent rule mined");
    let facts = Facts::new(&graph);
    let (support, body, pca_body) = facts.confidence_counts(&found.rule);
    assert_eq!((support, body), (20, 30));
    assert_eq!(found.report.std_conf, 10.0 / 15.0);
    assert_eq!(
        found.report,
        ConfidenceReport::from_counts(support, body, pca_body)
    );
    assert_eq!(found.report, evaluate_confidence(&graph, &found.rule));
}

#[test]
fn partial_spouse_fixture_mined_rule_matches_evaluator() {
    let graph = load_fixture("partial_spouses.tsv");
    let target =
        parse_rule("(a)-[actedIn]->(b)<-[directed]-(d) => (a)-[isMarriedTo]->(d)").unwrap();
    let mined = mine(&graph, &params(2, 1)).unwrap();
    let found = mined
        .iter()
        .find(|m| m.rule.canonical_text() == target.canonical_text())
        .expect("film rule mined");
    assert_eq!(found.report.std_conf, 1.0 / 3.0);
    assert_eq!(found.report.pca_conf, 0.5);
    assert_eq!(found.report, evaluate_confidence(&graph, &target));
}

#[test]
fn no_two_paths_means_level_one_only() {
    let graph = PropertyGraph::from_edges([
        ("a", "r", "b"),
        ("b", "r", "a"),
        ("c", "r", "d"),
        ("d", "r", "c"),
    ]);
    let mined = mine(&graph, &params(2, 1)).unwrap();
    assert!(!mined.is_empty());
    assert!(mined.iter().all(|m| m.rule.body().len() == 1));
}

#[test]
fn names_follow_output_order() {
    let graph = load_fixture("planted_coparents.tsv");
    let mined = mine(&graph, &params(2, 2)).unwrap();
    for (i, m) in mined.iter().enumerate() {
        assert_eq!(m.rule.name.as_deref(), Some(format!("m{}", i + 1).as_str()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mined_confidences_match_evaluator_and_oracle(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let graph = random_graph(&mut rng, 10, 3);
        let max_body = rng.gen_range(1..=3);
        let mined = mine(&graph, &params(max_body, 1)).unwrap();
        let facts = Facts::new(&graph);
        for m in &mined {
            prop_assert!(m.rule.body().len() <= max_body);
            prop_assert!(m.report.support >= 1);
            prop_assert_eq!(m.report, evaluate_confidence(&graph, &m.rule));
            let (s, b, p) = facts.confidence_counts(&m.rule);
            prop_assert_eq!(m.report, ConfidenceReport::from_counts(s, b, p));
        }
        let texts: std::collections::BTreeSet<_> = mined.iter().map(|m| m.rule.canonical_text()).collect();
        prop_assert_eq!(texts.len(), mined.len(), "duplicate rules in output");
    }

    #[test]
    fn pruning_keeps_every_rule_meeting_thresholds(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let graph = random_graph(&mut rng, 8, 2);
        let max_body = rng.gen_range(1..=3);
        let min_support = rng.gen_range(1..=3);
        let min_std_conf = rng.gen_range(0..=2) as f64 * 0.25;
        let min_pca_conf = rng.gen_range(0..=2) as f64 * 0.25;
        let base = MiningParams { max_body, min_support: 0, min_std_conf, min_pca_conf };

        let unpruned: Vec<_> = summary(&mine(&graph, &base).unwrap())
            .into_iter()
            .filter(|(_, r)| r.support >= min_support)
            .collect();
        let pruned = summary(&mine(&graph, &MiningParams { min_support, ..base }).unwrap());
        prop_assert_eq!(pruned, unpruned);
    }
}
