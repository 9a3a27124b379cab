//! Shared helpers for integration tests: brute-force oracles that only look at
//! the raw edge list, and seeded generators for graphs and rules.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use kgqa::graph::{Binding, EdgeAtom, PathPattern};
use kgqa::rules::AssociationRule;
use kgqa::{load_triples, IngestConfig, PropertyGraph};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn fixture_path(name: &str) -> PathBuf {
    workspace_root().join("fixtures").join(name)
}

pub fn load_fixture(name: &str) -> PropertyGraph {
    let file = File::open(fixture_path(name)).expect("fixture exists");
    load_triples(BufReader::new(file), &IngestConfig::default()).expect("fixture parses")
}

/// Edge facts by name, independent of the graph's indexes.
pub struct Facts {
    names: Vec<String>,
    edges: HashSet<(String, String, String)>,
    subjects: HashSet<(String, String)>,
}

impl Facts {
    pub fn new(graph: &PropertyGraph) -> Self {
        let mut edges = HashSet::new();
        let mut subjects = HashSet::new();
        for e in graph.edges() {
            let src = graph.node_name(e.src).to_string();
            let rel = graph.relation_name(e.relation).to_string();
            let dst = graph.node_name(e.dst).to_string();
            subjects.insert((src.clone(), rel.clone()));
            edges.insert((src, rel, dst));
        }
        let names = graph.nodes().iter().map(|n| n.name.clone()).collect();
        Self {
            names,
            edges,
            subjects,
        }
    }

    pub fn holds(&self, src: &str, rel: &str, dst: &str) -> bool {
        self.edges
            .contains(&(src.to_string(), rel.to_string(), dst.to_string()))
    }

    fn atom_holds(&self, atom: &EdgeAtom, assignment: &BTreeMap<&str, &str>) -> Option<bool> {
        let src = assignment.get(atom.source())?;
        let dst = assignment.get(atom.target())?;
        Some(self.holds(src, &atom.relation, dst))
    }

    /// Every injective assignment of the pattern's variables to node names
    /// that satisfies all atoms, consistent with `seed`.
    pub fn matches(
        &self,
        pattern: &PathPattern,
        seed: &BTreeMap<String, String>,
    ) -> Vec<BTreeMap<String, String>> {
        let vars = pattern.variables();
        let mut out = Vec::new();
        let mut assignment: BTreeMap<&str, &str> = BTreeMap::new();
        self.enumerate(pattern, &vars, seed, &mut assignment, &mut out);
        out
    }

    fn enumerate<'a>(
        &'a self,
        pattern: &PathPattern,
        vars: &[&'a str],
        seed: &BTreeMap<String, String>,
        assignment: &mut BTreeMap<&'a str, &'a str>,
        out: &mut Vec<BTreeMap<String, String>>,
    ) {
        // reject as soon as a fully assigned atom fails
        for atom in pattern.atoms() {
            if self.atom_holds(atom, assignment) == Some(false) {
                return;
            }
        }
        let Some(&var) = vars.get(assignment.len()) else {
            out.push(
                assignment
                    .iter()
                    .map(|(k, v)| (k.to_string(), v.to_string()))
                    .collect(),
            );
            return;
        };
        for name in &self.names {
            if assignment.values().any(|v| *v == name) {
                continue;
            }
            if seed.get(var).is_some_and(|s| s != name) {
                continue;
            }
            assignment.insert(var, name);
            self.enumerate(pattern, vars, seed, assignment, out);
            assignment.remove(var);
        }
    }

    /// `(support, body_count, pca_body_count)` over distinct head pairs.
    pub fn confidence_counts(&self, rule: &AssociationRule) -> (usize, usize, usize) {
        let head = rule.head();
        let pairs: BTreeSet<(String, String)> = self
            .matches(rule.body(), &BTreeMap::new())
            .into_iter()
            .map(|m| (m[head.source()].clone(), m[head.target()].clone()))
            .collect();
        let rel = rule.head_relation();
        let support = pairs.iter().filter(|(u, w)| self.holds(u, rel, w)).count();
        let pca_body = pairs
            .iter()
            .filter(|(u, _)| self.subjects.contains(&(u.clone(), rel.to_string())))
            .count();
        (support, pairs.len(), pca_body)
    }
}

pub fn binding_names(graph: &PropertyGraph, binding: &Binding) -> BTreeMap<String, String> {
    binding
        .iter()
        .map(|(k, v)| (k.clone(), graph.node_name(*v).to_string()))
        .collect()
}

pub const RELATIONS: [&str; 4] = ["r0", "r1", "r2", "r3"];

/// A graph over at most `max_nodes` nodes and the first `relations` relation names.
pub fn random_graph(rng: &mut ChaCha8Rng, max_nodes: usize, relations: usize) -> PropertyGraph {
    let nodes = rng.gen_range(2..=max_nodes);
    let edges = rng.gen_range(1..=nodes * 3);
    let names: Vec<String> = (0..nodes).map(|i| format!("n{i}")).collect();
    let triples: Vec<(String, &str, String)> = (0..edges)
        .map(|_| {
            let s = names.choose(rng).unwrap().clone();
            let r = RELATIONS[rng.gen_range(0..relations)];
            let d = names.choose(rng).unwrap().clone();
            (s, r, d)
        })
        .collect();
    PropertyGraph::from_edges(triples.iter().map(|(s, r, d)| (s.as_str(), *r, d.as_str())))
}

/// A path of `len` atoms over fresh variables `a, b, ...`, occasionally
/// closing back onto the first variable.
pub fn random_path(rng: &mut ChaCha8Rng, len: usize, relations: usize) -> PathPattern {
    let mut vars: Vec<String> = (0..=len)
        .map(|i| ((b'a' + i as u8) as char).to_string())
        .collect();
    if len >= 2 && rng.gen_bool(0.2) {
        vars[len] = vars[0].clone();
    }
    let atoms = (0..len)
        .map(|t| {
            let rel = RELATIONS[rng.gen_range(0..relations)];
            if rng.gen_bool(0.5) {
                EdgeAtom::forward(&vars[t], rel, &vars[t + 1])
            } else {
                EdgeAtom::backward(&vars[t], rel, &vars[t + 1])
            }
        })
        .collect();
    PathPattern::new(atoms).expect("connected path")
}

pub fn random_rule(rng: &mut ChaCha8Rng, relations: usize) -> AssociationRule {
    let len = rng.gen_range(1..=4);
    let body = random_path(rng, len, relations);
    let vars: Vec<String> = body.variables().iter().map(|v| v.to_string()).collect();
    let mut picked = vars.choose_multiple(rng, 2);
    let (src, dst) = (
        picked.next().unwrap().clone(),
        picked.next().unwrap().clone(),
    );
    let head = EdgeAtom::forward(&src, RELATIONS[rng.gen_range(0..relations)], &dst);
    AssociationRule::new(body, head).expect("safe rule")
}

const FILLER_CHARS: &[char] = &[
    'A', 'B', 'K', 'M', 'Q', 'Z', 'a', 'e', 'h', 'i', 'j', 'k', 'l', 'o', 'r', 's', 'u', 'v', 'y',
    'ä', 'ö', 'ü', 'é', 'ñ', 'Ä', '0', '1', '9', '(', ')', '.', ',', '-', '\'',
];

/// A name-like slot filler: 1 to 4 words separated by single spaces.
/// Fillers never contain "and", which separates the two slots of a
/// relationship question.
pub fn random_filler(rng: &mut ChaCha8Rng) -> String {
    loop {
        let words: Vec<String> = (0..rng.gen_range(1..=4))
            .map(|_| {
                (0..rng.gen_range(1..=10))
                    .map(|_| *FILLER_CHARS.choose(rng).unwrap())
                    .collect()
            })
            .collect();
        let filler = words.join(" ");
        if !filler.to_lowercase().contains("and") {
            return filler;
        }
    }
}

pub const KG_RELATIONS: [&str; 6] = [
    "isMarriedTo",
    "hasChild",
    "actedIn",
    "directed",
    "diedIn",
    "wasBornIn",
];

/// A small family/film graph using relations the built-in templates ask about.
pub fn random_kg(rng: &mut ChaCha8Rng, nodes: usize, edges: usize) -> PropertyGraph {
    let names: Vec<String> = (0..nodes).map(|i| format!("e{i}")).collect();
    let triples: Vec<(String, &str, String)> = (0..edges)
        .map(|_| {
            let s = names.choose(rng).unwrap().clone();
            let r = *KG_RELATIONS.choose(rng).unwrap();
            let d = names.choose(rng).unwrap().clone();
            (s, r, d)
        })
        .collect();
    PropertyGraph::from_edges(triples.iter().map(|(s, r, d)| (s.as_str(), *r, d.as_str())))
}

/// The shipped rules plus every rule mined from `graph` with support >= 1.
pub fn rules_for(graph: &PropertyGraph) -> kgqa::RuleSet {
    let params = kgqa::rules::MiningParams {
        max_body: 2,
        min_support: 1,
        min_std_conf: 0.0,
        min_pca_conf: 0.0,
    };
    let mut rules = kgqa::RuleSet::builtin().rules().to_vec();
    rules.extend(
        kgqa::rules::mine(graph, &params)
            .unwrap()
            .into_iter()
            .map(|m| m.rule),
    );
    kgqa::RuleSet::from_rules(rules).expect("distinct names")
}

/// A question instantiated from a random built-in template over graph nodes.
pub fn random_question(rng: &mut ChaCha8Rng, graph: &PropertyGraph) -> String {
    let registry = kgqa::TemplateRegistry::builtin();
    let template = registry.templates().choose(rng).unwrap();
    let pick = |rng: &mut ChaCha8Rng| graph.nodes().choose(rng).unwrap().name.replace('_', " ");
    let p = pick(rng);
    let p1 = pick(rng);
    template.instantiate(&p, Some(&p1))
}
