//! Path patterns over the property graph and an injective backtracking matcher.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::ControlFlow;

use serde::Serialize;
use thiserror::Error;

use super::{NodeId, PropertyGraph, RelationId};

/// Orientation of an atom's edge relative to the path order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// `(from)-[r]->(to)`
    Forward,
    /// `(from)<-[r]-(to)`
    Backward,
}

impl Direction {
    pub fn reversed(self) -> Self {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
        }
    }
}

/// One edge of a pattern. `from` and `to` follow the path order; `direction`
/// says which of the two is the edge source.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EdgeAtom {
    pub from: String,
    pub relation: String,
    pub to: String,
    pub direction: Direction,
}

impl EdgeAtom {
    pub fn forward(from: &str, relation: &str, to: &str) -> Self {
        Self {
            from: from.to_string(),
            relation: relation.to_string(),
            to: to.to_string(),
            direction: Direction::Forward,
        }
    }

    pub fn backward(from: &str, relation: &str, to: &str) -> Self {
        Self {
            from: from.to_string(),
            relation: relation.to_string(),
            to: to.to_string(),
            direction: Direction::Backward,
        }
    }

    /// Variable bound to the edge's source node.
    pub fn source(&self) -> &str {
        match self.direction {
            Direction::Forward => &self.from,
            Direction::Backward => &self.to,
        }
    }

    /// Variable bound to the edge's target node.
    pub fn target(&self) -> &str {
        match self.direction {
            Direction::Forward => &self.to,
            Direction::Backward => &self.from,
        }
    }

    pub(crate) fn write_arrow(&self, f: &mut impl fmt::Write) -> fmt::Result {
        match self.direction {
            Direction::Forward => write!(f, "-[{}]->", self.relation),
            Direction::Backward => write!(f, "<-[{}]-", self.relation),
        }
    }
}

impl fmt::Display for EdgeAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.from)?;
        self.write_arrow(f)?;
        write!(f, "({})", self.to)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error("pattern must have between 1 and {max} atoms, got {0}", max = PathPattern::MAX_ATOMS)]
    AtomCount(usize),
    #[error("atom {0} shares no variable with the atoms before it")]
    Disconnected(usize),
}

/// A connected conjunction of 1 to 4 edge atoms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PathPattern {
    atoms: Vec<EdgeAtom>,
}

impl PathPattern {
    pub const MAX_ATOMS: usize = 4;

    pub fn new(atoms: Vec<EdgeAtom>) -> Result<Self, PatternError> {
        if atoms.is_empty() || atoms.len() > Self::MAX_ATOMS {
            return Err(PatternError::AtomCount(atoms.len()));
        }
        for (i, atom) in atoms.iter().enumerate().skip(1) {
            let connected = atoms[..i].iter().any(|prev| {
                [&prev.from, &prev.to].contains(&&atom.from)
                    || [&prev.from, &prev.to].contains(&&atom.to)
            });
            if !connected {
                return Err(PatternError::Disconnected(i));
            }
        }
        Ok(Self { atoms })
    }

    pub fn atoms(&self) -> &[EdgeAtom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Variables in order of first appearance.
    pub fn variables(&self) -> Vec<&str> {
        let mut vars: Vec<&str> = Vec::new();
        for atom in &self.atoms {
            for v in [atom.from.as_str(), atom.to.as_str()] {
                if !vars.contains(&v) {
                    vars.push(v);
                }
            }
        }
        vars
    }

    pub fn contains_var(&self, var: &str) -> bool {
        self.atoms.iter().any(|a| a.from == var || a.to == var)
    }

    /// True when each atom starts where the previous one ended.
    pub fn is_chain(&self) -> bool {
        self.atoms.windows(2).all(|w| w[0].to == w[1].from)
    }
}

impl fmt::Display for PathPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_chain() {
            write!(f, "({})", self.atoms[0].from)?;
            for atom in &self.atoms {
                atom.write_arrow(f)?;
                write!(f, "({})", atom.to)?;
            }
            Ok(())
        } else {
            for (i, atom) in self.atoms.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{atom}")?;
            }
            Ok(())
        }
    }
}

/// Variable name to node assignment.
pub type Binding = BTreeMap<String, NodeId>;

/// Returns every injective assignment of pattern variables to nodes under
/// which all atoms hold.
///
/// Results are sorted by node id in variable order (order of first appearance
/// in the pattern). Seed entries pin variables in advance; entries naming
/// variables the pattern does not use are ignored.
pub fn match_pattern(
    graph: &PropertyGraph,
    pattern: &PathPattern,
    seed: Option<&Binding>,
) -> Vec<Binding> {
    let compiled = CompiledPattern::compile(graph, pattern);
    let mut search = compiled.search(graph);
    if let Some(seed) = seed {
        for (var, &node) in seed {
            if let Some(idx) = compiled.var_index(var) {
                search.seed(idx, node);
            }
        }
    }
    let mut rows: Vec<Vec<NodeId>> = Vec::new();
    let _ = search.for_each(|nodes| {
        rows.push(nodes.to_vec());
        ControlFlow::Continue(())
    });
    rows.sort_unstable();
    rows.dedup();
    rows.into_iter()
        .map(|row| compiled.vars.iter().cloned().zip(row).collect::<Binding>())
        .collect()
}

#[derive(Debug, Clone, Copy)]
struct CompiledAtom {
    src: usize,
    relation: Option<RelationId>,
    dst: usize,
}

/// Pattern with variables numbered and relations resolved against a graph.
#[derive(Debug, Clone)]
pub(crate) struct CompiledPattern {
    vars: Vec<String>,
    atoms: Vec<CompiledAtom>,
}

impl CompiledPattern {
    pub(crate) fn compile(graph: &PropertyGraph, pattern: &PathPattern) -> Self {
        let vars: Vec<String> = pattern.variables().into_iter().map(String::from).collect();
        let index = |name: &str| {
            vars.iter()
                .position(|v| v == name)
                .expect("variable in pattern")
        };
        let atoms = pattern
            .atoms()
            .iter()
            .map(|a| CompiledAtom {
                src: index(a.source()),
                relation: graph.relation_id(&a.relation),
                dst: index(a.target()),
            })
            .collect();
        Self { vars, atoms }
    }

    /// Builds a pattern from numbered `(src, relation, dst)` atoms.
    pub(crate) fn from_atoms(var_count: usize, atoms: &[(usize, RelationId, usize)]) -> Self {
        Self {
            vars: (0..var_count).map(|i| format!("v{i}")).collect(),
            atoms: atoms
                .iter()
                .map(|&(src, relation, dst)| CompiledAtom {
                    src,
                    relation: Some(relation),
                    dst,
                })
                .collect(),
        }
    }

    pub(crate) fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub(crate) fn search<'a>(&'a self, graph: &'a PropertyGraph) -> Search<'a> {
        Search {
            pattern: self,
            graph,
            assignment: vec![None; self.vars.len()],
            forbidden: Vec::new(),
            inconsistent: false,
        }
    }
}

/// One matching run with optional pinned variables and excluded nodes.
pub(crate) struct Search<'a> {
    pattern: &'a CompiledPattern,
    graph: &'a PropertyGraph,
    assignment: Vec<Option<NodeId>>,
    forbidden: Vec<NodeId>,
    inconsistent: bool,
}

impl Search<'_> {
    pub(crate) fn seed(&mut self, var: usize, node: NodeId) -> &mut Self {
        let clash = self
            .assignment
            .iter()
            .enumerate()
            .any(|(i, a)| i != var && *a == Some(node));
        if clash || self.forbidden.contains(&node) {
            self.inconsistent = true;
        }
        self.assignment[var] = Some(node);
        self
    }

    /// Excludes a node from every variable.
    pub(crate) fn forbid(&mut self, node: NodeId) -> &mut Self {
        if self.assignment.contains(&Some(node)) {
            self.inconsistent = true;
        }
        self.forbidden.push(node);
        self
    }

    pub(crate) fn exists(&mut self) -> bool {
        self.for_each(|_| ControlFlow::Break(())).is_break()
    }

    /// Calls `visit` with the node of every variable, once per match.
    pub(crate) fn for_each<F>(&mut self, mut visit: F) -> ControlFlow<()>
    where
        F: FnMut(&[NodeId]) -> ControlFlow<()>,
    {
        if self.inconsistent || self.pattern.atoms.iter().any(|a| a.relation.is_none()) {
            return ControlFlow::Continue(());
        }
        let order = self.plan();
        let mut out = vec![NodeId(0); self.assignment.len()];
        self.step(&order, 0, &mut out, &mut visit)
    }

    // Atoms ordered so that each one after the first touches an already bound
    // variable whenever the pattern allows it.
    fn plan(&self) -> Vec<CompiledAtom> {
        let mut bound: Vec<bool> = self.assignment.iter().map(Option::is_some).collect();
        let mut remaining = self.pattern.atoms.clone();
        let mut order = Vec::with_capacity(remaining.len());
        while !remaining.is_empty() {
            let score = |a: &CompiledAtom| bound[a.src] as u8 + bound[a.dst] as u8;
            let best = (0..remaining.len())
                .max_by_key(|&i| (score(&remaining[i]), std::cmp::Reverse(i)))
                .expect("non-empty");
            let atom = remaining.remove(best);
            bound[atom.src] = true;
            bound[atom.dst] = true;
            order.push(atom);
        }
        order
    }

    fn free(&self, var: usize, node: NodeId) -> bool {
        !self.forbidden.contains(&node)
            && self
                .assignment
                .iter()
                .enumerate()
                .all(|(i, a)| i == var || *a != Some(node))
    }

    fn step<F>(
        &mut self,
        order: &[CompiledAtom],
        depth: usize,
        out: &mut [NodeId],
        visit: &mut F,
    ) -> ControlFlow<()>
    where
        F: FnMut(&[NodeId]) -> ControlFlow<()>,
    {
        let Some(&atom) = order.get(depth) else {
            for (slot, a) in out.iter_mut().zip(&self.assignment) {
                *slot = a.expect("all variables bound after the last atom");
            }
            return visit(out);
        };
        let graph = self.graph;
        let relation = atom.relation.expect("checked before search");
        match (self.assignment[atom.src], self.assignment[atom.dst]) {
            (Some(s), Some(d)) => {
                if graph.has_edge(s, relation, d) {
                    self.step(order, depth + 1, out, visit)?;
                }
            }
            (Some(s), None) => {
                for &d in graph.out_neighbors(s, relation) {
                    self.try_bind(order, depth, atom.dst, d, out, visit)?;
                }
            }
            (None, Some(d)) => {
                for &s in graph.in_neighbors(d, relation) {
                    self.try_bind(order, depth, atom.src, s, out, visit)?;
                }
            }
            (None, None) => {
                for &(s, d) in graph.relation_edges(relation) {
                    if atom.src == atom.dst {
                        if s == d {
                            self.try_bind(order, depth, atom.src, s, out, visit)?;
                        }
                        continue;
                    }
                    if s == d || !self.free(atom.src, s) || !self.free(atom.dst, d) {
                        continue;
                    }
                    self.assignment[atom.src] = Some(s);
                    self.assignment[atom.dst] = Some(d);
                    let flow = self.step(order, depth + 1, out, visit);
                    self.assignment[atom.src] = None;
                    self.assignment[atom.dst] = None;
                    flow?;
                }
            }
        }
        ControlFlow::Continue(())
    }

    fn try_bind<F>(
        &mut self,
        order: &[CompiledAtom],
        depth: usize,
        var: usize,
        node: NodeId,
        out: &mut [NodeId],
        visit: &mut F,
    ) -> ControlFlow<()>
    where
        F: FnMut(&[NodeId]) -> ControlFlow<()>,
    {
        if !self.free(var, node) {
            return ControlFlow::Continue(());
        }
        self.assignment[var] = Some(node);
        let flow = self.step(order, depth + 1, out, visit);
        self.assignment[var] = None;
        flow
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn co_parent_pattern() -> PathPattern {
        PathPattern::new(vec![
            EdgeAtom::forward("a", "hasChild", "b"),
            EdgeAtom::backward("b", "hasChild", "d"),
        ])
        .unwrap()
    }

    #[test]
    fn seeded_co_parent_match() {
        let g = PropertyGraph::from_edges([("M", "hasChild", "X"), ("Q", "hasChild", "X")]);
        let seed: Binding = [("a".to_string(), g.node_by_name("M").unwrap())].into();
        let found = match_pattern(&g, &co_parent_pattern(), Some(&seed));
        assert_eq!(found.len(), 1);
        let b = &found[0];
        assert_eq!(g.node_name(b["a"]), "M");
        assert_eq!(g.node_name(b["b"]), "X");
        assert_eq!(g.node_name(b["d"]), "Q");
    }

    #[test]
    fn single_parent_has_no_match() {
        let g = PropertyGraph::from_edges([("M", "hasChild", "X")]);
        assert!(match_pattern(&g, &co_parent_pattern(), None).is_empty());
    }

    #[test]
    fn unknown_relation_matches_nothing() {
        let g = PropertyGraph::from_edges([("M", "hasChild", "X")]);
        let p = PathPattern::new(vec![EdgeAtom::forward("a", "nope", "b")]).unwrap();
        assert!(match_pattern(&g, &p, None).is_empty());
    }

    #[test]
    fn results_are_sorted_and_distinct() {
        let g = PropertyGraph::from_edges([
            ("B", "r", "C"),
            ("A", "r", "C"),
            ("A", "r", "B"),
            ("C", "r", "C"),
        ]);
        let p = PathPattern::new(vec![EdgeAtom::forward("x", "r", "y")]).unwrap();
        let found = match_pattern(&g, &p, None);
        let pairs: Vec<(NodeId, NodeId)> = found.iter().map(|b| (b["x"], b["y"])).collect();
        let mut sorted = pairs.clone();
        sorted.sort();
        assert_eq!(pairs, sorted);
        // the self loop C->C cannot bind two distinct variables
        assert_eq!(pairs.len(), 3);
        assert!(pairs.iter().all(|(x, y)| x != y));
    }

    #[test]
    fn clashing_seed_gives_nothing() {
        let g = PropertyGraph::from_edges([("M", "hasChild", "X"), ("Q", "hasChild", "X")]);
        let m = g.node_by_name("M").unwrap();
        let seed: Binding = [("a".to_string(), m), ("d".to_string(), m)].into();
        assert!(match_pattern(&g, &co_parent_pattern(), Some(&seed)).is_empty());
    }

    #[test]
    fn pattern_validation() {
        assert_eq!(PathPattern::new(vec![]), Err(PatternError::AtomCount(0)));
        let five = vec![EdgeAtom::forward("a", "r", "b"); 5];
        assert_eq!(PathPattern::new(five), Err(PatternError::AtomCount(5)));
        let disconnected = vec![
            EdgeAtom::forward("a", "r", "b"),
            EdgeAtom::forward("c", "r", "d"),
        ];
        assert_eq!(
            PathPattern::new(disconnected),
            Err(PatternError::Disconnected(1))
        );
    }

    #[test]
    fn chain_display() {
        assert_eq!(
            co_parent_pattern().to_string(),
            "(a)-[hasChild]->(b)<-[hasChild]-(d)"
        );
        assert_eq!(co_parent_pattern().variables(), vec!["a", "b", "d"]);
    }
}
