//! In-memory property graph built from triple files.
//!
//! Nodes are created on first mention and carry a unique name, a label and a
//! set of literal properties. Edges are directed and labeled with a relation.
//! Once built the graph is immutable; all lookups take `&self`.

mod pattern;

pub(crate) use pattern::CompiledPattern;
pub use pattern::{match_pattern, Binding, Direction, EdgeAtom, PathPattern, PatternError};

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::BufRead;

use thiserror::Error;

/// Label given to every node; matches the YAGO import convention.
pub const DEFAULT_LABEL: &str = "owl_Thing";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Interned relation label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelationId(pub u32);

impl RelationId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: NodeId,
    pub name: String,
    pub label: String,
    pub properties: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub src: NodeId,
    pub relation: RelationId,
    pub dst: NodeId,
}

/// Controls how triples are routed during ingestion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestConfig {
    /// Predicates whose objects become node properties instead of edges.
    pub literal_predicates: BTreeSet<String>,
    pub strip_angle_brackets: bool,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            literal_predicates: ["diedOnDate", "wasBornOnDate"]
                .into_iter()
                .map(String::from)
                .collect(),
            strip_angle_brackets: true,
        }
    }
}

impl IngestConfig {
    pub fn with_literal_predicates<I, S>(predicates: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            literal_predicates: predicates.into_iter().map(Into::into).collect(),
            ..Self::default()
        }
    }

    pub fn is_literal(&self, predicate: &str) -> bool {
        self.literal_predicates.contains(predicate)
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("read error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: expected 3 tab-separated fields, found {found}")]
    FieldCount { line: usize, found: usize },
    #[error("line {line}: empty term")]
    EmptyTerm { line: usize },
    #[error(
        "line {line}: conflicting value for property {key} of {node}: {existing:?} vs {new:?}"
    )]
    PropertyConflict {
        line: usize,
        node: String,
        key: String,
        existing: String,
        new: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("conflicting value for property {key} of {node}: {existing:?} vs {new:?}")]
pub struct PropertyConflict {
    pub node: String,
    pub key: String,
    pub existing: String,
    pub new: String,
}

/// Immutable property graph with name, adjacency and per-relation indexes.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PropertyGraph {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    by_name: HashMap<String, NodeId>,
    relations: Vec<String>,
    relation_ids: HashMap<String, RelationId>,
    // (node, relation) -> neighbors, each list sorted by node id
    out_index: HashMap<(NodeId, RelationId), Vec<NodeId>>,
    in_index: HashMap<(NodeId, RelationId), Vec<NodeId>>,
    // per node, sorted by (relation, neighbor)
    out_adj: Vec<Vec<(RelationId, NodeId)>>,
    by_relation: Vec<Vec<(NodeId, NodeId)>>,
}

impl PropertyGraph {
    /// Convenience constructor for entity-valued triples.
    pub fn from_edges<'a, I>(triples: I) -> Self
    where
        I: IntoIterator<Item = (&'a str, &'a str, &'a str)>,
    {
        let mut builder = GraphBuilder::new();
        for (s, r, o) in triples {
            builder.add_edge(s, r, o);
        }
        builder.build()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }

    pub fn node_name(&self, id: NodeId) -> &str {
        &self.nodes[id.index()].name
    }

    pub fn node_by_name(&self, name: &str) -> Option<NodeId> {
        self.by_name.get(name).copied()
    }

    pub fn property(&self, id: NodeId, key: &str) -> Option<&str> {
        self.nodes[id.index()]
            .properties
            .get(key)
            .map(String::as_str)
    }

    pub fn relation_id(&self, relation: &str) -> Option<RelationId> {
        self.relation_ids.get(relation).copied()
    }

    pub fn relation_name(&self, id: RelationId) -> &str {
        &self.relations[id.index()]
    }

    /// All relation ids, in first-seen order.
    pub fn relation_ids(&self) -> impl Iterator<Item = RelationId> + '_ {
        (0..self.relations.len() as u32).map(RelationId)
    }

    pub fn out_neighbors(&self, node: NodeId, relation: RelationId) -> &[NodeId] {
        self.out_index
            .get(&(node, relation))
            .map_or(&[], Vec::as_slice)
    }

    pub fn in_neighbors(&self, node: NodeId, relation: RelationId) -> &[NodeId] {
        self.in_index
            .get(&(node, relation))
            .map_or(&[], Vec::as_slice)
    }

    /// Outgoing `(relation, neighbor)` pairs of a node, sorted.
    pub fn out_edges(&self, node: NodeId) -> &[(RelationId, NodeId)] {
        &self.out_adj[node.index()]
    }

    /// `(src, dst)` pairs of one relation, sorted.
    pub fn relation_edges(&self, relation: RelationId) -> &[(NodeId, NodeId)] {
        &self.by_relation[relation.index()]
    }

    pub fn has_edge(&self, src: NodeId, relation: RelationId, dst: NodeId) -> bool {
        self.out_adj[src.index()]
            .binary_search(&(relation, dst))
            .is_ok()
    }

    pub fn has_out_edge(&self, src: NodeId, relation: RelationId) -> bool {
        self.out_index.contains_key(&(src, relation))
    }
}

/// Single-writer construction of a [`PropertyGraph`].
#[derive(Debug, Default)]
pub struct GraphBuilder {
    nodes: Vec<Node>,
    by_name: HashMap<String, NodeId>,
    relations: Vec<String>,
    relation_ids: HashMap<String, RelationId>,
    edges: Vec<Edge>,
    edge_set: HashSet<Edge>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the id for `name`, creating the node on first mention.
    pub fn node(&mut self, name: &str) -> NodeId {
        if let Some(&id) = self.by_name.get(name) {
            return id;
        }
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(Node {
            id,
            name: name.to_string(),
            label: DEFAULT_LABEL.to_string(),
            properties: BTreeMap::new(),
        });
        self.by_name.insert(name.to_string(), id);
        id
    }

    fn relation(&mut self, relation: &str) -> RelationId {
        if let Some(&id) = self.relation_ids.get(relation) {
            return id;
        }
        let id = RelationId(self.relations.len() as u32);
        self.relations.push(relation.to_string());
        self.relation_ids.insert(relation.to_string(), id);
        id
    }

    /// Adds an edge; returns false if the triple was already present.
    pub fn add_edge(&mut self, src: &str, relation: &str, dst: &str) -> bool {
        let src = self.node(src);
        let dst = self.node(dst);
        let relation = self.relation(relation);
        let edge = Edge { src, relation, dst };
        if self.edge_set.insert(edge) {
            self.edges.push(edge);
            true
        } else {
            false
        }
    }

    /// Sets a literal property. Re-setting the same value is a no-op; a
    /// different value is rejected.
    pub fn set_property(
        &mut self,
        node: &str,
        key: &str,
        value: &str,
    ) -> Result<(), PropertyConflict> {
        let id = self.node(node);
        let properties = &mut self.nodes[id.index()].properties;
        match properties.get(key) {
            Some(existing) if existing != value => Err(PropertyConflict {
                node: node.to_string(),
                key: key.to_string(),
                existing: existing.clone(),
                new: value.to_string(),
            }),
            Some(_) => Ok(()),
            None => {
                properties.insert(key.to_string(), value.to_string());
                Ok(())
            }
        }
    }

    pub fn build(self) -> PropertyGraph {
        let node_count = self.nodes.len();
        let mut out_index: HashMap<(NodeId, RelationId), Vec<NodeId>> = HashMap::new();
        let mut in_index: HashMap<(NodeId, RelationId), Vec<NodeId>> = HashMap::new();
        let mut out_adj = vec![Vec::new(); node_count];
        let mut by_relation = vec![Vec::new(); self.relations.len()];
        for e in &self.edges {
            out_index
                .entry((e.src, e.relation))
                .or_default()
                .push(e.dst);
            in_index.entry((e.dst, e.relation)).or_default().push(e.src);
            out_adj[e.src.index()].push((e.relation, e.dst));
            by_relation[e.relation.index()].push((e.src, e.dst));
        }
        for list in out_index.values_mut().chain(in_index.values_mut()) {
            list.sort_unstable();
        }
        for list in &mut out_adj {
            list.sort_unstable();
        }
        for list in &mut by_relation {
            list.sort_unstable();
        }
        PropertyGraph {
            nodes: self.nodes,
            edges: self.edges,
            by_name: self.by_name,
            relations: self.relations,
            relation_ids: self.relation_ids,
            out_index,
            in_index,
            out_adj,
            by_relation,
        }
    }
}

fn clean_term<'a>(term: &'a str, config: &IngestConfig) -> &'a str {
    let term = term.trim();
    if config.strip_angle_brackets
        && term.len() >= 2
        && term.starts_with('<')
        && term.ends_with('>')
    {
        &term[1..term.len() - 1]
    } else {
        term
    }
}

/// Loads tab-separated `subject predicate object` lines into a graph.
///
/// Blank lines and lines starting with `#` are skipped. Predicates listed in
/// `config.literal_predicates` set a property on the subject node; all other
/// triples become edges. Duplicate triples are stored once.
pub fn load_triples<R: BufRead>(
    source: R,
    config: &IngestConfig,
) -> Result<PropertyGraph, IngestError> {
    let mut builder = GraphBuilder::new();
    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(IngestError::FieldCount {
                line: line_no,
                found: fields.len(),
            });
        }
        let subject = clean_term(fields[0], config);
        let predicate = clean_term(fields[1], config);
        let object = clean_term(fields[2], config);
        if subject.is_empty() || predicate.is_empty() || object.is_empty() {
            return Err(IngestError::EmptyTerm { line: line_no });
        }
        if config.is_literal(predicate) {
            builder
                .set_property(subject, predicate, object)
                .map_err(|c| IngestError::PropertyConflict {
                    line: line_no,
                    node: c.node,
                    key: c.key,
                    existing: c.existing,
                    new: c.new,
                })?;
        } else {
            builder.add_edge(subject, predicate, object);
        }
    }
    Ok(builder.build())
}
