//! Directed causal graphs over DP names.
//!
//! Edges carry a kind: `control` and `physical` edges come from engineering
//! knowledge (domain graphs), `learnt` edges from structure learning. A graph
//! may also hold undirected edges, which is how a learner reports an edge
//! whose orientation the data cannot decide.
//!
//! Acyclicity is not enforced on insertion. Domain graphs are allowed to
//! hold cycles until they are repaired with [`break_cycles`]; anything that
//! needs a DAG checks for one and fails with [`GraphError::CyclicGraph`].

mod compare;
mod cycles;
mod dsep;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use compare::{markov_equivalent, EdgeDiff};
pub use cycles::{break_cycles, CycleRepair, RepairedGraph};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("self loop on `{0}`")]
    SelfLoop(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("duplicate edge {0} -> {1}")]
    DuplicateEdge(String, String),
    #[error("no edge {0} -> {1}")]
    UnknownEdge(String, String),
    #[error("graph contains a directed cycle")]
    CyclicGraph,
    #[error("graph has undirected edges; orient them first")]
    UndirectedEdges,
    #[error("graphs are defined over different node sets")]
    NodeSetMismatch,
    #[error("graph is still cyclic after removing the listed edges")]
    StillCyclic,
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("unknown edge kind `{0}`")]
    UnknownEdgeKind(String),
}

impl GraphError {
    pub fn code(&self) -> &'static str {
        match self {
            GraphError::SelfLoop(_) => "SelfLoop",
            GraphError::UnknownNode(_) => "UnknownNode",
            GraphError::DuplicateNode(_) => "DuplicateNode",
            GraphError::DuplicateEdge(..) => "DuplicateEdge",
            GraphError::UnknownEdge(..) => "UnknownEdge",
            GraphError::CyclicGraph => "CyclicGraph",
            GraphError::UndirectedEdges => "UndirectedEdges",
            GraphError::NodeSetMismatch => "NodeSetMismatch",
            GraphError::StillCyclic => "StillCyclic",
            GraphError::InvalidQuery(_) => "InvalidQuery",
            GraphError::UnknownEdgeKind(_) => "UnknownEdgeKind",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    /// Derived from control logic (input DPs to output DPs of a requirement).
    Control,
    /// Physical coupling, always drawn from an actuator to a sensor.
    Physical,
    /// Produced by a structure-learning algorithm.
    Learnt,
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeKind::Control => "control",
            EdgeKind::Physical => "physical",
            EdgeKind::Learnt => "learnt",
        })
    }
}

impl FromStr for EdgeKind {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "control" => Ok(EdgeKind::Control),
            "physical" => Ok(EdgeKind::Physical),
            "learnt" => Ok(EdgeKind::Learnt),
            other => Err(GraphError::UnknownEdgeKind(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct EdgeAttr {
    kind: EdgeKind,
    directed: bool,
}

/// A named edge as exposed to callers. For undirected edges `src < dst`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub src: String,
    pub dst: String,
    pub kind: EdgeKind,
    #[serde(default = "yes", skip_serializing_if = "is_true")]
    pub directed: bool,
}

fn yes() -> bool {
    true
}

fn is_true(b: &bool) -> bool {
    *b
}

/// `a -> middle -> b` (chain), `a <- middle -> b` (fork) or `a -> middle <- b` (collider).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Triple {
    pub a: String,
    pub middle: String,
    pub b: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Structures {
    pub chains: Vec<Triple>,
    pub forks: Vec<Triple>,
    pub colliders: Vec<Triple>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphFile", into = "GraphFile")]
pub struct CausalGraph {
    nodes: Vec<String>,
    index: HashMap<String, usize>,
    // Directed edges keyed (src, dst); undirected edges keyed (lo, hi) by node index.
    edges: BTreeMap<(usize, usize), EdgeAttr>,
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    nodes: Vec<String>,
    edges: Vec<Edge>,
}

impl TryFrom<GraphFile> for CausalGraph {
    type Error = GraphError;

    fn try_from(f: GraphFile) -> Result<Self, GraphError> {
        let mut g = CausalGraph::new(f.nodes)?;
        for e in f.edges {
            if e.directed {
                g.add_edge(&e.src, &e.dst, e.kind)?;
            } else {
                g.add_undirected(&e.src, &e.dst, e.kind)?;
            }
        }
        Ok(g)
    }
}

impl From<CausalGraph> for GraphFile {
    fn from(g: CausalGraph) -> Self {
        GraphFile { edges: g.edges(), nodes: g.nodes }
    }
}

impl CausalGraph {
    pub fn new<I, S>(nodes: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut g = Self { nodes: Vec::new(), index: HashMap::new(), edges: BTreeMap::new() };
        for n in nodes {
            g.add_node(n)?;
        }
        Ok(g)
    }

    /// Graph with the given nodes and directed edges of a single kind.
    pub fn from_edges(nodes: &[&str], edges: &[(&str, &str)], kind: EdgeKind) -> Result<Self, GraphError> {
        let mut g = CausalGraph::new(nodes.iter().copied())?;
        for (s, d) in edges {
            g.add_edge(s, d, kind)?;
        }
        Ok(g)
    }

    pub fn add_node(&mut self, name: impl Into<String>) -> Result<usize, GraphError> {
        let name = name.into();
        if self.index.contains_key(&name) {
            return Err(GraphError::DuplicateNode(name));
        }
        let idx = self.nodes.len();
        self.index.insert(name.clone(), idx);
        self.nodes.push(name);
        Ok(idx)
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.nodes[idx]
    }

    pub fn node_index(&self, name: &str) -> Result<usize, GraphError> {
        self.index.get(name).copied().ok_or_else(|| GraphError::UnknownNode(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    fn undirected_key(&self, a: usize, b: usize) -> (usize, usize) {
        (a.min(b), a.max(b))
    }

    fn pair_taken(&self, a: usize, b: usize) -> bool {
        let key = self.undirected_key(a, b);
        self.edges.get(&key).is_some_and(|e| !e.directed)
    }

    /// Insert a directed edge. Cycles are allowed; see the module docs.
    pub fn add_edge(&mut self, src: &str, dst: &str, kind: EdgeKind) -> Result<(), GraphError> {
        let (s, d) = self.endpoints(src, dst)?;
        let existing = self.edges.get(&(s, d)).is_some_and(|e| e.directed);
        if existing || self.pair_taken(s, d) {
            return Err(GraphError::DuplicateEdge(src.to_string(), dst.to_string()));
        }
        self.edges.insert((s, d), EdgeAttr { kind, directed: true });
        Ok(())
    }

    /// Insert an undirected edge; fails if the pair is already adjacent.
    pub fn add_undirected(&mut self, a: &str, b: &str, kind: EdgeKind) -> Result<(), GraphError> {
        let (x, y) = self.endpoints(a, b)?;
        if self.adjacent_idx(x, y) {
            return Err(GraphError::DuplicateEdge(a.to_string(), b.to_string()));
        }
        let key = self.undirected_key(x, y);
        self.edges.insert(key, EdgeAttr { kind, directed: false });
        Ok(())
    }

    fn endpoints(&self, a: &str, b: &str) -> Result<(usize, usize), GraphError> {
        if a == b {
            return Err(GraphError::SelfLoop(a.to_string()));
        }
        Ok((self.node_index(a)?, self.node_index(b)?))
    }

    /// Remove the directed edge `src -> dst`, returning its kind.
    pub fn remove_edge(&mut self, src: &str, dst: &str) -> Result<EdgeKind, GraphError> {
        let (s, d) = self.endpoints(src, dst)?;
        self.remove_edge_idx(s, d)
            .ok_or_else(|| GraphError::UnknownEdge(src.to_string(), dst.to_string()))
    }

    pub(crate) fn remove_edge_idx(&mut self, s: usize, d: usize) -> Option<EdgeKind> {
        match self.edges.get(&(s, d)) {
            Some(e) if e.directed => self.edges.remove(&(s, d)).map(|e| e.kind),
            _ => None,
        }
    }

    pub(crate) fn add_edge_idx(&mut self, s: usize, d: usize, kind: EdgeKind) {
        debug_assert!(s != d && !self.adjacent_idx(s, d));
        self.edges.insert((s, d), EdgeAttr { kind, directed: true });
    }

    /// Remove whatever edge joins `a` and `b`, directed either way or undirected.
    pub(crate) fn remove_adjacency_idx(&mut self, a: usize, b: usize) {
        self.edges.remove(&(a, b));
        self.edges.remove(&(b, a));
    }

    pub(crate) fn add_undirected_idx(&mut self, a: usize, b: usize, kind: EdgeKind) {
        let key = self.undirected_key(a, b);
        self.edges.insert(key, EdgeAttr { kind, directed: false });
    }

    /// Turn the undirected edge `a - b` into `a -> b`. Returns false if no such edge.
    pub(crate) fn orient_idx(&mut self, a: usize, b: usize) -> bool {
        let key = self.undirected_key(a, b);
        match self.edges.get(&key) {
            Some(e) if !e.directed => {
                let kind = e.kind;
                self.edges.remove(&key);
                self.edges.insert((a, b), EdgeAttr { kind, directed: true });
                true
            }
            _ => false,
        }
    }

    pub fn has_edge(&self, src: &str, dst: &str) -> bool {
        match (self.index.get(src), self.index.get(dst)) {
            (Some(&s), Some(&d)) => self.has_directed_idx(s, d),
            _ => false,
        }
    }

    pub fn edge_kind(&self, src: &str, dst: &str) -> Option<EdgeKind> {
        let (s, d) = (*self.index.get(src)?, *self.index.get(dst)?);
        self.edges.get(&(s, d)).filter(|e| e.directed).map(|e| e.kind)
    }

    pub fn adjacent(&self, a: &str, b: &str) -> bool {
        match (self.index.get(a), self.index.get(b)) {
            (Some(&x), Some(&y)) => self.adjacent_idx(x, y),
            _ => false,
        }
    }

    pub(crate) fn has_directed_idx(&self, s: usize, d: usize) -> bool {
        self.edges.get(&(s, d)).is_some_and(|e| e.directed)
    }

    pub(crate) fn has_undirected_idx(&self, a: usize, b: usize) -> bool {
        self.pair_taken(a, b)
    }

    pub(crate) fn adjacent_idx(&self, a: usize, b: usize) -> bool {
        self.edges.contains_key(&(a, b)) || self.edges.contains_key(&(b, a))
    }

    pub fn has_undirected_edges(&self) -> bool {
        self.edges.values().any(|e| !e.directed)
    }

    /// All edges sorted by `(src, dst)` name.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out: Vec<Edge> = self
            .edges
            .iter()
            .map(|(&(s, d), e)| {
                let (src, dst) = if e.directed || self.nodes[s] < self.nodes[d] {
                    (s, d)
                } else {
                    (d, s)
                };
                Edge {
                    src: self.nodes[src].clone(),
                    dst: self.nodes[dst].clone(),
                    kind: e.kind,
                    directed: e.directed,
                }
            })
            .collect();
        out.sort();
        out
    }

    pub(crate) fn directed_edges_idx(&self) -> impl Iterator<Item = (usize, usize, EdgeKind)> + '_ {
        self.edges.iter().filter(|(_, e)| e.directed).map(|(&(s, d), e)| (s, d, e.kind))
    }

    pub(crate) fn parents_idx(&self, v: usize) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&p| self.has_directed_idx(p, v)).collect()
    }

    pub(crate) fn children_idx(&self, v: usize) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&c| self.has_directed_idx(v, c)).collect()
    }

    pub(crate) fn undirected_neighbors_idx(&self, v: usize) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&u| u != v && self.pair_taken(u, v)).collect()
    }

    pub(crate) fn adjacents_idx(&self, v: usize) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&u| u != v && self.adjacent_idx(u, v)).collect()
    }

    fn sorted_names(&self, idx: Vec<usize>) -> Vec<String> {
        let mut names: Vec<String> = idx.into_iter().map(|i| self.nodes[i].clone()).collect();
        names.sort();
        names
    }

    /// Parents of `node` through directed edges, sorted by name.
    pub fn parents(&self, node: &str) -> Result<Vec<String>, GraphError> {
        Ok(self.sorted_names(self.parents_idx(self.node_index(node)?)))
    }

    pub fn children(&self, node: &str) -> Result<Vec<String>, GraphError> {
        Ok(self.sorted_names(self.children_idx(self.node_index(node)?)))
    }

    /// Every node joined to `node` by any edge, sorted by name.
    pub fn neighbors(&self, node: &str) -> Result<Vec<String>, GraphError> {
        Ok(self.sorted_names(self.adjacents_idx(self.node_index(node)?)))
    }

    /// Kahn's algorithm over directed edges, smallest name first among ready nodes.
    fn kahn(&self) -> Vec<usize> {
        let n = self.nodes.len();
        let mut indeg = vec![0usize; n];
        for (_, d, _) in self.directed_edges_idx() {
            indeg[d] += 1;
        }
        let mut ready: BTreeSet<(&str, usize)> = (0..n)
            .filter(|&v| indeg[v] == 0)
            .map(|v| (self.nodes[v].as_str(), v))
            .collect();
        let mut order = Vec::with_capacity(n);
        while let Some((_, v)) = ready.pop_first() {
            order.push(v);
            for c in self.children_idx(v) {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.insert((self.nodes[c].as_str(), c));
                }
            }
        }
        order
    }

    /// True iff every edge is directed and a topological order exists.
    pub fn is_dag(&self) -> bool {
        !self.has_undirected_edges() && !self.has_directed_cycle()
    }

    /// Whether the directed part of the graph has a cycle (undirected edges ignored).
    pub fn has_directed_cycle(&self) -> bool {
        self.kahn().len() != self.nodes.len()
    }

    pub(crate) fn topo_indices(&self) -> Result<Vec<usize>, GraphError> {
        if self.has_undirected_edges() {
            return Err(GraphError::UndirectedEdges);
        }
        let order = self.kahn();
        if order.len() != self.nodes.len() {
            return Err(GraphError::CyclicGraph);
        }
        Ok(order)
    }

    /// Deterministic topological order, ties broken by node name.
    pub fn topological_order(&self) -> Result<Vec<String>, GraphError> {
        Ok(self.topo_indices()?.into_iter().map(|v| self.nodes[v].clone()).collect())
    }

    pub(crate) fn require_dag(&self) -> Result<(), GraphError> {
        self.topo_indices().map(|_| ())
    }

    /// Chains, forks and colliders of a DAG.
    pub fn structures(&self) -> Result<Structures, GraphError> {
        self.require_dag()?;
        let mut out = Structures::default();
        for m in 0..self.nodes.len() {
            let parents = self.sorted_names(self.parents_idx(m));
            let children = self.sorted_names(self.children_idx(m));
            let middle = &self.nodes[m];
            for p in &parents {
                for c in &children {
                    out.chains.push(Triple { a: p.clone(), middle: middle.clone(), b: c.clone() });
                }
            }
            for (i, a) in children.iter().enumerate() {
                for b in &children[i + 1..] {
                    out.forks.push(Triple { a: a.clone(), middle: middle.clone(), b: b.clone() });
                }
            }
            for (i, a) in parents.iter().enumerate() {
                for b in &parents[i + 1..] {
                    out.colliders.push(Triple { a: a.clone(), middle: middle.clone(), b: b.clone() });
                }
            }
        }
        out.chains.sort();
        out.forks.sort();
        out.colliders.sort();
        Ok(out)
    }

    /// Are `i` and `j` d-separated by `given` in this DAG?
    pub fn d_separated(&self, i: &str, j: &str, given: &[&str]) -> Result<bool, GraphError> {
        self.require_dag()?;
        let x = self.node_index(i)?;
        let y = self.node_index(j)?;
        if x == y {
            return Err(GraphError::InvalidQuery(format!("`{i}` queried against itself")));
        }
        let mut z = Vec::with_capacity(given.len());
        for g in given {
            let idx = self.node_index(g)?;
            if idx == x || idx == y {
                return Err(GraphError::InvalidQuery(format!("`{g}` is both queried and conditioned on")));
            }
            z.push(idx);
        }
        Ok(!dsep::reachable(self, x, &z)[y])
    }

    /// The same graph with every edge kind replaced.
    pub fn with_kind(&self, kind: EdgeKind) -> CausalGraph {
        let mut g = self.clone();
        for e in g.edges.values_mut() {
            e.kind = kind;
        }
        g
    }

    /// Graphviz rendering: control edges dashed, physical solid, learnt solid gray.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph causal {\n  rankdir=LR;\n  node [shape=ellipse];\n");
        let mut names: Vec<&String> = self.nodes.iter().collect();
        names.sort();
        for n in names {
            out.push_str(&format!("  \"{n}\";\n"));
        }
        for e in self.edges() {
            let mut attrs = match e.kind {
                EdgeKind::Control => vec!["style=dashed".to_string()],
                EdgeKind::Physical => vec!["style=solid".to_string()],
                EdgeKind::Learnt => vec!["style=solid".to_string(), "color=gray".to_string()],
            };
            if !e.directed {
                attrs.push("dir=none".into());
            }
            out.push_str(&format!("  \"{}\" -> \"{}\" [{}];\n", e.src, e.dst, attrs.join(", ")));
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serialization is infallible")
    }
}

#[cfg(test)]
impl CausalGraph {
    /// Learnt-edge DAG for tests; panics on invalid input.
    pub(crate) fn dag(nodes: &[&str], edges: &[(&str, &str)]) -> CausalGraph {
        CausalGraph::from_edges(nodes, edges, EdgeKind::Learnt).unwrap()
    }
}
