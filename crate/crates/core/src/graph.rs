//! Undirected simple graphs over dense node ids and the rewiring model used
//! to turn an original network into an adversarial one.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::plan::{PlanError, RewiringPlan};

pub type NodeId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("self-loop on node `{0}` is not allowed")]
    SelfLoop(String),
    #[error("node id {node} out of range for a graph with {node_count} nodes")]
    InvalidNode { node: NodeId, node_count: usize },
}

/// Unordered node pair, stored with the smaller endpoint first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge(NodeId, NodeId);

impl Edge {
    pub fn new(a: NodeId, b: NodeId) -> Self {
        if a <= b {
            Edge(a, b)
        } else {
            Edge(b, a)
        }
    }

    pub fn lo(&self) -> NodeId {
        self.0
    }

    pub fn hi(&self) -> NodeId {
        self.1
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.0, self.1)
    }
}

/// Immutable undirected simple graph.
///
/// Adjacency lists are kept sorted, so two graphs compare equal exactly when
/// they have the same node count and the same edge set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<NodeId>>,
    edge_count: usize,
}

impl Graph {
    pub fn empty(node_count: usize) -> Self {
        Graph {
            adj: vec![Vec::new(); node_count],
            edge_count: 0,
        }
    }

    /// Builds a graph on `node_count` dense ids. Duplicate pairs collapse.
    pub fn from_edges<I>(node_count: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let mut adj = vec![Vec::new(); node_count];
        for (u, v) in edges {
            for w in [u, v] {
                if w >= node_count {
                    return Err(GraphError::InvalidNode {
                        node: w,
                        node_count,
                    });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u.to_string()));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        Ok(Self::from_raw_adjacency(adj))
    }

    fn from_raw_adjacency(mut adj: Vec<Vec<NodeId>>) -> Self {
        let mut twice_m = 0;
        for list in adj.iter_mut() {
            list.sort_unstable();
            list.dedup();
            twice_m += list.len();
        }
        Graph {
            adj,
            edge_count: twice_m / 2,
        }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn nodes(&self) -> std::ops::Range<NodeId> {
        0..self.adj.len()
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adj[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adj.iter().map(Vec::len).collect()
    }

    /// Sorted neighbor list of `v`. Panics on an invalid id; see [`Graph::try_neighbors`].
    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.adj[v]
    }

    pub fn try_neighbors(&self, v: NodeId) -> Result<&[NodeId], GraphError> {
        self.check_node(v)?;
        Ok(&self.adj[v])
    }

    /// Every node other than `v` that is not adjacent to it, ascending.
    pub fn non_neighbors(&self, v: NodeId) -> Result<Vec<NodeId>, GraphError> {
        self.check_node(v)?;
        let nbrs = &self.adj[v];
        let mut out = Vec::with_capacity(self.node_count() - 1 - nbrs.len());
        let mut it = nbrs.iter().peekable();
        for w in self.nodes() {
            if w == v {
                continue;
            }
            if it.peek() == Some(&&w) {
                it.next();
                continue;
            }
            out.push(w);
        }
        Ok(out)
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        u < self.adj.len() && self.adj[u].binary_search(&v).is_ok()
    }

    pub fn contains_edge(&self, e: Edge) -> bool {
        self.has_edge(e.lo(), e.hi())
    }

    /// All edges in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, list)| {
            list.iter()
                .filter(move |&&v| v > u)
                .map(move |&v| Edge(u, v))
        })
    }

    pub fn check_node(&self, v: NodeId) -> Result<(), GraphError> {
        if v < self.adj.len() {
            Ok(())
        } else {
            Err(GraphError::InvalidNode {
                node: v,
                node_count: self.adj.len(),
            })
        }
    }

    /// Produces the adversarial network `E' = (E \ deleted) ∪ added`.
    ///
    /// Feasibility is checked against `self` with set semantics before any
    /// edge is touched, so the result does not depend on gene order.
    pub fn apply_plan(&self, plan: &RewiringPlan) -> Result<Graph, PlanError> {
        plan.check_feasible(self)?;
        let mut adj = self.adj.clone();
        for gene in plan.genes() {
            let (t, d, a) = (gene.target, gene.delete_peer, gene.add_peer);
            remove_sorted(&mut adj[t], d);
            remove_sorted(&mut adj[d], t);
            insert_sorted(&mut adj[t], a);
            insert_sorted(&mut adj[a], t);
        }
        Ok(Graph {
            adj,
            edge_count: self.edge_count,
        })
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn connected_components(&self) -> Vec<Vec<NodeId>> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut comps = Vec::new();
        let mut stack = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            stack.push(s);
            let mut comp = Vec::new();
            while let Some(u) = stack.pop() {
                comp.push(u);
                for &w in &self.adj[u] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    /// Relabels nodes: node `v` of `self` becomes `perm[v]`.
    pub fn permuted(&self, perm: &[NodeId]) -> Graph {
        assert_eq!(perm.len(), self.node_count());
        let mut adj = vec![Vec::new(); self.node_count()];
        for (u, list) in self.adj.iter().enumerate() {
            adj[perm[u]] = list.iter().map(|&v| perm[v]).collect();
        }
        Self::from_raw_adjacency(adj)
    }
}

fn remove_sorted(list: &mut Vec<NodeId>, v: NodeId) {
    if let Ok(pos) = list.binary_search(&v) {
        list.remove(pos);
    }
}

fn insert_sorted(list: &mut Vec<NodeId>, v: NodeId) {
    if let Err(pos) = list.binary_search(&v) {
        list.insert(pos, v);
    }
}

/// A graph together with the original labels of its dense node ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledGraph {
    pub graph: Graph,
    pub labels: Vec<String>,
}

impl LabeledGraph {
    pub fn label(&self, v: NodeId) -> &str {
        &self.labels[v]
    }

    pub fn id_of(&self, label: &str) -> Option<NodeId> {
        self.labels.iter().position(|l| l == label)
    }
}

/// Compacts arbitrary node labels to dense ids in order of first appearance
/// and builds the graph. Duplicate pairs are collapsed; a self-loop is an
/// error naming the offending label.
pub fn build_graph<I, L>(pairs: I) -> Result<LabeledGraph, GraphError>
where
    I: IntoIterator<Item = (L, L)>,
    L: AsRef<str>,
{
    build_graph_with_nodes(std::iter::empty::<&str>(), pairs)
}

/// Like [`build_graph`], but `nodes` are interned first, fixing their ids
/// and keeping isolated ones.
pub fn build_graph_with_nodes<N, I, L>(nodes: N, pairs: I) -> Result<LabeledGraph, GraphError>
where
    N: IntoIterator,
    N::Item: AsRef<str>,
    I: IntoIterator<Item = (L, L)>,
    L: AsRef<str>,
{
    let mut ids: HashMap<String, NodeId> = HashMap::new();
    let mut labels: Vec<String> = Vec::new();
    let mut edges = Vec::new();
    let mut intern = |l: &str| -> NodeId {
        if let Some(&id) = ids.get(l) {
            return id;
        }
        let id = labels.len();
        labels.push(l.to_string());
        ids.insert(l.to_string(), id);
        id
    };
    for v in nodes {
        intern(v.as_ref());
    }
    for (a, b) in pairs {
        let (a, b) = (a.as_ref(), b.as_ref());
        if a == b {
            return Err(GraphError::SelfLoop(a.to_string()));
        }
        let u = intern(a);
        let v = intern(b);
        edges.push((u, v));
    }
    let graph = Graph::from_edges(labels.len(), edges)?;
    Ok(LabeledGraph { graph, labels })
}
