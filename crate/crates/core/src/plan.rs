//! Rewiring genes and plans (the attack set `E_attack`).

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Edge, Graph, NodeId};

/// One rewiring at `target`: drop the edge to `delete_peer`, add one to
/// `add_peer`. The target keeps its degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RewiringGene {
    pub target: NodeId,
    pub delete_peer: NodeId,
    pub add_peer: NodeId,
}

impl RewiringGene {
    pub fn new(target: NodeId, delete_peer: NodeId, add_peer: NodeId) -> Self {
        RewiringGene {
            target,
            delete_peer,
            add_peer,
        }
    }

    pub fn deleted_edge(&self) -> Edge {
        Edge::new(self.target, self.delete_peer)
    }

    pub fn added_edge(&self) -> Edge {
        Edge::new(self.target, self.add_peer)
    }

    /// The same rewiring undone: delete what was added, restore what was deleted.
    pub fn reversed(&self) -> Self {
        RewiringGene::new(self.target, self.add_peer, self.delete_peer)
    }
}

impl fmt::Display for RewiringGene {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: -{} +{}",
            self.target, self.delete_peer, self.add_peer
        )
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Violation {
    #[error("gene endpoints are not pairwise distinct")]
    Degenerate,
    #[error("node {0} does not exist")]
    UnknownNode(NodeId),
    #[error("edge {0} to delete is not in the graph")]
    MissingEdge(Edge),
    #[error("edge {0} to add is already in the graph")]
    ExistingEdge(Edge),
    #[error("edge {0} is deleted by an earlier gene")]
    DuplicateDelete(Edge),
    #[error("edge {0} is added by an earlier gene")]
    DuplicateAdd(Edge),
    #[error("edge {0} is both added and deleted")]
    AddDeleteOverlap(Edge),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlanError {
    #[error("infeasible rewiring plan: gene {index} ({gene}): {violation}")]
    Infeasible {
        index: usize,
        gene: RewiringGene,
        violation: Violation,
    },
}

/// Ordered list of rewiring genes.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RewiringPlan {
    genes: Vec<RewiringGene>,
}

impl RewiringPlan {
    pub fn new(genes: Vec<RewiringGene>) -> Self {
        RewiringPlan { genes }
    }

    pub fn genes(&self) -> &[RewiringGene] {
        &self.genes
    }

    pub fn genes_mut(&mut self) -> &mut Vec<RewiringGene> {
        &mut self.genes
    }

    pub fn into_genes(self) -> Vec<RewiringGene> {
        self.genes
    }

    pub fn len(&self) -> usize {
        self.genes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genes.is_empty()
    }

    pub fn push(&mut self, gene: RewiringGene) {
        self.genes.push(gene);
    }

    pub fn deleted_edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.genes.iter().map(RewiringGene::deleted_edge)
    }

    pub fn added_edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.genes.iter().map(RewiringGene::added_edge)
    }

    /// Plan that undoes this one when applied to the adversarial graph.
    pub fn reversed(&self) -> Self {
        RewiringPlan::new(self.genes.iter().map(RewiringGene::reversed).collect())
    }

    /// Internal conflict rules only: distinct endpoints, no edge deleted
    /// twice, added twice, or both added and deleted.
    pub fn is_conflict_free(&self) -> bool {
        let mut deleted = HashSet::with_capacity(self.genes.len());
        let mut added = HashSet::with_capacity(self.genes.len());
        for g in &self.genes {
            if g.target == g.delete_peer || g.target == g.add_peer || g.delete_peer == g.add_peer
            {
                return false;
            }
            if !deleted.insert(g.deleted_edge()) || !added.insert(g.added_edge()) {
                return false;
            }
        }
        deleted.is_disjoint(&added)
    }

    /// Joint feasibility against the base graph: every deleted edge exists,
    /// every added edge does not, and the conflict rules hold. Reports the
    /// first violating gene.
    pub fn check_feasible(&self, g: &Graph) -> Result<(), PlanError> {
        let mut deleted = HashSet::with_capacity(self.genes.len());
        let mut added = HashSet::with_capacity(self.genes.len());
        for (index, gene) in self.genes.iter().enumerate() {
            let fail = |violation| {
                Err(PlanError::Infeasible {
                    index,
                    gene: *gene,
                    violation,
                })
            };
            for v in [gene.target, gene.delete_peer, gene.add_peer] {
                if v >= g.node_count() {
                    return fail(Violation::UnknownNode(v));
                }
            }
            if gene.target == gene.delete_peer
                || gene.target == gene.add_peer
                || gene.delete_peer == gene.add_peer
            {
                return fail(Violation::Degenerate);
            }
            let del = gene.deleted_edge();
            let add = gene.added_edge();
            if !g.contains_edge(del) {
                return fail(Violation::MissingEdge(del));
            }
            if g.contains_edge(add) {
                return fail(Violation::ExistingEdge(add));
            }
            if !deleted.insert(del) {
                return fail(Violation::DuplicateDelete(del));
            }
            if !added.insert(add) {
                return fail(Violation::DuplicateAdd(add));
            }
            if added.contains(&del) {
                return fail(Violation::AddDeleteOverlap(del));
            }
            if deleted.contains(&add) {
                return fail(Violation::AddDeleteOverlap(add));
            }
        }
        Ok(())
    }

    /// Order-independent key: sorted genes. Two plans with the same key yield
    /// the same adversarial network.
    pub fn canonical(&self) -> Vec<RewiringGene> {
        let mut genes = self.genes.clone();
        genes.sort_unstable();
        genes
    }
}

impl FromIterator<RewiringGene> for RewiringPlan {
    fn from_iter<T: IntoIterator<Item = RewiringGene>>(iter: T) -> Self {
        RewiringPlan::new(iter.into_iter().collect())
    }
}
