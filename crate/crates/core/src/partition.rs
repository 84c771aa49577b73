use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::NodeId;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PartitionError {
    #[error("node {0} is assigned to more than one community")]
    Overlap(NodeId),
    #[error("node {0} is not assigned to any community")]
    Unassigned(NodeId),
    #[error("node {node} out of range for {node_count} nodes")]
    InvalidNode { node: NodeId, node_count: usize },
}

/// Hard assignment of every node to one community.
///
/// Labels are normalised to `0..h` in order of first appearance, so derived
/// equality is equality up to label permutation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    labels: Vec<usize>,
    count: usize,
}

impl Partition {
    pub fn from_labels<T: Copy + Eq + std::hash::Hash>(raw: &[T]) -> Self {
        let mut map = std::collections::HashMap::new();
        let labels = raw
            .iter()
            .map(|l| {
                let next = map.len();
                *map.entry(*l).or_insert(next)
            })
            .collect();
        Partition {
            labels,
            count: map.len(),
        }
    }

    pub fn singletons(n: usize) -> Self {
        Partition {
            labels: (0..n).collect(),
            count: n,
        }
    }

    pub fn whole(n: usize) -> Self {
        Partition {
            labels: vec![0; n],
            count: usize::from(n > 0),
        }
    }

    pub fn from_communities(n: usize, communities: &[Vec<NodeId>]) -> Result<Self, PartitionError> {
        let mut raw = vec![usize::MAX; n];
        for (c, members) in communities.iter().enumerate() {
            for &v in members {
                if v >= n {
                    return Err(PartitionError::InvalidNode { node: v, node_count: n });
                }
                if raw[v] != usize::MAX {
                    return Err(PartitionError::Overlap(v));
                }
                raw[v] = c;
            }
        }
        if let Some(v) = raw.iter().position(|&l| l == usize::MAX) {
            return Err(PartitionError::Unassigned(v));
        }
        Ok(Self::from_labels(&raw))
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, v: NodeId) -> usize {
        self.labels[v]
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    /// Number of communities `h`.
    pub fn community_count(&self) -> usize {
        self.count
    }

    pub fn communities(&self) -> Vec<Vec<NodeId>> {
        let mut out = vec![Vec::new(); self.count];
        for (v, &c) in self.labels.iter().enumerate() {
            out[c].push(v);
        }
        out
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut out = vec![0; self.count];
        for &c in &self.labels {
            out[c] += 1;
        }
        out
    }

    pub fn same_community(&self, u: NodeId, v: NodeId) -> bool {
        self.labels[u] == self.labels[v]
    }
}
