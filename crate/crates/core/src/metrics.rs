//! Partition quality (modularity) and partition similarity (NMI).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;
use crate::partition::Partition;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("modularity is undefined on a graph without edges")]
    NoEdges,
    #[error("partition covers {partition} nodes but the graph has {graph}")]
    SizeMismatch { partition: usize, graph: usize },
    #[error("relative reduction is undefined for a zero baseline")]
    ZeroBaseline,
}

/// Modularity in community form: `Q = Σ_i (e_ii − a_i²)`, where `e_ii` is the
/// fraction of edges inside community `i` and `a_i` the fraction of edge
/// ends attached to it.
pub fn modularity(g: &Graph, p: &Partition) -> Result<f64, MetricError> {
    check_sizes(g, p.node_count())?;
    let m = g.edge_count();
    if m == 0 {
        return Err(MetricError::NoEdges);
    }
    let h = p.community_count();
    let mut intra = vec![0usize; h];
    let mut ends = vec![0usize; h];
    for u in g.nodes() {
        let cu = p.label(u);
        ends[cu] += g.degree(u);
        for &v in g.neighbors(u) {
            if v > u && p.label(v) == cu {
                intra[cu] += 1;
            }
        }
    }
    let m = m as f64;
    let two_m = 2.0 * m;
    Ok(intra
        .iter()
        .zip(&ends)
        .map(|(&e, &a)| {
            let a = a as f64 / two_m;
            e as f64 / m - a * a
        })
        .sum())
}

/// Modularity of the two-way split encoded by `signs` in matrix form,
/// `Q = sᵀ B s / 4m` with `B_ij = A_ij − k_i k_j / 2m`.
pub fn modularity_matrix(g: &Graph, signs: &[i8]) -> Result<f64, MetricError> {
    check_sizes(g, signs.len())?;
    let m = g.edge_count();
    if m == 0 {
        return Err(MetricError::NoEdges);
    }
    let two_m = 2.0 * m as f64;
    let k: Vec<f64> = g.degrees().into_iter().map(|d| d as f64).collect();
    let mut total = 0.0;
    for i in g.nodes() {
        let si = f64::from(signs[i].signum());
        let mut row = 0.0;
        for j in g.nodes() {
            let a = if g.has_edge(i, j) { 1.0 } else { 0.0 };
            row += (a - k[i] * k[j] / two_m) * f64::from(signs[j].signum());
        }
        total += si * row;
    }
    Ok(total / (2.0 * two_m))
}

fn check_sizes(g: &Graph, len: usize) -> Result<(), MetricError> {
    if len != g.node_count() {
        return Err(MetricError::SizeMismatch {
            partition: len,
            graph: g.node_count(),
        });
    }
    Ok(())
}

/// Joint community counts of two partitions over the same node set.
#[derive(Clone, Debug)]
pub struct ConfusionTable {
    counts: BTreeMap<(usize, usize), usize>,
    rows: Vec<usize>,
    cols: Vec<usize>,
    total: usize,
}

impl ConfusionTable {
    pub fn new(x: &Partition, y: &Partition) -> Result<Self, MetricError> {
        if x.node_count() != y.node_count() {
            return Err(MetricError::SizeMismatch {
                partition: y.node_count(),
                graph: x.node_count(),
            });
        }
        let mut counts = BTreeMap::new();
        for (&a, &b) in x.labels().iter().zip(y.labels()) {
            *counts.entry((a, b)).or_insert(0) += 1;
        }
        Ok(ConfusionTable {
            counts,
            rows: x.sizes(),
            cols: y.sizes(),
            total: x.node_count(),
        })
    }

    pub fn count(&self, x: usize, y: usize) -> usize {
        self.counts.get(&(x, y)).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn row_marginals(&self) -> &[usize] {
        &self.rows
    }

    pub fn col_marginals(&self) -> &[usize] {
        &self.cols
    }

    pub fn mutual_information(&self) -> f64 {
        let n = self.total as f64;
        self.counts
            .iter()
            .map(|(&(x, y), &c)| {
                let pxy = c as f64 / n;
                let px = self.rows[x] as f64 / n;
                let py = self.cols[y] as f64 / n;
                pxy * (pxy / (px * py)).ln()
            })
            .sum()
    }

    pub fn row_entropy(&self) -> f64 {
        entropy(&self.rows, self.total)
    }

    pub fn col_entropy(&self) -> f64 {
        entropy(&self.cols, self.total)
    }
}

fn entropy(sizes: &[usize], total: usize) -> f64 {
    let n = total as f64;
    sizes
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NmiScore {
    pub value: f64,
    /// Both partitions are a single community, so the entropies vanish and
    /// the score is fixed at 1.
    pub degenerate: bool,
}

pub fn nmi_score(x: &Partition, y: &Partition) -> Result<NmiScore, MetricError> {
    let table = ConfusionTable::new(x, y)?;
    let denom = table.row_entropy() + table.col_entropy();
    if denom <= 0.0 {
        return Ok(NmiScore {
            value: 1.0,
            degenerate: true,
        });
    }
    let value = (2.0 * table.mutual_information() / denom).clamp(0.0, 1.0);
    Ok(NmiScore {
        value,
        degenerate: false,
    })
}

/// Normalised mutual information `2 I(X,Y) / (H(X) + H(Y))`.
pub fn nmi(x: &Partition, y: &Partition) -> Result<f64, MetricError> {
    nmi_score(x, y).map(|s| s.value)
}

/// `(before − after) / before`. Negative when the attack raised the metric.
pub fn relative_reduction(before: f64, after: f64) -> Result<f64, MetricError> {
    if before == 0.0 {
        return Err(MetricError::ZeroBaseline);
    }
    Ok((before - after) / before)
}
