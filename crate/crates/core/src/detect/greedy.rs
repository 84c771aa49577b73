use std::collections::BTreeMap;

use crate::graph::Graph;
use crate::partition::Partition;

/// Agglomerative greedy modularity maximisation.
///
/// Starts from singletons and repeatedly merges the pair of adjacent
/// communities with the largest `ΔQ = 2 (e_ij − a_i a_j)` until no adjacent
/// pair is left; returns the level of the dendrogram with the highest `Q`.
/// Ties go to the lexicographically smallest community-id pair, and a merged
/// community keeps the smaller id.
pub fn detect_fn(g: &Graph) -> Partition {
    let n = g.node_count();
    let m = g.edge_count();
    if m == 0 {
        return Partition::singletons(n);
    }
    let half_inv = 1.0 / (2.0 * m as f64);

    // e[i][j] for i != j: half the fraction of edges joining i and j.
    let mut e: Vec<BTreeMap<usize, f64>> = g
        .nodes()
        .map(|u| g.neighbors(u).iter().map(|&v| (v, half_inv)).collect())
        .collect();
    let mut a: Vec<f64> = g.nodes().map(|u| g.degree(u) as f64 * half_inv).collect();

    let mut q: f64 = -a.iter().map(|x| x * x).sum::<f64>();
    let mut best_q = q;
    let mut best_step = 0;
    let mut merges: Vec<(usize, usize)> = Vec::with_capacity(n);

    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for (i, row) in e.iter().enumerate() {
            for (&j, &eij) in row.range(i + 1..) {
                let dq = 2.0 * (eij - a[i] * a[j]);
                if best.is_none_or(|(b, _, _)| dq > b) {
                    best = Some((dq, i, j));
                }
            }
        }
        let Some((dq, i, j)) = best else { break };

        let row_j = std::mem::take(&mut e[j]);
        for (k, ejk) in row_j {
            if k == i {
                continue;
            }
            *e[i].entry(k).or_insert(0.0) += ejk;
            let row_k = &mut e[k];
            row_k.remove(&j);
            *row_k.entry(i).or_insert(0.0) += ejk;
        }
        e[i].remove(&j);
        a[i] += a[j];
        a[j] = 0.0;

        q += dq;
        merges.push((i, j));
        if q > best_q {
            best_q = q;
            best_step = merges.len();
        }
    }

    let mut parent: Vec<usize> = (0..n).collect();
    for &(i, j) in &merges[..best_step] {
        parent[j] = i;
    }
    let labels: Vec<usize> = (0..n)
        .map(|mut v| {
            while parent[v] != v {
                v = parent[v];
            }
            v
        })
        .collect();
    Partition::from_labels(&labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::modularity;

    #[test]
    fn bridged_triangles() {
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)])
            .unwrap();
        let p = detect_fn(&g);
        assert_eq!(p, Partition::from_labels(&[0, 0, 0, 1, 1, 1]));
        assert!((modularity(&g, &p).unwrap() - 5.0 / 14.0).abs() < 1e-12);
    }

    #[test]
    fn edgeless_graph_gives_singletons() {
        assert_eq!(detect_fn(&Graph::empty(4)), Partition::singletons(4));
    }

    #[test]
    fn never_below_singletons() {
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
        let q = modularity(&g, &detect_fn(&g)).unwrap();
        let q0 = modularity(&g, &Partition::singletons(5)).unwrap();
        assert!(q >= q0);
    }
}
