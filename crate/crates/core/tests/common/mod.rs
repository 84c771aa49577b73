//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use std::collections::HashMap;

use qattack::graph::Graph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Erdős–Rényi graph with edge probability `p`.
pub fn random_graph(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

/// Random graph with at least one edge and one missing edge.
pub fn random_rewirable(n: usize, p: f64, seed: u64) -> Graph {
    (0..)
        .map(|k| random_graph(n, p, seed.wrapping_mul(1_000).wrapping_add(k)))
        .find(|g| g.edge_count() > 0 && g.edge_count() < n * (n - 1) / 2)
        .unwrap()
}

fn adjacency(g: &Graph) -> Vec<Vec<f64>> {
    let n = g.node_count();
    let mut a = vec![vec![0.0; n]; n];
    for e in g.edges() {
        a[e.lo()][e.hi()] = 1.0;
        a[e.hi()][e.lo()] = 1.0;
    }
    a
}

/// Newman's definition over the dense adjacency matrix:
/// `Q = (1/2m) Σ_ij (A_ij − k_i k_j / 2m) δ(c_i, c_j)`.
pub fn modularity_dense(g: &Graph, labels: &[usize]) -> f64 {
    let a = adjacency(g);
    let n = g.node_count();
    let k: Vec<f64> = a.iter().map(|r| r.iter().sum()).collect();
    let two_m: f64 = k.iter().sum();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if labels[i] == labels[j] {
                q += a[i][j] - k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

/// NMI in base 2 straight from the joint distribution.
pub fn nmi_reference(x: &[usize], y: &[usize]) -> f64 {
    let n = x.len() as f64;
    let mut joint: HashMap<(usize, usize), f64> = HashMap::new();
    let mut px: HashMap<usize, f64> = HashMap::new();
    let mut py: HashMap<usize, f64> = HashMap::new();
    for (&a, &b) in x.iter().zip(y) {
        *joint.entry((a, b)).or_default() += 1.0 / n;
        *px.entry(a).or_default() += 1.0 / n;
        *py.entry(b).or_default() += 1.0 / n;
    }
    let h = |m: &HashMap<usize, f64>| -m.values().map(|p| p * p.log2()).sum::<f64>();
    let i: f64 = joint
        .iter()
        .map(|(&(a, b), &p)| p * (p / (px[&a] * py[&b])).log2())
        .sum();
    let (hx, hy) = (h(&px), h(&py));
    if hx + hy == 0.0 {
        1.0
    } else {
        2.0 * i / (hx + hy)
    }
}

/// Every set partition of `n` nodes as restricted growth strings.
pub fn all_partitions(n: usize) -> Vec<Vec<usize>> {
    fn grow(cur: &mut Vec<usize>, max: usize, n: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for l in 0..=max + 1 {
            cur.push(l);
            grow(cur, max.max(l), n, out);
            cur.pop();
        }
    }
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    grow(&mut vec![0], 0, n, &mut out);
    out
}

/// Canonical relabelling: communities numbered by first appearance.
pub fn canonical(labels: &[usize]) -> Vec<usize> {
    let mut map = HashMap::new();
    labels
        .iter()
        .map(|l| {
            let k = map.len();
            *map.entry(*l).or_insert(k)
        })
        .collect()
}

/// Highest modularity over all partitions (small graphs only).
pub fn max_modularity(g: &Graph) -> f64 {
    all_partitions(g.node_count())
        .iter()
        .map(|p| modularity_dense(g, p))
        .fold(f64::NEG_INFINITY, f64::max)
}
