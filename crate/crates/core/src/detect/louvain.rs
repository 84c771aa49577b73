use rand::seq::SliceRandom;

use crate::graph::Graph;
use crate::partition::Partition;
use crate::rng::rng_from_seed;

const MOVE_EPS: f64 = 1e-12;
const MAX_PASSES: usize = 1_000;

/// Weighted graph with explicit self-loop weights, used for the aggregated
/// levels.
struct Level {
    adj: Vec<Vec<(usize, f64)>>,
    self_w: Vec<f64>,
    strength: Vec<f64>,
    two_m: f64,
}

impl Level {
    fn from_graph(g: &Graph) -> Self {
        let adj: Vec<Vec<(usize, f64)>> = g
            .nodes()
            .map(|u| g.neighbors(u).iter().map(|&v| (v, 1.0)).collect())
            .collect();
        let strength = g.nodes().map(|u| g.degree(u) as f64).collect();
        Level {
            adj,
            self_w: vec![0.0; g.node_count()],
            strength,
            two_m: 2.0 * g.edge_count() as f64,
        }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    /// Local moving: every node goes to the neighbouring community with the
    /// largest modularity gain, in a freshly shuffled order each pass, until
    /// a pass moves nobody. Returns dense community labels and whether any
    /// node moved.
    fn local_moving(&self, rng: &mut crate::rng::Rng) -> (Vec<usize>, bool) {
        let n = self.len();
        let mut comm: Vec<usize> = (0..n).collect();
        let mut tot: Vec<f64> = self.strength.clone();
        let mut weight_to = vec![0.0; n];
        let mut touched: Vec<usize> = Vec::new();
        let mut order: Vec<usize> = (0..n).collect();
        let mut any_move = false;

        for _ in 0..MAX_PASSES {
            order.shuffle(rng);
            let mut moved = false;
            for &i in &order {
                let ci = comm[i];
                let ki = self.strength[i];
                for &(j, w) in &self.adj[i] {
                    let cj = comm[j];
                    if weight_to[cj] == 0.0 {
                        touched.push(cj);
                    }
                    weight_to[cj] += w;
                }
                tot[ci] -= ki;
                let ratio = ki / self.two_m;
                let mut best = ci;
                let mut best_gain = weight_to[ci] - tot[ci] * ratio;
                for &c in &touched {
                    let gain = weight_to[c] - tot[c] * ratio;
                    if gain > best_gain + MOVE_EPS {
                        best = c;
                        best_gain = gain;
                    }
                }
                tot[best] += ki;
                if best != ci {
                    comm[i] = best;
                    moved = true;
                }
                for &c in &touched {
                    weight_to[c] = 0.0;
                }
                touched.clear();
            }
            if !moved {
                break;
            }
            any_move = true;
        }

        let mut remap = vec![usize::MAX; n];
        let mut next = 0;
        for c in comm.iter_mut() {
            if remap[*c] == usize::MAX {
                remap[*c] = next;
                next += 1;
            }
            *c = remap[*c];
        }
        (comm, any_move)
    }

    fn aggregate(&self, comm: &[usize]) -> Level {
        let h = comm.iter().max().map_or(0, |&c| c + 1);
        let mut self_w = vec![0.0; h];
        let mut strength = vec![0.0; h];
        let mut maps: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); h];
        for i in 0..self.len() {
            let ci = comm[i];
            self_w[ci] += self.self_w[i];
            strength[ci] += self.strength[i];
            for &(j, w) in &self.adj[i] {
                let cj = comm[j];
                if ci == cj {
                    // each internal edge is seen from both ends
                    self_w[ci] += w / 2.0;
                } else {
                    *maps[ci].entry(cj).or_insert(0.0) += w;
                }
            }
        }
        Level {
            adj: maps.into_iter().map(|m| m.into_iter().collect()).collect(),
            self_w,
            strength,
            two_m: self.two_m,
        }
    }
}

/// Louvain modularity optimisation: local moving with a full best-gain scan
/// per node, then aggregation of communities into super-nodes, repeated
/// until a level produces no move.
pub fn detect_louvain(g: &Graph, seed: u64) -> Partition {
    let n = g.node_count();
    if g.edge_count() == 0 {
        return Partition::singletons(n);
    }
    let mut rng = rng_from_seed(seed);
    let mut membership: Vec<usize> = (0..n).collect();
    let mut level = Level::from_graph(g);
    loop {
        let (comm, moved) = level.local_moving(&mut rng);
        if !moved {
            break;
        }
        for m in membership.iter_mut() {
            *m = comm[*m];
        }
        level = level.aggregate(&comm);
    }
    Partition::from_labels(&membership)
}
