use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::graph::Graph;
use crate::partition::Partition;
use crate::rng::rng_from_seed;

#[derive(Clone, Debug, PartialEq)]
pub struct LpaOutcome {
    pub partition: Partition,
    /// False if the sweep cap was reached while labels were still changing.
    pub converged: bool,
    pub sweeps: usize,
}

/// Asynchronous label propagation.
///
/// Nodes are visited in a new random order every sweep and adopt the most
/// frequent label among their neighbours, ties broken uniformly at random.
/// A node whose current label is among the maxima keeps it. Stops after a
/// sweep with no change, or after `max_sweeps`.
pub fn detect_lpa(g: &Graph, seed: u64, max_sweeps: usize) -> LpaOutcome {
    let n = g.node_count();
    let mut rng = rng_from_seed(seed);
    let mut labels: Vec<usize> = (0..n).collect();
    let mut order: Vec<usize> = (0..n).collect();
    let mut counts = vec![0usize; n];
    let mut seen: Vec<usize> = Vec::new();
    let mut ties: Vec<usize> = Vec::new();
    let mut converged = false;
    let mut sweeps = 0;

    while sweeps < max_sweeps {
        sweeps += 1;
        order.shuffle(&mut rng);
        let mut changed = false;
        for &v in &order {
            let nbrs = g.neighbors(v);
            if nbrs.is_empty() {
                continue;
            }
            for &u in nbrs {
                let l = labels[u];
                if counts[l] == 0 {
                    seen.push(l);
                }
                counts[l] += 1;
            }
            let best = seen.iter().map(|&l| counts[l]).max().unwrap_or(0);
            if counts[labels[v]] < best {
                ties.extend(seen.iter().copied().filter(|&l| counts[l] == best));
                ties.sort_unstable();
                labels[v] = ties[rng.gen_range(0..ties.len())];
                changed = true;
                ties.clear();
            }
            for &l in &seen {
                counts[l] = 0;
            }
            seen.clear();
        }
        if !changed {
            converged = true;
            break;
        }
    }

    LpaOutcome {
        partition: Partition::from_labels(&labels),
        converged,
        sweeps,
    }
}
