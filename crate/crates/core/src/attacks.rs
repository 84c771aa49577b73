//! Heuristic rewiring attacks (random, community-aware, degree-based) and the
//! exhaustive single-rewiring oracle.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detect::{DetectError, Detector};
use crate::graph::{Graph, NodeId};
use crate::metrics::{modularity, MetricError};
use crate::partition::Partition;
use crate::plan::{PlanError, RewiringGene, RewiringPlan};
use crate::rng::{derive_seed, rng_from_seed, Rng};

/// Failed draws tolerated before a heuristic gives up on filling the budget.
pub const RETRY_CAP: usize = 1_000;

/// Default limit on the number of detector runs the exhaustive oracle may spend.
pub const EXHAUSTIVE_LIMIT: usize = 250_000;

const DETECT_TAG: u64 = 0xD7EC;

#[derive(Debug, Error)]
pub enum AttackError {
    #[error("invalid attack configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Detect(#[from] DetectError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error("graph admits no feasible rewiring")]
    NoFeasibleGene,
    #[error("exhaustive search needs {needed} detector runs, limit is {limit}")]
    TooLarge { needed: usize, limit: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeuristicConfig {
    /// Size of the target set.
    pub k: usize,
    /// Number of rewirings.
    pub budget: usize,
    pub seed: u64,
}

impl HeuristicConfig {
    pub fn validate(&self, g: &Graph) -> Result<(), AttackError> {
        let n = g.node_count();
        if self.k == 0 || self.k > n {
            return Err(AttackError::Config(format!("k must be in 1..={n}, got {}", self.k)));
        }
        Ok(())
    }
}

/// Result of a heuristic attack.
#[derive(Clone, Debug, PartialEq)]
pub struct AttackOutcome {
    pub plan: RewiringPlan,
    pub targets: Vec<NodeId>,
    /// Partition that guided the attack (CDA and DBA only).
    pub partition: Option<Partition>,
    /// Set when fewer than `budget` rewirings could be drawn.
    pub shortfall: bool,
}

/// Mutable copy of the graph that tracks the rewirings drawn so far.
struct WorkingCopy<'a> {
    base: &'a Graph,
    adj: Vec<BTreeSet<NodeId>>,
}

impl<'a> WorkingCopy<'a> {
    fn new(base: &'a Graph) -> Self {
        WorkingCopy {
            base,
            adj: base.nodes().map(|v| base.neighbors(v).iter().copied().collect()).collect(),
        }
    }

    /// Edges at `v` that may be deleted: present now and in the base graph
    /// (never re-delete an added edge).
    fn delete_candidates(&self, v: NodeId, p: Option<&Partition>) -> Vec<NodeId> {
        self.adj[v]
            .iter()
            .copied()
            .filter(|&u| self.base.has_edge(v, u))
            .filter(|&u| p.is_none_or(|p| p.same_community(v, u)))
            .collect()
    }

    /// Non-edges at `v` that may be added: absent now and in the base graph
    /// (never restore a deleted edge).
    fn add_candidates(&self, v: NodeId, p: Option<&Partition>) -> Vec<NodeId> {
        self.base
            .nodes()
            .filter(|&u| u != v && !self.adj[v].contains(&u) && !self.base.has_edge(v, u))
            .filter(|&u| p.is_none_or(|p| !p.same_community(v, u)))
            .collect()
    }

    fn has_move(&self, v: NodeId, p: Option<&Partition>) -> bool {
        !self.delete_candidates(v, p).is_empty() && !self.add_candidates(v, p).is_empty()
    }

    fn apply(&mut self, gene: RewiringGene) {
        let RewiringGene {
            target,
            delete_peer,
            add_peer,
        } = gene;
        self.adj[target].remove(&delete_peer);
        self.adj[delete_peer].remove(&target);
        self.adj[target].insert(add_peer);
        self.adj[add_peer].insert(target);
    }
}

/// Common attack body: each step draws a target from `targets` (with
/// replacement), then a delete peer and an add peer from the current
/// candidate sets, restricted by `guide` when given (delete inside the
/// target's community, add outside it). Targets without candidates are
/// skipped without spending budget.
fn rewire_targets(
    g: &Graph,
    targets: &[NodeId],
    budget: usize,
    guide: Option<&Partition>,
    rng: &mut Rng,
) -> (RewiringPlan, bool) {
    let mut work = WorkingCopy::new(g);
    let mut plan = RewiringPlan::default();
    let mut failures = 0;
    while plan.len() < budget && failures < RETRY_CAP && !targets.is_empty() {
        let v = *targets.choose(rng).unwrap();
        let dels = work.delete_candidates(v, guide);
        let adds = work.add_candidates(v, guide);
        if dels.is_empty() || adds.is_empty() {
            failures += 1;
            if !targets.iter().any(|&t| work.has_move(t, guide)) {
                break;
            }
            continue;
        }
        let gene = RewiringGene::new(v, dels[rng.gen_range(0..dels.len())], adds[rng.gen_range(0..adds.len())]);
        work.apply(gene);
        plan.push(gene);
    }
    debug_assert!(plan.check_feasible(g).is_ok());
    let shortfall = plan.len() < budget;
    if shortfall {
        log::warn!("only {} of {} rewirings could be drawn", plan.len(), budget);
    }
    (plan, shortfall)
}

fn sample_targets(g: &Graph, k: usize, rng: &mut Rng) -> Vec<NodeId> {
    sample(rng, g.node_count(), k).into_vec()
}

/// Random attack: `k` targets sampled once, uniform rewiring at each.
pub fn random_attack(g: &Graph, cfg: &HeuristicConfig) -> Result<AttackOutcome, AttackError> {
    cfg.validate(g)?;
    let mut rng = rng_from_seed(cfg.seed);
    let targets = sample_targets(g, cfg.k, &mut rng);
    let (plan, shortfall) = rewire_targets(g, &targets, cfg.budget, None, &mut rng);
    Ok(AttackOutcome {
        plan,
        targets,
        partition: None,
        shortfall,
    })
}

/// Runs the detector once on the original graph, with a seed derived from
/// the attack seed.
pub fn initial_partition(g: &Graph, detector: &dyn Detector, seed: u64) -> Result<Partition, AttackError> {
    Ok(detector.detect_seeded(g, derive_seed(seed, &[DETECT_TAG]))?)
}

/// Community detection attack: like the random attack, but each rewiring
/// deletes an intra-community edge and adds an inter-community one with
/// respect to one detection on the original graph.
pub fn cda_attack(g: &Graph, cfg: &HeuristicConfig, detector: &dyn Detector) -> Result<AttackOutcome, AttackError> {
    cfg.validate(g)?;
    let partition = initial_partition(g, detector, cfg.seed)?;
    let mut rng = rng_from_seed(cfg.seed);
    let targets = sample_targets(g, cfg.k, &mut rng);
    let (plan, shortfall) = rewire_targets(g, &targets, cfg.budget, Some(&partition), &mut rng);
    Ok(AttackOutcome {
        plan,
        targets,
        partition: Some(partition),
        shortfall,
    })
}

/// Degree-based target choice. Each turn repeatedly takes the highest
/// degree node left in the pool (smallest id on ties) and removes its whole
/// community from the pool; an exhausted pool is refilled with every node
/// not yet chosen.
pub fn dba_targets(g: &Graph, partition: &Partition, k: usize) -> Result<Vec<NodeId>, AttackError> {
    let n = g.node_count();
    if k == 0 || k > n {
        return Err(AttackError::Config(format!("k must be in 1..={n}, got {k}")));
    }
    if partition.node_count() != n {
        return Err(AttackError::Config("partition does not match graph".into()));
    }
    let mut chosen = vec![false; n];
    let mut targets = Vec::with_capacity(k);
    let mut pool: Vec<bool> = vec![true; n];
    while targets.len() < k {
        let pick = (0..n)
            .filter(|&v| pool[v])
            .max_by(|&a, &b| g.degree(a).cmp(&g.degree(b)).then(b.cmp(&a)));
        match pick {
            Some(v) => {
                chosen[v] = true;
                targets.push(v);
                let c = partition.label(v);
                for u in 0..n {
                    if partition.label(u) == c {
                        pool[u] = false;
                    }
                }
            }
            None => {
                for v in 0..n {
                    pool[v] = !chosen[v];
                }
            }
        }
    }
    Ok(targets)
}

/// Degree-based attack: targets from [`dba_targets`], then the community
/// detection attack body.
pub fn dba_attack(g: &Graph, cfg: &HeuristicConfig, detector: &dyn Detector) -> Result<AttackOutcome, AttackError> {
    cfg.validate(g)?;
    let partition = initial_partition(g, detector, cfg.seed)?;
    let targets = dba_targets(g, &partition, cfg.k)?;
    let mut rng = rng_from_seed(cfg.seed);
    let (plan, shortfall) = rewire_targets(g, &targets, cfg.budget, Some(&partition), &mut rng);
    Ok(AttackOutcome {
        plan,
        targets,
        partition: Some(partition),
        shortfall,
    })
}

/// Every feasible single rewiring of `g`, in lexicographic order.
pub fn all_genes(g: &Graph) -> Vec<RewiringGene> {
    let mut out = Vec::new();
    for v in g.nodes() {
        let nn = g.non_neighbors(v).expect("valid node");
        for &d in g.neighbors(v) {
            for &a in &nn {
                out.push(RewiringGene::new(v, d, a));
            }
        }
    }
    out
}

pub fn gene_count(g: &Graph) -> usize {
    let n = g.node_count();
    g.nodes().map(|v| g.degree(v) * (n - 1 - g.degree(v))).sum()
}

/// Modularity of the detector's partition of `g` after applying `plan`.
pub fn attacked_modularity(g: &Graph, plan: &RewiringPlan, detector: &dyn Detector, seed: u64) -> Result<f64, AttackError> {
    let adv = g.apply_plan(plan)?;
    let p = detector.detect_seeded(&adv, seed)?;
    Ok(modularity(&adv, &p)?)
}

/// Tries every single rewiring and returns the one giving the lowest
/// detected modularity, ties to the lexicographically smallest gene.
/// Stochastic detectors are run with `seed` for every candidate.
pub fn exhaustive_best_rewiring(
    g: &Graph,
    detector: &dyn Detector,
    seed: u64,
    limit: usize,
) -> Result<(RewiringGene, f64), AttackError> {
    let needed = gene_count(g);
    if needed > limit {
        return Err(AttackError::TooLarge { needed, limit });
    }
    let genes = all_genes(g);
    let scored: Vec<(f64, RewiringGene)> = genes
        .par_iter()
        .map(|&gene| attacked_modularity(g, &RewiringPlan::new(vec![gene]), detector, seed).map(|q| (q, gene)))
        .collect::<Result<_, _>>()?;
    scored
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .map(|(q, gene)| (gene, q))
        .ok_or(AttackError::NoFeasibleGene)
}
