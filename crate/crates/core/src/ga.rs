//! Genetic search for rewiring plans that minimise the modularity found by
//! a detector (fitness `exp(-Q)`).

use std::collections::{HashMap, HashSet};

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attacks::{attacked_modularity, exhaustive_best_rewiring, gene_count, AttackError, EXHAUSTIVE_LIMIT};
use crate::detect::Detector;
use crate::graph::{Edge, Graph, NodeId};
use crate::plan::{RewiringGene, RewiringPlan};
use crate::rng::{derive_seed, derived_rng, Rng};

const INIT_TAG: u64 = 1;
const GEN_TAG: u64 = 2;
const FITNESS_TAG: u64 = 3;
/// Attempts per gene when rejection sampling a fresh gene.
const DRAW_CAP: usize = 1_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub pop_size: usize,
    pub generations: usize,
    /// Crossover probability per mating pair.
    pub pc: f64,
    /// Mutation probability per gene.
    pub pm: f64,
    /// Genes per chromosome.
    pub budget: usize,
    pub elite_fraction: f64,
    pub seed: u64,
    /// Detector runs averaged per fitness evaluation (stochastic detectors).
    pub fitness_samples: usize,
    /// For a budget of one, enumerate all rewirings instead of evolving,
    /// when the graph is within `exhaustive_limit`.
    pub exhaustive_t1: bool,
    pub exhaustive_limit: usize,
    /// Check every chromosome against the base graph each generation.
    pub audit: bool,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            pop_size: 100,
            generations: 500,
            pc: 0.8,
            pm: 0.1,
            budget: 1,
            elite_fraction: 0.1,
            seed: 0,
            fitness_samples: 1,
            exhaustive_t1: true,
            exhaustive_limit: EXHAUSTIVE_LIMIT,
            audit: cfg!(debug_assertions),
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), AttackError> {
        let bad = |m: &str| Err(AttackError::Config(m.into()));
        if self.pop_size < 2 || !self.pop_size.is_multiple_of(2) {
            return bad("population size must be even and at least 2");
        }
        if !(0.0..=1.0).contains(&self.pc) || !(0.0..=1.0).contains(&self.pm) {
            return bad("crossover and mutation rates must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.elite_fraction) {
            return bad("elite fraction must lie in [0, 1]");
        }
        if self.budget == 0 {
            return bad("budget must be at least 1");
        }
        if self.fitness_samples == 0 {
            return bad("fitness samples must be at least 1");
        }
        Ok(())
    }

    pub fn elite_count(&self) -> usize {
        (self.elite_fraction * self.pop_size as f64 + 1e-9).floor() as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chromosome {
    pub plan: RewiringPlan,
    pub fitness: Option<f64>,
    /// Modularity behind `fitness`.
    pub q: Option<f64>,
    /// Detector seeds that produced `q`.
    #[serde(default)]
    pub seeds: Vec<u64>,
}

impl Chromosome {
    pub fn new(plan: RewiringPlan) -> Self {
        Chromosome {
            plan,
            fitness: None,
            q: None,
            seeds: Vec::new(),
        }
    }

    fn set_q(&mut self, q: f64, seeds: Vec<u64>) {
        self.q = Some(q);
        self.fitness = Some(fitness_of_q(q));
        self.seeds = seeds;
    }

    fn fit(&self) -> f64 {
        self.fitness.expect("fitness evaluated")
    }
}

/// `exp(-Q)`.
pub fn fitness_of_q(q: f64) -> f64 {
    (-q).exp()
}

/// Fitness of one plan: `exp(-Q)` of the detected partition of the
/// rewired graph.
pub fn fitness(g: &Graph, plan: &RewiringPlan, detector: &dyn Detector, seed: u64) -> Result<f64, AttackError> {
    Ok(fitness_of_q(attacked_modularity(g, plan, detector, seed)?))
}

fn conflicts(gene: &RewiringGene, others: &[RewiringGene], skip: Option<usize>) -> bool {
    let (d, a) = (gene.deleted_edge(), gene.added_edge());
    others
        .iter()
        .enumerate()
        .any(|(i, o)| Some(i) != skip && (o.deleted_edge() == d || o.added_edge() == a))
}

fn plan_conflict_free(genes: &[RewiringGene]) -> bool {
    let mut del: HashSet<Edge> = HashSet::with_capacity(genes.len());
    let mut add: HashSet<Edge> = HashSet::with_capacity(genes.len());
    genes
        .iter()
        .all(|g| del.insert(g.deleted_edge()) && add.insert(g.added_edge()))
}

/// Nodes with at least one edge and one non-edge.
fn rewirable_nodes(g: &Graph) -> Vec<NodeId> {
    let n = g.node_count();
    g.nodes().filter(|&v| g.degree(v) > 0 && g.degree(v) + 1 < n).collect()
}

fn random_non_neighbor(g: &Graph, v: NodeId, rng: &mut Rng) -> NodeId {
    // rejection sampling; the caller guarantees a non-neighbour exists
    loop {
        let u = rng.gen_range(0..g.node_count());
        if u != v && !g.has_edge(v, u) {
            return u;
        }
    }
}

fn random_gene(g: &Graph, movable: &[NodeId], rng: &mut Rng) -> RewiringGene {
    let v = *movable.choose(rng).unwrap();
    let d = *g.neighbors(v).choose(rng).unwrap();
    let a = random_non_neighbor(g, v, rng);
    RewiringGene::new(v, d, a)
}

/// Draws a gene that does not conflict with `others` (ignoring position
/// `skip`), or `None` after [`DRAW_CAP`] attempts.
fn draw_compatible(
    g: &Graph,
    movable: &[NodeId],
    others: &[RewiringGene],
    skip: Option<usize>,
    rng: &mut Rng,
) -> Option<RewiringGene> {
    (0..DRAW_CAP)
        .map(|_| random_gene(g, movable, rng))
        .find(|gene| !conflicts(gene, others, skip))
}

/// Random initial population of conflict-free plans.
pub fn initialize(g: &Graph, cfg: &GaConfig) -> Result<Vec<Chromosome>, AttackError> {
    cfg.validate()?;
    let movable = rewirable_nodes(g);
    if movable.is_empty() {
        return Err(AttackError::NoFeasibleGene);
    }
    if cfg.budget > gene_count(g) {
        return Err(AttackError::Config(format!(
            "budget {} exceeds the number of feasible rewirings",
            cfg.budget
        )));
    }
    let mut rng = derived_rng(cfg.seed, &[INIT_TAG]);
    let mut pop = Vec::with_capacity(cfg.pop_size);
    for _ in 0..cfg.pop_size {
        let mut genes = Vec::with_capacity(cfg.budget);
        while genes.len() < cfg.budget {
            let gene = draw_compatible(g, &movable, &genes, None, &mut rng).ok_or_else(|| {
                AttackError::Config(format!("could not draw {} conflict-free rewirings", cfg.budget))
            })?;
            genes.push(gene);
        }
        pop.push(Chromosome::new(RewiringPlan::new(genes)));
    }
    Ok(pop)
}

/// Roulette-wheel selection: `pop.len()` draws with replacement, each with
/// probability proportional to fitness. Returns indices into `pop`.
pub fn select(pop: &[Chromosome], rng: &mut Rng) -> Vec<usize> {
    let dist = WeightedIndex::new(pop.iter().map(Chromosome::fit)).expect("positive fitness");
    (0..pop.len()).map(|_| dist.sample(rng)).collect()
}

/// Single-point crossover with probability `pc`. A swap that would create
/// a conflicting child is dropped and the parents pass through. For
/// one-gene plans the swap exchanges the delete peer or the add peer
/// between the two genes instead.
pub fn crossover(
    g: &Graph,
    a: &Chromosome,
    b: &Chromosome,
    pc: f64,
    rng: &mut Rng,
) -> (Chromosome, Chromosome) {
    let pass = || (a.clone(), b.clone());
    if !rng.gen_bool(pc) {
        return pass();
    }
    let (ga, gb) = (a.plan.genes(), b.plan.genes());
    let t = ga.len();
    if t == 1 {
        let (x, y) = (ga[0], gb[0]);
        let (cx, cy) = if rng.gen_bool(0.5) {
            (
                RewiringGene::new(x.target, y.delete_peer, x.add_peer),
                RewiringGene::new(y.target, x.delete_peer, y.add_peer),
            )
        } else {
            (
                RewiringGene::new(x.target, x.delete_peer, y.add_peer),
                RewiringGene::new(y.target, y.delete_peer, x.add_peer),
            )
        };
        let ok = |gene: &RewiringGene| {
            gene.target != gene.delete_peer
                && gene.target != gene.add_peer
                && g.has_edge(gene.target, gene.delete_peer)
                && !g.has_edge(gene.target, gene.add_peer)
        };
        if x == cx || !ok(&cx) || !ok(&cy) {
            return pass();
        }
        return (
            Chromosome::new(RewiringPlan::new(vec![cx])),
            Chromosome::new(RewiringPlan::new(vec![cy])),
        );
    }
    let cut = rng.gen_range(1..t);
    if ga[cut..] == gb[cut..] {
        return pass();
    }
    let ca: Vec<RewiringGene> = ga[..cut].iter().chain(&gb[cut..]).copied().collect();
    let cb: Vec<RewiringGene> = gb[..cut].iter().chain(&ga[cut..]).copied().collect();
    if !plan_conflict_free(&ca) || !plan_conflict_free(&cb) {
        return pass();
    }
    (
        Chromosome::new(RewiringPlan::new(ca)),
        Chromosome::new(RewiringPlan::new(cb)),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MutationKind {
    /// Redraw the delete peer.
    Deletion,
    /// Redraw the add peer.
    Addition,
    /// Redraw the whole gene.
    Reconnection,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutationStats {
    pub deletion: u64,
    pub addition: u64,
    pub reconnection: u64,
    /// Mutations that found no conflict-free redraw and left the gene as is.
    pub unchanged: u64,
}

impl MutationStats {
    pub fn total(&self) -> u64 {
        self.deletion + self.addition + self.reconnection
    }

    fn add(&mut self, o: &MutationStats) {
        self.deletion += o.deletion;
        self.addition += o.addition;
        self.reconnection += o.reconnection;
        self.unchanged += o.unchanged;
    }
}

/// Mutates each gene independently with probability `pm`, using one of the
/// three operators with equal probability. Redraws keep the plan
/// conflict-free; when no alternative exists the gene is kept.
pub fn mutate(g: &Graph, chrom: &mut Chromosome, pm: f64, rng: &mut Rng, stats: &mut MutationStats) {
    let movable = rewirable_nodes(g);
    let mut changed = false;
    for i in 0..chrom.plan.len() {
        if !rng.gen_bool(pm) {
            continue;
        }
        let kind = match rng.gen_range(0..3) {
            0 => MutationKind::Deletion,
            1 => MutationKind::Addition,
            _ => MutationKind::Reconnection,
        };
        let genes = chrom.plan.genes();
        let cur = genes[i];
        let replacement = match kind {
            MutationKind::Deletion => {
                stats.deletion += 1;
                let options: Vec<RewiringGene> = g
                    .neighbors(cur.target)
                    .iter()
                    .filter(|&&d| d != cur.delete_peer)
                    .map(|&d| RewiringGene::new(cur.target, d, cur.add_peer))
                    .filter(|c| !conflicts(c, genes, Some(i)))
                    .collect();
                options.choose(rng).copied()
            }
            MutationKind::Addition => {
                stats.addition += 1;
                let options: Vec<RewiringGene> = g
                    .nodes()
                    .filter(|&a| a != cur.target && a != cur.add_peer && !g.has_edge(cur.target, a))
                    .map(|a| RewiringGene::new(cur.target, cur.delete_peer, a))
                    .filter(|c| !conflicts(c, genes, Some(i)))
                    .collect();
                options.choose(rng).copied()
            }
            MutationKind::Reconnection => {
                stats.reconnection += 1;
                draw_compatible(g, &movable, genes, Some(i), rng).filter(|c| *c != cur)
            }
        };
        match replacement {
            Some(gene) => {
                chrom.plan.genes_mut()[i] = gene;
                changed = true;
            }
            None => stats.unchanged += 1,
        }
    }
    if changed {
        chrom.fitness = None;
        chrom.q = None;
    }
}

/// Sorts `offspring` by decreasing fitness and overwrites its worst
/// `elite` members with the best `elite` parents.
pub fn elitism(parents: &[Chromosome], mut offspring: Vec<Chromosome>, elite: usize) -> Vec<Chromosome> {
    let by_fitness = |a: &Chromosome, b: &Chromosome| b.fit().total_cmp(&a.fit());
    offspring.sort_by(by_fitness);
    let mut best: Vec<&Chromosome> = parents.iter().collect();
    best.sort_by(|a, b| by_fitness(a, b));
    let n = offspring.len();
    let elite = elite.min(n).min(best.len());
    for (slot, parent) in offspring[n - elite..].iter_mut().zip(best) {
        *slot = parent.clone();
    }
    offspring.sort_by(by_fitness);
    offspring
}

/// Modularity and the detector seeds behind it.
type Scored = (f64, Vec<u64>);

/// Evaluates fitness for every chromosome that lacks it. Deterministic
/// detectors share a memo keyed by the canonical plan.
struct Evaluator<'a> {
    g: &'a Graph,
    detector: &'a dyn Detector,
    seed: u64,
    samples: usize,
    /// Canonical plan to modularity.
    memo: Option<HashMap<Vec<RewiringGene>, Scored>>,
    evaluations: u64,
}

impl<'a> Evaluator<'a> {
    fn new(g: &'a Graph, detector: &'a dyn Detector, cfg: &GaConfig) -> Self {
        Evaluator {
            g,
            detector,
            seed: cfg.seed,
            samples: if detector.is_stochastic() { cfg.fitness_samples } else { 1 },
            memo: (!detector.is_stochastic()).then(HashMap::new),
            evaluations: 0,
        }
    }

    fn q_of(&self, plan: &RewiringPlan, generation: u64, index: u64) -> Result<Scored, AttackError> {
        let mut total = 0.0;
        let mut seeds = Vec::with_capacity(self.samples);
        for s in 0..self.samples {
            let seed = derive_seed(self.seed, &[FITNESS_TAG, generation, index, s as u64]);
            total += attacked_modularity(self.g, plan, self.detector, seed)?;
            seeds.push(seed);
        }
        Ok((total / self.samples as f64, seeds))
    }

    fn evaluate(&mut self, pop: &mut [Chromosome], generation: u64) -> Result<(), AttackError> {
        match self.memo.take() {
            Some(mut memo) => {
                let mut todo: Vec<Vec<RewiringGene>> = pop
                    .iter()
                    .filter(|c| c.fitness.is_none())
                    .map(|c| c.plan.canonical())
                    .filter(|k| !memo.contains_key(k))
                    .collect();
                todo.sort();
                todo.dedup();
                let this = &*self;
                let fresh: Vec<(Vec<RewiringGene>, Scored)> = todo
                    .into_par_iter()
                    .map(|k| {
                        let q = this.q_of(&RewiringPlan::new(k.clone()), generation, 0)?;
                        Ok((k, q))
                    })
                    .collect::<Result<_, AttackError>>()?;
                self.evaluations += fresh.len() as u64;
                memo.extend(fresh);
                for c in pop.iter_mut().filter(|c| c.fitness.is_none()) {
                    let (q, seeds) = memo[&c.plan.canonical()].clone();
                    c.set_q(q, seeds);
                }
                self.memo = Some(memo);
            }
            None => {
                let this = &*self;
                let fresh: Vec<(usize, Scored)> = pop
                    .par_iter()
                    .enumerate()
                    .filter(|(_, c)| c.fitness.is_none())
                    .map(|(i, c)| Ok((i, this.q_of(&c.plan, generation, i as u64)?)))
                    .collect::<Result<_, AttackError>>()?;
                self.evaluations += fresh.len() as u64;
                for (i, (q, seeds)) in fresh {
                    pop[i].set_q(q, seeds);
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMethod {
    Evolved,
    Exhaustive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QAttackResult {
    pub best_plan: RewiringPlan,
    pub best_fitness: f64,
    /// Modularity corresponding to `best_fitness`.
    pub best_q: f64,
    /// Detector seeds whose runs on the best adversarial network gave
    /// `best_q`.
    pub best_seeds: Vec<u64>,
    /// Best fitness in the population after each generation (index 0 is the
    /// initial population).
    pub fitness_history: Vec<f64>,
    pub method: SearchMethod,
    pub mutation_stats: MutationStats,
    pub evaluations: u64,
    /// Generations whose population passed the feasibility audit.
    pub audited_generations: usize,
}

fn audit(g: &Graph, pop: &[Chromosome], generation: usize) {
    for (i, c) in pop.iter().enumerate() {
        if let Err(e) = c.plan.check_feasible(g) {
            panic!("generation {generation}, chromosome {i}: {e}");
        }
    }
}

/// Evolves rewiring plans against `detector`: selection, crossover,
/// mutation and elitism for `cfg.generations` rounds. Returns the best
/// plan seen and the per-generation best fitness.
pub fn run_qattack(g: &Graph, detector: &dyn Detector, cfg: &GaConfig) -> Result<QAttackResult, AttackError> {
    cfg.validate()?;
    if cfg.budget == 1 && cfg.exhaustive_t1 && gene_count(g) <= cfg.exhaustive_limit {
        let seed = derive_seed(cfg.seed, &[FITNESS_TAG, 0, 0, 0]);
        let (gene, q) = exhaustive_best_rewiring(g, detector, seed, cfg.exhaustive_limit)?;
        let f = fitness_of_q(q);
        return Ok(QAttackResult {
            best_plan: RewiringPlan::new(vec![gene]),
            best_fitness: f,
            best_q: q,
            best_seeds: vec![seed],
            fitness_history: vec![f],
            method: SearchMethod::Exhaustive,
            mutation_stats: MutationStats::default(),
            evaluations: gene_count(g) as u64,
            audited_generations: 0,
        });
    }

    let mut eval = Evaluator::new(g, detector, cfg);
    let mut pop = initialize(g, cfg)?;
    eval.evaluate(&mut pop, 0)?;
    let mut audited = 0;
    if cfg.audit {
        audit(g, &pop, 0);
        audited += 1;
    }
    let elite = cfg.elite_count();
    let pop_best = |p: &[Chromosome]| -> Chromosome {
        p.iter().max_by(|a, b| a.fit().total_cmp(&b.fit())).unwrap().clone()
    };
    let mut best = pop_best(&pop);
    let mut history = Vec::with_capacity(cfg.generations + 1);
    history.push(best.fit());
    let mut stats = MutationStats::default();

    for generation in 1..=cfg.generations {
        let mut rng = derived_rng(cfg.seed, &[GEN_TAG, generation as u64]);
        let picks = select(&pop, &mut rng);
        let mut offspring = Vec::with_capacity(pop.len());
        for pair in picks.chunks(2) {
            let (a, b) = crossover(g, &pop[pair[0]], &pop[pair[1]], cfg.pc, &mut rng);
            offspring.push(a);
            offspring.push(b);
        }
        let mut gen_stats = MutationStats::default();
        for c in offspring.iter_mut() {
            mutate(g, c, cfg.pm, &mut rng, &mut gen_stats);
        }
        stats.add(&gen_stats);
        eval.evaluate(&mut offspring, generation as u64)?;
        pop = elitism(&pop, offspring, elite);
        if cfg.audit {
            audit(g, &pop, generation);
            audited += 1;
        }
        let top = pop_best(&pop);
        if top.fit() > best.fit() {
            best = top;
        }
        history.push(pop_best(&pop).fit());
    }

    Ok(QAttackResult {
        best_fitness: best.fit(),
        best_q: best.q.expect("evaluated"),
        best_seeds: best.seeds,
        best_plan: best.plan,
        fitness_history: history,
        method: SearchMethod::Evolved,
        mutation_stats: stats,
        evaluations: eval.evaluations,
        audited_generations: audited,
    })
}
