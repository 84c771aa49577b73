//! Experiment driver: budget sweeps, strategy-by-detector reduction
//! tables, transferability matrices and GA parameter tuning.
//!
//! Heuristic cells average over `heuristic_trials` adversarial networks and
//! Q-Attack cells over `ga_trials` runs. Every adversarial network is
//! scored with a fixed set of `eval_runs` detector seeds for stochastic
//! detectors, the same seeds used for the unattacked baseline.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attacks::{cda_attack, dba_attack, random_attack, AttackError, HeuristicConfig};
use crate::detect::{DetectError, Detector, DetectorSpec};
use crate::ga::{run_qattack, GaConfig};
use crate::graph::Graph;
use crate::io::{Dataset, LabeledGene, LabeledNetwork, PlanSidecar};
use crate::metrics::{modularity, nmi, relative_reduction, MetricError};
use crate::plan::RewiringPlan;
use crate::rng::derive_seed;

const EVAL_TAG: u64 = 0xE7A1;
const TRIAL_TAG: u64 = 0x7121;

pub const TUNE_PC: [f64; 4] = [0.5, 0.6, 0.7, 0.8];
pub const TUNE_PM: [f64; 4] = [0.04, 0.06, 0.08, 0.1];

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment: {0}")]
    Config(String),
    #[error(transparent)]
    Attack(#[from] AttackError),
    #[error(transparent)]
    Detect(#[from] DetectError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("thread pool: {0}")]
    Pool(String),
}

/// Number of rewirings, either absolute or as a percentage of the edge count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Budget {
    Absolute(usize),
    Percent(f64),
}

impl Budget {
    /// Percentages round to the nearest integer, with a minimum of one.
    pub fn resolve(self, edge_count: usize) -> usize {
        match self {
            Budget::Absolute(t) => t,
            Budget::Percent(p) => ((p / 100.0 * edge_count as f64).round() as usize).max(1),
        }
    }

    pub fn describe(self, edge_count: usize) -> String {
        match self {
            Budget::Absolute(t) => format!("T={t}"),
            Budget::Percent(p) => format!(
                "{p}% of {edge_count} edges -> T={} (nearest integer, minimum 1)",
                self.resolve(edge_count)
            ),
        }
    }
}

impl FromStr for Budget {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || HarnessError::Config(format!("budget `{s}` is neither N nor P%"));
        match s.strip_suffix('%') {
            Some(p) => {
                let p: f64 = p.trim().parse().map_err(|_| bad())?;
                if !(p > 0.0 && p <= 100.0) {
                    return Err(bad());
                }
                Ok(Budget::Percent(p))
            }
            None => s.parse().map(Budget::Absolute).map_err(|_| bad()),
        }
    }
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Budget::Absolute(t) => write!(f, "{t}"),
            Budget::Percent(p) => write!(f, "{p}%"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Ra,
    Cda,
    Dba,
    QAttack,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::Ra, Strategy::Cda, Strategy::Dba, Strategy::QAttack];
    pub const HEURISTICS: [Strategy; 3] = [Strategy::Ra, Strategy::Cda, Strategy::Dba];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Ra => "ra",
            Strategy::Cda => "cda",
            Strategy::Dba => "dba",
            Strategy::QAttack => "qattack",
        }
    }

    fn tag(self) -> u64 {
        self as u64 + 1
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "").as_str() {
            "ra" | "random" => Ok(Strategy::Ra),
            "cda" => Ok(Strategy::Cda),
            "dba" => Ok(Strategy::Dba),
            "qattack" | "ga" => Ok(Strategy::QAttack),
            _ => Err(HarnessError::Config(format!("unknown strategy `{s}`"))),
        }
    }
}

/// Settings shared by every experiment on one network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub budget: Budget,
    /// Target-set size for the heuristics; `None` uses the protocol default.
    pub k: Option<usize>,
    pub heuristic_trials: usize,
    pub ga_trials: usize,
    /// Detector seeds per evaluation of a stochastic detector.
    pub eval_runs: usize,
    pub ga: GaConfig,
    pub seed: u64,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            budget: Budget::Percent(5.0),
            k: None,
            heuristic_trials: 50,
            ga_trials: 10,
            eval_runs: 10,
            ga: GaConfig::default(),
            seed: 0,
        }
    }
}

impl ExperimentSpec {
    /// Protocol budget and target fraction for a benchmark network.
    pub fn for_dataset(ds: Dataset) -> Self {
        ExperimentSpec {
            budget: Budget::Percent(ds.budget_percent()),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.heuristic_trials == 0 || self.ga_trials == 0 || self.eval_runs == 0 {
            return Err(HarnessError::Config("trial and evaluation counts must be at least 1".into()));
        }
        Ok(self.ga.validate()?)
    }

    /// Target-set size: explicit `k`, else the dataset's target fraction
    /// (15% for karate, 10% otherwise) rounded down, at least one.
    pub fn resolve_k(&self, net: &LabeledNetwork) -> usize {
        self.k.unwrap_or_else(|| {
            let pct = net.name.parse::<Dataset>().map_or(10.0, Dataset::target_percent);
            ((pct / 100.0 * net.graph.node_count() as f64).floor() as usize).max(1)
        })
    }

    fn trials(&self, s: Strategy) -> usize {
        if s == Strategy::QAttack {
            self.ga_trials
        } else {
            self.heuristic_trials
        }
    }
}

/// Seeds used to score a network with `detector`: one for deterministic
/// detectors, `runs` otherwise.
pub fn eval_seeds(master: u64, detector: &dyn Detector, runs: usize) -> Vec<u64> {
    let runs = if detector.is_stochastic() { runs } else { 1 };
    (0..runs as u64).map(|j| derive_seed(master, &[EVAL_TAG, j])).collect()
}

/// Arithmetic mean, exact when all values agree.
fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = xs.collect();
    match xs.first() {
        None => f64::NAN,
        Some(&x) if xs.iter().all(|&y| y == x) => x,
        Some(_) => xs.iter().sum::<f64>() / xs.len() as f64,
    }
}

/// Mean detected modularity and mean NMI against `truth` over `seeds`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub q: f64,
    pub nmi: Option<f64>,
    pub communities: f64,
}

pub fn score(
    g: &Graph,
    truth: Option<&crate::partition::Partition>,
    detector: &dyn Detector,
    seeds: &[u64],
) -> Result<Scores, HarnessError> {
    let (mut q, mut s, mut h) = (0.0, 0.0, 0.0);
    for &seed in seeds {
        let p = detector.detect_seeded(g, seed)?;
        q += modularity(g, &p)?;
        if let Some(t) = truth {
            s += nmi(&p, t)?;
        }
        h += p.community_count() as f64;
    }
    let k = seeds.len() as f64;
    Ok(Scores {
        q: q / k,
        nmi: truth.map(|_| s / k),
        communities: h / k,
    })
}

/// One adversarial network and how it was produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackRun {
    pub plan: RewiringPlan,
    pub seed: u64,
    pub shortfall: bool,
    pub fitness_history: Option<Vec<f64>>,
    /// Modularity the GA observed for its best plan, and the detector seeds
    /// behind it.
    pub attack_q: Option<f64>,
    pub attack_seeds: Vec<u64>,
    pub wall_time_s: f64,
}

/// Runs one attack with the given strategy against `detector`. Fails with
/// [`AttackError::NoFeasibleGene`] when not a single rewiring was possible.
pub fn run_strategy(
    net: &LabeledNetwork,
    strategy: Strategy,
    detector: &DetectorSpec,
    budget: usize,
    k: usize,
    ga: &GaConfig,
    seed: u64,
) -> Result<AttackRun, HarnessError> {
    let start = Instant::now();
    let g = &net.graph;
    let hcfg = HeuristicConfig { k, budget, seed };
    let mut ga_result = None;
    let (plan, shortfall) = match strategy {
        Strategy::Ra => {
            let o = random_attack(g, &hcfg)?;
            (o.plan, o.shortfall)
        }
        Strategy::Cda => {
            let o = cda_attack(g, &hcfg, detector)?;
            (o.plan, o.shortfall)
        }
        Strategy::Dba => {
            let o = dba_attack(g, &hcfg, detector)?;
            (o.plan, o.shortfall)
        }
        Strategy::QAttack => {
            if budget == 0 {
                (RewiringPlan::default(), false)
            } else {
                let cfg = GaConfig {
                    budget,
                    seed,
                    ..ga.clone()
                };
                let r = run_qattack(g, detector, &cfg)?;
                let plan = r.best_plan.clone();
                ga_result = Some(r);
                (plan, false)
            }
        }
    };
    if budget > 0 && plan.is_empty() {
        return Err(AttackError::NoFeasibleGene.into());
    }
    Ok(AttackRun {
        plan,
        seed,
        shortfall,
        attack_q: ga_result.as_ref().map(|r| r.best_q),
        attack_seeds: ga_result.as_ref().map(|r| r.best_seeds.clone()).unwrap_or_default(),
        fitness_history: ga_result.map(|r| r.fitness_history),
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Before/after metrics of one attack, the unit of output of `attack`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub network: String,
    pub strategy: Strategy,
    pub attack_detector: String,
    pub eval_detector: String,
    pub budget: usize,
    pub budget_rule: String,
    pub k: usize,
    pub seed: u64,
    pub eval_seeds: Vec<u64>,
    pub plan: Vec<LabeledGene>,
    pub shortfall: bool,
    pub q_before: f64,
    pub q_after: f64,
    pub nmi_before: Option<f64>,
    pub nmi_after: Option<f64>,
    pub q_reduction: f64,
    pub nmi_reduction: Option<f64>,
    pub communities_before: f64,
    pub communities_after: f64,
    pub wall_time_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attack_q: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub attack_seeds: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fitness_history: Option<Vec<f64>>,
}

fn reduction_pair(before: &Scores, after: &Scores) -> Result<(f64, Option<f64>), HarnessError> {
    let q = relative_reduction(before.q, after.q)?;
    let n = match (before.nmi, after.nmi) {
        (Some(b), Some(a)) => Some(relative_reduction(b, a)?),
        _ => None,
    };
    Ok((q, n))
}

/// Attacks `net` once and scores the result with `eval_detector`.
pub fn attack_report(
    net: &LabeledNetwork,
    strategy: Strategy,
    attack_detector: &DetectorSpec,
    eval_detector: &DetectorSpec,
    spec: &ExperimentSpec,
) -> Result<AttackReport, HarnessError> {
    spec.validate()?;
    let g = &net.graph;
    let budget = spec.budget.resolve(g.edge_count());
    let k = spec.resolve_k(net);
    let run = run_strategy(net, strategy, attack_detector, budget, k, &spec.ga, spec.seed)?;
    let seeds = eval_seeds(spec.seed, eval_detector, spec.eval_runs);
    let truth = net.ground_truth.as_ref();
    let before = score(g, truth, eval_detector, &seeds)?;
    let adv = g.apply_plan(&run.plan).map_err(AttackError::from)?;
    let after = score(&adv, truth, eval_detector, &seeds)?;
    let (q_reduction, nmi_reduction) = reduction_pair(&before, &after)?;
    let sidecar = PlanSidecar::new(net, &run.plan, strategy.as_str(), &attack_detector.name(), spec.seed);
    Ok(AttackReport {
        network: net.name.clone(),
        strategy,
        attack_detector: attack_detector.name(),
        eval_detector: eval_detector.name(),
        budget,
        budget_rule: spec.budget.describe(g.edge_count()),
        k,
        seed: spec.seed,
        eval_seeds: seeds,
        plan: sidecar.genes,
        shortfall: run.shortfall,
        q_before: before.q,
        q_after: after.q,
        nmi_before: before.nmi,
        nmi_after: after.nmi,
        q_reduction,
        nmi_reduction,
        communities_before: before.communities,
        communities_after: after.communities,
        wall_time_s: run.wall_time_s,
        attack_q: run.attack_q,
        attack_seeds: run.attack_seeds,
        fitness_history: run.fitness_history,
    })
}

/// Mean metrics of one (strategy, detector, budget) cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub strategy: Strategy,
    pub detector: String,
    pub budget: usize,
    pub trials: usize,
    pub q_before: f64,
    pub q_after: f64,
    pub nmi_before: Option<f64>,
    pub nmi_after: Option<f64>,
    pub q_reduction: f64,
    pub nmi_reduction: Option<f64>,
}

/// A cell together with the adversarial networks behind it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellRuns {
    pub cell: Cell,
    pub runs: Vec<AttackRun>,
}

fn trial_seed(master: u64, strategy: Strategy, detector: &str, budget: usize, trial: usize) -> u64 {
    let dtag = detector.bytes().fold(0u64, |h, b| h.wrapping_mul(131).wrapping_add(b as u64));
    derive_seed(master, &[TRIAL_TAG, strategy.tag(), dtag, budget as u64, trial as u64])
}

/// Runs all trials of one cell and averages their scores.
pub fn run_cell(
    net: &LabeledNetwork,
    strategy: Strategy,
    detector: &DetectorSpec,
    budget: usize,
    spec: &ExperimentSpec,
) -> Result<CellRuns, HarnessError> {
    let k = spec.resolve_k(net);
    let trials = spec.trials(strategy);
    let name = detector.name();
    let runs: Vec<AttackRun> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let seed = trial_seed(spec.seed, strategy, &name, budget, t);
            run_strategy(net, strategy, detector, budget, k, &spec.ga, seed)
        })
        .collect::<Result<_, _>>()?;
    let cell = summarize(net, strategy, detector, budget, &runs, spec)?;
    Ok(CellRuns { cell, runs })
}

/// Scores a set of adversarial networks with `detector` against the
/// unattacked baseline.
pub fn summarize(
    net: &LabeledNetwork,
    strategy: Strategy,
    detector: &DetectorSpec,
    budget: usize,
    runs: &[AttackRun],
    spec: &ExperimentSpec,
) -> Result<Cell, HarnessError> {
    let g = &net.graph;
    let truth = net.ground_truth.as_ref();
    let seeds = eval_seeds(spec.seed, detector, spec.eval_runs);
    let before = score(g, truth, detector, &seeds)?;
    let afters: Vec<Scores> = runs
        .par_iter()
        .map(|r| {
            let adv = g.apply_plan(&r.plan).map_err(AttackError::from)?;
            score(&adv, truth, detector, &seeds)
        })
        .collect::<Result<_, _>>()?;
    let after = Scores {
        q: mean(afters.iter().map(|s| s.q)),
        nmi: before.nmi.map(|_| mean(afters.iter().map(|s| s.nmi.unwrap_or(0.0)))),
        communities: mean(afters.iter().map(|s| s.communities)),
    };
    let (q_reduction, nmi_reduction) = reduction_pair(&before, &after)?;
    Ok(Cell {
        strategy,
        detector: detector.name(),
        budget,
        trials: runs.len(),
        q_before: before.q,
        q_after: after.q,
        nmi_before: before.nmi,
        nmi_after: after.nmi,
        q_reduction,
        nmi_reduction,
    })
}

/// Mean Q and NMI for each budget in `budgets`, per strategy and detector.
pub fn sweep_budget(
    net: &LabeledNetwork,
    strategies: &[Strategy],
    detectors: &[DetectorSpec],
    budgets: &[usize],
    spec: &ExperimentSpec,
) -> Result<Vec<Cell>, HarnessError> {
    spec.validate()?;
    let mut out = Vec::new();
    for d in detectors {
        for &s in strategies {
            for &t in budgets {
                out.push(run_cell(net, s, d, t, spec)?.cell);
            }
        }
    }
    Ok(out)
}

/// Reduction table at the spec's budget: one cell per strategy and
/// detector. Q-Attack runs are kept for transferability.
pub fn table2(
    net: &LabeledNetwork,
    strategies: &[Strategy],
    detectors: &[DetectorSpec],
    spec: &ExperimentSpec,
) -> Result<Vec<CellRuns>, HarnessError> {
    spec.validate()?;
    let budget = spec.budget.resolve(net.graph.edge_count());
    let mut out = Vec::new();
    for d in detectors {
        for &s in strategies {
            out.push(run_cell(net, s, d, budget, spec)?);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferRow {
    pub attacked: String,
    /// Mean relative Q reduction per evaluating detector, in `columns` order.
    pub reductions: Vec<f64>,
    pub average: f64,
    /// Average over columns other than the attacked detector.
    pub average_without_self: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix {
    pub columns: Vec<String>,
    pub rows: Vec<TransferRow>,
}

/// Scores Q-Attack networks built against each detector in `attacked`
/// with every detector in `evaluators`. `runs[i]` holds the networks built
/// against `attacked[i]`.
pub fn transfer_matrix(
    net: &LabeledNetwork,
    attacked: &[DetectorSpec],
    runs: &[Vec<AttackRun>],
    evaluators: &[DetectorSpec],
    spec: &ExperimentSpec,
) -> Result<TransferMatrix, HarnessError> {
    if attacked.len() != runs.len() {
        return Err(HarnessError::Config("one run set per attacked detector required".into()));
    }
    let budget = runs.first().and_then(|r| r.first()).map_or(0, |r| r.plan.len());
    let mut rows = Vec::new();
    for (a, rs) in attacked.iter().zip(runs) {
        let reductions: Vec<f64> = evaluators
            .iter()
            .map(|e| summarize(net, Strategy::QAttack, e, budget, rs, spec).map(|c| c.q_reduction))
            .collect::<Result<_, _>>()?;
        let average = reductions.iter().sum::<f64>() / reductions.len().max(1) as f64;
        let others: Vec<f64> = evaluators
            .iter()
            .zip(&reductions)
            .filter(|(e, _)| e.name() != a.name())
            .map(|(_, r)| *r)
            .collect();
        let average_without_self = (others.len() < reductions.len() && !others.is_empty())
            .then(|| others.iter().sum::<f64>() / others.len() as f64);
        rows.push(TransferRow {
            attacked: a.name(),
            reductions,
            average,
            average_without_self,
        });
    }
    Ok(TransferMatrix {
        columns: evaluators.iter().map(|e| e.name()).collect(),
        rows,
    })
}

/// Generates Q-Attack networks against each detector, then scores them
/// with every detector.
pub fn transferability(
    net: &LabeledNetwork,
    detectors: &[DetectorSpec],
    spec: &ExperimentSpec,
) -> Result<TransferMatrix, HarnessError> {
    spec.validate()?;
    let budget = spec.budget.resolve(net.graph.edge_count());
    let runs: Vec<Vec<AttackRun>> = detectors
        .iter()
        .map(|d| run_cell(net, Strategy::QAttack, d, budget, spec).map(|c| c.runs))
        .collect::<Result<_, _>>()?;
    transfer_matrix(net, detectors, &runs, detectors, spec)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuneCell {
    pub pc: f64,
    pub pm: f64,
    pub fitness_history: Vec<f64>,
    pub terminal_fitness: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub detector: String,
    pub budget: usize,
    pub cells: Vec<TuneCell>,
    pub best_pc: f64,
    pub best_pm: f64,
}

/// Runs the GA for every (pc, pm) pair and picks the pair with the highest
/// terminal best fitness (first in grid order on ties).
pub fn tune_ga(
    net: &LabeledNetwork,
    detector: &DetectorSpec,
    pcs: &[f64],
    pms: &[f64],
    spec: &ExperimentSpec,
) -> Result<TuneResult, HarnessError> {
    spec.validate()?;
    let budget = spec.budget.resolve(net.graph.edge_count());
    let grid: Vec<(f64, f64)> = pcs.iter().flat_map(|&pc| pms.iter().map(move |&pm| (pc, pm))).collect();
    let cells: Vec<TuneCell> = grid
        .par_iter()
        .map(|&(pc, pm)| {
            let cfg = GaConfig {
                pc,
                pm,
                budget,
                seed: spec.seed,
                exhaustive_t1: false,
                ..spec.ga.clone()
            };
            let r = run_qattack(&net.graph, detector, &cfg)?;
            Ok(TuneCell {
                pc,
                pm,
                terminal_fitness: *r.fitness_history.last().unwrap(),
                fitness_history: r.fitness_history,
            })
        })
        .collect::<Result<_, HarnessError>>()?;
    let best = cells
        .iter()
        .fold(None::<&TuneCell>, |b, c| match b {
            Some(b) if b.terminal_fitness >= c.terminal_fitness => Some(b),
            _ => Some(c),
        })
        .ok_or_else(|| HarnessError::Config("empty tuning grid".into()))?;
    Ok(TuneResult {
        detector: detector.name(),
        budget,
        best_pc: best.pc,
        best_pm: best.pm,
        cells,
    })
}

/// Runs `f` on a rayon pool with `jobs` threads (0 means rayon's default).
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T, HarnessError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))?;
    Ok(pool.install(f))
}

// ---------------------------------------------------------------------------
// output

pub fn fmt6(x: f64) -> String {
    format!("{x:.6}")
}

fn opt6(x: Option<f64>) -> String {
    x.map(fmt6).unwrap_or_default()
}

/// Writes `# key: value` header lines followed by CSV of `cells`.
pub fn write_cells_csv<W: Write>(mut w: W, header: &[String], cells: &[Cell]) -> Result<(), HarnessError> {
    for h in header {
        writeln!(w, "# {h}")?;
    }
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "strategy",
        "detector",
        "T",
        "trials",
        "q_before",
        "q_after",
        "nmi_before",
        "nmi_after",
        "q_reduction",
        "nmi_reduction",
    ])?;
    for c in cells {
        out.write_record([
            c.strategy.to_string(),
            c.detector.clone(),
            c.budget.to_string(),
            c.trials.to_string(),
            fmt6(c.q_before),
            fmt6(c.q_after),
            opt6(c.nmi_before),
            opt6(c.nmi_after),
            fmt6(c.q_reduction),
            opt6(c.nmi_reduction),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_transfer_csv<W: Write>(mut w: W, header: &[String], m: &TransferMatrix) -> Result<(), HarnessError> {
    for h in header {
        writeln!(w, "# {h}")?;
    }
    let mut out = csv::Writer::from_writer(w);
    let mut head = vec!["attacked".to_string()];
    head.extend(m.columns.iter().cloned());
    head.push("average".into());
    head.push("average_without_self".into());
    out.write_record(&head)?;
    for r in &m.rows {
        let mut rec = vec![r.attacked.clone()];
        rec.extend(r.reductions.iter().map(|&x| fmt6(x)));
        rec.push(fmt6(r.average));
        rec.push(opt6(r.average_without_self));
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

/// One row per generation, one column per (pc, pm) pair.
pub fn write_tune_csv<W: Write>(mut w: W, header: &[String], t: &TuneResult) -> Result<(), HarnessError> {
    for h in header {
        writeln!(w, "# {h}")?;
    }
    writeln!(w, "# best: pc={} pm={}", t.best_pc, t.best_pm)?;
    let mut out = csv::Writer::from_writer(w);
    let mut head = vec!["generation".to_string()];
    head.extend(t.cells.iter().map(|c| format!("pc{}_pm{}", c.pc, c.pm)));
    out.write_record(&head)?;
    let len = t.cells.iter().map(|c| c.fitness_history.len()).max().unwrap_or(0);
    for gen in 0..len {
        let mut rec = vec![gen.to_string()];
        rec.extend(t.cells.iter().map(|c| c.fitness_history.get(gen).map(|&x| fmt6(x)).unwrap_or_default()));
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detect::Algorithm;
    use crate::io::load_bundled;

    #[test]
    fn percent_budgets_round_to_nearest() {
        let five = Budget::Percent(5.0);
        let two = Budget::Percent(2.0);
        assert_eq!(five.resolve(78), 4);
        assert_eq!(five.resolve(159), 8);
        assert_eq!(two.resolve(613), 12);
        assert_eq!(two.resolve(441), 9);
        assert_eq!(Budget::Percent(1.0).resolve(10), 1);
    }

    #[test]
    fn budget_parsing() {
        assert_eq!("5%".parse::<Budget>().unwrap(), Budget::Percent(5.0));
        assert_eq!("7".parse::<Budget>().unwrap(), Budget::Absolute(7));
        assert!("x".parse::<Budget>().is_err());
        assert!("0%".parse::<Budget>().is_err());
    }

    #[test]
    fn protocol_target_sizes() {
        let net = load_bundled("karate").unwrap();
        assert_eq!(ExperimentSpec::default().resolve_k(&net), 5);
    }

    #[test]
    fn zero_budget_cell_has_zero_reduction() {
        let net = load_bundled("karate").unwrap();
        let spec = ExperimentSpec {
            heuristic_trials: 3,
            ..Default::default()
        };
        let det = DetectorSpec::new(Algorithm::Fn);
        let c = run_cell(&net, Strategy::Ra, &det, 0, &spec).unwrap().cell;
        assert_eq!(c.q_reduction, 0.0);
        assert_eq!(c.nmi_reduction, Some(0.0));
    }

    #[test]
    fn cell_reductions_recompute_from_means() {
        let net = load_bundled("karate").unwrap();
        let spec = ExperimentSpec {
            heuristic_trials: 5,
            ..Default::default()
        };
        let det = DetectorSpec::new(Algorithm::Lpa);
        let c = run_cell(&net, Strategy::Cda, &det, 4, &spec).unwrap().cell;
        assert_eq!(c.q_reduction, relative_reduction(c.q_before, c.q_after).unwrap());
        assert_eq!(
            c.nmi_reduction.unwrap(),
            relative_reduction(c.nmi_before.unwrap(), c.nmi_after.unwrap()).unwrap()
        );
    }

    #[test]
    fn csv_has_six_decimals() {
        let cell = Cell {
            strategy: Strategy::Ra,
            detector: "fn".into(),
            budget: 4,
            trials: 1,
            q_before: 0.4,
            q_after: 0.3,
            nmi_before: None,
            nmi_after: None,
            q_reduction: 0.25,
            nmi_reduction: None,
        };
        let mut buf = Vec::new();
        write_cells_csv(&mut buf, &["budget: T=4".into()], &[cell]).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("# budget: T=4\n"));
        assert!(s.contains("ra,fn,4,1,0.400000,0.300000,,,0.250000,"));
    }
}
