use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use qattack::attacks::AttackError;
use qattack::detect::{Algorithm, DetectError, DetectorOptions, DetectorSpec};
use qattack::ga::GaConfig;
use qattack::harness::{
    attack_report, sweep_budget, table2, transfer_matrix, tune_ga, with_jobs, write_cells_csv, write_transfer_csv,
    write_tune_csv, Budget, ExperimentSpec, HarnessError, Strategy, TUNE_PC, TUNE_PM,
};
use qattack::io::{export_adversarial, load_network, Dataset, IoError, LabeledNetwork, PlanSidecar};

const EXIT_CONFIG: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "qattack", version, about = "Rewiring attacks against community detection")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Args, Debug)]
struct Common {
    /// Dataset name (karate, dolphins, football, polbooks) or a .gml / edge-list path.
    #[arg(long, global = true, default_value = "karate")]
    network: String,
    /// Detector(s), comma separated: fn, soa, louvain, lpa.
    #[arg(long, global = true, value_delimiter = ',', default_value = "fn")]
    detector: Vec<Algorithm>,
    /// Detector option override, e.g. `recursive=true`.
    #[arg(long = "detector-opt", global = true, value_name = "KEY=VALUE")]
    detector_opt: Vec<String>,
    /// Strategy or strategies, comma separated: ra, cda, dba, qattack.
    #[arg(long, global = true, value_delimiter = ',')]
    strategy: Vec<Strategy>,
    /// Rewiring budget: absolute `N` or `P%` of the edge count.
    #[arg(long, global = true)]
    budget: Option<Budget>,
    /// Target-set size for the heuristics.
    #[arg(long, global = true)]
    k: Option<usize>,
    /// Adversarial networks per heuristic cell.
    #[arg(long, global = true, default_value_t = 50)]
    trials: usize,
    /// Q-Attack runs per cell.
    #[arg(long, global = true, default_value_t = 10)]
    ga_trials: usize,
    /// Detector seeds per evaluation of a stochastic detector.
    #[arg(long, global = true, default_value_t = 10)]
    eval_runs: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[arg(long, global = true, default_value_t = 100)]
    pop: usize,
    #[arg(long, global = true, default_value_t = 500)]
    gens: usize,
    #[arg(long, global = true, default_value_t = 0.8)]
    pc: f64,
    #[arg(long, global = true, default_value_t = 0.1)]
    pm: f64,
    /// Detector runs averaged per fitness evaluation (stochastic detectors).
    #[arg(long, global = true, default_value_t = 1)]
    fitness_samples: usize,
}

#[derive(Subcommand, Debug)]
enum Verb {
    /// One attack, reported as JSON.
    Attack {
        /// Detector used for scoring (defaults to the attacked one).
        #[arg(long)]
        eval_detector: Option<Algorithm>,
        /// Also write `<STEM>.txt` and `<STEM>.plan.json`.
        #[arg(long, value_name = "STEM")]
        export: Option<PathBuf>,
    },
    /// Mean Q and NMI per budget (CSV).
    Sweep {
        /// Budgets as `A..B` (inclusive) or a comma list.
        #[arg(long, default_value = "1..8")]
        budgets: String,
    },
    /// Relative reductions per strategy and detector (CSV).
    Table2,
    /// Q-Attack transferability matrix across detectors (CSV).
    Transfer,
    /// Crossover/mutation rate grid search (CSV).
    Tune,
}

fn detector_options(opts: &[String]) -> Result<DetectorOptions> {
    let mut o = DetectorOptions::default();
    for kv in opts {
        let Some((k, v)) = kv.split_once('=') else {
            bail!(HarnessError::Config(format!("detector option `{kv}` is not KEY=VALUE")));
        };
        o.set(k.trim(), v.trim())?;
    }
    Ok(o)
}

fn detectors(c: &Common) -> Result<Vec<DetectorSpec>> {
    let opts = detector_options(&c.detector_opt)?;
    Ok(c.detector
        .iter()
        .map(|&a| DetectorSpec::new(a).with_options(opts.clone()))
        .collect())
}

fn experiment(c: &Common, net: &LabeledNetwork) -> Result<ExperimentSpec> {
    let ds = net.name.parse::<Dataset>().ok();
    let budget = c
        .budget
        .unwrap_or_else(|| ds.map_or(Budget::Percent(5.0), |d| Budget::Percent(d.budget_percent())));
    let spec = ExperimentSpec {
        budget,
        k: c.k,
        heuristic_trials: c.trials,
        ga_trials: c.ga_trials,
        eval_runs: c.eval_runs,
        ga: GaConfig {
            pop_size: c.pop,
            generations: c.gens,
            pc: c.pc,
            pm: c.pm,
            fitness_samples: c.fitness_samples,
            seed: c.seed,
            ..Default::default()
        },
        seed: c.seed,
    };
    spec.validate()?;
    Ok(spec)
}

fn parse_budgets(s: &str) -> Result<Vec<usize>> {
    let bad = || HarnessError::Config(format!("budgets `{s}` must be A..B or a comma list"));
    if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            bail!(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| bad().into()))
        .collect()
}

fn output(out: &Option<PathBuf>) -> Result<Box<dyn Write + Send>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout()),
    })
}

fn header(net: &LabeledNetwork, spec: &ExperimentSpec) -> Vec<String> {
    let g = &net.graph;
    vec![
        format!("network: {} (n={}, m={})", net.name, g.node_count(), g.edge_count()),
        format!("budget: {}", spec.budget.describe(g.edge_count())),
        format!("k: {}", spec.resolve_k(net)),
        format!(
            "trials: heuristic={} qattack={} eval_runs={}",
            spec.heuristic_trials, spec.ga_trials, spec.eval_runs
        ),
        format!(
            "ga: pop={} gens={} pc={} pm={} fitness_samples={}",
            spec.ga.pop_size, spec.ga.generations, spec.ga.pc, spec.ga.pm, spec.ga.fitness_samples
        ),
        format!("seed: {}", spec.seed),
    ]
}

/// Returns true when the attack could not spend its whole budget.
fn run(cli: Cli) -> Result<bool> {
    let c = &cli.common;
    let net = load_network(&c.network)?;
    let spec = experiment(c, &net)?;
    let dets = detectors(c)?;
    let strategies = if c.strategy.is_empty() {
        match cli.verb {
            Verb::Attack { .. } => vec![Strategy::QAttack],
            _ => Strategy::ALL.to_vec(),
        }
    } else {
        c.strategy.clone()
    };
    let hdr = header(&net, &spec);
    let mut w = output(&c.out)?;
    let shortfall = with_jobs(c.jobs, || -> Result<bool> {
        match &cli.verb {
            Verb::Attack { eval_detector, export } => {
                let [s] = strategies[..] else {
                    bail!(HarnessError::Config("attack takes exactly one --strategy".into()));
                };
                let [ref d] = dets[..] else {
                    bail!(HarnessError::Config("attack takes exactly one --detector".into()));
                };
                let e = eval_detector.map_or_else(|| d.clone(), |a| DetectorSpec::new(a).with_options(d.options.clone()));
                let report = attack_report(&net, s, d, &e, &spec)?;
                if let Some(stem) = export {
                    let sidecar = PlanSidecar {
                        network: net.name.clone(),
                        strategy: s.to_string(),
                        detector: d.algorithm.to_string(),
                        seed: spec.seed,
                        genes: report.plan.clone(),
                    };
                    let plan = sidecar.plan(&net)?;
                    let adv = net.graph.apply_plan(&plan).map_err(AttackError::from)?;
                    export_adversarial(stem, &net, &adv, &sidecar)?;
                }
                serde_json::to_writer_pretty(&mut w, &report)?;
                writeln!(w)?;
                Ok(report.shortfall)
            }
            Verb::Sweep { budgets } => {
                let budgets = parse_budgets(budgets)?;
                let cells = sweep_budget(&net, &strategies, &dets, &budgets, &spec)?;
                let mut h = hdr.clone();
                h[1] = "budget: absolute T per row".into();
                write_cells_csv(&mut w, &h, &cells)?;
                Ok(false)
            }
            Verb::Table2 => {
                let cells: Vec<_> = table2(&net, &strategies, &dets, &spec)?.into_iter().map(|c| c.cell).collect();
                write_cells_csv(&mut w, &hdr, &cells)?;
                Ok(false)
            }
            Verb::Transfer => {
                let cells = table2(&net, &[Strategy::QAttack], &dets, &spec)?;
                let runs: Vec<_> = cells.into_iter().map(|c| c.runs).collect();
                let m = transfer_matrix(&net, &dets, &runs, &dets, &spec)?;
                write_transfer_csv(&mut w, &hdr, &m)?;
                Ok(false)
            }
            Verb::Tune => {
                for d in &dets {
                    let t = tune_ga(&net, d, &TUNE_PC, &TUNE_PM, &spec)?;
                    let mut h = hdr.clone();
                    h.push(format!("detector: {}", t.detector));
                    write_tune_csv(&mut w, &h, &t)?;
                }
                Ok(false)
            }
        }
    })??;
    w.flush()?;
    Ok(shortfall)
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(a) = cause.downcast_ref::<AttackError>() {
            return match a {
                AttackError::NoFeasibleGene => EXIT_INFEASIBLE,
                AttackError::Config(_) | AttackError::TooLarge { .. } => EXIT_CONFIG,
                _ => continue,
            };
        }
        if let Some(h) = cause.downcast_ref::<HarnessError>() {
            match h {
                HarnessError::Config(_) => return EXIT_CONFIG,
                HarnessError::Attack(AttackError::NoFeasibleGene) => return EXIT_INFEASIBLE,
                HarnessError::Attack(AttackError::Config(_) | AttackError::TooLarge { .. }) => return EXIT_CONFIG,
                _ => continue,
            }
        }
        if cause.is::<IoError>() {
            return EXIT_CONFIG;
        }
        if let Some(DetectError::InvalidSpec(_)) = cause.downcast_ref::<DetectError>() {
            return EXIT_CONFIG;
        }
    }
    1
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("qattack: attack budget could not be filled");
            ExitCode::from(EXIT_INFEASIBLE)
        }
        Err(e) => {
            eprintln!("qattack: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
