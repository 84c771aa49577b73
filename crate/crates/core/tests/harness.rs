use qattack::detect::{Algorithm, DetectorSpec};
use qattack::ga::GaConfig;
use qattack::harness::{
    attack_report, run_cell, sweep_budget, table2, transfer_matrix, tune_ga, write_cells_csv, Budget, ExperimentSpec,
    Strategy, TUNE_PC, TUNE_PM,
};
use qattack::io::{export_adversarial, load_bundled, load_edgelist, PlanSidecar};
use qattack::metrics::relative_reduction;

fn quick() -> ExperimentSpec {
    ExperimentSpec {
        budget: Budget::Percent(5.0),
        heuristic_trials: 20,
        ga_trials: 3,
        eval_runs: 5,
        ga: GaConfig {
            pop_size: 40,
            generations: 60,
            ..Default::default()
        },
        ..Default::default()
    }
}

#[test]
fn sweep_rows_and_zero_budget() {
    let net = load_bundled("karate").unwrap();
    let fn_ = DetectorSpec::new(Algorithm::Fn);
    let budgets: Vec<usize> = (0..=8).collect();
    let cells = sweep_budget(&net, &[Strategy::Ra], &[fn_], &budgets, &quick()).unwrap();
    assert_eq!(cells.len(), 9);
    assert_eq!(cells[0].q_reduction, 0.0);
    assert_eq!(cells[0].nmi_reduction, Some(0.0));
    assert!(cells[8].q_after < cells[1].q_after);
    let mut buf = Vec::new();
    write_cells_csv(&mut buf, &["budget: absolute".into()], &cells).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1 + 1 + 9);
}

#[test]
fn qattack_dominates_heuristics_at_every_budget() {
    let net = load_bundled("karate").unwrap();
    let fn_ = DetectorSpec::new(Algorithm::Fn);
    let spec = quick();
    for t in 1..=8 {
        let q = run_cell(&net, Strategy::QAttack, &fn_, t, &spec).unwrap().cell;
        for s in Strategy::HEURISTICS {
            let h = run_cell(&net, s, &fn_, t, &spec).unwrap().cell;
            assert!(q.q_reduction > h.q_reduction, "T={t}: qattack {} vs {s} {}", q.q_reduction, h.q_reduction);
        }
    }
}

#[test]
fn table_cells_recompute_from_raw_means() {
    let net = load_bundled("karate").unwrap();
    let dets = [DetectorSpec::new(Algorithm::Fn), DetectorSpec::new(Algorithm::Lpa)];
    let cells = table2(&net, &Strategy::ALL, &dets, &quick()).unwrap();
    assert_eq!(cells.len(), 8);
    for c in cells.iter().map(|c| &c.cell) {
        assert_eq!(c.budget, 4);
        assert_eq!(c.q_reduction, relative_reduction(c.q_before, c.q_after).unwrap());
        assert_eq!(
            c.nmi_reduction.unwrap(),
            relative_reduction(c.nmi_before.unwrap(), c.nmi_after.unwrap()).unwrap()
        );
    }
}

#[test]
fn transfer_diagonal_matches_table() {
    let net = load_bundled("karate").unwrap();
    let dets = [DetectorSpec::new(Algorithm::Fn), DetectorSpec::new(Algorithm::Soa)];
    let spec = quick();
    let cells = table2(&net, &[Strategy::QAttack], &dets, &spec).unwrap();
    let runs: Vec<_> = cells.iter().map(|c| c.runs.clone()).collect();
    let m = transfer_matrix(&net, &dets, &runs, &dets, &spec).unwrap();
    for (i, c) in cells.iter().enumerate() {
        assert_eq!(m.rows[i].reductions[i], c.cell.q_reduction);
        let other = m.rows[i].reductions[1 - i];
        assert_eq!(m.rows[i].average_without_self, Some(other));
        assert!((m.rows[i].average - (other + c.cell.q_reduction) / 2.0).abs() < 1e-15);
    }
}

#[test]
fn tuning_grid_covers_sixteen_pairs() {
    let net = load_bundled("karate").unwrap();
    let spec = ExperimentSpec {
        ga: GaConfig {
            pop_size: 20,
            generations: 15,
            ..Default::default()
        },
        ..quick()
    };
    let t = tune_ga(&net, &DetectorSpec::new(Algorithm::Fn), &TUNE_PC, &TUNE_PM, &spec).unwrap();
    assert_eq!(t.cells.len(), 16);
    for c in &t.cells {
        assert_eq!(c.fitness_history.len(), 16);
        assert!(c.fitness_history.windows(2).all(|w| w[1] >= w[0]));
    }
    let best = t.cells.iter().map(|c| c.terminal_fitness).fold(0.0, f64::max);
    let winner = t.cells.iter().find(|c| c.pc == t.best_pc && c.pm == t.best_pm).unwrap();
    assert_eq!(winner.terminal_fitness, best);
}

#[test]
fn reports_reproduce_from_seeds() {
    let net = load_bundled("karate").unwrap();
    let lou = DetectorSpec::new(Algorithm::Louvain);
    let spec = ExperimentSpec { seed: 9, ..quick() };
    for s in [Strategy::Cda, Strategy::QAttack] {
        let mut a = attack_report(&net, s, &lou, &lou, &spec).unwrap();
        let mut b = attack_report(&net, s, &lou, &lou, &spec).unwrap();
        a.wall_time_s = 0.0;
        b.wall_time_s = 0.0;
        assert_eq!(a, b);
        assert_eq!(a.eval_seeds.len(), 5);
        assert_eq!(a.q_reduction, relative_reduction(a.q_before, a.q_after).unwrap());
    }
}

#[test]
fn exported_network_round_trips() {
    let net = load_bundled("karate").unwrap();
    let fn_ = DetectorSpec::new(Algorithm::Fn);
    let r = attack_report(&net, Strategy::Dba, &fn_, &fn_, &quick()).unwrap();
    let sidecar = PlanSidecar {
        network: net.name.clone(),
        strategy: "dba".into(),
        detector: "fn".into(),
        seed: 0,
        genes: r.plan.clone(),
    };
    let plan = sidecar.plan(&net).unwrap();
    let adv = net.graph.apply_plan(&plan).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (edges, json) = export_adversarial(dir.path().join("adv"), &net, &adv, &sidecar).unwrap();
    let back = load_edgelist(&edges).unwrap();
    assert_eq!(back.graph, adv);
    assert_eq!(back.labels, net.labels);
    assert_eq!(PlanSidecar::read(&json).unwrap(), sidecar);
}
