mod common;

use std::collections::HashSet;

use common::random_graph;
use proptest::prelude::*;
use qattack::attacks::{cda_attack, dba_attack, dba_targets, initial_partition, random_attack, HeuristicConfig};
use qattack::detect::{Algorithm, Detector, DetectorSpec};
use qattack::ga::{crossover, elitism, initialize, mutate, select, Chromosome, GaConfig, MutationStats};
use qattack::graph::Graph;
use qattack::harness::Budget;
use qattack::io::{format_edgelist, format_gml, parse_edgelist, parse_gml, LabeledNetwork};
use qattack::metrics::{modularity, nmi};
use qattack::partition::Partition;
use qattack::rng::rng_from_seed;

fn graph_strategy() -> impl Strategy<Value = Graph> {
    (4usize..24, 0.1f64..0.6, any::<u64>()).prop_map(|(n, p, s)| random_graph(n, p, s))
}

fn rewirable() -> impl Strategy<Value = Graph> {
    graph_strategy().prop_filter("needs an edge and a non-edge", |g| {
        let n = g.node_count();
        g.edge_count() > 0 && g.edge_count() < n * (n - 1) / 2
    })
}

fn labels_strategy(n: usize) -> impl Strategy<Value = Vec<usize>> {
    proptest::collection::vec(0usize..4, n)
}

fn normalized(g: &Graph) -> Vec<(usize, usize)> {
    g.edges().map(|e| (e.lo(), e.hi())).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rewiring_preserves_size_and_target_degree(g in rewirable(), seed in any::<u64>(), t in 0usize..6) {
        let cfg = HeuristicConfig { k: g.node_count().min(4), budget: t, seed };
        let plan = random_attack(&g, &cfg).unwrap().plan;
        prop_assert!(plan.check_feasible(&g).is_ok());
        let adv = g.apply_plan(&plan).unwrap();
        prop_assert_eq!(adv.node_count(), g.node_count());
        prop_assert_eq!(adv.edge_count(), g.edge_count());
        // Each gene moves one edge end from its delete peer to its add peer;
        // a target's degree only changes when it is also another gene's peer.
        for v in g.nodes() {
            let gained = plan.genes().iter().filter(|x| x.add_peer == v).count();
            let lost = plan.genes().iter().filter(|x| x.delete_peer == v).count();
            prop_assert_eq!(adv.degree(v) + lost, g.degree(v) + gained);
        }
        for gene in plan.genes() {
            if plan.genes().iter().all(|x| x.add_peer != gene.target && x.delete_peer != gene.target) {
                prop_assert_eq!(adv.degree(gene.target), g.degree(gene.target));
            }
        }
        let back = adv.apply_plan(&plan.reversed()).unwrap();
        prop_assert_eq!(back, g);
    }

    #[test]
    fn neighbourhoods_partition_the_node_set(g in graph_strategy()) {
        for v in g.nodes() {
            let mut all: Vec<usize> = g.neighbors(v).to_vec();
            all.extend(g.non_neighbors(v).unwrap());
            all.push(v);
            all.sort();
            prop_assert_eq!(all, (0..g.node_count()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn modularity_ignores_label_names(g in rewirable(), seed in any::<u64>()) {
        let n = g.node_count();
        let labels: Vec<usize> = (0..n).map(|v| (v as u64 ^ seed) as usize % 3).collect();
        let renamed: Vec<usize> = labels.iter().map(|l| 10 - l).collect();
        let a = modularity(&g, &Partition::from_labels(&labels)).unwrap();
        let b = modularity(&g, &Partition::from_labels(&renamed)).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
        prop_assert!((-1.0..1.0).contains(&a));
    }

    #[test]
    fn nmi_symmetric_bounded_and_rename_invariant(x in labels_strategy(12), y in labels_strategy(12)) {
        let (px, py) = (Partition::from_labels(&x), Partition::from_labels(&y));
        let v = nmi(&px, &py).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert!((v - nmi(&py, &px).unwrap()).abs() < 1e-12);
        let renamed: Vec<usize> = x.iter().map(|l| 7 * l + 5).collect();
        prop_assert!((v - nmi(&Partition::from_labels(&renamed), &py).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn guided_attacks_respect_the_initial_partition(g in rewirable(), seed in any::<u64>(), dba in any::<bool>()) {
        let det = DetectorSpec::new(Algorithm::Fn);
        let cfg = HeuristicConfig { k: g.node_count().min(5), budget: 4, seed };
        let out = if dba { dba_attack(&g, &cfg, &det) } else { cda_attack(&g, &cfg, &det) }.unwrap();
        let p = initial_partition(&g, &det, seed).unwrap();
        prop_assert_eq!(out.partition.as_ref(), Some(&p));
        prop_assert!(out.plan.check_feasible(&g).is_ok());
        let targets: HashSet<usize> = out.targets.iter().copied().collect();
        for gene in out.plan.genes() {
            prop_assert!(targets.contains(&gene.target));
            prop_assert!(p.same_community(gene.target, gene.delete_peer));
            prop_assert!(!p.same_community(gene.target, gene.add_peer));
        }
        if dba {
            prop_assert_eq!(out.targets, dba_targets(&g, &p, cfg.k).unwrap());
        }
    }

    #[test]
    fn random_attack_targets_are_distinct(g in rewirable(), seed in any::<u64>()) {
        let k = g.node_count() / 2;
        let out = random_attack(&g, &HeuristicConfig { k, budget: 3, seed }).unwrap();
        let set: HashSet<usize> = out.targets.iter().copied().collect();
        prop_assert_eq!(set.len(), k);
        prop_assert!(out.plan.genes().iter().all(|gene| set.contains(&gene.target)));
    }

    #[test]
    fn ga_operators_keep_plans_feasible(g in rewirable(), seed in any::<u64>(), t in 1usize..4) {
        let cfg = GaConfig { pop_size: 10, budget: t, seed, ..Default::default() };
        let Ok(mut pop) = initialize(&g, &cfg) else { return Ok(()) };
        let mut rng = rng_from_seed(seed);
        for (i, c) in pop.iter_mut().enumerate() {
            prop_assert!(c.plan.check_feasible(&g).is_ok());
            c.fitness = Some(0.5 + i as f64 / 100.0);
        }
        let picks = select(&pop, &mut rng);
        prop_assert_eq!(picks.len(), pop.len());
        prop_assert!(picks.iter().all(|&i| i < pop.len()));
        let mut stats = MutationStats::default();
        let mut kids = Vec::new();
        for pair in picks.chunks(2) {
            let (mut a, mut b) = crossover(&g, &pop[pair[0]], &pop[pair[1]], 0.9, &mut rng);
            mutate(&g, &mut a, 0.5, &mut rng, &mut stats);
            mutate(&g, &mut b, 0.5, &mut rng, &mut stats);
            for c in [&a, &b] {
                prop_assert_eq!(c.plan.len(), t);
                prop_assert!(c.plan.check_feasible(&g).is_ok());
            }
            kids.push(a);
            kids.push(b);
        }
        for k in kids.iter_mut().filter(|k| k.fitness.is_none()) {
            k.fitness = Some(0.1);
        }
        let best_parent = pop.iter().map(|c| c.fitness.unwrap()).fold(0.0, f64::max);
        let next = elitism(&pop, kids, 1);
        prop_assert!(next.iter().any(|c| c.fitness == Some(best_parent)));
    }

    #[test]
    fn edgelist_round_trip(g in graph_strategy()) {
        let back = parse_edgelist(&format_edgelist(&g, None)).unwrap();
        prop_assert_eq!(&back.graph, &g);
        prop_assert_eq!(back.labels, (0..g.node_count()).map(|v| v.to_string()).collect::<Vec<_>>());
    }

    #[test]
    fn gml_round_trip(g in graph_strategy(), truth in any::<bool>()) {
        let n = g.node_count();
        let net = LabeledNetwork {
            name: "t".into(),
            labels: (0..n).map(|v| format!("n{v}")).collect(),
            ground_truth: truth.then(|| Partition::from_labels(&(0..n).map(|v| v % 3).collect::<Vec<_>>())),
            graph: g,
        };
        let back = parse_gml(&format_gml(&net)).unwrap();
        prop_assert_eq!(normalized(&back.graph), normalized(&net.graph));
        prop_assert_eq!(back.graph.node_count(), n);
        prop_assert_eq!(back.labels, net.labels);
        prop_assert_eq!(back.ground_truth, net.ground_truth);
    }

    #[test]
    fn percentage_budgets_round_to_nearest(p in 0.1f64..100.0, m in 1usize..5_000) {
        let t = Budget::Percent(p).resolve(m);
        prop_assert!(t >= 1);
        let exact = p / 100.0 * m as f64;
        prop_assert!(t as f64 - exact <= 0.5 + 1e-9 || t == 1);
        prop_assert!(exact - t as f64 <= 0.5 + 1e-9);
    }

    #[test]
    fn detectors_are_deterministic_under_a_seed(g in graph_strategy(), seed in any::<u64>()) {
        for a in Algorithm::ALL {
            let det = DetectorSpec::new(a);
            let p = det.detect_seeded(&g, seed).unwrap();
            prop_assert_eq!(p.node_count(), g.node_count());
            prop_assert_eq!(&p, &det.detect_seeded(&g, seed).unwrap());
            let h = p.community_count();
            let mut used = vec![false; h];
            for &l in p.labels() {
                prop_assert!(l < h);
                used[l] = true;
            }
            prop_assert!(used.into_iter().all(|u| u));
        }
    }
}

#[test]
fn chromosome_fitness_is_cleared_by_mutation() {
    let g = random_graph(12, 0.3, 4);
    let cfg = GaConfig { pop_size: 4, budget: 2, seed: 1, ..Default::default() };
    let mut c: Chromosome = initialize(&g, &cfg).unwrap().remove(0);
    c.fitness = Some(0.7);
    let mut stats = MutationStats::default();
    mutate(&g, &mut c, 1.0, &mut rng_from_seed(2), &mut stats);
    assert_eq!(stats.total(), 2);
    if stats.unchanged < 2 {
        assert!(c.fitness.is_none());
    }
}
