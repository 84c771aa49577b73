//! Q-Attack against Louvain on karate with four rewirings.
use std::time::Instant;

use qattack::detect::{detect, Algorithm, Detector, DetectorSpec};
use qattack::ga::{run_qattack, GaConfig};
use qattack::io::load_bundled;
use qattack::metrics::{modularity, nmi};

fn main() {
    let net = load_bundled("karate").unwrap();
    let truth = net.ground_truth.as_ref().unwrap();
    let det = DetectorSpec::new(Algorithm::Louvain);
    let runs: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    for seed in 0..runs {
        let t = Instant::now();
        let samples: usize = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(1);
        let cfg = GaConfig { budget: 4, pc: 0.7, pm: 0.1, seed, fitness_samples: samples, generations: std::env::args().nth(3).and_then(|s| s.parse().ok()).unwrap_or(500), ..Default::default() };
        let r = run_qattack(&net.graph, &det, &cfg).unwrap();
        let adv = net.graph.apply_plan(&r.best_plan).unwrap();
        let (mut q, mut s, mut h) = (0.0, 0.0, 0.0);
        for k in 0..10 {
            let p = detect(&adv, &DetectorSpec::new(Algorithm::Louvain).with_seed(1000 + k)).unwrap();
            q += modularity(&adv, &p).unwrap() / 10.0;
            s += nmi(&p, truth).unwrap() / 10.0;
            h += p.community_count() as f64 / 10.0;
        }
        let p = det.detect_seeded(&adv, r.best_seeds[0]).unwrap();
        let (q1, n1) = (modularity(&adv, &p).unwrap(), nmi(&p, truth).unwrap());
        println!("seed {seed}: fitness-q {:.4} observed Q {q1:.4} NMI {n1:.4} h {} | eval Q {q:.4} NMI {s:.4} h {h:.1} evals {} {:.1}s", r.best_q, p.community_count(), r.evaluations, t.elapsed().as_secs_f64());
    }
}
