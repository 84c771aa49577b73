//! Prints detector baselines on the bundled karate network.
use qattack::detect::{detect, Algorithm, DetectorSpec};
use qattack::io::load_bundled;
use qattack::metrics::{modularity, nmi};

fn main() {
    let net = load_bundled("karate").expect("karate");
    let truth = net.ground_truth.as_ref().unwrap();
    println!("truth Q {:.4}", modularity(&net.graph, truth).unwrap());
    for a in Algorithm::ALL {
        let seeds = if a.is_stochastic() { 50 } else { 1 };
        let (mut q, mut s, mut h) = (0.0, 0.0, 0.0);
        for seed in 0..seeds {
            let p = detect(&net.graph, &DetectorSpec::new(a).with_seed(seed)).unwrap();
            q += modularity(&net.graph, &p).unwrap();
            s += nmi(&p, truth).unwrap();
            h += p.community_count() as f64;
        }
        let k = seeds as f64;
        println!("{a:8} Q {:.4} NMI {:.4} h {:.2}", q / k, s / k, h / k);
    }
}
