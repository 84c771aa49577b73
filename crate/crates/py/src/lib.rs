//! Python bindings. Graphs cross the boundary as `(n, [(u, v), ...])`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use qattack::detect::{Algorithm, Detector, DetectorSpec};
use qattack::ga::GaConfig;
use qattack::graph::Graph;
use qattack::harness::{attack_report, Budget, ExperimentSpec, Strategy};
use qattack::io::load_network;
use qattack::metrics;
use qattack::partition::Partition;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn graph(n: usize, edges: Vec<(usize, usize)>) -> PyResult<Graph> {
    Graph::from_edges(n, edges).map_err(err)
}

/// Node labels, edges (dense ids) and ground-truth labels of a dataset or file.
#[pyfunction]
fn load(name: &str) -> PyResult<(Vec<String>, Vec<(usize, usize)>, Option<Vec<usize>>)> {
    let net = load_network(name).map_err(err)?;
    let truth = net.ground_truth.as_ref().map(|p| p.labels().to_vec());
    Ok((net.labels, net.graph.edges().map(|e| (e.lo(), e.hi())).collect(), truth))
}

#[pyfunction]
fn modularity(n: usize, edges: Vec<(usize, usize)>, labels: Vec<usize>) -> PyResult<f64> {
    let g = graph(n, edges)?;
    metrics::modularity(&g, &Partition::from_labels(&labels)).map_err(err)
}

#[pyfunction]
fn nmi(x: Vec<usize>, y: Vec<usize>) -> PyResult<f64> {
    metrics::nmi(&Partition::from_labels(&x), &Partition::from_labels(&y)).map_err(err)
}

/// Community label per node.
#[pyfunction]
#[pyo3(signature = (n, edges, algorithm, seed=0))]
fn detect(n: usize, edges: Vec<(usize, usize)>, algorithm: &str, seed: u64) -> PyResult<Vec<usize>> {
    let g = graph(n, edges)?;
    let a: Algorithm = algorithm.parse().map_err(err)?;
    let p = DetectorSpec::new(a).detect_seeded(&g, seed).map_err(err)?;
    Ok(p.labels().to_vec())
}

/// Runs one attack and returns the report as a JSON string.
#[pyfunction]
#[pyo3(signature = (network, strategy="qattack", detector="fn", budget="5%", seed=0, generations=500, pop_size=100))]
fn attack(
    network: &str,
    strategy: &str,
    detector: &str,
    budget: &str,
    seed: u64,
    generations: usize,
    pop_size: usize,
) -> PyResult<String> {
    let net = load_network(network).map_err(err)?;
    let s: Strategy = strategy.parse().map_err(err)?;
    let d = DetectorSpec::new(detector.parse().map_err(err)?);
    let spec = ExperimentSpec {
        budget: budget.parse::<Budget>().map_err(err)?,
        seed,
        ga: GaConfig {
            generations,
            pop_size,
            seed,
            ..Default::default()
        },
        ..Default::default()
    };
    let report = attack_report(&net, s, &d, &d, &spec).map_err(err)?;
    serde_json::to_string(&report).map_err(err)
}

#[pymodule]
fn qattack_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(load, m)?)?;
    m.add_function(wrap_pyfunction!(modularity, m)?)?;
    m.add_function(wrap_pyfunction!(nmi, m)?)?;
    m.add_function(wrap_pyfunction!(detect, m)?)?;
    m.add_function(wrap_pyfunction!(attack, m)?)?;
    Ok(())
}
