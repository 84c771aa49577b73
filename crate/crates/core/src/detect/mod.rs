//! Community detection behind a uniform interface.
//!
//! Four built-in algorithms are provided: greedy agglomerative modularity
//! maximisation (`fn`), leading-eigenvector spectral bisection (`soa`),
//! Louvain (`louvain`) and asynchronous label propagation (`lpa`). Anything
//! else can take part in attacks and transfer studies by implementing
//! [`Detector`].

mod greedy;
mod louvain;
mod lpa;
mod spectral;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;
pub use crate::partition::Partition;

pub use greedy::detect_fn;
pub use louvain::detect_louvain;
pub use lpa::{detect_lpa, LpaOutcome};
pub use spectral::{detect_spectral, leading_eigenpair, EigenPair};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DetectError {
    #[error("invalid detector spec: {0}")]
    InvalidSpec(String),
    #[error("power iteration did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Fn,
    Soa,
    Louvain,
    Lpa,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Fn, Algorithm::Soa, Algorithm::Louvain, Algorithm::Lpa];

    pub fn is_stochastic(self) -> bool {
        matches!(self, Algorithm::Louvain | Algorithm::Lpa)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Fn => "fn",
            Algorithm::Soa => "soa",
            Algorithm::Louvain => "louvain",
            Algorithm::Lpa => "lpa",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = DetectError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "fn" | "greedy" => Ok(Algorithm::Fn),
            "soa" | "spectral" => Ok(Algorithm::Soa),
            "louvain" | "lou" => Ok(Algorithm::Louvain),
            "lpa" => Ok(Algorithm::Lpa),
            other => Err(DetectError::InvalidSpec(format!("unknown detector `{other}`"))),
        }
    }
}

/// Algorithm-specific knobs. Irrelevant fields are ignored by the other
/// algorithms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorOptions {
    /// Power-iteration convergence tolerance for the spectral method.
    pub spectral_tol: f64,
    pub spectral_max_iter: usize,
    /// Keep bisecting subdivisions while the modularity gain is positive.
    /// When false only each connected component is split once.
    pub spectral_recursive: bool,
    pub lpa_max_sweeps: usize,
}

impl Default for DetectorOptions {
    fn default() -> Self {
        DetectorOptions {
            spectral_tol: 1e-10,
            spectral_max_iter: 10_000,
            spectral_recursive: false,
            lpa_max_sweeps: 100,
        }
    }
}

impl DetectorOptions {
    /// Applies a `key=value` override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), DetectError> {
        let bad = |e: &dyn fmt::Display| DetectError::InvalidSpec(format!("{key}={value}: {e}"));
        match key {
            "tol" | "spectral_tol" => self.spectral_tol = value.parse().map_err(|e| bad(&e))?,
            "max_iter" | "spectral_max_iter" => {
                self.spectral_max_iter = value.parse().map_err(|e| bad(&e))?
            }
            "recursive" | "spectral_recursive" => {
                self.spectral_recursive = value.parse().map_err(|e| bad(&e))?
            }
            "max_sweeps" | "lpa_max_sweeps" => {
                self.lpa_max_sweeps = value.parse().map_err(|e| bad(&e))?
            }
            _ => return Err(DetectError::InvalidSpec(format!("unknown option `{key}`"))),
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<(), DetectError> {
        if !(self.spectral_tol > 0.0) {
            return Err(DetectError::InvalidSpec("spectral_tol must be positive".into()));
        }
        if self.spectral_max_iter == 0 {
            return Err(DetectError::InvalidSpec("spectral_max_iter must be positive".into()));
        }
        if self.lpa_max_sweeps == 0 {
            return Err(DetectError::InvalidSpec("lpa_max_sweeps must be positive".into()));
        }
        Ok(())
    }
}

/// A community detection algorithm. Implementations must be pure functions
/// of `(graph, seed)`.
pub trait Detector: Send + Sync {
    fn name(&self) -> String;

    /// Whether the output depends on the seed.
    fn is_stochastic(&self) -> bool;

    fn detect_seeded(&self, g: &Graph, seed: u64) -> Result<Partition, DetectError>;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorSpec {
    pub algorithm: Algorithm,
    pub seed: u64,
    #[serde(default)]
    pub options: DetectorOptions,
}

impl DetectorSpec {
    pub fn new(algorithm: Algorithm) -> Self {
        DetectorSpec {
            algorithm,
            seed: 0,
            options: DetectorOptions::default(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_options(mut self, options: DetectorOptions) -> Self {
        self.options = options;
        self
    }
}

impl Detector for DetectorSpec {
    fn name(&self) -> String {
        self.algorithm.to_string()
    }

    fn is_stochastic(&self) -> bool {
        self.algorithm.is_stochastic()
    }

    fn detect_seeded(&self, g: &Graph, seed: u64) -> Result<Partition, DetectError> {
        self.options.validate()?;
        Ok(match self.algorithm {
            Algorithm::Fn => detect_fn(g),
            Algorithm::Soa => detect_spectral(g, &self.options)?,
            Algorithm::Louvain => detect_louvain(g, seed),
            Algorithm::Lpa => detect_lpa(g, seed, self.options.lpa_max_sweeps).partition,
        })
    }
}

/// Runs the detector described by `spec` with its own seed.
pub fn detect(g: &Graph, spec: &DetectorSpec) -> Result<Partition, DetectError> {
    spec.detect_seeded(g, spec.seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.as_str().parse::<Algorithm>().unwrap(), a);
        }
        assert_eq!("LOU".parse::<Algorithm>().unwrap(), Algorithm::Louvain);
        assert!("infomap".parse::<Algorithm>().is_err());
    }

    #[test]
    fn options_parse_and_validate() {
        let mut o = DetectorOptions::default();
        o.set("tol", "1e-8").unwrap();
        assert_eq!(o.spectral_tol, 1e-8);
        o.set("max_sweeps", "7").unwrap();
        assert_eq!(o.lpa_max_sweeps, 7);
        assert!(o.set("tol", "-1").is_err());
        assert!(o.set("bogus", "1").is_err());
        assert!(o.set("max_iter", "x").is_err());
    }

    #[test]
    fn every_detector_splits_disjoint_triangles() {
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        let expected = Partition::from_labels(&[0, 0, 0, 1, 1, 1]);
        for a in Algorithm::ALL {
            for seed in 0..5 {
                let p = detect(&g, &DetectorSpec::new(a).with_seed(seed)).unwrap();
                assert_eq!(p, expected, "{a} seed {seed}");
            }
        }
    }

    #[test]
    fn detectors_tolerate_isolated_nodes() {
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (0, 2)]).unwrap();
        for a in Algorithm::ALL {
            let p = detect(&g, &DetectorSpec::new(a)).unwrap();
            assert_eq!(p.node_count(), 5);
            assert!(!p.same_community(3, 4), "{a}");
            assert!(!p.same_community(0, 3), "{a}");
        }
        let empty = Graph::empty(3);
        for a in Algorithm::ALL {
            let p = detect(&empty, &DetectorSpec::new(a)).unwrap();
            assert_eq!(p.community_count(), 3, "{a}");
        }
    }
}
