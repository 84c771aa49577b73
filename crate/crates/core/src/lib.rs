pub mod attacks;
pub mod detect;
pub mod ga;
pub mod graph;
pub mod harness;
pub mod io;
pub mod metrics;
pub mod partition;
pub mod plan;
pub mod rng;
