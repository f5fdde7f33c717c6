//! Cluster structures in finite semimetric spaces.
//!
//! Given pairwise distances and a scale `r`, the crate counts medium edges
//! and anticliques, builds a greedy cluster decomposition, finds optimal
//! cluster structures of order `k` on small inputs, and evaluates lower
//! bounds on the optimal measure. All arithmetic on distances and densities
//! is exact.

pub mod bounds;
pub mod clustering;
pub mod error;
pub mod generators;
mod graph;
pub mod rational;
pub mod report;
pub mod space;
pub mod stats;
pub mod verify;

#[cfg(test)]
mod fixtures;

pub use bounds::{build_certificate, BoundCertificate, BoundInputs, CertificateOptions, PsiOutcome};
pub use clustering::{
    exact_structure, greedy_decomposition, greedy_structure, validate_structure, ClusterStructure, ExactLimits,
    GreedyDecomposition,
};
pub use error::{Error, Result};
pub use rational::Rational;
pub use space::{EdgeClass, FiniteSemimetricSpace, ScaleParams};
pub use stats::{observed_parameters, ObservedParams};
pub use verify::{run_suite, CheckResult, PropId, SuiteConfig, VerificationReport};
