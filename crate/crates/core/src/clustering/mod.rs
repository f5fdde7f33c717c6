//! Greedy cluster decomposition, cluster structures and exact search.
//!
//! A cluster structure of order `k` at scale `r` is a family of `k`
//! disjoint point sets, each of diameter at most `2r`, with every two
//! non-empty members at set distance at least `r`. Its measure is the total
//! number of points it covers.

mod clique;
mod exact;
mod greedy;
mod validate;

use serde::{Deserialize, Serialize};

pub use clique::max_cluster;
pub use exact::{exact_structure, ExactLimits, ExactSearch};
pub use greedy::{greedy_decomposition, greedy_structure, GreedyDecomposition, Part};
pub use validate::{validate_structure, ValidationReport, Violation};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterStructure {
    /// Exactly `order` clusters; some may be empty.
    pub clusters: Vec<Vec<usize>>,
    pub measure: usize,
    pub order: usize,
}

impl ClusterStructure {
    /// Pads `clusters` with empty sets up to `order`.
    pub fn new(mut clusters: Vec<Vec<usize>>, order: usize) -> Self {
        for c in clusters.iter_mut() {
            c.sort_unstable();
        }
        clusters.resize(order.max(clusters.len()), Vec::new());
        let measure = clusters.iter().map(Vec::len).sum();
        Self { clusters, measure, order }
    }
}
