use serde::{Deserialize, Serialize};

use super::ClusterStructure;
use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::space::{FiniteSemimetricSpace, ScaleParams};

/// Hard ceiling imposed by the bitmask representation.
const MASK_BITS: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactLimits {
    /// Largest space the search accepts.
    pub max_points: usize,
    /// Search nodes before giving up with the incumbent.
    pub node_budget: u64,
}

impl Default for ExactLimits {
    fn default() -> Self {
        Self { max_points: 14, node_budget: 200_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactSearch {
    pub structure: ClusterStructure,
    /// False when the node budget ran out; `structure` is then only the best
    /// one seen.
    pub optimal: bool,
    pub nodes: u64,
}

/// A maximum-measure cluster structure of order `params.k`.
///
/// Points are assigned in index order to an open cluster, to a newly opened
/// cluster, or to nobody. Clusters are therefore labelled by their smallest
/// member, and a branch is dropped as soon as its measure plus the number of
/// unassigned points cannot beat the incumbent.
pub fn exact_structure(
    space: &FiniteSemimetricSpace,
    params: &ScaleParams,
    limits: &ExactLimits,
) -> Result<ExactSearch> {
    let n = space.len();
    let limit = limits.max_points.min(MASK_BITS);
    if n > limit {
        return Err(Error::ExactLimit { n, limit });
    }
    let r = &params.r;
    let two_r = r * rational::from_int(2);
    let mask = |pred: &dyn Fn(&Rational) -> bool| -> Vec<u128> {
        (0..n)
            .map(|p| (0..n).filter(|&q| q != p && pred(space.dist(p, q))).fold(0u128, |m, q| m | 1 << q))
            .collect()
    };
    let mut search = Search {
        n,
        slots: params.k.min(n),
        compatible: mask(&|d| *d <= two_r),
        separated: mask(&|d| d >= r),
        clusters: Vec::new(),
        occupied: 0,
        best: None,
        nodes: 0,
        budget: limits.node_budget,
        exhausted: false,
    };
    search.run(0, 0);
    let clusters = search
        .best
        .map(|(_, masks)| masks.into_iter().map(|m| (0..n).filter(|&p| m >> p & 1 == 1).collect()).collect())
        .unwrap_or_default();
    Ok(ExactSearch {
        structure: ClusterStructure::new(clusters, params.k),
        optimal: !search.exhausted,
        nodes: search.nodes,
    })
}

struct Search {
    n: usize,
    slots: usize,
    compatible: Vec<u128>,
    separated: Vec<u128>,
    clusters: Vec<u128>,
    occupied: u128,
    best: Option<(usize, Vec<u128>)>,
    nodes: u64,
    budget: u64,
    exhausted: bool,
}

impl Search {
    fn run(&mut self, point: usize, measure: usize) {
        if self.exhausted {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
            return;
        }
        if let Some((best, _)) = &self.best {
            if measure + (self.n - point) <= *best {
                return;
            }
        }
        if point == self.n {
            self.best = Some((measure, self.clusters.clone()));
            return;
        }
        let bit = 1u128 << point;
        let compatible = self.compatible[point];
        let separated = self.separated[point];
        for c in 0..self.clusters.len() {
            let members = self.clusters[c];
            let others = self.occupied & !members;
            if members & !compatible == 0 && others & !separated == 0 {
                self.clusters[c] |= bit;
                self.occupied |= bit;
                self.run(point + 1, measure + 1);
                self.clusters[c] &= !bit;
                self.occupied &= !bit;
            }
        }
        if self.clusters.len() < self.slots && self.occupied & !separated == 0 {
            self.clusters.push(bit);
            self.occupied |= bit;
            self.run(point + 1, measure + 1);
            self.clusters.pop();
            self.occupied &= !bit;
        }
        self.run(point + 1, measure);
    }
}
