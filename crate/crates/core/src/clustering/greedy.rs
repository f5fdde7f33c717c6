use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use super::clique::max_clique;
use super::ClusterStructure;
use crate::graph::ThresholdGraph;
use crate::rational::{self, Rational};
use crate::space::{EdgeClass, FiniteSemimetricSpace, ScaleParams};
use crate::stats::medium_edge_count;

/// One step of the greedy decomposition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Part {
    /// Strict `r`-neighbourhood of the kernel inside the residual set.
    pub z: Vec<usize>,
    /// Kernel: a maximum `2r`-cluster of the residual set.
    pub x: Vec<usize>,
    /// `z` minus the kernel and the matched points.
    pub y: Vec<usize>,
    /// Points covered by `matching`.
    pub u: Vec<usize>,
    /// Inclusion-maximal matching of long edges inside `z \ x`.
    pub matching: Vec<(usize, usize)>,
    /// Medium edges inside `z`.
    pub medium: u64,
    /// Long edges inside `z`.
    pub long: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GreedyDecomposition {
    pub n: usize,
    pub k: usize,
    #[serde(with = "rational::serde_pq")]
    pub r: Rational,
    pub parts: Vec<Part>,
    /// Part sizes `|z|`, descending.
    pub w: Vec<usize>,
    /// Indices of the `k` largest parts, ties to the earlier part; ascending.
    pub i0: Vec<usize>,
    /// Parts with `(k+1)|x| <= |z|`.
    pub i1: Vec<usize>,
    /// Parts with `|z| >= sqrt(delta) * n`, `delta` the observed medium density.
    pub i2: Vec<usize>,
    #[serde(with = "rational::serde_pq")]
    pub delta: Rational,
    /// Pairs inside a common part at distance above `r`.
    pub lambda_count: u64,
}

/// Repeatedly extracts a maximum `2r`-cluster from the residual set together
/// with its strict `r`-neighbourhood, until nothing is left.
pub fn greedy_decomposition(space: &FiniteSemimetricSpace, params: &ScaleParams) -> GreedyDecomposition {
    let n = space.len();
    let r = &params.r;
    let two_r = r * rational::from_int(2);
    let within_2r = ThresholdGraph::new(space, |d| *d <= two_r);
    let near = ThresholdGraph::new(space, |d| d < r);

    let mut residual = FixedBitSet::with_capacity(n);
    residual.insert_range(..);
    let mut parts = Vec::new();
    while residual.count_ones(..) > 0 {
        let x = max_clique(&within_2r, &residual);
        let mut z_set = FixedBitSet::with_capacity(n);
        for &p in &x {
            z_set.insert(p);
            z_set.union_with(near.row(p));
        }
        z_set.intersect_with(&residual);
        residual.difference_with(&z_set);
        parts.push(finish_part(space, r, z_set.ones().collect(), x));
    }

    let delta = if n == 0 {
        Rational::default()
    } else {
        rational::from_int(2 * medium_edge_count(space, r)) / rational::from_int((n * n) as u64)
    };
    let n_sq = rational::from_int((n * n) as u64);
    let i2 = (0..parts.len())
        .filter(|&i| {
            let z = parts[i].z.len() as u64;
            rational::from_int(z * z) >= &delta * &n_sq
        })
        .collect();
    let i1 = (0..parts.len())
        .filter(|&i| (params.k + 1) * parts[i].x.len() <= parts[i].z.len())
        .collect();
    let mut w: Vec<usize> = parts.iter().map(|p| p.z.len()).collect();
    w.sort_unstable_by(|a, b| b.cmp(a));
    let i0 = largest_parts(&parts, params.k);
    let lambda_count = parts.iter().map(|p| p.medium + p.long).sum();

    GreedyDecomposition { n, k: params.k, r: r.clone(), parts, w, i0, i1, i2, delta, lambda_count }
}

fn finish_part(space: &FiniteSemimetricSpace, r: &Rational, z: Vec<usize>, x: Vec<usize>) -> Part {
    let rest: Vec<usize> = z.iter().copied().filter(|p| x.binary_search(p).is_err()).collect();
    let mut matched = vec![false; rest.len()];
    let mut matching = Vec::new();
    for a in 0..rest.len() {
        if matched[a] {
            continue;
        }
        for b in (a + 1)..rest.len() {
            if !matched[b] && EdgeClass::of(space.dist(rest[a], rest[b]), r) == EdgeClass::Long {
                matched[a] = true;
                matched[b] = true;
                matching.push((rest[a], rest[b]));
                break;
            }
        }
    }
    let mut u = Vec::new();
    let mut y = Vec::new();
    for (i, &p) in rest.iter().enumerate() {
        if matched[i] {
            u.push(p);
        } else {
            y.push(p);
        }
    }
    let (mut medium, mut long) = (0, 0);
    for (a, &i) in z.iter().enumerate() {
        for &j in &z[a + 1..] {
            match EdgeClass::of(space.dist(i, j), r) {
                EdgeClass::Medium => medium += 1,
                EdgeClass::Long => long += 1,
                EdgeClass::Short => {}
            }
        }
    }
    Part { z, x, y, u, matching, medium, long }
}

fn largest_parts(parts: &[Part], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..parts.len()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(parts[i].z.len()), i));
    order.truncate(k);
    order.sort_unstable();
    order
}

/// Kernels of the `k` largest parts, padded with empty clusters.
pub fn greedy_structure(decomp: &GreedyDecomposition, k: usize) -> ClusterStructure {
    let clusters = largest_parts(&decomp.parts, k).into_iter().map(|i| decomp.parts[i].x.clone()).collect();
    ClusterStructure::new(clusters, k)
}

impl GreedyDecomposition {
    /// Kernels of the first `k` parts in construction order.
    pub fn first_k_structure(&self, k: usize) -> ClusterStructure {
        ClusterStructure::new(self.parts.iter().take(k).map(|p| p.x.clone()).collect(), k)
    }

    /// `sum_{i<=k} W_i`.
    pub fn top_k_weight(&self) -> usize {
        self.w.iter().take(self.k).sum()
    }
}
