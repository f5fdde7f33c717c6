use fixedbitset::FixedBitSet;

use crate::graph::{bitset_of, ThresholdGraph};
use crate::rational::Rational;
use crate::space::FiniteSemimetricSpace;

/// A maximum-cardinality subset of `subset` with diameter at most `d`.
///
/// Among maximum subsets the lexicographically smallest ascending index
/// sequence wins. Empty input gives an empty result.
pub fn max_cluster(space: &FiniteSemimetricSpace, subset: &[usize], d: &Rational) -> Vec<usize> {
    let graph = ThresholdGraph::new(space, |x| x <= d);
    max_clique(&graph, &bitset_of(space.len(), subset))
}

/// Maximum clique of `graph` inside `candidates`.
///
/// Vertices are tried in ascending order, so cliques are visited in
/// lexicographic order and the first one of maximum size is kept. Branches
/// are cut when a greedy colouring shows they cannot beat the incumbent.
pub(crate) fn max_clique(graph: &ThresholdGraph, candidates: &FixedBitSet) -> Vec<usize> {
    let mut best = Vec::new();
    let mut current = Vec::new();
    expand(graph, &mut current, candidates, &mut best);
    best
}

fn expand(graph: &ThresholdGraph, current: &mut Vec<usize>, cand: &FixedBitSet, best: &mut Vec<usize>) {
    if current.len() > best.len() {
        best.clone_from(current);
    }
    let mut remaining = cand.count_ones(..);
    if current.len() + remaining <= best.len() {
        return;
    }
    if current.len() + colour_bound(graph, cand, best.len() - current.len()) <= best.len() {
        return;
    }
    for v in cand.ones() {
        if current.len() + remaining <= best.len() {
            break;
        }
        remaining -= 1;
        let mut next = cand.clone();
        next.set_range(..v + 1, false);
        next.intersect_with(graph.row(v));
        current.push(v);
        expand(graph, current, &next, best);
        current.pop();
    }
}

/// Colour classes of a greedy colouring of `cand`; stops counting once it
/// exceeds `enough`, since the caller only compares against that.
fn colour_bound(graph: &ThresholdGraph, cand: &FixedBitSet, enough: usize) -> usize {
    let mut uncoloured = cand.clone();
    let mut colours = 0;
    while uncoloured.count_ones(..) > 0 {
        colours += 1;
        if colours > enough {
            return colours;
        }
        let mut open = uncoloured.clone();
        while let Some(v) = open.minimum() {
            open.set(v, false);
            uncoloured.set(v, false);
            open.difference_with(graph.row(v));
        }
    }
    colours
}
