use fixedbitset::FixedBitSet;

use crate::rational::Rational;
use crate::space::FiniteSemimetricSpace;

/// Adjacency rows of the graph `{ (i, j) : i != j, pred(dist(i, j)) }`.
#[derive(Debug, Clone)]
pub(crate) struct ThresholdGraph {
    rows: Vec<FixedBitSet>,
}

impl ThresholdGraph {
    pub(crate) fn new(space: &FiniteSemimetricSpace, pred: impl Fn(&Rational) -> bool) -> Self {
        let n = space.len();
        let mut rows = vec![FixedBitSet::with_capacity(n); n];
        for i in 0..n {
            for j in (i + 1)..n {
                if pred(space.dist(i, j)) {
                    rows[i].insert(j);
                    rows[j].insert(i);
                }
            }
        }
        Self { rows }
    }

    pub(crate) fn len(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub(crate) fn row(&self, i: usize) -> &FixedBitSet {
        &self.rows[i]
    }
}

pub(crate) fn bitset_of(n: usize, points: &[usize]) -> FixedBitSet {
    let mut set = FixedBitSet::with_capacity(n);
    for &p in points {
        set.insert(p);
    }
    set
}
