//! Distance-distribution statistics: medium-edge counts, anticlique counts,
//! elementary symmetric polynomials and the tight observed densities.

use fixedbitset::FixedBitSet;
use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::bounds::BoundInputs;
use crate::graph::ThresholdGraph;
use crate::rational::{self, Rational};
use crate::space::{EdgeClass, FiniteSemimetricSpace, ScaleParams};

/// Unordered pairs with `r < dist <= 3r`.
pub fn medium_edge_count(space: &FiniteSemimetricSpace, r: &Rational) -> u64 {
    count_pairs(space, |d| EdgeClass::of(d, r) == EdgeClass::Medium)
}

/// Unordered pairs with `dist > 3r`.
pub fn long_edge_count(space: &FiniteSemimetricSpace, r: &Rational) -> u64 {
    count_pairs(space, |d| EdgeClass::of(d, r) == EdgeClass::Long)
}

fn count_pairs(space: &FiniteSemimetricSpace, pred: impl Fn(&Rational) -> bool) -> u64 {
    let n = space.len();
    let mut count = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            if pred(space.dist(i, j)) {
                count += 1;
            }
        }
    }
    count
}

/// Number of `s`-subsets whose points are pairwise more than `r` apart.
///
/// Points are added in ascending index order and a branch dies as soon as
/// its candidate set cannot complete the subset; the last level is counted
/// in one step.
pub fn anticlique_count(space: &FiniteSemimetricSpace, r: &Rational, s: usize) -> BigUint {
    let far = ThresholdGraph::new(space, |d| d > r);
    anticliques_in(&far, s)
}

pub(crate) fn anticliques_in(far: &ThresholdGraph, s: usize) -> BigUint {
    let n = far.len();
    if s == 0 {
        return BigUint::one();
    }
    if s > n {
        return BigUint::zero();
    }
    let mut all = FixedBitSet::with_capacity(n);
    all.insert_range(..);
    BigUint::from(count_rec(far, &all, s))
}

fn count_rec(far: &ThresholdGraph, candidates: &FixedBitSet, need: usize) -> u128 {
    if need == 1 {
        return candidates.count_ones(..) as u128;
    }
    let mut total = 0u128;
    let mut left = candidates.count_ones(..);
    for v in candidates.ones() {
        if left < need {
            break;
        }
        left -= 1;
        let mut next = candidates.clone();
        next.set_range(..v + 1, false);
        next.intersect_with(far.row(v));
        if next.count_ones(..) + 1 >= need {
            total += count_rec(far, &next, need - 1);
        }
    }
    total
}

/// `e_s(values)`: the sum over all `s`-subsets of the product of their
/// entries, via the truncated product recurrence `e_j <- e_j + v * e_{j-1}`.
pub fn elementary_symmetric<V: Into<BigUint> + Clone>(values: &[V], s: usize) -> BigUint {
    let mut e = vec![BigUint::zero(); s + 1];
    e[0] = BigUint::one();
    for (seen, v) in values.iter().enumerate() {
        let v: BigUint = v.clone().into();
        for j in (1..=s.min(seen + 1)).rev() {
            let add = &v * &e[j - 1];
            e[j] += add;
        }
    }
    e.swap_remove(s)
}

/// Tight densities: with these values the medium-edge, `(k+1)`-anticlique
/// and `k`-anticlique hypotheses hold with equality.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservedParams {
    pub n: usize,
    pub k: usize,
    /// Medium-edge count `M`.
    pub medium: u64,
    #[serde(with = "rational::serde_big")]
    pub t_k: BigUint,
    #[serde(with = "rational::serde_big")]
    pub t_k1: BigUint,
    /// `2M / n^2`
    #[serde(with = "rational::serde_pq")]
    pub delta: Rational,
    /// `(k+1)! T_{k+1} / n^{k+1}`
    #[serde(with = "rational::serde_pq")]
    pub beta: Rational,
    /// `k! T_k / n^k`
    #[serde(with = "rational::serde_pq")]
    pub alpha: Rational,
}

impl ObservedParams {
    pub fn bound_inputs(&self) -> BoundInputs {
        BoundInputs {
            alpha: self.alpha.clone(),
            beta: self.beta.clone(),
            delta: self.delta.clone(),
            k: self.k,
        }
    }
}

pub fn observed_parameters(space: &FiniteSemimetricSpace, params: &ScaleParams) -> ObservedParams {
    let n = space.len();
    let k = params.k;
    let far = ThresholdGraph::new(space, |d| *d > params.r);
    let medium = medium_edge_count(space, &params.r);
    let t_k = anticliques_in(&far, k);
    let t_k1 = anticliques_in(&far, k + 1);
    let (delta, beta, alpha) = if n == 0 {
        (Rational::zero(), Rational::zero(), Rational::zero())
    } else {
        let n_q = rational::from_int(n as u64);
        let density = |count: &BigUint, order: usize| {
            rational::from_biguint(&(rational::factorial(order) * count)) / rational::pow(&n_q, order)
        };
        (
            rational::from_int(2 * medium) / (&n_q * &n_q),
            density(&t_k1, k + 1),
            density(&t_k, k),
        )
    };
    ObservedParams { n, k, medium, t_k, t_k1, delta, beta, alpha }
}
