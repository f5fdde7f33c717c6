//! Instance generators: the block witness showing the old bound is
//! asymptotically tight, seeded random test beds, and the weighted-to-uniform
//! discretization (epsilon-partition plus multiplicity blocks).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::space::FiniteSemimetricSpace;

/// Resolution of the random distance grids: values are `scale * u / GRID`.
const GRID: u32 = 1000;

pub const DEFAULT_MULTIPLICITY_CAP: u128 = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TightInstanceSpec {
    pub k: usize,
    /// Size of each of the blocks `B_1..B_k`.
    pub m: usize,
    /// Size of block `B_0`; at least `m`.
    pub m0: usize,
    #[serde(with = "rational::serde_pq")]
    pub r: Rational,
}

/// Blocks `B_0..B_k`; distance `r` inside a block and `4r` across blocks.
/// `B_0` comes first in index order.
pub fn tight_instance(spec: &TightInstanceSpec) -> Result<FiniteSemimetricSpace> {
    if spec.k == 0 || spec.m == 0 {
        return Err(Error::InvalidParam("tight instance needs k >= 1 and m >= 1".into()));
    }
    if spec.m0 < spec.m {
        return Err(Error::InvalidParam(format!("m0 = {} must be at least m = {}", spec.m0, spec.m)));
    }
    if !spec.r.is_positive() {
        return Err(Error::InvalidParam("r must be positive".into()));
    }
    let mut block = Vec::new();
    let mut labels = Vec::new();
    for b in 0..=spec.k {
        let size = if b == 0 { spec.m0 } else { spec.m };
        for j in 0..size {
            block.push(b);
            labels.push(format!("b{b}_{j}"));
        }
    }
    let far = &spec.r * rational::from_int(4);
    let n = block.len();
    let matrix = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| match (i == j, block[i] == block[j]) {
                    (true, _) => Rational::zero(),
                    (false, true) => spec.r.clone(),
                    (false, false) => far.clone(),
                })
                .collect()
        })
        .collect();
    FiniteSemimetricSpace::new(labels, matrix)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantedSpec {
    pub block_sizes: Vec<usize>,
    /// Fraction of all pairs re-drawn as medium edges; in `[0, 1)`.
    #[serde(with = "rational::serde_pq")]
    pub noise: Rational,
    #[serde(with = "rational::serde_pq")]
    pub r: Rational,
    pub seed: u64,
}

/// Intra-block distances uniform on `(0, r]`, inter-block on `(3r, 5r]`,
/// then `floor(noise * pairs)` distinct pairs re-drawn from `(r, 3r]`.
pub fn planted_instance(spec: &PlantedSpec) -> Result<FiniteSemimetricSpace> {
    if spec.block_sizes.is_empty() {
        return Err(Error::InvalidParam("planted instance needs at least one block".into()));
    }
    if spec.noise.is_negative() || spec.noise >= Rational::one() {
        return Err(Error::InvalidParam("noise fraction must lie in [0, 1)".into()));
    }
    if !spec.r.is_positive() {
        return Err(Error::InvalidParam("r must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut block = Vec::new();
    let mut labels = Vec::new();
    for (b, &size) in spec.block_sizes.iter().enumerate() {
        for j in 0..size {
            block.push(b);
            labels.push(format!("c{b}_{j}"));
        }
    }
    let n = block.len();
    let r = &spec.r;
    let two_r = r * rational::from_int(2);
    let three_r = r * rational::from_int(3);
    let mut draw = |offset: &Rational, width: &Rational| {
        let u = rng.random_range(1..=GRID);
        offset + width * rational::ratio(u as i64, GRID as i64)
    };
    let mut matrix = vec![vec![Rational::zero(); n]; n];
    let mut pairs = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = if block[i] == block[j] { draw(&Rational::zero(), r) } else { draw(&three_r, &two_r) };
            matrix[i][j] = v.clone();
            matrix[j][i] = v;
            pairs.push((i, j));
        }
    }
    let noisy = (&spec.noise * rational::from_int(pairs.len() as u64)).floor().to_integer();
    let noisy: usize = noisy.try_into().unwrap_or(0);
    for idx in index::sample(&mut rng, pairs.len(), noisy).into_vec() {
        let (i, j) = pairs[idx];
        let u = rng.random_range(1..=GRID);
        let v = r + &two_r * rational::ratio(u as i64, GRID as i64);
        matrix[i][j] = v.clone();
        matrix[j][i] = v;
    }
    FiniteSemimetricSpace::new(labels, matrix)
}

/// Uniform entries on `(0, 4r]`, closed under shortest paths so the result
/// is a metric.
pub fn uniform_random_instance(n: usize, r: &Rational, seed: u64) -> Result<FiniteSemimetricSpace> {
    if !r.is_positive() {
        return Err(Error::InvalidParam("r must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = r * rational::from_int(4);
    let mut matrix = vec![vec![Rational::zero(); n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let u = rng.random_range(1..=GRID);
            let v = &span * rational::ratio(u as i64, GRID as i64);
            matrix[i][j] = v.clone();
            matrix[j][i] = v;
        }
    }
    Ok(FiniteSemimetricSpace::unlabeled(matrix)?.metric_closure())
}

/// A finite space with a positive rational weight on every point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedFiniteSpace {
    base: FiniteSemimetricSpace,
    weights: Vec<Rational>,
}

impl WeightedFiniteSpace {
    pub fn new(base: FiniteSemimetricSpace, weights: Vec<Rational>) -> Result<Self> {
        if weights.len() != base.len() {
            return Err(Error::InvalidParam(format!(
                "{} weights for {} points",
                weights.len(),
                base.len()
            )));
        }
        if let Some(i) = weights.iter().position(|w| !w.is_positive()) {
            return Err(Error::InvalidParam(format!("weight of point {i} is not positive")));
        }
        Ok(Self { base, weights })
    }

    pub fn base(&self) -> &FiniteSemimetricSpace {
        &self.base
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn total(&self) -> Rational {
        self.weights.iter().sum()
    }
}

/// Greedy cover: the lowest-index uncovered point collects every uncovered
/// point within `eps / 2` of it.
///
/// A candidate also has to stay within `eps` of the points already in the
/// part. On a metric that test never fails; without the triangle inequality
/// it is what keeps every part at diameter `<= eps`.
pub fn epsilon_partition(w: &WeightedFiniteSpace, eps: &Rational) -> Result<Vec<Vec<usize>>> {
    if !eps.is_positive() {
        return Err(Error::InvalidParam("eps must be positive".into()));
    }
    let space = &w.base;
    let radius = eps / rational::from_int(2);
    let mut covered = vec![false; space.len()];
    let mut parts = Vec::new();
    for centre in 0..space.len() {
        if covered[centre] {
            continue;
        }
        covered[centre] = true;
        let mut part = vec![centre];
        for p in (centre + 1)..space.len() {
            if !covered[p] && *space.dist(centre, p) <= radius && part.iter().all(|&q| space.dist(p, q) <= eps) {
                covered[p] = true;
                part.push(p);
            }
        }
        parts.push(part);
    }
    Ok(parts)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Uniformized {
    /// One point per part, at the set distances of the parts.
    pub blocks: FiniteSemimetricSpace,
    /// Weight of each part.
    pub part_measures: Vec<Rational>,
    /// The truncated weights `q_i`.
    pub q: Vec<Rational>,
    /// Block sizes `|B_i|`.
    pub multiplicities: Vec<u64>,
}

impl Uniformized {
    pub fn total(&self) -> u64 {
        self.multiplicities.iter().sum()
    }

    /// The uniform space itself: block `i` becomes `|B_i|` points at mutual
    /// distance 0, labelled `{label}.{j}`. Quadratic in [`Self::total`].
    pub fn expand(&self) -> Result<FiniteSemimetricSpace> {
        let mut labels = Vec::new();
        let mut block = Vec::new();
        for (i, &mult) in self.multiplicities.iter().enumerate() {
            for j in 0..mult {
                labels.push(format!("{}.{j}", self.blocks.labels()[i]));
                block.push(i);
            }
        }
        let matrix = block
            .iter()
            .map(|&a| block.iter().map(|&b| if a == b { Rational::zero() } else { self.blocks.dist(a, b).clone() }).collect())
            .collect();
        FiniteSemimetricSpace::new(labels, matrix)
    }

    /// `(lower, |B_i|, upper)` with `lower = (1-eps) mu(A_i) N / mu(X)` and
    /// `upper = mu(A_i) N / ((1-eps) mu(X))`.
    pub fn sandwich(&self, eps: &Rational) -> Vec<(Rational, Rational, Rational)> {
        let total_measure: Rational = self.part_measures.iter().sum();
        let n = rational::from_int(self.total());
        let keep = Rational::one() - eps;
        self.part_measures
            .iter()
            .zip(&self.multiplicities)
            .map(|(mu, &b)| {
                let share = mu * &n / &total_measure;
                (&keep * &share, rational::from_int(b), share / &keep)
            })
            .collect()
    }
}

pub fn uniformize(w: &WeightedFiniteSpace, partition: &[Vec<usize>], eps: &Rational) -> Result<Uniformized> {
    uniformize_with_cap(w, partition, eps, DEFAULT_MULTIPLICITY_CAP)
}

/// Expands a weighted partition into a uniform-measure space of
/// multiplicity blocks.
///
/// `q_i` is `mu(A_i)` truncated to the fewest decimal places for which every
/// part keeps at least `(1 - eps) mu(A_i)`. Block sizes are the `q_i` over
/// their common denominator, reduced by their gcd. Distances are 0 inside a
/// block and the set distance of the parts across blocks.
pub fn uniformize_with_cap(
    w: &WeightedFiniteSpace,
    partition: &[Vec<usize>],
    eps: &Rational,
    cap: u128,
) -> Result<Uniformized> {
    if !eps.is_positive() || *eps >= Rational::one() {
        return Err(Error::InvalidParam("eps must lie in (0, 1)".into()));
    }
    let n = w.base.len();
    let mut seen = vec![false; n];
    for part in partition {
        if part.is_empty() {
            return Err(Error::InvalidParam("partition has an empty part".into()));
        }
        for &p in part {
            if p >= n {
                return Err(Error::PointOutOfRange { index: p, n });
            }
            if std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidParam(format!("point {p} appears in two parts")));
            }
        }
    }
    if let Some(p) = seen.iter().position(|s| !s) {
        return Err(Error::InvalidParam(format!("point {p} is in no part")));
    }

    let part_measures: Vec<Rational> =
        partition.iter().map(|part| part.iter().map(|&p| w.weights[p].clone()).sum()).collect();
    let keep = Rational::one() - eps;
    let ten = BigInt::from(10u32);
    let mut scale = BigInt::one();
    let counts: Vec<BigInt> = loop {
        let scale_q = Rational::from_integer(scale.clone());
        let counts: Vec<BigInt> = part_measures.iter().map(|mu| (mu * &scale_q).floor().to_integer()).collect();
        let fits = counts.iter().zip(&part_measures).all(|(c, mu)| {
            c.is_positive() && Rational::new(c.clone(), scale.clone()) >= &keep * mu
        });
        if fits {
            break counts;
        }
        scale *= &ten;
    };
    let q = counts.iter().map(|c| Rational::new(c.clone(), scale.clone())).collect();
    let g = counts.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
    let reduced: Vec<BigInt> = counts.iter().map(|c| c / &g).collect();
    let total: BigInt = reduced.iter().sum();
    let total_u: u128 = total.clone().try_into().unwrap_or(u128::MAX);
    if total_u > cap {
        return Err(Error::MultiplicityCap { total: total_u, cap });
    }
    let multiplicities: Vec<u64> = reduced.iter().map(|c| c.try_into().expect("below cap")).collect();

    let labels = partition.iter().map(|part| w.base.labels()[part[0]].clone()).collect();
    let between = partition
        .iter()
        .map(|a| {
            partition
                .iter()
                .map(|b| if std::ptr::eq(a, b) { Rational::zero() } else { w.base.set_distance(a, b).expect("parts are non-empty") })
                .collect()
        })
        .collect();
    Ok(Uniformized { blocks: FiniteSemimetricSpace::new(labels, between)?, part_measures, q, multiplicities })
}

/// Sum over `k`-subsets of points pairwise farther apart than `threshold` of
/// the product of their weights.
pub fn weighted_anticlique_measure(w: &WeightedFiniteSpace, threshold: &Rational, k: usize) -> Rational {
    fn rec(w: &WeightedFiniteSpace, threshold: &Rational, chosen: &mut Vec<usize>, from: usize, k: usize) -> Rational {
        if chosen.len() == k {
            return chosen.iter().map(|&p| w.weights[p].clone()).product();
        }
        let mut total = Rational::zero();
        for p in from..w.base.len() {
            if chosen.iter().all(|&q| w.base.dist(p, q) > threshold) {
                chosen.push(p);
                total += rec(w, threshold, chosen, p + 1, k);
                chosen.pop();
            }
        }
        total
    }
    rec(w, threshold, &mut Vec::new(), 0, k)
}

/// The two sides of the anticlique transfer through uniformization:
/// `T_k(uniformized, r)` and `(1-eps)^k N^k / mu(X)^k` times the weighted
/// `threshold`-anticlique measure of the source.
pub fn anticlique_transfer(
    w: &WeightedFiniteSpace,
    uniform: &Uniformized,
    eps: &Rational,
    r: &Rational,
    threshold: &Rational,
    k: usize,
) -> (Rational, Rational) {
    // Blocks are internally at distance 0, so a uniform anticlique takes at
    // most one point per block: weight each block by its multiplicity.
    let weights = uniform.multiplicities.iter().map(|&m| rational::from_int(m)).collect();
    let blocks = WeightedFiniteSpace { base: uniform.blocks.clone(), weights };
    let lhs = weighted_anticlique_measure(&blocks, r, k);
    let factor = rational::pow(&((Rational::one() - eps) * rational::from_int(uniform.total()) / w.total()), k);
    (lhs, factor * weighted_anticlique_measure(w, threshold, k))
}
