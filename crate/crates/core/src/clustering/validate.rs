use serde::{Deserialize, Serialize};

use super::ClusterStructure;
use crate::rational::{self, Rational};
use crate::space::FiniteSemimetricSpace;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    OutOfRange {
        cluster: usize,
        point: usize,
    },
    Overlap {
        point: usize,
        first: usize,
        second: usize,
    },
    /// Two points of one cluster more than `2r` apart.
    Diameter {
        cluster: usize,
        a: usize,
        b: usize,
        #[serde(with = "rational::serde_pq")]
        dist: Rational,
    },
    /// Points of different clusters closer than `r`.
    Separation {
        first: usize,
        second: usize,
        a: usize,
        b: usize,
        #[serde(with = "rational::serde_pq")]
        dist: Rational,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

pub fn validate_structure(
    space: &FiniteSemimetricSpace,
    structure: &ClusterStructure,
    r: &Rational,
) -> ValidationReport {
    let n = space.len();
    let two_r = r * rational::from_int(2);
    let mut violations = Vec::new();
    let mut owner: Vec<Option<usize>> = vec![None; n];
    let mut clean: Vec<Vec<usize>> = Vec::with_capacity(structure.clusters.len());
    for (c, cluster) in structure.clusters.iter().enumerate() {
        let mut kept = Vec::new();
        for &p in cluster {
            if p >= n {
                violations.push(Violation::OutOfRange { cluster: c, point: p });
                continue;
            }
            match owner[p] {
                Some(first) => violations.push(Violation::Overlap { point: p, first, second: c }),
                None => owner[p] = Some(c),
            }
            kept.push(p);
        }
        clean.push(kept);
    }
    for (c, cluster) in clean.iter().enumerate() {
        for (i, &a) in cluster.iter().enumerate() {
            for &b in &cluster[i + 1..] {
                let d = space.dist(a, b);
                if *d > two_r {
                    violations.push(Violation::Diameter { cluster: c, a, b, dist: d.clone() });
                }
            }
        }
    }
    for first in 0..clean.len() {
        for second in (first + 1)..clean.len() {
            for &a in &clean[first] {
                for &b in &clean[second] {
                    let d = space.dist(a, b);
                    if d < r {
                        violations.push(Violation::Separation { first, second, a, b, dist: d.clone() });
                    }
                }
            }
        }
    }
    ValidationReport { valid: violations.is_empty(), violations }
}
