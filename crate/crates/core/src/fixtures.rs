//! Small hand-built spaces shared by unit tests.

use crate::rational::{parse, ratio, Rational};
use crate::space::FiniteSemimetricSpace;

pub(crate) fn one() -> Rational {
    ratio(1, 1)
}

pub(crate) fn space(rows: &[&[&str]]) -> FiniteSemimetricSpace {
    FiniteSemimetricSpace::unlabeled(
        rows.iter().map(|row| row.iter().map(|s| parse(s).unwrap()).collect()).collect(),
    )
    .unwrap()
}

/// Three points: 0.5 between p0 and p1, 2 between p0 and p2, 4 between p1 and p2.
pub(crate) fn s3() -> FiniteSemimetricSpace {
    space(&[&["0", "0.5", "2"], &["0.5", "0", "4"], &["2", "4", "0"]])
}

pub(crate) fn singleton() -> FiniteSemimetricSpace {
    space(&[&["0"]])
}

/// Three blocks of three points, distance 1 inside a block and 4 across.
pub(crate) fn tight_k2() -> FiniteSemimetricSpace {
    let n = 9;
    let m = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| match (i == j, i / 3 == j / 3) {
                    (true, _) => ratio(0, 1),
                    (false, true) => ratio(1, 1),
                    (false, false) => ratio(4, 1),
                })
                .collect()
        })
        .collect();
    FiniteSemimetricSpace::unlabeled(m).unwrap()
}

/// Space from the strict upper triangle, row-major, each value divided by `denom`.
pub(crate) fn from_upper(n: usize, vals: &[i64], denom: i64) -> FiniteSemimetricSpace {
    let mut m = vec![vec![ratio(0, 1); n]; n];
    let mut it = vals.iter();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = ratio(*it.next().unwrap(), denom);
            m[i][j] = v.clone();
            m[j][i] = v;
        }
    }
    FiniteSemimetricSpace::unlabeled(m).unwrap()
}

/// Shortest-path closure of [`from_upper`], hence a metric.
pub(crate) fn metric_from_upper(n: usize, vals: &[i64], denom: i64) -> FiniteSemimetricSpace {
    from_upper(n, vals, denom).metric_closure()
}

