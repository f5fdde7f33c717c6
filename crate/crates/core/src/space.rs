//! Finite semimetric spaces with exact rational distances and the uniform
//! counting measure.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// A finite point set with a symmetric, non-negative, zero-diagonal distance
/// table. The triangle inequality is not assumed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteSemimetricSpace {
    labels: Vec<String>,
    dist: Vec<Rational>,
}

/// The clustering scale `r > 0` and the structure order `k >= 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleParams {
    #[serde(with = "rational::serde_pq")]
    pub r: Rational,
    pub k: usize,
}

impl ScaleParams {
    pub fn new(r: Rational, k: usize) -> Result<Self> {
        if !r.is_positive() {
            return Err(Error::InvalidParam(format!("r must be positive, got {r}")));
        }
        if k == 0 {
            return Err(Error::InvalidParam("k must be at least 1".into()));
        }
        Ok(Self { r, k })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeClass {
    Short,
    Medium,
    Long,
}

impl EdgeClass {
    /// Short for `d <= r`, long for `d > 3r`, medium in between.
    pub fn of(d: &Rational, r: &Rational) -> Self {
        if d <= r {
            EdgeClass::Short
        } else if *d > r * Rational::from_integer(3.into()) {
            EdgeClass::Long
        } else {
            EdgeClass::Medium
        }
    }
}

impl FiniteSemimetricSpace {
    /// Validates and builds a space. Cells are checked in row-major order, so
    /// the reported cell is the first offending one.
    pub fn new(labels: Vec<String>, matrix: Vec<Vec<Rational>>) -> Result<Self> {
        let n = labels.len();
        if matrix.len() != n {
            return Err(Error::LabelCount { rows: matrix.len(), labels: n });
        }
        for (row, entries) in matrix.iter().enumerate() {
            if entries.len() != n {
                return Err(Error::Ragged { row, len: entries.len(), expected: n });
            }
        }
        for i in 0..n {
            for j in 0..n {
                let v = &matrix[i][j];
                if v.is_negative() {
                    return Err(Error::Negative { i, j });
                }
                if i == j && !v.is_zero() {
                    return Err(Error::NonzeroDiagonal { i });
                }
                if *v != matrix[j][i] {
                    return Err(Error::Asymmetric { i: i.min(j), j: i.max(j) });
                }
            }
        }
        let dist = matrix.into_iter().flatten().collect();
        Ok(Self { labels, dist })
    }

    /// Like [`FiniteSemimetricSpace::new`] but also rejects triangle violations.
    pub fn new_metric(labels: Vec<String>, matrix: Vec<Vec<Rational>>) -> Result<Self> {
        let space = Self::new(labels, matrix)?;
        space.check_metric()?;
        Ok(space)
    }

    /// Builds a space whose labels are `p0, p1, ...`.
    pub fn unlabeled(matrix: Vec<Vec<Rational>>) -> Result<Self> {
        let labels = (0..matrix.len()).map(|i| format!("p{i}")).collect();
        Self::new(labels, matrix)
    }

    pub fn empty() -> Self {
        Self { labels: Vec::new(), dist: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> &Rational {
        &self.dist[i * self.len() + j]
    }

    pub fn check_metric(&self) -> Result<()> {
        let n = self.len();
        for via in 0..n {
            for i in 0..n {
                for j in (i + 1)..n {
                    if *self.dist(i, j) > self.dist(i, via) + self.dist(via, j) {
                        return Err(Error::Triangle { i, j, via });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn is_metric(&self) -> bool {
        self.check_metric().is_ok()
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.len() {
            return Err(Error::PointOutOfRange { index: i, n: self.len() });
        }
        Ok(())
    }

    /// Shortest-path closure: the largest metric below `self`.
    pub fn metric_closure(&self) -> Self {
        let n = self.len();
        let mut dist = self.dist.clone();
        for via in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let through = &dist[i * n + via] + &dist[via * n + j];
                    if through < dist[i * n + j] {
                        dist[i * n + j] = through;
                    }
                }
            }
        }
        Self { labels: self.labels.clone(), dist }
    }

    pub fn classify_edge(&self, i: usize, j: usize, r: &Rational) -> Result<EdgeClass> {
        self.check_index(i)?;
        self.check_index(j)?;
        if i == j {
            return Err(Error::SelfEdge(i));
        }
        Ok(EdgeClass::of(self.dist(i, j), r))
    }

    /// Largest pairwise distance inside `subset`; zero for fewer than two points.
    pub fn subset_diameter(&self, subset: &[usize]) -> Rational {
        let mut best = Rational::zero();
        for (a, &i) in subset.iter().enumerate() {
            for &j in &subset[a + 1..] {
                let d = self.dist(i, j);
                if *d > best {
                    best = d.clone();
                }
            }
        }
        best
    }

    pub fn diameter(&self) -> Rational {
        let all: Vec<usize> = (0..self.len()).collect();
        self.subset_diameter(&all)
    }

    /// `min { dist(a, b) : a in A, b in B }`.
    pub fn set_distance(&self, a: &[usize], b: &[usize]) -> Result<Rational> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::EmptySet);
        }
        let mut best: Option<&Rational> = None;
        for &i in a {
            for &j in b {
                let d = self.dist(i, j);
                if best.is_none_or(|cur| d < cur) {
                    best = Some(d);
                }
            }
        }
        Ok(best.cloned().unwrap_or_default())
    }

    /// The distance table as nested rows.
    pub fn matrix(&self) -> Vec<Vec<Rational>> {
        let n = self.len();
        (0..n).map(|i| (0..n).map(|j| self.dist(i, j).clone()).collect()).collect()
    }

    /// Text format: `n`, then a line of labels, then `n` rows of distances.
    pub fn to_text(&self) -> String {
        let n = self.len();
        let mut out = format!("{n}\n{}\n", self.labels.join(" "));
        for i in 0..n {
            let row: Vec<String> =
                (0..n).map(|j| rational::to_decimal_or_pq(self.dist(i, j))).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let perr = |line: usize, message: String| Error::Parse { line, message };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (line_no, first) =
            lines.find(|(_, l)| !l.trim().is_empty()).ok_or_else(|| perr(1, "empty input".into()))?;
        let n: usize = first
            .trim()
            .parse()
            .map_err(|_| perr(line_no, format!("expected point count, found {:?}", first.trim())))?;
        if n == 0 {
            return Ok(Self::empty());
        }
        let (label_line, labels) = lines
            .next()
            .ok_or_else(|| perr(line_no + 1, "missing label line".into()))?;
        let labels: Vec<String> = labels.split_whitespace().map(str::to_string).collect();
        if labels.len() != n {
            return Err(perr(label_line, format!("expected {n} labels, found {}", labels.len())));
        }
        let mut matrix = Vec::with_capacity(n);
        let mut row_lines = Vec::with_capacity(n);
        for (no, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            if matrix.len() == n {
                return Err(perr(no, "unexpected extra row".into()));
            }
            let row = line
                .split_whitespace()
                .map(|tok| rational::parse(tok).map_err(|e| perr(no, e.to_string())))
                .collect::<Result<Vec<_>>>()?;
            if row.len() != n {
                return Err(perr(no, format!("expected {n} distances, found {}", row.len())));
            }
            matrix.push(row);
            row_lines.push(no);
        }
        if matrix.len() != n {
            return Err(perr(
                row_lines.last().map_or(label_line, |l| l + 1),
                format!("expected {n} rows, found {}", matrix.len()),
            ));
        }
        Self::new(labels, matrix).map_err(|e| {
            let line = match &e {
                Error::Asymmetric { i, .. } | Error::Negative { i, .. } | Error::NonzeroDiagonal { i } => {
                    row_lines[*i]
                }
                _ => line_no,
            };
            perr(line, e.to_string())
        })
    }

    pub fn to_doc(&self) -> SpaceDoc {
        SpaceDoc {
            n: self.len(),
            labels: self.labels.clone(),
            dist: self
                .matrix()
                .iter()
                .map(|row| row.iter().map(rational::to_decimal_or_pq).collect())
                .collect(),
        }
    }

    pub fn from_doc(doc: &SpaceDoc) -> Result<Self> {
        if doc.labels.len() != doc.n {
            return Err(Error::LabelCount { rows: doc.n, labels: doc.labels.len() });
        }
        let matrix = doc
            .dist
            .iter()
            .map(|row| row.iter().map(|s| rational::parse(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::new(doc.labels.clone(), matrix)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("space doc serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SpaceDoc = serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))?;
        Self::from_doc(&doc)
    }

    /// Accepts either format, keyed on the first non-blank character.
    pub fn parse_any(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            Self::from_json(text)
        } else {
            Self::parse_text(text)
        }
    }
}

/// Structured form of a space; distances are decimal (or `p/q`) strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceDoc {
    pub n: usize,
    pub labels: Vec<String>,
    pub dist: Vec<Vec<String>>,
}
