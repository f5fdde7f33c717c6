use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("matrix has {rows} rows but {labels} labels")]
    LabelCount { rows: usize, labels: usize },

    #[error("ragged matrix: row {row} has {len} entries, expected {expected}")]
    Ragged { row: usize, len: usize, expected: usize },

    #[error("asymmetric at ({i},{j})")]
    Asymmetric { i: usize, j: usize },

    #[error("negative entry at ({i},{j})")]
    Negative { i: usize, j: usize },

    #[error("nonzero diagonal at ({i},{i})")]
    NonzeroDiagonal { i: usize },

    #[error("triangle inequality violated at ({i},{j}) via {via}")]
    Triangle { i: usize, j: usize, via: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid number {0:?}")]
    Number(String),

    #[error("point index {index} out of range for {n} points")]
    PointOutOfRange { index: usize, n: usize },

    #[error("self-edge ({0},{0}) has no class")]
    SelfEdge(usize),

    #[error("set distance needs two non-empty sets")]
    EmptySet,

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("undefined parameter: {0}")]
    Undefined(String),

    #[error("exact search supports at most {limit} points, got {n}")]
    ExactLimit { n: usize, limit: usize },

    #[error("uniformized space would have {total} points, cap is {cap}")]
    MultiplicityCap { total: u128, cap: u128 },

    #[error("json: {0}")]
    Json(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
