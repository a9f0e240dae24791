use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension {m} exceeds the configured cap {cap}")]
    DimensionTooLarge { m: usize, cap: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix rows are ragged or do not match the declared dimension")]
    Ragged,
    #[error("non-finite number in input")]
    NonFinite,
    #[error("empty matrix")]
    Empty,

    #[error("pivot entry {index} is zero within tolerance")]
    ZeroPivot { index: usize },
    #[error("matrix is not singular (det = {det})")]
    NotSingular { det: f64 },

    #[error("complementary pivoting terminated on a secondary ray")]
    RayTermination,
    #[error("complementary pivoting exceeded {limit} pivots")]
    CycleLimit { limit: usize },
    #[error("no one-dimensional positive left null vector is available: {0}")]
    CertificateUnavailable(String),
    #[error("no LCP solution exists")]
    NoSolution,

    #[error("principal submatrix on players {players:?} is singular")]
    SingularSubmatrix { players: Vec<usize> },
    #[error("matrix is outside the P and P0' classes; equilibrium results are not covered")]
    NotCovered,
    #[error("matrix is not symmetric positive definite")]
    NotSymmetricPD,
    #[error("column {column} of G has negative sum {sum}")]
    ColumnSumNegative { column: usize, sum: f64 },
    #[error("game is invalid: {0}")]
    InvalidGame(String),
    #[error("strategy profile is invalid: {0}")]
    InvalidProfile(String),

    #[error("invalid redistribution quotients: {0}")]
    InvalidAlpha(String),
    #[error("redistribution weight is singular for exercising set {players:?}")]
    WeightSingular { players: Vec<usize> },

    #[error("node {id} is terminal")]
    TerminalNode { id: u64 },
    #[error("invalid scenario tree: {0}")]
    InvalidTree(String),
    #[error("node {id} has no matrix and the tree has no default matrix")]
    MissingMatrix { id: u64 },
    #[error("enumeration of {count} profiles exceeds the budget {budget}")]
    EnumerationTooLarge { count: u128, budget: u128 },
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("matrix at node {id} is not a non-singular K-matrix")]
    NotKMatrix { id: u64 },
}
