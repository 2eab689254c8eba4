use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("product leaves the squarefree span: tau{index} appears twice")]
    SquarefreeViolation { index: usize },

    #[error("cusp counts differ: {left} vs {right}")]
    CuspCountMismatch { left: usize, right: usize },

    #[error("relation matrix has no nonzero row")]
    EmptyRelation,

    #[error("first-order dimension {dim} is below the expected dimension (b = {b})")]
    NotAnomalousConsistent { dim: usize, b: i64 },

    #[error("potential violates its invariants at {monomial}: {reason}")]
    ParityViolation { monomial: String, reason: String },

    #[error("generator linear parts are dependent (rank {rank} < {count})")]
    DependentGenerators { rank: usize, count: usize },

    #[error("fit verdict differs between cusp-shape samples: {0}")]
    UnstableFit(String),

    #[error("malformed staircase: {0}")]
    MalformedStaircase(String),

    #[error("hypothesis fails: selection {witness:?} is linearly independent")]
    HypothesisFailed { witness: Vec<Choice> },

    #[error("no nonempty proper index subset exists for n = {n}")]
    NoProperSubset { n: usize },

    #[error("constructive extraction deviated from the proof: {0}")]
    InternalProofDeviation(String),

    #[error("anomalous subgroup with no complete cusp located")]
    NoCuspLocated,

    #[error("precondition violated: {0}")]
    Precondition(String),
}

/// Which vector of a pair `(v_i, w_i)` a selection takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Choice {
    V,
    W,
}
