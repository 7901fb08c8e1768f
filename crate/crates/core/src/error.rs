use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("database size N must be positive")]
    EmptyDatabase,
    #[error("hypothesis sizes must satisfy M < K (got M={m}, K={k})")]
    Ordering { m: u64, k: u64 },
    #[error("marked count {count} exceeds database size {n}")]
    CountExceedsDatabase { count: u64, n: u64 },
    #[error("Chebyshev argument {0} lies outside [-1, 1]")]
    ChebyshevDomain(f64),
    #[error("M = 0 has no angle ratio; use the plain Grover search path")]
    DegenerateM,
    #[error("constructive-rule preconditions do not hold: {}", .reasons.join(", "))]
    NotApplicable { reasons: Vec<String> },
    #[error("gamma - 1 = {0} exceeds 1/4")]
    GammaTooLarge(f64),
    #[error("iteration count p*s overflows u64")]
    Overflow,
    #[error("padding premise sqrt(M/N) < (2 eps/3)^2 fails ({lhs} >= {rhs})")]
    PremiseViolated { lhs: f64, rhs: f64 },
    #[error("ratio a must exceed 1 and a*M must fit in N/2")]
    BadRatio,
    #[error("epsilon must lie in (0, 1), got {0}")]
    BadEpsilon(f64),
    #[error("torus orbit is defined on odd l only, got {0}")]
    EvenL(u64),
    #[error("index {index} out of range for register of size {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("state is not normalized (squared norm {0})")]
    Unnormalized(f64),
    #[error("trial count must be positive")]
    ZeroTrials,
    #[error("N = {n} exceeds the full-simulation cap {cap}; use the subspace model instead")]
    SimulationTooLarge { n: u64, cap: u64 },
    #[error("hypothesis sizes must be strictly increasing")]
    NonIncreasingSizes,
    #[error("hypothesis size {size} exceeds N/2 for N = {n}")]
    SizeAboveHalf { size: u64, n: u64 },
    #[error("need at least {0} hypotheses")]
    TooFewHypotheses(usize),
    #[error("Kronecker target needs equal-length, non-empty xi/eta lists and epsilon > 0")]
    BadKroneckerTarget,
    #[error("{0}")]
    Report(String),
}
