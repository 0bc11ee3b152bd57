use thiserror::Error;

/// Crate-wide error type. Variants mirror the failure modes of the
/// individual operations; certification routines never guess, they abort
/// with one of these instead.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("empty region list")]
    EmptyRegionList,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("iterate left the extension domain at word position {position}")]
    DomainEscape { position: usize },
    #[error("piece budget exceeded: need {needed} pieces, cap is {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },
    #[error("no tail bound available: {0}")]
    TailBoundUnavailable(String),
    #[error("gap recursion diverges: depth-1 Lipschitz bound {lipschitz} >= 1")]
    DivergentRecursion { lipschitz: f64 },
    #[error("reports come from different initial squares")]
    MismatchedSquares,
    #[error("gap-lemma hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("case selection ambiguous at step {step}: {what}")]
    CaseSelectionAmbiguous { step: usize, what: String },
    #[error("cantor set has no gaps listed")]
    NoGaps,
    #[error("thickness must be positive, got {0}")]
    NonpositiveTau(f64),
    #[error("perturbation kept breaking containment after {attempts} attempts")]
    ContainmentLost { attempts: u32 },
    #[error("i/o error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
