use thiserror::Error;

/// Errors raised by the algebra, lifting and groupoid operations.
///
/// Every variant maps onto a stable machine-readable code (see [`Error::code`])
/// which the command-line front end reports verbatim.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid ring: {0}")]
    InvalidRing(String),
    #[error("mixed carriers: {0}")]
    MixedCarrier(String),
    #[error("missing value for variable `{0}`")]
    MissingVariable(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("syntax error at {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown identifier `{name}` at {position}")]
    UnknownIdentifier { name: String, position: usize },
    #[error("division by zero")]
    DivisionByZero,
    #[error("not divisible: {0}")]
    NotDivisible(String),
    #[error("not a unit: {0}")]
    NotAUnit(String),
    #[error("residue modulo the maximal ideal is zero")]
    ResidueIsZero,
    #[error("insufficient truncation: need at least {needed} coefficients, have {available}")]
    InsufficientTruncation { needed: usize, available: usize },
    #[error("wrong residue: {0}")]
    WrongResidue(String),
    #[error("variable mismatch: {0}")]
    VariableMismatch(String),
    #[error("arity mismatch: {0}")]
    ArityMismatch(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("no solution: {0}")]
    NoSolution(String),
    #[error("search space too large: {size} candidates exceeds limit {limit}")]
    SearchSpaceTooLarge { size: u128, limit: u128 },
    #[error("point is not on X: {0}")]
    NotOnX(String),
    #[error("point lies on the different: {0}")]
    OnTheDifferent(String),
    #[error("point is not on the different: {0}")]
    NotOnDifferent(String),
    #[error("system is not in normal form at the point: {0}")]
    NotInNormalForm(String),
    #[error("endpoint mismatch: {0}")]
    EndpointMismatch(String),
    #[error("constraint violated: {0}")]
    ConstraintViolated(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Stable kebab-case identifier used in JSON error reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidRing(_) => "invalid-ring",
            Error::MixedCarrier(_) => "mixed-carrier",
            Error::MissingVariable(_) => "missing-variable",
            Error::UnknownVariable(_) => "unknown-variable",
            Error::Syntax { .. } => "syntax-error",
            Error::UnknownIdentifier { .. } => "unknown-identifier",
            Error::DivisionByZero => "division-by-zero",
            Error::NotDivisible(_) => "not-divisible",
            Error::NotAUnit(_) => "not-a-unit",
            Error::ResidueIsZero => "residue-is-zero",
            Error::InsufficientTruncation { .. } => "insufficient-truncation",
            Error::WrongResidue(_) => "wrong-residue",
            Error::VariableMismatch(_) => "variable-mismatch",
            Error::ArityMismatch(_) => "arity-mismatch",
            Error::PreconditionViolated(_) => "precondition-violated",
            Error::NoSolution(_) => "no-solution",
            Error::SearchSpaceTooLarge { .. } => "search-space-too-large",
            Error::NotOnX(_) => "not-on-x",
            Error::OnTheDifferent(_) => "on-the-different",
            Error::NotOnDifferent(_) => "not-on-different",
            Error::NotInNormalForm(_) => "not-in-normal-form",
            Error::EndpointMismatch(_) => "endpoint-mismatch",
            Error::ConstraintViolated(_) => "constraint-violated",
            Error::InvalidInput(_) => "invalid-input",
        }
    }

    /// Character offset into the parsed text, for syntax-type errors.
    pub fn location(&self) -> Option<usize> {
        match self {
            Error::Syntax { position, .. } | Error::UnknownIdentifier { position, .. } => {
                Some(*position)
            }
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
