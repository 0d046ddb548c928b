use thiserror::Error;

/// Errors raised by field arithmetic, form manipulation and the verification harnesses.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands belong to different field towers")]
    TowerMismatch,
    #[error("argument must be nonzero")]
    ZeroArgument,
    #[error("scaling factor must be nonzero")]
    ZeroScalar,
    #[error("unsupported level: {0}")]
    UnsupportedLevel(String),
    #[error("element is not an integral unit (valuation {0:?})")]
    NotIntegralUnit(Vec<i64>),
    #[error("form is singular")]
    SingularForm,
    #[error("unsupported tower: {0}")]
    UnsupportedTower(String),
    #[error("search budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("rewrite rule not applicable: {0}")]
    RuleNotApplicable(String),
    #[error("valuation of the last slot is not in the F2-span of the other slot valuations")]
    PreconditionSpanViolated,
    #[error("input form is isotropic; every residue form vanishes")]
    IsotropicInput,
    #[error("invalid residue witness: {0}")]
    WitnessInvalid(String),
    #[error("fold mismatch: {0} vs {1}")]
    FoldMismatch(usize, usize),
    #[error("configuration unsupported: {0}")]
    ConfigUnsupported(String),
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("invalid symbol: {0}")]
    InvalidSymbol(String),
    #[error("no presentation with unit last slot: {0}")]
    NoGoodSlot(String),
    #[error("parse error at offset {position}: expected {expected}, found {found}")]
    Parse {
        position: usize,
        expected: String,
        found: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
