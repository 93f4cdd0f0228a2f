use thiserror::Error;

/// Errors shared across the workbench.
#[derive(Debug, Error)]
pub enum DplError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("non-propositional operator argument")]
    NonPropositionalArgument,
    #[error("non-propositional formula: {0}")]
    NotPropositional(String),
    #[error("unknown operator `{0}`")]
    UnknownOperator(String),
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("unknown world `{0}`")]
    UnknownWorld(String),
    #[error("world `{0}` is not a member of the given set")]
    WorldOutsideSet(String),
    #[error("invalid model: {}", .0.join("; "))]
    InvalidModel(Vec<String>),
    #[error("operator not closed: {0}")]
    OperatorNotClosed(String),
    #[error("requires total preorder")]
    RequiresTotalPreorder,
    #[error("instance space too large: {blocks} equivalence blocks exceed cap {cap}")]
    InstanceSpaceTooLarge { blocks: usize, cap: usize },
    #[error("degree index must be positive")]
    DegreeZero,
    #[error("world count {n} above cap {cap}")]
    TooManyWorlds { n: usize, cap: usize },
    #[error("mismatched carriers: {0}")]
    MismatchedCarriers(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, DplError>;
