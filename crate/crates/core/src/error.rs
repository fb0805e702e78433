use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("syntax error at {line}:{col}: expected {expected}")]
    Syntax {
        line: usize,
        col: usize,
        expected: String,
    },
    #[error("variable `{0}` declared twice")]
    DuplicateVarDecl(String),
    #[error("`{0}` is used both as a role and as a concept name")]
    RoleUsedAsConcept(String),
    #[error("identifier `{0}` uses the reserved prefix `_v`")]
    ReservedName(String),
    #[error("binding for `{0}` is not ground")]
    NonGroundBinding(String),
    #[error("`{0}` is not a variable of the problem")]
    UnknownVariable(String),
    #[error("`{0}` does not occur in the problem signature")]
    UnknownSymbol(String),
    #[error("variable `{0}` has no binding")]
    UnboundVariable(String),
    #[error("substitutions have different domains")]
    DomainMismatch,
    #[error("assignment is cyclic")]
    CyclicAssignment,
    #[error("search space of 2^{bits} assignments exceeds the cap of 2^{cap}")]
    SearchSpaceTooLarge { bits: usize, cap: usize },
    #[error("problem is not a dismatching problem: {0}")]
    NotDismatching(String),
    #[error("dissubsumption `{0}` is not of the form X !<= Y")]
    NotVariablized(String),
    #[error("substitution does not solve the problem")]
    NotASolution,
    #[error("external SAT solver failed (status {status}): {stderr}")]
    ExternalSolver { status: String, stderr: String },
    #[error("malformed solver output: {0}")]
    MalformedSolverOutput(String),
    #[error("time limit exceeded")]
    Timeout,
    #[error("internal encoding error: {0}")]
    InternalEncoding(String),
    #[error("goal-oriented search exceeded its step budget of {0}")]
    StepBudgetExceeded(usize),
    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
