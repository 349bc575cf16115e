use crate::circuit::{NodeId, ValidationReport};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("invalid circuit: {0}")]
    Invalid(ValidationReport),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("assignment does not set variable `{0}`")]
    IncompleteAssignment(String),
    #[error("variable `{0}` does not occur in the circuit")]
    UnknownVariable(String),
    #[error("assignments disagree on variable `{0}`")]
    InconsistentUnion(String),
    #[error("invalid variable name `{0}`")]
    BadVariableName(String),

    #[error("{count} variables exceed the oracle cap of {cap}")]
    TooManyVariables { count: usize, cap: usize },
    #[error("circuits are over different variable sets")]
    ScopeMismatch,
    #[error("expected a {expected} circuit")]
    WrongFlavor { expected: &'static str },

    #[error("circuit is not smooth and decomposable")]
    NotSmoothDecomposable,
    #[error("circuit is not smooth")]
    NotSmooth,
    #[error("circuit is not decomposable")]
    NotDecomposable,
    #[error("circuit is not weakly decomposable")]
    NotWeaklyDecomposable,
    #[error("circuit is not deterministic")]
    NotDeterministic,
    #[error("circuit computes a negative value")]
    NotPositive,
    #[error("more than {cap} term subcircuits")]
    TermExplosion { cap: usize },

    #[error("node {node} holds negative constant {value}")]
    NegativeConstant { node: NodeId, value: String },
    #[error("term subcircuits have different variable sets")]
    PreconditionTermScopesDiffer,
    #[error("variable `{var}` occurs with both polarities below node {node}")]
    AmbiguousPolarity { node: NodeId, var: String },
    #[error("weight {weight} outside 0..={max}")]
    BadWeight { weight: usize, max: usize },

    #[error("no simple {degree}-regular graph on {n} vertices")]
    InfeasibleDegree { n: usize, degree: usize },
    #[error("gave up generating a regular graph after {attempts} attempts")]
    GenerationTimeout { attempts: usize },
    #[error("unsupported circuit class `{0}`")]
    UnsupportedClass(String),
    #[error("size budget {budget} too small, need at least {needed}")]
    BudgetTooSmall { budget: usize, needed: usize },
    #[error("invalid graph: {0}")]
    BadGraph(String),

    #[error("invalid partition: {0}")]
    BadPartition(String),
    #[error("invalid matching: {0}")]
    BadMatching(String),
    #[error("determinant recursion violated at level {level}")]
    RecursionViolated { level: usize },

    #[error("line {line}, column {col}: expected {expected}")]
    Syntax { line: usize, col: usize, expected: String },
    #[error("line {line}: node {id} references later node {target}")]
    ForwardReference { line: usize, id: NodeId, target: NodeId },
    #[error("line {line}: duplicate node id {id}")]
    DuplicateId { line: usize, id: NodeId },
    #[error("{0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
