use thiserror::Error;

use crate::graph::VertexId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown generator family `{0}`")]
    UnknownFamily(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("edge {src} -> {dst}: weight must be positive")]
    NonPositiveWeight { src: VertexId, dst: VertexId },
    #[error("duplicate edge {src} -> {dst}")]
    DuplicateEdge { src: VertexId, dst: VertexId },
    #[error("invalid vertex token `{0}`")]
    InvalidVertex(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(VertexId),
    #[error("inconsistent metadata: {0}")]
    InconsistentMetadata(String),
    #[error("non-wandering set is empty: beta0 undefined")]
    EmptyNonWandering,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("set is not hereditary: {0} has an edge leaving it")]
    NotHereditary(VertexId),
    #[error("vector violates the defining constraints at {0}")]
    ConstraintViolation(VertexId),
    #[error("zero vector is not admissible")]
    Degenerate,
    #[error("missing value at probed vertex {0}")]
    MissingValue(VertexId),
    #[error("negative value at {0}")]
    NegativeValue(VertexId),
    #[error("extension did not reach {0:?}")]
    Incomplete(Vec<VertexId>),
    #[error("series diverged: {0}")]
    Diverged(String),
    #[error("iterates increased at {vertex} in step {step}")]
    NonMonotone { vertex: VertexId, step: usize },
    #[error("vector is not harmonic at {0}")]
    NotHarmonic(VertexId),
    #[error("sub-stochastic row at {0}")]
    SubStochastic(VertexId),
    #[error("{0} is not in V_inf")]
    NotInVinf(VertexId),
    #[error("{target} is not reachable from {base} within the depth")]
    Unreachable { base: VertexId, target: VertexId },
    #[error("target sequence repeats {0}")]
    RepeatedTarget(VertexId),
    #[error("path left the kernel domain at {0}")]
    LeftDomain(VertexId),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// Stable snake_case tag for machine-readable error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Syntax { .. } => "syntax",
            Error::UnknownFamily(_) => "unknown_family",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::NonPositiveWeight { .. } => "non_positive_weight",
            Error::DuplicateEdge { .. } => "duplicate_edge",
            Error::InvalidVertex(_) => "invalid_vertex",
            Error::UnknownVertex(_) => "unknown_vertex",
            Error::InconsistentMetadata(_) => "inconsistent_metadata",
            Error::EmptyNonWandering => "empty_nonwandering",
            Error::Precondition(_) => "precondition",
            Error::NotHereditary(_) => "not_hereditary",
            Error::ConstraintViolation(_) => "constraint_violation",
            Error::Degenerate => "degenerate",
            Error::MissingValue(_) => "missing_value",
            Error::NegativeValue(_) => "negative_value",
            Error::Incomplete(_) => "incomplete",
            Error::Diverged(_) => "diverged",
            Error::NonMonotone { .. } => "non_monotone",
            Error::NotHarmonic(_) => "not_harmonic",
            Error::SubStochastic(_) => "sub_stochastic",
            Error::NotInVinf(_) => "not_in_v_infinity",
            Error::Unreachable { .. } => "unreachable",
            Error::RepeatedTarget(_) => "repeated_target",
            Error::LeftDomain(_) => "left_domain",
            Error::Numerical(_) => "numerical",
        }
    }

    /// Errors caused by malformed input rather than by the mathematics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Syntax { .. }
                | Error::UnknownFamily(_)
                | Error::InvalidParameter(_)
                | Error::NonPositiveWeight { .. }
                | Error::DuplicateEdge { .. }
                | Error::InvalidVertex(_)
        )
    }
}
