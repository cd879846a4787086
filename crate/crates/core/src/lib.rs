//! Almost harmonic vectors of non-negative matrices over countable vertex sets.
//!
//! A non-negative matrix `A` over a countable set `V` is presented as a weighted
//! digraph: either a finite table or a lazily generated family. For `λ > 0` a
//! non-negative, non-zero vector `ξ` is *almost λ-harmonic* when
//! `Σ_w A_vw ξ_w = λ ξ_v` at every vertex that emits finitely many (and at least
//! one) edges, and `Σ_w A_vw ξ_w ≤ λ ξ_v` at sinks and infinite emitters.
//!
//! The crate computes the structure of these vectors:
//!
//! * [`graph`]: graph sources, hereditary/saturated closures, cofinality,
//!   non-wandering sets and assumption reports.
//! * [`series`]: matrix powers, Green and first-passage series, the critical
//!   value `λ₀`, recurrence classification.
//! * [`harmonic`]: vector checks, exact cone enumeration on finite graphs,
//!   extension from hereditary sets, the recurrent construction, Riesz
//!   decomposition, potentials and lattice operations.
//! * [`martin`]: Martin kernels, kernel limits, emitter extremals, h-transforms
//!   and boundary path sampling.
//!
//! All numerical code is generic over [`Scalar`]; [`Rational`] gives exact
//! arithmetic and `f64` the fast path.

pub mod error;
mod explore;
pub mod graph;
pub mod harmonic;
pub mod invariants;
pub mod martin;
pub mod scalar;
pub mod series;

pub use error::{Error, Result};
pub use graph::{
    classify_vertices, hereditary_saturated_closure, is_cofinal, nonwandering_set, parse_graph, AssumptionReport,
    DeclaredMetadata, FamilySpec, FiniteGraph, GraphDocument, GraphSource, Mode, NwKind, OutNeighborhood, Verdict,
    VertexId,
};
pub use harmonic::{
    certify_no_solution, check_vector, check_vector_on, exact_lambda0, extend_from_hereditary, lattice_meet,
    potential_hat, recurrent_harmonic, riesz_decompose, solve_finite, ConeDescription, HarmonicVector,
    NoSolutionCertificate, PointLabel, RieszPair, SweepOrder, VectorKind,
};
pub use martin::{
    emitter_extremal, family_targets, h_transform, kernel_limit, martin_kernel, sample_boundary_paths,
    KernelLimitReport, KernelValue, SampleConfig, StochasticKernel,
};
pub use scalar::Scalar;
pub use series::{
    beta0_estimate, classify_recurrence, first_passage, green_series, power_entry, vere_jones_residual, Beta0Report,
    Recurrence, RecurrenceVerdict, SeriesEstimate, TruncationConfig,
};

/// Exact arbitrary-precision rationals.
pub type Rational = num_rational::BigRational;

/// Graph source with exact rational weights.
pub type ExactGraph = GraphSource<Rational>;
/// Graph source with `f64` weights.
pub type FloatGraph = GraphSource<f64>;
/// Finite table with exact rational weights.
pub type ExactFiniteGraph = FiniteGraph<Rational>;
/// Finite table with `f64` weights.
pub type FloatFiniteGraph = FiniteGraph<f64>;
/// Almost harmonic vector with exact entries.
pub type ExactVector = HarmonicVector<Rational>;
/// Almost harmonic vector with `f64` entries.
pub type FloatVector = HarmonicVector<f64>;
