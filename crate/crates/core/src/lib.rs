//! Controlled K-fusion frames over finite-dimensional Hilbert C*-modules.
//!
//! The algebra is the commutative C*-algebra `A = C^d` with pointwise
//! operations; the module is the free module `H = A^n`. Everything block
//! decomposes over the `d` algebra components, so each structure stores one
//! dense complex matrix (or vector) per component. On top of that sit
//! weighted families of submodules with two positive invertible control
//! operators and a range operator `K`, their analysis/synthesis/frame
//! operators, optimal algebra-valued frame bounds, reconstruction, and
//! checkable certificates for erasure and perturbation robustness.

pub mod algebra;
pub mod certificates;
pub mod frames;
pub mod instances;
pub mod io;
mod linalg;
pub mod module;
pub mod operators;

pub use algebra::{Algebra, AlgebraElement};
pub use certificates::{Certificate, EvidenceLabel, Hypothesis, PerturbationData};
pub use frames::{BoundsReport, FrameSystem, MembershipClass};
pub use module::{ModuleVector, SequenceVector, Submodule};
pub use operators::ModuleOperator;

/// Default tolerance for positivity, invertibility and rank decisions.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Errors shared by every layer of the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("algebra descriptor mismatch: d = {0} vs d = {1}")]
    DescriptorMismatch(usize, usize),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("element is not invertible (component {component} has modulus {modulus:.3e})")]
    NotInvertible { component: usize, modulus: f64 },

    #[error("element is not positive")]
    NotPositive,

    #[error("operator is singular")]
    SingularOperator,

    #[error("operator is neither injective nor surjective")]
    NeitherCase,

    #[error("frame system validation failed: {0}")]
    ValidationFailed(String),

    #[error("C'* pi_W C is not positive semidefinite (worst eigenvalue {0:.3e})")]
    CrossNotPositive(f64),

    #[error("frame operator is singular (smallest eigenvalue {0:.3e})")]
    SingularFrameOperator(f64),

    #[error("hypothesis failed: {0}")]
    HypothesisFailed(String),

    #[error("range inclusion failed: {0}")]
    InclusionFailed(String),

    #[error("adjoint ranges are not orthogonal (overlap {0:.3e})")]
    OrthogonalityFailed(f64),

    #[error("system is not a frame for the given operator: {0}")]
    NotAFrame(String),

    #[error("bad index map: {0}")]
    BadIndexMap(String),

    #[error("index {0} out of range (family has {1} submodules)")]
    IndexOutOfRange(usize, usize),

    #[error("instance generation failed: {0}")]
    GenerationFailed(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
