//! Error type shared by all modules.
//!
//! Variants are grouped by how callers are expected to react:
//! configuration/geometry problems are permanent (a different input is
//! needed), while `NoContraction` / `SeriesNotConverged` are tied to one
//! value of the spectral parameter and a retry deeper in the sector (or on a
//! finer mesh) can succeed. `OracleUnavailable` marks a *check* that cannot
//! run, never a defect of the solution being checked.

use thiserror::Error;

/// All failure modes of the library.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A mesh needs at least 2 cells (3 nodes) to carry a piecewise-linear
    /// function with an interior node.
    #[error("mesh must have at least 2 cells, got {0}")]
    TooFewCells(usize),

    /// Two grid functions that must share a mesh do not.
    #[error("mesh mismatch: {0} vs {1} nodes")]
    MeshMismatch(usize, usize),

    /// Anchor or evaluation point outside the domain.
    #[error("point {0} outside [0, 1]")]
    OutOfDomain(f64),

    /// `L_μ` norms are defined for `μ ∈ [1, ∞]` only.
    #[error("Hoelder exponent must satisfy mu >= 1, got {0}")]
    InvalidExponent(f64),

    /// A weight function must stay above its positivity floor at every node.
    #[error("non-positive weight: node {index} has value {value:e}, floor {floor:e}")]
    NonPositiveWeight {
        /// Offending node index.
        index: usize,
        /// Value found there.
        value: f64,
        /// Required lower bound.
        floor: f64,
    },

    /// The diagonal matrix `B` must have all entries nonzero.
    #[error("zero diagonal entry in B at index {0}")]
    ZeroDiagonalInB(usize),

    /// Mismatched dimensions between components of one problem.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A hand-built sector on which `Re((b_k − b_l)λ)` is unbounded below,
    /// so no shift constant `h` exists.
    #[error("invalid sector geometry: {0}")]
    InvalidSectorGeometry(String),

    /// Sector index outside `1..=J`.
    #[error("sector index {0} out of range 1..={1}")]
    SectorIndex(usize, usize),

    /// The coefficient tail `C(x, λ) = Σ λ^{−k} C_k` is singular at `λ = 0`.
    #[error("lambda = 0 is outside the domain of the coefficient tail")]
    ZeroLambda,

    /// An exponent with real part beyond `h·p(1)` was about to be evaluated;
    /// the spectral parameter lies outside the validated domain.
    #[error(
        "exponent bound violated: Re = {re:.6} exceeds h*p(1) = {bound:.6} \
         (lambda outside the validated domain)"
    )]
    ExponentBound {
        /// Real part that was requested.
        re: f64,
        /// Admissible bound `h·p(1)` (plus tolerance).
        bound: f64,
    },

    /// The measured geometric ratio of successive iterates reached the
    /// contraction cap; the series is not trustworthy at this `λ`.
    #[error("no contraction at this lambda: measured |V^2| ratio {ratio:.4} >= cap {cap}")]
    NoContraction {
        /// Largest measured ratio `‖z^{ν+2}‖/‖z^ν‖`.
        ratio: f64,
        /// Configured cap.
        cap: f64,
    },

    /// The iteration hit its cap before the terms fell below tolerance.
    #[error("series not converged after {iterations} iterations (last term {last_term:.3e})")]
    SeriesNotConverged {
        /// Iterations performed.
        iterations: usize,
        /// Sup-norm of the last computed term.
        last_term: f64,
    },

    /// A closed-form reference cannot be produced for this input
    /// (e.g. a defective coefficient matrix); the check is skipped.
    #[error("oracle unavailable: {0}")]
    OracleUnavailable(String),

    /// Sweep moduli must increase strictly.
    #[error("sweep moduli must be strictly increasing")]
    ModuliNotIncreasing,

    /// A dense linear solve met a numerically singular matrix.
    #[error("numerically singular matrix in {0}")]
    SingularMatrix(&'static str),

    /// An internal mathematical identity failed beyond tolerance; indicates
    /// a bug, reported with context rather than panicking.
    #[error("internal identity violated: {0}")]
    IdentityViolated(String),
}

impl Error {
    /// True for failures tied to one spectral-parameter value: a retry with
    /// different `λ` (or finer mesh / more iterations) may succeed.
    pub fn is_convergence_failure(&self) -> bool {
        matches!(
            self,
            Error::NoContraction { .. } | Error::SeriesNotConverged { .. }
        )
    }
}
