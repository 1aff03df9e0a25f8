//! Fundamental solution matrices of first-order ODE systems
//! `y′ = λ ρ(x) B y + A(x) y + C(x, λ) y` on `[0, 1]` for a large complex
//! spectral parameter `λ`, built by successive approximation against the
//! oscillatory factor.
//!
//! The solution matrix is kept in factored form `Y = M · Z · E` where
//! `E = diag{exp(b_j λ p(x))}` with `p(x) = ∫₀ˣ ρ`: the exponential factor is
//! stored symbolically (as the exponents themselves), so nothing overflows no
//! matter how large `|λ|` gets, `M` solves the diagonal part of the system
//! exactly, and `Z → I` as `λ → ∞` inside a fixed sector.
//!
//! Module map:
//!
//! - [`grid`] — piecewise-linear functions on a shared uniform mesh, the
//!   oscillatory cell integral, `L_μ` norms;
//! - [`sectors`] — splitting the `λ` plane into sectors on which one fixed
//!   ordering of the exponents `b_j` is monotone, and extending a sector by a
//!   shifted apex;
//! - [`model`] — the diagonal/model part: splitting `A` into `D + Q`,
//!   solving `M′ = D M` exactly, and the conjugated remainder;
//! - [`solver`] — the Volterra successive-approximation iteration for `Z`
//!   with anchored, overflow-safe oscillatory quadrature, plus the
//!   first-order correction functionals and their grid statistics;
//! - [`reduction`] — rewriting one even-order scalar differential expression
//!   (distributional coefficients allowed) as such a first-order system and
//!   assembling the fundamental solutions of the original problem;
//! - [`verify`] — independent cross-checks: a direct Picard engine, a
//!   constant-coefficient closed-form oracle, determinant and ODE residuals.

pub mod error;
pub mod grid;
pub(crate) mod linalg;
pub mod model;
pub mod sectors;
pub mod verify;

pub use error::Error;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
