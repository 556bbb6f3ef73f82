//! Vanishing-weight optimal design in linear elasticity, at desk scale.
//!
//! This crate implements three tightly related variational problems and the
//! numerics needed to cross-validate them against each other:
//!
//! 1. **Finite-λ relaxed design problem.** Minimize `∫ h_λ(σ) dx` over stress
//!    fields `σ` satisfying the equilibrium constraint `−div σ = g`. The
//!    density `h_λ` is the div-quasiconvex envelope of
//!    `h̃_λ(σ) = λ^{-1/2}|σ|² + λ^{1/2}` (with `h̃_λ(0) = 0`); closed branch
//!    formulas in two and three dimensions are evaluated in
//!    [`integrands`].
//! 2. **Its λ → ∞ limit.** Minimize `∫ h(σ)` under the same constraint,
//!    where `h = 2ρ⁽²⁾` (n = 2) resp. `4ρ⁽³⁾` (n = 3) is the pointwise limit
//!    of `h_λ`; `ρ⁽ⁿ⁾` is a spectral gauge (in 2D the nuclear norm).
//!    This is the convex "Michell" continuum problem.
//! 3. **Discrete Michell trusses.** Ground-structure weight minimization
//!    `min Σ |w_ij| ℓ_ij` subject to nodal equilibrium — a linear program
//!    (Michell 1904; see also Bendsøe–Sigmund, *Topology Optimization*).
//!
//! The [`lab`] module turns the convergence statements connecting the three
//! problems into reproducible experiments: pointwise `h_λ → h` gaps with the
//! exact `O(λ^{-1/2})` rate, mollified-truss recovery sequences with the
//! `ε(λ)` schedule of [`load::epsilon_schedule`], and Γ-convergence sweeps
//! where a ground-structure LP, a primal-dual continuum solver
//! (Chambolle–Pock 2011), and a nonconvex proximal scheme must agree.
//!
//! Everything is deterministic: fixed seeds (`rand_chacha`), single-threaded
//! reductions in fixed order, and CSV serialization with pinned formatting.

pub mod tol;

pub mod tensor;

pub mod integrands;

pub mod prox;

pub mod grid;

mod conv;

mod linalg;

pub mod field2;

pub mod field3;

pub mod load;

pub mod hm1;

pub mod truss;

pub mod lp;

pub mod solvers;

pub mod report;

pub mod svg;

pub mod lab;

pub use conv::PadMode;
pub use grid::{Grid2, Grid3};
pub use report::{Check, ExperimentReport};
pub use tensor::{SymTensor2, SymTensor3};

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A plain-text instance or config file failed to parse.
    #[error("{path}:{line}: {msg}")]
    Parse {
        /// File the error was found in.
        path: String,
        /// 1-based line number.
        line: usize,
        /// What went wrong.
        msg: String,
    },
    /// The linear-program solver could not produce an optimal basic solution.
    #[error("linear program: {0}")]
    Lp(String),
    /// An iterative numerical routine failed to reach its tolerance.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// Filesystem error while reading or writing artifacts.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Version string recorded in every [`ExperimentReport`] for provenance.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
