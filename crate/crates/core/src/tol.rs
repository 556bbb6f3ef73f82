//! Centralized numerical tolerances.
//!
//! Every acceptance-grade comparison in the crate pins its tolerance here,
//! with a note on where the number comes from. Tests reference these
//! constants instead of re-declaring ad-hoc ones, so a tolerance can only be
//! loosened in one reviewable place.

/// Relative slack for identities that are exact in real arithmetic
/// (spectral reconstruction, algebraic branch identities, adjointness).
/// Generous versus f64 roundoff (~2.2e-16 per op) while still catching any
/// structural error, which shows up at O(1).
pub const EXACT: f64 = 1e-12;

/// Absolute-plus-relative slack for the pointwise inequality chain
/// `0 ≤ H ≤ h_λ ≤ h̃_λ`. The chain is exact mathematics; 1e-9 absorbs
/// eigenvalue roundoff amplified by λ^{1/2} ≤ 100 at the sampled λ.
pub const CHAIN_SLACK: f64 = 1e-9;

/// Agreement of the two closed-form branch expressions of `h_λ` evaluated at
/// a point scaled exactly onto the branch boundary. The identities are
/// algebraic; observed disagreement is a few ulps (≲1e-13 at λ ≤ 1e4).
pub const BRANCH_CONTINUITY: f64 = 1e-9;

/// Lower slack for the finite-difference monotonicity check
/// `∂h_λ/∂|τ₁| ≥ 0` in the 3D third branch: central differences with step
/// `1e-5·scale` carry O(step²) truncation plus cancellation noise.
pub const MONOTONE_SLACK: f64 = 1e-8;

/// Relative tolerance for the exact 2D convergence-gap identity
/// `h − h_λ = 2 λ^{-1/2} |τ₁ τ₂|` on low-branch samples. The sampler keeps
/// `|τ₁τ₂| ≥ 0.05·ρ²` and `ρ ≥ 0.3√λ`, which bounds the cancellation error
/// of the left-hand side by ~70 ulps ≈ 1.5e-14 relative.
pub const GAP_2D_REL: f64 = 1e-12;

/// Allowed deviation of the fitted log-log slope of the 3D gap
/// `h − h_λ ∝ λ^{-1/2}` from −1/2 over λ ∈ {1e2..1e6}.
pub const SLOPE_3D: f64 = 0.02;

/// Proximal maps must come within this of the brute-force grid oracle's
/// objective value (the oracle itself is refined to ~1e-8).
pub const PROX_ORACLE: f64 = 1e-6;

/// Discrete integration by parts `⟨div σ, u⟩ = −⟨σ, e(u)⟩` is exact by
/// construction of the staggered stencils; tolerance is relative to
/// `‖σ‖·‖u‖`.
pub const ADJOINT: f64 = 1e-12;

/// Hand-computed optimal weights of the desk truss instances.
pub const TRUSS_WEIGHT: f64 = 1e-8;

/// Primal-dual objective gap of the truss LP certificate.
pub const LP_CERT_GAP: f64 = 1e-6;

/// Max-norm nodal equilibrium residual of an LP-optimal design.
pub const EQUILIBRIUM_RESIDUAL: f64 = 1e-8;

/// Dual feasibility slack `|Bᵀy| ≤ ℓ + LP_DUAL_FEAS` per bar.
pub const LP_DUAL_FEAS: f64 = 1e-9;

/// Relative floor in the recovery-experiment bound
/// `|E_λ − 2W| ≤ max(3·ε(λ), RECOVERY_REL·2W)`.
pub const RECOVERY_REL: f64 = 0.05;

/// Continuum limit solver must match the known optimal value within 2%
/// (discretization + first-order solver allowance).
pub const LIMIT_REL: f64 = 0.02;

/// Finite-λ solver at λ = 1e4 must sit within 5% of the limit value.
pub const FINITE_LAMBDA_REL: f64 = 0.05;

/// Rasterized-truss energy under the limit density vs `2·weight`.
pub const RASTER_ENERGY_REL: f64 = 0.05;

/// Competitor slack: the continuum solver may not exceed the h-energy of any
/// feasible competitor by more than this relative margin.
pub const COMPETITOR_REL: f64 = 0.02;

/// Analytic total-force balance required of a `LoadSpec`, and preservation
/// of total integral under interior mollification.
pub const BALANCE: f64 = 1e-10;

/// Relative residual target for inner conjugate-gradient solves that feed
/// exact-grade checks (elastic warm start, σ-subproblems).
pub const CG_TOL: f64 = 1e-11;

/// Relative residual for the (Id − Δ_h)⁻¹ solve inside the discrete H⁻¹
/// diagnostic. The diagnostic only feeds trend checks, so 1e-8 keeps the
/// conjugate-gradient iteration count modest at 256² while staying far below
/// the ~1e-2 effects being measured.
pub const HM1_CG_TOL: f64 = 1e-8;

/// Default constraint-residual tolerance of the first-order continuum
/// solvers (relative to `max(‖g‖, 1)`).
pub const SOLVER_RESIDUAL: f64 = 1e-6;

/// Scaling constant in `h_λ(sA) ≤ C·s·h_λ(A)` for `0 < s ≤ 1`. A global
/// branch-by-branch analysis gives C = 3 (low/low ≤ 4/3, low-after-scaling
/// vs high ≤ √2, high/high ≤ 3s for ρ ≥ √λ ≥ s·ρ); 3.5 leaves roundoff room.
/// Note the bound fails for h̃_λ itself, which jumps at 0.
pub const SCALING_C: f64 = 3.5;

/// Cross-section flux of a rasterized isolated bar reproduces `w·e⊗e`.
pub const CROSS_SECTION: f64 = 1e-8;

/// Descent safeguard of the finite-λ solver: the returned energy never
/// exceeds the initializer's energy by more than this absolute slack.
pub const DESCENT_SLACK: f64 = 1e-8;

/// Relative tolerance for the roof instance's continuum limit value against
/// `2·(LP weight)`: the point loads enter through a mollified competitor,
/// so the band is wider than the uniaxial [`LIMIT_REL`].
pub const LIMIT_ROOF_REL: f64 = 0.05;
