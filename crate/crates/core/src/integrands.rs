//! Spectral integrands: `ρ⁽ⁿ⁾`, `h̃_λ`, its div-quasiconvex envelope `h_λ`,
//! the λ → ∞ limit density `h`, and the wave-cone lower bound `H`.
//!
//! Every density here is orthogonally invariant, so each is a function of
//! the eigenvalues `σ₁, …, σₙ` ordered by absolute value ascending.
//! Functions with an `_eigs` suffix take raw eigenvalues (any order, any
//! signs) and sort internally; the tensor-level wrappers extract eigenvalues
//! first. Throughout, for sorted absolute values `a ≤ b (≤ c)` we write
//! `s = a + b` and `ρ` for the dimension's spectral gauge.
//!
//! # The densities
//!
//! * `h̃_λ(τ) = λ^{-1/2}|τ|² + λ^{1/2}` for `τ ≠ 0`, and `0` at `τ = 0`.
//!   The jump at the origin is the "pay for any material at all" term; it is
//!   what relaxation removes.
//! * `h_λ = Q_div h̃_λ` has closed branch forms:
//!   - **n = 2**: `λ^{-1/2}|τ|² + λ^{1/2}` where `ρ⁽²⁾ = a + b ≥ √λ`
//!     ("high"), else `2(ρ⁽²⁾ − λ^{-1/2}·ab)` ("low", note `ab = |det τ|`).
//!   - **n = 3**: `λ^{-1/2}|τ|² + λ^{1/2}` where `2ρ⁽³⁾ ≥ √λ` ("high");
//!     otherwise `2(√(s²+c²) − λ^{-1/2}·ab)` when `s ≤ c` ("middle") and
//!     `√2(s+c) + λ^{-1/2}(½|τ|² − (ab+ac+bc))` when `s > c` ("low").
//! * `h = lim_{λ→∞} h_λ` equals `2ρ⁽²⁾` (n = 2) and `4ρ⁽³⁾` (n = 3).
//! * `H⁽²⁾ = 2b`, `H⁽³⁾ = 2√(b² + c²)`: the restriction of `h` to the
//!   div-wave-cone (rank ≤ n−1, i.e. `a = 0`), extended as a convex function
//!   of the ordered spectrum. `0 ≤ H ≤ h_λ ≤ h̃_λ` pointwise.
//!
//! # Branch bookkeeping (exact identities)
//!
//! The branch formulas agree identically on their shared boundaries, which
//! the continuity tests exploit by evaluating both closed forms at the same
//! boundary point:
//!
//! * 2D, `a + b = √λ`: `a² + b² = λ − 2ab`, so the high form equals
//!   `2√λ − 2λ^{-1/2}ab`, the low form.
//! * 3D middle↔high, `√(s²+c²) = √λ`: `a²+b²+c² = s²+c² − 2ab = λ − 2ab`
//!   collapses the high form onto the middle one.
//! * 3D low↔high, `s + c = √(2λ)`: with `|τ|² + 2(ab+ac+bc) = (s+c)²`
//!   both forms equal `λ^{-1/2}|τ|² + √λ`.
//! * 3D middle↔low, `s = c`: both give `2(√2·c − λ^{-1/2}ab)` — substitute
//!   `c = a + b` into the low form.
//!
//! The envelope property `h_λ ≤ h̃_λ` is also exact algebra:
//! `h̃ − h_low^{2D} = λ^{-1/2}(ρ−√λ)²`,
//! `h̃ − h_mid^{3D} = λ^{-1/2}(√(s²+c²)−√λ)²`, and
//! `h̃ − h_low^{3D} = ½λ^{-1/2}(s+c−√(2λ))²`.
//!
//! # The 3D limit constant
//!
//! As λ → ∞ the middle branch tends to `2√(s²+c²) = 4·½√(s²+c²)` and the
//! low branch to `√2(s+c) = 4·(s+c)/(2√2)`; both are `4ρ⁽³⁾` on their
//! regions, so `h(τ) = 4ρ⁽³⁾(τ)` is the pointwise limit. Consistently, its
//! wave-cone restriction (`a = 0`, forcing `s = b ≤ c`) is
//! `4·½√(b²+c²) = H⁽³⁾(τ)`, and the convergence gap `h − h_λ` then decays
//! exactly like `λ^{-1/2}`, which the convergence experiments measure.

use crate::tensor::{sort_abs2, sort_abs3, SymTensor2, SymTensor3};

/// 2D branch selector for [`h_lambda2_branch`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch2 {
    /// `ρ⁽²⁾ ≥ √λ`: the envelope coincides with `h̃_λ`.
    High,
    /// `ρ⁽²⁾ < √λ`: `2(ρ⁽²⁾ − λ^{-1/2}|det τ|)`.
    Low,
}

/// 3D branch selector for [`h_lambda3_branch`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch3 {
    /// `2ρ⁽³⁾ ≥ √λ`: coincides with `h̃_λ`.
    High,
    /// `2ρ⁽³⁾ < √λ`, `a + b ≤ c`: one dominant eigenvalue.
    Middle,
    /// `2ρ⁽³⁾ < √λ`, `a + b > c`: balanced spectrum.
    Low,
}

#[inline]
fn abs2(e: [f64; 2]) -> [f64; 2] {
    let s = sort_abs2(e);
    [s[0].abs(), s[1].abs()]
}

#[inline]
fn abs3(e: [f64; 3]) -> [f64; 3] {
    let s = sort_abs3(e);
    [s[0].abs(), s[1].abs(), s[2].abs()]
}

/// `ρ⁽²⁾` from eigenvalues: `|σ₁| + |σ₂|` (the nuclear norm).
pub fn rho2_eigs(e: [f64; 2]) -> f64 {
    e[0].abs() + e[1].abs()
}

/// `ρ⁽³⁾` from eigenvalues: `½√((a+b)² + c²)` when `a + b ≤ c`, else
/// `(a+b+c)/(2√2)`; continuous at `a + b = c`.
pub fn rho3_eigs(e: [f64; 3]) -> f64 {
    let [a, b, c] = abs3(e);
    let s = a + b;
    if s <= c {
        0.5 * s.hypot(c)
    } else {
        (s + c) / (2.0 * std::f64::consts::SQRT_2)
    }
}

/// `ρ⁽²⁾(τ)`.
pub fn rho2(t: &SymTensor2) -> f64 {
    rho2_eigs(t.eigvals())
}

/// `ρ⁽³⁾(τ)`.
pub fn rho3(t: &SymTensor3) -> f64 {
    rho3_eigs(t.eigvals())
}

/// Compliance-style integrand `F_λ(ξ) = |ξ|² + λ` for `ξ ≠ 0`, `0` at `0`
/// (2D). Satisfies `h̃_λ = λ^{-1/2}·F_λ` exactly.
pub fn compliance_integrand2(t: &SymTensor2, lambda: f64) -> f64 {
    debug_assert!(lambda > 0.0);
    let n2 = t.frob2();
    if n2 == 0.0 {
        0.0
    } else {
        n2 + lambda
    }
}

/// 3D version of [`compliance_integrand2`].
pub fn compliance_integrand3(t: &SymTensor3, lambda: f64) -> f64 {
    debug_assert!(lambda > 0.0);
    let n2 = t.frob2();
    if n2 == 0.0 {
        0.0
    } else {
        n2 + lambda
    }
}

/// `h̃_λ(τ) = λ^{-1/2}|τ|² + √λ` for `τ ≠ 0`, `0` at `τ = 0` (2D).
pub fn h_tilde2(t: &SymTensor2, lambda: f64) -> f64 {
    lambda.sqrt().recip() * compliance_integrand2(t, lambda)
}

/// 3D version of [`h_tilde2`].
pub fn h_tilde3(t: &SymTensor3, lambda: f64) -> f64 {
    lambda.sqrt().recip() * compliance_integrand3(t, lambda)
}

/// Which 2D branch of `h_λ` the spectrum falls in.
pub fn branch2(e: [f64; 2], lambda: f64) -> Branch2 {
    if rho2_eigs(e) >= lambda.sqrt() {
        Branch2::High
    } else {
        Branch2::Low
    }
}

/// Evaluate one specific 2D branch formula (regardless of region).
pub fn h_lambda2_branch(e: [f64; 2], lambda: f64, branch: Branch2) -> f64 {
    let [a, b] = abs2(e);
    let sl = lambda.sqrt();
    match branch {
        Branch2::High => (a * a + b * b) / sl + sl,
        Branch2::Low => 2.0 * (a + b - a * b / sl),
    }
}

/// `h_λ` from 2D eigenvalues.
pub fn h_lambda2_eigs(e: [f64; 2], lambda: f64) -> f64 {
    debug_assert!(lambda > 0.0);
    h_lambda2_branch(e, lambda, branch2(e, lambda))
}

/// `h_λ(τ)` in 2D.
pub fn h_lambda2(t: &SymTensor2, lambda: f64) -> f64 {
    h_lambda2_eigs(t.eigvals(), lambda)
}

/// Which 3D branch of `h_λ` the spectrum falls in.
pub fn branch3(e: [f64; 3], lambda: f64) -> Branch3 {
    let [a, b, c] = abs3(e);
    if 2.0 * rho3_eigs(e) >= lambda.sqrt() {
        Branch3::High
    } else if a + b <= c {
        Branch3::Middle
    } else {
        Branch3::Low
    }
}

/// Evaluate one specific 3D branch formula (regardless of region).
pub fn h_lambda3_branch(e: [f64; 3], lambda: f64, branch: Branch3) -> f64 {
    let [a, b, c] = abs3(e);
    let sl = lambda.sqrt();
    match branch {
        Branch3::High => (a * a + b * b + c * c) / sl + sl,
        Branch3::Middle => 2.0 * ((a + b).hypot(c) - a * b / sl),
        Branch3::Low => {
            let frob2 = a * a + b * b + c * c;
            let pairs = a * b + a * c + b * c;
            std::f64::consts::SQRT_2 * (a + b + c) + (0.5 * frob2 - pairs) / sl
        }
    }
}

/// `h_λ` from 3D eigenvalues.
pub fn h_lambda3_eigs(e: [f64; 3], lambda: f64) -> f64 {
    debug_assert!(lambda > 0.0);
    h_lambda3_branch(e, lambda, branch3(e, lambda))
}

/// `h_λ(τ)` in 3D.
pub fn h_lambda3(t: &SymTensor3, lambda: f64) -> f64 {
    h_lambda3_eigs(t.eigvals(), lambda)
}

/// Limit density from 2D eigenvalues: `2ρ⁽²⁾`.
pub fn h_limit2_eigs(e: [f64; 2]) -> f64 {
    2.0 * rho2_eigs(e)
}

/// Limit density `h(τ) = 2ρ⁽²⁾(τ)` in 2D.
pub fn h_limit2(t: &SymTensor2) -> f64 {
    h_limit2_eigs(t.eigvals())
}

/// Limit density from 3D eigenvalues: `4ρ⁽³⁾` (see module docs for why the
/// constant is 4).
pub fn h_limit3_eigs(e: [f64; 3]) -> f64 {
    4.0 * rho3_eigs(e)
}

/// Limit density `h(τ) = 4ρ⁽³⁾(τ)` in 3D.
pub fn h_limit3(t: &SymTensor3) -> f64 {
    h_limit3_eigs(t.eigvals())
}

/// Wave-cone bound from 2D eigenvalues: `H⁽²⁾ = 2|σ₂|` (largest absolute
/// eigenvalue).
pub fn h_wavecone2_eigs(e: [f64; 2]) -> f64 {
    2.0 * e[0].abs().max(e[1].abs())
}

/// `H⁽²⁾(τ)`.
pub fn h_wavecone2(t: &SymTensor2) -> f64 {
    h_wavecone2_eigs(t.eigvals())
}

/// Wave-cone bound from 3D eigenvalues: `H⁽³⁾ = 2√(σ₂² + σ₃²)` on the
/// |·|-ordered spectrum.
pub fn h_wavecone3_eigs(e: [f64; 3]) -> f64 {
    let [_, b, c] = abs3(e);
    2.0 * b.hypot(c)
}

/// `H⁽³⁾(τ)`.
pub fn h_wavecone3(t: &SymTensor3) -> f64 {
    h_wavecone3_eigs(t.eigvals())
}

/// Selector for the pointwise density used by the field energy quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Density {
    /// Unrelaxed compliance-plus-volume integrand `h̃_λ`.
    HTilde(f64),
    /// Div-quasiconvex envelope `h_λ`.
    HLambda(f64),
    /// Vanishing-weight limit density `h`.
    HLimit,
    /// Wave-cone lower bound `H`.
    Wavecone,
}

impl Density {
    /// Evaluate on a 2D tensor.
    pub fn eval2(&self, t: &SymTensor2) -> f64 {
        match *self {
            Density::HTilde(l) => h_tilde2(t, l),
            Density::HLambda(l) => h_lambda2(t, l),
            Density::HLimit => h_limit2(t),
            Density::Wavecone => h_wavecone2(t),
        }
    }

    /// Evaluate on a 3D tensor.
    pub fn eval3(&self, t: &SymTensor3) -> f64 {
        match *self {
            Density::HTilde(l) => h_tilde3(t, l),
            Density::HLambda(l) => h_lambda3(t, l),
            Density::HLimit => h_limit3(t),
            Density::Wavecone => h_wavecone3(t),
        }
    }
}
