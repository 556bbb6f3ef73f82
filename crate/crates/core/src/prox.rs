//! Proximal maps of the limit density `h` and of the relaxed density `h_λ`.
//!
//! `prox_{t·f}(τ) = argmin_y ½|y−τ|² + t·f(y)` (Frobenius metric). All four
//! densities here are orthogonally invariant, and the quadratic term is
//! minimized over each orbit by staying in the eigenframe of `τ`, so the
//! computation reduces to eigenvalue space; working with absolute values is
//! likewise free because flipping the sign of `y_i` away from `sign(τ_i)`
//! can only increase the quadratic while leaving the density unchanged.
//! (The eigenframe reduction for the nonconvex `h_λ` is a design assumption
//! guarded by brute-force oracle tests rather than proved.)
//!
//! Within the reduced problem — minimize over the nonnegative orthant with
//! `x = |eigenvalues|` sorted ascending — the minimizer either lies in the
//! open orthant, where it satisfies the first-order condition of one of the
//! closed branch formulas (`h_λ` is C¹ across its branch boundaries, so
//! interior kinks do not exist), or it lies on a coordinate face, where the
//! restricted density is again one of a small family (radial or scalar).
//! We therefore enumerate **every** stationary-point candidate of every
//! branch plus every face, evaluate the **true** objective at each, and keep
//! the argmin. No candidate is filtered by branch-validity checks: an
//! out-of-region stationary point simply loses the comparison, which makes
//! the enumeration robust to boundary ties.
//!
//! Candidate lists (nonnegative sorted eigenvalue space, `k = 2t/√λ`):
//!
//! * `prox h` 2D — per-eigenvalue soft threshold by `2t` (exact, since
//!   `h = 2(|y₁|+|y₂|)` separates).
//! * `prox h` 3D — branch `s>c`: uniform shift `y = x − √2·t`; branch
//!   `s≤c`: scalar-root system `1 = p²/(R+4t)² + q²/(R+2t)²` (strictly
//!   decreasing in `R`, bisected); faces: block soft threshold of
//!   `(x₂,x₃)` by `2t`, scalar soft threshold of `x₃`, origin.
//! * `prox h_λ` 2D — high shrink `x/(1+k)`; low-branch linear system
//!   `y₁(1) − k·y₂ = x₁ − 2t` (symmetric); face `(0, soft/shrink(x₂))`;
//!   origin.
//! * `prox h_λ` 3D — high shrink; balanced-branch linear solve; middle
//!   branch reduced to the scalar equation `Ψ(R) = s(R)² + y₃(R)² − R² = 0`
//!   with `s(R) = p/(1−k+4t/R)`, `y₃(R) = x₃R/(R+2t)` (all sign changes on
//!   a log grid are bisected — the problem is nonconvex, so several
//!   stationary radii can coexist); faces: radial soft/shrink of
//!   `(x₂,x₃)` (the restriction of `h_λ` to `y₁ = 0` is radial), scalar
//!   soft/shrink of `x₃`, origin; plus the input and the limit-prox output
//!   as cheap hedges.

use crate::integrands::{h_lambda2_eigs, h_lambda3_eigs, h_limit3_eigs};
use crate::tensor::{SymTensor2, SymTensor3};
use crate::{Error, Result};

const SQRT_2: f64 = std::f64::consts::SQRT_2;

fn check_step(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidInput(format!("prox step must be positive, got {t}")));
    }
    Ok(())
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidInput(format!("lambda must be positive, got {lambda}")));
    }
    Ok(())
}

#[inline]
fn soft(x: f64, thr: f64) -> f64 {
    (x - thr).max(0.0)
}

/// Objective `½|y−x|² + t·f(y)` in eigenvalue space (2D).
#[inline]
fn obj2(y: [f64; 2], x: [f64; 2], t: f64, f: impl Fn([f64; 2]) -> f64) -> f64 {
    let d0 = y[0] - x[0];
    let d1 = y[1] - x[1];
    0.5 * (d0 * d0 + d1 * d1) + t * f(y)
}

#[inline]
fn obj3(y: [f64; 3], x: [f64; 3], t: f64, f: impl Fn([f64; 3]) -> f64) -> f64 {
    let d: f64 = (0..3).map(|i| (y[i] - x[i]) * (y[i] - x[i])).sum();
    0.5 * d + t * f(y)
}

fn best2(cands: &[[f64; 2]], x: [f64; 2], t: f64, f: impl Fn([f64; 2]) -> f64) -> [f64; 2] {
    let mut best = cands[0];
    let mut val = obj2(best, x, t, &f);
    for &c in &cands[1..] {
        let v = obj2(c, x, t, &f);
        if v < val {
            val = v;
            best = c;
        }
    }
    best
}

fn best3(cands: &[[f64; 3]], x: [f64; 3], t: f64, f: impl Fn([f64; 3]) -> f64) -> [f64; 3] {
    let mut best = cands[0];
    let mut val = obj3(best, x, t, &f);
    for &c in &cands[1..] {
        let v = obj3(c, x, t, &f);
        if v < val {
            val = v;
            best = c;
        }
    }
    best
}

/// `prox_{t·h}` of the 2D limit density `h = 2ρ⁽²⁾`: eigenvalue soft
/// threshold by `2t` in the eigenframe of `τ`.
///
/// # Errors
/// Invalid `t` or non-finite `τ`.
pub fn prox_h_limit2(tau: &SymTensor2, t: f64) -> Result<SymTensor2> {
    check_step(t)?;
    let sp = tau.eigen()?;
    let y = [
        sp.vals[0].signum() * soft(sp.vals[0].abs(), 2.0 * t),
        sp.vals[1].signum() * soft(sp.vals[1].abs(), 2.0 * t),
    ];
    Ok(sp.reconstruct(y))
}

/// Stationary radius of the 3D limit-prox branch-1 system: the unique root
/// of `p²/(R+4t)² + q²/(R+2t)² = 1`, if any.
fn limit3_scalar_root(p: f64, q: f64, t: f64) -> Option<f64> {
    let g = |r: f64| {
        let gp = p / (r + 4.0 * t);
        let gq = q / (r + 2.0 * t);
        gp * gp + gq * gq
    };
    if g(0.0) <= 1.0 {
        return None; // no interior stationary point; faces/origin take over
    }
    let mut lo = 0.0f64;
    let mut hi = p.hypot(q); // G(hi) < 1, so the root is bracketed
    for _ in 0..120 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// `prox_{t·h}` of the 3D limit density `h = 4ρ⁽³⁾`, by candidate
/// enumeration in eigenvalue space (see module docs).
///
/// # Errors
/// Invalid `t` or non-finite `τ`.
pub fn prox_h_limit3(tau: &SymTensor3, t: f64) -> Result<SymTensor3> {
    check_step(t)?;
    let sp = tau.eigen()?;
    let x = [sp.vals[0].abs(), sp.vals[1].abs(), sp.vals[2].abs()];
    let sg = [
        if sp.vals[0] < 0.0 { -1.0 } else { 1.0 },
        if sp.vals[1] < 0.0 { -1.0 } else { 1.0 },
        if sp.vals[2] < 0.0 { -1.0 } else { 1.0 },
    ];
    let mut cands: Vec<[f64; 3]> = Vec::with_capacity(6);
    // Balanced branch (s > c): h = √2·t·Σy, uniform shift.
    cands.push([
        soft(x[0], SQRT_2 * t),
        soft(x[1], SQRT_2 * t),
        soft(x[2], SQRT_2 * t),
    ]);
    // Dominant branch (s ≤ c): scalar-root reduction.
    let p = x[0] + x[1];
    let q = x[2];
    if let Some(r) = limit3_scalar_root(p, q, t) {
        let s = p * r / (r + 4.0 * t);
        let shift = if r > 0.0 { 2.0 * t * s / r } else { 0.0 };
        cands.push([
            (x[0] - shift).max(0.0),
            (x[1] - shift).max(0.0),
            x[2] * r / (r + 2.0 * t),
        ]);
    }
    // Face y₁ = 0: h(0, y₂, y₃) = 2√(y₂²+y₃²), block soft threshold.
    let rn = x[1].hypot(x[2]);
    if rn > 0.0 {
        let f = soft(rn, 2.0 * t) / rn;
        cands.push([0.0, x[1] * f, x[2] * f]);
    }
    // Face y₁ = y₂ = 0: h(0,0,y₃) = 2y₃.
    cands.push([0.0, 0.0, soft(x[2], 2.0 * t)]);
    // Origin.
    cands.push([0.0, 0.0, 0.0]);
    let y = best3(&cands, x, t, h_limit3_eigs);
    Ok(sp.reconstruct([sg[0] * y[0], sg[1] * y[1], sg[2] * y[2]]))
}

/// `prox_{t·h_λ}` in 2D by candidate enumeration in eigenvalue space.
///
/// The objective is nonconvex (the low branch is concave-ish in the product
/// term), so all branch stationary points plus all faces are compared on the
/// true objective.
///
/// # Errors
/// Invalid `t`/`λ` or non-finite `τ`.
pub fn prox_h_lambda2(tau: &SymTensor2, t: f64, lambda: f64) -> Result<SymTensor2> {
    check_step(t)?;
    check_lambda(lambda)?;
    let sp = tau.eigen()?;
    let x = [sp.vals[0].abs(), sp.vals[1].abs()];
    let sg = [
        if sp.vals[0] < 0.0 { -1.0 } else { 1.0 },
        if sp.vals[1] < 0.0 { -1.0 } else { 1.0 },
    ];
    let k = 2.0 * t / lambda.sqrt();
    let mut cands: Vec<[f64; 2]> = Vec::with_capacity(7);
    // High branch: shrink.
    cands.push([x[0] / (1.0 + k), x[1] / (1.0 + k)]);
    // Low branch: y₁ = x₁ − 2t + k·y₂ and symmetrically.
    let den = 1.0 - k * k;
    if den.abs() > 1e-14 {
        let y0 = ((x[0] - 2.0 * t) + k * (x[1] - 2.0 * t)) / den;
        let y1 = ((x[1] - 2.0 * t) + k * (x[0] - 2.0 * t)) / den;
        cands.push([y0.max(0.0), y1.max(0.0)]);
    }
    // Face y₁ = 0: restriction is 2y₂ (low) or λ^{-1/2}y₂² + √λ (high).
    cands.push([0.0, soft(x[1], 2.0 * t)]);
    cands.push([0.0, x[1] / (1.0 + k)]);
    // Origin and the input as hedges.
    cands.push([0.0, 0.0]);
    cands.push(x);
    let f = |e: [f64; 2]| h_lambda2_eigs(e, lambda);
    let y = best2(&cands, x, t, f);
    Ok(sp.reconstruct([sg[0] * y[0], sg[1] * y[1]]))
}

/// All stationary radii of the 3D middle-branch prox system: sign changes of
/// `Ψ(R) = s(R)² + y₃(R)² − R²` on a log grid, bisected.
fn lambda3_middle_roots(p: f64, x3: f64, t: f64, k: f64) -> Vec<f64> {
    let s_of = |r: f64| {
        let den = 1.0 - k + 4.0 * t / r;
        if den == 0.0 {
            f64::INFINITY
        } else {
            p / den
        }
    };
    let psi = |r: f64| {
        let s = s_of(r);
        let y3 = x3 * r / (r + 2.0 * t);
        s * s + y3 * y3 - r * r
    };
    let scale = p.hypot(x3) + 2.0 * t + 1e-6;
    let mut roots = Vec::new();
    let mut r_prev = scale * (2.0f64).powi(-40);
    let mut v_prev = psi(r_prev);
    for e in -39..=6 {
        let r = scale * (2.0f64).powi(e);
        let v = psi(r);
        if v_prev.is_finite() && v.is_finite() && (v_prev <= 0.0) != (v <= 0.0) {
            let (mut lo, mut hi) = (r_prev, r);
            for _ in 0..90 {
                let mid = 0.5 * (lo + hi);
                if (psi(mid) <= 0.0) == (v_prev <= 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        r_prev = r;
        v_prev = v;
    }
    roots
}

/// `prox_{t·h_λ}` in 3D by candidate enumeration in eigenvalue space
/// (see module docs for the list).
///
/// # Errors
/// Invalid `t`/`λ` or non-finite `τ`.
pub fn prox_h_lambda3(tau: &SymTensor3, t: f64, lambda: f64) -> Result<SymTensor3> {
    check_step(t)?;
    check_lambda(lambda)?;
    let sp = tau.eigen()?;
    let x = [sp.vals[0].abs(), sp.vals[1].abs(), sp.vals[2].abs()];
    let sg = [
        if sp.vals[0] < 0.0 { -1.0 } else { 1.0 },
        if sp.vals[1] < 0.0 { -1.0 } else { 1.0 },
        if sp.vals[2] < 0.0 { -1.0 } else { 1.0 },
    ];
    let sl = lambda.sqrt();
    let k = 2.0 * t / sl;
    let mut cands: Vec<[f64; 3]> = Vec::with_capacity(14);
    // High branch shrink.
    cands.push([x[0] / (1.0 + k), x[1] / (1.0 + k), x[2] / (1.0 + k)]);
    // Balanced branch: linear solve via the eigenvalue sum S.
    let psum = x[0] + x[1] + x[2];
    let den_b = 1.0 - t / sl;
    if den_b.abs() > 1e-12 {
        let s_tot = (psum - 3.0 * SQRT_2 * t) / den_b;
        let mk = |xi: f64| ((xi - SQRT_2 * t + t / sl * s_tot) / (1.0 + k)).max(0.0);
        cands.push([mk(x[0]), mk(x[1]), mk(x[2])]);
    }
    // Middle branch: scalar-root reduction; several roots may exist.
    let p = x[0] + x[1];
    let d = (x[0] - x[1]) / (1.0 + k);
    for r in lambda3_middle_roots(p, x[2], t, k) {
        let den = 1.0 - k + 4.0 * t / r;
        if den == 0.0 {
            continue;
        }
        let s = p / den;
        let y3 = x[2] * r / (r + 2.0 * t);
        cands.push([
            (0.5 * (s + d)).max(0.0),
            (0.5 * (s - d)).max(0.0),
            y3.max(0.0),
        ]);
    }
    // Face y₁ = 0: the restriction of h_λ is radial in (y₂, y₃)
    // (2R below the threshold, λ^{-1/2}R² + √λ above it).
    let rn = x[1].hypot(x[2]);
    if rn > 0.0 {
        let fsoft = soft(rn, 2.0 * t) / rn;
        cands.push([0.0, x[1] * fsoft, x[2] * fsoft]);
        cands.push([0.0, x[1] / (1.0 + k), x[2] / (1.0 + k)]);
    }
    // Face y₁ = y₂ = 0.
    cands.push([0.0, 0.0, soft(x[2], 2.0 * t)]);
    cands.push([0.0, 0.0, x[2] / (1.0 + k)]);
    // Origin, input, and the limit prox as hedges.
    cands.push([0.0, 0.0, 0.0]);
    cands.push(x);
    if let Some(r) = limit3_scalar_root(p, x[2], t) {
        let s = p * r / (r + 4.0 * t);
        let shift = if r > 0.0 { 2.0 * t * s / r } else { 0.0 };
        cands.push([
            (x[0] - shift).max(0.0),
            (x[1] - shift).max(0.0),
            x[2] * r / (r + 2.0 * t),
        ]);
    }
    let f = |e: [f64; 3]| h_lambda3_eigs(e, lambda);
    let y = best3(&cands, x, t, f);
    Ok(sp.reconstruct([sg[0] * y[0], sg[1] * y[1], sg[2] * y[2]]))
}

/// Prox objective value `½|y−τ|²_F + t·f(y)` for reporting/tests, with `f`
/// one of the crate densities evaluated on tensors.
pub fn prox_objective2(
    y: &SymTensor2,
    tau: &SymTensor2,
    t: f64,
    f: impl Fn(&SymTensor2) -> f64,
) -> f64 {
    0.5 * (*y - *tau).frob2() + t * f(y)
}

/// 3D version of [`prox_objective2`].
pub fn prox_objective3(
    y: &SymTensor3,
    tau: &SymTensor3,
    t: f64,
    f: impl Fn(&SymTensor3) -> f64,
) -> f64 {
    0.5 * (*y - *tau).frob2() + t * f(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrands::{h_lambda2, h_lambda3, h_limit2, h_limit2_eigs, h_limit3};
    use crate::tol;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Brute-force oracle: best objective over a sorted nonnegative grid,
    /// then shrinking local refinements. Independent of the candidate logic.
    fn oracle2(x: [f64; 2], t: f64, f: &dyn Fn([f64; 2]) -> f64, m: usize) -> f64 {
        let hx = f(x);
        let u = x[1].max(x[0]) + (2.0 * t * hx).sqrt() + 1e-9;
        let mut best = f64::INFINITY;
        let mut at = [0.0, 0.0];
        let step = u / m as f64;
        for i in 0..=m {
            for j in i..=m {
                let y = [i as f64 * step, j as f64 * step];
                let v = obj2(y, x, t, f);
                if v < best {
                    best = v;
                    at = y;
                }
            }
        }
        let mut width = step;
        for _ in 0..6 {
            let lo = [(at[0] - width).max(0.0), (at[1] - width).max(0.0)];
            let st = 2.0 * width / 14.0;
            for i in 0..=14 {
                for j in 0..=14 {
                    let y = [lo[0] + i as f64 * st, lo[1] + j as f64 * st];
                    let v = obj2(y, x, t, f);
                    if v < best {
                        best = v;
                        at = y;
                    }
                }
            }
            width = st;
        }
        best
    }

    fn oracle3(x: [f64; 3], t: f64, f: &dyn Fn([f64; 3]) -> f64, m: usize) -> f64 {
        let hx = f(x);
        let u = x[2].max(x[1]).max(x[0]) + (2.0 * t * hx).sqrt() + 1e-9;
        let mut best = f64::INFINITY;
        let mut at = [0.0; 3];
        let step = u / m as f64;
        for i in 0..=m {
            for j in i..=m {
                for l in j..=m {
                    let y = [i as f64 * step, j as f64 * step, l as f64 * step];
                    let v = obj3(y, x, t, f);
                    if v < best {
                        best = v;
                        at = y;
                    }
                }
            }
        }
        let mut width = step;
        for _ in 0..6 {
            let lo = [
                (at[0] - width).max(0.0),
                (at[1] - width).max(0.0),
                (at[2] - width).max(0.0),
            ];
            let st = 2.0 * width / 10.0;
            for i in 0..=10 {
                for j in 0..=10 {
                    for l in 0..=10 {
                        let y = [lo[0] + i as f64 * st, lo[1] + j as f64 * st, lo[2] + l as f64 * st];
                        let v = obj3(y, x, t, f);
                        if v < best {
                            best = v;
                            at = y;
                        }
                    }
                }
            }
            width = st;
        }
        best
    }

    #[test]
    fn limit2_examples() {
        // Soft threshold by 2t in the eigenframe.
        let y = prox_h_limit2(&SymTensor2::diag(3.0, -4.0), 1.0).unwrap();
        assert_relative_eq!(y.a11, 1.0, max_relative = tol::EXACT);
        assert_relative_eq!(y.a22, -2.0, max_relative = tol::EXACT);
        assert_relative_eq!(y.a12, 0.0, epsilon = 1e-15);
        // Threshold exceeds both eigenvalues.
        let z = prox_h_limit2(&SymTensor2::diag(0.5, 0.5), 1.0).unwrap();
        assert!(z.frob() <= 1e-15);
    }

    #[test]
    fn prox_consistency_small_t() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let tau = SymTensor2::new(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            );
            let t = 1e-6;
            let y = prox_h_limit2(&tau, t).unwrap();
            assert!((y - tau).frob() <= 10.0 * t, "prox should approach identity");
            let y2 = prox_h_lambda2(&tau, t, 10.0).unwrap();
            assert!((y2 - tau).frob() <= 10.0 * t);
        }
    }

    #[test]
    fn lambda_prox_zero_fixed_point() {
        let y = prox_h_lambda2(&SymTensor2::zero(), 0.3, 7.0).unwrap();
        assert_eq!(y.frob(), 0.0);
        let y3 = prox_h_lambda3(&SymTensor3::zero(), 0.3, 7.0).unwrap();
        assert_eq!(y3.frob(), 0.0);
    }

    #[test]
    fn lambda2_matches_brute_force_example() {
        // diag(10,10), t = 0.1, λ = 1.
        let tau = SymTensor2::diag(10.0, 10.0);
        let (t, lam) = (0.1, 1.0);
        let y = prox_h_lambda2(&tau, t, lam).unwrap();
        let ours = prox_objective2(&y, &tau, t, |s| h_lambda2(s, lam));
        let f = |e: [f64; 2]| h_lambda2_eigs(e, lam);
        let oracle = oracle2([10.0, 10.0], t, &f, 150);
        assert!(ours <= oracle + 1e-5, "ours={ours} oracle={oracle}");
        // The high-branch shrink x/(1+2t) = 8.333… is the winner here.
        assert_relative_eq!(y.a11, 10.0 / 1.2, max_relative = 1e-9);
    }

    #[test]
    fn limit2_random_vs_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..60 {
            let tau = SymTensor2::new(
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
            );
            let t = rng.gen_range(0.01..1.5);
            let y = prox_h_limit2(&tau, t).unwrap();
            let ours = prox_objective2(&y, &tau, t, h_limit2);
            let e = tau.eigvals();
            let oracle = oracle2([e[0].abs(), e[1].abs()], t, &h_limit2_eigs, 140);
            assert!(ours <= oracle + tol::PROX_ORACLE, "ours={ours} oracle={oracle}");
        }
    }

    #[test]
    fn limit3_random_vs_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..40 {
            let tau = SymTensor3::new(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            );
            let t = rng.gen_range(0.01..1.2);
            let y = prox_h_limit3(&tau, t).unwrap();
            let ours = prox_objective3(&y, &tau, t, h_limit3);
            let e = tau.eigvals();
            let oracle = oracle3([e[0].abs(), e[1].abs(), e[2].abs()], t, &h_limit3_eigs, 48);
            assert!(ours <= oracle + tol::PROX_ORACLE, "ours={ours} oracle={oracle}");
        }
    }

    #[test]
    fn lambda2_random_vs_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for _ in 0..60 {
            let tau = SymTensor2::new(
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
            );
            let t = rng.gen_range(0.01..1.5);
            let lam = [1.0, 100.0, 10000.0][rng.gen_range(0..3)];
            let y = prox_h_lambda2(&tau, t, lam).unwrap();
            let ours = prox_objective2(&y, &tau, t, |s| h_lambda2(s, lam));
            let e = tau.eigvals();
            let f = |v: [f64; 2]| h_lambda2_eigs(v, lam);
            let oracle = oracle2([e[0].abs(), e[1].abs()], t, &f, 140);
            assert!(
                ours <= oracle + tol::PROX_ORACLE,
                "ours={ours} oracle={oracle} t={t} lam={lam}"
            );
        }
    }

    #[test]
    fn lambda3_random_vs_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        for _ in 0..40 {
            let tau = SymTensor3::new(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            );
            let t = rng.gen_range(0.01..1.2);
            let lam = [1.0, 100.0, 10000.0][rng.gen_range(0..3)];
            let y = prox_h_lambda3(&tau, t, lam).unwrap();
            let ours = prox_objective3(&y, &tau, t, |s| h_lambda3(s, lam));
            let e = tau.eigvals();
            let f = |v: [f64; 3]| h_lambda3_eigs(v, lam);
            let oracle = oracle3([e[0].abs(), e[1].abs(), e[2].abs()], t, &f, 48);
            assert!(
                ours <= oracle + tol::PROX_ORACLE,
                "ours={ours} oracle={oracle} t={t} lam={lam}"
            );
        }
    }

    #[test]
    fn rejects_bad_steps() {
        let tau = SymTensor2::diag(1.0, 1.0);
        assert!(prox_h_limit2(&tau, 0.0).is_err());
        assert!(prox_h_limit2(&tau, -1.0).is_err());
        assert!(prox_h_lambda2(&tau, 0.1, 0.0).is_err());
        assert!(prox_h_lambda2(&tau, f64::NAN, 1.0).is_err());
    }
}
