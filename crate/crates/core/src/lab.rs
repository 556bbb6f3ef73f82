//! Desk-scale experiments tying the pointwise theory to the field solvers.
//!
//! Each experiment returns an [`ExperimentReport`] whose rows and checks are
//! bit-reproducible for a fixed seed:
//!
//! * [`run_inequality_sampler`] — randomized verification of the pointwise
//!   chain `H ≤ h_λ ≤ h̃_λ`, equality `H = h_limit` on the wave cone,
//!   continuity across the branch seams of `h_λ`, monotonicity of the 3D
//!   density in its smallest eigenvalue, and the sublinear scaling bound
//!   `h_λ(sτ) ≤ C·s·h_λ(τ)` for `s ≤ 1` (which the unrelaxed `h̃_λ`
//!   provably violates — kept as a negative control).
//! * [`run_pointwise_convergence`] — the envelope gap `h_limit − h_λ` on
//!   fixed low-branch samples: the exact 2D identity `2λ^{-1/2}|τ₁τ₂|`,
//!   the `λ^{-1/2}` decay rate in 3D, and vanishing on rank-one lines.
//! * [`run_recovery_experiment`] — mollified truss rasters as finite-λ
//!   competitors: energy recovery `E_λ → 2W`, the pointwise bound
//!   `sup|μ_λ| ≤ ¼√λ`, and the decaying load-strength diagnostic
//!   `λ^{-1/4}‖g_λ‖`.
//! * [`run_gamma_sweep`] — end-to-end Γ-convergence on a named instance:
//!   ground-structure LP, limit field solve, warm-started finite-λ sweep,
//!   and the mutual upper/lower-bound checks between the three levels.
//!
//! Violations found by the samplers are recorded as row counts and failed
//! checks, never as errors; errors are reserved for invalid inputs and
//! numerical breakdowns (under-resolved grids, stalled CG).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field2::{StressField2, VectorField2};
use crate::grid::Grid2;
use crate::hm1::hminus1_norm2;
use crate::integrands::{
    h_lambda2, h_lambda2_eigs, h_lambda3, h_lambda3_eigs, h_limit2_eigs, h_limit3_eigs,
    h_tilde2, h_tilde3, h_wavecone2, h_wavecone2_eigs, h_wavecone3, h_wavecone3_eigs, rho2_eigs,
    rho3_eigs, Density,
};
use crate::load::{assemble_load, epsilon_schedule, LoadSpec, Mollifier, Side};
use crate::report::{fmt_f64, ExperimentReport};
use crate::solvers::{
    lambda_sweep2_init, solve_truss_lp_certified, SolveOptions, SolveReport,
};
use crate::tensor::{SymTensor2, SymTensor3};
use crate::truss::{
    rasterize_truss, roof_instance, single_bar_instance, truss_weight, GroundStructure,
    TrussDesign,
};
use crate::{tol, Error, Result};

/// Relative size of the two-sided perturbation used in seam-continuity
/// sandwiches. Well above `f64` granularity at every sampled scale, yet
/// small enough that the Lipschitz drift stays orders of magnitude below
/// [`tol::BRANCH_CONTINUITY`].
const SEAM_DELTA: f64 = 1e-12;

/// Relative step for the central monotonicity probe in the smallest
/// eigenvalue.
const MONO_DELTA: f64 = 1e-5;

fn validate_lambdas(lambdas: &[f64]) -> Result<()> {
    if lambdas.is_empty() {
        return Err(Error::InvalidInput("empty lambda list".into()));
    }
    if lambdas.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
        return Err(Error::InvalidInput("lambda values must be positive and finite".into()));
    }
    if lambdas.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidInput("lambda list must be strictly ascending".into()));
    }
    Ok(())
}

/// `10^u` with `u` uniform on `[lo, hi)`.
fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    10f64.powf(rng.gen_range(lo..hi))
}

/// Magnitude bounded away from zero, random sign.
fn signed_unit(rng: &mut ChaCha8Rng) -> f64 {
    let m = rng.gen_range(0.1..1.0);
    if rng.gen_range(0.0..1.0) < 0.5 {
        -m
    } else {
        m
    }
}

/// Least-squares slope of `ln y` against `ln x`. Caller guarantees at least
/// two points with positive coordinates.
fn loglog_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in pts {
        let (lx, ly) = (x.ln(), y.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Randomized verification of the pointwise structure of the densities.
///
/// One row per λ with columns `[lambda, samples, chain_viol, cone_viol,
/// seam_viol, monotone_viol, scaling_viol, max_defect]`; `max_defect` is the
/// largest normalized chain defect seen (negative when the chain holds with
/// margin). Sample magnitudes mix scales `10^{-3}..10^{3}` and alternate
/// between tensor-component and eigenvalue parametrizations so both call
/// paths are exercised. Every violation increments a row counter and any
/// nonzero counter fails that λ's check; nothing is raised as an error.
///
/// # Errors
/// Zero samples or an invalid λ list.
pub fn run_inequality_sampler(
    n_samples: usize,
    lambdas: &[f64],
    seed: u64,
) -> Result<ExperimentReport> {
    if n_samples == 0 {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    validate_lambdas(lambdas)?;
    let mut report = ExperimentReport::new(
        "inequality_sampler",
        &[
            "lambda",
            "samples",
            "chain_viol",
            "cone_viol",
            "seam_viol",
            "monotone_viol",
            "scaling_viol",
            "max_defect",
        ],
        seed,
    );
    report.param("n_samples", n_samples);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    for &lam in lambdas {
        let rl = lam.sqrt();
        let (mut chain, mut cone, mut seam, mut mono, mut scal) = (0u64, 0u64, 0u64, 0u64, 0u64);
        let mut max_defect = f64::NEG_INFINITY;

        // Chain H ≤ h_λ ≤ h̃_λ on mixed-scale samples.
        for k in 0..n_samples {
            let scale = log_uniform(&mut rng, -3.0, 3.0);
            let (hw, hl, ht) = if k % 2 == 0 {
                if k % 4 == 0 {
                    let t = SymTensor2::new(
                        scale * rng.gen_range(-1.0..1.0),
                        scale * rng.gen_range(-1.0..1.0),
                        scale * rng.gen_range(-1.0..1.0),
                    );
                    (h_wavecone2(&t), h_lambda2(&t, lam), h_tilde2(&t, lam))
                } else {
                    let e = [scale * signed_unit(&mut rng), scale * signed_unit(&mut rng)];
                    let t = SymTensor2::diag(e[0], e[1]);
                    (h_wavecone2_eigs(e), h_lambda2_eigs(e, lam), h_tilde2(&t, lam))
                }
            } else if k % 4 == 1 {
                let t = SymTensor3::new(
                    scale * rng.gen_range(-1.0..1.0),
                    scale * rng.gen_range(-1.0..1.0),
                    scale * rng.gen_range(-1.0..1.0),
                    scale * rng.gen_range(-1.0..1.0),
                    scale * rng.gen_range(-1.0..1.0),
                    scale * rng.gen_range(-1.0..1.0),
                );
                (h_wavecone3(&t), h_lambda3(&t, lam), h_tilde3(&t, lam))
            } else {
                let e = [
                    scale * signed_unit(&mut rng),
                    scale * signed_unit(&mut rng),
                    scale * signed_unit(&mut rng),
                ];
                let t = SymTensor3::diag(e[0], e[1], e[2]);
                (h_wavecone3_eigs(e), h_lambda3_eigs(e, lam), h_tilde3(&t, lam))
            };
            let unit = ht.abs().max(1.0);
            let d = (hw - hl).max(hl - ht) / unit;
            max_defect = max_defect.max(d);
            if d > tol::CHAIN_SLACK {
                chain += 1;
            }
        }

        let n_aux = n_samples.div_ceil(2);

        // Wave cone: smallest eigenvalue zero ⇒ H equals h_limit exactly.
        for k in 0..n_aux {
            let scale = log_uniform(&mut rng, -3.0, 3.0);
            let (hw, hl) = if k % 2 == 0 {
                let e = [0.0, scale * signed_unit(&mut rng)];
                (h_wavecone2_eigs(e), h_limit2_eigs(e))
            } else {
                let e = [0.0, scale * signed_unit(&mut rng), scale * signed_unit(&mut rng)];
                (h_wavecone3_eigs(e), h_limit3_eigs(e))
            };
            if (hw - hl).abs() > tol::EXACT * hl.abs().max(1.0) {
                cone += 1;
            }
        }

        // Branch seams: two-sided sandwich around each classification
        // boundary; the jump must vanish to first order.
        for k in 0..n_aux {
            let (lo, hi) = match k % 3 {
                0 => {
                    // 2D seam ρ = √λ.
                    let e = [signed_unit(&mut rng), signed_unit(&mut rng)];
                    let t = rl / rho2_eigs(e);
                    let scl = |s: f64| [e[0] * t * s, e[1] * t * s];
                    (
                        h_lambda2_eigs(scl(1.0 - SEAM_DELTA), lam),
                        h_lambda2_eigs(scl(1.0 + SEAM_DELTA), lam),
                    )
                }
                1 => {
                    // 3D seam 2ρ⁽³⁾ = √λ.
                    let e = [
                        signed_unit(&mut rng),
                        signed_unit(&mut rng),
                        signed_unit(&mut rng),
                    ];
                    let t = rl / (2.0 * rho3_eigs(e));
                    let scl = |s: f64| [e[0] * t * s, e[1] * t * s, e[2] * t * s];
                    (
                        h_lambda3_eigs(scl(1.0 - SEAM_DELTA), lam),
                        h_lambda3_eigs(scl(1.0 + SEAM_DELTA), lam),
                    )
                }
                _ => {
                    // 3D interior seam a+b = c, placed well inside the
                    // low-ρ regime.
                    let a = rng.gen_range(0.1..1.0);
                    let b = rng.gen_range(0.1..1.0);
                    let c = a + b;
                    let t = 0.25 * rl / rho3_eigs([a, b, c]);
                    (
                        h_lambda3_eigs([a * t, b * t, c * t * (1.0 - SEAM_DELTA)], lam),
                        h_lambda3_eigs([a * t, b * t, c * t * (1.0 + SEAM_DELTA)], lam),
                    )
                }
            };
            if (hi - lo).abs() > tol::BRANCH_CONTINUITY * hi.abs().max(1.0) {
                seam += 1;
            }
        }

        // 3D monotonicity in the smallest eigenvalue (the relaxation is
        // nondecreasing in |τ₁| almost everywhere).
        for _ in 0..n_aux {
            let scale = rl * log_uniform(&mut rng, -2.0, 0.7);
            let b = scale * rng.gen_range(0.3..1.0);
            let c = b * rng.gen_range(1.0..3.0);
            let a = b * rng.gen_range(0.1..0.9);
            let d = b * MONO_DELTA;
            let hp = h_lambda3_eigs([a + d, b, c], lam);
            let hm = h_lambda3_eigs([a - d, b, c], lam);
            if hp < hm - tol::MONOTONE_SLACK * hm.abs().max(1.0) {
                mono += 1;
            }
        }

        // Sublinear scaling h_λ(sτ) ≤ C·s·h_λ(τ) for s ≤ 1.
        for k in 0..n_aux {
            let scale = log_uniform(&mut rng, -3.0, 3.0);
            let s = log_uniform(&mut rng, -3.0, 0.0);
            let (lhs, h1) = if k % 2 == 0 {
                let e = [scale * signed_unit(&mut rng), scale * signed_unit(&mut rng)];
                (h_lambda2_eigs([e[0] * s, e[1] * s], lam), h_lambda2_eigs(e, lam))
            } else {
                let e = [
                    scale * signed_unit(&mut rng),
                    scale * signed_unit(&mut rng),
                    scale * signed_unit(&mut rng),
                ];
                (
                    h_lambda3_eigs([e[0] * s, e[1] * s, e[2] * s], lam),
                    h_lambda3_eigs(e, lam),
                )
            };
            let rhs = tol::SCALING_C * s * h1;
            if lhs > rhs + tol::CHAIN_SLACK * rhs.max(1.0) {
                scal += 1;
            }
        }

        let total = chain + cone + seam + mono + scal;
        report.push_row(vec![
            lam,
            n_samples as f64,
            chain as f64,
            cone as f64,
            seam as f64,
            mono as f64,
            scal as f64,
            max_defect,
        ]);
        report.check(
            &format!("lambda={lam:.3e} pointwise structure holds"),
            total == 0,
            format!(
                "violations: chain {chain}, cone {cone}, seam {seam}, monotone {mono}, \
                 scaling {scal}; max chain defect {max_defect:.3e}"
            ),
        );
    }

    // Negative control: the *unrelaxed* density violates the scaling bound —
    // its √λ offset does not shrink with s.
    let lam = *lambdas.last().expect("validated nonempty");
    let t = SymTensor2::diag(1.0, 1.0);
    let s = 1e-6;
    let lhs = h_tilde2(&SymTensor2::diag(s, s), lam);
    let rhs = tol::SCALING_C * s * h_tilde2(&t, lam);
    report.check(
        "scaling control: h_tilde violates the bound",
        lhs > rhs,
        format!("h_tilde(s.tau) {lhs:.3e} vs C.s.h_tilde(tau) {rhs:.3e} at s={s:.1e}"),
    );
    Ok(report)
}

/// Pointwise convergence `h_λ ↑ h_limit` on a fixed low-branch sample set.
///
/// Samples are scaled so every λ in the (ascending) list sees them in the
/// low-`ρ` branches. Row columns: `[lambda, max_defect_2d, mean_gap_3d,
/// max_rank1_gap]`. Checks: the 2D gap equals `2λ^{-1/2}|τ₁τ₂|` to
/// [`tol::GAP_2D_REL`] of the sample's own scale; every 3D per-sample
/// log-log slope of the gap sits within [`tol::SLOPE_3D`] of `−1/2`; the
/// gap vanishes identically on rank-one samples; and the hand-computed value
/// `gap(diag(1,1), λ=10⁴) = 0.02` is reproduced.
///
/// # Errors
/// Zero samples, an invalid λ list, or fewer than two λ values (no slope).
pub fn run_pointwise_convergence(
    n_samples: usize,
    lambdas: &[f64],
    seed: u64,
) -> Result<ExperimentReport> {
    if n_samples == 0 {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    validate_lambdas(lambdas)?;
    if lambdas.len() < 2 {
        return Err(Error::InvalidInput("slope fit needs at least two lambda values".into()));
    }
    let mut report = ExperimentReport::new(
        "pointwise_convergence",
        &["lambda", "max_defect_2d", "mean_gap_3d", "max_rank1_gap"],
        seed,
    );
    report.param("n_samples", n_samples);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cap = 0.25 * lambdas[0].sqrt();

    // Fixed sample sets, shared by every λ.
    let mut e2 = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let e = [signed_unit(&mut rng), signed_unit(&mut rng)];
        let t = cap * rng.gen_range(0.2..1.0) / rho2_eigs(e);
        e2.push([e[0] * t, e[1] * t]);
    }
    let mut e3 = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let e = [
            signed_unit(&mut rng),
            signed_unit(&mut rng),
            signed_unit(&mut rng),
        ];
        let t = cap * rng.gen_range(0.2..1.0) / (2.0 * rho3_eigs(e));
        e3.push([e[0] * t, e[1] * t, e[2] * t]);
    }
    let rank1_2 = [0.0, cap];
    let rank1_3 = [0.0, 0.0, cap];

    let mut gaps3: Vec<Vec<(f64, f64)>> = vec![Vec::with_capacity(lambdas.len()); n_samples];
    let mut max_defect_all: f64 = 0.0;
    let mut max_rank1_all: f64 = 0.0;

    for &lam in lambdas {
        let rli = 1.0 / lam.sqrt();
        let mut max_defect: f64 = 0.0;
        for e in &e2 {
            let hlim = h_limit2_eigs(*e);
            let gap = hlim - h_lambda2_eigs(*e, lam);
            let predicted = 2.0 * rli * (e[0] * e[1]).abs();
            let defect = (gap - predicted).abs() / hlim.abs().max(1.0);
            max_defect = max_defect.max(defect);
        }
        let mut sum_gap3 = 0.0;
        for (s, e) in e3.iter().enumerate() {
            let gap = h_limit3_eigs(*e) - h_lambda3_eigs(*e, lam);
            sum_gap3 += gap;
            gaps3[s].push((lam, gap));
        }
        let r2 = h_limit2_eigs(rank1_2) - h_lambda2_eigs(rank1_2, lam);
        let r3 = h_limit3_eigs(rank1_3) - h_lambda3_eigs(rank1_3, lam);
        let max_rank1 = r2.abs().max(r3.abs());
        max_defect_all = max_defect_all.max(max_defect);
        max_rank1_all = max_rank1_all.max(max_rank1);
        report.push_row(vec![lam, max_defect, sum_gap3 / n_samples as f64, max_rank1]);
    }

    report.check(
        "2d gap equals 2/sqrt(lambda) |tau1 tau2|",
        max_defect_all <= tol::GAP_2D_REL,
        format!("max normalized defect {max_defect_all:.3e}"),
    );

    let mut slope_min = f64::INFINITY;
    let mut slope_max = f64::NEG_INFINITY;
    let mut slope_viol = 0u64;
    for pts in &gaps3 {
        let m = loglog_slope(pts);
        slope_min = slope_min.min(m);
        slope_max = slope_max.max(m);
        if (m + 0.5).abs() > tol::SLOPE_3D {
            slope_viol += 1;
        }
    }
    report.param("slope_3d_min", fmt_f64(slope_min));
    report.param("slope_3d_max", fmt_f64(slope_max));
    report.check(
        "3d gap decays like lambda^{-1/2}",
        slope_viol == 0,
        format!(
            "{slope_viol} of {n_samples} slopes outside -0.5 +/- {}; range [{slope_min:.4}, \
             {slope_max:.4}]",
            tol::SLOPE_3D
        ),
    );
    report.check(
        "rank-one gap vanishes",
        max_rank1_all <= tol::EXACT * cap.max(1.0),
        format!("max |gap| {max_rank1_all:.3e}"),
    );
    let hand = h_limit2_eigs([1.0, 1.0]) - h_lambda2_eigs([1.0, 1.0], 1e4);
    report.check_abs("hand value: gap(diag(1,1), lambda=1e4)", hand, 0.02, 1e-15);
    Ok(report)
}

/// Everything the recovery experiment produces beyond the tabular report.
#[derive(Debug)]
pub struct RecoveryOutput {
    /// Tabular record (columns: lambda, epsilon, energy, gap, sup_mu,
    /// sup_bound, hminus1, diag).
    pub report: ExperimentReport,
    /// Per-λ `(λ, ε, μ_λ)` mollified competitor fields, for rendering.
    pub fields: Vec<(f64, f64, StressField2)>,
}

/// Canonical recovery instance: the unit bar rasterized on `[0,1]×[−1.25,
/// 1.25]` with an `n×n` grid.
///
/// The vertical margin of 1.25 keeps the widest scheduled kernel (`ε = 1` at
/// `λ = 10²` for unit weight) clear of the top and bottom boundaries, so the
/// only kernel clipping is the horizontal loss at the bar's endpoints. That
/// loss is exactly computable: the mollifier is a product of 1D kernels
/// `η₁(t) = (15/16)(1−t²)²`, each endpoint swallows `∫₀¹ t·η₁ = 5/32` of a
/// kernel width of line mass, and since the energy sits in the low branch
/// (the raster is rank-one), `E_λ = 2∫|μ_λ| = 2W − (5/8)ε` — the gap halves
/// exactly as ε halves.
///
/// # Errors
/// Degenerate grid size.
pub fn recovery_instance(n: usize) -> Result<(GroundStructure, TrussDesign, Grid2)> {
    let (gs, _) = single_bar_instance();
    let design = TrussDesign { w: vec![1.0] };
    let grid = Grid2::new(n, n, [0.0, 1.0], [-1.25, 1.25])?;
    Ok((gs, design, grid))
}

/// Recovery-sequence experiment: mollified rasters of a fixed truss design
/// as competitors for the finite-λ energy.
///
/// For each λ the mollification width comes from [`epsilon_schedule`] (for a
/// weightless design a fixed `4·h` fallback keeps the kernel resolvable), and
/// the row records the energy `E_λ(μ_λ)`, its gap to the target `2W`, the
/// pointwise bound pair `sup|μ_λ| ≤ ¼√λ`, and the load-strength diagnostic
/// `λ^{-1/4}‖g_λ‖` with `g_λ = −div μ_λ`. Checks: the sup bound holds, the
/// energy lands within `max(3ε, 5%)` of the target, the gap is strictly
/// decreasing, and the diagnostic is nonincreasing on *resolved* rows —
/// those with `ε` at most half the shortest load-bearing bar. Below that
/// resolution the construction degenerates (each bar's two opposite end
/// forces overlap and cancel, suppressing `‖g_λ‖` below its asymptotic
/// scaling), so preasymptotic rows are recorded as data but exempt from the
/// trend; at least two rows must qualify or the check fails outright.
///
/// # Errors
/// Mismatched design length, invalid λ list, a grid too coarse for the
/// scheduled kernel (`ε < 2·h`), or a stalled diagnostic solve.
pub fn run_recovery_experiment(
    gs: &GroundStructure,
    design: &TrussDesign,
    grid: &Grid2,
    lambdas: &[f64],
) -> Result<RecoveryOutput> {
    if design.w.len() != gs.bars.len() {
        return Err(Error::InvalidInput(format!(
            "design has {} strengths for {} bars",
            design.w.len(),
            gs.bars.len()
        )));
    }
    validate_lambdas(lambdas)?;
    let weight = truss_weight(gs, &design.w);
    let target = 2.0 * weight;
    let eta2 = Mollifier::eta_sup(2);
    let mut report = ExperimentReport::new(
        "recovery",
        &["lambda", "epsilon", "energy", "gap", "sup_mu", "sup_bound", "hminus1", "diag"],
        0,
    );
    report.param("weight", fmt_f64(weight));
    report.param("target", fmt_f64(target));
    report.param("grid", format!("{}x{}", grid.nx, grid.ny));

    let mut fields = Vec::with_capacity(lambdas.len());
    for &lam in lambdas {
        let eps = if weight > 0.0 {
            epsilon_schedule(lam, weight, eta2, 2)?
        } else {
            4.0 * grid.hmax()
        };
        let mu = rasterize_truss(gs, &design.w, grid, eps)?;
        let energy = mu.energy(Density::HLambda(lam));
        let gap = (energy - target).abs();
        let sup = mu.sup_abs();
        let bound = 0.25 * lam.sqrt();
        let mut gl = mu.div();
        gl.scale(-1.0);
        let hm1 = hminus1_norm2(&gl)?;
        let diag = lam.powf(-0.25) * hm1;
        report.push_row(vec![lam, eps, energy, gap, sup, bound, hm1, diag]);
        report.check(
            &format!("lambda={lam:.3e} sup bound"),
            sup <= bound,
            format!("sup|mu| {sup:.6e} vs bound {bound:.6e}"),
        );
        report.check(
            &format!("lambda={lam:.3e} energy recovers target"),
            gap <= (3.0 * eps).max(tol::RECOVERY_REL * target),
            format!(
                "energy {energy:.6e}, target {target:.6e}, gap {gap:.3e}, allowance {:.3e}",
                (3.0 * eps).max(tol::RECOVERY_REL * target)
            ),
        );
        fields.push((lam, eps, mu));
    }

    if weight > 0.0 {
        let gaps: Vec<f64> = report.rows.iter().map(|r| r[3]).collect();
        report.check(
            "gap strictly decreasing",
            gaps.windows(2).all(|w| w[1] < w[0]),
            format!(
                "gaps [{}]",
                gaps.iter().map(|g| format!("{g:.3e}")).collect::<Vec<_>>().join(", ")
            ),
        );
        let lmin = gs
            .bars
            .iter()
            .zip(&design.w)
            .filter(|(_, w)| **w != 0.0)
            .map(|(&(i, j), _)| {
                let (p, q) = (gs.nodes[i], gs.nodes[j]);
                ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
            })
            .fold(f64::INFINITY, f64::min);
        let resolved: Vec<(f64, f64)> =
            report.rows.iter().filter(|r| r[1] <= 0.5 * lmin).map(|r| (r[1], r[7])).collect();
        report.check(
            "load-strength diagnostic nonincreasing on resolved rows",
            resolved.len() >= 2
                && resolved.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + tol::MONOTONE_SLACK)),
            format!(
                "rows with eps <= {:.3e}: [{}]",
                0.5 * lmin,
                resolved
                    .iter()
                    .map(|(e, d)| format!("eps {e:.3e}: {d:.3e}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
        );
    } else {
        report.check(
            "zero design yields zero energies",
            report.rows.iter().all(|r| r[2] == 0.0),
            "all energies must vanish for an empty structure".into(),
        );
    }
    Ok(RecoveryOutput { report, fields })
}

/// Named Γ-convergence instances expressible both as a ground structure and
/// as a grid load.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaInstance {
    /// Unit square stretched by opposite unit tractions; optimal truss is a
    /// single horizontal bar of weight 1, field optimum `2`.
    Uniaxial,
    /// Two 45° bars carrying a unit point load down to two supports; truss
    /// weight 2, field optimum `4`.
    Roof,
}

impl GammaInstance {
    /// Stable lowercase name used in reports and configs.
    pub fn label(self) -> &'static str {
        match self {
            GammaInstance::Uniaxial => "uniaxial",
            GammaInstance::Roof => "roof",
        }
    }

    /// Relative tolerance on the limit objective against `2W`.
    fn limit_rel(self) -> f64 {
        match self {
            GammaInstance::Uniaxial => tol::LIMIT_REL,
            GammaInstance::Roof => tol::LIMIT_ROOF_REL,
        }
    }
}

/// Everything the Γ-sweep produces beyond the tabular report.
#[derive(Debug)]
pub struct GammaSweepOutput {
    /// Tabular record (the λ-sweep columns plus instance parameters and the
    /// cross-level checks).
    pub report: ExperimentReport,
    /// Ground structure of the instance.
    pub gs: GroundStructure,
    /// LP-optimal design.
    pub design: TrussDesign,
    /// LP-optimal weight `W`.
    pub weight: f64,
    /// Field-level target `2W`.
    pub target: f64,
    /// Discretization used for the field solves.
    pub grid: Grid2,
    /// Assembled load.
    pub load: VectorField2,
    /// Limit solve (field and report).
    pub limit: (StressField2, SolveReport),
    /// Per-λ solutions, ascending.
    pub per_lambda: Vec<(f64, Option<(StressField2, SolveReport)>)>,
    /// Limit energy of the hand competitor (uniaxial: the closed-form
    /// uniaxial field; roof: the mollified LP raster).
    pub competitor_energy: f64,
}

/// End-to-end Γ-convergence experiment on a named instance.
///
/// Solves the ground-structure LP, assembles the matching grid load on an
/// `n×n` grid, runs the limit solver (warm-started from the rasterized LP
/// design where the instance provides one) and the ascending finite-λ sweep,
/// then cross-checks the three levels: the LP certificate, `limit ≈ 2W`
/// within the instance tolerance, `limit ≤ competitor`, the finite-λ energy
/// at the largest λ near `2W`, a nonincreasing envelope-gap column, and the
/// lower-bound invariant `limit ≤ E_limit(σ_λ)` for every swept design.
///
/// # Errors
/// Invalid λ list, an LP failure, a grid too coarse for the instance's
/// raster kernel, or a limit-solve failure. Per-λ solver failures are
/// recorded in the report and do not abort the sweep.
pub fn run_gamma_sweep(
    instance: GammaInstance,
    n: usize,
    lambdas: &[f64],
    opts: &SolveOptions,
) -> Result<GammaSweepOutput> {
    validate_lambdas(lambdas)?;
    let (gs, loads) = match instance {
        GammaInstance::Uniaxial => single_bar_instance(),
        GammaInstance::Roof => roof_instance(),
    };
    let lp = solve_truss_lp_certified(&gs, &loads)?;
    let weight = lp.weight;
    let target = 2.0 * weight;

    let (grid, load, raster, competitor_energy) = match instance {
        GammaInstance::Uniaxial => {
            let grid = Grid2::new(n, n, [0.0, 1.0], [0.0, 1.0])?;
            let spec = LoadSpec {
                tractions: vec![(Side::Left, [-1.0, 0.0]), (Side::Right, [1.0, 0.0])],
                points: vec![],
                patches: vec![],
            };
            let load = assemble_load(&spec, &grid, 0.25)?;
            let comp =
                StressField2::from_fn(grid, |_, _| SymTensor2::diag(1.0, 0.0)).energy(Density::HLimit);
            (grid, load, None, comp)
        }
        GammaInstance::Roof => {
            // The raster kernel must clear the 0.5 margin between the
            // supports and the domain boundary: ε = 8h = 24/n ≤ 0.5.
            if n < 48 {
                return Err(Error::InvalidInput(
                    "roof instance needs n >= 48 so the raster kernel clears the boundary".into(),
                ));
            }
            let grid = Grid2::new(n, n, [-0.5, 2.5], [-0.5, 2.5])?;
            let eps = 8.0 * grid.hmax();
            let raster = rasterize_truss(&gs, &lp.design.w, &grid, eps)?;
            let comp = raster.energy(Density::HLimit);
            let mut load = raster.div();
            load.scale(-1.0);
            (grid, load, Some(raster), comp)
        }
    };

    let sweep = lambda_sweep2_init(&grid, &load, lambdas, opts, raster.as_ref())?;
    let mut report = sweep.report;
    report.name = format!("gamma_sweep_{}", instance.label());
    report.param("instance", instance.label());
    report.param("grid", format!("{n}x{n}"));
    report.param("lp_weight", fmt_f64(weight));
    report.param("target", fmt_f64(target));
    report.param("competitor_energy", fmt_f64(competitor_energy));

    report.check(
        "lp certificate",
        lp.certificate_gap <= tol::LP_CERT_GAP
            && lp.dual_feasibility <= tol::LP_DUAL_FEAS
            && lp.residual <= tol::EQUILIBRIUM_RESIDUAL,
        format!(
            "gap {:.3e}, dual feasibility {:.3e}, residual {:.3e}",
            lp.certificate_gap, lp.dual_feasibility, lp.residual
        ),
    );
    let limit_obj = sweep.limit.1.objective;
    let rel = instance.limit_rel();
    report.check(
        "limit value matches 2x truss weight",
        (limit_obj - target).abs() <= rel * target,
        format!("limit {limit_obj:.6e} vs target {target:.6e} (rel tol {rel})"),
    );
    report.check(
        "limit at most competitor",
        limit_obj <= competitor_energy * (1.0 + tol::COMPETITOR_REL),
        format!("limit {limit_obj:.6e} vs competitor {competitor_energy:.6e}"),
    );
    let last_ok = sweep
        .per_lambda
        .last()
        .and_then(|(lam, r)| r.as_ref().map(|(_, rep)| (*lam, rep.objective)));
    match last_ok {
        Some((lam, obj)) => report.check(
            "finite-lambda energy near target at largest lambda",
            (obj - target).abs() <= tol::FINITE_LAMBDA_REL * target,
            format!("E_lambda {obj:.6e} at lambda={lam:.3e} vs target {target:.6e}"),
        ),
        None => report.check(
            "finite-lambda energy near target at largest lambda",
            false,
            "solve at the largest lambda failed".into(),
        ),
    }
    let gaps: Vec<f64> = sweep
        .per_lambda
        .iter()
        .zip(&report.rows)
        .filter(|((_, r), _)| r.is_some())
        .map(|(_, row)| row[2])
        .collect();
    report.check(
        "envelope gap nonincreasing in lambda",
        gaps.windows(2).all(|w| w[1] <= w[0] + tol::MONOTONE_SLACK * w[0].abs().max(1.0)),
        format!(
            "gaps [{}]",
            gaps.iter().map(|g| format!("{g:.3e}")).collect::<Vec<_>>().join(", ")
        ),
    );
    let mut lb_ok = true;
    let mut worst = f64::NEG_INFINITY;
    for row in report.rows.iter().filter(|r| r[1].is_finite()) {
        let competitor = row[1] + row[2]; // E_limit(σ_λ) = energy + gap
        worst = worst.max(limit_obj - competitor);
        lb_ok &= limit_obj <= competitor * (1.0 + tol::COMPETITOR_REL);
    }
    report.check(
        "limit below each swept design",
        lb_ok,
        format!("worst excess {worst:.3e}"),
    );

    Ok(GammaSweepOutput {
        report,
        gs,
        design: lp.design,
        weight,
        target,
        grid,
        load,
        limit: sweep.limit,
        per_lambda: sweep.per_lambda,
        competitor_energy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampler_finds_no_violations_and_is_deterministic() {
        let lams = [1.0, 1e2, 1e4];
        let r1 = run_inequality_sampler(400, &lams, 11).unwrap();
        let r2 = run_inequality_sampler(400, &lams, 11).unwrap();
        assert!(r1.passed(), "{}", r1.summary());
        assert_eq!(r1.csv_string(), r2.csv_string());
        for row in &r1.rows {
            assert_eq!(row[2..7].iter().sum::<f64>(), 0.0, "violations in row {row:?}");
        }
    }

    #[test]
    fn sampler_rejects_bad_input() {
        assert!(run_inequality_sampler(0, &[1.0], 0).is_err());
        assert!(run_inequality_sampler(10, &[], 0).is_err());
        assert!(run_inequality_sampler(10, &[-1.0], 0).is_err());
        assert!(run_inequality_sampler(10, &[1e2, 1e1], 0).is_err());
    }

    #[test]
    fn pointwise_identity_slopes_and_hand_value() {
        let lams = [1e2, 1e3, 1e4, 1e5];
        let r = run_pointwise_convergence(60, &lams, 3).unwrap();
        assert!(r.passed(), "{}", r.summary());
        let r2 = run_pointwise_convergence(60, &lams, 3).unwrap();
        assert_eq!(r.csv_string(), r2.csv_string());
        assert!(run_pointwise_convergence(60, &[1e2], 3).is_err());
    }

    #[test]
    fn recovery_unit_bar_recovers_target() {
        let (gs, design, grid) = recovery_instance(64).unwrap();
        let out = run_recovery_experiment(&gs, &design, &grid, &[1e2, 1e3, 1e4]).unwrap();
        assert!(out.report.passed(), "{}", out.report.csv_string());
        let eps: Vec<f64> = out.report.rows.iter().map(|r| r[1]).collect();
        assert_eq!(eps, vec![1.0, 0.5, 0.25]);
        assert_eq!(out.fields.len(), 3);
        // endpoint-clipping oracle: gap = (5/8)·ε up to raster quadrature
        for row in &out.report.rows {
            assert!((row[3] - 0.625 * row[1]).abs() <= 0.01 * 0.625 * row[1], "row {row:?}");
        }
    }

    #[test]
    fn recovery_zero_design_is_trivial() {
        let (gs, _, grid) = recovery_instance(64).unwrap();
        let design = TrussDesign { w: vec![0.0] };
        let out = run_recovery_experiment(&gs, &design, &grid, &[1e2, 1e3]).unwrap();
        assert!(out.report.passed(), "{}", out.report.summary());
        assert!(out.report.rows.iter().all(|r| r[2] == 0.0 && r[3] == 0.0));
    }

    #[test]
    fn recovery_under_resolved_grid_errors() {
        let (gs, design, _) = recovery_instance(64).unwrap();
        let grid = Grid2::new(8, 8, [0.0, 1.0], [-1.25, 1.25]).unwrap();
        assert!(run_recovery_experiment(&gs, &design, &grid, &[1e8]).is_err());
    }

    #[test]
    fn gamma_uniaxial_small_grid() {
        let opts = SolveOptions::default();
        let out = run_gamma_sweep(GammaInstance::Uniaxial, 24, &[1e2, 1e3], &opts).unwrap();
        assert!(out.report.passed(), "{}", out.report.summary());
        assert!((out.weight - 1.0).abs() <= 1e-9);
        assert!((out.limit.1.objective - 2.0).abs() <= 0.04);
    }

    #[test]
    fn gamma_roof_needs_resolution() {
        let opts = SolveOptions::default();
        assert!(run_gamma_sweep(GammaInstance::Roof, 32, &[1e2], &opts).is_err());
    }

    #[test]
    fn gamma_roof_small_grid() {
        let opts = SolveOptions::default();
        let out = run_gamma_sweep(GammaInstance::Roof, 64, &[1e2], &opts).unwrap();
        assert!(out.report.passed(), "{}", out.report.summary());
        assert!((out.weight - 2.0).abs() <= 1e-9);
        assert!((out.limit.1.objective - 4.0).abs() <= 0.2 * 4.0, "limit {}", out.limit.1.objective);
    }
}
