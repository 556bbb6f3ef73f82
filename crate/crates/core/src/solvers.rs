//! Optimization drivers: the truss LP, the convex limit problem
//! `min ∫h_limit(Mσ)` s.t. `div σ + g = 0`, and the nonconvex finite-λ
//! problem `min ∫h_λ(Mσ)` under the same constraint.
//!
//! The limit problem is solved by a primal-dual (Chambolle–Pock) iteration
//! on the splitting `K σ = (Mσ, div σ)`: the first dual block is handled by
//! the exact pointwise prox of `h_limit` through Moreau's identity, the
//! second is the multiplier of the linear constraint and absorbs `g`.
//! Fixed steps come from a power-iteration estimate of `‖K‖`.
//!
//! The finite-λ problem is nonconvex; an augmented-Lagrangian scheme splits
//! `z = Mσ`, alternating the exact pointwise prox of `h_λ` in `z`, a CG
//! solve of the coupled quadratic in `σ`, and multiplier ascent. It descends
//! from its initializer (a safeguard returns the initializer when the final
//! energy would exceed it), which is what the warm-started λ-sweep leans on.
//!
//! Reported checkpoints carry the best feasible objective seen so far, so
//! the objective column is nonincreasing by construction — the practical
//! form of the ergodic-averaging guarantee for the primal-dual scheme.

use crate::field2::{StressField2, VectorField2};
use crate::field3::{StressField3, VectorField3};
use crate::grid::{Grid2, Grid3};
use crate::integrands::Density;
use crate::linalg::{cg, cg_from, power_iteration, LinVec};
use crate::lp::{simplex_min, DenseMatrix};
use crate::report::{fmt_f64, ExperimentReport};
use crate::truss::{
    equilibrium_matrix, truss_residual, truss_weight, GroundStructure, PointLoadSet, TrussDesign,
};
use crate::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

/// Knobs shared by the field solvers.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Iteration cap: primal-dual steps (limit) or outer AL rounds (finite λ).
    pub max_iter: usize,
    /// Relative constraint tolerance `‖div σ + g‖ / max(‖g‖, 1)`.
    pub tol_residual: f64,
    /// Relative objective plateau declaring convergence.
    pub tol_objective: f64,
    /// Checkpoint cadence in iterations.
    pub check_every: usize,
    /// Seed for the power-iteration start vector (the only randomness).
    pub seed: u64,
    /// AL coupling weight ρ₁ on `Mσ = z`.
    pub rho: f64,
    /// Dual/primal step ratio of the primal-dual scheme.
    pub step_ratio: f64,
    /// Inner CG relative tolerance (AL σ-step, warm starts).
    pub cg_tol: f64,
    /// Inner CG iteration cap.
    pub cg_max: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iter: 4000,
            tol_residual: 1e-6,
            tol_objective: 1e-8,
            check_every: 25,
            seed: 7,
            rho: 10.0,
            step_ratio: 1.0,
            cg_tol: 1e-9,
            cg_max: 400,
        }
    }
}

/// One recorded solver checkpoint.
#[derive(Debug, Clone, Copy)]
pub struct CheckPoint {
    /// Iteration count at the checkpoint.
    pub iter: usize,
    /// Best feasible objective seen so far (nonincreasing column).
    pub objective: f64,
    /// Constraint residual of the current iterate.
    pub residual: f64,
}

/// Outcome summary of one solve.
#[derive(Debug, Clone)]
pub struct SolveReport {
    /// Objective of the returned iterate.
    pub objective: f64,
    /// Relative constraint residual of the returned iterate.
    pub residual: f64,
    /// Iterations actually used.
    pub iterations: usize,
    /// Whether the residual and plateau tolerances were met.
    pub converged: bool,
    /// Wall-clock seconds (diagnostics only; never serialized to CSV).
    pub wall_time: f64,
    /// Checkpoint trail.
    pub checkpoints: Vec<CheckPoint>,
}

/// Truss LP result with its optimality certificate.
#[derive(Debug, Clone)]
pub struct TrussLpSolution {
    /// Optimal bar strengths.
    pub design: TrussDesign,
    /// Michell weight `Σ|w|ℓ`.
    pub weight: f64,
    /// Dual node potentials (free nodes, `(x,y)` interleaved).
    pub dual: Vec<f64>,
    /// `|primal − dual|` duality gap.
    pub certificate_gap: f64,
    /// Max dual-feasibility violation `(|Bᵀy| − ℓ)₊`.
    pub dual_feasibility: f64,
    /// Max-norm equilibrium residual at free nodes.
    pub residual: f64,
    /// Simplex pivots.
    pub iterations: usize,
}

/// Solve the Michell LP `min Σ|w|ℓ` s.t. `Bw = −g`, returning the full
/// primal-dual certificate.
///
/// # Errors
/// Infeasible instances (load outside the range of `B`) and LP failures.
pub fn solve_truss_lp_certified(
    gs: &GroundStructure,
    loads: &PointLoadSet,
) -> Result<TrussLpSolution> {
    let bm = equilibrium_matrix(gs);
    let nb = gs.bars.len();
    // split w = w⁺ − w⁻: columns [B, −B], cost [ℓ, ℓ]
    let mut a = DenseMatrix::zeros(bm.m, 2 * nb);
    for r in 0..bm.m {
        for c in 0..nb {
            *a.at_mut(r, c) = bm.at(r, c);
            *a.at_mut(r, c + nb) = -bm.at(r, c);
        }
    }
    let lengths: Vec<f64> = (0..nb).map(|b| gs.bar_length(b)).collect();
    let mut cost = lengths.clone();
    cost.extend_from_slice(&lengths);
    // rhs = −g on free nodes
    let mut g = vec![[0.0; 2]; gs.nodes.len()];
    for &(nd, f) in &loads.forces {
        g[nd][0] += f[0];
        g[nd][1] += f[1];
    }
    let mut b = vec![0.0; bm.m];
    for (r, &nd) in bm.free.iter().enumerate() {
        b[2 * r] = -g[nd][0];
        b[2 * r + 1] = -g[nd][1];
    }
    let sol = simplex_min(&cost, &a, &b)?;
    let w: Vec<f64> = (0..nb).map(|c| sol.x[c] - sol.x[c + nb]).collect();
    let weight = truss_weight(gs, &w);
    let yb: f64 = sol.y.iter().zip(&b).map(|(y, b)| y * b).sum();
    let bty = bm.apply_transpose(&sol.y);
    let dual_feasibility = bty
        .iter()
        .zip(&lengths)
        .map(|(v, l)| (v.abs() - l).max(0.0))
        .fold(0.0f64, f64::max);
    Ok(TrussLpSolution {
        design: TrussDesign { w: w.clone() },
        weight,
        dual: sol.y,
        certificate_gap: (weight - yb).abs(),
        dual_feasibility,
        residual: truss_residual(gs, &w, loads),
        iterations: sol.iterations,
    })
}

/// Solve the Michell LP, reporting in the common [`SolveReport`] shape.
///
/// # Errors
/// Same as [`solve_truss_lp_certified`].
pub fn solve_truss_lp(
    gs: &GroundStructure,
    loads: &PointLoadSet,
) -> Result<(TrussDesign, SolveReport)> {
    let t0 = Instant::now();
    let sol = solve_truss_lp_certified(gs, loads)?;
    let report = SolveReport {
        objective: sol.weight,
        residual: sol.residual,
        iterations: sol.iterations,
        converged: true,
        wall_time: t0.elapsed().as_secs_f64(),
        checkpoints: vec![CheckPoint {
            iter: sol.iterations,
            objective: sol.weight,
            residual: sol.residual,
        }],
    };
    Ok((sol.design, report))
}

/// Grid/dimension abstraction the generic solvers run on.
pub(crate) trait Discretization {
    type Stress: LinVec;
    type Velo: LinVec;
    type Center: LinVec;
    fn m(&self, s: &Self::Stress) -> Self::Center;
    fn m_star(&self, c: &Self::Center) -> Self::Stress;
    fn div(&self, s: &Self::Stress) -> Self::Velo;
    fn symgrad(&self, u: &Self::Velo) -> Self::Stress;
    fn zero_stress(&self) -> Self::Stress;
    fn random_stress(&self, seed: u64) -> Self::Stress;
    /// Project onto the admissible stress subspace (zero tangential shear
    /// on the boundary lines of the corner/edge lattices), which makes the
    /// zero-extension divergence enforce `σ·n` = prescribed tractions
    /// exactly. Without it the outermost shear lines act as free rails
    /// that carry flux along unloaded boundaries and the discrete optimum
    /// undershoots the continuum value.
    fn project_space(&self, s: &mut Self::Stress);
    /// Pointwise prox of `t·density` on the center lattice.
    fn prox_center(&self, c: &Self::Center, t: f64, density: Density) -> Result<Self::Center>;
    fn energy(&self, s: &Self::Stress, density: Density) -> f64;
}

pub(crate) struct Dim2(pub Grid2);
pub(crate) struct Dim3(pub Grid3);

impl Discretization for Dim2 {
    type Stress = StressField2;
    type Velo = VectorField2;
    type Center = crate::field2::CenterField2;

    fn m(&self, s: &Self::Stress) -> Self::Center {
        s.m_avg()
    }
    fn m_star(&self, c: &Self::Center) -> Self::Stress {
        c.m_star()
    }
    fn div(&self, s: &Self::Stress) -> Self::Velo {
        s.div()
    }
    fn symgrad(&self, u: &Self::Velo) -> Self::Stress {
        u.symgrad()
    }
    fn zero_stress(&self) -> Self::Stress {
        StressField2::zeros(self.0)
    }
    fn random_stress(&self, seed: u64) -> Self::Stress {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = StressField2::zeros(self.0);
        for v in s.s11.iter_mut().chain(s.s22.iter_mut()).chain(s.s12.iter_mut()) {
            *v = rng.gen_range(-1.0..1.0);
        }
        s
    }
    fn project_space(&self, s: &mut Self::Stress) {
        s.zero_boundary_shear();
    }
    fn prox_center(&self, c: &Self::Center, t: f64, density: Density) -> Result<Self::Center> {
        let g = self.0;
        let mut out = c.clone();
        for j in 0..g.ny {
            for i in 0..g.nx {
                let tau = c.at(i, j);
                let y = match density {
                    Density::HLimit => crate::prox::prox_h_limit2(&tau, t)?,
                    Density::HLambda(l) => crate::prox::prox_h_lambda2(&tau, t, l)?,
                    _ => {
                        return Err(Error::InvalidInput(
                            "prox is available for h_limit and h_lambda only".into(),
                        ))
                    }
                };
                out.set(i, j, y);
            }
        }
        Ok(out)
    }
    fn energy(&self, s: &Self::Stress, density: Density) -> f64 {
        s.energy(density)
    }
}

impl Discretization for Dim3 {
    type Stress = StressField3;
    type Velo = VectorField3;
    type Center = crate::field3::CenterField3;

    fn m(&self, s: &Self::Stress) -> Self::Center {
        s.m_avg()
    }
    fn m_star(&self, c: &Self::Center) -> Self::Stress {
        c.m_star()
    }
    fn div(&self, s: &Self::Stress) -> Self::Velo {
        s.div()
    }
    fn symgrad(&self, u: &Self::Velo) -> Self::Stress {
        u.symgrad()
    }
    fn zero_stress(&self) -> Self::Stress {
        StressField3::zeros(self.0)
    }
    fn random_stress(&self, seed: u64) -> Self::Stress {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = StressField3::zeros(self.0);
        for v in s
            .s11
            .iter_mut()
            .chain(s.s22.iter_mut())
            .chain(s.s33.iter_mut())
            .chain(s.s12.iter_mut())
            .chain(s.s13.iter_mut())
            .chain(s.s23.iter_mut())
        {
            *v = rng.gen_range(-1.0..1.0);
        }
        s
    }
    fn project_space(&self, s: &mut Self::Stress) {
        s.zero_boundary_shear();
    }
    fn prox_center(&self, c: &Self::Center, t: f64, density: Density) -> Result<Self::Center> {
        let g = self.0;
        let mut out = c.clone();
        for k in 0..g.nz {
            for j in 0..g.ny {
                for i in 0..g.nx {
                    let tau = c.at(i, j, k);
                    let y = match density {
                        Density::HLimit => crate::prox::prox_h_limit3(&tau, t)?,
                        Density::HLambda(l) => crate::prox::prox_h_lambda3(&tau, t, l)?,
                        _ => {
                            return Err(Error::InvalidInput(
                                "prox is available for h_limit and h_lambda only".into(),
                            ))
                        }
                    };
                    out.set(i, j, k, y);
                }
            }
        }
        Ok(out)
    }
    fn energy(&self, s: &Self::Stress, density: Density) -> f64 {
        s.energy(density)
    }
}

/// Best-feasible iterate tracker shared by both field solvers.
struct Tracker<S: LinVec> {
    tol_residual: f64,
    tol_objective: f64,
    /// Checkpoints required before a plateau may declare convergence
    /// (guards against "converged" before the transient even starts).
    min_checkpoints: usize,
    best: Option<(f64, f64, S)>,
    feasible: bool,
    plateau: usize,
    checkpoints: Vec<CheckPoint>,
}

impl<S: LinVec> Tracker<S> {
    fn new(tol_residual: f64, tol_objective: f64, min_checkpoints: usize) -> Self {
        Self {
            tol_residual,
            tol_objective,
            min_checkpoints,
            best: None,
            feasible: false,
            plateau: 0,
            checkpoints: Vec::new(),
        }
    }

    fn converged(&self) -> bool {
        self.feasible && self.plateau >= 3 && self.checkpoints.len() >= self.min_checkpoints
    }

    /// Record a checkpoint; returns `true` once converged (feasible, best
    /// objective plateaued over three consecutive checkpoints, and past the
    /// minimum checkpoint count).
    fn observe(&mut self, iter: usize, obj: f64, resid: f64, sigma: &S) -> bool {
        let feas = resid <= self.tol_residual;
        let better = match &self.best {
            None => true,
            Some((bo, br, _)) => {
                if feas && !self.feasible {
                    true
                } else if feas == self.feasible {
                    if self.feasible { obj < *bo } else { resid < *br }
                } else {
                    false
                }
            }
        };
        let prev_best_obj = self.best.as_ref().map(|(o, _, _)| *o);
        if better {
            self.best = Some((obj, resid, sigma.clone()));
            self.feasible = self.feasible || feas;
        }
        let best_obj = self.best.as_ref().map(|(o, _, _)| *o).unwrap_or(obj);
        self.checkpoints.push(CheckPoint { iter, objective: best_obj, residual: resid });
        if self.feasible {
            let drop = prev_best_obj
                .map(|p| (p - best_obj).abs())
                .unwrap_or(f64::INFINITY);
            if feas && drop <= self.tol_objective * best_obj.abs().max(1.0) {
                self.plateau += 1;
            } else {
                self.plateau = 0;
            }
        }
        self.converged()
    }

    fn finish(self, iterations: usize, wall: f64) -> (S, SolveReport)
    where
        S: Clone,
    {
        let converged = self.converged();
        let (objective, residual, sigma) = self.best.expect("at least one checkpoint");
        (
            sigma,
            SolveReport {
                objective,
                residual,
                iterations,
                converged,
                wall_time: wall,
                checkpoints: self.checkpoints,
            },
        )
    }
}

/// Relative constraint residual `‖div σ + g‖ / max(‖g‖, 1)`.
fn constraint_residual<D: Discretization>(d: &D, s: &D::Stress, g: &D::Velo) -> f64 {
    let mut r = d.div(s);
    r.lv_axpy(1.0, g);
    r.lv_norm() / g.lv_norm().max(1.0)
}

/// Exact refeasibilization within the admissible subspace: add the
/// projected elastic correction `P e(w)` with `−div P e(w) = div σ + g`,
/// landing back on `div σ + g = 0` up to CG tolerance while preserving the
/// boundary-shear condition. Returns the corrected stress and its residual;
/// `warm` caches the correction across checkpoints to keep the CG solves
/// short. The operator `−div∘P∘e` is PSD with kernel the discrete rigid
/// motions, which a balanced load never excites.
fn project_feasible<D: Discretization>(
    d: &D,
    s: &D::Stress,
    g: &D::Velo,
    opts: &SolveOptions,
    warm: &mut Option<D::Velo>,
) -> (D::Stress, f64) {
    let mut r = d.div(s);
    r.lv_axpy(1.0, g);
    let gnorm = g.lv_norm().max(1.0);
    if r.lv_norm() / gnorm <= 1e-12 {
        return (s.clone(), r.lv_norm() / gnorm);
    }
    let apply = |u: &D::Velo| {
        let mut ew = d.symgrad(u);
        d.project_space(&mut ew);
        let mut v = d.div(&ew);
        v.lv_scale(-1.0);
        v
    };
    let w = match warm.take() {
        Some(w0) => cg_from(apply, &r, w0, opts.cg_tol, 10 * opts.cg_max).0,
        None => cg(apply, &r, opts.cg_tol, 10 * opts.cg_max).0,
    };
    let mut out = s.clone();
    let mut corr = d.symgrad(&w);
    d.project_space(&mut corr);
    out.lv_axpy(1.0, &corr);
    let res = constraint_residual(d, &out, g);
    *warm = Some(w);
    (out, res)
}

/// Elasticity warm start: solve `−div P e(u) = g` by CG and return
/// `P e(u)`, a feasible-to-CG-tolerance initial stress in the admissible
/// subspace.
fn elastic_init<D: Discretization>(d: &D, g: &D::Velo, opts: &SolveOptions) -> D::Stress {
    let apply = |u: &D::Velo| {
        let mut ew = d.symgrad(u);
        d.project_space(&mut ew);
        let mut v = d.div(&ew);
        v.lv_scale(-1.0);
        v
    };
    let (u, _, _) = cg(apply, g, opts.cg_tol, 20 * opts.cg_max);
    let mut s = d.symgrad(&u);
    d.project_space(&mut s);
    s
}

/// Power-iteration bound for `‖K|_V‖²` with `Kσ = (Mσ, div σ)` restricted
/// to the admissible subspace the iterates live in.
fn k_norm2<D: Discretization>(d: &D, seed: u64) -> f64 {
    let apply = |s: &D::Stress| {
        let mut sp = s.clone();
        d.project_space(&mut sp);
        let mut out = d.m_star(&d.m(&sp));
        out.lv_axpy(-1.0, &d.symgrad(&d.div(&sp)));
        d.project_space(&mut out);
        out
    };
    let mut start = d.random_stress(seed);
    d.project_space(&mut start);
    power_iteration(apply, &start, 60).max(1e-12)
}

/// Primal-dual iteration for the convex limit problem.
fn limit_solve<D: Discretization>(
    d: &D,
    g: &D::Velo,
    opts: &SolveOptions,
    init: Option<&D::Stress>,
) -> Result<(D::Stress, SolveReport)> {
    let t0 = Instant::now();
    let lk2 = k_norm2(d, opts.seed);
    let ratio = opts.step_ratio.max(1e-6);
    let tau = 0.95 / (lk2.sqrt() * ratio.sqrt());
    let s_step = 0.95 * ratio.sqrt() / lk2.sqrt();

    let mut sigma = match init {
        Some(s) => s.clone(),
        None => elastic_init(d, g, opts),
    };
    d.project_space(&mut sigma);
    let mut sigma_bar = sigma.clone();
    let mut p = d.m(&d.zero_stress());
    let mut u = {
        let mut z = d.div(&d.zero_stress());
        z.lv_scale(0.0);
        z
    };

    // ~10 checkpoints before a plateau may declare convergence: the
    // primal-dual transient builds its dual variables from zero and can sit
    // at the warm-start objective for the first few checkpoints.
    let mut tracker = Tracker::new(opts.tol_residual, opts.tol_objective, 10);
    let mut proj_warm: Option<D::Velo> = None;
    let (proj0, res0) = project_feasible(d, &sigma, g, opts, &mut proj_warm);
    let obj0 = d.energy(&proj0, Density::HLimit);
    let mut converged = tracker.observe(0, obj0, res0, &proj0);
    let mut used = 0;

    for it in 1..=opts.max_iter {
        if converged {
            break;
        }
        used = it;
        // dual block 1: p ← prox_{s·F₁*}(p + s·Mσ̄) via Moreau
        let mut v = d.m(&sigma_bar);
        v.lv_scale(s_step);
        v.lv_axpy(1.0, &p);
        let mut vs = v.clone();
        vs.lv_scale(1.0 / s_step);
        let px = d.prox_center(&vs, 1.0 / s_step, Density::HLimit)?;
        p = v;
        p.lv_axpy(-s_step, &px);
        // dual block 2: u ← u + s·(div σ̄ + g)
        let mut du = d.div(&sigma_bar);
        du.lv_axpy(1.0, g);
        u.lv_axpy(s_step, &du);
        // primal: σ ← P(σ − τ(M*p − e(u))); overrelax θ=1. The projection
        // P is the prox of the admissible-subspace indicator.
        let mut grad = d.m_star(&p);
        grad.lv_axpy(-1.0, &d.symgrad(&u));
        let mut sigma_new = sigma.clone();
        sigma_new.lv_axpy(-tau, &grad);
        d.project_space(&mut sigma_new);
        sigma_bar = sigma_new.clone();
        sigma_bar.lv_scale(2.0);
        sigma_bar.lv_axpy(-1.0, &sigma);
        sigma = sigma_new;

        if it % opts.check_every == 0 || it == opts.max_iter {
            // evaluate on the exactly refeasibilized iterate so the best
            // candidate is always constraint-satisfying
            let (proj, res) = project_feasible(d, &sigma, g, opts, &mut proj_warm);
            let obj = d.energy(&proj, Density::HLimit);
            converged = tracker.observe(it, obj, res, &proj);
        }
    }
    Ok(tracker.finish(used, t0.elapsed().as_secs_f64()))
}

/// Augmented-Lagrangian iteration for the finite-λ problem.
fn lambda_solve<D: Discretization>(
    d: &D,
    g: &D::Velo,
    lambda: f64,
    opts: &SolveOptions,
    init: &D::Stress,
) -> Result<(D::Stress, SolveReport)> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidInput(format!("lambda must be positive, got {lambda}")));
    }
    let t0 = Instant::now();
    let dens = Density::HLambda(lambda);
    let rho1 = opts.rho;
    // balance the divergence penalty against the coupling penalty
    let div_norm2 = {
        let apply = |s: &D::Stress| {
            let mut sp = s.clone();
            d.project_space(&mut sp);
            let mut out = d.symgrad(&d.div(&sp));
            out.lv_scale(-1.0);
            d.project_space(&mut out);
            out
        };
        let mut start = d.random_stress(opts.seed ^ 0x5eed);
        d.project_space(&mut start);
        power_iteration(apply, &start, 60).max(1e-12)
    };
    let rho2 = rho1 / div_norm2;

    let mut proj_warm: Option<D::Velo> = None;
    let mut init_v = init.clone();
    d.project_space(&mut init_v);
    let (init_proj, init_res) = project_feasible(d, &init_v, g, opts, &mut proj_warm);
    let init_obj = d.energy(&init_proj, dens);

    let mut sigma = init_proj.clone();
    let mut z = d.m(&sigma);
    let mut y1 = z.clone();
    y1.lv_scale(0.0);
    let mut y2 = d.div(&sigma);
    y2.lv_scale(0.0);

    let mut tracker = Tracker::new(opts.tol_residual, opts.tol_objective, 4);
    let mut converged = tracker.observe(0, init_obj, init_res, &init_proj);
    let mut used = 0;

    for it in 1..=opts.max_iter {
        if converged {
            break;
        }
        used = it;
        // z-step: pointwise prox of h_λ at t = 1/ρ₁
        let mut zin = d.m(&sigma);
        zin.lv_axpy(1.0 / rho1, &y1);
        z = d.prox_center(&zin, 1.0 / rho1, dens)?;
        // σ-step on the admissible subspace:
        // P(ρ₁M*M + ρ₂ div*div)P σ = P[M*(ρ₁z − y₁) + e(y₂ + ρ₂g)]
        let apply = |s: &D::Stress| {
            let mut out = d.m_star(&d.m(s));
            out.lv_scale(rho1);
            let mut dd = d.symgrad(&d.div(s));
            dd.lv_scale(-rho2);
            out.lv_axpy(1.0, &dd);
            d.project_space(&mut out);
            out
        };
        let mut zc = z.clone();
        zc.lv_scale(rho1);
        zc.lv_axpy(-1.0, &y1);
        let mut b = d.m_star(&zc);
        let mut yg = g.clone();
        yg.lv_scale(rho2);
        yg.lv_axpy(1.0, &y2);
        b.lv_axpy(1.0, &d.symgrad(&yg));
        d.project_space(&mut b);
        let (snew, _, _) = cg_from(apply, &b, sigma.clone(), opts.cg_tol, opts.cg_max);
        sigma = snew;
        // multiplier ascent
        let mut c1 = d.m(&sigma);
        c1.lv_axpy(-1.0, &z);
        y1.lv_axpy(rho1, &c1);
        let mut c2 = d.div(&sigma);
        c2.lv_axpy(1.0, g);
        y2.lv_axpy(rho2, &c2);

        if it % opts.check_every.clamp(1, 10) == 0 || it == opts.max_iter {
            let (proj, res) = project_feasible(d, &sigma, g, opts, &mut proj_warm);
            let obj = d.energy(&proj, dens);
            converged = tracker.observe(it, obj, res, &proj);
        }
    }
    let (best, mut report) = tracker.finish(used, t0.elapsed().as_secs_f64());
    // descent safeguard: never return worse than the (refeasibilized)
    // initializer
    if init_res <= opts.tol_residual && report.objective > init_obj + crate::tol::DESCENT_SLACK {
        report.objective = init_obj;
        report.residual = init_res;
        return Ok((init_proj, report));
    }
    Ok((best, report))
}

/// Minimize the limit energy `∫h_limit(Mσ)` over `div σ + g = 0` (2D).
/// `init` overrides the default elasticity warm start (used to hand the
/// solver a competitor field).
///
/// # Errors
/// Propagates prox-map failures; non-convergence is reported via the flag,
/// not an error.
pub fn solve_limit_field2(
    grid: &Grid2,
    load: &VectorField2,
    opts: &SolveOptions,
    init: Option<&StressField2>,
) -> Result<(StressField2, SolveReport)> {
    limit_solve(&Dim2(*grid), load, opts, init)
}

/// 3D variant of [`solve_limit_field2`].
///
/// # Errors
/// As in 2D.
pub fn solve_limit_field3(
    grid: &Grid3,
    load: &VectorField3,
    opts: &SolveOptions,
    init: Option<&StressField3>,
) -> Result<(StressField3, SolveReport)> {
    limit_solve(&Dim3(*grid), load, opts, init)
}

/// Minimize the finite-λ energy `∫h_λ(Mσ)` over `div σ + g = 0` (2D).
/// Nonconvex: returns a stationary point that never exceeds the energy of
/// `init` (plus [`crate::tol::DESCENT_SLACK`]) when `init` is feasible.
///
/// # Errors
/// Nonpositive λ, prox failures.
pub fn solve_finite_lambda2(
    grid: &Grid2,
    load: &VectorField2,
    lambda: f64,
    opts: &SolveOptions,
    init: &StressField2,
) -> Result<(StressField2, SolveReport)> {
    lambda_solve(&Dim2(*grid), load, lambda, opts, init)
}

/// 3D variant of [`solve_finite_lambda2`].
///
/// # Errors
/// As in 2D.
pub fn solve_finite_lambda3(
    grid: &Grid3,
    load: &VectorField3,
    lambda: f64,
    opts: &SolveOptions,
    init: &StressField3,
) -> Result<(StressField3, SolveReport)> {
    lambda_solve(&Dim3(*grid), load, lambda, opts, init)
}

/// Everything a λ-sweep produces beyond the tabular report.
#[derive(Debug)]
pub struct SweepResult {
    /// Tabular record (columns: lambda, energy, gap, residual, hminus1,
    /// iters).
    pub report: ExperimentReport,
    /// Limit solve used for warm starting.
    pub limit: (StressField2, SolveReport),
    /// Per-λ solutions; `None` where that solve failed (the failure is
    /// recorded as a failed check in the report).
    pub per_lambda: Vec<(f64, Option<(StressField2, SolveReport)>)>,
}

/// Warm-started ascending λ-sweep on a fixed load: solve the limit problem
/// once, then each finite-λ problem initialized from its predecessor.
///
/// Per-λ columns: energy `∫h_λ(Mσ_λ)`; gap `∫[h_limit − h_λ](Mσ_λ)` — the
/// energy shortfall of the returned design against its own limit energy,
/// which contracts like `λ^{−1/2}` along warm-started designs; constraint
/// residual; `H⁻¹` norm of the load; iterations.
///
/// # Errors
/// Empty or non-ascending λ list, limit-solve failure. Per-λ solver errors
/// are recorded in the report and the sweep continues.
pub fn lambda_sweep2(
    grid: &Grid2,
    load: &VectorField2,
    lambdas: &[f64],
    opts: &SolveOptions,
) -> Result<SweepResult> {
    lambda_sweep2_init(grid, load, lambdas, opts, None)
}

/// [`lambda_sweep2`] with an explicit initializer for the limit solve
/// (a rasterized competitor design, typically).
///
/// # Errors
/// As in [`lambda_sweep2`].
pub fn lambda_sweep2_init(
    grid: &Grid2,
    load: &VectorField2,
    lambdas: &[f64],
    opts: &SolveOptions,
    init: Option<&StressField2>,
) -> Result<SweepResult> {
    if lambdas.is_empty() {
        return Err(Error::InvalidInput("empty lambda list".into()));
    }
    if lambdas.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidInput("lambda list must be strictly ascending".into()));
    }
    if lambdas.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
        return Err(Error::InvalidInput("lambda values must be positive and finite".into()));
    }
    let mut report = ExperimentReport::new(
        "lambda_sweep",
        &["lambda", "energy", "gap", "residual", "hminus1", "iters"],
        opts.seed,
    );
    let hm1 = crate::hm1::hminus1_norm2(load)?;
    let limit = solve_limit_field2(grid, load, opts, init)?;
    report.param("limit_objective", &fmt_f64(limit.1.objective));
    let mut warm = limit.0.clone();
    let mut per_lambda = Vec::with_capacity(lambdas.len());
    for &lam in lambdas {
        match solve_finite_lambda2(grid, load, lam, opts, &warm) {
            Ok((sig, rep)) => {
                let e_lim = sig.energy(Density::HLimit);
                report.push_row(vec![
                    lam,
                    rep.objective,
                    e_lim - rep.objective,
                    rep.residual,
                    hm1,
                    rep.iterations as f64,
                ]);
                report.check(
                    &format!("solve lambda={lam:.3e} feasible"),
                    rep.residual <= opts.tol_residual.max(1e-4),
                    format!("residual {:.3e}", rep.residual),
                );
                warm = sig.clone();
                per_lambda.push((lam, Some((sig, rep))));
            }
            Err(e) => {
                report.push_row(vec![lam, f64::NAN, f64::NAN, f64::NAN, hm1, f64::NAN]);
                report.check(&format!("solve lambda={lam:.3e} feasible"), false, e.to_string());
                per_lambda.push((lam, None));
            }
        }
    }
    Ok(SweepResult { report, limit, per_lambda })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::load::{assemble_load, LoadSpec, Side};
    use approx::assert_relative_eq;

    fn uniaxial_load(grid: &Grid2) -> VectorField2 {
        let spec = LoadSpec {
            tractions: vec![(Side::Left, [-1.0, 0.0]), (Side::Right, [1.0, 0.0])],
            points: vec![],
            patches: vec![],
        };
        assemble_load(&spec, grid, 0.25).expect("balanced uniaxial tractions")
    }

    #[test]
    fn truss_lp_single_bar_and_roof() {
        let (gs, loads) = crate::truss::single_bar_instance();
        let sol = solve_truss_lp_certified(&gs, &loads).unwrap();
        assert_relative_eq!(sol.weight, 1.0, epsilon = 1e-9);
        assert!(sol.certificate_gap <= 1e-9);
        assert!(sol.dual_feasibility <= 1e-9);
        assert!(sol.residual <= 1e-12);

        let (gs, loads) = crate::truss::roof_instance();
        let sol = solve_truss_lp_certified(&gs, &loads).unwrap();
        assert_relative_eq!(sol.weight, 2.0, epsilon = 1e-9);
        let s = std::f64::consts::SQRT_2 / 2.0;
        for &w in &sol.design.w {
            assert_relative_eq!(w.abs(), s, epsilon = 1e-9);
        }
        assert!(sol.certificate_gap <= 1e-9);
        assert!(sol.residual <= 1e-12);
    }

    #[test]
    fn truss_lp_zero_load_and_infeasible() {
        let (gs, _) = crate::truss::single_bar_instance();
        let sol = solve_truss_lp_certified(&gs, &PointLoadSet::default()).unwrap();
        assert_eq!(sol.weight, 0.0);
        // transverse load on a collinear structure is unbalanceable
        let bad = PointLoadSet { forces: vec![(0, [0.0, 1.0]), (1, [0.0, -1.0])] };
        assert!(solve_truss_lp_certified(&gs, &bad).is_err());
    }

    #[test]
    fn limit_solver_uniaxial_value_two() {
        let g = Grid2::unit(24).unwrap();
        let load = uniaxial_load(&g);
        let opts = SolveOptions { max_iter: 6000, ..SolveOptions::default() };
        let (sigma, rep) = solve_limit_field2(&g, &load, &opts, None).unwrap();
        assert!(
            (rep.objective - 2.0).abs() <= 0.02 * 2.0,
            "objective {} after {} iters (resid {:.2e})",
            rep.objective,
            rep.iterations,
            rep.residual
        );
        assert!(rep.residual <= 1e-4, "residual {:.3e}", rep.residual);
        // any feasible admissible field obeys the pointwise flux bound
        // 2ρ ≥ 2σ₁₁, so E ≥ 2·∫σ₁₁ = 2: the objective brackets 2 from above
        assert!(rep.objective >= 2.0 - 1e-4, "below certified bound: {}", rep.objective);
        // feasibility + zero boundary shear force a constant unit
        // horizontal flux through every cell column
        for i in 0..g.nx {
            let flux: f64 = (0..g.ny).map(|j| sigma.s11[g.c(i, j)]).sum::<f64>() * g.hy;
            assert!((flux - 1.0).abs() <= 1e-3, "column {i} flux {flux}");
        }
        // checkpoint objective column nonincreasing by construction
        for w in rep.checkpoints.windows(2) {
            assert!(w[1].objective <= w[0].objective + 1e-12);
        }
    }

    #[test]
    fn limit_solver_zero_load_and_homogeneity() {
        let g = Grid2::unit(16).unwrap();
        let zero = VectorField2::zeros(g);
        let (_, rep) = solve_limit_field2(&g, &zero, &SolveOptions::default(), None).unwrap();
        assert!(rep.objective.abs() <= 1e-12);
        assert!(rep.converged);

        let load = uniaxial_load(&g);
        let opts = SolveOptions { max_iter: 3000, ..SolveOptions::default() };
        let (_, r1) = solve_limit_field2(&g, &load, &opts, None).unwrap();
        let mut load3 = load.clone();
        load3.scale(3.0);
        let (_, r3) = solve_limit_field2(&g, &load3, &opts, None).unwrap();
        assert_relative_eq!(r3.objective, 3.0 * r1.objective, max_relative = 0.02);
    }

    #[test]
    fn finite_lambda_descends_from_init_and_matches_branch_formula() {
        let g = Grid2::unit(16).unwrap();
        let load = uniaxial_load(&g);
        let opts = SolveOptions { max_iter: 120, ..SolveOptions::default() };
        let (sig_lim, _) = solve_limit_field2(&g, &load, &opts, None).unwrap();
        let lambda = 1e4;
        // low-branch identity at the init: E_λ(init) = E_lim(init) − 2λ^{-1/2}∫ab
        let e_lim = sig_lim.energy(Density::HLimit);
        let e_lam = sig_lim.energy(Density::HLambda(lambda));
        let mut det_int = 0.0;
        for j in 0..g.ny {
            for i in 0..g.nx {
                let t = sig_lim.at_center(i, j);
                let ev = t.eigvals();
                det_int += ev[0].abs() * ev[1].abs();
            }
        }
        det_int *= g.vol();
        assert_relative_eq!(
            e_lim - e_lam,
            2.0 * lambda.powf(-0.5) * det_int,
            max_relative = 1e-10
        );
        let (_, rep) = solve_finite_lambda2(&g, &load, lambda, &opts, &sig_lim).unwrap();
        assert!(
            rep.objective <= e_lam + crate::tol::DESCENT_SLACK,
            "finite-λ energy {} vs init energy {e_lam}",
            rep.objective
        );
        assert!(rep.residual <= 1e-4, "residual {:.3e}", rep.residual);
    }

    #[test]
    fn finite_lambda_zero_load_is_zero() {
        let g = Grid2::unit(12).unwrap();
        let zero = VectorField2::zeros(g);
        let init = StressField2::zeros(g);
        let (sig, rep) =
            solve_finite_lambda2(&g, &zero, 100.0, &SolveOptions::default(), &init).unwrap();
        assert!(rep.objective.abs() <= 1e-12);
        assert!(sig.norm() <= 1e-12);
        assert!(solve_finite_lambda2(&g, &zero, -1.0, &SolveOptions::default(), &init).is_err());
    }

    #[test]
    fn sweep_produces_row_per_lambda_and_validates_input() {
        let g = Grid2::unit(12).unwrap();
        let load = uniaxial_load(&g);
        let opts = SolveOptions { max_iter: 60, ..SolveOptions::default() };
        let out = lambda_sweep2(&g, &load, &[1e2, 1e3], &opts).unwrap();
        assert_eq!(out.report.rows.len(), 2);
        assert_eq!(out.per_lambda.len(), 2);
        assert!(lambda_sweep2(&g, &load, &[], &opts).is_err());
        assert!(lambda_sweep2(&g, &load, &[1e3, 1e2], &opts).is_err());
        assert!(lambda_sweep2(&g, &load, &[-1.0, 1.0], &opts).is_err());
    }

    #[test]
    fn sweep_zero_load_all_zero_energies() {
        let g = Grid2::unit(10).unwrap();
        let zero = VectorField2::zeros(g);
        let opts = SolveOptions { max_iter: 40, ..SolveOptions::default() };
        let out = lambda_sweep2(&g, &zero, &[10.0, 100.0], &opts).unwrap();
        for row in &out.report.rows {
            assert!(row[1].abs() <= 1e-12, "energy {}", row[1]);
        }
    }

    #[test]
    fn limit_solver_3d_zero_load() {
        let g = Grid3::unit(6).unwrap();
        let zero = VectorField3::zeros(g);
        let (_, rep) = solve_limit_field3(&g, &zero, &SolveOptions::default(), None).unwrap();
        assert!(rep.objective.abs() <= 1e-12);
    }
}
