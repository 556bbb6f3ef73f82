//! Load specifications, their discretization, and the mollification
//! schedule.
//!
//! A load is a balanced vector measure `g` supported in the closed box:
//! interior body-force patches, boundary tractions (a density against
//! surface measure on a box side), and point forces. The discrete load is a
//! face-centered [`VectorField2`] chosen so that each source reproduces its
//! analytic total force *exactly* (sources are normalized on the lattice),
//! hence a balanced specification yields a discretely balanced load:
//!
//! * tractions deposit on the outermost face layer of their side, scaled by
//!   `1/h` — a surface density smeared over one cell, converging weakly-* to
//!   `c·H^{n−1}⌞side`;
//! * point forces become normalized biweight bumps `η_ε`;
//! * patches deposit their constant density on the faces inside the
//!   rectangle.
//!
//! [`epsilon_schedule`] picks the dyadic mollification radius used by the
//! recovery experiments: the smallest `ε = 2^{-k}` with
//! `mass·ε^{-n}·sup η ≤ ¼√λ`, so that mollified competitors stay in the
//! low/middle branches of `h_λ` where the envelope gap is `O(λ^{-1/2})`.

use crate::field2::VectorField2;
use crate::grid::Grid2;
use crate::tol;
use crate::{Error, Result};

/// Tensor-product biweight mollifier `η_ε(x) = ε^{-n} Π η₁(xᵢ/ε)` with
/// `η₁(u) = (15/16)(1−u²)²` on `[−1,1]` (unit mass in 1D).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mollifier {
    /// Kernel radius `ε > 0`.
    pub eps: f64,
}

impl Mollifier {
    /// Supremum of the unit-scale 1D profile `η₁`.
    pub const ETA1_SUP: f64 = 15.0 / 16.0;

    /// New mollifier of radius `eps`.
    ///
    /// # Errors
    /// `eps` must be positive and finite.
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "mollifier radius must be positive, got {eps}"
            )));
        }
        Ok(Self { eps })
    }

    /// Unit-scale 1D profile `η₁(u)`, compactly supported on `[−1,1]`.
    pub fn eta1(u: f64) -> f64 {
        let t = 1.0 - u * u;
        if t <= 0.0 {
            0.0
        } else {
            Self::ETA1_SUP * t * t
        }
    }

    /// Supremum of the unit-scale n-dimensional tensor-product profile.
    pub fn eta_sup(n: usize) -> f64 {
        Self::ETA1_SUP.powi(n as i32)
    }

    /// Scaled 2D kernel `η_ε(dx, dy)`.
    pub fn eval2(&self, dx: f64, dy: f64) -> f64 {
        Self::eta1(dx / self.eps) * Self::eta1(dy / self.eps) / (self.eps * self.eps)
    }

    /// Scaled 3D kernel.
    pub fn eval3(&self, dx: f64, dy: f64, dz: f64) -> f64 {
        Self::eta1(dx / self.eps) * Self::eta1(dy / self.eps) * Self::eta1(dz / self.eps)
            / (self.eps * self.eps * self.eps)
    }

    /// Supremum of the scaled n-dimensional kernel, `ε^{-n}·sup η`.
    pub fn sup(&self, n: usize) -> f64 {
        Self::eta_sup(n) / self.eps.powi(n as i32)
    }
}

/// Smallest dyadic mollification radius `ε = 2^{-k}` (k ∈ ℤ) with
/// `mass·ε^{-n}·eta_sup ≤ ¼·λ^{1/2}`; monotone nonincreasing in `λ`.
///
/// # Errors
/// All arguments must be positive (`n ∈ {1,2,3}`).
pub fn epsilon_schedule(lambda: f64, mass: f64, eta_sup: f64, n: usize) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite() && mass > 0.0 && eta_sup > 0.0) {
        return Err(Error::InvalidInput(
            "epsilon_schedule needs positive lambda, mass, eta_sup".into(),
        ));
    }
    if !(1..=3).contains(&n) {
        return Err(Error::InvalidInput(format!("dimension n = {n} out of range")));
    }
    let satisfies =
        |eps: f64| mass * eps.powi(-(n as i32)) * eta_sup <= 0.25 * lambda.sqrt();
    // Continuum threshold, then snap to the dyadic lattice and verify with
    // the original inequality to be robust against log/pow roundoff.
    let thr = (4.0 * mass * eta_sup / lambda.sqrt()).powf(1.0 / n as f64);
    let mut eps = (2.0f64).powf(thr.log2().ceil());
    let mut guard = 0;
    while !satisfies(eps) && guard < 64 {
        eps *= 2.0;
        guard += 1;
    }
    while satisfies(eps * 0.5) && guard < 128 {
        eps *= 0.5;
        guard += 1;
    }
    Ok(eps)
}

/// A side of the rectangular domain boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `x = x0`.
    Left,
    /// `x = x0 + nx·hx`.
    Right,
    /// `y = y0`.
    Bottom,
    /// `y = y0 + ny·hy`.
    Top,
}

/// Analytic description of a balanced 2D load.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LoadSpec {
    /// Constant traction vectors on whole box sides.
    pub tractions: Vec<(Side, [f64; 2])>,
    /// Point forces `(position, force)`, replaced by `η_ε` bumps.
    pub points: Vec<([f64; 2], [f64; 2])>,
    /// Constant body-force densities on axis-aligned rectangles
    /// `([x0, x1, y0, y1], force density)`.
    pub patches: Vec<([f64; 4], [f64; 2])>,
}

impl LoadSpec {
    /// Analytic total force of the specification on the given grid
    /// (tractions integrate over the side length).
    pub fn total_force(&self, grid: &Grid2) -> [f64; 2] {
        let lx = grid.nx as f64 * grid.hx;
        let ly = grid.ny as f64 * grid.hy;
        let mut f = [0.0, 0.0];
        for (side, c) in &self.tractions {
            let len = match side {
                Side::Left | Side::Right => ly,
                Side::Bottom | Side::Top => lx,
            };
            f[0] += c[0] * len;
            f[1] += c[1] * len;
        }
        for (_, force) in &self.points {
            f[0] += force[0];
            f[1] += force[1];
        }
        for (rect, dens) in &self.patches {
            let area = (rect[1] - rect[0]).max(0.0) * (rect[3] - rect[2]).max(0.0);
            f[0] += dens[0] * area;
            f[1] += dens[1] * area;
        }
        f
    }

    /// Check balance `|total force| ≤ tol` per component, scaled by the
    /// gross force magnitude.
    pub fn is_balanced(&self, grid: &Grid2) -> bool {
        let f = self.total_force(grid);
        let scale = self.gross(grid).max(1.0);
        f[0].abs() <= tol::BALANCE * scale && f[1].abs() <= tol::BALANCE * scale
    }

    fn gross(&self, grid: &Grid2) -> f64 {
        let lx = grid.nx as f64 * grid.hx;
        let ly = grid.ny as f64 * grid.hy;
        let mut s = 0.0;
        for (side, c) in &self.tractions {
            let len = match side {
                Side::Left | Side::Right => ly,
                Side::Bottom | Side::Top => lx,
            };
            s += (c[0].abs() + c[1].abs()) * len;
        }
        for (_, force) in &self.points {
            s += force[0].abs() + force[1].abs();
        }
        for (rect, dens) in &self.patches {
            let area = (rect[1] - rect[0]).max(0.0) * (rect[3] - rect[2]).max(0.0);
            s += (dens[0].abs() + dens[1].abs()) * area;
        }
        s
    }
}

/// Discretize a balanced load onto face centers.
///
/// Every source is normalized on the lattice so its discrete total force
/// equals its analytic total exactly; see the module docs for the per-source
/// placement rules. `eps` is the bump radius used for point forces.
///
/// # Errors
/// Unbalanced specification; `eps < 2·max(hx,hy)` when point forces are
/// present; a source that misses the lattice entirely.
pub fn assemble_load(spec: &LoadSpec, grid: &Grid2, eps: f64) -> Result<VectorField2> {
    if !spec.is_balanced(grid) {
        let f = spec.total_force(grid);
        return Err(Error::InvalidInput(format!(
            "unbalanced load spec: total force ({}, {})",
            f[0], f[1]
        )));
    }
    let g = *grid;
    let mut out = VectorField2::zeros(g);
    let vol = g.vol();

    for (side, c) in &spec.tractions {
        // Outermost face layer of the side, scaled by 1/h across the side.
        match side {
            Side::Left => {
                for j in 0..g.ny {
                    out.u1[g.fx(0, j)] += c[0] / g.hx;
                }
                for j in 0..=g.ny {
                    out.u2[g.fy(0, j)] += c[1] / g.hx * lattice_share_y(&g, j);
                }
            }
            Side::Right => {
                for j in 0..g.ny {
                    out.u1[g.fx(g.nx, j)] += c[0] / g.hx;
                }
                for j in 0..=g.ny {
                    out.u2[g.fy(g.nx - 1, j)] += c[1] / g.hx * lattice_share_y(&g, j);
                }
            }
            Side::Bottom => {
                for i in 0..g.nx {
                    out.u2[g.fy(i, 0)] += c[1] / g.hy;
                }
                for i in 0..=g.nx {
                    out.u1[g.fx(i, 0)] += c[0] / g.hy * lattice_share_x(&g, i);
                }
            }
            Side::Top => {
                for i in 0..g.nx {
                    out.u2[g.fy(i, g.ny)] += c[1] / g.hy;
                }
                for i in 0..=g.nx {
                    out.u1[g.fx(i, g.ny - 1)] += c[0] / g.hy * lattice_share_x(&g, i);
                }
            }
        }
    }

    if !spec.points.is_empty() && eps < 2.0 * g.hmax() {
        return Err(Error::InvalidInput(format!(
            "point forces need eps >= 2 grid spacings, got eps = {eps}"
        )));
    }
    for (pos, force) in &spec.points {
        let m = Mollifier::new(eps)?;
        // Component 1 on x-faces.
        let mut bump1 = vec![0.0; (g.nx + 1) * g.ny];
        let mut mass1 = 0.0;
        for j in 0..g.ny {
            for i in 0..=g.nx {
                let [x, y] = g.xface_pos(i, j);
                let v = m.eval2(x - pos[0], y - pos[1]);
                bump1[g.fx(i, j)] = v;
                mass1 += v * vol;
            }
        }
        // Component 2 on y-faces.
        let mut bump2 = vec![0.0; g.nx * (g.ny + 1)];
        let mut mass2 = 0.0;
        for j in 0..=g.ny {
            for i in 0..g.nx {
                let [x, y] = g.yface_pos(i, j);
                let v = m.eval2(x - pos[0], y - pos[1]);
                bump2[g.fy(i, j)] = v;
                mass2 += v * vol;
            }
        }
        if (force[0] != 0.0 && mass1 <= 0.0) || (force[1] != 0.0 && mass2 <= 0.0) {
            return Err(Error::InvalidInput(format!(
                "point force at ({}, {}) misses the grid",
                pos[0], pos[1]
            )));
        }
        if force[0] != 0.0 {
            for (o, b) in out.u1.iter_mut().zip(&bump1) {
                *o += force[0] * b / mass1;
            }
        }
        if force[1] != 0.0 {
            for (o, b) in out.u2.iter_mut().zip(&bump2) {
                *o += force[1] * b / mass2;
            }
        }
    }

    for (rect, dens) in &spec.patches {
        let inside = |x: f64, y: f64| x >= rect[0] && x <= rect[1] && y >= rect[2] && y <= rect[3];
        let area = (rect[1] - rect[0]).max(0.0) * (rect[3] - rect[2]).max(0.0);
        if area <= 0.0 {
            return Err(Error::InvalidInput("degenerate patch rectangle".into()));
        }
        if dens[0] != 0.0 {
            let mut idxs = Vec::new();
            for j in 0..g.ny {
                for i in 0..=g.nx {
                    let [x, y] = g.xface_pos(i, j);
                    if inside(x, y) {
                        idxs.push(g.fx(i, j));
                    }
                }
            }
            if idxs.is_empty() {
                return Err(Error::InvalidInput("patch misses all x-faces".into()));
            }
            let per = dens[0] * area / (idxs.len() as f64 * vol);
            for ix in idxs {
                out.u1[ix] += per;
            }
        }
        if dens[1] != 0.0 {
            let mut idxs = Vec::new();
            for j in 0..=g.ny {
                for i in 0..g.nx {
                    let [x, y] = g.yface_pos(i, j);
                    if inside(x, y) {
                        idxs.push(g.fy(i, j));
                    }
                }
            }
            if idxs.is_empty() {
                return Err(Error::InvalidInput("patch misses all y-faces".into()));
            }
            let per = dens[1] * area / (idxs.len() as f64 * vol);
            for ix in idxs {
                out.u2[ix] += per;
            }
        }
    }

    // Defense in depth: the normalizations above make this exact.
    let f = out.total_force();
    let scale = spec.gross(grid).max(1.0);
    if f[0].abs() > tol::BALANCE * scale || f[1].abs() > tol::BALANCE * scale {
        return Err(Error::Numerical(format!(
            "assembled load unbalanced: ({}, {})",
            f[0], f[1]
        )));
    }
    Ok(out)
}

/// Weight of the transverse face row `j` when smearing a side traction: the
/// boundary rows of the (n+1)-point face lattice represent half cells.
fn lattice_share_y(g: &Grid2, j: usize) -> f64 {
    if j == 0 || j == g.ny {
        0.5
    } else {
        1.0
    }
}

/// x-analog of [`lattice_share_y`].
fn lattice_share_x(g: &Grid2, i: usize) -> f64 {
    if i == 0 || i == g.nx {
        0.5
    } else {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn schedule_hand_examples() {
        // λ=16, mass=1, sup=1, n=2: need ε² ≥ 1 → ε = 1.
        assert_relative_eq!(epsilon_schedule(16.0, 1.0, 1.0, 2).unwrap(), 1.0);
        // λ=1e6: threshold 0.0632…, smallest dyadic above is 1/8.
        assert_relative_eq!(epsilon_schedule(1e6, 1.0, 1.0, 2).unwrap(), 0.125);
    }

    #[test]
    fn schedule_monotone_in_lambda() {
        let mut prev = f64::INFINITY;
        for k in 1..32 {
            let lambda = (1.6f64).powi(k) * 10.0;
            let e = epsilon_schedule(lambda, 1.0, Mollifier::eta_sup(2), 2).unwrap();
            assert!(e <= prev, "schedule not monotone at λ = {lambda}");
            // the defining inequality itself
            assert!(1.0 * e.powi(-2) * Mollifier::eta_sup(2) <= 0.25 * lambda.sqrt());
            prev = e;
        }
        assert!(prev < 0.1, "ε must tend to zero");
    }

    #[test]
    fn mollifier_profile() {
        assert_relative_eq!(Mollifier::eta1(0.0), 15.0 / 16.0);
        assert_eq!(Mollifier::eta1(1.0), 0.0);
        assert_eq!(Mollifier::eta1(-2.0), 0.0);
        let m = Mollifier::new(0.5).unwrap();
        assert_relative_eq!(m.sup(2), (15.0f64 / 16.0).powi(2) * 4.0);
        assert!(Mollifier::new(0.0).is_err());
        // 1D unit mass: Simpson check of ∫η₁ over [−1,1]
        let n = 20_000;
        let h = 2.0 / n as f64;
        let mut s = 0.0;
        for i in 0..n {
            let a = -1.0 + i as f64 * h;
            s += h / 6.0 * (Mollifier::eta1(a) + 4.0 * Mollifier::eta1(a + 0.5 * h) + Mollifier::eta1(a + h));
        }
        assert_relative_eq!(s, 1.0, max_relative = 1e-10);
    }

    #[test]
    fn balanced_point_pair_assembles_to_zero_total() {
        let g = Grid2::unit(32).unwrap();
        let spec = LoadSpec {
            points: vec![([0.25, 0.5], [1.0, 0.0]), ([0.75, 0.5], [-1.0, 0.0])],
            ..Default::default()
        };
        let load = assemble_load(&spec, &g, 0.1).unwrap();
        let f = load.total_force();
        assert!(f[0].abs() <= tol::BALANCE && f[1].abs() <= tol::BALANCE);
        assert!(load.sup_abs() > 0.0);
        // Antisymmetric bumps: u1 field is odd under x ↦ 1−x.
        for j in 0..g.ny {
            for i in 0..=g.nx {
                let a = load.u1[g.fx(i, j)];
                let b = load.u1[g.fx(g.nx - i, j)];
                assert!((a + b).abs() <= 1e-12, "odd symmetry violated");
            }
        }
    }

    #[test]
    fn uniaxial_traction_matches_indicator_divergence() {
        // g from tractions ∓e₁ equals −div of σ = e₁⊗e₁·1_Ω exactly.
        let g = Grid2::unit(16).unwrap();
        let spec = LoadSpec {
            tractions: vec![(Side::Left, [-1.0, 0.0]), (Side::Right, [1.0, 0.0])],
            ..Default::default()
        };
        let load = assemble_load(&spec, &g, 0.0).unwrap();
        let sigma = crate::field2::StressField2::from_fn(g, |_, _| {
            crate::tensor::SymTensor2::diag(1.0, 0.0)
        });
        let mut minus_div = sigma.div();
        minus_div.scale(-1.0);
        for (a, b) in load.u1.iter().zip(&minus_div.u1) {
            assert!((a - b).abs() <= 1e-12);
        }
        for (a, b) in load.u2.iter().zip(&minus_div.u2) {
            assert!((a - b).abs() <= 1e-12);
        }
        // only boundary faces carry load
        for j in 0..g.ny {
            for i in 1..g.nx {
                assert_eq!(load.u1[g.fx(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn unbalanced_spec_rejected() {
        let g = Grid2::unit(8).unwrap();
        let spec = LoadSpec {
            points: vec![([0.5, 0.5], [1.0, 0.0])],
            ..Default::default()
        };
        assert!(assemble_load(&spec, &g, 0.3).is_err());
        // under-resolved bump radius
        let spec2 = LoadSpec {
            points: vec![([0.25, 0.5], [1.0, 0.0]), ([0.75, 0.5], [-1.0, 0.0])],
            ..Default::default()
        };
        assert!(assemble_load(&spec2, &g, 0.1).is_err()); // 2h = 0.25 > 0.1
    }

    #[test]
    fn patch_total_force_exact() {
        let g = Grid2::unit(20).unwrap();
        let spec = LoadSpec {
            patches: vec![
                ([0.1, 0.43, 0.2, 0.5], [0.0, 2.0]),
                ([0.5, 0.83, 0.2, 0.5], [0.0, -2.0]),
            ],
            ..Default::default()
        };
        let load = assemble_load(&spec, &g, 0.0).unwrap();
        let f = load.total_force();
        assert!(f[0].abs() <= 1e-12 && f[1].abs() <= 1e-12);
    }

    #[test]
    fn refined_loads_share_moments() {
        // Weak-* convergence proxy: first moments against a fixed smooth
        // test function converge as the grid refines.
        let test_fn = |x: f64, y: f64| x.exp() * y;
        let spec = LoadSpec {
            points: vec![([0.3, 0.5], [0.0, 1.0]), ([0.7, 0.5], [0.0, -1.0])],
            ..Default::default()
        };
        let moment = |n: usize| -> f64 {
            let g = Grid2::unit(n).unwrap();
            let load = assemble_load(&spec, &g, 0.125).unwrap();
            let mut acc = 0.0;
            for j in 0..=g.ny {
                for i in 0..g.nx {
                    let [x, y] = g.yface_pos(i, j);
                    acc += load.u2[g.fy(i, j)] * test_fn(x, y);
                }
            }
            acc * g.vol()
        };
        // analytic moment of the continuum load (η_ε bumps at the two points)
        // differences between successive refinements must shrink
        let m1 = moment(32);
        let m2 = moment(64);
        let m3 = moment(128);
        assert!((m3 - m2).abs() < (m2 - m1).abs());
        // and the coarsest is already within a few percent of the finest
        assert!((m1 - m3).abs() <= 0.05 * m3.abs().max(0.1));
    }
}
