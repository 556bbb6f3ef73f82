//! 2D staggered stress and velocity fields, with the discrete operators of
//! the continuum problems: divergence, symmetrized gradient, center
//! averaging, energy quadrature, mollification and snapshots.
//!
//! Layout (see [`crate::grid`]): `σ₁₁, σ₂₂` at cell centers, `σ₁₂` at cell
//! corners, `u₁` at x-face centers, `u₂` at y-face centers. Every first
//! derivative is a two-point difference landing on the lattice that consumes
//! it; fields are extended by zero outside the box. With the volume-weighted
//! inner products below (off-diagonal components count twice, mirroring the
//! Frobenius pairing of symmetric tensors), discrete integration by parts
//! `⟨div σ, u⟩ = −⟨σ, e(u)⟩` holds to machine precision, which is the
//! discrete meaning of the equilibrium constraint `−div σ = g`.

use crate::conv::{conv_separable, PadMode};
use crate::grid::Grid2;
use crate::integrands::Density;
use crate::report::fmt_f64;
use crate::tensor::SymTensor2;
use crate::{Error, Result};
use std::io::{Read as _, Write as _};
use std::path::Path;

/// Symmetric 2-tensor field on the staggered lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct StressField2 {
    /// Grid the field lives on.
    pub grid: Grid2,
    /// `σ₁₁` at cell centers, `nx·ny`.
    pub s11: Vec<f64>,
    /// `σ₂₂` at cell centers, `nx·ny`.
    pub s22: Vec<f64>,
    /// `σ₁₂` at cell corners, `(nx+1)·(ny+1)`.
    pub s12: Vec<f64>,
}

/// Vector field (velocities, loads) on face centers.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField2 {
    /// Grid the field lives on.
    pub grid: Grid2,
    /// x-component at x-faces, `(nx+1)·ny`.
    pub u1: Vec<f64>,
    /// y-component at y-faces, `nx·(ny+1)`.
    pub u2: Vec<f64>,
}

/// Cell-centered symmetric tensor field — the range of the center-averaging
/// map `M` and the variable the pointwise proximal steps act on.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterField2 {
    /// Grid the field lives on.
    pub grid: Grid2,
    /// `τ₁₁` per cell.
    pub t11: Vec<f64>,
    /// `τ₂₂` per cell.
    pub t22: Vec<f64>,
    /// `τ₁₂` per cell.
    pub t12: Vec<f64>,
}

impl StressField2 {
    /// All-zero field.
    pub fn zeros(grid: Grid2) -> Self {
        Self {
            grid,
            s11: vec![0.0; grid.cells()],
            s22: vec![0.0; grid.cells()],
            s12: vec![0.0; (grid.nx + 1) * (grid.ny + 1)],
        }
    }

    /// Sample a tensor-valued function at the natural lattice positions
    /// (diagonal components at centers, shear at corners).
    pub fn from_fn(grid: Grid2, f: impl Fn(f64, f64) -> SymTensor2) -> Self {
        let mut out = Self::zeros(grid);
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let [x, y] = grid.cell_center(i, j);
                let t = f(x, y);
                out.s11[grid.c(i, j)] = t.a11;
                out.s22[grid.c(i, j)] = t.a22;
            }
        }
        for j in 0..=grid.ny {
            for i in 0..=grid.nx {
                let [x, y] = grid.corner_pos(i, j);
                out.s12[grid.k(i, j)] = f(x, y).a12;
            }
        }
        out
    }

    /// Tensor at cell `(i,j)` with the shear averaged from its four corners
    /// (the map `M`).
    pub fn at_center(&self, i: usize, j: usize) -> SymTensor2 {
        let g = &self.grid;
        let m12 = 0.25
            * (self.s12[g.k(i, j)]
                + self.s12[g.k(i + 1, j)]
                + self.s12[g.k(i, j + 1)]
                + self.s12[g.k(i + 1, j + 1)]);
        SymTensor2::new(self.s11[g.c(i, j)], self.s22[g.c(i, j)], m12)
    }

    /// Discrete divergence, landing on face centers. The field is extended
    /// by zero outside the box, so boundary faces see one-sided differences
    /// against zero.
    pub fn div(&self) -> VectorField2 {
        let g = &self.grid;
        let (nx, ny, hx, hy) = (g.nx, g.ny, g.hx, g.hy);
        let mut out = VectorField2::zeros(*g);
        for j in 0..ny {
            for i in 0..=nx {
                let right = if i < nx { self.s11[g.c(i, j)] } else { 0.0 };
                let left = if i > 0 { self.s11[g.c(i - 1, j)] } else { 0.0 };
                out.u1[g.fx(i, j)] = (right - left) / hx
                    + (self.s12[g.k(i, j + 1)] - self.s12[g.k(i, j)]) / hy;
            }
        }
        for j in 0..=ny {
            for i in 0..nx {
                let top = if j < ny { self.s22[g.c(i, j)] } else { 0.0 };
                let bot = if j > 0 { self.s22[g.c(i, j - 1)] } else { 0.0 };
                out.u2[g.fy(i, j)] = (top - bot) / hy
                    + (self.s12[g.k(i + 1, j)] - self.s12[g.k(i, j)]) / hx;
            }
        }
        out
    }

    /// Center-averaging map `M`: diagonal components pass through, shear is
    /// the mean of the four surrounding corners.
    pub fn m_avg(&self) -> CenterField2 {
        let g = &self.grid;
        let mut out = CenterField2::zeros(*g);
        for j in 0..g.ny {
            for i in 0..g.nx {
                let t = self.at_center(i, j);
                let c = g.c(i, j);
                out.t11[c] = t.a11;
                out.t22[c] = t.a22;
                out.t12[c] = t.a12;
            }
        }
        out
    }

    /// Midpoint-quadrature energy `Σ_cells density(τ_cell)·vol` with shear
    /// averaged to centers.
    pub fn energy(&self, density: Density) -> f64 {
        let g = &self.grid;
        let mut acc = 0.0;
        for j in 0..g.ny {
            for i in 0..g.nx {
                acc += density.eval2(&self.at_center(i, j));
            }
        }
        acc * g.vol()
    }

    /// Volume-weighted inner product with factor 2 on the shear block.
    pub fn dot(&self, other: &Self) -> f64 {
        let mut acc = 0.0;
        for (a, b) in self.s11.iter().zip(&other.s11) {
            acc += a * b;
        }
        for (a, b) in self.s22.iter().zip(&other.s22) {
            acc += a * b;
        }
        for (a, b) in self.s12.iter().zip(&other.s12) {
            acc += 2.0 * a * b;
        }
        acc * self.grid.vol()
    }

    /// Norm induced by [`Self::dot`].
    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// `self += a·other`.
    pub fn axpy(&mut self, a: f64, other: &Self) {
        for (x, y) in self.s11.iter_mut().zip(&other.s11) {
            *x += a * y;
        }
        for (x, y) in self.s22.iter_mut().zip(&other.s22) {
            *x += a * y;
        }
        for (x, y) in self.s12.iter_mut().zip(&other.s12) {
            *x += a * y;
        }
    }

    /// `self *= a`.
    pub fn scale(&mut self, a: f64) {
        for x in self.s11.iter_mut().chain(self.s22.iter_mut()).chain(self.s12.iter_mut()) {
            *x *= a;
        }
    }

    /// Lattice-sum surrogate of the componentwise integral
    /// `(∫σ₁₁, ∫σ₂₂, ∫σ₁₂)`, each as `vol·Σ` over the component's own
    /// lattice. Used for mass-preservation checks on a fixed lattice.
    pub fn integral(&self) -> [f64; 3] {
        let v = self.grid.vol();
        [
            v * self.s11.iter().sum::<f64>(),
            v * self.s22.iter().sum::<f64>(),
            v * self.s12.iter().sum::<f64>(),
        ]
    }

    /// Largest absolute entry over all components.
    pub fn sup_abs(&self) -> f64 {
        self.s11
            .iter()
            .chain(&self.s22)
            .chain(&self.s12)
            .fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    /// Zero the shear component on the boundary lines of the corner
    /// lattice (`i ∈ {0, nx}` or `j ∈ {0, ny}`).
    ///
    /// Under zero extension the divergence stencil turns a boundary corner
    /// shear into a tangential traction on the adjacent edge, but the
    /// outermost shear line has no face row of its own to balance against:
    /// left free, it acts as an unphysical "shear rail" along the boundary.
    /// Restricting stress fields to this subspace enforces the traction
    /// condition `σ·n = 0` on unloaded edges exactly (edge loads enter
    /// through `g` as near-boundary face layers, never as boundary shear).
    pub fn zero_boundary_shear(&mut self) {
        let g = self.grid;
        for j in 0..=g.ny {
            self.s12[g.k(0, j)] = 0.0;
            self.s12[g.k(g.nx, j)] = 0.0;
        }
        for i in 0..=g.nx {
            self.s12[g.k(i, 0)] = 0.0;
            self.s12[g.k(i, g.ny)] = 0.0;
        }
    }

    /// Mollify each component with the tensor-product biweight kernel of
    /// radius `eps` (see [`crate::load::Mollifier`]).
    ///
    /// # Errors
    /// The kernel must be resolved by at least two cells per axis
    /// (`eps ≥ 2·max(hx,hy)`).
    pub fn mollify(&self, eps: f64, pad: PadMode) -> Result<Self> {
        let g = &self.grid;
        let (kx, ky) = kernels2(g, eps)?;
        let mut out = self.clone();
        conv_separable(&mut out.s11, &[g.nx, g.ny], &[kx.clone(), ky.clone()], pad);
        conv_separable(&mut out.s22, &[g.nx, g.ny], &[kx.clone(), ky.clone()], pad);
        conv_separable(&mut out.s12, &[g.nx + 1, g.ny + 1], &[kx, ky], pad);
        Ok(out)
    }

    /// Write the flat binary snapshot (dimension, dims, origin, spacing,
    /// then `σ₁₁, σ₂₂, σ₁₂` as little-endian f64).
    ///
    /// # Errors
    /// I/O failures.
    pub fn write_bin(&self, path: &Path) -> Result<()> {
        write_snapshot(
            path,
            b"MCSTRS2\0",
            &[self.grid.nx as u64, self.grid.ny as u64],
            &[self.grid.x0, self.grid.y0, self.grid.hx, self.grid.hy],
            &[&self.s11, &self.s22, &self.s12],
        )
    }

    /// Read a snapshot written by [`Self::write_bin`].
    ///
    /// # Errors
    /// I/O failures, bad magic, or inconsistent lengths.
    pub fn read_bin(path: &Path) -> Result<Self> {
        let (dims, meta, mut arrays) =
            read_snapshot(path, b"MCSTRS2\0", 2, 4, &|d: &[u64]| {
                let (nx, ny) = (d[0] as usize, d[1] as usize);
                vec![nx * ny, nx * ny, (nx + 1) * (ny + 1)]
            })?;
        let grid = Grid2::new(
            dims[0] as usize,
            dims[1] as usize,
            [meta[0], meta[0] + dims[0] as f64 * meta[2]],
            [meta[1], meta[1] + dims[1] as f64 * meta[3]],
        )?;
        let s12 = arrays.pop().unwrap();
        let s22 = arrays.pop().unwrap();
        let s11 = arrays.pop().unwrap();
        Ok(Self { grid, s11, s22, s12 })
    }

    /// CSV of cell-center samples (`x,y,s11,s22,s12`), shear averaged, for
    /// plotting.
    pub fn csv(&self) -> String {
        let mut out = String::from("x,y,s11,s22,s12\n");
        let g = &self.grid;
        for j in 0..g.ny {
            for i in 0..g.nx {
                let [x, y] = g.cell_center(i, j);
                let t = self.at_center(i, j);
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    fmt_f64(x),
                    fmt_f64(y),
                    fmt_f64(t.a11),
                    fmt_f64(t.a22),
                    fmt_f64(t.a12)
                ));
            }
        }
        out
    }
}

impl VectorField2 {
    /// All-zero field.
    pub fn zeros(grid: Grid2) -> Self {
        Self {
            grid,
            u1: vec![0.0; (grid.nx + 1) * grid.ny],
            u2: vec![0.0; grid.nx * (grid.ny + 1)],
        }
    }

    /// Sample a vector-valued function at face centers.
    pub fn from_fn(grid: Grid2, f: impl Fn(f64, f64) -> [f64; 2]) -> Self {
        let mut out = Self::zeros(grid);
        for j in 0..grid.ny {
            for i in 0..=grid.nx {
                let [x, y] = grid.xface_pos(i, j);
                out.u1[grid.fx(i, j)] = f(x, y)[0];
            }
        }
        for j in 0..=grid.ny {
            for i in 0..grid.nx {
                let [x, y] = grid.yface_pos(i, j);
                out.u2[grid.fy(i, j)] = f(x, y)[1];
            }
        }
        out
    }

    /// Symmetrized gradient `e(u)`, landing on the stress lattice. `u` is
    /// extended by zero outside the box.
    pub fn symgrad(&self) -> StressField2 {
        let g = &self.grid;
        let (nx, ny, hx, hy) = (g.nx, g.ny, g.hx, g.hy);
        let mut out = StressField2::zeros(*g);
        for j in 0..ny {
            for i in 0..nx {
                out.s11[g.c(i, j)] = (self.u1[g.fx(i + 1, j)] - self.u1[g.fx(i, j)]) / hx;
                out.s22[g.c(i, j)] = (self.u2[g.fy(i, j + 1)] - self.u2[g.fy(i, j)]) / hy;
            }
        }
        for j in 0..=ny {
            for i in 0..=nx {
                let u1a = if j < ny { self.u1[g.fx(i, j)] } else { 0.0 };
                let u1b = if j > 0 { self.u1[g.fx(i, j - 1)] } else { 0.0 };
                let u2a = if i < nx { self.u2[g.fy(i, j)] } else { 0.0 };
                let u2b = if i > 0 { self.u2[g.fy(i - 1, j)] } else { 0.0 };
                out.s12[g.k(i, j)] = 0.5 * ((u1a - u1b) / hy + (u2a - u2b) / hx);
            }
        }
        out
    }

    /// Volume-weighted inner product.
    pub fn dot(&self, other: &Self) -> f64 {
        let mut acc = 0.0;
        for (a, b) in self.u1.iter().zip(&other.u1) {
            acc += a * b;
        }
        for (a, b) in self.u2.iter().zip(&other.u2) {
            acc += a * b;
        }
        acc * self.grid.vol()
    }

    /// Norm induced by [`Self::dot`].
    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// `self += a·other`.
    pub fn axpy(&mut self, a: f64, other: &Self) {
        for (x, y) in self.u1.iter_mut().zip(&other.u1) {
            *x += a * y;
        }
        for (x, y) in self.u2.iter_mut().zip(&other.u2) {
            *x += a * y;
        }
    }

    /// `self *= a`.
    pub fn scale(&mut self, a: f64) {
        for x in self.u1.iter_mut().chain(self.u2.iter_mut()) {
            *x *= a;
        }
    }

    /// Total discrete force `vol·(Σu₁, Σu₂)` — zero for balanced loads.
    pub fn total_force(&self) -> [f64; 2] {
        let v = self.grid.vol();
        [
            v * self.u1.iter().sum::<f64>(),
            v * self.u2.iter().sum::<f64>(),
        ]
    }

    /// Largest absolute entry.
    pub fn sup_abs(&self) -> f64 {
        self.u1
            .iter()
            .chain(&self.u2)
            .fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    /// Mollify both components (same kernel contract as
    /// [`StressField2::mollify`]).
    ///
    /// # Errors
    /// Under-resolved kernel.
    pub fn mollify(&self, eps: f64, pad: PadMode) -> Result<Self> {
        let g = &self.grid;
        let (kx, ky) = kernels2(g, eps)?;
        let mut out = self.clone();
        conv_separable(&mut out.u1, &[g.nx + 1, g.ny], &[kx.clone(), ky.clone()], pad);
        conv_separable(&mut out.u2, &[g.nx, g.ny + 1], &[kx, ky], pad);
        Ok(out)
    }

    /// Write the flat binary snapshot.
    ///
    /// # Errors
    /// I/O failures.
    pub fn write_bin(&self, path: &Path) -> Result<()> {
        write_snapshot(
            path,
            b"MCVECT2\0",
            &[self.grid.nx as u64, self.grid.ny as u64],
            &[self.grid.x0, self.grid.y0, self.grid.hx, self.grid.hy],
            &[&self.u1, &self.u2],
        )
    }

    /// Read a snapshot written by [`Self::write_bin`].
    ///
    /// # Errors
    /// I/O failures, bad magic, or inconsistent lengths.
    pub fn read_bin(path: &Path) -> Result<Self> {
        let (dims, meta, mut arrays) =
            read_snapshot(path, b"MCVECT2\0", 2, 4, &|d: &[u64]| {
                let (nx, ny) = (d[0] as usize, d[1] as usize);
                vec![(nx + 1) * ny, nx * (ny + 1)]
            })?;
        let grid = Grid2::new(
            dims[0] as usize,
            dims[1] as usize,
            [meta[0], meta[0] + dims[0] as f64 * meta[2]],
            [meta[1], meta[1] + dims[1] as f64 * meta[3]],
        )?;
        let u2 = arrays.pop().unwrap();
        let u1 = arrays.pop().unwrap();
        Ok(Self { grid, u1, u2 })
    }

    /// CSV of cell-center samples (`x,y,u1,u2`), faces averaged to centers.
    pub fn csv(&self) -> String {
        let mut out = String::from("x,y,u1,u2\n");
        let g = &self.grid;
        for j in 0..g.ny {
            for i in 0..g.nx {
                let [x, y] = g.cell_center(i, j);
                let v1 = 0.5 * (self.u1[g.fx(i, j)] + self.u1[g.fx(i + 1, j)]);
                let v2 = 0.5 * (self.u2[g.fy(i, j)] + self.u2[g.fy(i, j + 1)]);
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    fmt_f64(x),
                    fmt_f64(y),
                    fmt_f64(v1),
                    fmt_f64(v2)
                ));
            }
        }
        out
    }
}

impl CenterField2 {
    /// All-zero field.
    pub fn zeros(grid: Grid2) -> Self {
        let n = grid.cells();
        Self {
            grid,
            t11: vec![0.0; n],
            t22: vec![0.0; n],
            t12: vec![0.0; n],
        }
    }

    /// Tensor stored in cell `(i,j)`.
    pub fn at(&self, i: usize, j: usize) -> SymTensor2 {
        let c = self.grid.c(i, j);
        SymTensor2::new(self.t11[c], self.t22[c], self.t12[c])
    }

    /// Overwrite cell `(i,j)`.
    pub fn set(&mut self, i: usize, j: usize, t: SymTensor2) {
        let c = self.grid.c(i, j);
        self.t11[c] = t.a11;
        self.t22[c] = t.a22;
        self.t12[c] = t.a12;
    }

    /// Adjoint `M*` of the center-averaging map under the weighted inner
    /// products: diagonal components pass through, each cell's shear is
    /// deposited with coefficient ¼ onto its four corners.
    pub fn m_star(&self) -> StressField2 {
        let g = &self.grid;
        let mut out = StressField2::zeros(*g);
        out.s11.copy_from_slice(&self.t11);
        out.s22.copy_from_slice(&self.t22);
        for j in 0..g.ny {
            for i in 0..g.nx {
                let v = 0.25 * self.t12[g.c(i, j)];
                out.s12[g.k(i, j)] += v;
                out.s12[g.k(i + 1, j)] += v;
                out.s12[g.k(i, j + 1)] += v;
                out.s12[g.k(i + 1, j + 1)] += v;
            }
        }
        out
    }

    /// Volume-weighted inner product (factor 2 on shear).
    pub fn dot(&self, other: &Self) -> f64 {
        let mut acc = 0.0;
        for (a, b) in self.t11.iter().zip(&other.t11) {
            acc += a * b;
        }
        for (a, b) in self.t22.iter().zip(&other.t22) {
            acc += a * b;
        }
        for (a, b) in self.t12.iter().zip(&other.t12) {
            acc += 2.0 * a * b;
        }
        acc * self.grid.vol()
    }

    /// Norm induced by [`Self::dot`].
    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// `self += a·other`.
    pub fn axpy(&mut self, a: f64, other: &Self) {
        for (x, y) in self.t11.iter_mut().zip(&other.t11) {
            *x += a * y;
        }
        for (x, y) in self.t22.iter_mut().zip(&other.t22) {
            *x += a * y;
        }
        for (x, y) in self.t12.iter_mut().zip(&other.t12) {
            *x += a * y;
        }
    }

    /// `self *= a`.
    pub fn scale(&mut self, a: f64) {
        for x in self.t11.iter_mut().chain(self.t22.iter_mut()).chain(self.t12.iter_mut()) {
            *x *= a;
        }
    }
}

/// Biweight kernels for both axes, validating resolution.
pub(crate) fn kernels2(g: &Grid2, eps: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    Ok((kernel1d(g.hx, eps)?, kernel1d(g.hy, eps)?))
}

/// Normalized 1D biweight kernel samples `η₁(m·h/ε)`, `m = −M..M`.
///
/// # Errors
/// `eps` must be positive and resolved by at least two cells (`eps ≥ 2h`).
pub(crate) fn kernel1d(h: f64, eps: f64) -> Result<Vec<f64>> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidInput(format!("mollifier radius must be positive, got {eps}")));
    }
    if eps < 2.0 * h {
        return Err(Error::InvalidInput(format!(
            "under-resolved kernel: eps = {eps} but cell size {h} (need eps >= 2h)"
        )));
    }
    let m = (eps / h).floor() as usize;
    let mut w = Vec::with_capacity(2 * m + 1);
    for k in -(m as isize)..=(m as isize) {
        let u = k as f64 * h / eps;
        let t = (1.0 - u * u).max(0.0);
        w.push(15.0 / 16.0 * t * t);
    }
    let s: f64 = w.iter().sum();
    for v in &mut w {
        *v /= s;
    }
    Ok(w)
}

pub(crate) fn write_snapshot(
    path: &Path,
    magic: &[u8; 8],
    dims: &[u64],
    meta: &[f64],
    arrays: &[&[f64]],
) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(magic)?;
    f.write_all(&(dims.len() as u64).to_le_bytes())?;
    for &d in dims {
        f.write_all(&d.to_le_bytes())?;
    }
    for &x in meta {
        f.write_all(&x.to_le_bytes())?;
    }
    for arr in arrays {
        for &x in *arr {
            f.write_all(&x.to_le_bytes())?;
        }
    }
    f.flush()?;
    Ok(())
}

pub(crate) type SnapshotParts = (Vec<u64>, Vec<f64>, Vec<Vec<f64>>);

pub(crate) fn read_snapshot(
    path: &Path,
    magic: &[u8; 8],
    ndims: usize,
    nmeta: usize,
    array_lens: &dyn Fn(&[u64]) -> Vec<usize>,
) -> Result<SnapshotParts> {
    let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut m = [0u8; 8];
    f.read_exact(&mut m)?;
    if &m != magic {
        return Err(Error::InvalidInput(format!(
            "bad snapshot magic in {}: expected {:?}",
            path.display(),
            String::from_utf8_lossy(magic)
        )));
    }
    let mut b8 = [0u8; 8];
    f.read_exact(&mut b8)?;
    let n = u64::from_le_bytes(b8) as usize;
    if n != ndims {
        return Err(Error::InvalidInput(format!(
            "snapshot dimension mismatch in {}: got {n}, expected {ndims}",
            path.display()
        )));
    }
    let mut dims = Vec::with_capacity(n);
    for _ in 0..n {
        f.read_exact(&mut b8)?;
        dims.push(u64::from_le_bytes(b8));
    }
    let mut meta = Vec::with_capacity(nmeta);
    for _ in 0..nmeta {
        f.read_exact(&mut b8)?;
        meta.push(f64::from_le_bytes(b8));
    }
    let mut arrays = Vec::new();
    for len in array_lens(&dims) {
        let mut a = Vec::with_capacity(len);
        for _ in 0..len {
            f.read_exact(&mut b8)?;
            a.push(f64::from_le_bytes(b8));
        }
        arrays.push(a);
    }
    // Must be at EOF now.
    let mut probe = [0u8; 1];
    if f.read(&mut probe)? != 0 {
        return Err(Error::InvalidInput(format!(
            "trailing bytes in snapshot {}",
            path.display()
        )));
    }
    Ok((dims, meta, arrays))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tol;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rand_stress(g: Grid2, rng: &mut ChaCha8Rng) -> StressField2 {
        let mut s = StressField2::zeros(g);
        for v in s.s11.iter_mut().chain(s.s22.iter_mut()).chain(s.s12.iter_mut()) {
            *v = rng.gen_range(-1.0..1.0);
        }
        s
    }

    fn rand_vec(g: Grid2, rng: &mut ChaCha8Rng) -> VectorField2 {
        let mut u = VectorField2::zeros(g);
        for v in u.u1.iter_mut().chain(u.u2.iter_mut()) {
            *v = rng.gen_range(-1.0..1.0);
        }
        u
    }

    #[test]
    fn div_exact_on_affine_diagonal_field() {
        // σ = diag(x, y) has div σ = (1, 1); central differences are exact on
        // affine data at interior faces.
        let g = Grid2::unit(8).unwrap();
        let s = StressField2::from_fn(g, |x, y| SymTensor2::diag(x, y));
        let d = s.div();
        for j in 0..g.ny {
            for i in 1..g.nx {
                assert_relative_eq!(d.u1[g.fx(i, j)], 1.0, max_relative = tol::EXACT);
            }
        }
        for j in 1..g.ny {
            for i in 0..g.nx {
                assert_relative_eq!(d.u2[g.fy(i, j)], 1.0, max_relative = tol::EXACT);
            }
        }
    }

    #[test]
    fn adjointness_div_symgrad() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..10 {
            let g = Grid2::new(7, 5, [0.0, 1.4], [-0.3, 0.7]).unwrap();
            let s = rand_stress(g, &mut rng);
            let u = rand_vec(g, &mut rng);
            let lhs = s.div().dot(&u);
            let rhs = -s.dot(&u.symgrad());
            let scale = s.norm() * u.norm();
            assert!(
                (lhs - rhs).abs() <= tol::ADJOINT * scale.max(1.0),
                "adjointness violated: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn m_star_is_adjoint_of_m() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let g = Grid2::new(6, 9, [0.0, 1.0], [0.0, 1.5]).unwrap();
        for _ in 0..10 {
            let s = rand_stress(g, &mut rng);
            let mut z = CenterField2::zeros(g);
            for v in z.t11.iter_mut().chain(z.t22.iter_mut()).chain(z.t12.iter_mut()) {
                *v = rng.gen_range(-1.0..1.0);
            }
            let lhs = s.m_avg().dot(&z);
            let rhs = s.dot(&z.m_star());
            assert!((lhs - rhs).abs() <= tol::ADJOINT * 100.0, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn energy_uniform_uniaxial() {
        // diag(1,0) on the unit square: h = 2ρ⁽²⁾ = 2, volume 1.
        let g = Grid2::unit(16).unwrap();
        let s = StressField2::from_fn(g, |_, _| SymTensor2::diag(1.0, 0.0));
        assert_relative_eq!(s.energy(Density::HLimit), 2.0, max_relative = tol::EXACT);
        assert_eq!(StressField2::zeros(g).energy(Density::HLimit), 0.0);
    }

    #[test]
    fn low_branch_energy_identity() {
        // For sup|τ| < ½√λ: E_λ = 2∫ρ − 2λ^{-1/2}∫|det τ|, exactly.
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let g = Grid2::unit(12).unwrap();
        let lambda = 400.0; // ½√λ = 10
        let mut s = rand_stress(g, &mut rng); // entries in (−1,1), sup|τ| ≤ √6 < 10
        s.scale(3.0);
        let e = s.energy(Density::HLambda(lambda));
        let mut expect = 0.0;
        for j in 0..g.ny {
            for i in 0..g.nx {
                let t = s.at_center(i, j);
                let det = t.a11 * t.a22 - t.a12 * t.a12;
                expect += 2.0 * crate::integrands::rho2(&t)
                    - 2.0 / lambda.sqrt() * det.abs();
            }
        }
        expect *= g.vol();
        assert_relative_eq!(e, expect, max_relative = tol::EXACT);
    }

    #[test]
    fn energy_limit_is_convex_midpoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let g = Grid2::unit(6).unwrap();
        for _ in 0..20 {
            let a = rand_stress(g, &mut rng);
            let b = rand_stress(g, &mut rng);
            let mut mid = a.clone();
            mid.axpy(1.0, &b);
            mid.scale(0.5);
            let e_mid = mid.energy(Density::HLimit);
            let avg = 0.5 * (a.energy(Density::HLimit) + b.energy(Density::HLimit));
            assert!(e_mid <= avg + 1e-12, "convexity violated: {e_mid} > {avg}");
        }
    }

    #[test]
    fn mollify_preserves_interior_mass() {
        let g = Grid2::unit(64).unwrap();
        let mut s = StressField2::zeros(g);
        // compact blob well inside the box
        for j in 28..36 {
            for i in 28..36 {
                s.s11[g.c(i, j)] = 1.0;
                s.s12[g.k(i, j)] = -0.5;
            }
        }
        let before = s.integral();
        let m = s.mollify(0.125, PadMode::Zero).unwrap();
        let after = m.integral();
        for c in 0..3 {
            assert!(
                (before[c] - after[c]).abs() <= tol::BALANCE,
                "component {c}: {} -> {}",
                before[c],
                after[c]
            );
        }
        // under-resolved kernel must be rejected
        assert!(s.mollify(g.hx * 1.5, PadMode::Zero).is_err());
        // mollify(0) = 0
        let z = StressField2::zeros(g).mollify(0.25, PadMode::Zero).unwrap();
        assert_eq!(z.sup_abs(), 0.0);
    }

    #[test]
    fn mollify_periodic_keeps_constant_field() {
        let g = Grid2::unit(32).unwrap();
        let s = StressField2::from_fn(g, |_, _| SymTensor2::new(1.0, -2.0, 0.5));
        let m = s.mollify(0.25, PadMode::Periodic).unwrap();
        for (a, b) in s.s11.iter().zip(&m.s11) {
            assert_relative_eq!(a, b, max_relative = tol::EXACT);
        }
        for (a, b) in s.s12.iter().zip(&m.s12) {
            assert_relative_eq!(a, b, max_relative = tol::EXACT);
        }
    }

    #[test]
    fn snapshot_roundtrip() {
        let dir = std::env::temp_dir().join("michell_field2_test");
        std::fs::create_dir_all(&dir).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        let g = Grid2::new(5, 7, [0.0, 1.0], [2.0, 3.4]).unwrap();
        let s = rand_stress(g, &mut rng);
        let p = dir.join("s.bin");
        s.write_bin(&p).unwrap();
        let s2 = StressField2::read_bin(&p).unwrap();
        assert_eq!(s.s11, s2.s11);
        assert_eq!(s.s12, s2.s12);
        assert_eq!(s.grid.nx, s2.grid.nx);
        assert!((s.grid.hy - s2.grid.hy).abs() < 1e-15);
        let u = rand_vec(g, &mut rng);
        let pu = dir.join("u.bin");
        u.write_bin(&pu).unwrap();
        let u2 = VectorField2::read_bin(&pu).unwrap();
        assert_eq!(u.u1, u2.u1);
        assert_eq!(u.u2, u2.u2);
        // wrong magic
        assert!(VectorField2::read_bin(&p).is_err());
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn csv_has_header_and_rows() {
        let g = Grid2::unit(2).unwrap();
        let s = StressField2::from_fn(g, |x, y| SymTensor2::diag(x, y));
        let csv = s.csv();
        assert!(csv.starts_with("x,y,s11,s22,s12\n"));
        assert_eq!(csv.lines().count(), 1 + 4);
    }
}
