//! 3D staggered stress and velocity fields.
//!
//! Layout: diagonal stresses at cell centers; `σ₁₂` on z-edges
//! (`(nx+1)(ny+1)nz` lattice), `σ₁₃` on y-edges, `σ₂₃` on x-edges; `uₐ` on
//! a-faces. As in 2D every derivative of `div σ` and `e(u)` is a two-point
//! difference landing exactly where it is consumed, fields extend by zero,
//! and `⟨div σ, u⟩ = −⟨σ, e(u)⟩` is exact in the volume-weighted inner
//! products (off-diagonal blocks weighted ×2).

use crate::conv::{conv_separable, PadMode};
use crate::grid::Grid3;
use crate::integrands::Density;
use crate::tensor::SymTensor3;
use crate::Result;
use std::path::Path;

/// Symmetric 3-tensor field on the staggered lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct StressField3 {
    /// Grid the field lives on.
    pub grid: Grid3,
    /// `σ₁₁` at centers.
    pub s11: Vec<f64>,
    /// `σ₂₂` at centers.
    pub s22: Vec<f64>,
    /// `σ₃₃` at centers.
    pub s33: Vec<f64>,
    /// `σ₁₂` at z-edges, `(nx+1)(ny+1)nz`.
    pub s12: Vec<f64>,
    /// `σ₁₃` at y-edges, `(nx+1)ny(nz+1)`.
    pub s13: Vec<f64>,
    /// `σ₂₃` at x-edges, `nx(ny+1)(nz+1)`.
    pub s23: Vec<f64>,
}

/// Vector field on face centers.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField3 {
    /// Grid the field lives on.
    pub grid: Grid3,
    /// x-component at x-faces, `(nx+1)·ny·nz`.
    pub u1: Vec<f64>,
    /// y-component at y-faces, `nx·(ny+1)·nz`.
    pub u2: Vec<f64>,
    /// z-component at z-faces, `nx·ny·(nz+1)`.
    pub u3: Vec<f64>,
}

/// Cell-centered symmetric tensor field (range of `M`).
#[derive(Debug, Clone, PartialEq)]
pub struct CenterField3 {
    /// Grid the field lives on.
    pub grid: Grid3,
    /// Components per cell, `i ≤ j` order.
    pub t11: Vec<f64>,
    /// `τ₂₂` per cell.
    pub t22: Vec<f64>,
    /// `τ₃₃` per cell.
    pub t33: Vec<f64>,
    /// `τ₁₂` per cell.
    pub t12: Vec<f64>,
    /// `τ₁₃` per cell.
    pub t13: Vec<f64>,
    /// `τ₂₃` per cell.
    pub t23: Vec<f64>,
}

impl StressField3 {
    /// All-zero field.
    pub fn zeros(grid: Grid3) -> Self {
        let (nx, ny, nz) = (grid.nx, grid.ny, grid.nz);
        Self {
            grid,
            s11: vec![0.0; nx * ny * nz],
            s22: vec![0.0; nx * ny * nz],
            s33: vec![0.0; nx * ny * nz],
            s12: vec![0.0; (nx + 1) * (ny + 1) * nz],
            s13: vec![0.0; (nx + 1) * ny * (nz + 1)],
            s23: vec![0.0; nx * (ny + 1) * (nz + 1)],
        }
    }

    /// Sample a tensor field at the natural lattice positions.
    pub fn from_fn(grid: Grid3, f: impl Fn(f64, f64, f64) -> SymTensor3) -> Self {
        let g = grid;
        let mut out = Self::zeros(g);
        let (x0, y0, z0) = (g.x0, g.y0, g.z0);
        let (hx, hy, hz) = (g.hx, g.hy, g.hz);
        for k in 0..g.nz {
            for j in 0..g.ny {
                for i in 0..g.nx {
                    let t = f(
                        x0 + (i as f64 + 0.5) * hx,
                        y0 + (j as f64 + 0.5) * hy,
                        z0 + (k as f64 + 0.5) * hz,
                    );
                    let c = g.c(i, j, k);
                    out.s11[c] = t.a11;
                    out.s22[c] = t.a22;
                    out.s33[c] = t.a33;
                }
            }
        }
        for k in 0..g.nz {
            for j in 0..=g.ny {
                for i in 0..=g.nx {
                    let t = f(
                        x0 + i as f64 * hx,
                        y0 + j as f64 * hy,
                        z0 + (k as f64 + 0.5) * hz,
                    );
                    out.s12[Grid3::idx(g.nx + 1, g.ny + 1, i, j, k)] = t.a12;
                }
            }
        }
        for k in 0..=g.nz {
            for j in 0..g.ny {
                for i in 0..=g.nx {
                    let t = f(
                        x0 + i as f64 * hx,
                        y0 + (j as f64 + 0.5) * hy,
                        z0 + k as f64 * hz,
                    );
                    out.s13[Grid3::idx(g.nx + 1, g.ny, i, j, k)] = t.a13;
                }
            }
        }
        for k in 0..=g.nz {
            for j in 0..=g.ny {
                for i in 0..g.nx {
                    let t = f(
                        x0 + (i as f64 + 0.5) * hx,
                        y0 + j as f64 * hy,
                        z0 + k as f64 * hz,
                    );
                    out.s23[Grid3::idx(g.nx, g.ny + 1, i, j, k)] = t.a23;
                }
            }
        }
        out
    }

    /// Tensor at cell `(i,j,k)` with each shear component averaged from its
    /// four surrounding edges (the map `M`).
    pub fn at_center(&self, i: usize, j: usize, k: usize) -> SymTensor3 {
        let g = &self.grid;
        let i12 = |a: usize, b: usize, c: usize| Grid3::idx(g.nx + 1, g.ny + 1, a, b, c);
        let i13 = |a: usize, b: usize, c: usize| Grid3::idx(g.nx + 1, g.ny, a, b, c);
        let i23 = |a: usize, b: usize, c: usize| Grid3::idx(g.nx, g.ny + 1, a, b, c);
        let m12 = 0.25
            * (self.s12[i12(i, j, k)]
                + self.s12[i12(i + 1, j, k)]
                + self.s12[i12(i, j + 1, k)]
                + self.s12[i12(i + 1, j + 1, k)]);
        let m13 = 0.25
            * (self.s13[i13(i, j, k)]
                + self.s13[i13(i + 1, j, k)]
                + self.s13[i13(i, j, k + 1)]
                + self.s13[i13(i + 1, j, k + 1)]);
        let m23 = 0.25
            * (self.s23[i23(i, j, k)]
                + self.s23[i23(i, j + 1, k)]
                + self.s23[i23(i, j, k + 1)]
                + self.s23[i23(i, j + 1, k + 1)]);
        let c = g.c(i, j, k);
        SymTensor3::new(self.s11[c], self.s22[c], self.s33[c], m12, m13, m23)
    }

    /// Discrete divergence on face centers (zero extension outside the box).
    pub fn div(&self) -> VectorField3 {
        let g = &self.grid;
        let (nx, ny, nz) = (g.nx, g.ny, g.nz);
        let (hx, hy, hz) = (g.hx, g.hy, g.hz);
        let i12 = |a: usize, b: usize, c: usize| Grid3::idx(nx + 1, ny + 1, a, b, c);
        let i13 = |a: usize, b: usize, c: usize| Grid3::idx(nx + 1, ny, a, b, c);
        let i23 = |a: usize, b: usize, c: usize| Grid3::idx(nx, ny + 1, a, b, c);
        let mut out = VectorField3::zeros(*g);
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..=nx {
                    let right = if i < nx { self.s11[g.c(i, j, k)] } else { 0.0 };
                    let left = if i > 0 { self.s11[g.c(i - 1, j, k)] } else { 0.0 };
                    out.u1[Grid3::idx(nx + 1, ny, i, j, k)] = (right - left) / hx
                        + (self.s12[i12(i, j + 1, k)] - self.s12[i12(i, j, k)]) / hy
                        + (self.s13[i13(i, j, k + 1)] - self.s13[i13(i, j, k)]) / hz;
                }
            }
        }
        for k in 0..nz {
            for j in 0..=ny {
                for i in 0..nx {
                    let top = if j < ny { self.s22[g.c(i, j, k)] } else { 0.0 };
                    let bot = if j > 0 { self.s22[g.c(i, j - 1, k)] } else { 0.0 };
                    out.u2[Grid3::idx(nx, ny + 1, i, j, k)] = (top - bot) / hy
                        + (self.s12[i12(i + 1, j, k)] - self.s12[i12(i, j, k)]) / hx
                        + (self.s23[i23(i, j, k + 1)] - self.s23[i23(i, j, k)]) / hz;
                }
            }
        }
        for k in 0..=nz {
            for j in 0..ny {
                for i in 0..nx {
                    let fore = if k < nz { self.s33[g.c(i, j, k)] } else { 0.0 };
                    let back = if k > 0 { self.s33[g.c(i, j, k - 1)] } else { 0.0 };
                    out.u3[Grid3::idx(nx, ny, i, j, k)] = (fore - back) / hz
                        + (self.s13[i13(i + 1, j, k)] - self.s13[i13(i, j, k)]) / hx
                        + (self.s23[i23(i, j + 1, k)] - self.s23[i23(i, j, k)]) / hy;
                }
            }
        }
        out
    }

    /// Center-averaging map `M`.
    pub fn m_avg(&self) -> CenterField3 {
        let g = &self.grid;
        let mut out = CenterField3::zeros(*g);
        for k in 0..g.nz {
            for j in 0..g.ny {
                for i in 0..g.nx {
                    let t = self.at_center(i, j, k);
                    let c = g.c(i, j, k);
                    out.t11[c] = t.a11;
                    out.t22[c] = t.a22;
                    out.t33[c] = t.a33;
                    out.t12[c] = t.a12;
                    out.t13[c] = t.a13;
                    out.t23[c] = t.a23;
                }
            }
        }
        out
    }

    /// Midpoint-quadrature energy with shear averaged to centers.
    pub fn energy(&self, density: Density) -> f64 {
        let g = &self.grid;
        let mut acc = 0.0;
        for k in 0..g.nz {
            for j in 0..g.ny {
                for i in 0..g.nx {
                    acc += density.eval3(&self.at_center(i, j, k));
                }
            }
        }
        acc * g.vol()
    }

    /// Volume-weighted inner product (factor 2 on shear blocks).
    pub fn dot(&self, other: &Self) -> f64 {
        let mut acc = 0.0;
        for (a, b) in self.s11.iter().zip(&other.s11) {
            acc += a * b;
        }
        for (a, b) in self.s22.iter().zip(&other.s22) {
            acc += a * b;
        }
        for (a, b) in self.s33.iter().zip(&other.s33) {
            acc += a * b;
        }
        for (a, b) in self.s12.iter().zip(&other.s12) {
            acc += 2.0 * a * b;
        }
        for (a, b) in self.s13.iter().zip(&other.s13) {
            acc += 2.0 * a * b;
        }
        for (a, b) in self.s23.iter().zip(&other.s23) {
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
        let pairs = [
            (&mut self.s11, &other.s11),
            (&mut self.s22, &other.s22),
            (&mut self.s33, &other.s33),
            (&mut self.s12, &other.s12),
            (&mut self.s13, &other.s13),
            (&mut self.s23, &other.s23),
        ];
        for (dst, src) in pairs {
            for (x, y) in dst.iter_mut().zip(src) {
                *x += a * y;
            }
        }
    }

    /// `self *= a`.
    pub fn scale(&mut self, a: f64) {
        for arr in [
            &mut self.s11,
            &mut self.s22,
            &mut self.s33,
            &mut self.s12,
            &mut self.s13,
            &mut self.s23,
        ] {
            for x in arr.iter_mut() {
                *x *= a;
            }
        }
    }

    /// Componentwise lattice-sum integrals (`vol·Σ`), order
    /// `(11, 22, 33, 12, 13, 23)`.
    pub fn integral(&self) -> [f64; 6] {
        let v = self.grid.vol();
        [
            v * self.s11.iter().sum::<f64>(),
            v * self.s22.iter().sum::<f64>(),
            v * self.s33.iter().sum::<f64>(),
            v * self.s12.iter().sum::<f64>(),
            v * self.s13.iter().sum::<f64>(),
            v * self.s23.iter().sum::<f64>(),
        ]
    }

    /// Largest absolute entry.
    pub fn sup_abs(&self) -> f64 {
        [&self.s11, &self.s22, &self.s33, &self.s12, &self.s13, &self.s23]
            .iter()
            .flat_map(|a| a.iter())
            .fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    /// Zero each shear component on the boundary lines of its own edge
    /// lattice (the two axes along which that lattice touches `∂Ω`).
    ///
    /// Same role as [`crate::field2::StressField2::zero_boundary_shear`]:
    /// the outermost shear lines have no balancing face row under zero
    /// extension, so leaving them free admits unphysical tangential
    /// boundary tractions. Zeroing them enforces `σ·n = 0` on unloaded
    /// faces exactly.
    pub fn zero_boundary_shear(&mut self) {
        let g = self.grid;
        let (nx, ny, nz) = (g.nx, g.ny, g.nz);
        let i12 = |a: usize, b: usize, c: usize| Grid3::idx(nx + 1, ny + 1, a, b, c);
        let i13 = |a: usize, b: usize, c: usize| Grid3::idx(nx + 1, ny, a, b, c);
        let i23 = |a: usize, b: usize, c: usize| Grid3::idx(nx, ny + 1, a, b, c);
        for k in 0..nz {
            for j in 0..=ny {
                self.s12[i12(0, j, k)] = 0.0;
                self.s12[i12(nx, j, k)] = 0.0;
            }
            for i in 0..=nx {
                self.s12[i12(i, 0, k)] = 0.0;
                self.s12[i12(i, ny, k)] = 0.0;
            }
        }
        for j in 0..ny {
            for k in 0..=nz {
                self.s13[i13(0, j, k)] = 0.0;
                self.s13[i13(nx, j, k)] = 0.0;
            }
            for i in 0..=nx {
                self.s13[i13(i, j, 0)] = 0.0;
                self.s13[i13(i, j, nz)] = 0.0;
            }
        }
        for i in 0..nx {
            for k in 0..=nz {
                self.s23[i23(i, 0, k)] = 0.0;
                self.s23[i23(i, ny, k)] = 0.0;
            }
            for j in 0..=ny {
                self.s23[i23(i, j, 0)] = 0.0;
                self.s23[i23(i, j, nz)] = 0.0;
            }
        }
    }

    /// Mollify every component with the tensor-product biweight kernel.
    ///
    /// # Errors
    /// Under-resolved kernel (`eps < 2·max spacing`).
    pub fn mollify(&self, eps: f64, pad: PadMode) -> Result<Self> {
        let g = &self.grid;
        let (kx, ky, kz) = kernels3(g, eps)?;
        let mut out = self.clone();
        let (nx, ny, nz) = (g.nx, g.ny, g.nz);
        let ks = [kx, ky, kz];
        conv_separable(&mut out.s11, &[nx, ny, nz], &ks, pad);
        conv_separable(&mut out.s22, &[nx, ny, nz], &ks, pad);
        conv_separable(&mut out.s33, &[nx, ny, nz], &ks, pad);
        conv_separable(&mut out.s12, &[nx + 1, ny + 1, nz], &ks, pad);
        conv_separable(&mut out.s13, &[nx + 1, ny, nz + 1], &ks, pad);
        conv_separable(&mut out.s23, &[nx, ny + 1, nz + 1], &ks, pad);
        Ok(out)
    }

    /// Write the flat binary snapshot.
    ///
    /// # Errors
    /// I/O failures.
    pub fn write_bin(&self, path: &Path) -> Result<()> {
        let g = &self.grid;
        crate::field2::write_snapshot(
            path,
            b"MCSTRS3\0",
            &[g.nx as u64, g.ny as u64, g.nz as u64],
            &[g.x0, g.y0, g.z0, g.hx, g.hy, g.hz],
            &[&self.s11, &self.s22, &self.s33, &self.s12, &self.s13, &self.s23],
        )
    }

    /// Read a snapshot written by [`Self::write_bin`].
    ///
    /// # Errors
    /// I/O failures, bad magic, or inconsistent lengths.
    pub fn read_bin(path: &Path) -> Result<Self> {
        let (dims, meta, mut arrays) =
            crate::field2::read_snapshot(path, b"MCSTRS3\0", 3, 6, &|d: &[u64]| {
                let (nx, ny, nz) = (d[0] as usize, d[1] as usize, d[2] as usize);
                vec![
                    nx * ny * nz,
                    nx * ny * nz,
                    nx * ny * nz,
                    (nx + 1) * (ny + 1) * nz,
                    (nx + 1) * ny * (nz + 1),
                    nx * (ny + 1) * (nz + 1),
                ]
            })?;
        let grid = Grid3::new(
            [dims[0] as usize, dims[1] as usize, dims[2] as usize],
            [meta[0], meta[0] + dims[0] as f64 * meta[3]],
            [meta[1], meta[1] + dims[1] as f64 * meta[4]],
            [meta[2], meta[2] + dims[2] as f64 * meta[5]],
        )?;
        let s23 = arrays.pop().unwrap();
        let s13 = arrays.pop().unwrap();
        let s12 = arrays.pop().unwrap();
        let s33 = arrays.pop().unwrap();
        let s22 = arrays.pop().unwrap();
        let s11 = arrays.pop().unwrap();
        Ok(Self { grid, s11, s22, s33, s12, s13, s23 })
    }
}

impl VectorField3 {
    /// All-zero field.
    pub fn zeros(grid: Grid3) -> Self {
        let (nx, ny, nz) = (grid.nx, grid.ny, grid.nz);
        Self {
            grid,
            u1: vec![0.0; (nx + 1) * ny * nz],
            u2: vec![0.0; nx * (ny + 1) * nz],
            u3: vec![0.0; nx * ny * (nz + 1)],
        }
    }

    /// Sample a vector field at face centers.
    pub fn from_fn(grid: Grid3, f: impl Fn(f64, f64, f64) -> [f64; 3]) -> Self {
        let g = grid;
        let mut out = Self::zeros(g);
        for k in 0..g.nz {
            for j in 0..g.ny {
                for i in 0..=g.nx {
                    let p = [
                        g.x0 + i as f64 * g.hx,
                        g.y0 + (j as f64 + 0.5) * g.hy,
                        g.z0 + (k as f64 + 0.5) * g.hz,
                    ];
                    out.u1[Grid3::idx(g.nx + 1, g.ny, i, j, k)] = f(p[0], p[1], p[2])[0];
                }
            }
        }
        for k in 0..g.nz {
            for j in 0..=g.ny {
                for i in 0..g.nx {
                    let p = [
                        g.x0 + (i as f64 + 0.5) * g.hx,
                        g.y0 + j as f64 * g.hy,
                        g.z0 + (k as f64 + 0.5) * g.hz,
                    ];
                    out.u2[Grid3::idx(g.nx, g.ny + 1, i, j, k)] = f(p[0], p[1], p[2])[1];
                }
            }
        }
        for k in 0..=g.nz {
            for j in 0..g.ny {
                for i in 0..g.nx {
                    let p = [
                        g.x0 + (i as f64 + 0.5) * g.hx,
                        g.y0 + (j as f64 + 0.5) * g.hy,
                        g.z0 + k as f64 * g.hz,
                    ];
                    out.u3[Grid3::idx(g.nx, g.ny, i, j, k)] = f(p[0], p[1], p[2])[2];
                }
            }
        }
        out
    }

    /// Symmetrized gradient `e(u)` on the stress lattice (zero extension).
    pub fn symgrad(&self) -> StressField3 {
        let g = &self.grid;
        let (nx, ny, nz) = (g.nx, g.ny, g.nz);
        let (hx, hy, hz) = (g.hx, g.hy, g.hz);
        let iu1 = |a: usize, b: usize, c: usize| Grid3::idx(nx + 1, ny, a, b, c);
        let iu2 = |a: usize, b: usize, c: usize| Grid3::idx(nx, ny + 1, a, b, c);
        let iu3 = |a: usize, b: usize, c: usize| Grid3::idx(nx, ny, a, b, c);
        let mut out = StressField3::zeros(*g);
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    let c = g.c(i, j, k);
                    out.s11[c] = (self.u1[iu1(i + 1, j, k)] - self.u1[iu1(i, j, k)]) / hx;
                    out.s22[c] = (self.u2[iu2(i, j + 1, k)] - self.u2[iu2(i, j, k)]) / hy;
                    out.s33[c] = (self.u3[iu3(i, j, k + 1)] - self.u3[iu3(i, j, k)]) / hz;
                }
            }
        }
        for k in 0..nz {
            for j in 0..=ny {
                for i in 0..=nx {
                    let u1a = if j < ny { self.u1[iu1(i, j, k)] } else { 0.0 };
                    let u1b = if j > 0 { self.u1[iu1(i, j - 1, k)] } else { 0.0 };
                    let u2a = if i < nx { self.u2[iu2(i, j, k)] } else { 0.0 };
                    let u2b = if i > 0 { self.u2[iu2(i - 1, j, k)] } else { 0.0 };
                    out.s12[Grid3::idx(nx + 1, ny + 1, i, j, k)] =
                        0.5 * ((u1a - u1b) / hy + (u2a - u2b) / hx);
                }
            }
        }
        for k in 0..=nz {
            for j in 0..ny {
                for i in 0..=nx {
                    let u1a = if k < nz { self.u1[iu1(i, j, k)] } else { 0.0 };
                    let u1b = if k > 0 { self.u1[iu1(i, j, k - 1)] } else { 0.0 };
                    let u3a = if i < nx { self.u3[iu3(i, j, k)] } else { 0.0 };
                    let u3b = if i > 0 { self.u3[iu3(i - 1, j, k)] } else { 0.0 };
                    out.s13[Grid3::idx(nx + 1, ny, i, j, k)] =
                        0.5 * ((u1a - u1b) / hz + (u3a - u3b) / hx);
                }
            }
        }
        for k in 0..=nz {
            for j in 0..=ny {
                for i in 0..nx {
                    let u2a = if k < nz { self.u2[iu2(i, j, k)] } else { 0.0 };
                    let u2b = if k > 0 { self.u2[iu2(i, j, k - 1)] } else { 0.0 };
                    let u3a = if j < ny { self.u3[iu3(i, j, k)] } else { 0.0 };
                    let u3b = if j > 0 { self.u3[iu3(i, j - 1, k)] } else { 0.0 };
                    out.s23[Grid3::idx(nx, ny + 1, i, j, k)] =
                        0.5 * ((u2a - u2b) / hz + (u3a - u3b) / hy);
                }
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
        for (a, b) in self.u3.iter().zip(&other.u3) {
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
        for (x, y) in self.u3.iter_mut().zip(&other.u3) {
            *x += a * y;
        }
    }

    /// `self *= a`.
    pub fn scale(&mut self, a: f64) {
        for arr in [&mut self.u1, &mut self.u2, &mut self.u3] {
            for x in arr.iter_mut() {
                *x *= a;
            }
        }
    }

    /// Total discrete force.
    pub fn total_force(&self) -> [f64; 3] {
        let v = self.grid.vol();
        [
            v * self.u1.iter().sum::<f64>(),
            v * self.u2.iter().sum::<f64>(),
            v * self.u3.iter().sum::<f64>(),
        ]
    }

    /// Largest absolute entry.
    pub fn sup_abs(&self) -> f64 {
        [&self.u1, &self.u2, &self.u3]
            .iter()
            .flat_map(|a| a.iter())
            .fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    /// Write the flat binary snapshot.
    ///
    /// # Errors
    /// I/O failures.
    pub fn write_bin(&self, path: &Path) -> Result<()> {
        let g = &self.grid;
        crate::field2::write_snapshot(
            path,
            b"MCVECT3\0",
            &[g.nx as u64, g.ny as u64, g.nz as u64],
            &[g.x0, g.y0, g.z0, g.hx, g.hy, g.hz],
            &[&self.u1, &self.u2, &self.u3],
        )
    }

    /// Read a snapshot written by [`Self::write_bin`].
    ///
    /// # Errors
    /// I/O failures, bad magic, or inconsistent lengths.
    pub fn read_bin(path: &Path) -> Result<Self> {
        let (dims, meta, mut arrays) =
            crate::field2::read_snapshot(path, b"MCVECT3\0", 3, 6, &|d: &[u64]| {
                let (nx, ny, nz) = (d[0] as usize, d[1] as usize, d[2] as usize);
                vec![(nx + 1) * ny * nz, nx * (ny + 1) * nz, nx * ny * (nz + 1)]
            })?;
        let grid = Grid3::new(
            [dims[0] as usize, dims[1] as usize, dims[2] as usize],
            [meta[0], meta[0] + dims[0] as f64 * meta[3]],
            [meta[1], meta[1] + dims[1] as f64 * meta[4]],
            [meta[2], meta[2] + dims[2] as f64 * meta[5]],
        )?;
        let u3 = arrays.pop().unwrap();
        let u2 = arrays.pop().unwrap();
        let u1 = arrays.pop().unwrap();
        Ok(Self { grid, u1, u2, u3 })
    }
}

impl CenterField3 {
    /// All-zero field.
    pub fn zeros(grid: Grid3) -> Self {
        let n = grid.cells();
        Self {
            grid,
            t11: vec![0.0; n],
            t22: vec![0.0; n],
            t33: vec![0.0; n],
            t12: vec![0.0; n],
            t13: vec![0.0; n],
            t23: vec![0.0; n],
        }
    }

    /// Tensor stored in cell `(i,j,k)`.
    pub fn at(&self, i: usize, j: usize, k: usize) -> SymTensor3 {
        let c = self.grid.c(i, j, k);
        SymTensor3::new(
            self.t11[c],
            self.t22[c],
            self.t33[c],
            self.t12[c],
            self.t13[c],
            self.t23[c],
        )
    }

    /// Overwrite cell `(i,j,k)`.
    pub fn set(&mut self, i: usize, j: usize, k: usize, t: SymTensor3) {
        let c = self.grid.c(i, j, k);
        self.t11[c] = t.a11;
        self.t22[c] = t.a22;
        self.t33[c] = t.a33;
        self.t12[c] = t.a12;
        self.t13[c] = t.a13;
        self.t23[c] = t.a23;
    }

    /// Adjoint `M*`: shear deposited with coefficient ¼ onto the four
    /// surrounding edges of each cell.
    pub fn m_star(&self) -> StressField3 {
        let g = &self.grid;
        let (nx, ny) = (g.nx, g.ny);
        let i12 = |a: usize, b: usize, c: usize| Grid3::idx(nx + 1, ny + 1, a, b, c);
        let i13 = |a: usize, b: usize, c: usize| Grid3::idx(nx + 1, ny, a, b, c);
        let i23 = |a: usize, b: usize, c: usize| Grid3::idx(nx, ny + 1, a, b, c);
        let mut out = StressField3::zeros(*g);
        out.s11.copy_from_slice(&self.t11);
        out.s22.copy_from_slice(&self.t22);
        out.s33.copy_from_slice(&self.t33);
        for k in 0..g.nz {
            for j in 0..ny {
                for i in 0..nx {
                    let c = g.c(i, j, k);
                    let v12 = 0.25 * self.t12[c];
                    out.s12[i12(i, j, k)] += v12;
                    out.s12[i12(i + 1, j, k)] += v12;
                    out.s12[i12(i, j + 1, k)] += v12;
                    out.s12[i12(i + 1, j + 1, k)] += v12;
                    let v13 = 0.25 * self.t13[c];
                    out.s13[i13(i, j, k)] += v13;
                    out.s13[i13(i + 1, j, k)] += v13;
                    out.s13[i13(i, j, k + 1)] += v13;
                    out.s13[i13(i + 1, j, k + 1)] += v13;
                    let v23 = 0.25 * self.t23[c];
                    out.s23[i23(i, j, k)] += v23;
                    out.s23[i23(i, j + 1, k)] += v23;
                    out.s23[i23(i, j, k + 1)] += v23;
                    out.s23[i23(i, j + 1, k + 1)] += v23;
                }
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
        for (a, b) in self.t33.iter().zip(&other.t33) {
            acc += a * b;
        }
        for (a, b) in self.t12.iter().zip(&other.t12) {
            acc += 2.0 * a * b;
        }
        for (a, b) in self.t13.iter().zip(&other.t13) {
            acc += 2.0 * a * b;
        }
        for (a, b) in self.t23.iter().zip(&other.t23) {
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
        let pairs = [
            (&mut self.t11, &other.t11),
            (&mut self.t22, &other.t22),
            (&mut self.t33, &other.t33),
            (&mut self.t12, &other.t12),
            (&mut self.t13, &other.t13),
            (&mut self.t23, &other.t23),
        ];
        for (dst, src) in pairs {
            for (x, y) in dst.iter_mut().zip(src) {
                *x += a * y;
            }
        }
    }

    /// `self *= a`.
    pub fn scale(&mut self, a: f64) {
        for arr in [
            &mut self.t11,
            &mut self.t22,
            &mut self.t33,
            &mut self.t12,
            &mut self.t13,
            &mut self.t23,
        ] {
            for x in arr.iter_mut() {
                *x *= a;
            }
        }
    }
}

/// Biweight kernels for the three axes.
fn kernels3(g: &Grid3, eps: f64) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    Ok((
        crate::field2::kernel1d(g.hx, eps)?,
        crate::field2::kernel1d(g.hy, eps)?,
        crate::field2::kernel1d(g.hz, eps)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tol;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rand_stress(g: Grid3, rng: &mut ChaCha8Rng) -> StressField3 {
        let mut s = StressField3::zeros(g);
        for arr in [
            &mut s.s11, &mut s.s22, &mut s.s33, &mut s.s12, &mut s.s13, &mut s.s23,
        ] {
            for v in arr.iter_mut() {
                *v = rng.gen_range(-1.0..1.0);
            }
        }
        s
    }

    fn rand_vec(g: Grid3, rng: &mut ChaCha8Rng) -> VectorField3 {
        let mut u = VectorField3::zeros(g);
        for arr in [&mut u.u1, &mut u.u2, &mut u.u3] {
            for v in arr.iter_mut() {
                *v = rng.gen_range(-1.0..1.0);
            }
        }
        u
    }

    #[test]
    fn div_exact_on_affine_diagonal_field() {
        let g = Grid3::unit(4).unwrap();
        let s = StressField3::from_fn(g, |x, y, z| SymTensor3::diag(x, y, z));
        let d = s.div();
        for k in 0..g.nz {
            for j in 0..g.ny {
                for i in 1..g.nx {
                    assert_relative_eq!(
                        d.u1[Grid3::idx(g.nx + 1, g.ny, i, j, k)],
                        1.0,
                        max_relative = tol::EXACT
                    );
                }
            }
        }
        for k in 1..g.nz {
            for j in 0..g.ny {
                for i in 0..g.nx {
                    assert_relative_eq!(
                        d.u3[Grid3::idx(g.nx, g.ny, i, j, k)],
                        1.0,
                        max_relative = tol::EXACT
                    );
                }
            }
        }
    }

    #[test]
    fn adjointness_div_symgrad() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let g = Grid3::new([4, 3, 5], [0.0, 1.0], [0.0, 0.9], [-0.2, 0.8]).unwrap();
        for _ in 0..6 {
            let s = rand_stress(g, &mut rng);
            let u = rand_vec(g, &mut rng);
            let lhs = s.div().dot(&u);
            let rhs = -s.dot(&u.symgrad());
            let scale = (s.norm() * u.norm()).max(1.0);
            assert!(
                (lhs - rhs).abs() <= tol::ADJOINT * scale,
                "adjointness violated: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn m_star_is_adjoint_of_m() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let g = Grid3::unit(4).unwrap();
        for _ in 0..6 {
            let s = rand_stress(g, &mut rng);
            let mut z = CenterField3::zeros(g);
            for arr in [
                &mut z.t11, &mut z.t22, &mut z.t33, &mut z.t12, &mut z.t13, &mut z.t23,
            ] {
                for v in arr.iter_mut() {
                    *v = rng.gen_range(-1.0..1.0);
                }
            }
            let lhs = s.m_avg().dot(&z);
            let rhs = s.dot(&z.m_star());
            assert!((lhs - rhs).abs() <= tol::ADJOINT * 100.0, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn energy_uniform_uniaxial() {
        // diag(1,0,0) on the unit cube: 4ρ⁽³⁾ = 4·½·√(0+1) = 2 per unit volume.
        let g = Grid3::unit(6).unwrap();
        let s = StressField3::from_fn(g, |_, _, _| SymTensor3::diag(1.0, 0.0, 0.0));
        assert_relative_eq!(
            s.energy(crate::integrands::Density::HLimit),
            2.0,
            max_relative = tol::EXACT
        );
    }

    #[test]
    fn mollify_preserves_interior_mass() {
        let g = Grid3::unit(24).unwrap();
        let mut s = StressField3::zeros(g);
        for k in 10..14 {
            for j in 10..14 {
                for i in 10..14 {
                    s.s11[g.c(i, j, k)] = 1.0;
                    s.s23[Grid3::idx(g.nx, g.ny + 1, i, j, k)] = -0.25;
                }
            }
        }
        let before = s.integral();
        let m = s.mollify(4.0 / 24.0, crate::conv::PadMode::Zero).unwrap();
        let after = m.integral();
        for c in 0..6 {
            assert!(
                (before[c] - after[c]).abs() <= tol::BALANCE,
                "component {c}: {} -> {}",
                before[c],
                after[c]
            );
        }
    }

    #[test]
    fn snapshot_roundtrip() {
        let dir = std::env::temp_dir().join("michell_field3_test");
        std::fs::create_dir_all(&dir).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let g = Grid3::new([3, 4, 2], [0.0, 1.0], [0.0, 1.0], [0.0, 0.5]).unwrap();
        let s = rand_stress(g, &mut rng);
        let p = dir.join("s3.bin");
        s.write_bin(&p).unwrap();
        let s2 = StressField3::read_bin(&p).unwrap();
        assert_eq!(s.s23, s2.s23);
        assert_eq!(s.grid.nz, s2.grid.nz);
        let u = rand_vec(g, &mut rng);
        let pu = dir.join("u3.bin");
        u.write_bin(&pu).unwrap();
        let u2 = VectorField3::read_bin(&pu).unwrap();
        assert_eq!(u.u3, u2.u3);
        std::fs::remove_dir_all(&dir).ok();
    }
}
