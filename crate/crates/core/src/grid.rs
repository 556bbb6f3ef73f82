//! Axis-aligned staggered grids for 2D and 3D stress fields.
//!
//! The staggering mimics the MAC / staggered-elasticity layout:
//!
//! * diagonal stress components live at **cell centers**;
//! * off-diagonal components live at **cell corners** (2D) or **edge
//!   midpoints** (3D) — `σ₁₂` on edges parallel to z, `σ₁₃` on edges
//!   parallel to y, `σ₂₃` on edges parallel to x;
//! * velocity / force components live at **face centers** of the
//!   corresponding axis.
//!
//! With this placement every derivative in `div σ` and in the symmetrized
//! gradient `e(u)` is a two-point centered difference landing exactly where
//! it is consumed, which makes discrete integration by parts
//! `⟨div σ, u⟩ = −⟨σ, e(u)⟩` hold to machine precision (fields are extended
//! by zero outside the box, i.e. homogeneous "material ends here" boundary
//! conditions).

use crate::{Error, Result};

/// Uniform rectangular grid on `[x0, x0+nx·hx] × [y0, y0+ny·hy]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2 {
    /// Cells along x.
    pub nx: usize,
    /// Cells along y.
    pub ny: usize,
    /// Lower-left corner.
    pub x0: f64,
    /// Lower-left corner.
    pub y0: f64,
    /// Cell width.
    pub hx: f64,
    /// Cell height.
    pub hy: f64,
}

impl Grid2 {
    /// Grid over the box `[x0, x1] × [y0, y1]` with `nx × ny` cells.
    ///
    /// # Errors
    /// Requires at least 2 cells per axis and a nondegenerate box.
    pub fn new(nx: usize, ny: usize, xr: [f64; 2], yr: [f64; 2]) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidInput("need at least 2 cells per axis".into()));
        }
        if !(xr[1] > xr[0] && yr[1] > yr[0]) {
            return Err(Error::InvalidInput("degenerate domain box".into()));
        }
        Ok(Self {
            nx,
            ny,
            x0: xr[0],
            y0: yr[0],
            hx: (xr[1] - xr[0]) / nx as f64,
            hy: (yr[1] - yr[0]) / ny as f64,
        })
    }

    /// Unit square with `n × n` cells.
    pub fn unit(n: usize) -> Result<Self> {
        Self::new(n, n, [0.0, 1.0], [0.0, 1.0])
    }

    /// Cell volume `hx·hy`.
    pub fn vol(&self) -> f64 {
        self.hx * self.hy
    }

    /// Number of cells.
    pub fn cells(&self) -> usize {
        self.nx * self.ny
    }

    /// Center-lattice index.
    #[inline]
    pub fn c(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Corner-lattice index (dims `(nx+1) × (ny+1)`).
    #[inline]
    pub fn k(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    /// x-face lattice index (dims `(nx+1) × ny`).
    #[inline]
    pub fn fx(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    /// y-face lattice index (dims `nx × (ny+1)`).
    #[inline]
    pub fn fy(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Physical center of cell `(i, j)`.
    pub fn cell_center(&self, i: usize, j: usize) -> [f64; 2] {
        [
            self.x0 + (i as f64 + 0.5) * self.hx,
            self.y0 + (j as f64 + 0.5) * self.hy,
        ]
    }

    /// Physical position of corner `(i, j)`.
    pub fn corner_pos(&self, i: usize, j: usize) -> [f64; 2] {
        [self.x0 + i as f64 * self.hx, self.y0 + j as f64 * self.hy]
    }

    /// Physical position of x-face `(i, j+½)`.
    pub fn xface_pos(&self, i: usize, j: usize) -> [f64; 2] {
        [self.x0 + i as f64 * self.hx, self.y0 + (j as f64 + 0.5) * self.hy]
    }

    /// Physical position of y-face `(i+½, j)`.
    pub fn yface_pos(&self, i: usize, j: usize) -> [f64; 2] {
        [self.x0 + (i as f64 + 0.5) * self.hx, self.y0 + j as f64 * self.hy]
    }

    /// Largest cell spacing.
    pub fn hmax(&self) -> f64 {
        self.hx.max(self.hy)
    }
}

/// Uniform box grid in 3D.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid3 {
    /// Cells along x.
    pub nx: usize,
    /// Cells along y.
    pub ny: usize,
    /// Cells along z.
    pub nz: usize,
    /// Lower corner.
    pub x0: f64,
    /// Lower corner.
    pub y0: f64,
    /// Lower corner.
    pub z0: f64,
    /// Cell extent along x.
    pub hx: f64,
    /// Cell extent along y.
    pub hy: f64,
    /// Cell extent along z.
    pub hz: f64,
}

impl Grid3 {
    /// Grid over `[x0,x1]×[y0,y1]×[z0,z1]` with `nx×ny×nz` cells.
    ///
    /// # Errors
    /// Requires at least 2 cells per axis and a nondegenerate box.
    pub fn new(
        n: [usize; 3],
        xr: [f64; 2],
        yr: [f64; 2],
        zr: [f64; 2],
    ) -> Result<Self> {
        if n.iter().any(|&k| k < 2) {
            return Err(Error::InvalidInput("need at least 2 cells per axis".into()));
        }
        if !(xr[1] > xr[0] && yr[1] > yr[0] && zr[1] > zr[0]) {
            return Err(Error::InvalidInput("degenerate domain box".into()));
        }
        Ok(Self {
            nx: n[0],
            ny: n[1],
            nz: n[2],
            x0: xr[0],
            y0: yr[0],
            z0: zr[0],
            hx: (xr[1] - xr[0]) / n[0] as f64,
            hy: (yr[1] - yr[0]) / n[1] as f64,
            hz: (zr[1] - zr[0]) / n[2] as f64,
        })
    }

    /// Unit cube with `n³` cells.
    pub fn unit(n: usize) -> Result<Self> {
        Self::new([n, n, n], [0.0, 1.0], [0.0, 1.0], [0.0, 1.0])
    }

    /// Cell volume.
    pub fn vol(&self) -> f64 {
        self.hx * self.hy * self.hz
    }

    /// Number of cells.
    pub fn cells(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    /// Center-lattice index.
    #[inline]
    pub fn c(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.ny + j) * self.nx + i
    }

    /// Index into a lattice with `di × dj × dk` points.
    #[inline]
    pub fn idx(di: usize, dj: usize, i: usize, j: usize, k: usize) -> usize {
        (k * dj + j) * di + i
    }

    /// Largest spacing.
    pub fn hmax(&self) -> f64 {
        self.hx.max(self.hy).max(self.hz)
    }
}
