//! Ground-structure trusses: nodes, bars, equilibrium, weight, and
//! conversion of a truss design into a rasterized stress field.
//!
//! A design assigns each bar `(i,j)` a signed strength `w`; the bar carries
//! the force pair `f_ij = (δ_{xᵢ} − δ_{xⱼ})·w·(xᵢ−xⱼ)/|xᵢ−xⱼ|` and the
//! line stress `σ_ij = w·e⊗e·H¹⌞[xᵢ,xⱼ]` with `e` the bar direction. The
//! weight `W = Σ|w|·ℓ` equals the total variation `|σ|` of that measure.
//! Equilibrium is `B w = −g` on non-support nodes, with `B` assembled from
//! the `f_ij` columns; support rows are deleted (reactions are free), and a
//! self-equilibrated instance may simply declare no supports.
//!
//! Rasterization deposits each bar's exact per-cell intersection lengths
//! (computed by walking lattice crossings) as cell densities and then
//! mollifies, so the flux of an isolated bar through a transverse section is
//! preserved exactly — the property the recovery experiment leans on.

use crate::conv::PadMode;
use crate::field2::StressField2;
use crate::grid::Grid2;
use crate::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

/// Node positions, bar connectivity, and support set.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundStructure {
    /// Node coordinates.
    pub nodes: Vec<[f64; 2]>,
    /// Bars as node index pairs `(i, j)`, `i < j`, no duplicates.
    pub bars: Vec<(usize, usize)>,
    /// Sorted support node indices (their equilibrium rows are dropped).
    pub supports: Vec<usize>,
}

/// Signed bar strengths of a design.
#[derive(Debug, Clone, PartialEq)]
pub struct TrussDesign {
    /// One strength per bar; `|w|` is the bar's cross-section strength.
    pub w: Vec<f64>,
}

/// Point loads `g = Σ gᵢ δ_{xᵢ}` at nodes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointLoadSet {
    /// `(node index, force)` pairs.
    pub forces: Vec<(usize, [f64; 2])>,
}

impl GroundStructure {
    /// Validate and build. Bar pairs are normalized to `i < j`.
    ///
    /// # Errors
    /// Zero-length or self-referential bars, duplicate bars, out-of-range
    /// indices.
    pub fn new(
        nodes: Vec<[f64; 2]>,
        bars: Vec<(usize, usize)>,
        supports: Vec<usize>,
    ) -> Result<Self> {
        let n = nodes.len();
        if nodes.iter().any(|p| !(p[0].is_finite() && p[1].is_finite())) {
            return Err(Error::InvalidInput("non-finite node coordinate".into()));
        }
        let mut norm = Vec::with_capacity(bars.len());
        for &(i, j) in &bars {
            if i >= n || j >= n {
                return Err(Error::InvalidInput(format!("bar ({i},{j}) references missing node")));
            }
            if i == j {
                return Err(Error::InvalidInput(format!("bar ({i},{j}) is degenerate")));
            }
            let (a, b) = if i < j { (i, j) } else { (j, i) };
            let d = [nodes[a][0] - nodes[b][0], nodes[a][1] - nodes[b][1]];
            if d[0].hypot(d[1]) == 0.0 {
                return Err(Error::InvalidInput(format!("bar ({a},{b}) has zero length")));
            }
            norm.push((a, b));
        }
        let mut seen = norm.clone();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("duplicate bar".into()));
        }
        let mut supports = supports;
        supports.sort_unstable();
        supports.dedup();
        if supports.iter().any(|&s| s >= n) {
            return Err(Error::InvalidInput("support references missing node".into()));
        }
        Ok(Self { nodes, bars: norm, supports })
    }

    /// Length of bar `b`.
    pub fn bar_length(&self, b: usize) -> f64 {
        let (i, j) = self.bars[b];
        let d = [
            self.nodes[i][0] - self.nodes[j][0],
            self.nodes[i][1] - self.nodes[j][1],
        ];
        d[0].hypot(d[1])
    }

    /// Unit direction `(xᵢ − xⱼ)/|xᵢ − xⱼ|` of bar `b`.
    pub fn bar_dir(&self, b: usize) -> [f64; 2] {
        let (i, j) = self.bars[b];
        let d = [
            self.nodes[i][0] - self.nodes[j][0],
            self.nodes[i][1] - self.nodes[j][1],
        ];
        let l = d[0].hypot(d[1]);
        [d[0] / l, d[1] / l]
    }

    /// Whether `node` is a support.
    pub fn is_support(&self, node: usize) -> bool {
        self.supports.binary_search(&node).is_ok()
    }

    /// Non-support node indices, ascending.
    pub fn free_nodes(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| !self.is_support(i)).collect()
    }

    /// Nodal forces `B w` at **all** nodes by direct per-bar summation.
    pub fn nodal_forces(&self, w: &[f64]) -> Vec<[f64; 2]> {
        let mut f = vec![[0.0; 2]; self.nodes.len()];
        for (b, &(i, j)) in self.bars.iter().enumerate() {
            let e = self.bar_dir(b);
            f[i][0] += w[b] * e[0];
            f[i][1] += w[b] * e[1];
            f[j][0] -= w[b] * e[0];
            f[j][1] -= w[b] * e[1];
        }
        f
    }
}

/// Dense equilibrium matrix `B` restricted to free nodes: row pair `2r,2r+1`
/// holds the force at `free[r]` per unit strength of each bar.
#[derive(Debug, Clone)]
pub struct EquilibriumMatrix {
    /// Rows, `2·(free nodes)`.
    pub m: usize,
    /// Columns, one per bar.
    pub n: usize,
    /// Row-major entries.
    pub a: Vec<f64>,
    /// Free node index per row pair.
    pub free: Vec<usize>,
}

impl EquilibriumMatrix {
    /// Entry `(r, c)`.
    #[inline]
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.a[r * self.n + c]
    }

    /// `B w` on free nodes, flattened `(x,y)` per node.
    pub fn apply(&self, w: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        for r in 0..self.m {
            let row = &self.a[r * self.n..(r + 1) * self.n];
            out[r] = row.iter().zip(w).map(|(a, b)| a * b).sum();
        }
        out
    }

    /// `Bᵀ y` per bar.
    pub fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for r in 0..self.m {
            let row = &self.a[r * self.n..(r + 1) * self.n];
            for (c, a) in row.iter().enumerate() {
                out[c] += a * y[r];
            }
        }
        out
    }
}

/// Assemble the free-node equilibrium matrix of a ground structure.
pub fn equilibrium_matrix(gs: &GroundStructure) -> EquilibriumMatrix {
    let free = gs.free_nodes();
    let mut row_of = vec![usize::MAX; gs.nodes.len()];
    for (r, &nd) in free.iter().enumerate() {
        row_of[nd] = r;
    }
    let (m, n) = (2 * free.len(), gs.bars.len());
    let mut a = vec![0.0; m * n];
    for (b, &(i, j)) in gs.bars.iter().enumerate() {
        let e = gs.bar_dir(b);
        if row_of[i] != usize::MAX {
            a[(2 * row_of[i]) * n + b] += e[0];
            a[(2 * row_of[i] + 1) * n + b] += e[1];
        }
        if row_of[j] != usize::MAX {
            a[(2 * row_of[j]) * n + b] -= e[0];
            a[(2 * row_of[j] + 1) * n + b] -= e[1];
        }
    }
    EquilibriumMatrix { m, n, a, free }
}

/// Michell weight `W = Σ |w_b| ℓ_b` — the total variation of the truss
/// stress measure.
pub fn truss_weight(gs: &GroundStructure, w: &[f64]) -> f64 {
    w.iter()
        .enumerate()
        .map(|(b, &wb)| wb.abs() * gs.bar_length(b))
        .sum()
}

/// Max-norm equilibrium residual `max_{free nodes} |g + B w|_∞`.
pub fn truss_residual(gs: &GroundStructure, w: &[f64], loads: &PointLoadSet) -> f64 {
    let mut g = vec![[0.0; 2]; gs.nodes.len()];
    for &(nd, f) in &loads.forces {
        g[nd][0] += f[0];
        g[nd][1] += f[1];
    }
    let bw = gs.nodal_forces(w);
    let mut r = 0.0f64;
    for nd in 0..gs.nodes.len() {
        if gs.is_support(nd) {
            continue;
        }
        r = r.max((g[nd][0] + bw[nd][0]).abs());
        r = r.max((g[nd][1] + bw[nd][1]).abs());
    }
    r
}

/// Walk a segment through a uniform lattice, reporting
/// `(cell_i, cell_j, intersection length)` per crossed cell. Cells are
/// `[ox + i·hx, ox + (i+1)·hx) × [...)`; sub-segment midpoints decide the
/// cell, so a segment lying exactly on a lattice line lands deterministically
/// in the upper/right cell (floor convention).
fn walk_cells(
    p0: [f64; 2],
    p1: [f64; 2],
    ox: f64,
    oy: f64,
    hx: f64,
    hy: f64,
    ni: usize,
    nj: usize,
    mut visit: impl FnMut(usize, usize, f64),
) {
    let dx = p1[0] - p0[0];
    let dy = p1[1] - p0[1];
    let len = dx.hypot(dy);
    if len == 0.0 {
        return;
    }
    let mut ts = vec![0.0f64, 1.0];
    if dx != 0.0 {
        let (a, b) = ((p0[0] - ox) / hx, (p1[0] - ox) / hx);
        let (lo, hi) = (a.min(b), a.max(b));
        let mut m = lo.ceil() as i64;
        while (m as f64) <= hi {
            let t = ((ox + m as f64 * hx) - p0[0]) / dx;
            if t > 0.0 && t < 1.0 {
                ts.push(t);
            }
            m += 1;
        }
    }
    if dy != 0.0 {
        let (a, b) = ((p0[1] - oy) / hy, (p1[1] - oy) / hy);
        let (lo, hi) = (a.min(b), a.max(b));
        let mut m = lo.ceil() as i64;
        while (m as f64) <= hi {
            let t = ((oy + m as f64 * hy) - p0[1]) / dy;
            if t > 0.0 && t < 1.0 {
                ts.push(t);
            }
            m += 1;
        }
    }
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for pair in ts.windows(2) {
        let (ta, tb) = (pair[0], pair[1]);
        if tb - ta <= 1e-15 {
            continue;
        }
        let tm = 0.5 * (ta + tb);
        let x = p0[0] + tm * dx;
        let y = p0[1] + tm * dy;
        let fi = ((x - ox) / hx).floor();
        let fj = ((y - oy) / hy).floor();
        if fi < 0.0 || fj < 0.0 {
            continue;
        }
        let (i, j) = (fi as usize, fj as usize);
        if i >= ni || j >= nj {
            continue;
        }
        visit(i, j, (tb - ta) * len);
    }
}

/// Exact line raster of a design: per-cell intersection lengths deposited as
/// densities `w·e⊗e·ℓ_cell/vol`, diagonal components on the center lattice
/// and shear on the corner lattice (treated as a half-cell-shifted grid).
/// No mollification.
pub fn rasterize_truss_raw(gs: &GroundStructure, w: &[f64], grid: &Grid2) -> StressField2 {
    let g = *grid;
    let mut out = StressField2::zeros(g);
    let vol = g.vol();
    for (b, &wb) in w.iter().enumerate() {
        if wb == 0.0 {
            continue;
        }
        let (i, j) = gs.bars[b];
        let (p0, p1) = (gs.nodes[i], gs.nodes[j]);
        let e = gs.bar_dir(b);
        let (t11, t22, t12) = (wb * e[0] * e[0], wb * e[1] * e[1], wb * e[0] * e[1]);
        if t11 != 0.0 || t22 != 0.0 {
            walk_cells(p0, p1, g.x0, g.y0, g.hx, g.hy, g.nx, g.ny, |ci, cj, l| {
                out.s11[g.c(ci, cj)] += t11 * l / vol;
                out.s22[g.c(ci, cj)] += t22 * l / vol;
            });
        }
        if t12 != 0.0 {
            // Corner lattice = grid shifted by −h/2; corner (i,j) is the
            // center of its dual cell.
            walk_cells(
                p0,
                p1,
                g.x0 - 0.5 * g.hx,
                g.y0 - 0.5 * g.hy,
                g.hx,
                g.hy,
                g.nx + 1,
                g.ny + 1,
                |ci, cj, l| {
                    out.s12[g.k(ci, cj)] += t12 * l / vol;
                },
            );
        }
    }
    out
}

/// Rasterize and mollify: the discrete counterpart of
/// `η_ε ∗ (Σ w·e⊗e·H¹⌞bar)`.
///
/// # Errors
/// Under-resolved mollifier (`eps < 2·max spacing`).
pub fn rasterize_truss(
    gs: &GroundStructure,
    w: &[f64],
    grid: &Grid2,
    eps: f64,
) -> Result<StressField2> {
    rasterize_truss_raw(gs, w, grid).mollify(eps, PadMode::Zero)
}

/// Parse the plain-text truss format:
///
/// ```text
/// # comment
/// nodes
/// 0  0.0 0.0
/// 1  1.0 0.0
/// bars
/// 0 1
/// loads
/// 0  -1.0 0.0
/// 1   1.0 0.0
/// supports
/// 0 2
/// ```
///
/// Sections in any order; `nodes` ids must be `0..n` in order; `loads` and
/// `supports` are optional.
///
/// # Errors
/// Line-numbered parse errors.
pub fn parse_truss_str(text: &str, path: &str) -> Result<(GroundStructure, PointLoadSet)> {
    #[derive(PartialEq, Clone, Copy)]
    enum Sec {
        None,
        Nodes,
        Bars,
        Loads,
        Supports,
    }
    let perr = |line: usize, msg: String| Error::Parse { path: path.to_string(), line, msg };
    let mut sec = Sec::None;
    let mut nodes: Vec<[f64; 2]> = Vec::new();
    let mut bars: Vec<(usize, usize)> = Vec::new();
    let mut forces: Vec<(usize, [f64; 2])> = Vec::new();
    let mut supports: Vec<usize> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line {
            "nodes" => {
                sec = Sec::Nodes;
                continue;
            }
            "bars" => {
                sec = Sec::Bars;
                continue;
            }
            "loads" => {
                sec = Sec::Loads;
                continue;
            }
            "supports" => {
                sec = Sec::Supports;
                continue;
            }
            _ => {}
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let fnum = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| perr(line_no, format!("malformed number '{s}'")))
        };
        let inum = |s: &str| -> Result<usize> {
            s.parse::<usize>()
                .map_err(|_| perr(line_no, format!("malformed index '{s}'")))
        };
        match sec {
            Sec::None => {
                return Err(perr(line_no, format!("data before any section header: '{line}'")));
            }
            Sec::Nodes => {
                if toks.len() != 3 {
                    return Err(perr(line_no, "node line needs: id x y".into()));
                }
                let id = inum(toks[0])?;
                if id != nodes.len() {
                    return Err(perr(
                        line_no,
                        format!("node ids must be consecutive from 0; expected {}, got {id}", nodes.len()),
                    ));
                }
                nodes.push([fnum(toks[1])?, fnum(toks[2])?]);
            }
            Sec::Bars => {
                if toks.len() != 2 {
                    return Err(perr(line_no, "bar line needs: i j".into()));
                }
                bars.push((inum(toks[0])?, inum(toks[1])?));
            }
            Sec::Loads => {
                if toks.len() != 3 {
                    return Err(perr(line_no, "load line needs: id gx gy".into()));
                }
                forces.push((inum(toks[0])?, [fnum(toks[1])?, fnum(toks[2])?]));
            }
            Sec::Supports => {
                for t in toks {
                    supports.push(inum(t)?);
                }
            }
        }
    }
    if nodes.is_empty() {
        return Err(perr(0, "no nodes section".into()));
    }
    for &(nd, _) in &forces {
        if nd >= nodes.len() {
            return Err(perr(0, format!("load references missing node {nd}")));
        }
    }
    let gs = GroundStructure::new(nodes, bars, supports)?;
    Ok((gs, PointLoadSet { forces }))
}

/// Parse a truss file from disk (format of [`parse_truss_str`]).
///
/// # Errors
/// I/O and parse errors.
pub fn parse_truss_file(path: &Path) -> Result<(GroundStructure, PointLoadSet)> {
    let text = std::fs::read_to_string(path)?;
    parse_truss_str(&text, &path.display().to_string())
}

/// Serialize a ground structure + loads in the text format.
pub fn write_truss_str(gs: &GroundStructure, loads: &PointLoadSet) -> String {
    let mut s = String::from("nodes\n");
    for (i, p) in gs.nodes.iter().enumerate() {
        let _ = writeln!(s, "{i} {} {}", p[0], p[1]);
    }
    s.push_str("bars\n");
    for &(i, j) in &gs.bars {
        let _ = writeln!(s, "{i} {j}");
    }
    if !loads.forces.is_empty() {
        s.push_str("loads\n");
        for &(nd, f) in &loads.forces {
            let _ = writeln!(s, "{nd} {} {}", f[0], f[1]);
        }
    }
    if !gs.supports.is_empty() {
        s.push_str("supports\n");
        let ids: Vec<String> = gs.supports.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "{}", ids.join(" "));
    }
    s
}

/// The two-node, one-bar instance with collinear opposite unit forces.
pub fn single_bar_instance() -> (GroundStructure, PointLoadSet) {
    let gs = GroundStructure::new(
        vec![[0.0, 0.0], [1.0, 0.0]],
        vec![(0, 1)],
        vec![],
    )
    .expect("static instance");
    let loads = PointLoadSet {
        forces: vec![(0, [-1.0, 0.0]), (1, [1.0, 0.0])],
    };
    (gs, loads)
}

/// The two-bar roof: base corners supported, unit downward load at the apex.
pub fn roof_instance() -> (GroundStructure, PointLoadSet) {
    let gs = GroundStructure::new(
        vec![[0.0, 0.0], [1.0, 1.0], [2.0, 0.0]],
        vec![(0, 1), (1, 2)],
        vec![0, 2],
    )
    .expect("static instance");
    let loads = PointLoadSet {
        forces: vec![(1, [0.0, -1.0])],
    };
    (gs, loads)
}
