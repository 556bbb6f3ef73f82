//! Dense linear programming in equality form: `min c·x  s.t.  A x = b, x ≥ 0`.
//!
//! Two-phase revised simplex with an explicitly maintained basis inverse and
//! Bland's anti-cycling rule. Sized for desk-scale ground structures (tens of
//! nodes, hundreds of bars), where the O(m²n) pricing per pivot is irrelevant
//! and determinism plus a checkable dual certificate matter more than speed.
//!
//! Redundant equality rows (rigid translations of an unsupported structure)
//! are handled by letting their artificials stay basic at value zero with
//! cost zero in phase two; the dual component on such a row is then one valid
//! choice among many, and certificates remain exact because `y·b = c_B·x_B`
//! holds identically for any feasible basis.

use crate::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone)]
pub struct DenseMatrix {
    /// Rows.
    pub m: usize,
    /// Columns.
    pub n: usize,
    /// Entries, row-major, length `m·n`.
    pub a: Vec<f64>,
}

impl DenseMatrix {
    /// Zero matrix.
    pub fn zeros(m: usize, n: usize) -> Self {
        Self { m, n, a: vec![0.0; m * n] }
    }

    /// Entry `(r, c)`.
    #[inline]
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.a[r * self.n + c]
    }

    /// Mutable entry `(r, c)`.
    #[inline]
    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut f64 {
        &mut self.a[r * self.n + c]
    }

    /// Column `c` copied out.
    pub fn col(&self, c: usize) -> Vec<f64> {
        (0..self.m).map(|r| self.at(r, c)).collect()
    }
}

/// Primal-dual solution of an equality-form LP.
#[derive(Debug, Clone)]
pub struct LpSolution {
    /// Primal optimum, length `n`.
    pub x: Vec<f64>,
    /// Dual multipliers of the equality rows, length `m`.
    pub y: Vec<f64>,
    /// Objective `c·x`.
    pub objective: f64,
    /// Simplex pivots across both phases.
    pub iterations: usize,
}

/// Pivot tolerance: column entries at or below this are treated as zero in
/// the ratio test.
const PIVOT_TOL: f64 = 1e-11;
/// Reduced costs above `-DANTZIG_TOL` count as nonnegative (optimal).
const DANTZIG_TOL: f64 = 1e-9;
/// Phase-one objective above this declares the program infeasible.
const FEAS_TOL: f64 = 1e-8;

struct Tableau {
    m: usize,
    /// Basis inverse, row-major m×m.
    binv: Vec<f64>,
    /// Basic column index per row.
    basis: Vec<usize>,
    /// Basic variable values (= B⁻¹ b).
    xb: Vec<f64>,
}

impl Tableau {
    /// `B⁻¹ · col` for an extended column index.
    fn ftran(&self, a: &DenseMatrix, col: usize) -> Vec<f64> {
        let m = self.m;
        let mut u = vec![0.0; m];
        if col < a.n {
            for r in 0..m {
                let row = &self.binv[r * m..(r + 1) * m];
                u[r] = row.iter().enumerate().map(|(k, v)| v * a.at(k, col)).sum();
            }
        } else {
            // artificial for row (col − n): unit column picks a binv column
            let r0 = col - a.n;
            for r in 0..m {
                u[r] = self.binv[r * m + r0];
            }
        }
        u
    }

    /// Replace the `leave`-th basic variable by extended column `enter`,
    /// given the already computed direction `u = B⁻¹·a_enter`.
    fn pivot(&mut self, enter: usize, leave: usize, u: &[f64]) {
        let m = self.m;
        let piv = u[leave];
        let theta = self.xb[leave] / piv;
        for r in 0..m {
            if r != leave {
                self.xb[r] -= theta * u[r];
                if self.xb[r] < 0.0 && self.xb[r] > -1e-13 {
                    self.xb[r] = 0.0;
                }
            }
        }
        self.xb[leave] = theta;
        // binv row update: row(leave) /= piv; row(r) −= u_r·row(leave)
        for c in 0..m {
            self.binv[leave * m + c] /= piv;
        }
        for r in 0..m {
            if r == leave {
                continue;
            }
            let f = u[r];
            if f == 0.0 {
                continue;
            }
            for c in 0..m {
                self.binv[r * m + c] -= f * self.binv[leave * m + c];
            }
        }
        self.basis[leave] = enter;
    }
}

/// Solve `min c·x  s.t.  A x = b, x ≥ 0` by two-phase revised simplex.
///
/// # Errors
/// [`Error::Lp`] on infeasible input, unbounded objective, dimension
/// mismatch, or iteration-limit overrun.
pub fn simplex_min(c: &[f64], a: &DenseMatrix, b: &[f64]) -> Result<LpSolution> {
    let (m, n) = (a.m, a.n);
    if c.len() != n || b.len() != m {
        return Err(Error::Lp(format!(
            "dimension mismatch: A is {m}×{n}, c has {}, b has {}",
            c.len(),
            b.len()
        )));
    }
    if m == 0 {
        return Ok(LpSolution { x: vec![0.0; n], y: vec![], objective: 0.0, iterations: 0 });
    }

    // Flip rows so b ≥ 0, keeping the sign to undo on the duals.
    let mut aa = a.clone();
    let mut bb = b.to_vec();
    let mut row_sign = vec![1.0; m];
    for r in 0..m {
        if bb[r] < 0.0 {
            row_sign[r] = -1.0;
            bb[r] = -bb[r];
            for cidx in 0..n {
                *aa.at_mut(r, cidx) = -aa.at(r, cidx);
            }
        }
    }

    let ncols = n + m;
    let mut t = Tableau {
        m,
        binv: {
            let mut id = vec![0.0; m * m];
            for r in 0..m {
                id[r * m + r] = 1.0;
            }
            id
        },
        basis: (n..ncols).collect(),
        xb: bb.clone(),
    };

    let max_pivots = 200 * (m + n) + 1000;
    let mut pivots = 0usize;

    // cost vector per phase over extended columns
    let run_phase = |t: &mut Tableau, pivots: &mut usize, phase1: bool| -> Result<()> {
        loop {
            if *pivots > max_pivots {
                return Err(Error::Lp(format!("iteration limit {max_pivots} exceeded")));
            }
            // duals y = c_B·B⁻¹ for the phase cost
            let m = t.m;
            let mut y = vec![0.0; m];
            for r in 0..m {
                let cb = if phase1 {
                    if t.basis[r] >= n { 1.0 } else { 0.0 }
                } else if t.basis[r] >= n {
                    0.0
                } else {
                    c[t.basis[r]]
                };
                if cb != 0.0 {
                    for k in 0..m {
                        y[k] += cb * t.binv[r * m + k];
                    }
                }
            }
            // Bland: smallest original column with negative reduced cost.
            // Artificials never re-enter.
            let mut enter = usize::MAX;
            for j in 0..n {
                if t.basis.contains(&j) {
                    continue;
                }
                let cj = if phase1 { 0.0 } else { c[j] };
                let ya: f64 = (0..m).map(|r| y[r] * aa.at(r, j)).sum();
                if cj - ya < -DANTZIG_TOL {
                    enter = j;
                    break;
                }
            }
            if enter == usize::MAX {
                return Ok(());
            }
            let u = t.ftran(&aa, enter);
            // ratio test with Bland tie-break on basic variable index
            let mut leave = usize::MAX;
            let mut best = f64::INFINITY;
            for r in 0..m {
                if u[r] > PIVOT_TOL {
                    let ratio = t.xb[r] / u[r];
                    if ratio < best - 1e-13
                        || (ratio < best + 1e-13
                            && (leave == usize::MAX || t.basis[r] < t.basis[leave]))
                    {
                        best = ratio;
                        leave = r;
                    }
                }
            }
            if leave == usize::MAX {
                return Err(Error::Lp("unbounded objective".into()));
            }
            t.pivot(enter, leave, &u);
            *pivots += 1;
        }
    };

    // Phase one: minimize the artificial sum.
    run_phase(&mut t, &mut pivots, true)?;
    let phase1_obj: f64 = (0..m)
        .filter(|&r| t.basis[r] >= n)
        .map(|r| t.xb[r])
        .sum();
    if phase1_obj > FEAS_TOL {
        return Err(Error::Lp(format!(
            "infeasible: phase-one objective {phase1_obj:.3e}"
        )));
    }
    // Try to drive artificials out of the basis (degenerate pivots); rows
    // where no original column has a nonzero entry are redundant and keep
    // their artificial basic at zero.
    for r in 0..m {
        if t.basis[r] < n {
            continue;
        }
        let mut found = usize::MAX;
        let mut found_u = Vec::new();
        for j in 0..n {
            if t.basis.contains(&j) {
                continue;
            }
            let u = t.ftran(&aa, j);
            if u[r].abs() > 1e-7 {
                found = j;
                found_u = u;
                break;
            }
        }
        if found != usize::MAX {
            // degenerate pivot: xb[r] is 0 (phase-one optimum), so the basis
            // change keeps feasibility
            t.xb[r] = 0.0;
            t.pivot(found, r, &found_u);
            pivots += 1;
        }
    }

    // Phase two.
    run_phase(&mut t, &mut pivots, false)?;

    let mut x = vec![0.0; n];
    for r in 0..m {
        if t.basis[r] < n {
            x[t.basis[r]] = t.xb[r].max(0.0);
        }
    }
    // duals for the true cost, mapped back through the row flips
    let mut y = vec![0.0; m];
    for r in 0..m {
        let cb = if t.basis[r] >= n { 0.0 } else { c[t.basis[r]] };
        if cb != 0.0 {
            for k in 0..m {
                y[k] += cb * t.binv[r * m + k];
            }
        }
    }
    for r in 0..m {
        y[r] *= row_sign[r];
    }
    let objective = c.iter().zip(&x).map(|(a, b)| a * b).sum();
    Ok(LpSolution { x, y, objective, iterations: pivots })
}
