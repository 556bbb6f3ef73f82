//! Symmetric stress tensors and their spectral decompositions.
//!
//! All integrand formulas in this crate are functions of the eigenvalues
//! `σ₁, …, σₙ` ordered by **absolute value** ascending, `|σ₁| ≤ |σ₂| (≤ |σ₃|)`.
//! The 2×2 decomposition uses the closed form; the 3×3 one uses cyclic
//! Jacobi rotations, which stay accurate near repeated eigenvalues — and
//! repeated eigenvalues sit exactly on integrand branch boundaries, so that
//! robustness matters here. Ties `|σᵢ| = |σⱼ|` are broken by algebraic value
//! (stable), which is observationally irrelevant because every density
//! downstream depends only on absolute values and symmetric functions.

use crate::{Error, Result};

/// Symmetric 2×2 tensor `[[a11, a12], [a12, a22]]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SymTensor2 {
    /// (1,1) entry.
    pub a11: f64,
    /// (2,2) entry.
    pub a22: f64,
    /// off-diagonal entry.
    pub a12: f64,
}

/// Symmetric 3×3 tensor with entries `aij` (i ≤ j).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SymTensor3 {
    /// (1,1) entry.
    pub a11: f64,
    /// (2,2) entry.
    pub a22: f64,
    /// (3,3) entry.
    pub a33: f64,
    /// (1,2) entry.
    pub a12: f64,
    /// (1,3) entry.
    pub a13: f64,
    /// (2,3) entry.
    pub a23: f64,
}

/// Eigen-decomposition of a [`SymTensor2`]: `τ = Σ_c vals[c]·q_c q_cᵀ`.
#[derive(Debug, Clone, Copy)]
pub struct Spectrum2 {
    /// Eigenvalues ordered by absolute value ascending.
    pub vals: [f64; 2],
    /// `frame[c]` is the unit eigenvector for `vals[c]`; columns are
    /// orthonormal.
    pub frame: [[f64; 2]; 2],
}

/// Eigen-decomposition of a [`SymTensor3`].
#[derive(Debug, Clone, Copy)]
pub struct Spectrum3 {
    /// Eigenvalues ordered by absolute value ascending.
    pub vals: [f64; 3],
    /// `frame[c]` is the unit eigenvector for `vals[c]`.
    pub frame: [[f64; 3]; 3],
}

impl SymTensor2 {
    /// Build from entries.
    pub fn new(a11: f64, a22: f64, a12: f64) -> Self {
        Self { a11, a22, a12 }
    }

    /// Diagonal tensor `diag(d1, d2)`.
    pub fn diag(d1: f64, d2: f64) -> Self {
        Self { a11: d1, a22: d2, a12: 0.0 }
    }

    /// Zero tensor.
    pub fn zero() -> Self {
        Self::default()
    }

    /// Squared Frobenius norm `a11² + a22² + 2·a12²`.
    pub fn frob2(&self) -> f64 {
        self.a11 * self.a11 + self.a22 * self.a22 + 2.0 * self.a12 * self.a12
    }

    /// Frobenius norm.
    pub fn frob(&self) -> f64 {
        self.frob2().sqrt()
    }

    /// Determinant.
    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a12
    }

    /// Trace.
    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    /// All entries finite?
    pub fn is_finite(&self) -> bool {
        self.a11.is_finite() && self.a22.is_finite() && self.a12.is_finite()
    }

    /// Eigenvalues only (|·|-ascending), skipping the frame.
    pub fn eigvals(&self) -> [f64; 2] {
        let m = 0.5 * (self.a11 + self.a22);
        let d = 0.5 * (self.a11 - self.a22);
        let r = d.hypot(self.a12);
        sort_abs2([m - r, m + r])
    }

    /// Full spectral decomposition.
    ///
    /// # Errors
    /// Rejects non-finite entries.
    pub fn eigen(&self) -> Result<Spectrum2> {
        if !self.is_finite() {
            return Err(Error::InvalidInput("non-finite tensor entries".into()));
        }
        let m = 0.5 * (self.a11 + self.a22);
        let d = 0.5 * (self.a11 - self.a22);
        let r = d.hypot(self.a12);
        // Eigenvector angle for the larger (algebraic) eigenvalue m + r.
        let theta = 0.5 * f64::atan2(2.0 * self.a12, self.a11 - self.a22);
        let (s, c) = theta.sin_cos();
        let hi = [c, s]; // eigenvector of m + r
        let lo = [-s, c]; // eigenvector of m - r
        let (vals, frame) = order_pairs2([(m - r, lo), (m + r, hi)]);
        Ok(Spectrum2 { vals, frame })
    }
}

impl std::ops::Add for SymTensor2 {
    type Output = SymTensor2;
    fn add(self, o: SymTensor2) -> SymTensor2 {
        SymTensor2::new(self.a11 + o.a11, self.a22 + o.a22, self.a12 + o.a12)
    }
}

impl std::ops::Sub for SymTensor2 {
    type Output = SymTensor2;
    fn sub(self, o: SymTensor2) -> SymTensor2 {
        SymTensor2::new(self.a11 - o.a11, self.a22 - o.a22, self.a12 - o.a12)
    }
}

impl std::ops::Mul<f64> for SymTensor2 {
    type Output = SymTensor2;
    fn mul(self, s: f64) -> SymTensor2 {
        SymTensor2::new(self.a11 * s, self.a22 * s, self.a12 * s)
    }
}

impl SymTensor3 {
    /// Build from entries (i ≤ j order: a11, a22, a33, a12, a13, a23).
    pub fn new(a11: f64, a22: f64, a33: f64, a12: f64, a13: f64, a23: f64) -> Self {
        Self { a11, a22, a33, a12, a13, a23 }
    }

    /// Diagonal tensor.
    pub fn diag(d1: f64, d2: f64, d3: f64) -> Self {
        Self { a11: d1, a22: d2, a33: d3, ..Self::default() }
    }

    /// Zero tensor.
    pub fn zero() -> Self {
        Self::default()
    }

    /// Squared Frobenius norm (off-diagonals counted twice).
    pub fn frob2(&self) -> f64 {
        self.a11 * self.a11
            + self.a22 * self.a22
            + self.a33 * self.a33
            + 2.0 * (self.a12 * self.a12 + self.a13 * self.a13 + self.a23 * self.a23)
    }

    /// Frobenius norm.
    pub fn frob(&self) -> f64 {
        self.frob2().sqrt()
    }

    /// Trace.
    pub fn trace(&self) -> f64 {
        self.a11 + self.a22 + self.a33
    }

    /// All entries finite?
    pub fn is_finite(&self) -> bool {
        self.a11.is_finite()
            && self.a22.is_finite()
            && self.a33.is_finite()
            && self.a12.is_finite()
            && self.a13.is_finite()
            && self.a23.is_finite()
    }

    /// Dense 3×3 representation.
    fn matrix(&self) -> [[f64; 3]; 3] {
        [
            [self.a11, self.a12, self.a13],
            [self.a12, self.a22, self.a23],
            [self.a13, self.a23, self.a33],
        ]
    }

    /// Eigenvalues only (|·|-ascending).
    pub fn eigvals(&self) -> [f64; 3] {
        let (vals, _) = jacobi3(self.matrix());
        sort_abs3(vals)
    }

    /// Full spectral decomposition by cyclic Jacobi iteration.
    ///
    /// # Errors
    /// Rejects non-finite entries.
    pub fn eigen(&self) -> Result<Spectrum3> {
        if !self.is_finite() {
            return Err(Error::InvalidInput("non-finite tensor entries".into()));
        }
        let (vals, vecs) = jacobi3(self.matrix());
        // vecs columns are eigenvectors; order like the eigenvalues.
        let mut pairs: Vec<(f64, [f64; 3])> = (0..3)
            .map(|c| (vals[c], [vecs[0][c], vecs[1][c], vecs[2][c]]))
            .collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        pairs.sort_by(|a, b| a.0.abs().partial_cmp(&b.0.abs()).unwrap());
        Ok(Spectrum3 {
            vals: [pairs[0].0, pairs[1].0, pairs[2].0],
            frame: [pairs[0].1, pairs[1].1, pairs[2].1],
        })
    }
}

impl std::ops::Add for SymTensor3 {
    type Output = SymTensor3;
    fn add(self, o: SymTensor3) -> SymTensor3 {
        SymTensor3::new(
            self.a11 + o.a11,
            self.a22 + o.a22,
            self.a33 + o.a33,
            self.a12 + o.a12,
            self.a13 + o.a13,
            self.a23 + o.a23,
        )
    }
}

impl std::ops::Sub for SymTensor3 {
    type Output = SymTensor3;
    fn sub(self, o: SymTensor3) -> SymTensor3 {
        SymTensor3::new(
            self.a11 - o.a11,
            self.a22 - o.a22,
            self.a33 - o.a33,
            self.a12 - o.a12,
            self.a13 - o.a13,
            self.a23 - o.a23,
        )
    }
}

impl std::ops::Mul<f64> for SymTensor3 {
    type Output = SymTensor3;
    fn mul(self, s: f64) -> SymTensor3 {
        SymTensor3::new(
            self.a11 * s,
            self.a22 * s,
            self.a33 * s,
            self.a12 * s,
            self.a13 * s,
            self.a23 * s,
        )
    }
}

impl Spectrum2 {
    /// Rebuild a tensor from new eigenvalues in this frame:
    /// `Σ_c vals[c]·q_c q_cᵀ`.
    pub fn reconstruct(&self, vals: [f64; 2]) -> SymTensor2 {
        let mut t = SymTensor2::zero();
        for c in 0..2 {
            let q = self.frame[c];
            t.a11 += vals[c] * q[0] * q[0];
            t.a22 += vals[c] * q[1] * q[1];
            t.a12 += vals[c] * q[0] * q[1];
        }
        t
    }

    /// Reconstruct with the stored eigenvalues.
    pub fn tensor(&self) -> SymTensor2 {
        self.reconstruct(self.vals)
    }
}

impl Spectrum3 {
    /// Rebuild a tensor from new eigenvalues in this frame.
    pub fn reconstruct(&self, vals: [f64; 3]) -> SymTensor3 {
        let mut t = SymTensor3::zero();
        for c in 0..3 {
            let q = self.frame[c];
            t.a11 += vals[c] * q[0] * q[0];
            t.a22 += vals[c] * q[1] * q[1];
            t.a33 += vals[c] * q[2] * q[2];
            t.a12 += vals[c] * q[0] * q[1];
            t.a13 += vals[c] * q[0] * q[2];
            t.a23 += vals[c] * q[1] * q[2];
        }
        t
    }

    /// Reconstruct with the stored eigenvalues.
    pub fn tensor(&self) -> SymTensor3 {
        self.reconstruct(self.vals)
    }
}

/// Sort a pair by absolute value ascending, ties by algebraic value.
pub fn sort_abs2(mut v: [f64; 2]) -> [f64; 2] {
    if v[0] > v[1] {
        v.swap(0, 1);
    }
    if v[0].abs() > v[1].abs() {
        v.swap(0, 1);
    }
    v
}

/// Sort a triple by absolute value ascending, ties by algebraic value.
pub fn sort_abs3(v: [f64; 3]) -> [f64; 3] {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    s.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap());
    [s[0], s[1], s[2]]
}

fn order_pairs2(pairs: [(f64, [f64; 2]); 2]) -> ([f64; 2], [[f64; 2]; 2]) {
    let mut p = pairs;
    // Pre-sort algebraically, then stable-sort by |·| (two elements: one swap).
    if p[0].0 > p[1].0 {
        p.swap(0, 1);
    }
    if p[0].0.abs() > p[1].0.abs() {
        p.swap(0, 1);
    }
    ([p[0].0, p[1].0], [p[0].1, p[1].1])
}

/// Cyclic Jacobi eigen-iteration for a symmetric 3×3 matrix.
///
/// Sweeps the off-diagonal pairs (0,1), (0,2), (1,2) with classical Jacobi
/// rotations until the off-diagonal Frobenius mass falls below
/// `1e-30·‖A‖²_F` or 15 sweeps pass (quadratic convergence makes 15 a
/// generous cap). Returns `(diag, V)` with `A = V·diag·Vᵀ` and orthonormal
/// columns.
fn jacobi3(mut a: [[f64; 3]; 3]) -> ([f64; 3], [[f64; 3]; 3]) {
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let norm2: f64 = a.iter().flatten().map(|x| x * x).sum();
    for _sweep in 0..15 {
        let off2 = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        if off2 <= 1e-30 * norm2 {
            break;
        }
        for &(p, q) in &[(0usize, 1usize), (0, 2), (1, 2)] {
            let apq = a[p][q];
            if apq == 0.0 {
                continue;
            }
            // Rotation angle from the standard Jacobi recurrence.
            let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            // A ← JᵀAJ with the rotation J acting on rows/cols p,q.
            for k in 0..3 {
                let akp = a[k][p];
                let akq = a[k][q];
                a[k][p] = c * akp - s * akq;
                a[k][q] = s * akp + c * akq;
            }
            for k in 0..3 {
                let apk = a[p][k];
                let aqk = a[q][k];
                a[p][k] = c * apk - s * aqk;
                a[q][k] = s * apk + c * aqk;
            }
            // Clean the rotated-away entry to avoid residue accumulation.
            a[p][q] = 0.0;
            a[q][p] = 0.0;
            for k in 0..3 {
                let vkp = v[k][p];
                let vkq = v[k][q];
                v[k][p] = c * vkp - s * vkq;
                v[k][q] = s * vkp + c * vkq;
            }
        }
    }
    ([a[0][0], a[1][1], a[2][2]], v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tol;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_sym3(rng: &mut ChaCha8Rng, scale: f64) -> SymTensor3 {
        SymTensor3::new(
            rng.gen_range(-scale..scale),
            rng.gen_range(-scale..scale),
            rng.gen_range(-scale..scale),
            rng.gen_range(-scale..scale),
            rng.gen_range(-scale..scale),
            rng.gen_range(-scale..scale),
        )
    }

    #[test]
    fn diag_ordering_2d() {
        let s = SymTensor2::diag(3.0, -4.0).eigen().unwrap();
        assert_relative_eq!(s.vals[0], 3.0, max_relative = tol::EXACT);
        assert_relative_eq!(s.vals[1], -4.0, max_relative = tol::EXACT);
    }

    #[test]
    fn toeplitz_2d() {
        // [[1,2],[2,1]] has eigenvalues {3, -1}, ordered (-1, 3).
        let s = SymTensor2::new(1.0, 1.0, 2.0).eigen().unwrap();
        assert_relative_eq!(s.vals[0], -1.0, max_relative = tol::EXACT);
        assert_relative_eq!(s.vals[1], 3.0, max_relative = tol::EXACT);
        // Eigenvectors are (1,±1)/√2.
        for c in 0..2 {
            let q = s.frame[c];
            assert_relative_eq!(q[0].abs(), (0.5f64).sqrt(), max_relative = 1e-12);
            assert_relative_eq!(q[1].abs(), (0.5f64).sqrt(), max_relative = 1e-12);
        }
    }

    #[test]
    fn reconstruct_random_2d() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            let t = SymTensor2::new(
                rng.gen_range(-5.0..5.0),
                rng.gen_range(-5.0..5.0),
                rng.gen_range(-5.0..5.0),
            );
            let s = t.eigen().unwrap();
            let r = s.tensor();
            let err = (r - t).frob();
            assert!(err <= tol::EXACT * (1.0 + t.frob()), "err={err}");
            assert!(s.vals[0].abs() <= s.vals[1].abs() + 1e-300);
        }
    }

    #[test]
    fn reconstruct_random_3d() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..2000 {
            let t = random_sym3(&mut rng, 5.0);
            let s = t.eigen().unwrap();
            let r = s.tensor();
            let err = (r - t).frob();
            assert!(err <= tol::EXACT * (1.0 + t.frob()), "err={err}");
            assert!(s.vals[0].abs() <= s.vals[1].abs() + 1e-300);
            assert!(s.vals[1].abs() <= s.vals[2].abs() + 1e-300);
            // Orthonormal frame.
            for i in 0..3 {
                for j in 0..3 {
                    let dot: f64 = (0..3).map(|k| s.frame[i][k] * s.frame[j][k]).sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - want).abs() <= 1e-12, "frame not orthonormal");
                }
            }
        }
    }

    #[test]
    fn invariants_3d() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..500 {
            let t = random_sym3(&mut rng, 3.0);
            let v = t.eigvals();
            assert_relative_eq!(
                v.iter().sum::<f64>(),
                t.trace(),
                epsilon = 1e-10,
                max_relative = 1e-10
            );
            assert_relative_eq!(
                v.iter().map(|x| x * x).sum::<f64>(),
                t.frob2(),
                epsilon = 1e-10,
                max_relative = 1e-10
            );
        }
    }

    #[test]
    fn near_degenerate_3d() {
        // Nearly repeated eigenvalues: Jacobi must stay accurate.
        let t = SymTensor3::new(1.0, 1.0 + 1e-13, 1.0 - 1e-13, 1e-14, -1e-14, 1e-14);
        let s = t.eigen().unwrap();
        let r = s.tensor();
        assert!((r - t).frob() <= 1e-12 * (1.0 + t.frob()));
    }

    #[test]
    fn rejects_non_finite() {
        assert!(SymTensor2::new(f64::NAN, 0.0, 0.0).eigen().is_err());
        assert!(SymTensor3::new(0.0, 0.0, f64::INFINITY, 0.0, 0.0, 0.0)
            .eigen()
            .is_err());
    }
}
