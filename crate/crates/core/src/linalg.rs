//! Minimal generic conjugate gradients and power iteration over the crate's
//! field types.
//!
//! All first-order machinery in [`crate::solvers`] and the `H⁻¹` diagnostic
//! in [`crate::hm1`] reduce to symmetric positive (semi)definite solves and
//! operator-norm estimates in the volume-weighted inner products the field
//! types already carry, so one small trait covers every case.

/// Vector-space operations needed by CG / power iteration.
pub(crate) trait LinVec: Clone {
    /// Inner product (each type's native weighted product).
    fn lv_dot(&self, other: &Self) -> f64;
    /// `self += a·other`.
    fn lv_axpy(&mut self, a: f64, other: &Self);
    /// `self *= a`.
    fn lv_scale(&mut self, a: f64);
    /// Norm induced by the inner product.
    fn lv_norm(&self) -> f64 {
        self.lv_dot(self).max(0.0).sqrt()
    }
}

macro_rules! impl_linvec {
    ($t:ty) => {
        impl LinVec for $t {
            fn lv_dot(&self, other: &Self) -> f64 {
                self.dot(other)
            }
            fn lv_axpy(&mut self, a: f64, other: &Self) {
                self.axpy(a, other);
            }
            fn lv_scale(&mut self, a: f64) {
                self.scale(a);
            }
        }
    };
}

impl_linvec!(crate::field2::StressField2);
impl_linvec!(crate::field2::VectorField2);
impl_linvec!(crate::field2::CenterField2);
impl_linvec!(crate::field3::StressField3);
impl_linvec!(crate::field3::VectorField3);
impl_linvec!(crate::field3::CenterField3);

/// Conjugate gradients for `A x = b` with SPD (or positive semidefinite with
/// `b ⊥ ker A`) operator `A`, starting from `x₀ = 0`.
///
/// Returns `(x, relative_residual, iterations)`; stops at
/// `‖b − Ax‖ ≤ tol_rel·‖b‖` or after `max_iter` steps, whichever comes
/// first. The caller decides whether a loose final residual is an error.
pub(crate) fn cg<V: LinVec>(
    apply: impl Fn(&V) -> V,
    b: &V,
    tol_rel: f64,
    max_iter: usize,
) -> (V, f64, usize) {
    let mut x0 = b.clone();
    x0.lv_scale(0.0);
    cg_from(apply, b, x0, tol_rel, max_iter)
}

/// [`cg`] with a caller-supplied initial guess (warm start).
pub(crate) fn cg_from<V: LinVec>(
    apply: impl Fn(&V) -> V,
    b: &V,
    x0: V,
    tol_rel: f64,
    max_iter: usize,
) -> (V, f64, usize) {
    let bnorm = b.lv_norm();
    let mut x = x0;
    if bnorm == 0.0 {
        x.lv_scale(0.0);
        return (x, 0.0, 0);
    }
    let mut r = b.clone();
    r.lv_axpy(-1.0, &apply(&x));
    let mut p = r.clone();
    let mut rr = r.lv_dot(&r);
    let target = tol_rel * bnorm;
    for it in 0..max_iter {
        if rr.sqrt() <= target {
            return (x, rr.sqrt() / bnorm, it);
        }
        let ap = apply(&p);
        let pap = p.lv_dot(&ap);
        if pap <= 0.0 || !pap.is_finite() {
            // Hit the kernel or numerical breakdown: return best iterate.
            return (x, rr.sqrt() / bnorm, it);
        }
        let alpha = rr / pap;
        x.lv_axpy(alpha, &p);
        r.lv_axpy(-alpha, &ap);
        let rr_new = r.lv_dot(&r);
        let beta = rr_new / rr;
        rr = rr_new;
        let mut p_new = r.clone();
        p_new.lv_axpy(beta, &p);
        p = p_new;
    }
    (x, rr.sqrt() / bnorm, max_iter)
}

/// Largest eigenvalue estimate of an SPD operator by plain power iteration
/// from a caller-supplied start vector.
pub(crate) fn power_iteration<V: LinVec>(apply: impl Fn(&V) -> V, start: &V, iters: usize) -> f64 {
    let mut v = start.clone();
    let n = v.lv_norm();
    if n == 0.0 {
        return 0.0;
    }
    v.lv_scale(1.0 / n);
    let mut lam = 0.0;
    for _ in 0..iters {
        let w = apply(&v);
        lam = v.lv_dot(&w);
        let wn = w.lv_norm();
        if wn == 0.0 {
            return 0.0;
        }
        v = w;
        v.lv_scale(1.0 / wn);
    }
    lam.max(0.0)
}
