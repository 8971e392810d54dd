//! Dense complex linear algebra on top of `faer`.
//!
//! Everything downstream works with `Mat<c64>` / `Col<c64>` directly; this
//! module adds the handful of helpers the physics code needs (Kronecker
//! products, Hermitian checks, eigendecompositions) and routes matrix products
//! through an explicit parallelism setting so the `parallel` feature can fall
//! back to sequential execution.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, Par, Side};
use std::sync::Once;

pub type C64 = num_complex::Complex64;
pub type CMat = Mat<C64>;
pub type CVec = faer::Col<C64>;

pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

static INIT: Once = Once::new();

/// Parallelism used by every dense kernel in this crate.
///
/// With the `parallel` feature (default) this is rayon over all cores; without
/// it everything runs sequentially. The global faer setting is initialized
/// once so operator expressions (`&a * &b`) behave consistently.
pub fn default_par() -> Par {
    INIT.call_once(|| {
        #[cfg(feature = "parallel")]
        faer::set_global_parallelism(Par::rayon(0));
        #[cfg(not(feature = "parallel"))]
        faer::set_global_parallelism(Par::Seq);
    });
    faer::get_global_parallelism()
}

/// Map a slice, in parallel when the `parallel` feature is enabled.
pub fn par_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(|x| f(x)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    items.iter().map(|x| f(x)).collect()
}

pub fn identity(n: usize) -> CMat {
    Mat::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
}

/// dst = a * b.
pub fn matmul_into(dst: &mut CMat, a: &CMat, b: &CMat) {
    matmul(dst.as_mut(), Accum::Replace, a.as_ref(), b.as_ref(), ONE, default_par());
}

/// dst += scale * a * b.
pub fn matmul_acc(dst: &mut CMat, scale: C64, a: &CMat, b: &CMat) {
    matmul(dst.as_mut(), Accum::Add, a.as_ref(), b.as_ref(), scale, default_par());
}

/// out = m * v.
pub fn matvec_into(out: &mut CVec, m: &CMat, v: &CVec) {
    matmul(out.as_mut(), Accum::Replace, m.as_ref(), v.as_ref(), ONE, default_par());
}

/// Conjugate transpose.
pub fn dagger(m: &CMat) -> CMat {
    m.adjoint().to_owned()
}

/// (m + m†)/2.
pub fn hermitize(m: &CMat) -> CMat {
    let n = m.nrows();
    Mat::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)].conj()))
}

pub fn trace(m: &CMat) -> C64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).sum()
}

/// Largest absolute entry.
pub fn max_abs(m: &CMat) -> f64 {
    let mut mx = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            mx = mx.max(m[(i, j)].norm());
        }
    }
    mx
}

pub fn frob_norm(m: &CMat) -> f64 {
    let mut s = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            s += m[(i, j)].norm_sqr();
        }
    }
    s.sqrt()
}

/// ‖m − m†‖_max relative to ‖m‖_max (0 for the zero matrix).
pub fn hermiticity_defect(m: &CMat) -> f64 {
    let scale = max_abs(m);
    if scale == 0.0 {
        return 0.0;
    }
    let mut mx = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..=j {
            mx = mx.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    mx / scale
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    hermiticity_defect(m) <= tol
}

/// Kronecker product a ⊗ b.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = (a.nrows(), a.ncols());
    let (br, bc) = (b.nrows(), b.ncols());
    Mat::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// u† v.
pub fn vdot(u: &CVec, v: &CVec) -> C64 {
    (0..u.nrows()).map(|i| u[i].conj() * v[i]).sum()
}

pub fn norm(v: &CVec) -> f64 {
    vdot(v, v).re.sqrt()
}

pub fn normalize(v: &mut CVec) -> f64 {
    let n = norm(v);
    if n > 0.0 {
        let inv = ONE * (1.0 / n);
        for i in 0..v.nrows() {
            v[i] *= inv;
        }
    }
    n
}

/// |u⟩⟨v|.
pub fn outer(u: &CVec, v: &CVec) -> CMat {
    Mat::from_fn(u.nrows(), v.nrows(), |i, j| u[i] * v[j].conj())
}

/// ⟨psi| op |psi⟩.
pub fn expectation(op: &CMat, psi: &CVec) -> C64 {
    let mut tmp = CVec::zeros(psi.nrows());
    matvec_into(&mut tmp, op, psi);
    vdot(psi, &tmp)
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Returns eigenvalues in ascending order and the matching eigenvector
/// columns. The input is symmetrized implicitly by reading the lower triangle.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    default_par();
    let n = m.nrows();
    let eig = m
        .self_adjoint_eigen(Side::Lower)
        .expect("self-adjoint eigendecomposition failed to converge");
    let mut vals: Vec<f64> = (0..n).map(|i| eig.S().column_vector()[i].re).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap());
    let vecs = Mat::from_fn(n, n, |i, j| eig.U()[(i, order[j])]);
    vals = order.iter().map(|&k| vals[k]).collect();
    (vals, vecs)
}

/// exp(scale * m) for Hermitian m, via eigendecomposition.
///
/// With `scale = -i h` this is the unitary propagator of a constant
/// Hamiltonian over a step h.
pub fn expm_hermitian(m: &CMat, scale: C64) -> CMat {
    let n = m.nrows();
    let (vals, vecs) = eigh(m);
    let mut scaled = CMat::zeros(n, n);
    for j in 0..n {
        let ph = (scale * vals[j]).exp();
        for i in 0..n {
            scaled[(i, j)] = vecs[(i, j)] * ph;
        }
    }
    let mut out = CMat::zeros(n, n);
    let vdag = dagger(&vecs);
    matmul_into(&mut out, &scaled, &vdag);
    out
}
