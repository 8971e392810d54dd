//! Truncated bosonic bases, cat/coherent states, and tensor-product algebra
//! for the four-mode system (KPO1, KPO2, coupler1, coupler2).
//!
//! KPO modes are expanded in the energy eigenbasis of the isolated oscillator
//! −(K/2)a†²a² + (p/2)(a†² + a²), keeping the `keep_dim` highest levels; the
//! doubly degenerate top pair spans the cat manifold span{|α⟩, |−α⟩} with
//! α = √(p/K). Couplers stay in the plain Fock basis. Mode ordering in every
//! tensor product is (KPO1, KPO2, coupler1, coupler2).

use crate::linalg::{self, dagger, kron, matmul_into, CMat, CVec, C64, ONE, ZERO};
use crate::{Error, Result};

/// How a mode's retained basis relates to the Fock basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeKind {
    /// Plain Fock basis truncated at `fock_cutoff` (keep_dim == fock_cutoff).
    Fock,
    /// Highest `keep_dim` eigenstates of the isolated KPO Hamiltonian,
    /// diagonalized in a `fock_cutoff`-dimensional Fock space.
    KpoEigen,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModeSpec {
    pub kind: ModeKind,
    pub fock_cutoff: usize,
    pub keep_dim: usize,
}

impl ModeSpec {
    pub fn fock(dim: usize) -> Self {
        ModeSpec { kind: ModeKind::Fock, fock_cutoff: dim, keep_dim: dim }
    }

    pub fn kpo_eigen(fock_cutoff: usize, keep_dim: usize) -> Self {
        ModeSpec { kind: ModeKind::KpoEigen, fock_cutoff, keep_dim }
    }

    pub fn validate(&self) -> Result<()> {
        if self.keep_dim < 2 || self.keep_dim > self.fock_cutoff {
            return Err(Error::InvalidDimension(format!(
                "mode keep_dim {} must satisfy 2 <= keep_dim <= fock_cutoff {}",
                self.keep_dim, self.fock_cutoff
            )));
        }
        Ok(())
    }
}

/// Annihilation operator on a `cutoff`-dimensional Fock space.
///
/// Entry (n−1, n) is √n; everything else is zero.
pub fn fock_annihilation(cutoff: usize) -> Result<CMat> {
    if cutoff < 2 {
        return Err(Error::InvalidDimension(format!(
            "fock cutoff {cutoff} < 2"
        )));
    }
    let mut a = CMat::zeros(cutoff, cutoff);
    for n in 1..cutoff {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    Ok(a)
}

/// Number operator a†a.
pub fn fock_number(cutoff: usize) -> Result<CMat> {
    let mut n = CMat::zeros(cutoff, cutoff);
    if cutoff < 2 {
        return Err(Error::InvalidDimension(format!("fock cutoff {cutoff} < 2")));
    }
    for k in 0..cutoff {
        n[(k, k)] = C64::new(k as f64, 0.0);
    }
    Ok(n)
}

/// Fock basis state |n⟩.
pub fn basis_state(n: usize, cutoff: usize) -> CVec {
    let mut v = CVec::zeros(cutoff);
    v[n] = ONE;
    v
}

pub fn vacuum(cutoff: usize) -> CVec {
    basis_state(0, cutoff)
}

/// Smallest Fock cutoff for which a coherent state of amplitude α keeps
/// norm ≥ 1 − 1e-10 after truncation.
pub fn recommended_cutoff(alpha: C64) -> usize {
    let a = alpha.norm();
    (a * a + 7.0 * a + 10.0).ceil() as usize
}

/// A truncated state together with the norm it captured before
/// renormalization. `captured_norm` close to 1 means the cutoff was adequate.
#[derive(Clone, Debug)]
pub struct Truncated {
    pub vec: CVec,
    pub captured_norm: f64,
}

impl Truncated {
    pub fn is_converged(&self) -> bool {
        self.captured_norm >= 1.0 - 1e-10
    }
}

/// Truncated coherent state e^{−|α|²/2} Σ αⁿ/√n! |n⟩, renormalized.
pub fn coherent_state(alpha: C64, cutoff: usize) -> Result<Truncated> {
    if cutoff < 1 {
        return Err(Error::InvalidDimension("coherent state needs cutoff >= 1".into()));
    }
    let mut v = CVec::zeros(cutoff);
    let mut amp = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    v[0] = amp;
    for n in 1..cutoff {
        amp = amp * alpha / C64::new((n as f64).sqrt(), 0.0);
        v[n] = amp;
    }
    let captured = linalg::norm(&v);
    let mut vec = v;
    linalg::normalize(&mut vec);
    Ok(Truncated { vec, captured_norm: captured })
}

/// Even and odd cat states C± = N±(|α⟩ ± |−α⟩), each normalized after
/// truncation. N± = [2(1 ± e^{−2α²})]^{−1/2}.
pub fn cat_states(alpha: f64, cutoff: usize) -> Result<(CVec, CVec)> {
    if alpha <= 0.0 {
        return Err(Error::InvalidDimension("cat states need alpha > 0".into()));
    }
    let plus = coherent_state(C64::new(alpha, 0.0), cutoff)?.vec;
    let minus = coherent_state(C64::new(-alpha, 0.0), cutoff)?.vec;
    let mut even = CVec::zeros(cutoff);
    let mut odd = CVec::zeros(cutoff);
    for n in 0..cutoff {
        even[n] = plus[n] + minus[n];
        odd[n] = plus[n] - minus[n];
    }
    linalg::normalize(&mut even);
    linalg::normalize(&mut odd);
    Ok((even, odd))
}

/// Cat normalizer N± = [2(1 ± e^{−2α²})]^{−1/2}.
pub fn cat_normalizer(alpha: f64, even: bool) -> f64 {
    let u = (-2.0 * alpha * alpha).exp();
    let sign = if even { 1.0 } else { -1.0 };
    1.0 / (2.0 * (1.0 + sign * u)).sqrt()
}

/// Energy eigenbasis of one isolated KPO, truncated to the top of the
/// spectrum.
#[derive(Clone, Debug)]
pub struct KpoEigenBasis {
    /// fock_cutoff × keep_dim isometry from retained basis to Fock basis.
    pub transform: CMat,
    /// Retained eigenvalues (rad/s), descending; index 0 is the even cat.
    pub energies: Vec<f64>,
    /// Annihilation operator projected into the retained subspace (keep_dim²).
    pub a_proj: CMat,
    pub spec: ModeSpec,
}

/// Diagonalize −(K/2)a†²a² + (p/2)(a†² + a²) in a Fock space of dimension
/// `spec.fock_cutoff` and retain the `spec.keep_dim` highest eigenstates.
///
/// The cat manifold sits at the top of the spectrum; the retained states are
/// ordered by descending energy with the (near-degenerate) top pair ordered
/// even-parity first. Eigenvector phases are fixed so the largest-magnitude
/// Fock amplitude of each column is real positive.
///
/// For p > 0 the top pair is checked against span{|α⟩, |−α⟩}, α = √(p/K);
/// overlap below 1 − 1e-6 is a basis-quality error.
pub fn kpo_eigen_truncation(k: f64, p: f64, spec: &ModeSpec) -> Result<KpoEigenBasis> {
    if spec.kind != ModeKind::KpoEigen {
        return Err(Error::InvalidDimension("kpo_eigen_truncation needs a kpo-eigen mode spec".into()));
    }
    spec.validate()?;
    if k <= 0.0 || p < 0.0 {
        return Err(Error::InvalidDimension(format!("need K > 0 and p >= 0, got K={k}, p={p}")));
    }
    let n = spec.fock_cutoff;
    let keep = spec.keep_dim;
    let a = fock_annihilation(n)?;
    let h = kpo_hamiltonian(k, p, &a);
    let (vals, vecs) = linalg::eigh(&h);

    // top `keep` states, descending energy
    let mut transform = CMat::zeros(n, keep);
    let mut energies = Vec::with_capacity(keep);
    for j in 0..keep {
        let col = n - 1 - j;
        for i in 0..n {
            transform[(i, j)] = vecs[(i, col)];
        }
        energies.push(vals[col]);
    }

    // order the near-degenerate top pair even-parity first
    let parity = |col: usize, t: &CMat| -> f64 {
        (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 } * t[(i, col)].norm_sqr()).sum()
    };
    if parity(0, &transform) < parity(1, &transform) {
        for i in 0..n {
            let tmp = transform[(i, 0)];
            transform[(i, 0)] = transform[(i, 1)];
            transform[(i, 1)] = tmp;
        }
        energies.swap(0, 1);
    }

    // phase convention: largest-magnitude Fock amplitude real positive
    for j in 0..keep {
        let mut best = 0usize;
        let mut best_mag = 0.0;
        for i in 0..n {
            let m = transform[(i, j)].norm();
            if m > best_mag {
                best_mag = m;
                best = i;
            }
        }
        let ph = transform[(best, j)] / C64::new(best_mag, 0.0);
        let corr = ph.conj();
        for i in 0..n {
            transform[(i, j)] *= corr;
        }
    }

    // cat-span quality check
    if p > 0.0 {
        let alpha = (p / k).sqrt();
        let cp = coherent_state(C64::new(alpha, 0.0), n)?.vec;
        let cm = coherent_state(C64::new(-alpha, 0.0), n)?.vec;
        let fid = span_overlap(&transform, &cp, &cm);
        if fid < 1.0 - 1e-6 {
            return Err(Error::BasisQuality { fidelity: fid, required: 1.0 - 1e-6 });
        }
    }

    let tdag = dagger(&transform);
    let mut ta = CMat::zeros(keep, n);
    matmul_into(&mut ta, &tdag, &a);
    let mut a_proj = CMat::zeros(keep, keep);
    matmul_into(&mut a_proj, &ta, &transform);

    Ok(KpoEigenBasis { transform, energies, a_proj, spec: *spec })
}

/// −(K/2)a†²a² + (p/2)(a†² + a²) given the ladder operator.
pub fn kpo_hamiltonian(k: f64, p: f64, a: &CMat) -> CMat {
    let n = a.nrows();
    let ad = dagger(a);
    let mut a2 = CMat::zeros(n, n);
    matmul_into(&mut a2, a, a);
    let ad2 = dagger(&a2);
    let mut kerr = CMat::zeros(n, n);
    matmul_into(&mut kerr, &ad2, &a2);
    let mut h = CMat::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            h[(i, j)] = C64::new(-k / 2.0, 0.0) * kerr[(i, j)]
                + C64::new(p / 2.0, 0.0) * (ad2[(i, j)] + a2[(i, j)]);
        }
    }
    let _ = ad;
    h
}

/// Mean of the projections of the first two columns of `t` onto
/// span{v1, v2}.
fn span_overlap(t: &CMat, v1: &CVec, v2: &CVec) -> f64 {
    // orthonormalize {v1, v2}
    let mut q1 = v1.clone();
    linalg::normalize(&mut q1);
    let ov = linalg::vdot(&q1, v2);
    let mut q2 = CVec::zeros(v2.nrows());
    for i in 0..v2.nrows() {
        q2[i] = v2[i] - ov * q1[i];
    }
    linalg::normalize(&mut q2);
    let mut acc = 0.0;
    for col in 0..2 {
        let c = CVec::from_fn(t.nrows(), |i| t[(i, col)]);
        acc += linalg::vdot(&q1, &c).norm_sqr() + linalg::vdot(&q2, &c).norm_sqr();
    }
    acc / 2.0
}

/// Structural identity of a basis; operators and states carry it so mismatched
/// algebra is caught early.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BasisId(u64);

impl std::fmt::Display for BasisId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "basis#{:016x}", self.0)
    }
}

/// Tensor-product basis over the four modes (KPO1, KPO2, coupler1, coupler2).
#[derive(Clone, Debug)]
pub struct CompositeBasis {
    pub modes: Vec<ModeSpec>,
    /// Per-mode column-orthonormal fock_cutoff × keep_dim transforms.
    pub transforms: Vec<CMat>,
    dims: Vec<usize>,
    id: BasisId,
}

impl CompositeBasis {
    /// Standard layout: two identical KPO-eigen modes followed by two Fock
    /// coupler modes.
    pub fn standard(kpo: &KpoEigenBasis, coupler_dim: usize) -> Result<Self> {
        let cspec = ModeSpec::fock(coupler_dim);
        cspec.validate()?;
        let modes = vec![kpo.spec, kpo.spec, cspec, cspec];
        let transforms = vec![
            kpo.transform.clone(),
            kpo.transform.clone(),
            linalg::identity(coupler_dim),
            linalg::identity(coupler_dim),
        ];
        Self::new(modes, transforms)
    }

    pub fn new(modes: Vec<ModeSpec>, transforms: Vec<CMat>) -> Result<Self> {
        if modes.len() != transforms.len() || modes.is_empty() {
            return Err(Error::InvalidDimension("modes/transforms length mismatch".into()));
        }
        for (m, t) in modes.iter().zip(&transforms) {
            m.validate()?;
            if t.nrows() != m.fock_cutoff || t.ncols() != m.keep_dim {
                return Err(Error::InvalidDimension(format!(
                    "transform shape {}x{} does not match mode spec {}x{}",
                    t.nrows(),
                    t.ncols(),
                    m.fock_cutoff,
                    m.keep_dim
                )));
            }
        }
        let dims: Vec<usize> = modes.iter().map(|m| m.keep_dim).collect();
        let mut hash = 0xcbf29ce484222325u64;
        for m in &modes {
            for v in [m.kind as usize as u64, m.fock_cutoff as u64, m.keep_dim as u64] {
                hash ^= v.wrapping_add(1);
                hash = hash.wrapping_mul(0x100000001b3);
            }
        }
        Ok(CompositeBasis { modes, transforms, dims, id: BasisId(hash) })
    }

    pub fn id(&self) -> BasisId {
        self.id
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    /// T†T = identity for every per-mode transform, to `tol`.
    pub fn check_isometries(&self, tol: f64) -> Result<()> {
        for (s, t) in self.transforms.iter().enumerate() {
            let keep = t.ncols();
            let tdag = dagger(t);
            let mut prod = CMat::zeros(keep, keep);
            matmul_into(&mut prod, &tdag, t);
            for j in 0..keep {
                for i in 0..keep {
                    let expect = if i == j { ONE } else { ZERO };
                    if (prod[(i, j)] - expect).norm() > tol {
                        return Err(Error::BasisQuality {
                            fidelity: 1.0 - (prod[(i, j)] - expect).norm(),
                            required: 1.0 - tol,
                        });
                    }
                }
            }
            let _ = s;
        }
        Ok(())
    }
}

/// Dense complex operator tagged with the basis it lives on.
#[derive(Clone, Debug)]
pub struct Operator {
    pub mat: CMat,
    pub basis: BasisId,
}

impl Operator {
    pub fn new(mat: CMat, basis: BasisId) -> Self {
        Operator { mat, basis }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn expect_basis(&self, basis: &CompositeBasis) -> Result<()> {
        if self.basis != basis.id() {
            return Err(Error::BasisMismatch {
                expected: basis.id().to_string(),
                found: self.basis.to_string(),
            });
        }
        Ok(())
    }
}

/// identity ⊗ … ⊗ op ⊗ … ⊗ identity with `op` in mode `slot`.
pub fn embed(op: &CMat, slot: usize, basis: &CompositeBasis) -> Result<CMat> {
    let dims = basis.dims();
    if slot >= dims.len() {
        return Err(Error::InvalidDimension(format!("slot {slot} out of range")));
    }
    if op.nrows() != dims[slot] || op.ncols() != dims[slot] {
        return Err(Error::InvalidDimension(format!(
            "operator dim {} does not match slot {} keep_dim {}",
            op.nrows(),
            slot,
            dims[slot]
        )));
    }
    let pre: usize = dims[..slot].iter().product();
    let post: usize = dims[slot + 1..].iter().product();
    let mut out = kron(&linalg::identity(pre), op);
    out = kron(&out, &linalg::identity(post));
    Ok(out)
}

/// Index strides for one mode inside the composite space.
fn slot_strides(dims: &[usize], slot: usize) -> (usize, usize, usize) {
    let pre: usize = dims[..slot].iter().product();
    let d = dims[slot];
    let post: usize = dims[slot + 1..].iter().product();
    (pre, d, post)
}

/// out = (I ⊗ op ⊗ I) · v without forming the embedded matrix.
pub fn apply_mode_vec(out: &mut CVec, op: &CMat, slot: usize, dims: &[usize], v: &CVec) {
    let (pre, d, post) = slot_strides(dims, slot);
    for x in out.iter_mut() {
        *x = ZERO;
    }
    for a in 0..pre {
        for i in 0..d {
            for j in 0..d {
                let m = op[(i, j)];
                if m == ZERO {
                    continue;
                }
                let ro = (a * d + i) * post;
                let ri = (a * d + j) * post;
                for b in 0..post {
                    out[ro + b] += m * v[ri + b];
                }
            }
        }
    }
}

/// out = (I ⊗ op ⊗ I) · rho, column by column.
pub fn apply_mode_left(out: &mut CMat, op: &CMat, slot: usize, dims: &[usize], rho: &CMat) {
    let (pre, d, post) = slot_strides(dims, slot);
    let n = rho.nrows();
    for c in 0..rho.ncols() {
        for r in 0..n {
            out[(r, c)] = ZERO;
        }
        for a in 0..pre {
            for i in 0..d {
                for j in 0..d {
                    let m = op[(i, j)];
                    if m == ZERO {
                        continue;
                    }
                    let ro = (a * d + i) * post;
                    let ri = (a * d + j) * post;
                    for b in 0..post {
                        out[(ro + b, c)] += m * rho[(ri + b, c)];
                    }
                }
            }
        }
    }
}

/// out = rho · (I ⊗ op ⊗ I)†.
pub fn apply_mode_right_dag(out: &mut CMat, op: &CMat, slot: usize, dims: &[usize], rho: &CMat) {
    let (pre, d, post) = slot_strides(dims, slot);
    let n = rho.nrows();
    for c in 0..rho.ncols() {
        for r in 0..n {
            out[(r, c)] = ZERO;
        }
    }
    // out[:, (a,i,b)] = sum_j conj(op[i,j]) rho[:, (a,j,b)]
    for a in 0..pre {
        for i in 0..d {
            for j in 0..d {
                let m = op[(i, j)].conj();
                if m == ZERO {
                    continue;
                }
                let co = (a * d + i) * post;
                let ci = (a * d + j) * post;
                for b in 0..post {
                    for r in 0..n {
                        out[(r, co + b)] += m * rho[(r, ci + b)];
                    }
                }
            }
        }
    }
}

/// Reduced density matrix over the modes listed in `keep` (ascending order of
/// the original mode indices). The trace is preserved.
pub fn partial_trace(rho: &CMat, keep: &[usize], dims: &[usize]) -> Result<CMat> {
    if keep.is_empty() {
        return Err(Error::InvalidDimension("partial_trace needs a non-empty keep set".into()));
    }
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep_sorted.last().copied().unwrap_or(0) >= dims.len() {
        return Err(Error::InvalidDimension("keep index out of range".into()));
    }
    let n: usize = dims.iter().product();
    if rho.nrows() != n || rho.ncols() != n {
        return Err(Error::InvalidDimension("density matrix does not match dims".into()));
    }
    let out_dim: usize = keep_sorted.iter().map(|&s| dims[s]).product();
    let nm = dims.len();
    let mut out = CMat::zeros(out_dim, out_dim);

    let decompose = |mut idx: usize, tuple: &mut Vec<usize>| {
        tuple.clear();
        tuple.resize(nm, 0);
        for s in (0..nm).rev() {
            tuple[s] = idx % dims[s];
            idx /= dims[s];
        }
    };
    let keep_index = |tuple: &[usize]| -> usize {
        let mut out = 0usize;
        for &s in &keep_sorted {
            out = out * dims[s] + tuple[s];
        }
        out
    };

    let mut ti = Vec::new();
    let mut tj = Vec::new();
    for cj in 0..n {
        decompose(cj, &mut tj);
        for ci in 0..n {
            decompose(ci, &mut ti);
            let mut traced_match = true;
            for s in 0..nm {
                if !keep_sorted.contains(&s) && ti[s] != tj[s] {
                    traced_match = false;
                    break;
                }
            }
            if traced_match {
                let oi = keep_index(&ti);
                let oj = keep_index(&tj);
                out[(oi, oj)] += rho[(ci, cj)];
            }
        }
    }
    Ok(out)
}

/// Kronecker product of state vectors, in mode order.
pub fn kron_vecs(parts: &[&CVec]) -> CVec {
    let mut out = parts[0].clone();
    for p in &parts[1..] {
        let a = out;
        let mut next = CVec::zeros(a.nrows() * p.nrows());
        for i in 0..a.nrows() {
            for j in 0..p.nrows() {
                next[i * p.nrows() + j] = a[i] * p[j];
            }
        }
        out = next;
    }
    out
}

/// Validation for density matrices: Hermitian, unit trace, and positive
/// semidefinite within tolerances.
pub fn check_density(rho: &CMat, herm_tol: f64, trace_tol: f64, eig_floor: f64) -> Result<()> {
    if linalg::hermiticity_defect(rho) > herm_tol {
        return Err(Error::InvalidDimension("density matrix is not Hermitian".into()));
    }
    let tr = linalg::trace(rho);
    if (tr.re - 1.0).abs() > trace_tol || tr.im.abs() > trace_tol {
        return Err(Error::TraceDrift { trace: tr.re, t: f64::NAN, limit: trace_tol });
    }
    let (vals, _) = linalg::eigh(&linalg::hermitize(rho));
    if vals[0] < eig_floor {
        return Err(Error::InvalidDimension(format!(
            "density matrix has eigenvalue {} below floor {}",
            vals[0], eig_floor
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{expectation, norm, outer, vdot};
    use crate::TWO_PI;
    use approx::assert_abs_diff_eq;

    const K: f64 = TWO_PI * 20e6;
    const P: f64 = TWO_PI * 80e6;

    #[test]
    fn annihilation_ladder_identity() {
        let a = fock_annihilation(2).unwrap();
        let one = basis_state(1, 2);
        let mut out = CVec::zeros(2);
        linalg::matvec_into(&mut out, &a, &one);
        assert_abs_diff_eq!(out[0].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(out[1].norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn annihilation_matrix_element() {
        let a = fock_annihilation(3).unwrap();
        assert_abs_diff_eq!(a[(1, 2)].re, 2f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn number_operator_eigenvalues() {
        let cutoff = 7;
        let a = fock_annihilation(cutoff).unwrap();
        let ad = dagger(&a);
        let mut num = CMat::zeros(cutoff, cutoff);
        matmul_into(&mut num, &ad, &a);
        for n in 0..cutoff - 1 {
            let v = basis_state(n, cutoff);
            assert_abs_diff_eq!(expectation(&num, &v).re, n as f64, epsilon = 1e-13);
        }
    }

    #[test]
    fn annihilation_rejects_small_cutoff() {
        assert!(matches!(fock_annihilation(1), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn coherent_vacuum_limit() {
        let c = coherent_state(C64::new(0.0, 0.0), 10).unwrap();
        assert_abs_diff_eq!(c.vec[0].re, 1.0, epsilon = 1e-15);
        assert!(c.is_converged());
    }

    #[test]
    fn coherent_overlap_formula() {
        // |<alpha|-alpha>| = e^{-2 alpha^2} for alpha = 2
        let cutoff = recommended_cutoff(C64::new(2.0, 0.0));
        let cp = coherent_state(C64::new(2.0, 0.0), cutoff).unwrap().vec;
        let cm = coherent_state(C64::new(-2.0, 0.0), cutoff).unwrap().vec;
        let ov = vdot(&cp, &cm).norm();
        assert_abs_diff_eq!(ov, (-8.0f64).exp(), epsilon = 1e-9);
        assert_abs_diff_eq!(ov, 3.3546e-4, epsilon = 1e-7);
    }

    #[test]
    fn coherent_photon_number() {
        let cp = coherent_state(C64::new(2.0, 0.0), 30).unwrap();
        let a = fock_annihilation(30).unwrap();
        let ad = dagger(&a);
        let mut num = CMat::zeros(30, 30);
        matmul_into(&mut num, &ad, &a);
        assert_abs_diff_eq!(expectation(&num, &cp.vec).re, 4.0, epsilon = 1e-8);
    }

    #[test]
    fn coherent_norm_converged_up_to_2p5() {
        for alpha in [0.5, 1.0, 1.7, 2.0, 2.5] {
            let cutoff = recommended_cutoff(C64::new(alpha, 0.0));
            let c = coherent_state(C64::new(alpha, 0.0), cutoff).unwrap();
            assert!(
                c.captured_norm >= 1.0 - 1e-10,
                "alpha={alpha}: captured {}",
                c.captured_norm
            );
        }
    }

    #[test]
    fn cat_states_normalizer_and_orthogonality() {
        let (even, odd) = cat_states(2.0, 30).unwrap();
        // N+ = [2(1+e^{-8})]^{-1/2} ~ 0.70699
        assert_abs_diff_eq!(cat_normalizer(2.0, true), 0.706989, epsilon = 1e-6);
        assert_abs_diff_eq!(vdot(&even, &odd).norm(), 0.0, epsilon = 1e-12);
        // parity expectation on the even cat
        let mut par = CMat::zeros(30, 30);
        for n in 0..30 {
            par[(n, n)] = C64::new(if n % 2 == 0 { 1.0 } else { -1.0 }, 0.0);
        }
        assert_abs_diff_eq!(expectation(&par, &even).re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(norm(&even), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn kpo_truncation_top_pair_is_cat_manifold() {
        let spec = ModeSpec::kpo_eigen(30, 6);
        let kpo = kpo_eigen_truncation(K, P, &spec).unwrap();
        // top pair degenerate at the K e^{-2 a^2} O(a^4) scale
        let split = (kpo.energies[0] - kpo.energies[1]).abs();
        assert!(split < K * (-8.0f64).exp() * 16.0, "splitting {split}");
        // eigenvalue of the top pair is K alpha^4 / 2
        assert_abs_diff_eq!(kpo.energies[0] / (K * 8.0), 1.0, epsilon = 1e-9);
        // even state first
        let t = &kpo.transform;
        let parity: f64 =
            (0..30).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 } * t[(i, 0)].norm_sqr()).sum();
        assert!(parity > 0.99);
    }

    #[test]
    fn kpo_truncation_projected_a_matches_two_level_form() {
        // <C-|a|C+> = r alpha and <C+|a|C-> = alpha / r with r = N+/N-
        let spec = ModeSpec::kpo_eigen(30, 6);
        let kpo = kpo_eigen_truncation(K, P, &spec).unwrap();
        let alpha = 2.0;
        let (even, odd) = cat_states(alpha, 30).unwrap();
        let tdag = dagger(&kpo.transform);
        let mut even_r = CVec::zeros(6);
        let mut odd_r = CVec::zeros(6);
        linalg::matvec_into(&mut even_r, &tdag, &even);
        linalg::matvec_into(&mut odd_r, &tdag, &odd);
        let r = cat_normalizer(alpha, true) / cat_normalizer(alpha, false);
        let mut tmp = CVec::zeros(6);
        linalg::matvec_into(&mut tmp, &kpo.a_proj, &even_r);
        assert_abs_diff_eq!(vdot(&odd_r, &tmp).norm(), r * alpha, epsilon = 1e-6);
        linalg::matvec_into(&mut tmp, &kpo.a_proj, &odd_r);
        assert_abs_diff_eq!(vdot(&even_r, &tmp).norm(), alpha / r, epsilon = 1e-6);
    }

    #[test]
    fn kpo_truncation_p_zero_keeps_lowest_fock_pair() {
        let spec = ModeSpec::kpo_eigen(12, 2);
        let kpo = kpo_eigen_truncation(K, 0.0, &spec).unwrap();
        // eigenvalues -(K/2) n (n-1) are maximal (0) at n = 0, 1
        assert_abs_diff_eq!(kpo.energies[0], 0.0, epsilon = K * 1e-12);
        assert_abs_diff_eq!(kpo.energies[1], 0.0, epsilon = K * 1e-12);
        // vacuum (even) first, |1> second
        assert_abs_diff_eq!(kpo.transform[(0, 0)].re, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(kpo.transform[(1, 1)].re, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn kpo_truncation_full_keep_reproduces_a() {
        let spec = ModeSpec::kpo_eigen(10, 10);
        let kpo = kpo_eigen_truncation(K, P, &spec).unwrap();
        let a = fock_annihilation(10).unwrap();
        // T is unitary here; T (T† a T) T† == a
        let mut tmp = CMat::zeros(10, 10);
        matmul_into(&mut tmp, &kpo.transform, &kpo.a_proj);
        let mut rec = CMat::zeros(10, 10);
        matmul_into(&mut rec, &tmp, &dagger(&kpo.transform));
        for j in 0..10 {
            for i in 0..10 {
                assert!((rec[(i, j)] - a[(i, j)]).norm() < 1e-10);
            }
        }
    }

    fn small_basis() -> (KpoEigenBasis, CompositeBasis) {
        let spec = ModeSpec::kpo_eigen(20, 4);
        let kpo = kpo_eigen_truncation(K, P, &spec).unwrap();
        let basis = CompositeBasis::standard(&kpo, 3).unwrap();
        (kpo, basis)
    }

    #[test]
    fn embed_identity_and_commutation() {
        let (_, basis) = small_basis();
        let n = basis.total_dim();
        let id_kpo = linalg::identity(4);
        let full = embed(&id_kpo, 0, &basis).unwrap();
        for i in 0..n {
            assert_abs_diff_eq!(full[(i, i)].re, 1.0, epsilon = 1e-15);
        }
        // operators on different slots commute
        let (kpo, _) = small_basis();
        let a1 = embed(&kpo.a_proj, 0, &basis).unwrap();
        let c2 = embed(&fock_annihilation(3).unwrap(), 3, &basis).unwrap();
        let mut ab = CMat::zeros(n, n);
        let mut ba = CMat::zeros(n, n);
        matmul_into(&mut ab, &a1, &c2);
        matmul_into(&mut ba, &c2, &a1);
        for j in 0..n {
            for i in 0..n {
                assert!((ab[(i, j)] - ba[(i, j)]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn embed_rejects_dim_mismatch() {
        let (_, basis) = small_basis();
        let wrong = linalg::identity(5);
        assert!(embed(&wrong, 0, &basis).is_err());
    }

    #[test]
    fn embedded_number_expectation_on_coherent_product() {
        // trace(embed(a†a, KPO1) rho) = alpha^2 on |alpha> x vac x vac x vac
        let spec = ModeSpec::kpo_eigen(30, 6);
        let kpo = kpo_eigen_truncation(K, P, &spec).unwrap();
        let basis = CompositeBasis::standard(&kpo, 3).unwrap();
        let cp = coherent_state(C64::new(2.0, 0.0), 30).unwrap().vec;
        let tdag = dagger(&kpo.transform);
        let mut cp_r = CVec::zeros(6);
        linalg::matvec_into(&mut cp_r, &tdag, &cp);
        linalg::normalize(&mut cp_r);
        let kpo2_vac = {
            // lowest retained level of the *other* KPO is its even cat; use
            // the retained projection of the Fock vacuum for a product state
            let v = vacuum(30);
            let mut r = CVec::zeros(6);
            linalg::matvec_into(&mut r, &tdag, &v);
            linalg::normalize(&mut r);
            r
        };
        let psi = kron_vecs(&[&cp_r, &kpo2_vac, &vacuum(3), &vacuum(3)]);
        let mut num = CMat::zeros(6, 6);
        matmul_into(&mut num, &dagger(&kpo.a_proj), &kpo.a_proj);
        let full = embed(&num, 0, &basis).unwrap();
        assert_abs_diff_eq!(expectation(&full, &psi).re, 4.0, epsilon = 2e-6);
    }

    #[test]
    fn mode_apply_matches_embed() {
        let (kpo, basis) = small_basis();
        let n = basis.total_dim();
        let dims = basis.dims();
        let full = embed(&kpo.a_proj, 1, &basis).unwrap();
        let v = CVec::from_fn(n, |i| C64::new((i % 7) as f64 - 3.0, (i % 5) as f64));
        let mut out1 = CVec::zeros(n);
        linalg::matvec_into(&mut out1, &full, &v);
        let mut out2 = CVec::zeros(n);
        apply_mode_vec(&mut out2, &kpo.a_proj, 1, dims, &v);
        for i in 0..n {
            assert!((out1[i] - out2[i]).norm() < 1e-12);
        }
        // matrix left/right application
        let rho = CMat::from_fn(n, n, |i, j| C64::new((i * j % 5) as f64, (i + j) as f64 * 0.1));
        let mut l1 = CMat::zeros(n, n);
        matmul_into(&mut l1, &full, &rho);
        let mut l2 = CMat::zeros(n, n);
        apply_mode_left(&mut l2, &kpo.a_proj, 1, dims, &rho);
        let mut r1 = CMat::zeros(n, n);
        matmul_into(&mut r1, &rho, &dagger(&full));
        let mut r2 = CMat::zeros(n, n);
        apply_mode_right_dag(&mut r2, &kpo.a_proj, 1, dims, &rho);
        for j in 0..n {
            for i in 0..n {
                assert!((l1[(i, j)] - l2[(i, j)]).norm() < 1e-12);
                assert!((r1[(i, j)] - r2[(i, j)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn partial_trace_recovers_product_factor() {
        let dims = [2usize, 3, 2];
        let v1 = CVec::from_fn(2, |i| C64::new(1.0 + i as f64, 0.3));
        let v2 = CVec::from_fn(3, |i| C64::new(0.5, i as f64 - 1.0));
        let v3 = CVec::from_fn(2, |i| C64::new(-(i as f64), 0.7));
        let mut parts = [v1.clone(), v2.clone(), v3.clone()];
        for p in &mut parts {
            linalg::normalize(p);
        }
        let psi = kron_vecs(&[&parts[0], &parts[1], &parts[2]]);
        let rho = outer(&psi, &psi);
        let red = partial_trace(&rho, &[1], &dims).unwrap();
        let expect = outer(&parts[1], &parts[1]);
        for j in 0..3 {
            for i in 0..3 {
                assert!((red[(i, j)] - expect[(i, j)]).norm() < 1e-13);
            }
        }
        assert_abs_diff_eq!(linalg::trace(&red).re, 1.0, epsilon = 1e-13);
    }

    #[test]
    fn partial_trace_bell_pair_is_maximally_mixed() {
        let dims = [2usize, 2];
        let mut psi = CVec::zeros(4);
        psi[0] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        psi[3] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let rho = outer(&psi, &psi);
        let red = partial_trace(&rho, &[0], &dims).unwrap();
        assert_abs_diff_eq!(red[(0, 0)].re, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(red[(1, 1)].re, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(red[(0, 1)].norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn partial_trace_rejects_empty_keep() {
        let rho = linalg::identity(4);
        assert!(partial_trace(&rho, &[], &[2, 2]).is_err());
    }

    #[test]
    fn isometry_check_passes_for_standard_basis() {
        let (_, basis) = small_basis();
        basis.check_isometries(1e-12).unwrap();
        assert_eq!(basis.total_dim(), 4 * 4 * 3 * 3);
    }
}
