//! Rotating-frame Hamiltonians of the two-KPO / two-coupler system, for both
//! circuit variants, plus the conditioned-coupler analysis behind the
//! detuning cancellation condition.
//!
//! Variant I (inductive cross-links):
//!   H/ħ = Σ_j [−(K/2)a_j†²a_j² + (p/2)(a_j†² + a_j²)]
//!       + Σ_k [−(χ_k/2)c_k†²c_k² + Δ_k c_k†c_k]
//!       + Σ_{j,k} g_{j,k} (a_j c_k† + a_j† c_k)
//!
//! Variant II (all-capacitive) adds direct exchange terms
//!   g_kpo (a_1 a_2† + h.c.) + g_c (c_1 c_2† + h.c.)
//! and allows g_1 ≠ g_2.
//!
//! Projecting H onto a fixed logical configuration |ī, j̄⟩ of the Kerr-cat
//! qubits leaves effective coupler Hamiltonians: displaced oscillators for
//! equal parity, bare oscillators otherwise. Equal conditioned energies for
//! the two parity classes is the residual-ZZ cancellation condition; for
//! variant I it reduces to Δ_1 = −Δ_2.
//!
//! All coefficients are angular frequencies (rad/s).

use crate::hilbert::{embed, fock_annihilation, kpo_hamiltonian, CompositeBasis, KpoEigenBasis, ModeKind, Operator};
use crate::linalg::{self, dagger, matmul_into, CMat, CVec, C64, ONE};
use crate::{Error, Result};

/// Effective parameters of circuit variant I (rad/s).
#[derive(Clone, Copy, Debug)]
pub struct SystemParams {
    /// KPO Kerr nonlinearity K > 0.
    pub k: f64,
    /// Two-photon drive amplitude p > 0.
    pub p: f64,
    /// Coupler Kerr nonlinearities χ_k.
    pub chi: [f64; 2],
    /// Couplings g_{j,k}, row = KPO index, column = coupler index.
    pub g: [[f64; 2]; 2],
    /// Single-photon loss rate κ (same for all four modes).
    pub kappa: f64,
    /// Fixed coupler-2 detuning Δ_2.
    pub delta2: f64,
}

impl SystemParams {
    /// Reference parameter set: K/2π = 20 MHz, p/2π = 80 MHz (α = 2),
    /// χ/2π = 10 MHz, g/2π = 10 MHz, α_c^min = 0.04, κ = 0.
    pub fn reference() -> Self {
        let two_pi = crate::TWO_PI;
        let g = two_pi * 10e6;
        let k = two_pi * 20e6;
        let p = two_pi * 80e6;
        let alpha = (p / k).sqrt();
        SystemParams {
            k,
            p,
            chi: [two_pi * 10e6; 2],
            g: [[g; 2]; 2],
            kappa: 0.0,
            delta2: -2.0 * g * alpha / 0.04,
        }
    }

    /// Reference set with κ/2π = 20 kHz.
    pub fn reference_with_loss() -> Self {
        let mut p = Self::reference();
        p.kappa = crate::TWO_PI * 20e3;
        p
    }

    /// Cat amplitude α = √(p/K).
    pub fn alpha(&self) -> f64 {
        (self.p / self.k).sqrt()
    }

    /// The uniform coupling assumed by the conditioned-coupler analysis.
    pub fn g_uniform(&self) -> f64 {
        self.g[0][0]
    }

    pub fn validate(&self) -> Result<()> {
        if self.k <= 0.0 || self.p <= 0.0 {
            return Err(Error::InvalidDimension(format!(
                "need K > 0 and p > 0 (got K = {}, p = {})",
                self.k, self.p
            )));
        }
        if self.kappa < 0.0 {
            return Err(Error::InvalidDimension("kappa must be >= 0".into()));
        }
        Ok(())
    }
}

/// Effective parameters of circuit variant II (rad/s), evaluated at a fixed
/// coupler-1 flux bias.
#[derive(Clone, Copy, Debug)]
pub struct SystemParamsII {
    pub k: f64,
    pub p: f64,
    pub chi: [f64; 2],
    /// Detunings Δ̃_k at the evaluation bias.
    pub delta: [f64; 2],
    /// KPO–coupler couplings g_k (each coupler couples to both KPOs equally).
    pub g: [f64; 2],
    /// Direct KPO1–KPO2 exchange.
    pub g_kpo: f64,
    /// Direct coupler1–coupler2 exchange.
    pub g_c: f64,
    pub kappa: f64,
}

impl SystemParamsII {
    pub fn alpha(&self) -> f64 {
        (self.p / self.k).sqrt()
    }
}

/// Hamiltonian split into the Δ_1-independent part and the coupler-1 number
/// operator, so H(t) = h_static + Δ_1(t) · diag(n_c1).
#[derive(Clone, Debug)]
pub struct HamiltonianParts {
    pub h_static: CMat,
    /// Diagonal of the embedded coupler-1 number operator.
    pub n_c1_diag: Vec<f64>,
    pub basis_id: crate::hilbert::BasisId,
}

impl HamiltonianParts {
    /// Dense H at a given Δ_1.
    pub fn at(&self, delta1: f64) -> CMat {
        let n = self.h_static.nrows();
        let mut h = self.h_static.clone();
        for i in 0..n {
            h[(i, i)] += C64::new(delta1 * self.n_c1_diag[i], 0.0);
        }
        h
    }

    /// out = H(delta1) · psi without forming H.
    pub fn apply(&self, delta1: f64, psi: &CVec, out: &mut CVec) {
        linalg::matvec_into(out, &self.h_static, psi);
        for i in 0..out.nrows() {
            out[i] += C64::new(delta1 * self.n_c1_diag[i], 0.0) * psi[i];
        }
    }
}

/// Single-mode operator set for one coupler of Fock dimension d.
struct CouplerOps {
    a: CMat,
    num: CMat,
    kerr: CMat,
}

fn coupler_ops(dim: usize) -> Result<CouplerOps> {
    let a = fock_annihilation(dim)?;
    let ad = dagger(&a);
    let mut num = CMat::zeros(dim, dim);
    matmul_into(&mut num, &ad, &a);
    let mut a2 = CMat::zeros(dim, dim);
    matmul_into(&mut a2, &a, &a);
    let mut kerr = CMat::zeros(dim, dim);
    matmul_into(&mut kerr, &dagger(&a2), &a2);
    Ok(CouplerOps { a, num, kerr })
}

/// KPO Hamiltonian and ladder operator projected into a mode's retained basis.
fn kpo_mode_ops(k: f64, p: f64, basis: &CompositeBasis, slot: usize) -> Result<(CMat, CMat)> {
    let spec = &basis.modes[slot];
    let t = &basis.transforms[slot];
    let a_full = fock_annihilation(spec.fock_cutoff)?;
    let h_full = kpo_hamiltonian(k, p, &a_full);
    let tdag = dagger(t);
    let keep = spec.keep_dim;
    let nf = spec.fock_cutoff;
    let mut tmp = CMat::zeros(keep, nf);
    matmul_into(&mut tmp, &tdag, &h_full);
    let mut h_proj = CMat::zeros(keep, keep);
    matmul_into(&mut h_proj, &tmp, t);
    matmul_into(&mut tmp, &tdag, &a_full);
    let mut a_proj = CMat::zeros(keep, keep);
    matmul_into(&mut a_proj, &tmp, t);
    Ok((h_proj, a_proj))
}

fn add_scaled(dst: &mut CMat, src: &CMat, scale: f64) {
    let s = C64::new(scale, 0.0);
    for j in 0..src.ncols() {
        for i in 0..src.nrows() {
            dst[(i, j)] += s * src[(i, j)];
        }
    }
}

/// Exchange term g (x y† + x† y) into dst, given embedded x and y.
fn add_exchange(dst: &mut CMat, g: f64, x: &CMat, y: &CMat) {
    let n = dst.nrows();
    let mut tmp = CMat::zeros(n, n);
    matmul_into(&mut tmp, x, &dagger(y));
    let s = C64::new(g, 0.0);
    for j in 0..n {
        for i in 0..n {
            let v = s * tmp[(i, j)];
            dst[(i, j)] += v;
            dst[(j, i)] += v.conj();
        }
    }
}

fn expect_four_modes(basis: &CompositeBasis) -> Result<()> {
    if basis.n_modes() != 4
        || basis.modes[2].kind != ModeKind::Fock
        || basis.modes[3].kind != ModeKind::Fock
    {
        return Err(Error::InvalidDimension(
            "expected a 4-mode basis (KPO1, KPO2, coupler1, coupler2) with Fock couplers".into(),
        ));
    }
    Ok(())
}

/// Static + Δ_1-drive split of the variant-I Hamiltonian. Δ_2 is fixed at
/// `params.delta2`.
pub fn h_parts_main(params: &SystemParams, basis: &CompositeBasis) -> Result<HamiltonianParts> {
    params.validate()?;
    expect_four_modes(basis)?;
    let n = basis.total_dim();
    let mut h = CMat::zeros(n, n);

    let mut kpo_embedded_a = Vec::with_capacity(2);
    for slot in 0..2 {
        let (h_proj, a_proj) = kpo_mode_ops(params.k, params.p, basis, slot)?;
        let h_emb = embed(&h_proj, slot, basis)?;
        add_scaled(&mut h, &h_emb, 1.0);
        kpo_embedded_a.push(embed(&a_proj, slot, basis)?);
    }

    let mut coupler_embedded_a = Vec::with_capacity(2);
    let mut n_c1_diag = vec![0.0; n];
    for kc in 0..2 {
        let slot = 2 + kc;
        let ops = coupler_ops(basis.dims()[slot])?;
        let kerr_emb = embed(&ops.kerr, slot, basis)?;
        add_scaled(&mut h, &kerr_emb, -params.chi[kc] / 2.0);
        let num_emb = embed(&ops.num, slot, basis)?;
        if kc == 0 {
            for i in 0..n {
                n_c1_diag[i] = num_emb[(i, i)].re;
            }
        } else {
            add_scaled(&mut h, &num_emb, params.delta2);
        }
        coupler_embedded_a.push(embed(&ops.a, slot, basis)?);
    }

    for j in 0..2 {
        for kc in 0..2 {
            add_exchange(&mut h, params.g[j][kc], &kpo_embedded_a[j], &coupler_embedded_a[kc]);
        }
    }

    Ok(HamiltonianParts { h_static: h, n_c1_diag, basis_id: basis.id() })
}

/// Full variant-I Hamiltonian at a given Δ_1.
pub fn build_h_main(params: &SystemParams, delta1: f64, basis: &CompositeBasis) -> Result<Operator> {
    let parts = h_parts_main(params, basis)?;
    Ok(Operator::new(parts.at(delta1), basis.id()))
}

/// Static + Δ̃_1-drive split of the variant-II Hamiltonian. `params.delta[1]`
/// is the fixed Δ̃_2; the Δ̃_1 value in `params.delta[0]` is ignored here and
/// supplied per call.
pub fn h_parts_circuit2(params: &SystemParamsII, basis: &CompositeBasis) -> Result<HamiltonianParts> {
    expect_four_modes(basis)?;
    let n = basis.total_dim();
    let mut h = CMat::zeros(n, n);

    let mut kpo_embedded_a = Vec::with_capacity(2);
    for slot in 0..2 {
        let (h_proj, a_proj) = kpo_mode_ops(params.k, params.p, basis, slot)?;
        let h_emb = embed(&h_proj, slot, basis)?;
        add_scaled(&mut h, &h_emb, 1.0);
        kpo_embedded_a.push(embed(&a_proj, slot, basis)?);
    }

    let mut coupler_embedded_a = Vec::with_capacity(2);
    let mut n_c1_diag = vec![0.0; n];
    for kc in 0..2 {
        let slot = 2 + kc;
        let ops = coupler_ops(basis.dims()[slot])?;
        let kerr_emb = embed(&ops.kerr, slot, basis)?;
        add_scaled(&mut h, &kerr_emb, -params.chi[kc] / 2.0);
        let num_emb = embed(&ops.num, slot, basis)?;
        if kc == 0 {
            for i in 0..n {
                n_c1_diag[i] = num_emb[(i, i)].re;
            }
        } else {
            add_scaled(&mut h, &num_emb, params.delta[1]);
        }
        coupler_embedded_a.push(embed(&ops.a, slot, basis)?);
    }

    for j in 0..2 {
        for kc in 0..2 {
            add_exchange(&mut h, params.g[kc], &kpo_embedded_a[j], &coupler_embedded_a[kc]);
        }
    }
    add_exchange(&mut h, params.g_kpo, &kpo_embedded_a[0], &kpo_embedded_a[1]);
    add_exchange(&mut h, params.g_c, &coupler_embedded_a[0], &coupler_embedded_a[1]);

    Ok(HamiltonianParts { h_static: h, n_c1_diag, basis_id: basis.id() })
}

/// Full variant-II Hamiltonian at a given Δ̃_1.
pub fn build_h_circuit2(
    params: &SystemParamsII,
    delta1: f64,
    basis: &CompositeBasis,
) -> Result<Operator> {
    let parts = h_parts_circuit2(params, basis)?;
    Ok(Operator::new(parts.at(delta1), basis.id()))
}

/// Which logical configuration the couplers are conditioned on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CouplerParity {
    /// |0̄,0̄⟩ or |1̄,1̄⟩; couplers see displaced oscillators.
    Same,
    /// |0̄,1̄⟩ or |1̄,0̄⟩; couplers stay bare.
    Different,
}

/// Conditioned displacement α_k = 2gα/Δ_k.
pub fn coupler_displacement(params: &SystemParams, delta_k: f64) -> Result<f64> {
    if delta_k == 0.0 {
        return Err(Error::SingularDetuning);
    }
    Ok(2.0 * params.g_uniform() * params.alpha() / delta_k)
}

/// Conditioned-coupler energy for equal qubit parity (displaced vacuum),
/// −2gα(α_1 + α_2) + Kα⁴, valid when the coupler Kerr terms are negligible.
pub fn conditioned_energy_same(params: &SystemParams, delta1: f64) -> Result<f64> {
    let a1 = coupler_displacement(params, delta1)?;
    let a2 = coupler_displacement(params, params.delta2)?;
    let ga = params.g_uniform() * params.alpha();
    Ok(-2.0 * ga * (a1 + a2) + params.k * params.alpha().powi(4))
}

/// Conditioned-coupler energy for opposite qubit parity (bare vacuum), Kα⁴.
pub fn conditioned_energy_diff(params: &SystemParams) -> f64 {
    params.k * params.alpha().powi(4)
}

/// Effective coupler Hamiltonian conditioned on the logical configuration
/// (i, j), on the coupler1 ⊗ coupler2 Fock space of dimension `cdim` each.
pub fn conditioned_coupler_hamiltonian(
    params: &SystemParams,
    delta1: f64,
    qubit_labels: (u8, u8),
    cdim: usize,
) -> Result<CMat> {
    let (i, j) = qubit_labels;
    if i > 1 || j > 1 {
        return Err(Error::InvalidDimension("qubit labels must be 0 or 1".into()));
    }
    let deltas = [delta1, params.delta2];
    let ops = coupler_ops(cdim)?;
    let id = linalg::identity(cdim);
    let n = cdim * cdim;
    let mut h = CMat::zeros(n, n);
    let ga = params.g_uniform() * params.alpha();
    let alpha4 = params.alpha().powi(4);

    for kc in 0..2 {
        let kerr2 = if kc == 0 {
            linalg::kron(&ops.kerr, &id)
        } else {
            linalg::kron(&id, &ops.kerr)
        };
        add_scaled(&mut h, &kerr2, -params.chi[kc] / 2.0);

        if i == j {
            // Δ_k (c† + s α_k)(c + s α_k) − 2gα α_k, s = (−1)^i
            let alpha_k = coupler_displacement(params, deltas[kc])?;
            let s = if i == 0 { 1.0 } else { -1.0 };
            let mut shifted = ops.a.clone();
            for d in 0..cdim {
                shifted[(d, d)] += C64::new(s * alpha_k, 0.0);
            }
            let mut disp = CMat::zeros(cdim, cdim);
            matmul_into(&mut disp, &dagger(&shifted), &shifted);
            let disp2 =
                if kc == 0 { linalg::kron(&disp, &id) } else { linalg::kron(&id, &disp) };
            add_scaled(&mut h, &disp2, deltas[kc]);
            let offset = -2.0 * ga * alpha_k;
            for d in 0..n {
                h[(d, d)] += C64::new(offset, 0.0);
            }
        } else {
            let num2 =
                if kc == 0 { linalg::kron(&ops.num, &id) } else { linalg::kron(&id, &ops.num) };
            add_scaled(&mut h, &num2, deltas[kc]);
        }
    }
    for d in 0..n {
        h[(d, d)] += C64::new(params.k * alpha4, 0.0);
    }
    Ok(h)
}

/// Report for the smallness condition χ|α_k|³ ≪ gα on the neglected coupler
/// Kerr shift. The ratio compares the Kerr energy (χ/2)α_k⁴ against the
/// displacement energy 2gα·α_k.
#[derive(Clone, Copy, Debug)]
pub struct ChiReport {
    pub ratios: [f64; 2],
    pub pass: bool,
}

pub const CHI_RATIO_THRESHOLD: f64 = 0.05;

pub fn check_small_chi(params: &SystemParams, delta1: f64) -> Result<ChiReport> {
    let deltas = [delta1, params.delta2];
    let ga = params.g_uniform() * params.alpha();
    let mut ratios = [0.0; 2];
    for kc in 0..2 {
        let alpha_k = coupler_displacement(params, deltas[kc])?;
        ratios[kc] = params.chi[kc] * alpha_k.abs().powi(3) / (2.0 * ga);
    }
    let pass = ratios.iter().all(|r| *r < CHI_RATIO_THRESHOLD);
    Ok(ChiReport { ratios, pass })
}

/// Conditioned energies of the variant-II couplers for the two parity
/// classes, (E_same, E_diff)/ħ.
pub fn conditioned_energies_model2(params: &SystemParamsII, delta1: f64) -> Result<(f64, f64)> {
    let d2 = params.delta[1];
    let den = delta1 * d2 - params.g_c * params.g_c;
    if den == 0.0 {
        return Err(Error::SingularDetuning);
    }
    let a2 = params.alpha() * params.alpha();
    let a4 = a2 * a2;
    let g1 = params.g[0];
    let g2 = params.g[1];
    let e_same = 2.0 * params.g_kpo * a2 + params.k * a4
        - 4.0 * a2 * (g1 * g1 * d2 + g2 * g2 * delta1 - 2.0 * g1 * g2 * params.g_c) / den;
    let e_diff = -2.0 * params.g_kpo * a2 + params.k * a4;
    Ok((e_same, e_diff))
}

/// Δ̃_1 that equalizes the two conditioned energies of variant II:
/// Δ̃_1 = (g_1²Δ̃_2 + g_kpo g_c² − 2 g_1 g_2 g_c) / (g_kpo Δ̃_2 − g_2²).
pub fn detuning_condition_model2(params: &SystemParamsII) -> Result<f64> {
    let d2 = params.delta[1];
    let g1 = params.g[0];
    let g2 = params.g[1];
    let den = params.g_kpo * d2 - g2 * g2;
    let scale = (params.g_kpo * d2).abs().max(g2 * g2);
    if den.abs() <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::SingularCondition);
    }
    Ok((g1 * g1 * d2 + params.g_kpo * params.g_c * params.g_c - 2.0 * g1 * g2 * params.g_c) / den)
}

/// Effective drive on the KPOs conditioned by the coupler state, in a KPO1 ⊗
/// KPO2 retained basis. For equal parity the couplers' displaced state feeds
/// back a linear drive (−1)^{i+1} g(α_1 + α_2) Σ_j (a_j + a_j†); the value
/// returned is the i = 0 representative. For opposite parity the conditioned
/// drive vanishes identically.
pub fn conditioned_drive_on_kpos(
    params: &SystemParams,
    delta1: f64,
    parity: CouplerParity,
    kpo: &KpoEigenBasis,
) -> Result<CMat> {
    let keep = kpo.spec.keep_dim;
    let n = keep * keep;
    let mut h = CMat::zeros(n, n);
    if parity == CouplerParity::Different {
        return Ok(h);
    }
    let a1 = coupler_displacement(params, delta1)?;
    let a2 = coupler_displacement(params, params.delta2)?;
    let coeff = -params.g_uniform() * (a1 + a2); // i = 0 ⇒ (−1)^{i+1} = −1
    let id = linalg::identity(keep);
    let mut x = kpo.a_proj.clone();
    let adag = dagger(&kpo.a_proj);
    for jc in 0..keep {
        for ic in 0..keep {
            x[(ic, jc)] += adag[(ic, jc)];
        }
    }
    let sum = {
        let mut s = linalg::kron(&x, &id);
        let s2 = linalg::kron(&id, &x);
        for jc in 0..n {
            for ic in 0..n {
                s[(ic, jc)] += s2[(ic, jc)];
            }
        }
        s
    };
    add_scaled(&mut h, &sum, coeff);
    Ok(h)
}
