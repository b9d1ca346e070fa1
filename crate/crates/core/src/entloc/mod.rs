//! Entanglement localization by local interaction, the induced channel on AB, and
//! robustness of coherence-order states under gradient dephasing.

mod robustness;

pub use robustness::{
    delocalize, delocalized_state, dephasing_robustness, localized_states, CoherenceOrderState, DephasingModel, Nucleus,
    RobustnessResult,
};

use crate::error::{Error, Result};
use crate::qcore::{
    c, entanglement_measure, identity, kron_all, ket, mutual_information, projector, quantum_discord,
    unitary_from_hamiltonian, CMatrix, CVector, DensityOperator, EntanglementMethod, SpinOperatorSet,
    SubsystemLayout, C64,
};
use rand::Rng;
use std::f64::consts::{LN_2, PI};

/// Weyl-Heisenberg shift and clock operators in dimension d.
#[derive(Debug, Clone, PartialEq)]
pub struct WeylPair {
    pub d: usize,
    pub x: CMatrix,
    pub z: CMatrix,
}

impl WeylPair {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidArgument(format!("dimension must be >= 2, got {d}")));
        }
        let mut x = CMatrix::zeros(d, d);
        let mut z = CMatrix::zeros(d, d);
        for j in 0..d {
            x[((j + 1) % d, j)] = c(1.0, 0.0);
            z[(j, j)] = C64::from_polar(1.0, 2.0 * PI * j as f64 / d as f64);
        }
        Ok(Self { d, x, z })
    }

    /// Z^n X^m.
    pub fn displacement(&self, m: usize, n: usize) -> CMatrix {
        power(&self.z, n) * power(&self.x, m)
    }
}

fn power(a: &CMatrix, k: usize) -> CMatrix {
    (0..k).fold(identity(a.nrows()), |acc, _| acc * a)
}

fn check_indices(d: usize, m: usize, n: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("dimension must be >= 2, got {d}")));
    }
    if m >= d {
        return Err(Error::InvalidIndex { index: m, len: d });
    }
    if n >= d {
        return Err(Error::InvalidIndex { index: n, len: d });
    }
    Ok(())
}

/// |φ_mn⟩ = (Z^n X^m ⊗ I)|φ₀₀⟩ with |φ₀₀⟩ = Σ_j |jj⟩/√d.
pub fn bell_state(d: usize, m: usize, n: usize) -> Result<CVector> {
    check_indices(d, m, n)?;
    let w = WeylPair::new(d)?;
    let mut phi = CVector::zeros(d * d);
    for j in 0..d {
        phi[j * d + j] = c(1.0 / (d as f64).sqrt(), 0.0);
    }
    Ok(w.displacement(m, n).kronecker(&identity(d)) * phi)
}

/// All d² generalized Bell states, indexed by k = m·d + n.
pub fn bell_basis(d: usize) -> Result<Vec<CVector>> {
    (0..d * d).map(|k| bell_state(d, k / d, k % d)).collect()
}

fn cab_layout(d: usize) -> SubsystemLayout {
    SubsystemLayout::new(vec![d * d, d, d]).expect("nonzero dims")
}

/// Σ_k p_k |k⟩⟨k|_C ⊗ |φ_mn⟩⟨φ_mn| with k = m·d + n, on C(d²) ⊗ A(d) ⊗ B(d).
pub fn classical_tripartite(d: usize, weights: &[f64]) -> Result<DensityOperator> {
    if weights.len() != d * d {
        return Err(Error::InvalidArgument(format!("need {} weights, got {}", d * d, weights.len())));
    }
    if weights.iter().any(|p| !(*p >= 0.0)) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument("weights must be non-negative and sum to 1".into()));
    }
    let basis = bell_basis(d)?;
    let mut m = CMatrix::zeros(d * d * d * d, d * d * d * d);
    for (k, (&p, phi)) in weights.iter().zip(&basis).enumerate() {
        if p > 0.0 {
            m += projector(&ket(d * d, k)).kronecker(&projector(phi)) * c(p, 0.0);
        }
    }
    DensityOperator::new(m, cab_layout(d))
}

/// E_{CA:B} of a state whose first party is a classical flag: Σ_k p_k E_{A:B}(ρ_k),
/// normalized by ln of the smaller of A and B.
pub fn flagged_bell_entanglement(rho: &DensityOperator) -> Result<f64> {
    let dims = rho.layout().dims();
    if dims.len() != 3 {
        return Err(Error::DimensionMismatch(format!("expected C:A:B layout, got {dims:?}")));
    }
    let (dc, da, db) = (dims[0], dims[1], dims[2]);
    let dab = da * db;
    let m = rho.matrix();
    for i in 0..dc {
        for j in (0..dc).filter(|&j| j != i) {
            if m.view((i * dab, j * dab), (dab, dab)).iter().any(|z| z.norm() > 1e-9) {
                return Err(Error::Unsupported("flag register is not classical".into()));
            }
        }
    }
    let layout = SubsystemLayout::new(vec![da, db])?;
    let mut total = 0.0;
    for k in 0..dc {
        let block = m.view((k * dab, k * dab), (dab, dab)).into_owned();
        let p = block.trace().re;
        if p > 1e-14 {
            let branch = DensityOperator::new(block / c(p, 0.0), layout.clone())?;
            total += p * entanglement_measure(&branch, &[0], &[1])?.value;
        }
    }
    Ok(total / (da.min(db) as f64).ln())
}

/// U_CA = Σ_k |k⟩⟨k| ⊗ (X†)^m (Z†)^n on C(d²) ⊗ A(d), k = m·d + n.
pub fn localization_unitary(d: usize) -> Result<CMatrix> {
    let w = WeylPair::new(d)?;
    let mut u = CMatrix::zeros(d * d * d, d * d * d);
    for k in 0..d * d {
        let corr = w.displacement(k / d, k % d).adjoint();
        u += projector(&ket(d * d, k)).kronecker(&corr);
    }
    Ok(u)
}

/// Apply U_CA ⊗ I_B to a C:A:B state.
pub fn localize(rho: &DensityOperator) -> Result<DensityOperator> {
    let dims = rho.layout().dims();
    let d = dims.get(1).copied().unwrap_or(0);
    if dims.len() != 3 || dims[0] != d * d || dims[2] != d {
        return Err(Error::DimensionMismatch(format!("expected [d², d, d] layout, got {dims:?}")));
    }
    let u = localization_unitary(d)?.kronecker(&identity(d));
    rho.conjugate(&u)
}

/// (1/d) Σ_k |k⟩_C |φ_mn⟩, entangled across C:AB with maximally mixed AB marginal.
pub fn quantum_tripartite(d: usize) -> Result<CVector> {
    let basis = bell_basis(d)?;
    let mut psi = CVector::zeros(d.pow(4));
    for (k, phi) in basis.iter().enumerate() {
        psi += ket(d * d, k).kronecker(phi) * c(1.0 / d as f64, 0.0);
    }
    Ok(psi)
}

/// |χ⟩ = (1/d) Σ_k |k⟩ on C(d²).
pub fn uniform_flag(d: usize) -> CVector {
    CVector::from_element(d * d, c(1.0 / d as f64, 0.0))
}

/// A channel given by its Kraus operators on a d-dimensional space.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    kraus: Vec<CMatrix>,
    dim: usize,
}

impl KrausChannel {
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        let dim = kraus.first().map(|k| k.nrows()).ok_or_else(|| Error::InvalidArgument("empty Kraus set".into()))?;
        if kraus.iter().any(|k| k.shape() != (dim, dim)) {
            return Err(Error::DimensionMismatch("Kraus operators must share one square shape".into()));
        }
        Ok(Self { kraus, dim })
    }

    pub fn identity(dim: usize) -> Self {
        Self { kraus: vec![identity(dim)], dim }
    }

    /// Random channel from an isometry with `n` Kraus outputs (QR of a uniform complex matrix).
    pub fn random<R: Rng>(dim: usize, n: usize, rng: &mut R) -> Self {
        let g = CMatrix::from_fn(dim * n, dim, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let q = g.qr().q();
        let kraus = (0..n).map(|k| q.view((k * dim, 0), (dim, dim)).into_owned()).collect();
        Self { kraus, dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    /// Φ ⊗ Ψ.
    pub fn tensor(&self, other: &KrausChannel) -> KrausChannel {
        let kraus = self.kraus.iter().flat_map(|a| other.kraus.iter().map(move |b| a.kronecker(b))).collect();
        KrausChannel { kraus, dim: self.dim * other.dim }
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        self.kraus.iter().fold(CMatrix::zeros(self.dim, self.dim), |acc, k| acc + k * rho * k.adjoint())
    }

    /// max |Σ K†K − I|.
    pub fn completeness_residual(&self) -> f64 {
        let s = self.kraus.iter().fold(CMatrix::zeros(self.dim, self.dim), |acc, k| acc + k.adjoint() * k);
        crate::qcore::max_abs_diff(&s, &identity(self.dim))
    }

    /// Unnormalized Choi matrix Σ_ij |i⟩⟨j| ⊗ Φ(|i⟩⟨j|); its trace equals the input dimension.
    pub fn choi(&self) -> CMatrix {
        let d = self.dim;
        let mut out = CMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                let mut e = CMatrix::zeros(d, d);
                e[(i, j)] = c(1.0, 0.0);
                out.view_mut((i * d, j * d), (d, d)).copy_from(&self.apply(&e));
            }
        }
        out
    }

    pub fn choi_min_eigenvalue(&self) -> f64 {
        crate::qcore::hermitian_eigenvalues(&self.choi())[0]
    }

    /// Choi matrix PSD and Kraus set complete, both within `tol`.
    pub fn is_cptp(&self, tol: f64) -> bool {
        self.choi_min_eigenvalue() > -tol && self.completeness_residual() < tol
    }
}

/// Reduced dynamics of AB induced by U_CA: Kraus operators K_rs = |φ₀₀⟩⟨φ_rs|.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalizationChannel {
    pub d: usize,
    pub channel: KrausChannel,
}

impl LocalizationChannel {
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        self.channel.apply(rho)
    }

    pub fn choi(&self) -> CMatrix {
        self.channel.choi()
    }
}

pub fn induced_channel(d: usize) -> Result<LocalizationChannel> {
    let basis = bell_basis(d)?;
    let phi00 = basis[0].clone();
    let kraus = basis.iter().map(|phi| &phi00 * phi.adjoint()).collect();
    Ok(LocalizationChannel { d, channel: KrausChannel::new(kraus)? })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QdpiVerdict {
    /// Mutual information did not grow.
    NoIncrease,
    /// Growth, but the process is a certified CPTP map that does not factor over A and B.
    ApparentViolationGlobalChannel,
    /// Growth with no CPTP certificate.
    Unexplained,
}

impl std::fmt::Display for QdpiVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            QdpiVerdict::NoIncrease => "no increase",
            QdpiVerdict::ApparentViolationGlobalChannel => "apparent violation explained: channel is global",
            QdpiVerdict::Unexplained => "increase without CPTP certificate",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QdpiReport {
    /// I_{A:B} before, nats.
    pub i_before: f64,
    /// I_{A:B} after, nats.
    pub i_after: f64,
    /// Smallest Choi eigenvalue of the supplied channel.
    pub choi_min_eigenvalue: Option<f64>,
    pub verdict: QdpiVerdict,
}

/// Compare I_{A:B} across a process on two-party states (A = 0, B = 1).
pub fn qdpi_audit(before: &DensityOperator, after: &DensityOperator, channel: Option<&KrausChannel>) -> Result<QdpiReport> {
    if before.layout() != after.layout() || before.layout().len() != 2 {
        return Err(Error::DimensionMismatch("audit needs two bipartite states on the same cut".into()));
    }
    let i_before = mutual_information(before, &[0], &[1])?;
    let i_after = mutual_information(after, &[0], &[1])?;
    let choi_min_eigenvalue = channel.map(|ch| ch.choi_min_eigenvalue());
    let verdict = if i_after <= i_before + 1e-9 {
        QdpiVerdict::NoIncrease
    } else if channel.is_some_and(|ch| ch.is_cptp(1e-10)) {
        QdpiVerdict::ApparentViolationGlobalChannel
    } else {
        QdpiVerdict::Unexplained
    };
    Ok(QdpiReport { i_before, i_after, choi_min_eigenvalue, verdict })
}

/// ½|0⟩⟨0|_C ⊗ |η₊⟩⟨η₊| + ½|1⟩⟨1|_C ⊗ |η₋⟩⟨η₋| with |η±⟩ = (|01⟩ ± i|10⟩)/√2, parties C, A, B.
pub fn classical_flag_state() -> DensityOperator {
    let eta = |s: f64| (ket(4, 1) + ket(4, 2) * c(0.0, s)) / c(2f64.sqrt(), 0.0);
    let m = projector(&ket(2, 0)).kronecker(&projector(&eta(1.0))) * c(0.5, 0.0)
        + projector(&ket(2, 1)).kronecker(&projector(&eta(-1.0))) * c(0.5, 0.0);
    DensityOperator::new(m, SubsystemLayout::qubits(3)).expect("valid by construction")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizationSample {
    pub tau: f64,
    /// E_{A:B}, normalized to 1 for a Bell state.
    pub entanglement: f64,
    /// D_{C:AB} with projective measurements on C, nats.
    pub discord: f64,
    pub discord_converged: bool,
    /// AB marginal is Bell-diagonal, so the closed-form relative entropy of entanglement applies.
    pub bell_diagonal: bool,
}

/// Evolve [`classical_flag_state`] under 2πJ I_z^C I_z^A (other couplings refocused) and
/// track E_{A:B} and D_{C:AB} at each τ in `t_grid`.
pub fn zz_localization_trace(j_hz: f64, t_grid: &[f64]) -> Result<Vec<LocalizationSample>> {
    if !j_hz.is_finite() || j_hz == 0.0 {
        return Err(Error::InvalidArgument(format!("J must be finite and nonzero, got {j_hz}")));
    }
    let s = SpinOperatorSet::new(3);
    let h = s.iz(0) * s.iz(1) * c(2.0 * PI * j_hz, 0.0);
    let rho0 = classical_flag_state();
    t_grid
        .iter()
        .map(|&tau| {
            let rho = rho0.conjugate(&unitary_from_hamiltonian(&h, tau))?;
            let e = entanglement_measure(&rho, &[1], &[2])?;
            let d = quantum_discord(&rho, &[0], &[1, 2])?;
            Ok(LocalizationSample {
                tau,
                entanglement: e.value / LN_2,
                discord: d.value,
                discord_converged: d.converged,
                bell_diagonal: matches!(e.method, EntanglementMethod::BellDiagonalRelativeEntropy | EntanglementMethod::PureEntropy),
            })
        })
        .collect()
}

/// Grid τ = l/(10J), l = 0..=5.
pub fn localization_grid(j_hz: f64) -> Vec<f64> {
    (0..=5).map(|l| l as f64 / (10.0 * j_hz)).collect()
}

/// Matrix of a ket on a given layout, for tensoring with `kron_all`.
pub(crate) fn column(v: &CVector) -> CMatrix {
    CMatrix::from_column_slice(v.len(), 1, v.as_slice())
}

/// |χ⟩_C ⊗ |φ₀₀⟩ expected after localizing [`quantum_tripartite`].
pub fn localized_target(d: usize) -> Result<CVector> {
    let phi = bell_state(d, 0, 0)?;
    let m = kron_all(&[column(&uniform_flag(d)), column(&phi)]);
    Ok(CVector::from_column_slice(m.as_slice()))
}
