use crate::dynamics::{build_liouvillian, DissipatorTerm};
use crate::error::{Error, Result};
use crate::qcore::{c, ket, projector, CMatrix, CVector, DensityOperator, HermitianObservable, SpinOperatorSet, SubsystemLayout, C64};

/// Spin species of the storage register.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Nucleus {
    Fluorine,
    Proton,
}

impl Nucleus {
    /// Gyromagnetic ratio, MHz/T.
    pub fn gamma(self) -> f64 {
        match self {
            Nucleus::Fluorine => 40.078,
            Nucleus::Proton => 42.577,
        }
    }
}

/// Δm per species (F, H) of the element |a⟩⟨b|, with m = +½ for |0⟩.
fn element_order(species: &[Nucleus], a: usize, b: usize) -> (i32, i32) {
    let n = species.len();
    let mut q = (0, 0);
    for (k, sp) in species.iter().enumerate() {
        let bit = n - 1 - k;
        let dm = ((b >> bit) & 1) as i32 - ((a >> bit) & 1) as i32;
        match sp {
            Nucleus::Fluorine => q.0 += dm,
            Nucleus::Proton => q.1 += dm,
        }
    }
    q
}

/// A state whose coherences all carry coherence order ±(q_F, q_H).
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceOrderState {
    label: (i32, i32),
    state: DensityOperator,
    species: Vec<Nucleus>,
}

impl CoherenceOrderState {
    /// Fails when the state has no coherence or carries an order other than ±label.
    pub fn new(label: (i32, i32), state: DensityOperator, species: Vec<Nucleus>) -> Result<Self> {
        if state.dim() != 1 << species.len() {
            return Err(Error::DimensionMismatch(format!("{} spins vs dimension {}", species.len(), state.dim())));
        }
        let m = state.matrix();
        let mut any = false;
        for a in 0..m.nrows() {
            for b in (a + 1)..m.ncols() {
                if m[(a, b)].norm() <= 1e-12 {
                    continue;
                }
                let q = element_order(&species, a, b);
                if q != label && q != (-label.0, -label.1) {
                    return Err(Error::InvalidArgument(format!("state carries order {q:?}, not ±{label:?}")));
                }
                any = true;
            }
        }
        if !any {
            return Err(Error::InvalidArgument("state has no coherence to label".into()));
        }
        Ok(Self { label, state, species })
    }

    pub fn label(&self) -> (i32, i32) {
        self.label
    }

    pub fn state(&self) -> &DensityOperator {
        &self.state
    }

    pub fn species(&self) -> &[Nucleus] {
        &self.species
    }

    pub fn gammas(&self) -> Vec<f64> {
        self.species.iter().map(|s| s.gamma()).collect()
    }

    /// q_F γ_F + q_H γ_H.
    pub fn weighted_order(&self) -> f64 {
        self.label.0 as f64 * Nucleus::Fluorine.gamma() + self.label.1 as f64 * Nucleus::Proton.gamma()
    }

    /// Part of ρ made of elements |a⟩⟨b| with order exactly +label.
    pub fn coherence_component(&self) -> CMatrix {
        let m = self.state.matrix();
        CMatrix::from_fn(m.nrows(), m.ncols(), |a, b| {
            if a != b && element_order(&self.species, a, b) == self.label {
                m[(a, b)]
            } else {
                c(0.0, 0.0)
            }
        })
    }

    /// max |R C R† − e^{−iφ(q_Fγ_F + q_Hγ_H)} C| for R = e^{−iφ Σγᵢ I_zᵢ} and C the +label component.
    pub fn eigen_coherence_residual(&self, phi: f64) -> f64 {
        let g = collective_z(&self.species);
        let r = CMatrix::from_diagonal(&g.diagonal().map(|x| C64::from_polar(1.0, -phi * x.re)));
        let coh = self.coherence_component();
        let rotated = &r * &coh * r.adjoint();
        crate::qcore::max_abs_diff(&rotated, &(coh * C64::from_polar(1.0, -phi * self.weighted_order())))
    }
}

/// Σ γᵢ I_zᵢ.
fn collective_z(species: &[Nucleus]) -> CMatrix {
    let s = SpinOperatorSet::new(species.len());
    species.iter().enumerate().fold(CMatrix::zeros(s.dim(), s.dim()), |acc, (k, sp)| acc + s.iz(k) * c(sp.gamma(), 0.0))
}

fn cat(n: usize, a: usize, b: usize, sign: f64) -> CVector {
    (ket(1 << n, a) + ket(1 << n, b) * c(sign, 0.0)) / c(2f64.sqrt(), 0.0)
}

fn labeled(label: (i32, i32), psi: &CVector, species: Vec<Nucleus>) -> CoherenceOrderState {
    let layout = SubsystemLayout::qubits(species.len());
    let state = DensityOperator::from_pure(psi, layout).expect("normalized cat state");
    CoherenceOrderState::new(label, state, species).expect("label matches construction")
}

const FFH: [Nucleus; 3] = [Nucleus::Fluorine, Nucleus::Fluorine, Nucleus::Proton];
const FFHH: [Nucleus; 4] = [Nucleus::Fluorine, Nucleus::Fluorine, Nucleus::Proton, Nucleus::Proton];

/// Localized cat states on (F₂, F₃, H₁) with orders (0, 1), (0, −1), (2, −1), (2, 1).
/// `sign` picks the relative ± between the two components.
pub fn localized_states(sign: f64) -> Vec<CoherenceOrderState> {
    [((0, 1), 0b010, 0b101), ((0, -1), 0b011, 0b100), ((2, -1), 0b001, 0b110), ((2, 1), 0b000, 0b111)]
        .into_iter()
        .map(|(label, a, b)| labeled(label, &cat(3, a, b, sign), FFH.to_vec()))
        .collect()
}

/// (|0101⟩ ± |1010⟩)/√2 on (F₂, F₃, H₁, H₄), order (0, 0).
pub fn delocalized_state(sign: f64) -> CoherenceOrderState {
    labeled((0, 0), &cat(4, 0b0101, 0b1010, sign), FFHH.to_vec())
}

/// Append an ancilla H₄ in |1⟩ and apply CNOT with control F₂ and target H₄.
pub fn delocalize(psi: &CVector) -> Result<CVector> {
    if psi.len() != 8 {
        return Err(Error::DimensionMismatch(format!("expected a 3-qubit state, got dimension {}", psi.len())));
    }
    let ext = psi.kronecker(&ket(2, 1));
    Ok(CVector::from_fn(16, |i, _| if i & 0b1000 != 0 { ext[i ^ 1] } else { ext[i] }))
}

/// Collective Gaussian z-noise weighted by γ plus a uniform dephasing floor. A coherence
/// of weighted order w decays at σ² w² + floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DephasingModel {
    /// (MHz/T)⁻² s⁻¹.
    pub sigma2: f64,
    /// s⁻¹.
    pub floor_rate: f64,
}

impl DephasingModel {
    pub fn new(sigma2: f64, floor_rate: f64) -> Result<Self> {
        if !(sigma2 >= 0.0 && floor_rate >= 0.0) || !sigma2.is_finite() || !floor_rate.is_finite() {
            return Err(Error::InvalidArgument("noise strengths must be finite and >= 0".into()));
        }
        Ok(Self { sigma2, floor_rate })
    }

    /// Fix the floor from the order-(0,0) lifetime and σ² from the single-quantum (0, ±1) lifetime.
    pub fn from_lifetimes(tau_00: f64, tau_01: f64) -> Result<Self> {
        if !(tau_00 > tau_01 && tau_01 > 0.0) {
            return Err(Error::InvalidArgument(format!("need tau_00 > tau_01 > 0, got {tau_00}, {tau_01}")));
        }
        let floor = 1.0 / tau_00;
        Self::new((1.0 / tau_01 - floor) / Nucleus::Proton.gamma().powi(2), floor)
    }

    pub fn rate(&self, weighted_order: f64) -> f64 {
        self.sigma2 * weighted_order * weighted_order + self.floor_rate
    }
}

impl Default for DephasingModel {
    /// Lifetimes 1.22 s for (0,0) and 0.25 s for (0,±1).
    fn default() -> Self {
        Self::from_lifetimes(1.22, 0.25).expect("valid defaults")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessResult {
    pub label: (i32, i32),
    /// Fitted 1/e time, s.
    pub decay_constant: f64,
    /// 1/(σ² w² + floor), s.
    pub model_lifetime: f64,
    /// (t, normalized coherence magnitude).
    pub curve: Vec<(f64, f64)>,
}

fn fit_decay(curve: &[(f64, f64)]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = curve.iter().filter(|(_, y)| *y > 1e-300).map(|&(t, y)| (t, y.ln())).collect();
    if pts.len() < 2 {
        return Err(Error::Numerical("too few positive samples to fit a decay".into()));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("time grid must span a nonzero interval".into()));
    }
    let slope = sxy / sxx;
    if slope >= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(-1.0 / slope)
}

/// Propagate each state under the Lindblad model Γ[G] at 2σ² with G = Σγᵢ I_zᵢ, plus Γ[Πₖ]
/// at the floor rate for every computational projector, and fit the decay of the labeled
/// coherence magnitude.
pub fn dephasing_robustness(states: &[CoherenceOrderState], model: &DephasingModel, t_grid: &[f64]) -> Result<Vec<RobustnessResult>> {
    if t_grid.len() < 2 || t_grid.windows(2).any(|w| !(w[1] > w[0])) || t_grid[0] < 0.0 {
        return Err(Error::InvalidArgument("t_grid must be ascending, non-negative, with >= 2 points".into()));
    }
    states
        .iter()
        .map(|st| {
            let n = st.species.len();
            let dim = 1 << n;
            let mut terms = vec![DissipatorTerm::lindblad(collective_z(&st.species), 2.0 * model.sigma2)?];
            for k in 0..dim {
                terms.push(DissipatorTerm::lindblad(projector(&ket(dim, k)), model.floor_rate)?);
            }
            let l = build_liouvillian(&HermitianObservable::zero(dim), &terms)?;
            let coh0 = st.coherence_component();
            let norm0: f64 = coh0.iter().map(|z| z.norm()).sum();
            let mask = coh0.map(|z| z.norm() > 0.0);
            let curve: Vec<(f64, f64)> = l
                .trajectory(st.state.matrix(), t_grid)
                .iter()
                .zip(t_grid)
                .map(|(r, &t)| {
                    let s: f64 = r.iter().zip(mask.iter()).filter(|(_, m)| **m).map(|(z, _)| z.norm()).sum();
                    (t, s / norm0)
                })
                .collect();
            Ok(RobustnessResult {
                label: st.label,
                decay_constant: fit_decay(&curve)?,
                model_lifetime: 1.0 / model.rate(st.weighted_order()),
                curve,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::entanglement_measure;

    #[test]
    fn labels_are_eigen_coherences() {
        for sign in [1.0, -1.0] {
            for st in localized_states(sign).iter().chain([&delocalized_state(sign)]) {
                assert!(st.eigen_coherence_residual(0.37) < 1e-12, "{:?}", st.label());
            }
        }
        let bad = localized_states(1.0)[0].state().clone();
        assert!(CoherenceOrderState::new((2, 1), bad, FFH.to_vec()).is_err());
        let diag = DensityOperator::maximally_mixed(SubsystemLayout::qubits(3));
        assert!(CoherenceOrderState::new((0, 0), diag, FFH.to_vec()).is_err());
    }

    #[test]
    fn localized_states_share_entanglement() {
        let e: Vec<f64> =
            localized_states(1.0).iter().map(|s| entanglement_measure(s.state(), &[0, 1], &[2]).unwrap().value).collect();
        assert!(e.iter().all(|v| (v - e[0]).abs() < 1e-9 && *v > 0.69));
    }

    #[test]
    fn cnot_delocalizes() {
        let psi = cat(3, 0b010, 0b101, -1.0);
        let out = delocalize(&psi).unwrap();
        let want = cat(4, 0b0101, 0b1010, -1.0);
        assert!((out - want).norm() < 1e-14);
    }

    #[test]
    fn decay_matches_model_and_ordering() {
        let model = DephasingModel::default();
        let grid: Vec<f64> = (0..=40).map(|i| i as f64 * 0.01).collect();
        let mut states = localized_states(1.0);
        states.push(delocalized_state(1.0));
        let res = dephasing_robustness(&states, &model, &grid).unwrap();
        for r in &res {
            assert!((r.decay_constant - r.model_lifetime).abs() < 1e-6 * r.model_lifetime, "{r:?}");
        }
        let tau = |l: (i32, i32)| res.iter().find(|r| r.label == l).unwrap().decay_constant;
        assert!((tau((0, 0)) - 1.22).abs() < 1e-6 && (tau((0, 1)) - 0.25).abs() < 1e-6);
        assert!(tau((0, 0)) > tau((0, -1)) && tau((0, -1)) > tau((2, 1)));
        assert!(tau((0, 0)) / tau((2, 1)) >= 20.0);
    }
}
