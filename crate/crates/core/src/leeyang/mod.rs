//! Two-site Ising pair probed by a third spin: Lee-Yang polynomial, probe
//! coherence, zero extraction and probe-only state preparation.

mod prep;
mod zeros;

pub use prep::{fidelity, fit_preparation, simulate_preparation, solve_tau, FitMode, PreparationFit, PreparationParams, evolve_quadratures, tau_cap};
pub use zeros::{amoeba_member, find_zeros, sample_coamoeba, torus_zeros, LyZero};

use crate::error::{Error, Result};
use crate::qcore::{c, partial_trace, unitary_from_hamiltonian, von_neumann_entropy, CMatrix, DensityOperator, SpinOperatorSet, SubsystemLayout, C64};
use std::f64::consts::{PI, TAU};

/// Dimensionless Ising parameters βJ, βh_A, βh_B.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsingParams {
    pub beta_j: f64,
    pub beta_ha: f64,
    pub beta_hb: f64,
}

impl IsingParams {
    pub fn new(beta_j: f64, beta_ha: f64, beta_hb: f64) -> Result<Self> {
        if !(beta_j.is_finite() && beta_ha.is_finite() && beta_hb.is_finite()) {
            return Err(Error::InvalidArgument("Ising parameters must be finite".into()));
        }
        Ok(Self { beta_j, beta_ha, beta_hb })
    }

    /// Γ = e^{−2βJ}.
    pub fn polynomial(&self) -> LyPolynomial {
        LyPolynomial { gamma: (-2.0 * self.beta_j).exp() }
    }

    /// Moduli |z₁| = e^{−2βh_A}, |z₂| = e^{−2βh_B}.
    pub fn moduli(&self) -> (f64, f64) {
        ((-2.0 * self.beta_ha).exp(), (-2.0 * self.beta_hb).exp())
    }

    /// Expansion e^{−βH_AB} = C_a I + C_b σz^A + C_c σz^B + C_d σz^A σz^B.
    pub fn coefficients(&self) -> [f64; 4] {
        let (cj, sj) = (self.beta_j.cosh(), self.beta_j.sinh());
        let (ca, sa) = (self.beta_ha.cosh(), self.beta_ha.sinh());
        let (cb, sb) = (self.beta_hb.cosh(), self.beta_hb.sinh());
        [
            cj * ca * cb + sj * sa * sb,
            cj * sa * cb + sj * ca * sb,
            cj * ca * sb + sj * sa * cb,
            cj * sa * sb + sj * ca * cb,
        ]
    }

    /// Boltzmann weights of |s_A s_B⟩ in the order ++, +−, −+, −− (σz = +1 first).
    pub fn weights(&self) -> [f64; 4] {
        let w = |sa: f64, sb: f64| (self.beta_j * sa * sb + self.beta_ha * sa + self.beta_hb * sb).exp();
        let raw = [w(1.0, 1.0), w(1.0, -1.0), w(-1.0, 1.0), w(-1.0, -1.0)];
        let z: f64 = raw.iter().sum();
        raw.map(|x| x / z)
    }

    /// Thermal state of the Ising pair.
    pub fn thermal_state(&self) -> DensityOperator {
        DensityOperator::diagonal(&self.weights(), SubsystemLayout::qubits(2)).expect("normalized weights")
    }
}

/// Scalar probe couplings (Hz).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeCouplings {
    pub j_pa: f64,
    pub j_pb: f64,
}

impl Default for ProbeCouplings {
    fn default() -> Self {
        Self { j_pa: 49.50393, j_pb: 224.66358 }
    }
}

impl ProbeCouplings {
    pub fn new(j_pa: f64, j_pb: f64) -> Result<Self> {
        if !(j_pa.is_finite() && j_pb.is_finite()) || j_pa == 0.0 || j_pb == 0.0 {
            return Err(Error::InvalidArgument(format!("couplings must be finite and nonzero, got {j_pa}, {j_pb}")));
        }
        Ok(Self { j_pa, j_pb })
    }

    /// Slope m = J_PB/J_PA of the torus line.
    pub fn ratio(&self) -> f64 {
        self.j_pb / self.j_pa
    }

    /// λ_A, λ_B = πJ/2 (rad/s).
    pub fn lambdas(&self) -> (f64, f64) {
        (PI * self.j_pa / 2.0, PI * self.j_pb / 2.0)
    }

    /// Torus angles θᵢ = 4λᵢt reduced to [0, 2π).
    pub fn angles(&self, t: f64) -> CoamoebaPoint {
        CoamoebaPoint::new(TAU * self.j_pa * t, TAU * self.j_pb * t)
    }
}

/// f(z₁, z₂) = 1 + Γz₁ + Γz₂ + z₁z₂.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyPolynomial {
    pub gamma: f64,
}

impl LyPolynomial {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidArgument(format!("gamma must be > 0, got {gamma}")));
        }
        Ok(Self { gamma })
    }

    pub fn eval(&self, z1: C64, z2: C64) -> C64 {
        ly_eval(self, z1, z2)
    }

    /// f at z = (|z₁|e^{iθ₁}, |z₂|e^{iθ₂}).
    pub fn eval_polar(&self, moduli: (f64, f64), p: CoamoebaPoint) -> C64 {
        self.eval(C64::from_polar(moduli.0, p.theta1), C64::from_polar(moduli.1, p.theta2))
    }
}

pub fn ly_eval(p: &LyPolynomial, z1: C64, z2: C64) -> C64 {
    c(1.0, 0.0) + (z1 + z2) * p.gamma + z1 * z2
}

/// Point on the coamoeba torus with both angles in [0, 2π).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoamoebaPoint {
    pub theta1: f64,
    pub theta2: f64,
}

fn wrap(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y >= TAU {
        0.0
    } else {
        y
    }
}

impl CoamoebaPoint {
    pub fn new(theta1: f64, theta2: f64) -> Self {
        Self { theta1: wrap(theta1), theta2: wrap(theta2) }
    }

    /// Distance on the torus (max over the two angles).
    pub fn torus_distance(&self, other: &CoamoebaPoint) -> f64 {
        let d = |a: f64, b: f64| {
            let x = (a - b).rem_euclid(TAU);
            x.min(TAU - x)
        };
        d(self.theta1, other.theta1).max(d(self.theta2, other.theta2))
    }
}

/// Probe quadratures and coherence L = |⟨σx⟩ + i⟨σy⟩|²/4.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeSample {
    pub t: f64,
    pub sx: f64,
    pub sy: f64,
    pub l: f64,
}

/// Quadratures as functions of the half angles a = θ₁/2, b = θ₂/2, normalized so ⟨σx⟩(0) = 1.
pub(crate) fn quadratures(coef: &[f64; 4], a: f64, b: f64) -> (f64, f64) {
    let [ca, cb, cc, cd] = *coef;
    let (sa, ka) = a.sin_cos();
    let (sb, kb) = b.sin_cos();
    ((ca * ka * kb - cd * sa * sb) / ca, (cb * sa * kb + cc * ka * sb) / ca)
}

/// Closed-form probe signal for the probe prepared in |+⟩.
pub fn probe_trajectory(ising: &IsingParams, cpl: &ProbeCouplings, t_grid: &[f64]) -> Vec<ProbeSample> {
    let coef = ising.coefficients();
    t_grid
        .iter()
        .map(|&t| {
            let (sx, sy) = quadratures(&coef, PI * cpl.j_pa * t, PI * cpl.j_pb * t);
            ProbeSample { t, sx, sy, l: 0.25 * (sx * sx + sy * sy) }
        })
        .collect()
}

/// H_int = λ_A σz^P σz^A + λ_B σz^P σz^B. The Ising Hamiltonian commutes with it and
/// only enters through the initial state.
fn interaction(cpl: &ProbeCouplings) -> CMatrix {
    let s = SpinOperatorSet::new(3);
    let (la, lb) = cpl.lambdas();
    (s.iz(0) * s.iz(1) * c(4.0 * la, 0.0)) + (s.iz(0) * s.iz(2) * c(4.0 * lb, 0.0))
}

fn initial_state(ising: &IsingParams) -> DensityOperator {
    let plus = DensityOperator::new(CMatrix::from_element(2, 2, c(0.5, 0.0)), SubsystemLayout::qubits(1)).expect("valid pure state");
    plus.tensor(&ising.thermal_state())
}

/// Probe signal from full three-qubit unitary propagation.
pub fn simulate_probe(ising: &IsingParams, cpl: &ProbeCouplings, t_grid: &[f64]) -> Vec<ProbeSample> {
    let h = interaction(cpl);
    let rho0 = initial_state(ising);
    let s = SpinOperatorSet::new(3);
    let (x, y) = (s.ix(0) * c(2.0, 0.0), s.iy(0) * c(2.0, 0.0));
    t_grid
        .iter()
        .map(|&t| {
            let u = unitary_from_hamiltonian(&h, t);
            let r = &u * rho0.matrix() * u.adjoint();
            let sx = (&x * &r).trace().re;
            let sy = (&y * &r).trace().re;
            ProbeSample { t, sx, sy, l: 0.25 * (sx * sx + sy * sy) }
        })
        .collect()
}

/// Entropies behind I_{P:AB} = S_P + S_AB − S_PAB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiSample {
    pub t: f64,
    pub mi: f64,
    pub s_ab: f64,
    pub s_pab: f64,
}

pub fn mutual_information_trace(ising: &IsingParams, cpl: &ProbeCouplings, t_grid: &[f64]) -> Result<Vec<MiSample>> {
    let h = interaction(cpl);
    let rho0 = initial_state(ising);
    t_grid
        .iter()
        .map(|&t| {
            let rho = rho0.conjugate(&unitary_from_hamiltonian(&h, t))?;
            let s_p = von_neumann_entropy(&partial_trace(&rho, &[0])?);
            let s_ab = von_neumann_entropy(&partial_trace(&rho, &[1, 2])?);
            let s_pab = von_neumann_entropy(&rho);
            Ok(MiSample { t, mi: s_p + s_ab - s_pab, s_ab, s_pab })
        })
        .collect()
}

/// Deviation operator C_a I_x^P + C_b 2I_x^P I_z^A + C_c 2I_x^P I_z^B + C_d 4I_x^P I_z^A I_z^B.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationState {
    pub coefficients: [f64; 4],
}

impl DeviationState {
    pub fn matrix(&self) -> CMatrix {
        let s = SpinOperatorSet::new(3);
        let [ca, cb, cc, cd] = self.coefficients;
        let x = s.ix(0);
        &x * c(ca, 0.0) + &x * s.iz(1) * c(2.0 * cb, 0.0) + &x * s.iz(2) * c(2.0 * cc, 0.0) + &x * s.iz(1) * s.iz(2) * c(4.0 * cd, 0.0)
    }

    /// Read the four product-operator weights back from an 8×8 operator.
    pub fn project(m: &CMatrix) -> Result<Self> {
        if m.shape() != (8, 8) {
            return Err(Error::DimensionMismatch(format!("expected 8x8 operator, got {:?}", m.shape())));
        }
        let basis = [[0usize; 0].as_slice(), &[1], &[2], &[1, 2]];
        let s = SpinOperatorSet::new(3);
        let mut out = [0.0; 4];
        for (k, spins) in basis.iter().enumerate() {
            let op = spins.iter().fold(s.ix(0) * c(2.0, 0.0), |acc, &j| acc * s.iz(j) * c(2.0, 0.0));
            // Pauli products are orthogonal with norm 8; the basis element carries a factor 1/2.
            out[k] = 2.0 * (&op * m).trace().re / 8.0;
        }
        Ok(Self { coefficients: out })
    }
}

pub fn target_state(ising: &IsingParams) -> DeviationState {
    DeviationState { coefficients: ising.coefficients() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{hermitian_function, max_abs_diff, pauli_z, identity};

    #[test]
    fn polynomial_examples() {
        for g in [0.1, 0.5, 1.0, 3.0] {
            let p = LyPolynomial::new(g).unwrap();
            assert!(p.eval(c(-1.0, 0.0), c(1.0, 0.0)).norm() < 1e-15);
        }
        let p = LyPolynomial::new(0.5).unwrap();
        assert!((p.eval(c(-1.0, 0.0), c(-1.0, 0.0)) - c(1.0, 0.0)).norm() < 1e-15);
        // Horner in z₂: (1 + Γz₁) + z₂(Γ + z₁)
        let (z1, z2) = (c(0.0, 1.0), c(0.0, 1.0));
        let horner = (c(1.0, 0.0) + z1 * 0.5) + z2 * (z1 + 0.5);
        assert!((p.eval(z1, z2) - horner).norm() < 1e-15);
        assert!(LyPolynomial::new(0.0).is_err());
    }

    #[test]
    fn coefficients_match_matrix_exponential() {
        let ising = IsingParams::new(0.5, 0.1, -0.3).unwrap();
        let zz = pauli_z().kronecker(&pauli_z());
        let za = pauli_z().kronecker(&identity(2));
        let zb = identity(2).kronecker(&pauli_z());
        let minus_beta_h = &zz * c(ising.beta_j, 0.0) + &za * c(ising.beta_ha, 0.0) + &zb * c(ising.beta_hb, 0.0);
        let e = hermitian_function(&minus_beta_h, f64::exp);
        let got = ising.coefficients();
        for (k, op) in [identity(4), za, zb, zz].iter().enumerate() {
            let want = (op * &e).trace().re / 4.0;
            assert!((got[k] - want).abs() < 1e-12, "coefficient {k}");
        }
    }

    #[test]
    fn zero_fields_kill_sigma_y() {
        let ising = IsingParams::new(0.5, 0.0, 0.0).unwrap();
        let cpl = ProbeCouplings::default();
        let grid: Vec<f64> = (0..200).map(|i| i as f64 * 1e-3).collect();
        for s in probe_trajectory(&ising, &cpl, &grid) {
            assert_eq!(s.sy, 0.0);
            let (a, b) = (PI * (cpl.j_pa + cpl.j_pb) * s.t, PI * (cpl.j_pa - cpl.j_pb) * s.t);
            let re = (0.5f64.exp() * a.cos() + (-0.5f64).exp() * b.cos()) / (2.0 * 0.5f64.cosh());
            assert!((s.sx - re).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_matches_simulation() {
        let cpl = ProbeCouplings::default();
        let grid: Vec<f64> = (0..300).map(|i| i as f64 * 1e-3).collect();
        for ising in [IsingParams::new(0.5, 0.1, -0.1).unwrap(), IsingParams::new(-0.7, 0.3, 0.2).unwrap()] {
            let a = probe_trajectory(&ising, &cpl, &grid);
            let b = simulate_probe(&ising, &cpl, &grid);
            for (x, y) in a.iter().zip(&b) {
                assert!((x.sx - y.sx).abs() < 1e-9 && (x.sy - y.sy).abs() < 1e-9, "t = {}", x.t);
            }
        }
    }

    #[test]
    fn target_reduces_at_infinite_temperature() {
        let t = target_state(&IsingParams::new(0.0, 0.0, 0.0).unwrap());
        assert_eq!(t.coefficients, [1.0, 0.0, 0.0, 0.0]);
        let back = DeviationState::project(&target_state(&IsingParams::new(0.4, 0.2, -0.1).unwrap()).matrix()).unwrap();
        let want = IsingParams::new(0.4, 0.2, -0.1).unwrap().coefficients();
        for k in 0..4 {
            assert!((back.coefficients[k] - want[k]).abs() < 1e-12);
        }
        assert!(max_abs_diff(&t.matrix(), &SpinOperatorSet::new(3).ix(0)) < 1e-15);
    }

    #[test]
    fn angles_wrap() {
        let p = CoamoebaPoint::new(-0.5, 7.0);
        assert!((p.theta1 - (TAU - 0.5)).abs() < 1e-15 && (p.theta2 - (7.0 - TAU)).abs() < 1e-15);
        assert!(CoamoebaPoint::new(0.0, 0.1).torus_distance(&CoamoebaPoint::new(TAU - 0.1, 0.1)) < 0.1 + 1e-15);
    }
}
