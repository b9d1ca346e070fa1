use super::{build_liouvillian, DissipatorTerm, Liouvillian};
use crate::error::{Error, Result};
use crate::qcore::{c, spherical_tensor, CMatrix, HermitianObservable, SpinOperatorSet};

/// Relaxation parameters for a dipolar-coupled spin pair.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxationSpec {
    /// Dipolar coupling constant (rad/s).
    pub b: f64,
    /// Chemical-shift anisotropy (dimensionless, ppm·1e-6); 0 disables CSA.
    pub delta_csa: f64,
    /// Rotational correlation time (s).
    pub tau_c: f64,
    /// Larmor frequency (rad/s).
    pub omega0: f64,
    /// Weight transitions by e^{mε} so rates obey detailed balance.
    pub beta_correction: bool,
    /// Purity factor ε = βω₀/2.
    pub epsilon: f64,
    /// Include dipolar/CSA cross-correlation when CSA is on.
    pub cross_correlation: bool,
}

impl RelaxationSpec {
    /// Dipolar-only spec in the extreme-narrowing limit.
    pub fn dipolar(b: f64, tau_c: f64, epsilon: f64) -> Self {
        Self { b, delta_csa: 0.0, tau_c, omega0: 0.0, beta_correction: true, epsilon, cross_correlation: false }
    }

    /// K₀ = 12 b² τ_c / 5.
    pub fn k0(&self) -> f64 {
        12.0 * self.b * self.b * self.tau_c / 5.0
    }

    /// Lorentzian frequency dependence 1/(1 + x²τ_c²).
    fn lorentz(&self, x: f64) -> f64 {
        1.0 / (1.0 + x * x * self.tau_c * self.tau_c)
    }

    /// K(mω₀) = K₀/(1 + m²ω₀²τ_c²).
    pub fn spectral_density(&self, m: i32) -> f64 {
        self.k0() * self.lorentz(m as f64 * self.omega0)
    }

    fn balance(&self, m: i32) -> f64 {
        if self.beta_correction {
            (m as f64 * self.epsilon).exp()
        } else {
            1.0
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tau_c > 0.0) {
            return Err(Error::InvalidArgument(format!("tau_c must be > 0, got {}", self.tau_c)));
        }
        if !self.epsilon.is_finite() || self.epsilon.abs() >= 0.5 {
            return Err(Error::InvalidArgument(format!("epsilon must be small, got {}", self.epsilon)));
        }
        Ok(())
    }
}

/// H = −(Δ/2) I₁z + (Δ/2) I₂z + 2πJ I₁z I₂z in the rotating frame.
pub fn two_spin_hamiltonian(delta: f64, j_hz: f64) -> HermitianObservable {
    let s = SpinOperatorSet::new(2);
    let m = s.iz(0) * c(-delta / 2.0, 0.0) + s.iz(1) * c(delta / 2.0, 0.0) + s.iz(0) * s.iz(1) * c(2.0 * std::f64::consts::PI * j_hz, 0.0);
    HermitianObservable::new(m).expect("Hermitian by construction")
}

/// First-rank CSA tensor components for one spin with a unit field along z.
fn csa_tensor(s: &SpinOperatorSet, k: usize, m: i32) -> CMatrix {
    match m {
        0 => s.iz(k) * c(2.0 / 6f64.sqrt(), 0.0),
        1 => s.iplus(k) * c(-0.5, 0.0),
        -1 => s.iminus(k) * c(0.5, 0.0),
        _ => CMatrix::zeros(4, 4),
    }
}

/// Dipolar (optionally CSA and cross-correlated) relaxation of two spins.
pub fn dipolar_liouvillian(spec: &RelaxationSpec, h: &HermitianObservable) -> Result<Liouvillian> {
    spec.validate()?;
    if h.dim() != 4 {
        return Err(Error::DimensionMismatch(format!("two-spin register needs dimension 4, got {}", h.dim())));
    }
    let s = SpinOperatorSet::new(2);
    let mut terms = Vec::new();
    for m in -2..=2 {
        let t = spherical_tensor(&s, 0, 1, m)?;
        let rate = spec.spectral_density(m) * spec.balance(m);
        terms.push(DissipatorTerm::new(t.clone(), t.adjoint(), rate)?);
    }
    if spec.delta_csa != 0.0 {
        let d = spec.omega0 * spec.delta_csa / 3.0;
        for m in -1..=1 {
            let lor = spec.lorentz(m as f64 * spec.omega0) * spec.balance(m);
            let j_csa = 12.0 * d * d * spec.tau_c / 5.0 * lor;
            for j in 0..2 {
                for k in 0..2 {
                    let a = csa_tensor(&s, j, m);
                    let b = csa_tensor(&s, k, m).adjoint();
                    terms.push(DissipatorTerm::new(a, b, j_csa)?);
                }
            }
            if spec.cross_correlation {
                let j_cc = -12.0 * spec.b * d * spec.tau_c / 5.0 * lor;
                let sign = c(j_cc.signum(), 0.0);
                let tdd = spherical_tensor(&s, 0, 1, m)?;
                for j in 0..2 {
                    let tcsa = csa_tensor(&s, j, m);
                    terms.push(DissipatorTerm::new(&tdd * sign, tcsa.adjoint(), j_cc.abs())?);
                    terms.push(DissipatorTerm::new(&tcsa * sign, tdd.adjoint(), j_cc.abs())?);
                }
            }
        }
    }
    build_liouvillian(h, &terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::vec_col;
    use crate::qcore::{identity, projector, ket};

    /// Indices of p00, p01, p10, p11 in the column-stacked vector.
    const POP: [usize; 4] = [0, 5, 10, 15];

    #[test]
    fn infinite_temperature_fixed_point() {
        let spec = RelaxationSpec::dipolar(1.0, 1.0, 0.0);
        let l = dipolar_liouvillian(&spec, &two_spin_hamiltonian(50.0, 0.0)).unwrap();
        let out = l.apply(&(identity(4) * c(0.25, 0.0)));
        assert!(out.norm() < 1e-14);
        assert!(l.trace_preservation_residual() < 1e-12);
        assert!(l.hermiticity_residual() < 1e-12);
    }

    #[test]
    fn double_quantum_detailed_balance() {
        let eps = 1e-4;
        let spec = RelaxationSpec::dipolar(1.0, 5.0 / 12.0, eps);
        let l = dipolar_liouvillian(&spec, &two_spin_hamiltonian(0.0, 0.0)).unwrap();
        let rate = |from: usize, to: usize| {
            let out = l.superoperator() * vec_col(&projector(&ket(4, from)));
            out[POP[to]].re
        };
        let ratio = rate(0, 3) / rate(3, 0);
        assert!((ratio - (1.0 - 2.0 * eps) / (1.0 + 2.0 * eps)).abs() < 1e-7);
    }

    #[test]
    fn csa_terms_preserve_trace() {
        let spec = RelaxationSpec {
            b: 2.0,
            delta_csa: 1e-4,
            tau_c: 1e-3,
            omega0: 1e4,
            beta_correction: true,
            epsilon: 1e-3,
            cross_correlation: true,
        };
        let l = dipolar_liouvillian(&spec, &two_spin_hamiltonian(3.0, 1.0)).unwrap();
        assert!(l.trace_preservation_residual() < 1e-12);
        assert!(l.hermiticity_residual() < 1e-12);
    }
}
