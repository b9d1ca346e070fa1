use super::SuperposedUnitary;
use crate::error::{Error, Result};
use crate::qcore::{c, identity, kron_all, ket, partial_trace_matrix, projector, CMatrix, CVector};

fn plus_state() -> CVector {
    CVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]) / c(2f64.sqrt(), 0.0)
}

fn alpha_state(alpha: f64) -> CVector {
    CVector::from_vec(vec![c(alpha.cos(), 0.0), c(alpha.sin(), 0.0)])
}

/// V_AS = |0⟩⟨0| ⊗ U₀ + |1⟩⟨1| ⊗ U₁ over the interval δ.
fn controlled_pair(su: &SuperposedUnitary, delta: f64) -> CMatrix {
    projector(&ket(2, 0)).kronecker(&su.u0().unitary(delta)) + projector(&ket(2, 1)).kronecker(&su.u1().unitary(delta))
}

/// Post-selected system state tr_A[⟨+|V (|α⟩⟨α| ⊗ ρ) V†|+⟩], normalized.
pub fn ancilla_postselect(su: &SuperposedUnitary, t0: f64, tf: f64, rho: &CMatrix) -> Result<CMatrix> {
    if rho.shape() != (2, 2) {
        return Err(Error::DimensionMismatch("system must be a qubit".into()));
    }
    let v = controlled_pair(su, tf - t0);
    let joint = projector(&alpha_state(su.alpha())).kronecker(rho);
    let out = &v * joint * v.adjoint();
    let post = projector(&plus_state()).kronecker(&identity(2));
    let reduced = partial_trace_matrix(&(&post * out * &post), &[2, 2], &[1])?;
    let p = reduced.trace().re;
    if p < 1e-12 {
        return Err(Error::Numerical("post-selection probability vanishes".into()));
    }
    Ok(reduced / c(p, 0.0))
}

/// System operator read off the three-qubit (M, A, S) register with M idle in |0⟩:
/// (⟨0|⟨+| ⊗ I) W (|0⟩|α⟩ ⊗ I), rescaled to a unitary.
pub fn circuit_operator(su: &SuperposedUnitary, t0: f64, tf: f64) -> CMatrix {
    let w = full_circuit(su, tf - t0, &identity(2));
    let col = |v: CVector| CMatrix::from_column_slice(v.len(), 1, v.as_slice());
    let bra = kron_all(&[col(ket(2, 0)).adjoint(), col(plus_state()).adjoint(), identity(2)]);
    let ket_in = kron_all(&[col(ket(2, 0)), col(alpha_state(su.alpha())), identity(2)]);
    let k = bra * w * ket_in;
    let n = ((k.adjoint() * &k).trace().re / 2.0).sqrt();
    k / c(n, 0.0)
}

/// CQ_MS · (I_M ⊗ V_AS) · CQ_MS on the register M ⊗ A ⊗ S.
fn full_circuit(su: &SuperposedUnitary, delta: f64, q: &CMatrix) -> CMatrix {
    let id2 = identity(2);
    let cq = kron_all(&[projector(&ket(2, 0)), id2.clone(), id2.clone()]) + kron_all(&[projector(&ket(2, 1)), id2.clone(), q.clone()]);
    let v = id2.kronecker(&controlled_pair(su, delta));
    &cq * v * &cq
}

/// T₊ and N² read from the interferometric circuit; C = T₊/N².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interferometry {
    pub t_plus: f64,
    pub n2: f64,
}

impl Interferometry {
    pub fn correlator(&self) -> f64 {
        self.t_plus / self.n2
    }
}

/// Measure M's coherence with A post-selected in |+⟩, with and without the controlled-Q gates.
pub fn interferometric_correlator(su: &SuperposedUnitary, q: &CMatrix, delta: f64) -> Result<Interferometry> {
    if q.shape() != (2, 2) {
        return Err(Error::DimensionMismatch("Q must act on a qubit".into()));
    }
    let rho_in = kron_all(&[projector(&plus_state()), projector(&alpha_state(su.alpha())), identity(2) * c(0.5, 0.0)]);
    let meas = kron_all(&[crate::qcore::pauli_x(), projector(&plus_state()), identity(2)]);
    let read = |w: &CMatrix| 2.0 * (&meas * w * &rho_in * w.adjoint()).trace().re;
    let t_plus = read(&full_circuit(su, delta, q));
    let n2 = read(&full_circuit(su, delta, &identity(2)));
    Ok(Interferometry { t_plus, n2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{max_abs_diff, pauli_z};

    #[test]
    fn interferometry_reproduces_correlator() {
        let su = SuperposedUnitary::qubit(0.5, 2.1, 1.0).unwrap();
        for d in [0.3, 1.2, 2.7] {
            let r = interferometric_correlator(&su, &pauli_z(), d).unwrap();
            assert!((r.n2 - su.normalization(d).unwrap()).abs() < 1e-12);
            assert!((r.correlator() - su.correlator(&pauli_z(), 0.0, d).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn postselection_is_conjugation() {
        let su = SuperposedUnitary::qubit(0.9, 1.4, 1.0).unwrap();
        let rho = CMatrix::from_row_slice(2, 2, &[c(0.6, 0.0), c(0.2, 0.1), c(0.2, -0.1), c(0.4, 0.0)]);
        let u = su.evaluate(0.0, 0.8);
        let got = ancilla_postselect(&su, 0.0, 0.8, &rho).unwrap();
        assert!(max_abs_diff(&got, &(&u * &rho * u.adjoint())) < 1e-12);
        assert!(max_abs_diff(&circuit_operator(&su, 0.0, 0.8), &u) < 1e-12);
    }
}
