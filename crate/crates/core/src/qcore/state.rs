use super::{c, hermitian_eigen, hermitian_eigenvalues, identity, is_finite, is_hermitian, CMatrix, CVector, C64};
use crate::error::{Error, Result};

/// Ordered local dimensions of a composite register.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsystemLayout {
    dims: Vec<usize>,
}

impl SubsystemLayout {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidArgument(format!("bad layout {dims:?}")));
        }
        Ok(Self { dims })
    }

    pub fn qubits(n: usize) -> Self {
        Self { dims: vec![2; n.max(1)] }
    }

    pub fn single(d: usize) -> Self {
        Self { dims: vec![d.max(1)] }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn concat(&self, other: &SubsystemLayout) -> SubsystemLayout {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        SubsystemLayout { dims }
    }

    /// Dimension of the parties listed in `idx`.
    pub fn dim_of(&self, idx: &[usize]) -> usize {
        idx.iter().map(|&i| self.dims[i]).product()
    }
}

/// Tolerances used when validating states.
const HERM_TOL: f64 = 1e-9;
const TRACE_TOL: f64 = 1e-9;
const PSD_TOL: f64 = -1e-9;

/// Hermitian, unit-trace, positive semidefinite matrix over a layout.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
    layout: SubsystemLayout,
}

impl DensityOperator {
    /// Validates Hermiticity, trace and positivity.
    pub fn new(matrix: CMatrix, layout: SubsystemLayout) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() != layout.total() {
            return Err(Error::DimensionMismatch(format!(
                "matrix {}x{} vs layout {:?}",
                matrix.nrows(),
                matrix.ncols(),
                layout.dims()
            )));
        }
        if !is_finite(&matrix) {
            return Err(Error::InvalidState { reason: "non-finite entries".into(), max_violation: f64::INFINITY });
        }
        let herm = super::max_abs_diff(&matrix, &matrix.adjoint());
        if herm > HERM_TOL {
            return Err(Error::InvalidState { reason: "not Hermitian".into(), max_violation: herm });
        }
        let tr = matrix.trace();
        let tr_err = (tr - c(1.0, 0.0)).norm();
        if tr_err > TRACE_TOL {
            return Err(Error::InvalidState { reason: "trace differs from 1".into(), max_violation: tr_err });
        }
        let min_eig = hermitian_eigenvalues(&matrix)[0];
        if min_eig < PSD_TOL {
            return Err(Error::InvalidState { reason: "negative eigenvalue".into(), max_violation: -min_eig });
        }
        // Symmetrize to remove round-off anti-Hermitian residue.
        let matrix = (&matrix + matrix.adjoint()) * c(0.5, 0.0);
        Ok(Self { matrix, layout })
    }

    pub fn from_pure(psi: &CVector, layout: SubsystemLayout) -> Result<Self> {
        let n = psi.norm();
        if n < 1e-14 {
            return Err(Error::InvalidArgument("zero state vector".into()));
        }
        let v = psi / c(n, 0.0);
        Self::new(&v * v.adjoint(), layout)
    }

    pub fn maximally_mixed(layout: SubsystemLayout) -> Self {
        let d = layout.total();
        Self { matrix: identity(d) * c(1.0 / d as f64, 0.0), layout }
    }

    /// Diagonal state from probabilities in the computational basis.
    pub fn diagonal(probs: &[f64], layout: SubsystemLayout) -> Result<Self> {
        let v = CVector::from_iterator(probs.len(), probs.iter().map(|&p| c(p, 0.0)));
        Self::new(CMatrix::from_diagonal(&v), layout)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn tensor(&self, other: &DensityOperator) -> DensityOperator {
        DensityOperator {
            matrix: self.matrix.kronecker(&other.matrix),
            layout: self.layout.concat(&other.layout),
        }
    }

    /// U ρ U†, revalidated.
    pub fn conjugate(&self, u: &CMatrix) -> Result<DensityOperator> {
        Self::new(u * &self.matrix * u.adjoint(), self.layout.clone())
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn expectation(&self, op: &CMatrix) -> C64 {
        (&self.matrix * op).trace()
    }

    pub fn with_layout(&self, layout: SubsystemLayout) -> Result<DensityOperator> {
        if layout.total() != self.dim() {
            return Err(Error::DimensionMismatch("layout does not match dimension".into()));
        }
        Ok(DensityOperator { matrix: self.matrix.clone(), layout })
    }
}

/// Hermitian matrix used as an observable or Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianObservable {
    matrix: CMatrix,
}

impl HermitianObservable {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let scale = matrix.norm().max(1.0);
        if !is_finite(&matrix) || !is_hermitian(&matrix, super::TOL * scale) {
            return Err(Error::InvalidArgument("observable is not Hermitian".into()));
        }
        let matrix = (&matrix + matrix.adjoint()) * c(0.5, 0.0);
        Ok(Self { matrix })
    }

    pub fn zero(d: usize) -> Self {
        Self { matrix: CMatrix::zeros(d, d) }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Partial trace of a raw matrix keeping the listed parties (in ascending order).
pub fn partial_trace_matrix(m: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    let total: usize = dims.iter().product();
    if m.nrows() != total || m.ncols() != total {
        return Err(Error::DimensionMismatch(format!("matrix {} vs layout product {total}", m.nrows())));
    }
    if keep.is_empty() {
        return Err(Error::InvalidArgument("keep set is empty".into()));
    }
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    for w in keep.windows(2) {
        if w[0] == w[1] {
            return Err(Error::InvalidArgument(format!("duplicate index {}", w[0])));
        }
    }
    if let Some(&bad) = keep.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::InvalidIndex { index: bad, len: dims.len() });
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
    let mut strides = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let offsets = |parties: &[usize]| -> Vec<usize> {
        let n: usize = parties.iter().map(|&p| dims[p]).product();
        (0..n)
            .map(|mut idx| {
                let mut off = 0;
                for &p in parties.iter().rev() {
                    off += (idx % dims[p]) * strides[p];
                    idx /= dims[p];
                }
                off
            })
            .collect()
    };
    let ko = offsets(&keep);
    let to = offsets(&traced);
    let dk = ko.len();
    let mut out = CMatrix::zeros(dk, dk);
    for (i, &oi) in ko.iter().enumerate() {
        for (j, &oj) in ko.iter().enumerate() {
            let mut acc = c(0.0, 0.0);
            for &t in &to {
                acc += m[(oi + t, oj + t)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// Reduced state on the parties in `keep`.
pub fn partial_trace(rho: &DensityOperator, keep: &[usize]) -> Result<DensityOperator> {
    let m = partial_trace_matrix(rho.matrix(), rho.layout().dims(), keep)?;
    let mut k = keep.to_vec();
    k.sort_unstable();
    let layout = SubsystemLayout::new(k.iter().map(|&i| rho.layout().dims()[i]).collect())?;
    DensityOperator::new(m, layout)
}

/// Gibbs state e^{-βH}/Z.
pub fn thermal_state(h: &HermitianObservable, beta: f64, layout: SubsystemLayout) -> Result<DensityOperator> {
    if !(beta >= 0.0) {
        return Err(Error::InvalidArgument(format!("beta must be >= 0, got {beta}")));
    }
    let (vals, vecs) = hermitian_eigen(h.matrix());
    let e0 = vals[0];
    let w: Vec<f64> = vals.iter().map(|&e| (-beta * (e - e0)).exp()).collect();
    let z: f64 = w.iter().sum();
    let d = CMatrix::from_diagonal(&CVector::from_iterator(w.len(), w.iter().map(|&x| c(x / z, 0.0))));
    DensityOperator::new(&vecs * d * vecs.adjoint(), layout)
}

/// First-order high-temperature form (I − β(H − tr H/d))/d.
pub fn thermal_state_linearized(h: &HermitianObservable, beta: f64, layout: SubsystemLayout) -> Result<DensityOperator> {
    let d = h.dim();
    let shift = h.matrix().trace() / c(d as f64, 0.0);
    let hs = h.matrix() - identity(d) * shift;
    let m = (identity(d) - hs * c(beta, 0.0)) * c(1.0 / d as f64, 0.0);
    DensityOperator::new(m, layout)
}

#[cfg(test)]
mod tests {
    use super::super::*;

    fn bell() -> DensityOperator {
        let mut v = CVector::zeros(4);
        v[0] = c(1.0, 0.0);
        v[3] = c(1.0, 0.0);
        DensityOperator::from_pure(&v, SubsystemLayout::qubits(2)).unwrap()
    }

    #[test]
    fn product_trace_recovers_factor() {
        let a = DensityOperator::diagonal(&[0.3, 0.7], SubsystemLayout::qubits(1)).unwrap();
        let b = DensityOperator::maximally_mixed(SubsystemLayout::single(3));
        let r = partial_trace(&a.tensor(&b), &[0]).unwrap();
        assert!(approx_eq(r.matrix(), a.matrix(), 1e-14));
        assert_eq!(r.layout().dims(), &[2]);
    }

    #[test]
    fn bell_reduces_to_mixed() {
        let r = partial_trace(&bell(), &[1]).unwrap();
        assert!(approx_eq(r.matrix(), &(identity(2) * c(0.5, 0.0)), 1e-14));
    }

    #[test]
    fn invalid_index_errors() {
        assert!(matches!(partial_trace(&bell(), &[2]), Err(Error::InvalidIndex { .. })));
        assert!(partial_trace(&bell(), &[]).is_err());
    }

    #[test]
    fn rejects_bad_states() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.2, 0.0), c(-0.2, 0.0)]));
        match DensityOperator::new(m, SubsystemLayout::qubits(1)) {
            Err(Error::InvalidState { max_violation, .. }) => assert!((max_violation - 0.2).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn thermal_limits() {
        let h = HermitianObservable::new(pauli_z() * c(0.5, 0.0)).unwrap();
        let t0 = thermal_state(&h, 0.0, SubsystemLayout::qubits(1)).unwrap();
        assert!(approx_eq(t0.matrix(), &(identity(2) * c(0.5, 0.0)), 1e-14));
        let cold = thermal_state(&h, 1e4, SubsystemLayout::qubits(1)).unwrap();
        assert!(approx_eq(cold.matrix(), &projector(&ket(2, 1)), 1e-12));
        assert!(thermal_state(&h, -1.0, SubsystemLayout::qubits(1)).is_err());
    }

    #[test]
    fn two_spin_linearized_thermal() {
        let eps = 1e-5;
        let s = SpinOperatorSet::new(2);
        // βH = −2ε(I1z + I2z) gives populations (1+2ε,1,1,1−2ε)/4 to first order.
        let h = HermitianObservable::new((s.iz(0) + s.iz(1)) * c(-2.0 * eps, 0.0)).unwrap();
        let full = thermal_state(&h, 1.0, SubsystemLayout::qubits(2)).unwrap();
        let lin = thermal_state_linearized(&h, 1.0, SubsystemLayout::qubits(2)).unwrap();
        assert!(max_abs_diff(full.matrix(), lin.matrix()) < 1e-9);
        assert!((lin.matrix()[(0, 0)].re - (1.0 + 2.0 * eps) / 4.0).abs() < 1e-15);
    }
}
