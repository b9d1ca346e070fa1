//! Dense complex linear algebra and quantum-information primitives.

mod info;
mod spin;
mod state;

pub use info::{
    concurrence, entanglement_measure, flagged_entanglement, mutual_information, quantum_discord,
    relative_entropy, trace_distance, von_neumann_entropy, DiscordResult, EntanglementMethod,
    EntanglementReport,
};
pub use spin::{spherical_tensor, SpinOperatorSet};
pub use state::{
    partial_trace, partial_trace_matrix, thermal_state, thermal_state_linearized, DensityOperator,
    HermitianObservable, SubsystemLayout,
};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use std::fmt::Write as _;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Default absolute tolerance for matrix comparisons.
pub const TOL: f64 = 1e-10;
/// Eigenvalues below this are treated as zero before taking logarithms.
pub const EIG_CLAMP: f64 = 1e-12;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn zeros(n: usize) -> CMatrix {
    CMatrix::zeros(n, n)
}

pub fn tensor_product(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Kronecker product of a list of factors, left to right.
pub fn kron_all(factors: &[CMatrix]) -> CMatrix {
    let mut out = CMatrix::from_element(1, 1, c(1.0, 0.0));
    for f in factors {
        out = out.kronecker(f);
    }
    out
}

pub fn dagger(a: &CMatrix) -> CMatrix {
    a.adjoint()
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b + b * a
}

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn approx_eq(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
    a.shape() == b.shape() && max_abs_diff(a, b) <= tol
}

pub fn is_hermitian(a: &CMatrix, tol: f64) -> bool {
    a.is_square() && max_abs_diff(a, &a.adjoint()) <= tol
}

pub fn is_finite(a: &CMatrix) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Frobenius norm of `a - b`.
pub fn frobenius_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).norm()
}

/// Unitarity residual max|U†U − I|.
pub fn unitarity_residual(u: &CMatrix) -> f64 {
    max_abs_diff(&(u.adjoint() * u), &identity(u.nrows()))
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
}

/// Computational basis ket |i⟩ of dimension `n`.
pub fn ket(n: usize, i: usize) -> CVector {
    let mut v = CVector::zeros(n);
    v[i] = c(1.0, 0.0);
    v
}

/// |v⟩⟨v|.
pub fn projector(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

/// Embed a local operator acting on party `site` into the register with `dims`.
pub fn embed(op: &CMatrix, site: usize, dims: &[usize]) -> Result<CMatrix> {
    if site >= dims.len() {
        return Err(Error::InvalidIndex { index: site, len: dims.len() });
    }
    if op.nrows() != dims[site] || op.ncols() != dims[site] {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, party {} has dimension {}",
            op.nrows(),
            op.ncols(),
            site,
            dims[site]
        )));
    }
    let factors: Vec<CMatrix> = dims
        .iter()
        .enumerate()
        .map(|(k, &d)| if k == site { op.clone() } else { identity(d) })
        .collect();
    Ok(kron_all(&factors))
}

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues and column eigenvectors.
pub fn hermitian_eigen(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let h = (a + a.adjoint()) * c(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = CMatrix::zeros(a.nrows(), a.ncols());
    for (col, &i) in idx.iter().enumerate() {
        vecs.set_column(col, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    hermitian_eigen(a).0
}

/// Apply a real function to a Hermitian matrix through its spectrum.
pub fn hermitian_function(a: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(a);
    let d = CMatrix::from_diagonal(&CVector::from_iterator(vals.len(), vals.iter().map(|&x| c(f(x), 0.0))));
    &vecs * d * vecs.adjoint()
}

/// e^{-iHt} for Hermitian H.
pub fn unitary_from_hamiltonian(h: &CMatrix, t: f64) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(h);
    let d = CMatrix::from_diagonal(&CVector::from_iterator(
        vals.len(),
        vals.iter().map(|&x| C64::from_polar(1.0, -x * t)),
    ));
    &vecs * d * vecs.adjoint()
}

/// Row-major CSV dump, one "re,im" pair per line.
pub fn matrix_to_csv(a: &CMatrix) -> String {
    let mut s = String::from("re,im\n");
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let z = a[(i, j)];
            let _ = writeln!(s, "{:.11e},{:.11e}", z.re, z.im);
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_identities() {
        assert!(approx_eq(&tensor_product(&identity(2), &identity(2)), &identity(4), 0.0));
        let zz = tensor_product(&pauli_z(), &pauli_z());
        let want = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1., 0.), c(-1., 0.), c(-1., 0.), c(1., 0.)]));
        assert!(approx_eq(&zz, &want, 0.0));
    }

    #[test]
    fn kron_block_by_hand() {
        let p0 = projector(&ket(2, 0));
        let m = tensor_product(&p0, &pauli_x());
        for i in 0..4 {
            for j in 0..4 {
                let want = if i < 2 && j < 2 { pauli_x()[(i, j)] } else { c(0.0, 0.0) };
                assert_eq!(m[(i, j)], want);
            }
        }
    }

    #[test]
    fn embed_rejects_bad_site() {
        assert!(embed(&pauli_x(), 3, &[2, 2]).is_err());
        assert!(embed(&pauli_x(), 0, &[3, 2]).is_err());
    }

    #[test]
    fn csv_dump_shape() {
        let s = matrix_to_csv(&pauli_y());
        assert_eq!(s.lines().count(), 5);
        assert!(s.starts_with("re,im\n"));
    }
}
