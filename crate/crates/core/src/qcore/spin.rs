use super::{c, embed, pauli_x, pauli_y, pauli_z, CMatrix};
use crate::error::{Error, Result};

/// Spin-1/2 angular momentum operators embedded in an n-spin register.
#[derive(Debug, Clone)]
pub struct SpinOperatorSet {
    n: usize,
    x: Vec<CMatrix>,
    y: Vec<CMatrix>,
    z: Vec<CMatrix>,
}

impl SpinOperatorSet {
    pub fn new(n: usize) -> Self {
        let dims = vec![2; n];
        let half = c(0.5, 0.0);
        let build = |p: CMatrix| -> Vec<CMatrix> {
            (0..n).map(|k| embed(&(&p * half), k, &dims).expect("valid site")).collect()
        };
        Self { n, x: build(pauli_x()), y: build(pauli_y()), z: build(pauli_z()) }
    }

    pub fn n_spins(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn ix(&self, k: usize) -> CMatrix {
        self.x[k].clone()
    }

    pub fn iy(&self, k: usize) -> CMatrix {
        self.y[k].clone()
    }

    pub fn iz(&self, k: usize) -> CMatrix {
        self.z[k].clone()
    }

    pub fn iplus(&self, k: usize) -> CMatrix {
        &self.x[k] + &self.y[k] * c(0.0, 1.0)
    }

    pub fn iminus(&self, k: usize) -> CMatrix {
        &self.x[k] - &self.y[k] * c(0.0, 1.0)
    }

    /// Ī_i·Ī_j.
    pub fn dot(&self, i: usize, j: usize) -> CMatrix {
        &self.x[i] * &self.x[j] + &self.y[i] * &self.y[j] + &self.z[i] * &self.z[j]
    }

    pub fn total_z(&self) -> CMatrix {
        self.z.iter().fold(CMatrix::zeros(self.dim(), self.dim()), |acc, z| acc + z)
    }
}

/// Rank-2 spherical tensor component T_{2m} for the spin pair (i, j).
pub fn spherical_tensor(ops: &SpinOperatorSet, i: usize, j: usize, m: i32) -> Result<CMatrix> {
    if i >= ops.n_spins() || j >= ops.n_spins() || i == j {
        return Err(Error::InvalidArgument(format!("bad spin pair ({i},{j})")));
    }
    let (zi, zj) = (ops.iz(i), ops.iz(j));
    Ok(match m {
        0 => (&zi * &zj * c(3.0, 0.0) - ops.dot(i, j)) * c(1.0 / 6f64.sqrt(), 0.0),
        1 => (ops.iplus(i) * &zj + &zi * ops.iplus(j)) * c(-0.5, 0.0),
        -1 => (ops.iminus(i) * &zj + &zi * ops.iminus(j)) * c(0.5, 0.0),
        2 => ops.iplus(i) * ops.iplus(j) * c(0.5, 0.0),
        -2 => ops.iminus(i) * ops.iminus(j) * c(0.5, 0.0),
        _ => return Err(Error::InvalidArgument(format!("m must be in -2..=2, got {m}"))),
    })
}

#[cfg(test)]
mod tests {
    use super::super::*;

    #[test]
    fn angular_momentum_algebra() {
        let s = SpinOperatorSet::new(3);
        for k in 0..3 {
            let lhs = commutator(&s.ix(k), &s.iy(k));
            assert!(approx_eq(&lhs, &(s.iz(k) * c(0.0, 1.0)), 1e-14));
            let lhs = commutator(&s.iy(k), &s.iz(k));
            assert!(approx_eq(&lhs, &(s.ix(k) * c(0.0, 1.0)), 1e-14));
            for l in 0..3 {
                if l != k {
                    assert!(commutator(&s.ix(k), &s.iz(l)).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn tensor_adjoint_relations() {
        let s = SpinOperatorSet::new(2);
        let t = |m| spherical_tensor(&s, 0, 1, m).unwrap();
        assert!(is_hermitian(&t(0), 1e-14));
        assert!(approx_eq(&t(1).adjoint(), &(-t(-1)), 1e-14));
        assert!(approx_eq(&t(2).adjoint(), &t(-2), 1e-14));
        assert!((t(2) * t(2)).norm() < 1e-14);
        assert!(spherical_tensor(&s, 0, 1, 3).is_err());
    }

    #[test]
    fn tensor_grading() {
        let s = SpinOperatorSet::new(2);
        let jz = s.total_z();
        for m in -2..=2 {
            let t = spherical_tensor(&s, 0, 1, m).unwrap();
            assert!(approx_eq(&commutator(&jz, &t), &(&t * c(m as f64, 0.0)), 1e-14));
        }
    }
}
