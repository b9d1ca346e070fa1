use crate::error::{Error, Result};
use crate::qcore::{c, CMatrix, C64};
use nalgebra::Schur;

/// Eigenvalues with right eigenvectors (columns) and biorthonormal left eigenvectors (rows).
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<C64>,
    pub right: CMatrix,
    /// Satisfies left * right = I.
    pub left: CMatrix,
    pub condition: f64,
}

const MAX_CONDITION: f64 = 1e8;

/// Diagonalize a general complex matrix through its Schur form.
pub fn eigen_decompose(m: &CMatrix) -> Result<EigenSystem> {
    let n = m.nrows();
    let scale = m.norm().max(1e-300);
    let (q, t) = Schur::new(m.clone()).unpack();
    let small = 1e-13 * scale;
    let mut x = CMatrix::zeros(n, n);
    for k in 0..n {
        let lam = t[(k, k)];
        x[(k, k)] = c(1.0, 0.0);
        for i in (0..k).rev() {
            let mut num = c(0.0, 0.0);
            for j in (i + 1)..=k {
                num += t[(i, j)] * x[(j, k)];
            }
            let mut den = t[(i, i)] - lam;
            if den.norm() < small {
                if num.norm() < 1e-10 * scale {
                    continue;
                }
                den = c(small, 0.0);
            }
            x[(i, k)] = -num / den;
        }
        let nrm = x.column(k).norm();
        x.column_mut(k).scale_mut(1.0 / nrm);
    }
    let right = q * x;
    let left = right
        .clone()
        .try_inverse()
        .ok_or(Error::Defective { condition: f64::INFINITY })?;
    let condition = right.norm() * left.norm();
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Err(Error::Defective { condition });
    }
    let values = (0..n).map(|k| t[(k, k)]).collect();
    Ok(EigenSystem { values, right, left, condition })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reconstructs_matrix() {
        let m = CMatrix::from_fn(5, 5, |i, j| c(((i * 7 + j * 3) % 5) as f64 - 2.0, ((i + 2 * j) % 3) as f64 * 0.4));
        let es = eigen_decompose(&m).unwrap();
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(es.values.clone()));
        let back = &es.right * d * &es.left;
        assert!((back - &m).norm() < 1e-10);
    }

    #[test]
    fn jordan_block_is_defective() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(eigen_decompose(&m), Err(Error::Defective { .. })));
    }
}
