use crate::error::{Error, Result};
use crate::qcore::{anticommutator, approx_eq, c, identity, is_hermitian, CMatrix};

/// Superposition of U_k = cos θ I − i sin θ H_k with H_k = Σ_p r_k^p V_p
/// over a set of pairwise anticommuting Hermitian involutions V_p.
#[derive(Debug, Clone)]
pub struct GeneralSuperposition {
    ops: Vec<CMatrix>,
    r1: Vec<f64>,
    r2: Vec<f64>,
    c1: f64,
    c2: f64,
}

impl GeneralSuperposition {
    pub fn new(ops: Vec<CMatrix>, r1: Vec<f64>, r2: Vec<f64>, c1: f64, c2: f64) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::InvalidArgument("empty operator set".into()));
        }
        let d = ops[0].nrows();
        for (k, v) in ops.iter().enumerate() {
            if v.shape() != (d, d) || !is_hermitian(v, 1e-10) {
                return Err(Error::InvalidArgument(format!("operator {k} is not a Hermitian {d}x{d} matrix")));
            }
        }
        for k in 0..ops.len() {
            for l in k..ops.len() {
                let want = if k == l { identity(d) * c(2.0, 0.0) } else { CMatrix::zeros(d, d) };
                if !approx_eq(&anticommutator(&ops[k], &ops[l]), &want, 1e-10) {
                    return Err(Error::InvalidArgument(format!("anticommutation {{V_{k}, V_{l}}} = 2δI violated")));
                }
            }
        }
        for (name, r) in [("r1", &r1), ("r2", &r2)] {
            if r.len() != ops.len() {
                return Err(Error::DimensionMismatch(format!("{name} has {} entries for {} operators", r.len(), ops.len())));
            }
            let n: f64 = r.iter().map(|x| x * x).sum::<f64>().sqrt();
            if (n - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidArgument(format!("{name} must have unit norm, got {n}")));
            }
        }
        if r1.iter().zip(&r2).all(|(a, b)| (a + b).abs() < 1e-12) {
            return Err(Error::InvalidArgument("r1 = -r2 is not allowed".into()));
        }
        if !(c1 > 0.0 && c2 > 0.0) || (c1 * c1 + c2 * c2 - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument("weights need c1, c2 > 0 and c1^2 + c2^2 = 1".into()));
        }
        Ok(Self { ops, r1, r2, c1, c2 })
    }

    pub fn dim(&self) -> usize {
        self.ops[0].nrows()
    }

    fn combine(&self, r: &[f64]) -> CMatrix {
        self.ops.iter().zip(r).fold(CMatrix::zeros(self.dim(), self.dim()), |acc, (v, &x)| acc + v * c(x, 0.0))
    }

    fn r_dot(&self) -> f64 {
        self.r1.iter().zip(&self.r2).map(|(a, b)| a * b).sum()
    }

    /// N²(θ) = 1 + 2c₁c₂(cos²θ + r⃗₁·r⃗₂ sin²θ).
    pub fn normalization(&self, theta: f64) -> f64 {
        1.0 + 2.0 * self.c1 * self.c2 * (theta.cos().powi(2) + self.r_dot() * theta.sin().powi(2))
    }

    /// Effective generator H̃ = Σ R_p V_p with R = R̃/|R̃|, R̃ = c₁r⃗₁ + c₂r⃗₂.
    pub fn hamiltonian(&self) -> CMatrix {
        let rt: Vec<f64> = self.r1.iter().zip(&self.r2).map(|(a, b)| self.c1 * a + self.c2 * b).collect();
        let n = rt.iter().map(|x| x * x).sum::<f64>().sqrt();
        let r: Vec<f64> = rt.iter().map(|x| x / n).collect();
        self.combine(&r)
    }

    /// (c₁U₁ + c₂U₂)/N at angle θ.
    pub fn evaluate(&self, theta: f64) -> CMatrix {
        let id = identity(self.dim());
        let u = |r: &[f64]| &id * c(theta.cos(), 0.0) - self.combine(r) * c(0.0, theta.sin());
        (u(&self.r1) * c(self.c1, 0.0) + u(&self.r2) * c(self.c2, 0.0)) / c(self.normalization(theta).sqrt(), 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{max_abs_diff, pauli_x, pauli_y, unitarity_residual};
    use crate::supu::SuperposedUnitary;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn reduces_to_qubit_case() {
        let g = GeneralSuperposition::new(vec![pauli_x(), pauli_y()], vec![1.0, 0.0], vec![0.0, 1.0], FRAC_1_SQRT_2, FRAC_1_SQRT_2).unwrap();
        let su = SuperposedUnitary::qubit(FRAC_PI_4, FRAC_PI_2, 1.0).unwrap();
        for d in [0.2, 1.0, 2.5] {
            assert!(max_abs_diff(&g.evaluate(d / 2.0), &su.evaluate(0.0, d)) < 1e-12);
        }
        let h = g.hamiltonian();
        assert!(max_abs_diff(&(&h * &h), &identity(2)) < 1e-10);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(GeneralSuperposition::new(vec![pauli_x(), pauli_y()], vec![1.0, 0.0], vec![-1.0, 0.0], FRAC_1_SQRT_2, FRAC_1_SQRT_2).is_err());
        let err = GeneralSuperposition::new(vec![pauli_x(), pauli_x()], vec![1.0, 0.0], vec![0.0, 1.0], FRAC_1_SQRT_2, FRAC_1_SQRT_2).unwrap_err();
        assert!(err.to_string().contains("V_0, V_1"));
    }

    #[test]
    fn two_qubit_representation() {
        let ops = vec![pauli_x().kronecker(&pauli_x()), pauli_y().kronecker(&pauli_x())];
        let g = GeneralSuperposition::new(ops, vec![0.6, 0.8], vec![0.0, 1.0], 0.6, 0.8).unwrap();
        for th in [0.3, 1.7] {
            assert!(unitarity_residual(&g.evaluate(th)) < 1e-10);
        }
    }
}
