//! Superposed unitaries, Leggett-Garg correlators and their dephasing robustness.

mod circuit;
mod dephasing;
mod general;

pub use circuit::{ancilla_postselect, circuit_operator, interferometric_correlator, Interferometry};
pub use dephasing::{ancilla_map, dephased_k3_ancilla, dephased_k3_bloch, k3_lifetime, lifetime_gains, DephasedScan, DephasingMethod};
pub use general::GeneralSuperposition;

use crate::error::{Error, Result};
use crate::optim::golden_max;
use crate::qcore::{approx_eq, c, identity, pauli_x, pauli_y, pauli_z, CMatrix};
use std::f64::consts::PI;

/// Rotation exp(−i (n̂·σ) ω δ / 2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationSpec {
    axis: [f64; 3],
    omega: f64,
}

impl RotationSpec {
    pub fn new(axis: [f64; 3], omega: f64) -> Result<Self> {
        let n = norm3(axis);
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("rotation axis must be a unit vector, |n| = {n}")));
        }
        if !omega.is_finite() {
            return Err(Error::InvalidArgument("omega must be finite".into()));
        }
        Ok(Self { axis, omega })
    }

    /// Axis (cos φ, sin φ, 0) in the xy-plane.
    pub fn planar(phi: f64, omega: f64) -> Self {
        Self { axis: [phi.cos(), phi.sin(), 0.0], omega }
    }

    pub fn axis(&self) -> [f64; 3] {
        self.axis
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn generator(&self) -> CMatrix {
        sigma_dot(self.axis)
    }

    pub fn unitary(&self, delta: f64) -> CMatrix {
        let x = self.omega * delta / 2.0;
        identity(2) * c(x.cos(), 0.0) - self.generator() * c(0.0, x.sin())
    }
}

pub(crate) fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

pub(crate) fn sigma_dot(n: [f64; 3]) -> CMatrix {
    pauli_x() * c(n[0], 0.0) + pauli_y() * c(n[1], 0.0) + pauli_z() * c(n[2], 0.0)
}

/// (cos α U₀ + sin α U₁)/N for two rotations at a common frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperposedUnitary {
    u0: RotationSpec,
    u1: RotationSpec,
    alpha: f64,
}

impl SuperposedUnitary {
    pub fn new(u0: RotationSpec, u1: RotationSpec, alpha: f64) -> Result<Self> {
        if !(0.0..=PI / 2.0).contains(&alpha) {
            return Err(Error::InvalidArgument(format!("alpha must lie in [0, pi/2], got {alpha}")));
        }
        if (u0.omega - u1.omega).abs() > 1e-12 * u0.omega.abs().max(1.0) {
            return Err(Error::InvalidArgument("both rotations must share omega".into()));
        }
        let dot = dot3(u0.axis, u1.axis);
        if dot <= -1.0 + 1e-12 {
            return Err(Error::InvalidArgument("antiparallel axes (n·m = -1) give a singular superposition".into()));
        }
        Ok(Self { u0, u1, alpha })
    }

    /// U₀ about x, U₁ about (cos φ, sin φ, 0).
    pub fn qubit(alpha: f64, phi: f64, omega: f64) -> Result<Self> {
        Self::new(RotationSpec::planar(0.0, omega), RotationSpec::planar(phi, omega), alpha)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn omega(&self) -> f64 {
        self.u0.omega
    }

    pub fn u0(&self) -> RotationSpec {
        self.u0
    }

    pub fn u1(&self) -> RotationSpec {
        self.u1
    }

    /// Angle between the two axes, in [0, π).
    pub fn phi(&self) -> f64 {
        dot3(self.u0.axis, self.u1.axis).clamp(-1.0, 1.0).acos()
    }

    fn weights(&self) -> (f64, f64) {
        (self.alpha.cos(), self.alpha.sin())
    }

    /// cos α n̂ + sin α m̂ (unnormalized).
    fn combined_axis(&self) -> [f64; 3] {
        let (ca, sa) = self.weights();
        let (n, m) = (self.u0.axis, self.u1.axis);
        [ca * n[0] + sa * m[0], ca * n[1] + sa * m[1], ca * n[2] + sa * m[2]]
    }

    /// N² = 1 + sin 2α (cos²(ωδ/2) + n̂·m̂ sin²(ωδ/2)).
    pub fn normalization(&self, delta: f64) -> Result<f64> {
        let x = self.omega() * delta / 2.0;
        let n2 = 1.0 + (2.0 * self.alpha).sin() * (x.cos().powi(2) + dot3(self.u0.axis, self.u1.axis) * x.sin().powi(2));
        if n2 <= 0.0 {
            return Err(Error::Numerical(format!("non-positive normalization {n2}")));
        }
        Ok(n2)
    }

    /// Unit rotation axis ζ̂ of the superposed unitary.
    pub fn zeta(&self) -> [f64; 3] {
        let v = self.combined_axis();
        let n = norm3(v);
        [v[0] / n, v[1] / n, v[2] / n]
    }

    /// Rotation angle f(δ) with U = cos(f/2) I − i sin(f/2) ζ̂·σ.
    pub fn rotation_angle(&self, delta: f64) -> f64 {
        let (ca, sa) = self.weights();
        let x = self.omega() * delta / 2.0;
        2.0 * (norm3(self.combined_axis()) * x.sin()).atan2((ca + sa) * x.cos())
    }

    /// Closed-form unitary for the interval [t0, tf].
    pub fn evaluate(&self, t0: f64, tf: f64) -> CMatrix {
        let (ca, sa) = self.weights();
        let d = tf - t0;
        let n = self.normalization(d).expect("normalization positive under invariants").sqrt();
        (self.u0.unitary(d) * c(ca, 0.0) + self.u1.unitary(d) * c(sa, 0.0)) / c(n, 0.0)
    }

    /// Speed of evolution g(t) = df/dt = ω |cos α n̂ + sin α m̂| (cos α + sin α) / N².
    pub fn soe(&self, t: f64) -> f64 {
        let (ca, sa) = self.weights();
        let n2 = self.normalization(t).expect("positive");
        self.omega() * norm3(self.combined_axis()) * (ca + sa) / n2
    }

    /// C(ti, tj) for observable `q`.
    pub fn correlator(&self, q: &CMatrix, ti: f64, tj: f64) -> Result<f64> {
        correlator(&self.evaluate(ti, tj), q)
    }
}

pub(crate) fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// C = ½ tr[Q U Q U†] for a dichotomic observable (Q² = I).
pub fn correlator(u: &CMatrix, q: &CMatrix) -> Result<f64> {
    check_dichotomic(q)?;
    let d = q.nrows() as f64;
    Ok((q * u * q * u.adjoint()).trace().re / d)
}

fn check_dichotomic(q: &CMatrix) -> Result<()> {
    if !q.is_square() || !approx_eq(&(q * q), &identity(q.nrows()), 1e-10) || !approx_eq(q, &q.adjoint(), 1e-10) {
        return Err(Error::InvalidArgument("observable must be Hermitian with Q^2 = I".into()));
    }
    Ok(())
}

/// LGI scan of Kₙ(t) = (n−1) C(t) − C((n−1)t).
#[derive(Debug, Clone, PartialEq)]
pub struct LgiScan {
    pub n: usize,
    pub t: Vec<f64>,
    pub k: Vec<f64>,
    pub k_max: f64,
    pub t_argmax: f64,
}

/// 600 uniform points over ωt ∈ (0, π].
pub fn default_grid(omega: f64) -> Vec<f64> {
    (1..=600).map(|i| PI * i as f64 / (600.0 * omega)).collect()
}

pub fn k3_scan(su: &SuperposedUnitary, q: &CMatrix, t_grid: &[f64]) -> Result<LgiScan> {
    kn_scan(su, q, 3, t_grid)
}

pub fn kn_scan(su: &SuperposedUnitary, q: &CMatrix, n: usize, t_grid: &[f64]) -> Result<LgiScan> {
    check_dichotomic(q)?;
    kn_scan_with(n, t_grid, |t| su.correlator(q, 0.0, t).expect("checked observable"))
}

/// Kₙ scan from any time-translation invariant correlator C(t).
pub fn kn_scan_with<F: Fn(f64) -> f64>(n: usize, t_grid: &[f64], corr: F) -> Result<LgiScan> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("order n must be >= 3, got {n}")));
    }
    if t_grid.is_empty() {
        return Err(Error::InvalidArgument("empty time grid".into()));
    }
    let m = (n - 1) as f64;
    let kf = |t: f64| m * corr(t) - corr(m * t);
    let k: Vec<f64> = t_grid.iter().map(|&t| kf(t)).collect();
    let (mut imax, mut kmax) = (0, f64::MIN);
    for (i, &v) in k.iter().enumerate() {
        if v > kmax {
            imax = i;
            kmax = v;
        }
    }
    let mut t_arg = t_grid[imax];
    if t_grid.len() >= 3 {
        let lo = t_grid[imax.saturating_sub(1)];
        let hi = t_grid[(imax + 1).min(t_grid.len() - 1)];
        let (tr, kr) = golden_max(&kf, lo, hi, 1e-10 * hi.abs().max(1.0));
        if kr > kmax {
            kmax = kr;
            t_arg = tr;
        }
    }
    Ok(LgiScan { n, t: t_grid.to_vec(), k, k_max: kmax, t_argmax: t_arg })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{max_abs_diff, unitarity_residual};
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn normalization_examples() {
        let a0 = SuperposedUnitary::qubit(0.0, 1.0, 1.0).unwrap();
        assert!((a0.normalization(0.7).unwrap() - 1.0).abs() < 1e-15);
        let s = SuperposedUnitary::qubit(FRAC_PI_4, PI / 2.0, 1.0).unwrap();
        assert!((s.normalization(PI).unwrap() - 1.0).abs() < 1e-12);
        let same = SuperposedUnitary::qubit(FRAC_PI_4, 0.0, 1.0).unwrap();
        assert!((same.normalization(0.3).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn evaluate_reduces_and_is_unitary() {
        let s = SuperposedUnitary::qubit(0.0, 2.0, 1.3).unwrap();
        let u = s.evaluate(0.2, 1.1);
        let want = crate::qcore::unitary_from_hamiltonian(&(pauli_x() * c(0.5 * 1.3, 0.0)), 0.9);
        assert!(max_abs_diff(&u, &want) < 1e-14);
        let s = SuperposedUnitary::qubit(0.7, 2.5, 1.0).unwrap();
        assert!(unitarity_residual(&s.evaluate(0.0, 2.2)) < 1e-12);
    }

    #[test]
    fn closed_form_angle_matches_matrix() {
        let s = SuperposedUnitary::qubit(0.4, 2.0, 1.0).unwrap();
        let u = s.evaluate(0.0, 1.3);
        let f = s.rotation_angle(1.3);
        assert!((u[(0, 0)].re - (f / 2.0).cos()).abs() < 1e-12);
        let cz = s.correlator(&pauli_z(), 0.0, 1.3).unwrap();
        assert!((cz - f.cos()).abs() < 1e-12);
    }

    #[test]
    fn product_law_fails() {
        let s = SuperposedUnitary::qubit(FRAC_PI_4, PI / 2.0, 1.0).unwrap();
        let t = 0.7;
        let gap = max_abs_diff(&s.evaluate(0.0, 2.0 * t), &(s.evaluate(t, 2.0 * t) * s.evaluate(0.0, t)));
        assert!(gap > 0.01);
    }

    #[test]
    fn rejects_invalid() {
        assert!(SuperposedUnitary::qubit(0.9 * PI, 1.0, 1.0).is_err());
        assert!(SuperposedUnitary::qubit(0.3, PI, 1.0).is_err());
        assert!(RotationSpec::new([1.0, 0.1, 0.0], 1.0).is_err());
        assert!(correlator(&identity(2), &(pauli_z() * c(2.0, 0.0))).is_err());
    }

    #[test]
    fn plain_rotation_correlator() {
        let s = SuperposedUnitary::qubit(0.0, 1.0, 1.0).unwrap();
        for t in [0.0, 0.4, 2.0] {
            assert!((s.correlator(&pauli_z(), 0.0, t).unwrap() - t.cos()).abs() < 1e-14);
        }
    }

    #[test]
    fn plain_k3_max_is_three_halves() {
        let s = SuperposedUnitary::qubit(0.0, 1.0, 1.0).unwrap();
        let scan = k3_scan(&s, &pauli_z(), &default_grid(1.0)).unwrap();
        assert!((scan.k_max - 1.5).abs() < 1e-9);
        assert!((scan.t_argmax - PI / 3.0).abs() < 1e-5);
    }

    #[test]
    fn soe_matches_finite_difference() {
        let s = SuperposedUnitary::qubit(FRAC_PI_4, PI / 2.0, 1.0).unwrap();
        let h = 1e-5;
        for t in [0.3, 1.1, 2.9] {
            let fd = (s.rotation_angle(t + h) - s.rotation_angle(t - h)) / (2.0 * h);
            assert!((fd - s.soe(t)).abs() < 1e-6);
        }
        let plain = SuperposedUnitary::qubit(0.0, 2.0, 1.5).unwrap();
        assert!((plain.soe(0.4) - 1.5).abs() < 1e-14);
    }
}
