use super::{interaction, DeviationState, IsingParams, ProbeCouplings};
use crate::error::{Error, Result};
use crate::optim::{bisect, nelder_mead};
use crate::qcore::{c, unitary_from_hamiltonian, CMatrix, SpinOperatorSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

/// Flip angles of the two probe pulses and the free-evolution delay (s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreparationParams {
    pub theta1: f64,
    pub theta2: f64,
    pub tau: f64,
}

impl PreparationParams {
    pub fn new(theta1: f64, theta2: f64, tau: f64) -> Result<Self> {
        if !(tau >= 0.0) || !theta1.is_finite() || !theta2.is_finite() {
            return Err(Error::InvalidArgument(format!("need finite angles and tau >= 0, got tau = {tau}")));
        }
        Ok(Self { theta1, theta2, tau })
    }

    /// Product-operator weights left by θ¹_y, θ²_{−x}, τ, (π/2)_y, gradient, (π/2)_{−y}.
    pub fn coefficients(&self, cpl: &ProbeCouplings) -> [f64; 4] {
        let (sa, ka) = (PI * cpl.j_pa * self.tau).sin_cos();
        let (sb, kb) = (PI * cpl.j_pb * self.tau).sin_cos();
        let s1 = self.theta1.sin();
        let cs = self.theta1.cos() * self.theta2.sin();
        [s1 * ka * kb, -cs * sa * kb, -cs * ka * sb, -s1 * sa * sb]
    }
}

/// Which product-operator weights a fit targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMode {
    /// All four weights.
    Full,
    /// I_x^P and 4I_x^P I_z^A I_z^B only; these alone drive ⟨σx⟩.
    XxOnly,
    /// 2I_x^P I_z^A and 2I_x^P I_z^B only; these alone drive ⟨σy⟩.
    YyOnly,
}

impl FitMode {
    fn indices(self) -> &'static [usize] {
        match self {
            FitMode::Full => &[0, 1, 2, 3],
            FitMode::XxOnly => &[0, 3],
            FitMode::YyOnly => &[1, 2],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreparationFit {
    pub params: PreparationParams,
    /// L1 distance between unit-normalized target and prepared weights.
    pub residual: f64,
    /// Residual above 1e-3.
    pub flagged: bool,
}

/// Longest delay searched: one period of the slower coupling.
pub fn tau_cap(cpl: &ProbeCouplings) -> f64 {
    1.0 / cpl.j_pa.abs().min(cpl.j_pb.abs())
}

/// Smallest delay τ with cos(π(J_PA+J_PB)τ)/cos(π(J_PA−J_PB)τ) = e^{2βJ} for which a
/// (π/2)_y pulse yields the target with positive weight on I_x^P.
pub fn solve_tau(beta_j: f64, cpl: &ProbeCouplings) -> Result<f64> {
    if !beta_j.is_finite() {
        return Err(Error::InvalidArgument("betaJ must be finite".into()));
    }
    if beta_j == 0.0 {
        return Ok(0.0);
    }
    let r = (2.0 * beta_j).exp();
    let g = |t: f64| {
        let (a, b) = (PI * cpl.j_pa * t, PI * cpl.j_pb * t);
        (a + b).cos() - r * (a - b).cos()
    };
    let cap = tau_cap(cpl);
    let dt = 1.0 / (400.0 * (cpl.j_pa.abs() + cpl.j_pb.abs()));
    let n = (cap / dt).ceil() as usize;
    for i in 0..n {
        let (t0, t1) = (i as f64 * dt, ((i + 1) as f64 * dt).min(cap));
        if g(t0).signum() == g(t1).signum() {
            continue;
        }
        if let Some(t) = bisect(g, t0, t1, 0.0) {
            let (a, b) = (PI * cpl.j_pa * t, PI * cpl.j_pb * t);
            if a.cos() * b.cos() > 0.0 {
                return Ok(t);
            }
        }
    }
    Err(Error::NoRoot(format!(
        "no delay in (0, {:.3e}] s reproduces betaJ = {beta_j}; reduce |betaJ| or change the couplings",
        cap
    )))
}

/// Apply the preparation sequence to the probe thermal deviation I_z^P (8×8).
pub fn simulate_preparation(params: &PreparationParams, cpl: &ProbeCouplings) -> CMatrix {
    let s = SpinOperatorSet::new(3);
    let rot = |op: CMatrix, angle: f64| unitary_from_hamiltonian(&op, angle);
    let conj = |u: &CMatrix, r: &CMatrix| u * r * u.adjoint();
    let mut rho = s.iz(0);
    rho = conj(&rot(s.iy(0), params.theta1), &rho);
    rho = conj(&rot(-s.ix(0), params.theta2), &rho);
    rho = conj(&unitary_from_hamiltonian(&interaction(cpl), params.tau), &rho);
    rho = conj(&rot(s.iy(0), FRAC_PI_2), &rho);
    rho = CMatrix::from_diagonal(&rho.diagonal());
    conj(&rot(-s.iy(0), FRAC_PI_2), &rho)
}

/// Normalized Hilbert-Schmidt overlap tr[AB]/(‖A‖‖B‖) of two Hermitian operators.
pub fn fidelity(a: &CMatrix, b: &CMatrix) -> f64 {
    let ab = (a * b).trace().re;
    let na = (a * a).trace().re.sqrt();
    let nb = (b * b).trace().re.sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        ab / (na * nb)
    }
}

fn unit(v: &[f64]) -> Option<Vec<f64>> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (n > 1e-12).then(|| v.iter().map(|x| x / n).collect())
}

/// Multi-start Nelder-Mead fit of (θ¹, θ², τ) to the target weights. θ¹ is kept in
/// [0, π] so the I_x^P weight keeps its sign; ties go to the shortest delay. The result
/// is put in a canonical gauge with θ² = π/2.
pub fn fit_preparation(ising: &IsingParams, cpl: &ProbeCouplings, mode: FitMode, seed: u64) -> Result<PreparationFit> {
    let idx = mode.indices();
    let coef = DeviationState { coefficients: ising.coefficients() }.coefficients;
    let target: Vec<f64> = idx.iter().map(|&i| coef[i]).collect();
    let target = unit(&target).ok_or_else(|| Error::InvalidArgument(format!("target has no weight in {mode:?} components")))?;
    let cap = tau_cap(cpl);
    let residual_at = |p: &PreparationParams| -> f64 {
        let all = p.coefficients(cpl);
        let got: Vec<f64> = idx.iter().map(|&i| all[i]).collect();
        match unit(&got) {
            Some(u) => u.iter().zip(&target).map(|(a, b)| (a - b).abs()).sum(),
            None => 2.0 * idx.len() as f64,
        }
    };
    let objective = |x: &[f64]| -> f64 {
        let th1 = x[0].clamp(0.0, PI);
        let s = x[2].clamp(1e-9, 1.0);
        let penalty = (x[0] - th1).abs() + (x[2] - s).abs();
        residual_at(&PreparationParams { theta1: th1, theta2: x[1], tau: s * cap }) + 10.0 * penalty
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut runs = Vec::with_capacity(64);
    for _ in 0..64 {
        let x0 = [rng.random_range(0.0..PI), rng.random_range(0.0..TAU), rng.random_range(1e-3..1.0)];
        let m = nelder_mead(objective, &x0, 0.05, 1e-14, 4000);
        let m = nelder_mead(objective, &m.x, 1e-3, 1e-15, 4000);
        runs.push(m);
    }
    let best = runs.iter().map(|m| m.fx).fold(f64::INFINITY, f64::min);
    let pick = runs
        .iter()
        .filter(|m| m.fx <= best + 1e-6)
        .min_by(|a, b| a.x[2].partial_cmp(&b.x[2]).unwrap())
        .expect("at least one run");
    let (th1, th2, tau) = (pick.x[0].clamp(0.0, PI), pick.x[1], pick.x[2].clamp(1e-9, 1.0) * cap);
    let (s1, cs) = (th1.sin(), th1.cos() * th2.sin());
    let theta1 = match mode {
        FitMode::Full => s1.atan2(cs),
        FitMode::XxOnly => FRAC_PI_2,
        FitMode::YyOnly => 0f64.atan2(cs),
    };
    let params = PreparationParams { theta1, theta2: FRAC_PI_2, tau };
    let residual = residual_at(&params);
    Ok(PreparationFit { params, residual, flagged: residual > 1e-3 })
}

/// ⟨σx⟩, ⟨σy⟩ of the probe after free evolution of a deviation operator for time t,
/// normalized by the I_x^P weight at t = 0.
pub fn evolve_quadratures(dev: &CMatrix, cpl: &ProbeCouplings, t: f64) -> (f64, f64) {
    let s = SpinOperatorSet::new(3);
    let u = unitary_from_hamiltonian(&interaction(cpl), t);
    let r = &u * dev * u.adjoint();
    let x = s.ix(0) * c(2.0, 0.0);
    let norm = (&x * dev).trace().re;
    ((&x * &r).trace().re / norm, (s.iy(0) * c(2.0, 0.0) * &r).trace().re / norm)
}
