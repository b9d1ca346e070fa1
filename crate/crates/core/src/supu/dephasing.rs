use super::{LgiScan, SuperposedUnitary};
use crate::dynamics::{build_liouvillian, vec_col, unvec, DissipatorTerm};
use crate::error::{Error, Result};
use crate::qcore::{c, embed, identity, partial_trace_matrix, pauli_z, projector, CMatrix, CVector, HermitianObservable};
use std::f64::consts::PI;

/// Dephased K₃ curve together with the LGI-violation lifetime.
#[derive(Debug, Clone, PartialEq)]
pub struct DephasedScan {
    pub scan: LgiScan,
    /// Last down-crossing of K₃ through 1; `None` if K₃ never exceeds 1.
    pub lifetime: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DephasingMethod {
    Bloch,
    Ancilla,
}

/// Last time K crosses 1 from above, linearly interpolated.
pub fn k3_lifetime(k: &[f64], t: &[f64]) -> Option<f64> {
    (0..k.len().saturating_sub(1))
        .rev()
        .find(|&i| k[i] > 1.0 && k[i + 1] <= 1.0)
        .map(|i| t[i] + (k[i] - 1.0) / (k[i] - k[i + 1]) * (t[i + 1] - t[i]))
}

fn scan_from_correlator(cs: &[f64], dt: f64, n: usize) -> DephasedScan {
    let t: Vec<f64> = (0..=n).map(|i| i as f64 * dt).collect();
    let k: Vec<f64> = (0..=n).map(|i| 2.0 * cs[i] - cs[2 * i]).collect();
    let (mut imax, mut kmax) = (0, f64::MIN);
    for (i, &v) in k.iter().enumerate().skip(1) {
        if v > kmax {
            kmax = v;
            imax = i;
        }
    }
    let lifetime = k3_lifetime(&k, &t);
    DephasedScan { scan: LgiScan { n: 3, t_argmax: t[imax], t, k, k_max: kmax }, lifetime }
}

fn check_window(gamma: f64, window: f64, dt: f64) -> Result<usize> {
    if !(gamma >= 0.0) {
        return Err(Error::InvalidArgument(format!("gamma must be >= 0, got {gamma}")));
    }
    if !(window > 0.0 && dt > 0.0) || dt > window {
        return Err(Error::InvalidArgument("window and dt must be positive with dt <= window".into()));
    }
    Ok((window / dt).round() as usize)
}

/// Bloch equations Ṡ = g(t) ζ̂ × S − γ (Sx, Sy, 0) from S(0) = ẑ, integrated with RK4 over [0, 2·window].
pub fn dephased_k3_bloch(su: &SuperposedUnitary, gamma: f64, window: f64, dt: f64) -> Result<DephasedScan> {
    let n = check_window(gamma, window, dt)?;
    let z = su.zeta();
    let rhs = |t: f64, s: [f64; 3]| -> [f64; 3] {
        let g = su.soe(t);
        [
            g * (z[1] * s[2] - z[2] * s[1]) - gamma * s[0],
            g * (z[2] * s[0] - z[0] * s[2]) - gamma * s[1],
            g * (z[0] * s[1] - z[1] * s[0]),
        ]
    };
    let add = |a: [f64; 3], b: [f64; 3], h: f64| [a[0] + h * b[0], a[1] + h * b[1], a[2] + h * b[2]];
    let mut s = [0.0, 0.0, 1.0];
    let mut cs = Vec::with_capacity(2 * n + 1);
    cs.push(s[2]);
    for i in 0..2 * n {
        let t = i as f64 * dt;
        let k1 = rhs(t, s);
        let k2 = rhs(t + dt / 2.0, add(s, k1, dt / 2.0));
        let k3 = rhs(t + dt / 2.0, add(s, k2, dt / 2.0));
        let k4 = rhs(t + dt, add(s, k3, dt));
        for j in 0..3 {
            s[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        cs.push(s[2]);
    }
    Ok(scan_from_correlator(&cs, dt, n))
}

struct AncillaModel {
    l: crate::dynamics::Liouvillian,
    ancilla: CMatrix,
    post: CMatrix,
}

fn ancilla_model(su: &SuperposedUnitary, gamma: f64) -> Result<AncillaModel> {
    if !(gamma >= 0.0) {
        return Err(Error::InvalidArgument(format!("gamma must be >= 0, got {gamma}")));
    }
    let w = su.omega();
    let p0 = projector(&crate::qcore::ket(2, 0));
    let p1 = projector(&crate::qcore::ket(2, 1));
    let h = p0.kronecker(&(su.u0().generator() * c(w / 2.0, 0.0))) + p1.kronecker(&(su.u1().generator() * c(w / 2.0, 0.0)));
    let za = embed(&pauli_z(), 0, &[2, 2])?;
    let zs = embed(&pauli_z(), 1, &[2, 2])?;
    let terms = [DissipatorTerm::new(za.clone(), za, gamma / 2.0)?, DissipatorTerm::new(zs.clone(), zs, gamma / 2.0)?];
    let l = build_liouvillian(&HermitianObservable::new(h)?, &terms)?;
    let a = su.alpha();
    let av = CVector::from_vec(vec![c(a.cos(), 0.0), c(a.sin(), 0.0)]);
    let plus = CMatrix::from_element(2, 2, c(0.5, 0.0));
    Ok(AncillaModel { l, ancilla: projector(&av), post: plus })
}

/// Post-selected map W_t(X) = tr_A[(|+⟩⟨+|⊗I) e^{Lt}(|α⟩⟨α|⊗X)] / tr[same with X = I/2].
pub fn ancilla_map(su: &SuperposedUnitary, gamma: f64, t: f64, x: &CMatrix) -> Result<CMatrix> {
    let m = ancilla_model(su, gamma)?;
    let prop = m.l.propagator(t);
    let apply = |x: &CMatrix| -> Result<CMatrix> {
        let r = unvec(&(&prop * vec_col(&m.ancilla.kronecker(x))), 4);
        partial_trace_matrix(&(m.post.kronecker(&identity(2)) * r), &[2, 2], &[1])
    };
    let norm = apply(&(identity(2) * c(0.5, 0.0)))?.trace().re;
    if norm < 1e-9 {
        return Err(Error::Numerical(format!("post-selection probability {norm:.3e} below 1e-9")));
    }
    Ok(apply(x)? / c(norm, 0.0))
}

/// K₃ from the ancilla-assisted Lindblad model with σz dephasing on ancilla and system.
pub fn dephased_k3_ancilla(su: &SuperposedUnitary, gamma: f64, window: f64, dt: f64) -> Result<DephasedScan> {
    let n = check_window(gamma, window, dt)?;
    let m = ancilla_model(su, gamma)?;
    let prop = m.l.propagator(dt);
    let q = pauli_z();
    let mut v1 = vec_col(&m.ancilla.kronecker(&q));
    let mut v2 = vec_col(&m.ancilla.kronecker(&(identity(2) * c(0.5, 0.0))));
    // tr[O X] = vec(Oᵀ)·vec(X)
    let o1 = vec_col(&(m.post.kronecker(&q) * c(0.5, 0.0)).transpose());
    let o2 = vec_col(&m.post.kronecker(&identity(2)).transpose());
    let mut cs = Vec::with_capacity(2 * n + 1);
    for i in 0..=2 * n {
        let num = o1.dot(&v1).re;
        let den = o2.dot(&v2).re;
        if den < 1e-9 {
            return Err(Error::Numerical(format!("post-selection probability {den:.3e} below 1e-9 at step {i}")));
        }
        cs.push(num / den);
        if i < 2 * n {
            v1 = &prop * v1;
            v2 = &prop * v2;
        }
    }
    Ok(scan_from_correlator(&cs, dt, n))
}

/// Lifetimes τ_α and gains τ_α/τ_{α₀} on the window [0, 40/γ] with dt = 10⁻³·2π/ω.
pub fn lifetime_gains(phi: f64, gamma: f64, alphas: &[f64], omega: f64, method: DephasingMethod) -> Result<Vec<(f64, f64, f64)>> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument("lifetime needs gamma > 0".into()));
    }
    let window = 40.0 / gamma;
    let dt = 1e-3 * 2.0 * PI / omega;
    let mut taus = Vec::with_capacity(alphas.len());
    for &a in alphas {
        let su = SuperposedUnitary::qubit(a, phi, omega)?;
        let scan = match method {
            DephasingMethod::Bloch => dephased_k3_bloch(&su, gamma, window, dt)?,
            DephasingMethod::Ancilla => dephased_k3_ancilla(&su, gamma, window, dt)?,
        };
        taus.push(scan.lifetime.unwrap_or(0.0));
    }
    let base = taus.first().copied().unwrap_or(0.0);
    Ok(alphas
        .iter()
        .zip(&taus)
        .map(|(&a, &tau)| (a, tau, if base > 0.0 { tau / base } else { f64::NAN }))
        .collect())
}
