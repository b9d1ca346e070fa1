//! Mpemba relaxation of a dipolar-coupled spin pair: population generator, decay modes,
//! prepared state families and crossing detection.

use crate::dynamics::eigen_decompose;
use crate::error::{Error, Result};
use crate::qcore::{c, CMatrix, CVector};
use nalgebra::{Matrix4, Vector4};
use std::f64::consts::PI;

/// Populations (p₀₀, p₀₁, p₁₀, p₁₁) of the two-spin Zeeman basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationVector {
    p: [f64; 4],
}

impl PopulationVector {
    pub fn new(p: [f64; 4]) -> Result<Self> {
        let min = p.iter().copied().fold(f64::INFINITY, f64::min);
        let sum: f64 = p.iter().sum();
        if !(min >= -1e-9) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidState { reason: format!("populations {p:?} sum to {sum}"), max_violation: (sum - 1.0).abs().max(-min) });
        }
        Ok(Self { p })
    }

    pub fn as_array(&self) -> [f64; 4] {
        self.p
    }

    fn vector(&self) -> Vector4<f64> {
        Vector4::from(self.p)
    }

    /// ½ Σ |pᵢ − qᵢ|.
    pub fn trace_distance(&self, other: &PopulationVector) -> f64 {
        0.5 * self.p.iter().zip(&other.p).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }

    /// Σ pᵢ ln(pᵢ/qᵢ), evaluated as pᵢ ln(1 + δᵢ/qᵢ) to keep precision near q.
    pub fn relative_entropy(&self, other: &PopulationVector) -> f64 {
        self.p
            .iter()
            .zip(&other.p)
            .map(|(&p, &q)| match (p > 0.0, q > 0.0) {
                (false, _) => 0.0,
                (true, false) => f64::INFINITY,
                (true, true) => p * ((p - q) / q).ln_1p(),
            })
            .sum()
    }
}

/// Relaxation parameters. K₀ in s⁻¹, Δ in rad/s, θ in rad.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MpembaParams {
    pub k0: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub theta: f64,
}

/// Dipolar coupling b = 2π × 5903 Hz and τ_c = 2.1 ps.
pub const DEFAULT_B: f64 = 2.0 * PI * 5903.0;
pub const DEFAULT_TAU_C: f64 = 2.1e-12;

impl MpembaParams {
    pub fn new(k0: f64, epsilon: f64, delta: f64, theta: f64) -> Result<Self> {
        if !(k0 > 0.0 && k0.is_finite()) {
            return Err(Error::InvalidArgument(format!("K0 must be > 0, got {k0}")));
        }
        if !(epsilon.abs() < 1e-3) {
            return Err(Error::InvalidArgument(format!("|epsilon| must be < 1e-3, got {epsilon}")));
        }
        if !delta.is_finite() || !theta.is_finite() {
            return Err(Error::InvalidArgument("delta and theta must be finite".into()));
        }
        Ok(Self { k0, epsilon, delta, theta })
    }

    /// K₀ = 12b²τ_c/5 with b in rad/s.
    pub fn from_dipolar(b: f64, tau_c: f64, epsilon: f64, delta: f64, theta: f64) -> Result<Self> {
        if !(tau_c > 0.0) {
            return Err(Error::InvalidArgument(format!("tau_c must be > 0, got {tau_c}")));
        }
        Self::new(12.0 * b * b * tau_c / 5.0, epsilon, delta, theta)
    }

    /// Conditions under which the population block decouples only approximately.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.delta.abs() < 100.0 * self.k0 {
            w.push(format!("K0/Delta = {:.3e} is not small; coherences leak into populations", self.k0 / self.delta.abs()));
        }
        w
    }

    /// Slowest relaxation rate 5K₀/24.
    pub fn slowest_rate(&self) -> f64 {
        5.0 * self.k0 / 24.0
    }

    /// Default observation window, six slowest lifetimes.
    pub fn window(&self) -> f64 {
        6.0 / self.slowest_rate()
    }
}

/// Population rate matrix; columns sum to zero.
pub fn build_lp(params: &MpembaParams) -> Matrix4<f64> {
    let (k, e) = (params.k0, params.epsilon);
    let up1 = k * (1.0 - e) / 16.0;
    let dn1 = k * (1.0 + e) / 16.0;
    let up2 = k * (1.0 - 2.0 * e) / 4.0;
    let dn2 = k * (1.0 + 2.0 * e) / 4.0;
    let zq = k / 24.0;
    Matrix4::new(
        -2.0 * up1 - up2, dn1, dn1, dn2,
        up1, -zq - dn1 - up1, zq, dn1,
        up1, zq, -zq - dn1 - up1, dn1,
        up2, up1, up1, -dn2 - 2.0 * dn1,
    )
}

/// Column-stacked indices of ρ₀₀, ρ₁₁, ρ₂₂, ρ₃₃, c = ρ₁₂, c* = ρ₂₁ in a 16-vector.
pub const ZQB_INDICES: [usize; 6] = [0, 5, 10, 15, 9, 6];

/// Zero-quantum block generator acting on (p₀₀, p₀₁, p₁₀, p₁₁, c, c*).
pub fn build_l0(params: &MpembaParams) -> CMatrix {
    let (k, e, d) = (params.k0, params.epsilon, params.delta);
    let lp = build_lp(params);
    let mut m = CMatrix::zeros(6, 6);
    for i in 0..4 {
        for j in 0..4 {
            m[(i, j)] = c(lp[(i, j)], 0.0);
        }
    }
    // population-coherence couplings
    let q = -k / 16.0;
    for col in [4usize, 5] {
        m[(0, col)] = c(k * (1.0 + e) / 16.0, 0.0);
        m[(1, col)] = c(q, 0.0);
        m[(2, col)] = c(q, 0.0);
        m[(3, col)] = c(k * (1.0 - e) / 16.0, 0.0);
    }
    for row in [4usize, 5] {
        m[(row, 0)] = c(k * (1.0 - e) / 16.0, 0.0);
        m[(row, 1)] = c(q, 0.0);
        m[(row, 2)] = c(q, 0.0);
        m[(row, 3)] = c(k * (1.0 + e) / 16.0, 0.0);
    }
    let diag = -k / 24.0 - k / 8.0;
    m[(4, 4)] = c(diag, d);
    m[(5, 5)] = c(diag, -d);
    m[(4, 5)] = c(k / 24.0, 0.0);
    m[(5, 4)] = c(k / 24.0, 0.0);
    m
}

/// 6×6 restriction of a 16×16 two-spin superoperator to the zero-quantum block.
pub fn zqb_projection(superop: &CMatrix) -> Result<CMatrix> {
    if superop.shape() != (16, 16) {
        return Err(Error::DimensionMismatch(format!("expected 16x16 superoperator, got {:?}", superop.shape())));
    }
    Ok(CMatrix::from_fn(6, 6, |i, j| superop[(ZQB_INDICES[i], ZQB_INDICES[j])]))
}

/// (1+2ε, 1, 1, 1−2ε)/4.
pub fn thermal_populations(epsilon: f64) -> PopulationVector {
    PopulationVector { p: [(1.0 + 2.0 * epsilon) / 4.0, 0.25, 0.25, (1.0 - 2.0 * epsilon) / 4.0] }
}

/// Exact null vector of L_p, normalized to unit trace.
pub fn steady_state(params: &MpembaParams) -> PopulationVector {
    let mut a = build_lp(params);
    for j in 0..4 {
        a[(3, j)] = 1.0;
    }
    let x = a.lu().solve(&Vector4::new(0.0, 0.0, 0.0, 1.0)).expect("rate matrix has a one-dimensional kernel");
    PopulationVector { p: [x[0], x[1], x[2], x[3]] }
}

/// Near state ρⁿ(θ) = 1/4 + ε(I₁z + cos2θ I₂z)/2 and far state ρ^f = 1/4 − ε(I₁z + I₂z)/2.
pub fn prepare_states(theta: f64, epsilon: f64) -> Result<(PopulationVector, PopulationVector)> {
    if !(0.0..=PI / 2.0).contains(&theta) {
        return Err(Error::InvalidArgument(format!("theta must lie in [0, pi/2], got {theta}")));
    }
    let cs = (2.0 * theta).cos();
    let e4 = epsilon / 4.0;
    let near = PopulationVector::new([0.25 + e4 * (1.0 + cs), 0.25 + e4 * (1.0 - cs), 0.25 - e4 * (1.0 - cs), 0.25 - e4 * (1.0 + cs)])?;
    let far = PopulationVector::new([(1.0 - 2.0 * epsilon) / 4.0, 0.25, 0.25, (1.0 + 2.0 * epsilon) / 4.0])?;
    Ok((near, far))
}

/// Pair used for the free-energy comparison: ρⁿ = 1/4 + ε(I₁z − I₂z)/2, ρ^f = 1/4 − ε(I₁z + I₂z)/2.
pub fn genuine_pair(epsilon: f64) -> Result<(PopulationVector, PopulationVector)> {
    let near = PopulationVector::new([0.25, 0.25 + epsilon / 2.0, 0.25 - epsilon / 2.0, 0.25])?;
    let far = PopulationVector::new([0.25 - epsilon / 2.0, 0.25, 0.25, 0.25 + epsilon / 2.0])?;
    Ok((near, far))
}

/// p(t) = p_ss + e^{L_p t}(p(0) − p_ss).
pub fn propagate(params: &MpembaParams, p0: &PopulationVector, t: f64) -> PopulationVector {
    let ss = steady_state(params);
    let dev = (build_lp(params) * t).exp() * (p0.vector() - ss.vector());
    let v = ss.vector() + dev;
    PopulationVector { p: [v[0], v[1], v[2], v[3]] }
}

/// Left eigenvectors w₁, w₂, w₃ to first order in ε.
pub fn left_vectors(epsilon: f64) -> [[f64; 4]; 3] {
    let e = epsilon;
    let s2 = 1.0 / 2f64.sqrt();
    let n2 = 1.0 / (4.0 + 8.0 / 3.0 * e * (5.0 + 4.0 * e)).sqrt();
    let n3 = 1.0 / (2.0 / 3.0 * (1.0 - e) * (3.0 - 5.0 * e)).sqrt();
    [
        [0.0, -s2, s2, 0.0],
        [n2 * (1.0 + 4.0 / 3.0 * e), -n2 * (1.0 + 2.0 / 3.0 * e), -n2 * (1.0 + 2.0 / 3.0 * e), n2],
        [n3 * (-1.0 + 14.0 / 3.0 * e), -n3 * e / 3.0, -n3 * e / 3.0, n3],
    ]
}

/// Overlaps aₙ = wₙ·p(0) with the three decay modes −(K₀/24){5, 6, 15}.
pub fn overlaps(p0: &PopulationVector, params: &MpembaParams) -> [f64; 3] {
    left_vectors(params.epsilon).map(|w| w.iter().zip(&p0.p).map(|(a, b)| a * b).sum())
}

/// Exact decay mode of L_p: rate, right and biorthogonal left vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationMode {
    pub eigenvalue: f64,
    pub right: [f64; 4],
    pub left: [f64; 4],
}

/// Exact modes sorted from the stationary one to the fastest.
pub fn exact_modes(params: &MpembaParams) -> Result<Vec<PopulationMode>> {
    let lp = build_lp(params);
    let m = CMatrix::from_fn(4, 4, |i, j| c(lp[(i, j)], 0.0));
    let es = eigen_decompose(&m)?;
    let mut modes: Vec<PopulationMode> = (0..4)
        .map(|k| {
            // Real spectrum: fix the arbitrary complex phase on the right vector.
            let col = es.right.column(k);
            let pivot = (0..4).max_by(|&a, &b| col[a].norm().partial_cmp(&col[b].norm()).unwrap()).unwrap();
            let phase = col[pivot] / col[pivot].norm();
            let right = [0, 1, 2, 3].map(|i| (col[i] / phase).re);
            let left = [0, 1, 2, 3].map(|i| (es.left[(k, i)] * phase).re);
            PopulationMode { eigenvalue: es.values[k].re, right, left }
        })
        .collect();
    modes.sort_by(|a, b| b.eigenvalue.partial_cmp(&a.eigenvalue).unwrap());
    Ok(modes)
}

/// Σₙ (wₙ·p(0)) e^{λₙt} vₙ over the exact modes.
pub fn resum(modes: &[PopulationMode], p0: &PopulationVector, t: f64) -> [f64; 4] {
    let mut out = [0.0; 4];
    for m in modes {
        let a: f64 = m.left.iter().zip(&p0.p).map(|(x, y)| x * y).sum();
        for i in 0..4 {
            out[i] += a * (m.eigenvalue * t).exp() * m.right[i];
        }
    }
    out
}

/// Populations of the ρⁿ(θ) family at time t.
pub fn closed_form_populations(theta: f64, params: &MpembaParams, t: f64) -> PopulationVector {
    let (k, e) = (params.k0, params.epsilon);
    let cs = (2.0 * theta).cos();
    let fast = (-5.0 * k * t / 8.0).exp();
    let slow = (-5.0 * k * t / 24.0).exp();
    PopulationVector {
        p: [
            0.25 + e / 2.0 + e / 4.0 * (cs - 1.0) * fast,
            0.25 + e / 4.0 * (1.0 - cs) * slow,
            0.25 - e / 4.0 * (1.0 - cs) * slow,
            0.25 - e / 2.0 + e / 4.0 * (1.0 - cs) * fast,
        ],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    TraceDistance,
    RelativeEntropy,
}

impl Metric {
    fn eval(self, p: &PopulationVector, q: &PopulationVector) -> f64 {
        match self {
            Metric::TraceDistance => p.trace_distance(q),
            Metric::RelativeEntropy => p.relative_entropy(q),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MpembaOutcome {
    /// Time after which the far state stays closer to equilibrium.
    pub crossing_time: Option<f64>,
    /// (t, D_f, D_n).
    pub curves: Vec<(f64, f64, f64)>,
    pub overlaps_far: [f64; 3],
    pub overlaps_near: [f64; 3],
}

/// Evolve both states on `samples` + 1 points over [0, window], measure them against the
/// exact steady state and bisect the last sign change of D_f − D_n.
pub fn detect_crossing(
    near: &PopulationVector,
    far: &PopulationVector,
    params: &MpembaParams,
    metric: Metric,
    window: f64,
    samples: usize,
) -> Result<MpembaOutcome> {
    let min_window = 5.0 / params.slowest_rate();
    if !(window >= min_window) {
        return Err(Error::InvalidArgument(format!("window {window:.4e} s is shorter than 5/(5K0/24) = {min_window:.4e} s")));
    }
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least 2 samples".into()));
    }
    let ss = steady_state(params);
    let lp = build_lp(params);
    let (dn0, df0) = (near.vector() - ss.vector(), far.vector() - ss.vector());
    let dist = |dev: Vector4<f64>| {
        let v = ss.vector() + dev;
        metric.eval(&PopulationVector { p: [v[0], v[1], v[2], v[3]] }, &ss)
    };
    let gap = |t: f64| {
        let u = (lp * t).exp();
        (dist(u * df0), dist(u * dn0))
    };
    let dt = window / samples as f64;
    let step = (lp * dt).exp();
    let (mut vf, mut vn) = (df0, dn0);
    let mut curves = Vec::with_capacity(samples + 1);
    for i in 0..=samples {
        curves.push((i as f64 * dt, dist(vf), dist(vn)));
        vf = step * vf;
        vn = step * vn;
    }
    let last_ahead = curves.iter().rposition(|&(_, f, n)| f >= n);
    let crossing_time = match last_ahead {
        Some(i) if i < samples => {
            let g = |t: f64| {
                let (f, n) = gap(t);
                f - n
            };
            crate::optim::bisect(g, curves[i].0, curves[i + 1].0, 1e-12 * window)
        }
        _ => None,
    };
    Ok(MpembaOutcome { crossing_time, curves, overlaps_far: overlaps(far, params), overlaps_near: overlaps(near, params) })
}

/// Least-squares slope of ln D over the samples with t in [t0, t1].
pub fn log_slope(curve: &[(f64, f64)], t0: f64, t1: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = curve.iter().filter(|(t, d)| *t >= t0 && *t <= t1 && *d > 0.0).map(|(t, d)| (*t, d.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    Some(sxy / sxx)
}

/// The (p₀₀, p₁₁) and (p₀₁, p₁₀) pairs read as two independent qubits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitSplit {
    pub outer_trace: f64,
    pub inner_trace: f64,
    /// (p₀₀, p₁₁) normalized by their sum.
    pub outer: [f64; 2],
    /// (p₀₁, p₁₀) normalized by their sum.
    pub inner: [f64; 2],
}

pub fn effective_two_qubit_view(traj: &[PopulationVector]) -> Vec<QubitSplit> {
    traj.iter()
        .map(|p| {
            let [a, b, cc, d] = p.p;
            let (ot, it) = (a + d, b + cc);
            QubitSplit { outer_trace: ot, inner_trace: it, outer: [a / ot, d / ot], inner: [b / it, cc / it] }
        })
        .collect()
}

/// Largest |c| reached from a population-only state under the zero-quantum block generator.
pub fn max_zqb_coherence(params: &MpembaParams, p0: &PopulationVector, t_end: f64, steps: usize) -> f64 {
    let l0 = build_l0(params);
    let step = (&l0 * c(t_end / steps as f64, 0.0)).exp();
    let mut v = CVector::from_iterator(6, p0.p.iter().map(|&x| c(x, 0.0)).chain([c(0.0, 0.0), c(0.0, 0.0)]));
    let mut worst = 0.0f64;
    for _ in 0..steps {
        v = &step * v;
        worst = worst.max(v[4].norm());
    }
    worst
}
