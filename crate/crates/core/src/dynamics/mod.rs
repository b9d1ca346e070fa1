//! Liouvillian construction, propagation, decay modes and FID synthesis.
//!
//! Superoperators act on column-stacked density matrices: vec(AXB) = (Bᵀ⊗A)vec(X).

mod relaxation;
mod spectral;

pub use relaxation::{dipolar_liouvillian, two_spin_hamiltonian, RelaxationSpec};
pub use spectral::{eigen_decompose, EigenSystem};

use crate::error::{Error, Result};
use crate::qcore::{c, identity, unitary_from_hamiltonian, CMatrix, CVector, DensityOperator, HermitianObservable, C64};
use std::fmt::Write as _;

/// Weighted dissipator Γ[A,B](ρ) = AρB − ½{BA, ρ}.
#[derive(Debug, Clone, PartialEq)]
pub struct DissipatorTerm {
    pub a: CMatrix,
    pub b: CMatrix,
    pub rate: f64,
}

impl DissipatorTerm {
    pub fn new(a: CMatrix, b: CMatrix, rate: f64) -> Result<Self> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::InvalidArgument(format!("dissipator rate must be >= 0, got {rate}")));
        }
        if !a.is_square() || a.shape() != b.shape() {
            return Err(Error::DimensionMismatch(format!("A is {:?}, B is {:?}", a.shape(), b.shape())));
        }
        Ok(Self { a, b, rate })
    }

    /// Standard Lindblad term Γ[A, A†].
    pub fn lindblad(a: CMatrix, rate: f64) -> Result<Self> {
        let b = a.adjoint();
        Self::new(a, b, rate)
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }
}

pub fn vec_col(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

pub fn unvec(v: &CVector, d: usize) -> CMatrix {
    CMatrix::from_column_slice(d, d, v.as_slice())
}

/// Superoperator of (X ↦ A X B).
pub fn sandwich(a: &CMatrix, b: &CMatrix) -> CMatrix {
    b.transpose().kronecker(a)
}

/// rate·(Bᵀ⊗A − ½ I⊗(BA) − ½ (BA)ᵀ⊗I).
pub fn build_dissipator(term: &DissipatorTerm) -> CMatrix {
    let d = term.dim();
    let id = identity(d);
    let ba = &term.b * &term.a;
    let half = c(0.5, 0.0);
    (sandwich(&term.a, &term.b) - id.kronecker(&ba) * half - ba.transpose().kronecker(&id) * half) * c(term.rate, 0.0)
}

/// Generator of a Markovian master equation in superoperator form.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    dim: usize,
    superop: CMatrix,
    hamiltonian_part: CMatrix,
    dissipative_part: CMatrix,
}

/// Eigenmode of a Liouvillian with biorthonormal left/right matrices.
#[derive(Debug, Clone)]
pub struct DecayMode {
    pub eigenvalue: C64,
    /// Right eigenvector as a d×d matrix.
    pub right: CMatrix,
    /// Left eigenvector as a d×d matrix; overlap with ρ is tr[left† ρ].
    pub left: CMatrix,
}

impl DecayMode {
    pub fn overlap(&self, rho: &CMatrix) -> C64 {
        (self.left.adjoint() * rho).trace()
    }
}

pub fn build_liouvillian(h: &HermitianObservable, terms: &[DissipatorTerm]) -> Result<Liouvillian> {
    let d = h.dim();
    let id = identity(d);
    let hm = h.matrix();
    let ham = (id.kronecker(hm) - hm.transpose().kronecker(&id)) * c(0.0, -1.0);
    let mut dis = CMatrix::zeros(d * d, d * d);
    for (k, t) in terms.iter().enumerate() {
        if t.dim() != d {
            return Err(Error::DimensionMismatch(format!("term {k} has dimension {}, Hamiltonian {d}", t.dim())));
        }
        dis += build_dissipator(t);
    }
    Ok(Liouvillian::from_parts(d, ham, dis))
}

impl Liouvillian {
    fn from_parts(dim: usize, hamiltonian_part: CMatrix, dissipative_part: CMatrix) -> Self {
        let superop = &hamiltonian_part + &dissipative_part;
        Self { dim, superop, hamiltonian_part, dissipative_part }
    }

    /// Wrap a raw d²×d² superoperator (no Hamiltonian split).
    pub fn from_superoperator(superop: CMatrix) -> Result<Self> {
        let n = superop.nrows();
        let d = (n as f64).sqrt().round() as usize;
        if d * d != n || !superop.is_square() {
            return Err(Error::DimensionMismatch(format!("superoperator is {}x{}", n, superop.ncols())));
        }
        Ok(Self::from_parts(d, CMatrix::zeros(n, n), superop))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn superoperator(&self) -> &CMatrix {
        &self.superop
    }

    pub fn hamiltonian_part(&self) -> &CMatrix {
        &self.hamiltonian_part
    }

    pub fn dissipative_part(&self) -> &CMatrix {
        &self.dissipative_part
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        unvec(&(&self.superop * vec_col(rho)), self.dim)
    }

    /// max |vec(I)† L|: zero for trace-preserving generators.
    pub fn trace_preservation_residual(&self) -> f64 {
        let id = vec_col(&identity(self.dim));
        (id.adjoint() * &self.superop).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// max |L(ρ†) − L(ρ)†| over the Hermitian basis matrices.
    pub fn hermiticity_residual(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                for z in [c(1.0, 0.0), c(0.0, 1.0)] {
                    if i == j && z.im != 0.0 {
                        continue;
                    }
                    let mut m = CMatrix::zeros(d, d);
                    m[(i, j)] = z;
                    m[(j, i)] = z.conj();
                    let out = self.apply(&m);
                    worst = worst.max(crate::qcore::max_abs_diff(&out, &out.adjoint()));
                }
            }
        }
        worst
    }

    /// exp(L t) by scaling and squaring with Padé approximation.
    pub fn propagator(&self, t: f64) -> CMatrix {
        (&self.superop * c(t, 0.0)).exp()
    }

    /// Propagate any matrix (states or deviation operators) without validation.
    pub fn propagate_matrix(&self, rho: &CMatrix, t: f64) -> CMatrix {
        unvec(&(self.propagator(t) * vec_col(rho)), self.dim)
    }

    /// ρ(t) = exp(L t) ρ(0), revalidated.
    pub fn propagate(&self, rho0: &DensityOperator, t: f64) -> Result<DensityOperator> {
        if !(t >= 0.0) {
            return Err(Error::InvalidArgument(format!("time must be >= 0, got {t}")));
        }
        self.check_dim(rho0.dim())?;
        if t == 0.0 {
            return Ok(rho0.clone());
        }
        DensityOperator::new(self.propagate_matrix(rho0.matrix(), t), rho0.layout().clone())
    }

    /// Trajectory sampled on `t_grid` (ascending) using one propagator per step size.
    pub fn trajectory(&self, rho0: &CMatrix, t_grid: &[f64]) -> Vec<CMatrix> {
        let mut out = Vec::with_capacity(t_grid.len());
        let mut v = vec_col(rho0);
        let mut t_prev = 0.0;
        let mut cache: Option<(f64, CMatrix)> = None;
        for &t in t_grid {
            let dt = t - t_prev;
            if dt != 0.0 {
                let p = match &cache {
                    Some((h, p)) if ((h - dt) / dt).abs() < 1e-9 => p.clone(),
                    _ => {
                        let p = self.propagator(dt);
                        cache = Some((dt, p.clone()));
                        p
                    }
                };
                v = p * v;
            }
            out.push(unvec(&v, self.dim));
            t_prev = t;
        }
        out
    }

    /// Fixed-step classical RK4 integration, kept as an independent check of `propagate`.
    pub fn propagate_rk4(&self, rho0: &CMatrix, t: f64, dt: f64) -> CMatrix {
        let steps = (t / dt).ceil().max(1.0) as usize;
        let h = c(t / steps as f64, 0.0);
        let l = &self.superop;
        let mut v = vec_col(rho0);
        let half = c(0.5, 0.0);
        for _ in 0..steps {
            let k1 = l * &v;
            let k2 = l * (&v + &k1 * (h * half));
            let k3 = l * (&v + &k2 * (h * half));
            let k4 = l * (&v + &k3 * h);
            v += (k1 + k2 * c(2.0, 0.0) + k3 * c(2.0, 0.0) + k4) * (h / c(6.0, 0.0));
        }
        unvec(&v, self.dim)
    }

    /// Biorthonormal eigenmodes sorted by |Re λ| ascending.
    pub fn decay_modes(&self) -> Result<Vec<DecayMode>> {
        let es = eigen_decompose(&self.superop)?;
        let d = self.dim;
        let mut modes: Vec<DecayMode> = (0..es.values.len())
            .map(|k| DecayMode {
                eigenvalue: es.values[k],
                right: unvec(&es.right.column(k).into_owned(), d),
                left: unvec(&es.left.row(k).transpose().map(|z| z.conj()), d),
            })
            .collect();
        modes.sort_by(|a, b| {
            a.eigenvalue.re.abs().total_cmp(&b.eigenvalue.re.abs()).then(a.eigenvalue.im.abs().total_cmp(&b.eigenvalue.im.abs()))
        });
        Ok(modes)
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if d != self.dim {
            return Err(Error::DimensionMismatch(format!("state dimension {d}, Liouvillian {}", self.dim)));
        }
        Ok(())
    }
}

/// Σ a_n e^{λ_n t} v_n from a set of modes.
pub fn resum_modes(modes: &[DecayMode], rho0: &CMatrix, t: f64) -> CMatrix {
    let d = rho0.nrows();
    let mut out = CMatrix::zeros(d, d);
    for m in modes {
        out += &m.right * (m.overlap(rho0) * (m.eigenvalue * t).exp());
    }
    out
}

/// Complex FID S(t) = tr[(σx + iσy)_k ρ(t)] e^{−t·lb} under unitary evolution by `h`.
pub fn fid_signal(rho0: &CMatrix, h: &HermitianObservable, detect_spin: usize, n_spins: usize, t_grid: &[f64], line_broadening: f64) -> Result<Vec<C64>> {
    if detect_spin >= n_spins {
        return Err(Error::InvalidIndex { index: detect_spin, len: n_spins });
    }
    let d = 1usize << n_spins;
    if rho0.nrows() != d || h.dim() != d {
        return Err(Error::DimensionMismatch(format!("expected dimension {d}")));
    }
    let raise = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    let det = crate::qcore::embed(&raise, detect_spin, &vec![2; n_spins])?;
    Ok(t_grid
        .iter()
        .map(|&t| {
            let u = unitary_from_hamiltonian(h.matrix(), t);
            let rt = &u * rho0 * u.adjoint();
            (&det * rt).trace() * (-t * line_broadening).exp()
        })
        .collect())
}

/// FID under a dissipative generator.
pub fn fid_signal_lindblad(rho0: &CMatrix, l: &Liouvillian, detect_spin: usize, n_spins: usize, t_grid: &[f64]) -> Result<Vec<C64>> {
    let d = 1usize << n_spins;
    if rho0.nrows() != d || l.dim() != d {
        return Err(Error::DimensionMismatch(format!("expected dimension {d}")));
    }
    let raise = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    let det = crate::qcore::embed(&raise, detect_spin, &vec![2; n_spins])?;
    Ok(l.trajectory(rho0, t_grid).iter().map(|r| (&det * r).trace()).collect())
}

/// "t,re,im" CSV text.
pub fn time_series_csv(t: &[f64], s: &[C64]) -> String {
    let mut out = String::from("t,re,im\n");
    for (t, z) in t.iter().zip(s) {
        let _ = writeln!(out, "{:.11e},{:.11e},{:.11e}", t, z.re, z.im);
    }
    out
}
