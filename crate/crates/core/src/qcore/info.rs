use super::{
    c, hermitian_eigen, hermitian_eigenvalues, hermitian_function, partial_trace_matrix, pauli_x, pauli_y, pauli_z,
    CMatrix, CVector, DensityOperator, EIG_CLAMP,
};
use crate::error::{Error, Result};
use crate::optim::nelder_mead;
use std::f64::consts::{LN_2, PI};

fn entropy_of_eigs(vals: &[f64]) -> f64 {
    vals.iter().filter(|&&p| p > EIG_CLAMP).map(|&p| -p * p.ln()).sum()
}

fn entropy_of(m: &CMatrix) -> f64 {
    entropy_of_eigs(&hermitian_eigenvalues(m))
}

/// Binary entropy in nats.
fn h2(p: f64) -> f64 {
    entropy_of_eigs(&[p, 1.0 - p])
}

/// Von Neumann entropy in nats.
pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    entropy_of(rho.matrix())
}

/// Reorder parties so that `order[k]` becomes party k.
fn permute(m: &CMatrix, dims: &[usize], order: &[usize]) -> CMatrix {
    let n = dims.len();
    let mut strides = vec![1usize; n];
    for k in (0..n.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let new_dims: Vec<usize> = order.iter().map(|&p| dims[p]).collect();
    let total: usize = dims.iter().product();
    let map: Vec<usize> = (0..total)
        .map(|mut idx| {
            let mut old = 0;
            for k in (0..n).rev() {
                old += (idx % new_dims[k]) * strides[order[k]];
                idx /= new_dims[k];
            }
            old
        })
        .collect();
    CMatrix::from_fn(total, total, |i, j| m[(map[i], map[j])])
}

/// Bipartite matrix with side `a` first, then `b`; other parties traced out.
fn bipartite(rho: &DensityOperator, a: &[usize], b: &[usize]) -> Result<(CMatrix, usize, usize)> {
    let dims = rho.layout().dims();
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument("both sides of a cut must be non-empty".into()));
    }
    for &i in a.iter().chain(b) {
        if i >= dims.len() {
            return Err(Error::InvalidIndex { index: i, len: dims.len() });
        }
    }
    if a.iter().any(|i| b.contains(i)) {
        return Err(Error::InvalidArgument("cut sides overlap".into()));
    }
    let mut keep: Vec<usize> = a.iter().chain(b).copied().collect();
    keep.sort_unstable();
    let reduced = partial_trace_matrix(rho.matrix(), dims, &keep)?;
    let kdims: Vec<usize> = keep.iter().map(|&i| dims[i]).collect();
    let order: Vec<usize> = a.iter().chain(b).map(|p| keep.iter().position(|k| k == p).unwrap()).collect();
    let m = permute(&reduced, &kdims, &order);
    let da = a.iter().map(|&i| dims[i]).product();
    let db = b.iter().map(|&i| dims[i]).product();
    Ok((m, da, db))
}

/// I(A:B) = S(A) + S(B) − S(AB) in nats.
pub fn mutual_information(rho: &DensityOperator, a: &[usize], b: &[usize]) -> Result<f64> {
    let (m, da, db) = bipartite(rho, a, b)?;
    let ra = partial_trace_matrix(&m, &[da, db], &[0])?;
    let rb = partial_trace_matrix(&m, &[da, db], &[1])?;
    Ok(entropy_of(&ra) + entropy_of(&rb) - entropy_of(&m))
}

/// Discord value with optimizer status.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscordResult {
    pub value: f64,
    pub converged: bool,
}

/// Σ_k p_k S(ρ_O|k) for measurement basis given by the columns of `basis`.
fn conditional_entropy(m: &CMatrix, dm: usize, d_o: usize, basis: &CMatrix) -> f64 {
    let mut total = 0.0;
    for k in 0..dm {
        let e = basis.column(k);
        let mut cond = CMatrix::zeros(d_o, d_o);
        for i in 0..dm {
            for j in 0..dm {
                let w = e[i].conj() * e[j];
                if w.norm() < 1e-300 {
                    continue;
                }
                cond += m.view((i * d_o, j * d_o), (d_o, d_o)) * w;
            }
        }
        let p = cond.trace().re;
        if p > 1e-14 {
            total += p * entropy_of(&(cond / c(p, 0.0)));
        }
    }
    total
}

fn qubit_basis(theta: f64, phi: f64) -> CMatrix {
    let (ct, st) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let e = num_complex::Complex64::from_polar(1.0, phi);
    CMatrix::from_row_slice(2, 2, &[c(ct, 0.0), -e.conj() * st, e * st, c(ct, 0.0)])
}

/// Unitary exp(iH) from d² real parameters of a Hermitian H.
fn unitary_from_params(d: usize, x: &[f64]) -> CMatrix {
    let mut h = CMatrix::zeros(d, d);
    let mut k = 0;
    for i in 0..d {
        h[(i, i)] = c(x[k], 0.0);
        k += 1;
    }
    for i in 0..d {
        for j in (i + 1)..d {
            h[(i, j)] = c(x[k], x[k + 1]);
            h[(j, i)] = c(x[k], -x[k + 1]);
            k += 2;
        }
    }
    let (vals, vecs) = hermitian_eigen(&h);
    let diag = CVector::from_iterator(d, vals.iter().map(|&v| num_complex::Complex64::from_polar(1.0, v)));
    &vecs * CMatrix::from_diagonal(&diag) * vecs.adjoint()
}

/// Discord with projective measurements on the `measured` side.
pub fn quantum_discord(rho: &DensityOperator, measured: &[usize], other: &[usize]) -> Result<DiscordResult> {
    let (m, dm, d_o) = bipartite(rho, measured, other)?;
    let rm = partial_trace_matrix(&m, &[dm, d_o], &[0])?;
    let offset = entropy_of(&rm) - entropy_of(&m);
    let (best, converged) = if dm == 2 {
        let f = |x: &[f64]| conditional_entropy(&m, 2, d_o, &qubit_basis(x[0], x[1]));
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for i in 0..32 {
            let th = PI * i as f64 / 31.0;
            for j in 0..32 {
                let ph = 2.0 * PI * j as f64 / 32.0;
                let v = f(&[th, ph]);
                if v < best.0 {
                    best = (v, th, ph);
                }
            }
        }
        let r = nelder_mead(f, &[best.1, best.2], PI / 64.0, 1e-15, 4000);
        (r.fx.min(best.0), r.converged)
    } else {
        let np = dm * dm;
        let f = |x: &[f64]| conditional_entropy(&m, dm, d_o, &unitary_from_params(dm, x));
        let start = vec![0.0; np];
        let f0 = f(&start);
        let r = nelder_mead(f, &start, 0.1, 1e-14, 20000);
        (r.fx.min(f0), r.converged)
    };
    let raw = offset + best;
    Ok(DiscordResult { value: raw.max(0.0), converged })
}

/// Trace distance ½‖a − b‖₁.
pub fn trace_distance(a: &DensityOperator, b: &DensityOperator) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!("{} vs {}", a.dim(), b.dim())));
    }
    let diff = a.matrix() - b.matrix();
    Ok(0.5 * hermitian_eigenvalues(&diff).iter().map(|x| x.abs()).sum::<f64>())
}

/// Relative entropy tr[a(ln a − ln b)] in nats; `f64::INFINITY` when supp(a) ⊄ supp(b).
pub fn relative_entropy(a: &DensityOperator, b: &DensityOperator) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!("{} vs {}", a.dim(), b.dim())));
    }
    let (bv, bvec) = hermitian_eigen(b.matrix());
    let a_in_b = bvec.adjoint() * a.matrix() * &bvec;
    let mut cross = 0.0;
    for (k, &lam) in bv.iter().enumerate() {
        let w = a_in_b[(k, k)].re;
        if lam <= EIG_CLAMP {
            if w > 1e-9 {
                return Ok(f64::INFINITY);
            }
        } else {
            cross += w * lam.ln();
        }
    }
    Ok(-von_neumann_entropy(a) - cross)
}

/// How an entanglement value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntanglementMethod {
    /// Entropy of the reduced state of a pure state.
    PureEntropy,
    /// Closed-form relative entropy of entanglement for Bell-diagonal (up to local unitaries) states.
    BellDiagonalRelativeEntropy,
    /// Entanglement of formation via concurrence, used when the state is not Bell-diagonal.
    Formation,
    /// Weighted sum over a classical flag register.
    Flagged,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntanglementReport {
    /// Value in nats.
    pub value: f64,
    /// Value divided by ln of the smaller local dimension.
    pub normalized: f64,
    pub method: EntanglementMethod,
}

/// Wootters concurrence of a two-qubit matrix.
pub fn concurrence(m: &CMatrix) -> f64 {
    let yy = pauli_y().kronecker(&pauli_y());
    let tilde = &yy * m.map(|z| z.conj()) * &yy;
    let sq = hermitian_function(m, |x| x.max(0.0).sqrt());
    let r = &sq * tilde * &sq;
    let mut l: Vec<f64> = hermitian_eigenvalues(&r).iter().map(|&x| x.max(0.0).sqrt()).collect();
    l.sort_by(|a, b| b.total_cmp(a));
    (l[0] - l[1] - l[2] - l[3]).max(0.0)
}

fn two_qubit_entanglement(m: &CMatrix) -> (f64, EntanglementMethod) {
    let purity = (m * m).trace().re;
    if purity > 1.0 - 1e-9 {
        let ra = partial_trace_matrix(m, &[2, 2], &[0]).expect("2x2 layout");
        return (entropy_of(&ra), EntanglementMethod::PureEntropy);
    }
    let id = super::identity(2);
    let local = [pauli_x(), pauli_y(), pauli_z()]
        .iter()
        .flat_map(|p| [p.kronecker(&id), id.kronecker(p)])
        .map(|op| (m * op).trace().norm())
        .fold(0.0, f64::max);
    if local < 1e-9 {
        let lmax = hermitian_eigenvalues(m).into_iter().fold(f64::MIN, f64::max);
        let v = if lmax > 0.5 { LN_2 - h2(lmax) } else { 0.0 };
        return (v.max(0.0), EntanglementMethod::BellDiagonalRelativeEntropy);
    }
    let cc = concurrence(m);
    let x = (1.0 + (1.0 - cc * cc).max(0.0).sqrt()) / 2.0;
    (h2(x), EntanglementMethod::Formation)
}

/// Entanglement across the cut `a : b`.
pub fn entanglement_measure(rho: &DensityOperator, a: &[usize], b: &[usize]) -> Result<EntanglementReport> {
    let (m, da, db) = bipartite(rho, a, b)?;
    let purity = (&m * &m).trace().re;
    if purity > 1.0 - 1e-9 {
        let ra = partial_trace_matrix(&m, &[da, db], &[0])?;
        let v = entropy_of(&ra);
        return Ok(EntanglementReport {
            value: v,
            normalized: v / (da.min(db) as f64).ln(),
            method: EntanglementMethod::PureEntropy,
        });
    }
    if da == 2 && db == 2 {
        let (v, method) = two_qubit_entanglement(&m);
        return Ok(EntanglementReport { value: v, normalized: v / LN_2, method });
    }
    // Try to interpret one extra party as a classical flag.
    let dims = rho.layout().dims();
    for (side, rest) in [(a, b), (b, a)] {
        if side.len() == 2 && rest.len() == 1 {
            for (fi, &flag) in side.iter().enumerate() {
                let other = side[1 - fi];
                if dims[other] == 2 && dims[rest[0]] == 2 {
                    let (x, y) = if std::ptr::eq(side, a) { (other, rest[0]) } else { (rest[0], other) };
                    if let Ok(r) = flagged_entanglement(rho, flag, x, y) {
                        return Ok(r);
                    }
                }
            }
        }
    }
    Err(Error::Unsupported(format!("entanglement for mixed {da}x{db} cut")))
}

/// E = Σ_k p_k E_{A:B}(ρ_k) when `flag` is a classical register (block diagonal in its basis).
pub fn flagged_entanglement(rho: &DensityOperator, flag: usize, a: usize, b: usize) -> Result<EntanglementReport> {
    let dims = rho.layout().dims();
    let (m, df, dab) = bipartite(rho, &[flag], &[a, b])?;
    if dims[a] != 2 || dims[b] != 2 {
        return Err(Error::Unsupported("flagged entanglement needs qubit parties".into()));
    }
    for i in 0..df {
        for j in 0..df {
            if i != j && m.view((i * dab, j * dab), (dab, dab)).iter().any(|z| z.norm() > 1e-9) {
                return Err(Error::Unsupported("flag register is not classical".into()));
            }
        }
    }
    let mut total = 0.0;
    for k in 0..df {
        let block = m.view((k * dab, k * dab), (dab, dab)).into_owned();
        let p = block.trace().re;
        if p > 1e-14 {
            total += p * two_qubit_entanglement(&(block / c(p, 0.0))).0;
        }
    }
    Ok(EntanglementReport { value: total, normalized: total / LN_2, method: EntanglementMethod::Flagged })
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use super::*;

    fn layout2() -> SubsystemLayout {
        SubsystemLayout::qubits(2)
    }

    fn bell_vec() -> CVector {
        CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]) / c(2f64.sqrt(), 0.0)
    }

    #[test]
    fn entropy_examples() {
        let pure = DensityOperator::from_pure(&ket(4, 2), layout2()).unwrap();
        assert!(von_neumann_entropy(&pure).abs() < 1e-12);
        let mixed = DensityOperator::maximally_mixed(SubsystemLayout::single(3));
        assert!((von_neumann_entropy(&mixed) - 3f64.ln()).abs() < 1e-12);
        let cc = DensityOperator::diagonal(&[0.5, 0.0, 0.0, 0.5], layout2()).unwrap();
        assert!((von_neumann_entropy(&cc) - LN_2).abs() < 1e-12);
    }

    #[test]
    fn mutual_information_examples() {
        let bell = DensityOperator::from_pure(&bell_vec(), layout2()).unwrap();
        assert!((mutual_information(&bell, &[0], &[1]).unwrap() - 2.0 * LN_2).abs() < 1e-10);
        let cc = DensityOperator::diagonal(&[0.5, 0.0, 0.0, 0.5], layout2()).unwrap();
        assert!((mutual_information(&cc, &[0], &[1]).unwrap() - LN_2).abs() < 1e-12);
        let prod = DensityOperator::diagonal(&[0.2 * 0.6, 0.2 * 0.4, 0.8 * 0.6, 0.8 * 0.4], layout2()).unwrap();
        assert!(mutual_information(&prod, &[0], &[1]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn distance_examples() {
        let z0 = DensityOperator::from_pure(&ket(2, 0), SubsystemLayout::qubits(1)).unwrap();
        let z1 = DensityOperator::from_pure(&ket(2, 1), SubsystemLayout::qubits(1)).unwrap();
        assert!((trace_distance(&z0, &z1).unwrap() - 1.0).abs() < 1e-12);
        assert!(trace_distance(&z0, &z0).unwrap().abs() < 1e-12);
        let mm = DensityOperator::maximally_mixed(SubsystemLayout::qubits(1));
        assert!(relative_entropy(&mm, &z0).unwrap().is_infinite());
        assert!(relative_entropy(&mm, &mm).unwrap().abs() < 1e-12);
        assert!((relative_entropy(&z0, &mm).unwrap() - LN_2).abs() < 1e-12);
    }

    #[test]
    fn entanglement_examples() {
        let bell = DensityOperator::from_pure(&bell_vec(), layout2()).unwrap();
        let r = entanglement_measure(&bell, &[0], &[1]).unwrap();
        assert!((r.normalized - 1.0).abs() < 1e-10);
        assert_eq!(r.method, EntanglementMethod::PureEntropy);
        let sep = DensityOperator::diagonal(&[0.0, 0.5, 0.5, 0.0], layout2()).unwrap();
        let r = entanglement_measure(&sep, &[0], &[1]).unwrap();
        assert!(r.value.abs() < 1e-12);
        assert_eq!(r.method, EntanglementMethod::BellDiagonalRelativeEntropy);
        // Werner state with p = 0.8: REE = ln2 − h((1+3p)/4).
        let w = projector(&bell_vec()) * c(0.8, 0.0) + identity(4) * c(0.05, 0.0);
        let w = DensityOperator::new(w, layout2()).unwrap();
        let r = entanglement_measure(&w, &[0], &[1]).unwrap();
        assert!((r.value - (LN_2 - h2(0.85))).abs() < 1e-12);
        // Not Bell-diagonal: falls back to formation.
        let x = DensityOperator::diagonal(&[0.7, 0.1, 0.1, 0.1], layout2()).unwrap();
        assert_eq!(entanglement_measure(&x, &[0], &[1]).unwrap().method, EntanglementMethod::Formation);
    }

    #[test]
    fn discord_zero_for_classical() {
        let cc = DensityOperator::diagonal(&[0.5, 0.0, 0.0, 0.5], layout2()).unwrap();
        let d = quantum_discord(&cc, &[0], &[1]).unwrap();
        assert!(d.value < 1e-9);
    }
}
