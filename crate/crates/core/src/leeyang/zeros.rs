use super::{quadratures, CoamoebaPoint, IsingParams, ProbeCouplings};
use crate::error::{Error, Result};
use crate::optim::{bisect, golden_min};
use std::f64::consts::PI;

/// Simultaneous null of both probe quadratures. `t` is `None` for points found on the
/// torus rather than along the time line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyZero {
    pub t: Option<f64>,
    pub point: CoamoebaPoint,
}

/// Angular resolution for merging coamoeba points.
const DEDUP: f64 = 1e-6;
/// Grid points per period of the fastest quadrature component.
const SAMPLES_PER_PERIOD: f64 = 400.0;
/// Cells per half-angle axis in the torus scan.
const TORUS_GRID: usize = 256;

fn fields_vanish(coef: &[f64; 4]) -> bool {
    coef[1].abs() <= 1e-15 * coef[0] && coef[2].abs() <= 1e-15 * coef[0]
}

fn push_unique(out: &mut Vec<LyZero>, z: LyZero) {
    if !out.iter().any(|o| o.point.torus_distance(&z.point) < DEDUP) {
        out.push(z);
    }
}

/// Zeros read off the probe coherence on [0, t_max]: sign changes of ⟨σx⟩ when ⟨σy⟩ ≡ 0,
/// otherwise minima of |⟨σx⟩ + i⟨σy⟩| refined by golden section. A null needs both
/// quadratures below `tol` times the running maximum of the coherence. When fields are on,
/// the isolated zeros of the quadratures over the whole torus are appended with `t = None`.
pub fn find_zeros(ising: &IsingParams, cpl: &ProbeCouplings, t_max: f64, tol: f64) -> Result<Vec<LyZero>> {
    let mut out = line_zeros(ising, cpl, t_max, tol)?;
    if !fields_vanish(&ising.coefficients()) {
        for p in torus_zeros(ising) {
            push_unique(&mut out, LyZero { t: None, point: p });
        }
    }
    Ok(out)
}

fn line_zeros(ising: &IsingParams, cpl: &ProbeCouplings, t_max: f64, tol: f64) -> Result<Vec<LyZero>> {
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::InvalidArgument(format!("t_max must be > 0, got {t_max}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol must be > 0, got {tol}")));
    }
    let coef = ising.coefficients();
    let q = |t: f64| quadratures(&coef, PI * cpl.j_pa * t, PI * cpl.j_pb * t);
    let modulus = |t: f64| {
        let (x, y) = q(t);
        x.hypot(y)
    };
    let dt = 1.0 / (SAMPLES_PER_PERIOD * (cpl.j_pa.abs() + cpl.j_pb.abs()));
    let n = (t_max / dt).ceil() as usize;
    let ts: Vec<f64> = (0..=n).map(|i| (i as f64 * dt).min(t_max)).collect();
    let vals: Vec<(f64, f64)> = ts.iter().map(|&t| q(t)).collect();
    let mut amp = 0.0f64;
    let running: Vec<f64> = vals
        .iter()
        .map(|(x, y)| {
            amp = amp.max(x.hypot(*y));
            amp
        })
        .collect();
    let mut out = Vec::new();
    let accept = |t: f64, scale: f64, out: &mut Vec<LyZero>| {
        let (x, y) = q(t);
        if x.abs() < tol * scale && y.abs() < tol * scale {
            push_unique(out, LyZero { t: Some(t), point: cpl.angles(t) });
        }
    };
    if fields_vanish(&coef) {
        for i in 0..n {
            let (a, b) = (vals[i].0, vals[i + 1].0);
            if a == 0.0 || a.signum() != b.signum() && b != 0.0 {
                if let Some(t) = bisect(|t| q(t).0, ts[i], ts[i + 1], 0.0) {
                    accept(t, running[i + 1], &mut out);
                }
            }
        }
    } else {
        let m: Vec<f64> = vals.iter().map(|(x, y)| x.hypot(*y)).collect();
        for i in 1..n {
            if m[i] <= m[i - 1] && m[i] <= m[i + 1] && m[i] < 0.05 * running[i] {
                let tol_t = (1e-12 * (ts[i + 1] - ts[i - 1])).max(8.0 * f64::EPSILON * ts[i + 1]);
                let (t, _) = golden_min(modulus, ts[i - 1], ts[i + 1], tol_t);
                accept(t, running[i + 1], &mut out);
            }
        }
    }
    Ok(out)
}

/// Isolated common zeros of the two quadratures over the torus, found by a sign-change
/// scan on a 256×256 grid of half angles and polished by Newton's method. Empty when
/// h_A = h_B = 0, where ⟨σy⟩ vanishes identically and the zero set is a curve.
pub fn torus_zeros(ising: &IsingParams) -> Vec<CoamoebaPoint> {
    let coef = ising.coefficients();
    if fields_vanish(&coef) {
        return Vec::new();
    }
    let [ca, cb, cc, cd] = coef;
    let n = TORUS_GRID;
    let h = PI / n as f64;
    let grid: Vec<Vec<(f64, f64)>> = (0..=n).map(|i| (0..=n).map(|j| quadratures(&coef, i as f64 * h, j as f64 * h)).collect()).collect();
    let mixed = |v: [f64; 4]| v.iter().any(|x| *x <= 0.0) && v.iter().any(|x| *x >= 0.0);
    let mut out: Vec<LyZero> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let corners = [grid[i][j], grid[i + 1][j], grid[i][j + 1], grid[i + 1][j + 1]];
            if !mixed(corners.map(|c| c.0)) || !mixed(corners.map(|c| c.1)) {
                continue;
            }
            let (mut a, mut b) = ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
            let mut converged = false;
            for _ in 0..50 {
                let (x, y) = quadratures(&coef, a, b);
                if x.abs() < 1e-14 && y.abs() < 1e-14 {
                    converged = true;
                    break;
                }
                let (sa, ka) = a.sin_cos();
                let (sb, kb) = b.sin_cos();
                let j11 = (-ca * sa * kb - cd * ka * sb) / ca;
                let j12 = (-ca * ka * sb - cd * sa * kb) / ca;
                let j21 = (cb * ka * kb - cc * sa * sb) / ca;
                let j22 = (-cb * sa * sb + cc * ka * kb) / ca;
                let det = j11 * j22 - j12 * j21;
                if det.abs() < 1e-14 {
                    break;
                }
                a -= (j22 * x - j12 * y) / det;
                b -= (-j21 * x + j11 * y) / det;
            }
            let near = (a - (i as f64 + 0.5) * h).abs() < 2.0 * h && (b - (j as f64 + 0.5) * h).abs() < 2.0 * h;
            if converged && near {
                push_unique(&mut out, LyZero { t: None, point: CoamoebaPoint::new(2.0 * a, 2.0 * b) });
            }
        }
    }
    out.into_iter().map(|z| z.point).collect()
}

/// Is (βh_A, βh_B) in the amoeba of the Lee-Yang polynomial at this βJ?
pub fn amoeba_member(ising: &IsingParams) -> bool {
    let coef = ising.coefficients();
    if fields_vanish(&coef) {
        // ⟨σx⟩ vanishes at (θ₁, θ₂) = (π, 0) for any coupling.
        return true;
    }
    !torus_zeros(ising).is_empty()
}

/// Coamoeba points sampled by the torus line θᵢ = 2πJ_{Pi} t for t ∈ [0, t_max].
pub fn sample_coamoeba(ising: &IsingParams, cpl: &ProbeCouplings, t_max: f64) -> Result<Vec<CoamoebaPoint>> {
    Ok(line_zeros(ising, cpl, t_max, 1e-4)?.into_iter().map(|z| z.point).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn certify(ising: &IsingParams, zs: &[LyZero]) {
        let p = ising.polynomial();
        for z in zs {
            assert!(p.eval_polar(ising.moduli(), z.point).norm() < 1e-6, "{z:?}");
        }
    }

    #[test]
    fn zero_field_zeros_are_polynomial_zeros() {
        let ising = IsingParams::new(0.5, 0.0, 0.0).unwrap();
        let zs = find_zeros(&ising, &ProbeCouplings::default(), 0.3, 1e-4).unwrap();
        assert!(zs.len() > 10);
        certify(&ising, &zs);
    }

    #[test]
    fn minus_one_one_root() {
        let cpl = ProbeCouplings::new(1.0, 2.0).unwrap();
        let ising = IsingParams::new(0.3, 0.0, 0.0).unwrap();
        let zs = find_zeros(&ising, &cpl, 2.0, 1e-4).unwrap();
        let target = CoamoebaPoint::new(PI, 0.0);
        assert!(zs.iter().any(|z| z.point.torus_distance(&target) < 1e-9));
    }

    #[test]
    fn amoeba_examples() {
        let cpl = ProbeCouplings::default();
        let inside = IsingParams::new(0.5, 0.1, -0.1).unwrap();
        let outside = IsingParams::new(0.5, 0.1, 0.1).unwrap();
        assert!(torus_zeros(&outside).is_empty());
        assert!(find_zeros(&outside, &cpl, 0.3, 1e-4).unwrap().is_empty());
        let pts = torus_zeros(&inside);
        assert_eq!(pts.len(), 2);
        certify(&inside, &find_zeros(&inside, &cpl, 0.3, 1e-4).unwrap());
        assert!(amoeba_member(&inside) && !amoeba_member(&outside));
    }

    #[test]
    fn commensurate_line_revisits_points() {
        let ising = IsingParams::new(0.5, 0.0, 0.0).unwrap();
        let cpl = ProbeCouplings::new(1.0, 1.0).unwrap();
        assert!(sample_coamoeba(&ising, &cpl, 50.0).unwrap().len() <= 2);
    }
}
