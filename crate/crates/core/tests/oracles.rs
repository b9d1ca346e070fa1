//! Frozen reference values, each cross-checked against a computation that shares no code path
//! with the library routine under test.

use nalgebra::{Matrix4, Vector4};
use spinq::entloc::{dephasing_robustness, localized_states, zz_localization_trace, DephasingModel, Nucleus};
use spinq::leeyang::{torus_zeros, CoamoebaPoint, IsingParams};
use spinq::mpemba::{build_lp, detect_crossing, prepare_states, steady_state, Metric, MpembaParams, DEFAULT_B, DEFAULT_TAU_C};
use spinq::qcore::{c, identity, pauli_x, pauli_y, pauli_z, CMatrix, C64};
use spinq::supu::{default_grid, k3_scan, kn_scan, lifetime_gains, DephasingMethod, SuperposedUnitary};
use std::f64::consts::{FRAC_PI_4, LN_2, PI};

fn expm_taylor(a: &CMatrix) -> CMatrix {
    let norm = a.iter().map(|z| z.norm()).sum::<f64>();
    let s = (norm.log2().ceil().max(0.0) as i32) + 4;
    let scaled = a / c(2f64.powi(s), 0.0);
    let mut term = identity(a.nrows());
    let mut sum = term.clone();
    for k in 1..30 {
        term = &term * &scaled / c(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// Superposed rotation built from series exponentials and normalized numerically.
fn brute_superposed(alpha: f64, phi: f64, t: f64) -> CMatrix {
    let gen = |n: [f64; 3]| pauli_x() * c(n[0], 0.0) + pauli_y() * c(n[1], 0.0) + pauli_z() * c(n[2], 0.0);
    let u = |n: [f64; 3]| expm_taylor(&(gen(n) * c(0.0, -t / 2.0)));
    let s = u([1.0, 0.0, 0.0]) * c(alpha.cos(), 0.0) + u([phi.cos(), phi.sin(), 0.0]) * c(alpha.sin(), 0.0);
    let n2 = (s.adjoint() * &s)[(0, 0)].re;
    s / c(n2.sqrt(), 0.0)
}

fn brute_k3_max(alpha: f64, phi: f64) -> f64 {
    let corr = |t: f64| {
        let u = brute_superposed(alpha, phi, t);
        (pauli_z() * &u * pauli_z() * u.adjoint()).trace().re / 2.0
    };
    let k3 = |t: f64| 2.0 * corr(t) - corr(2.0 * t);
    let n = 4000;
    let h = PI / n as f64;
    let (mut best_t, mut best) = (h, f64::MIN);
    for i in 1..=n {
        let t = i as f64 * h;
        let v = k3(t);
        if v > best {
            best = v;
            best_t = t;
        }
    }
    // Ternary refinement around the grid maximum.
    let (mut lo, mut hi) = ((best_t - h).max(0.0), (best_t + h).min(PI));
    for _ in 0..100 {
        let (m1, m2) = (lo + (hi - lo) / 3.0, hi - (hi - lo) / 3.0);
        if k3(m1) < k3(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    best.max(k3(0.5 * (lo + hi)))
}

#[test]
fn k3_maxima_match_series_exponentials() {
    for (phi_deg, frozen) in [(90.0, 1.8466366895), (135.0, 2.5030), (170.0, 2.9698479712)] {
        let phi = f64::to_radians(phi_deg);
        let su = SuperposedUnitary::qubit(FRAC_PI_4, phi, 1.0).unwrap();
        let lib = k3_scan(&su, &pauli_z(), &default_grid(1.0)).unwrap().k_max;
        let oracle = brute_k3_max(FRAC_PI_4, phi);
        assert!((lib - oracle).abs() < 1e-6, "phi={phi_deg}: {lib} vs {oracle}");
        let tol = if phi_deg == 135.0 { 5e-5 } else { 1e-8 };
        assert!((lib - frozen).abs() < tol, "phi={phi_deg}: {lib} vs frozen {frozen}");
    }
}

#[test]
fn kn_maxima_frozen() {
    let su = SuperposedUnitary::qubit(FRAC_PI_4, 170f64.to_radians(), 1.0).unwrap();
    for (n, frozen) in [(3, 2.9698), (4, 3.9848), (5, 4.9896), (6, 5.9920)] {
        let k = kn_scan(&su, &pauli_z(), n, &default_grid(1.0)).unwrap().k_max;
        assert!((k - frozen).abs() < 1e-4, "n={n}: {k}");
    }
}

#[test]
fn lifetime_gains_frozen() {
    let alphas: Vec<f64> = (0..5).map(|i| i as f64 * PI / 16.0).collect();
    let gamma = 1.0 / (4.0 * PI);
    let cases = [
        (DephasingMethod::Bloch, [1.0, 1.06, 1.905, 2.74, 2.753]),
        (DephasingMethod::Ancilla, [1.0, 1.603, 1.843, 1.862, 1.868]),
    ];
    for (method, frozen) in cases {
        let g = lifetime_gains(135f64.to_radians(), gamma, &alphas, 1.0, method).unwrap();
        for (got, want) in g.iter().map(|x| x.2).zip(frozen) {
            assert!((got - want).abs() < 1e-3, "{method:?}: {got} vs {want}");
        }
    }
}

#[test]
fn ly_polynomial_matches_partition_sum() {
    // Z at complex fields βh_k + iφ_k, summed over the four spin configurations.
    for &(bj, ha, hb, pa, pb) in &[(0.5, 0.1, -0.1, 0.7, 2.3), (1.2, 0.0, 0.3, 3.0, -1.0), (-0.4, 0.2, 0.2, 0.1, 0.1)] {
        let za = c(ha, pa);
        let zb = c(hb, pb);
        let mut z = c(0.0, 0.0);
        for sa in [1.0, -1.0] {
            for sb in [1.0, -1.0] {
                z += (c(bj * sa * sb, 0.0) + za * sa + zb * sb).exp();
            }
        }
        let ising = IsingParams::new(bj, ha, hb).unwrap();
        let z1 = (za * -2.0).exp();
        let z2 = (zb * -2.0).exp();
        let prefactor = (c(bj, 0.0) + za + zb).exp();
        let poly = ising.polynomial().eval(z1, z2) * prefactor;
        assert!((poly - z).norm() < 1e-12 * z.norm().max(1.0), "{poly} vs {z}");
    }
}

/// Zeros with r₁r₂ fixed, located by bisection on |z₂(θ₁)| = r₂ with z₂ = −(1 + Γz₁)/(Γ + z₁).
fn bisected_zeros(bj: f64, ha: f64, hb: f64) -> Vec<CoamoebaPoint> {
    let g = (-2.0 * bj).exp();
    let (r1, r2) = ((-2.0 * ha).exp(), (-2.0 * hb).exp());
    let z2 = |t: f64| {
        let z1 = C64::from_polar(r1, t);
        -(c(1.0, 0.0) + z1 * g) / (z1 + g)
    };
    let f = |t: f64| z2(t).norm() - r2;
    let n = 20000;
    let h = 2.0 * PI / n as f64;
    let mut out = Vec::new();
    for i in 0..n {
        let (mut a, mut b) = (i as f64 * h, (i + 1) as f64 * h);
        if f(a) * f(b) > 0.0 {
            continue;
        }
        for _ in 0..80 {
            let m = 0.5 * (a + b);
            if f(a) * f(m) <= 0.0 {
                b = m;
            } else {
                a = m;
            }
        }
        let t = 0.5 * (a + b);
        out.push(CoamoebaPoint::new(t, z2(t).arg()));
    }
    out
}

#[test]
fn amoeba_points_match_bisection() {
    let frozen = [CoamoebaPoint::new(1.9555, 1.9555), CoamoebaPoint::new(4.3277, 4.3277)];
    let lib = torus_zeros(&IsingParams::new(0.5, 0.1, -0.1).unwrap());
    let oracle = bisected_zeros(0.5, 0.1, -0.1);
    assert_eq!(lib.len(), 2);
    assert_eq!(oracle.len(), 2);
    for p in &lib {
        assert!(oracle.iter().any(|q| q.torus_distance(p) < 1e-9), "{p:?} not in {oracle:?}");
        assert!(frozen.iter().any(|q| q.torus_distance(p) < 1e-4), "{p:?} not near frozen points");
    }
    assert!(torus_zeros(&IsingParams::new(0.5, 0.1, 0.1).unwrap()).is_empty());
    assert!(bisected_zeros(0.5, 0.1, 0.1).is_empty());
}

fn rk4(lp: &Matrix4<f64>, p: Vector4<f64>, dt: f64) -> Vector4<f64> {
    let k1 = lp * p;
    let k2 = lp * (p + k1 * (dt / 2.0));
    let k3 = lp * (p + k2 * (dt / 2.0));
    let k4 = lp * (p + k3 * dt);
    p + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
}

/// Last sign change of D_f − D_n on an RK4 grid, refined by linear interpolation.
fn rk4_crossing(params: &MpembaParams, near: [f64; 4], far: [f64; 4], dist: impl Fn(&Vector4<f64>) -> f64, window: f64) -> f64 {
    let lp = build_lp(params);
    let dt = 0.05;
    let steps = (window / dt).ceil() as usize;
    let (mut pn, mut pf) = (Vector4::from(near), Vector4::from(far));
    let mut prev = dist(&pf) - dist(&pn);
    let mut last = f64::NAN;
    for i in 1..=steps {
        pn = rk4(&lp, pn, dt);
        pf = rk4(&lp, pf, dt);
        let cur = dist(&pf) - dist(&pn);
        if prev > 0.0 && cur <= 0.0 {
            last = (i as f64 - 1.0 + prev / (prev - cur)) * dt;
        }
        prev = cur;
    }
    last
}

#[test]
fn mpemba_crossing_matches_rk4() {
    let eps = 1e-5;
    let p = MpembaParams::from_dipolar(DEFAULT_B, DEFAULT_TAU_C, eps, 2.0 * PI * 1000.0, 70f64.to_radians()).unwrap();
    let (near, far) = prepare_states(p.theta, eps).unwrap();
    let window = 6.0 / (5.0 * p.k0 / 24.0);
    let lib = detect_crossing(&near, &far, &p, Metric::TraceDistance, window, 4000).unwrap().crossing_time.unwrap();
    let ss = Vector4::from(steady_state(&p).as_array());
    let d = |x: &Vector4<f64>| 0.5 * (x - ss).abs().sum();
    let oracle = rk4_crossing(&p, near.as_array(), far.as_array(), d, window);
    assert!((lib - oracle).abs() < 0.05, "{lib} vs {oracle}");
    assert!((lib - 81.361).abs() < 1e-3, "{lib}");
    assert!((p.k0 - 6.933e-3).abs() < 1e-6, "{}", p.k0);
}

fn binary_entropy(p: f64) -> f64 {
    [p, 1.0 - p].iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum()
}

#[test]
fn localization_follows_binary_entropy() {
    let j = 152.0;
    let taus: Vec<f64> = (0..=20).map(|i| i as f64 / (40.0 * j)).collect();
    for s in zz_localization_trace(j, &taus).unwrap() {
        let p = (1.0 + (PI * j * s.tau).sin()) / 2.0;
        let expected = 1.0 - binary_entropy(p) / LN_2;
        assert!((s.entanglement - expected).abs() < 1e-9, "tau={}: {} vs {expected}", s.tau, s.entanglement);
        assert!(s.bell_diagonal);
        assert!(s.discord < 1e-6, "tau={}: discord {}", s.tau, s.discord);
    }
}

#[test]
fn robustness_lifetimes_match_closed_form() {
    let (gf, gh) = (Nucleus::Fluorine.gamma(), Nucleus::Proton.gamma());
    let floor = 1.0 / 1.22;
    let sigma2 = (1.0 / 0.25 - floor) / (gh * gh);
    let closed = |qf: i32, qh: i32| {
        let w = qf as f64 * gf + qh as f64 * gh;
        1.0 / (sigma2 * w * w + floor)
    };
    assert!((closed(2, 1) - 0.036702).abs() < 1e-5);
    assert!((closed(2, -1) - 0.30329).abs() < 1e-4);
    let grid: Vec<f64> = (0..=100).map(|i| i as f64 * 0.01).collect();
    let res = dephasing_robustness(&localized_states(1.0), &DephasingModel::default(), &grid).unwrap();
    for r in res {
        let want = closed(r.label.0, r.label.1);
        assert!((r.decay_constant - want).abs() < 1e-3 * want, "{:?}: {} vs {want}", r.label, r.decay_constant);
        assert!((r.model_lifetime - want).abs() < 1e-12 * want);
    }
}
