use super::output::{format_float, CsvTable};
use super::{CliError, Experiment, RunConfig};
use crate::entloc::{
    classical_tripartite, dephasing_robustness, delocalized_state, induced_channel, localization_grid, localize,
    localized_states, qdpi_audit, zz_localization_trace, DephasingModel, KrausChannel,
};
use crate::leeyang::{
    amoeba_member, find_zeros, mutual_information_trace, probe_trajectory, sample_coamoeba, tau_cap, IsingParams,
    ProbeCouplings,
};
use crate::mpemba::{detect_crossing, genuine_pair, prepare_states, Metric, MpembaParams, DEFAULT_B, DEFAULT_TAU_C};
use crate::qcore::{hermitian_eigenvalues, mutual_information, partial_trace, pauli_z, DensityOperator, SubsystemLayout};
use crate::supu::{default_grid, k3_scan, lifetime_gains, DephasingMethod, SuperposedUnitary};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::{FRAC_PI_2, PI};

/// Typed reader over the flat parameter map that remembers which keys were consulted.
struct Keys<'a> {
    map: &'a BTreeMap<String, String>,
    used: RefCell<BTreeSet<&'static str>>,
}

impl<'a> Keys<'a> {
    fn new(map: &'a BTreeMap<String, String>) -> Self {
        Self { map, used: RefCell::new(BTreeSet::new()) }
    }

    fn raw(&self, key: &'static str) -> Option<&'a String> {
        self.used.borrow_mut().insert(key);
        self.map.get(key)
    }

    fn f64_opt(&self, key: &'static str) -> Result<Option<f64>, CliError> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => match v.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(Some(x)),
                _ => Err(CliError::Config(format!("key '{key}': '{v}' is not a finite number"))),
            },
        }
    }

    fn f64_or(&self, key: &'static str, default: f64) -> Result<f64, CliError> {
        Ok(self.f64_opt(key)?.unwrap_or(default))
    }

    fn f64_req(&self, key: &'static str) -> Result<f64, CliError> {
        self.f64_opt(key)?.ok_or_else(|| CliError::Config(format!("missing required key '{key}'")))
    }

    fn usize_or(&self, key: &'static str, default: usize, min: usize) -> Result<usize, CliError> {
        let n = match self.raw(key) {
            None => default,
            Some(v) => v.parse::<usize>().map_err(|_| CliError::Config(format!("key '{key}': '{v}' is not a non-negative integer")))?,
        };
        if n < min {
            return Err(CliError::Config(format!("key '{key}' must be >= {min}, got {n}")));
        }
        Ok(n)
    }

    fn str_or(&self, key: &'static str, default: &'static str) -> &'a str {
        self.raw(key).map(String::as_str).unwrap_or(default)
    }

    fn finish(&self, experiment: Experiment) -> Result<(), CliError> {
        let used = self.used.borrow();
        match self.map.keys().find(|k| !used.contains(k.as_str())) {
            Some(k) => Err(CliError::Config(format!("unknown key '{k}' for experiment {experiment}"))),
            None => Ok(()),
        }
    }
}

fn check_range(key: &str, v: f64, lo: f64, hi: f64, unit: &str) -> Result<f64, CliError> {
    if v < lo || v > hi {
        return Err(CliError::Config(format!("key '{key}' = {v} is outside [{lo}, {hi}] {unit}")));
    }
    Ok(v)
}

fn positive(key: &str, v: f64) -> Result<f64, CliError> {
    if !(v > 0.0) {
        return Err(CliError::Config(format!("key '{key}' must be > 0, got {v}")));
    }
    Ok(v)
}

pub(super) enum Plan {
    Lgi { alpha: f64, phi: f64, omega: f64 },
    LgiDephasing { phi: f64, gamma: f64, omega: f64, method: DephasingMethod },
    LeeyangTrace { ising: IsingParams, cpl: ProbeCouplings, t_max: f64, samples: usize, tol: f64 },
    LeeyangCoamoeba { ising: IsingParams, cpl: ProbeCouplings, t_max: f64 },
    LeeyangAmoebaGrid { beta_j: f64, h_max: f64, n: usize },
    Mpemba { params: MpembaParams, samples: usize },
    MpembaGenuine { params: MpembaParams, samples: usize },
    EntlocLocalize { j: f64, steps: Option<usize> },
    EntlocRobustness { model: DephasingModel, t_max: f64, steps: usize },
    ChannelAudit { d: usize, trials: usize },
}

pub(super) struct Outcome {
    pub tables: Vec<CsvTable>,
    pub results: BTreeMap<String, String>,
}

fn ising_and_couplings(k: &Keys) -> Result<(IsingParams, ProbeCouplings), CliError> {
    let ising = IsingParams::new(k.f64_req("bJ")?, k.f64_or("bhA", 0.0)?, k.f64_or("bhB", 0.0)?)?;
    let cpl = ProbeCouplings::new(k.f64_req("jPA")?, k.f64_req("jPB")?)?;
    Ok((ising, cpl))
}

fn mpemba_params(k: &Keys, theta: f64) -> Result<MpembaParams, CliError> {
    let eps = k.f64_or("epsilon", 1e-5)?;
    let delta = k.f64_or("delta", 2.0 * PI * 1000.0)?;
    let params = match k.f64_opt("k0")? {
        Some(k0) => MpembaParams::new(positive("k0", k0)?, eps, delta, theta)?,
        None => MpembaParams::from_dipolar(k.f64_or("b", DEFAULT_B)?, k.f64_or("tau_c", DEFAULT_TAU_C)?, eps, delta, theta)?,
    };
    Ok(params)
}

impl Plan {
    pub(super) fn build(config: &RunConfig) -> Result<Plan, CliError> {
        let k = Keys::new(&config.params);
        let plan = match config.experiment {
            Experiment::Lgi => Plan::Lgi {
                alpha: check_range("alpha", k.f64_or("alpha", 0.0)?, 0.0, FRAC_PI_2, "rad")?,
                phi: k.f64_or("phi", 135.0)?.to_radians(),
                omega: positive("omega", k.f64_or("omega", 1.0)?)?,
            },
            Experiment::LgiDephasing => Plan::LgiDephasing {
                phi: k.f64_or("phi", 135.0)?.to_radians(),
                gamma: positive("gamma", k.f64_or("gamma", 1.0 / (4.0 * PI))?)?,
                omega: positive("omega", k.f64_or("omega", 1.0)?)?,
                method: match k.str_or("method", "bloch") {
                    "bloch" => DephasingMethod::Bloch,
                    "ancilla" => DephasingMethod::Ancilla,
                    other => return Err(CliError::Config(format!("key 'method': '{other}' is not bloch or ancilla"))),
                },
            },
            Experiment::LeeyangTrace => {
                let (ising, cpl) = ising_and_couplings(&k)?;
                Plan::LeeyangTrace {
                    ising,
                    cpl,
                    t_max: positive("t_max", k.f64_or("t_max", tau_cap(&cpl))?)?,
                    samples: k.usize_or("samples", 2000, 2)?,
                    tol: positive("tol", k.f64_or("tol", 1e-4)?)?,
                }
            }
            Experiment::LeeyangCoamoeba => {
                let (ising, cpl) = ising_and_couplings(&k)?;
                Plan::LeeyangCoamoeba { ising, cpl, t_max: positive("t_max", k.f64_or("t_max", 20.0 * tau_cap(&cpl))?)? }
            }
            Experiment::LeeyangAmoebaGrid => Plan::LeeyangAmoebaGrid {
                beta_j: k.f64_req("bJ")?,
                h_max: positive("h_max", k.f64_or("h_max", 1.0)?)?,
                n: k.usize_or("n", 21, 2)?,
            },
            Experiment::Mpemba => {
                let theta = check_range("theta", k.f64_or("theta", 70.0)?, 0.0, 90.0, "deg")?.to_radians();
                Plan::Mpemba { params: mpemba_params(&k, theta)?, samples: k.usize_or("samples", 2000, 2)? }
            }
            Experiment::MpembaGenuine => Plan::MpembaGenuine { params: mpemba_params(&k, 0.0)?, samples: k.usize_or("samples", 2000, 2)? },
            Experiment::EntlocLocalize => Plan::EntlocLocalize {
                j: positive("J", k.f64_or("J", 100.0)?)?,
                steps: match k.raw("steps") {
                    None => None,
                    Some(_) => Some(k.usize_or("steps", 0, 1)?),
                },
            },
            Experiment::EntlocRobustness => Plan::EntlocRobustness {
                model: DephasingModel::from_lifetimes(k.f64_or("tau00", 1.22)?, k.f64_or("tau01", 0.25)?)?,
                t_max: positive("t_max", k.f64_or("t_max", 1.0)?)?,
                steps: k.usize_or("steps", 100, 1)?,
            },
            Experiment::ChannelAudit => {
                let d = k.usize_or("d", 2, 2)?;
                if d > 3 {
                    return Err(CliError::Config(format!("key 'd' must be 2 or 3, got {d}")));
                }
                Plan::ChannelAudit { d, trials: k.usize_or("trials", 20, 0)? }
            }
        };
        k.finish(config.experiment)?;
        Ok(plan)
    }

    pub(super) fn warnings(&self) -> Vec<String> {
        match self {
            Plan::Mpemba { params, .. } | Plan::MpembaGenuine { params, .. } => params.warnings(),
            Plan::LeeyangTrace { cpl, .. } | Plan::LeeyangCoamoeba { cpl, .. } if cpl.ratio().fract() == 0.0 => {
                vec!["coupling ratio is an integer; the time line revisits the same coamoeba points".into()]
            }
            _ => Vec::new(),
        }
    }

    pub(super) fn execute(&self, seed: u64) -> Result<Outcome, CliError> {
        let mut results = BTreeMap::new();
        let tables = match *self {
            Plan::Lgi { alpha, phi, omega } => {
                let su = SuperposedUnitary::qubit(alpha, phi, omega)?;
                let grid = default_grid(omega);
                let scan = k3_scan(&su, &pauli_z(), &grid)?;
                let mut t = CsvTable::new("lgi.csv", "alpha,phi,t,K3");
                for (ti, ki) in scan.t.iter().zip(&scan.k) {
                    t.push_floats(&[alpha, phi.to_degrees(), *ti, *ki]);
                }
                results.insert("k3_max".into(), format_float(scan.k_max));
                results.insert("t_argmax".into(), format_float(scan.t_argmax));
                vec![t]
            }
            Plan::LgiDephasing { phi, gamma, omega, method } => {
                let alphas: Vec<f64> = (0..5).map(|i| i as f64 * PI / 16.0).collect();
                let gains = lifetime_gains(phi, gamma, &alphas, omega, method)?;
                let mut t = CsvTable::new("lifetime_gain.csv", "alpha,phi,tau_gain");
                for (a, tau, g) in &gains {
                    t.push_floats(&[*a, phi.to_degrees(), *g]);
                    results.insert(format!("tau_alpha_{a:.6}"), format_float(*tau));
                }
                vec![t]
            }
            Plan::LeeyangTrace { ising, cpl, t_max, samples, tol } => {
                let grid: Vec<f64> = (0..=samples).map(|i| t_max * i as f64 / samples as f64).collect();
                let probe = probe_trajectory(&ising, &cpl, &grid);
                let mi = mutual_information_trace(&ising, &cpl, &grid)?;
                let mut trace = CsvTable::new("trace.csv", "t,sx,sy,L,I");
                for (p, m) in probe.iter().zip(&mi) {
                    trace.push_floats(&[p.t, p.sx, p.sy, p.l, m.mi]);
                }
                let zeros = find_zeros(&ising, &cpl, t_max, tol)?;
                let mut z = CsvTable::new("zeros.csv", "theta1,theta2");
                for zero in &zeros {
                    z.push_floats(&[zero.point.theta1, zero.point.theta2]);
                }
                results.insert("zero_count".into(), zeros.len().to_string());
                results.insert("amoeba_member".into(), amoeba_member(&ising).to_string());
                vec![trace, z]
            }
            Plan::LeeyangCoamoeba { ising, cpl, t_max } => {
                let pts = sample_coamoeba(&ising, &cpl, t_max)?;
                let mut t = CsvTable::new("coamoeba.csv", "theta1,theta2");
                for p in &pts {
                    t.push_floats(&[p.theta1, p.theta2]);
                }
                results.insert("point_count".into(), pts.len().to_string());
                vec![t]
            }
            Plan::LeeyangAmoebaGrid { beta_j, h_max, n } => {
                let mut t = CsvTable::new("amoeba.csv", "bhA,bhB,member");
                let mut inside = 0usize;
                for i in 0..n {
                    for j in 0..n {
                        let ha = -h_max + 2.0 * h_max * i as f64 / (n - 1) as f64;
                        let hb = -h_max + 2.0 * h_max * j as f64 / (n - 1) as f64;
                        let member = amoeba_member(&IsingParams::new(beta_j, ha, hb)?);
                        inside += member as usize;
                        t.push_cells(&[format_float(ha), format_float(hb), (member as u8).to_string()]);
                    }
                }
                results.insert("members".into(), inside.to_string());
                vec![t]
            }
            Plan::Mpemba { params, samples } => {
                let (near, far) = prepare_states(params.theta, params.epsilon)?;
                let out = detect_crossing(&near, &far, &params, Metric::TraceDistance, params.window(), samples)?;
                let mut curves = CsvTable::new("mpemba.csv", "t,D_f,D_n");
                for (t, f, nn) in &out.curves {
                    curves.push_floats(&[*t, *f, *nn]);
                }
                let mut ov = CsvTable::new("overlaps.csv", "mode,a_n_f,a_n_n");
                for m in 0..3 {
                    ov.push_cells(&[(m + 1).to_string(), format_float(out.overlaps_far[m]), format_float(out.overlaps_near[m])]);
                }
                if let Some(tc) = out.crossing_time {
                    results.insert("crossing_time".into(), format_float(tc));
                }
                results.insert("k0".into(), format_float(params.k0));
                vec![curves, ov]
            }
            Plan::MpembaGenuine { params, samples } => {
                let (near, far) = genuine_pair(params.epsilon)?;
                let out = detect_crossing(&near, &far, &params, Metric::RelativeEntropy, params.window(), samples)?;
                let mut curves = CsvTable::new("mpemba_genuine.csv", "t,d_f,d_n");
                for (t, f, nn) in &out.curves {
                    curves.push_floats(&[*t, *f, *nn]);
                }
                if let Some(tc) = out.crossing_time {
                    results.insert("crossing_time".into(), format_float(tc));
                }
                vec![curves]
            }
            Plan::EntlocLocalize { j, steps } => {
                let grid = match steps {
                    None => localization_grid(j),
                    Some(s) => (0..=s).map(|l| l as f64 / (2.0 * j * s as f64)).collect(),
                };
                let trace = zz_localization_trace(j, &grid)?;
                let mut t = CsvTable::new("localization.csv", "tau,E,D");
                for s in &trace {
                    t.push_floats(&[s.tau, s.entanglement, s.discord]);
                }
                let last = trace.last().expect("non-empty grid");
                results.insert("final_entanglement".into(), format_float(last.entanglement));
                let dmax = trace.iter().map(|s| s.discord).fold(0.0, f64::max);
                results.insert("max_discord".into(), format_float(dmax));
                if trace.iter().any(|s| !s.bell_diagonal) {
                    results.insert("bell_diagonal".into(), "false".into());
                }
                vec![t]
            }
            Plan::EntlocRobustness { model, t_max, steps } => {
                let grid: Vec<f64> = (0..=steps).map(|i| t_max * i as f64 / steps as f64).collect();
                let mut states = localized_states(1.0);
                states.push(delocalized_state(1.0));
                let res = dephasing_robustness(&states, &model, &grid)?;
                let mut curves = CsvTable::new("robustness.csv", "t,q_F,q_H,coh");
                let mut taus = CsvTable::new("decay_constants.csv", "q_F,q_H,tau_fit,tau_model");
                for r in &res {
                    let (qf, qh) = r.label;
                    for (t, y) in &r.curve {
                        curves.push_cells(&[format_float(*t), qf.to_string(), qh.to_string(), format_float(*y)]);
                    }
                    taus.push_cells(&[qf.to_string(), qh.to_string(), format_float(r.decay_constant), format_float(r.model_lifetime)]);
                    results.insert(format!("tau_{qf}_{qh}"), format_float(r.decay_constant));
                }
                results.insert("sigma2".into(), format_float(model.sigma2));
                results.insert("floor_rate".into(), format_float(model.floor_rate));
                vec![curves, taus]
            }
            Plan::ChannelAudit { d, trials } => {
                let ch = induced_channel(d)?;
                let eigs = hermitian_eigenvalues(&ch.choi());
                let mut spec = CsvTable::new("choi_spectrum.csv", "index,eigenvalue");
                for (i, e) in eigs.iter().enumerate() {
                    spec.push_cells(&[i.to_string(), format_float(*e)]);
                }
                // Separable mixture of two Bell states, localized to |φ00⟩.
                let mut w = vec![0.0; d * d];
                w[0] = 0.5;
                w[1] = 0.5;
                let rho = classical_tripartite(d, &w)?;
                let before = partial_trace(&rho, &[1, 2])?;
                let after = partial_trace(&localize(&rho)?, &[1, 2])?;
                let report = qdpi_audit(&before, &after, Some(&ch.channel))?;
                results.insert("choi_min_eigenvalue".into(), format_float(eigs[0]));
                results.insert("completeness_residual".into(), format_float(ch.channel.completeness_residual()));
                results.insert("i_before".into(), format_float(report.i_before));
                results.insert("i_after".into(), format_float(report.i_after));
                results.insert("verdict".into(), report.verdict.to_string());
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let layout = SubsystemLayout::qubits(2);
                let mut worst = f64::NEG_INFINITY;
                for _ in 0..trials {
                    let prod = KrausChannel::random(2, 2, &mut rng).tensor(&KrausChannel::identity(2));
                    let psi = KrausChannel::random(4, 1, &mut rng).kraus()[0].column(0).into_owned();
                    let r0 = DensityOperator::from_pure(&psi, layout.clone())?;
                    let r1 = DensityOperator::new(prod.apply(r0.matrix()), layout.clone())?;
                    let gain = mutual_information(&r1, &[0], &[1])? - mutual_information(&r0, &[0], &[1])?;
                    worst = worst.max(gain);
                }
                if trials > 0 {
                    results.insert("product_channel_max_gain".into(), format_float(worst));
                }
                vec![spec]
            }
        };
        Ok(Outcome { tables, results })
    }
}
