//! Command implementations: simulate, phase, kaluza-compare, selftest,
//! batch. Every run writes a manifest (success or failure); trajectories go
//! to CSV with 17 significant digits; reports are structured JSON.

use crate::config::{FieldKind, LagrangeOrbitKind, OutputConfig, RunConfig, SystemKind};
use mechphase::heavytop::{self, HeavyTopParams, HeavyTopState};
use mechphase::integrate::Trajectory;
use mechphase::kaluza::{self, ChargedParticleState, KKState};
use mechphase::liegroup::{polar_project, InertiaTensor, Mat3, Vec3};
use mechphase::rigidbody::{self, BodyMomentum, PhaseReport, RigidBodyFullState};
use mechphase::Error as MpError;
use serde::Serialize;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

pub const EXIT_OK: i32 = 0;
pub const EXIT_SELFTEST_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_TOLERANCE: i32 = 4;
pub const EXIT_NO_PERIODIC_ORBIT: i32 = 5;

pub fn exit_code_for(e: &MpError) -> i32 {
    match e {
        MpError::NonFiniteState { .. } => EXIT_NUMERICAL,
        MpError::NoReturn { .. }
        | MpError::NoPrecessionRoot { .. }
        | MpError::SeparatrixOrbit { .. } => EXIT_NO_PERIODIC_ORBIT,
        MpError::NotClosed { .. }
        | MpError::DriftExceeded { .. }
        | MpError::AxisNotFixed { .. } => EXIT_TOLERANCE,
        _ => EXIT_CONFIG,
    }
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub command: String,
    pub integrator: String,
    pub dt: f64,
    pub status: String,
    pub drift: serde_json::Value,
    pub wall_clock_seconds: f64,
    pub config: RunConfig,
}

impl RunManifest {
    fn new(command: &str, config: &RunConfig) -> Self {
        RunManifest {
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            integrator: "rk4-fixed-step".to_string(),
            dt: config.dt,
            status: "ok".to_string(),
            drift: serde_json::Value::Null,
            wall_clock_seconds: 0.0,
            config: config.clone(),
        }
    }
}

fn write_manifest(manifest: &mut RunManifest, output: &OutputConfig, started: Instant) {
    manifest.wall_clock_seconds = started.elapsed().as_secs_f64();
    let text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    match &output.manifest_json {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("cannot write manifest to {path}: {e}");
            }
        }
        None => println!("{text}"),
    }
}

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_csv(path: &str, header: &[&str], rows: &[Vec<f64>]) -> std::io::Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "{}", header.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|x| fmt17(*x)).collect();
        writeln!(f, "{}", cells.join(","))?;
    }
    Ok(())
}

/// `simulate`: integrate the configured system over [0, t_max], emit the
/// trajectory CSV and the manifest, and fail with exit 4 when observed
/// drift exceeds the declared bound.
pub fn cmd_simulate(config: &RunConfig) -> i32 {
    let started = Instant::now();
    let mut manifest = RunManifest::new("simulate", config);
    let code = match simulate_inner(config, &mut manifest) {
        Ok(()) => EXIT_OK,
        Err((code, msg)) => {
            manifest.status = format!("error: {msg}");
            eprintln!("simulate failed: {msg}");
            code
        }
    };
    write_manifest(&mut manifest, &config.output, started);
    code
}

fn simulate_inner(config: &RunConfig, manifest: &mut RunManifest) -> Result<(), (i32, String)> {
    match config.system {
        SystemKind::RigidBody => {
            let rb = config.rigid_body.as_ref().unwrap();
            let inertia = config
                .inertia(rb.inertia)
                .map_err(|e| (EXIT_CONFIG, e.to_string()))?;
            let state0 = RigidBodyFullState {
                attitude: RunConfig::rigid_attitude0(rb),
                momentum: BodyMomentum(Vec3::new(rb.pi0[0], rb.pi0[1], rb.pi0[2])),
            };
            let tr = integrate_rigid(config, &state0, &inertia)
                .map_err(|e| (exit_code_for(&e), e.to_string()))?;
            let (dh, dc, dmu) = rigidbody::full_trajectory_drift(&tr, &inertia);
            manifest.drift = serde_json::json!({
                "energy_rel": dh, "casimir_rel": dc, "spatial_momentum_abs": dmu
            });
            if let Some(path) = &config.output.trajectory_csv {
                let header = [
                    "t",
                    "R11",
                    "R12",
                    "R13",
                    "R21",
                    "R22",
                    "R23",
                    "R31",
                    "R32",
                    "R33",
                    "Pi1",
                    "Pi2",
                    "Pi3",
                    "energy",
                    "casimir",
                    "spatial_mu_err",
                ];
                let first = rigidbody::unflatten_full(&tr.states[0]);
                let mu0 = first.spatial_momentum().0;
                let rows: Vec<Vec<f64>> = tr
                    .times
                    .iter()
                    .zip(tr.states.iter())
                    .map(|(t, s)| {
                        let st = rigidbody::unflatten_full(s);
                        let mut row = vec![*t];
                        row.extend_from_slice(&s[..12]);
                        row.push(rigidbody::hamiltonian(st.momentum, &inertia));
                        row.push(st.momentum.0.norm_squared());
                        row.push((st.spatial_momentum().0 - mu0).norm());
                        row
                    })
                    .collect();
                write_csv(path, &header, &rows)
                    .map_err(|e| (EXIT_CONFIG, format!("cannot write {path}: {e}")))?;
            }
            let worst = dh.max(dc).max(dmu);
            if worst > config.tolerances.drift_tol {
                return Err((
                    EXIT_TOLERANCE,
                    format!(
                        "drift {worst:.3e} beyond declared bound {:.1e}",
                        config.tolerances.drift_tol
                    ),
                ));
            }
            Ok(())
        }
        SystemKind::HeavyTop => {
            let ht = config.heavy_top.as_ref().unwrap();
            let params = config
                .heavytop_params()
                .map_err(|e| (EXIT_CONFIG, e.to_string()))?;
            let state0 = match RunConfig::heavytop_state(ht) {
                Some(s) => s,
                None => {
                    let (s, _) = heavytop_orbit_ic(config, &params)
                        .map_err(|e| (exit_code_for(&e), e.to_string()))?;
                    s
                }
            };
            let tr = integrate_heavytop(config, &state0, &params)
                .map_err(|e| (exit_code_for(&e), e.to_string()))?;
            let (dmu, dg) = heavytop::casimir_drift(&tr);
            let h0 = heavytop::heavytop_hamiltonian(&state0, &params);
            let mut dh: f64 = 0.0;
            for s in &tr.states {
                let st = HeavyTopState {
                    pi: Vec3::new(s[0], s[1], s[2]),
                    gamma: Vec3::new(s[3], s[4], s[5]),
                };
                dh = dh.max(
                    (heavytop::heavytop_hamiltonian(&st, &params) - h0).abs()
                        / h0.abs().max(1e-300),
                );
            }
            manifest.drift = serde_json::json!({
                "energy_rel": dh, "pi_gamma_abs": dmu, "gamma_norm_abs": dg
            });
            if let Some(path) = &config.output.trajectory_csv {
                let header = [
                    "t", "Pi1", "Pi2", "Pi3", "Gamma1", "Gamma2", "Gamma3", "energy", "casimir1",
                    "casimir2",
                ];
                let rows: Vec<Vec<f64>> = tr
                    .times
                    .iter()
                    .zip(tr.states.iter())
                    .map(|(t, s)| {
                        let st = HeavyTopState {
                            pi: Vec3::new(s[0], s[1], s[2]),
                            gamma: Vec3::new(s[3], s[4], s[5]),
                        };
                        let (c1, c2) = st.casimirs();
                        let mut row = vec![*t];
                        row.extend_from_slice(&s[..6]);
                        row.push(heavytop::heavytop_hamiltonian(&st, &params));
                        row.push(c1);
                        row.push(c2);
                        row
                    })
                    .collect();
                write_csv(path, &header, &rows)
                    .map_err(|e| (EXIT_CONFIG, format!("cannot write {path}: {e}")))?;
            }
            let worst = dh.max(dmu).max(dg);
            if worst > config.tolerances.drift_tol {
                return Err((
                    EXIT_TOLERANCE,
                    format!(
                        "drift {worst:.3e} beyond declared bound {:.1e}",
                        config.tolerances.drift_tol
                    ),
                ));
            }
            Ok(())
        }
        SystemKind::Kaluza => {
            let kz = config.kaluza.as_ref().unwrap();
            let field = RunConfig::magnetic_field(kz);
            let s0 = ChargedParticleState {
                q: Vec3::new(kz.q0[0], kz.q0[1], kz.q0[2]),
                p: kz.mass * Vec3::new(kz.v0[0], kz.v0[1], kz.v0[2]),
            };
            let tr =
                kaluza::integrate_lorentz(&s0, &field, kz.charge, kz.mass, config.t_max, config.dt)
                    .map_err(|e| (exit_code_for(&e), e.to_string()))?;
            let ke0 = s0.p.norm_squared() / (2.0 * kz.mass);
            let mut dk: f64 = 0.0;
            for s in &tr.states {
                let ke = (s[3] * s[3] + s[4] * s[4] + s[5] * s[5]) / (2.0 * kz.mass);
                dk = dk.max((ke - ke0).abs() / ke0.max(1e-300));
            }
            manifest.drift = serde_json::json!({ "kinetic_energy_rel": dk });
            if let Some(path) = &config.output.trajectory_csv {
                let header = ["t", "qx", "qy", "qz", "px", "py", "pz", "energy"];
                let rows: Vec<Vec<f64>> = tr
                    .times
                    .iter()
                    .zip(tr.states.iter())
                    .map(|(t, s)| {
                        let mut row = vec![*t];
                        row.extend_from_slice(&s[..6]);
                        row.push((s[3] * s[3] + s[4] * s[4] + s[5] * s[5]) / (2.0 * kz.mass));
                        row
                    })
                    .collect();
                write_csv(path, &header, &rows)
                    .map_err(|e| (EXIT_CONFIG, format!("cannot write {path}: {e}")))?;
            }
            if dk > config.tolerances.drift_tol {
                return Err((
                    EXIT_TOLERANCE,
                    format!(
                        "kinetic-energy drift {dk:.3e} beyond declared bound {:.1e}",
                        config.tolerances.drift_tol
                    ),
                ));
            }
            Ok(())
        }
    }
}

fn integrate_rigid(
    config: &RunConfig,
    state0: &RigidBodyFullState,
    inertia: &InertiaTensor,
) -> mechphase::Result<Trajectory> {
    if config.project {
        let rhs = rigidbody::full_rhs_flat(inertia);
        mechphase::integrate::rk4_integrate_with(
            rhs,
            &rigidbody::flatten_full(state0),
            0.0,
            config.t_max,
            config.dt,
            Some(|y: &mut [f64]| {
                let m = Mat3::new(y[0], y[1], y[2], y[3], y[4], y[5], y[6], y[7], y[8]);
                let p = polar_project(m);
                for r in 0..3 {
                    for c in 0..3 {
                        y[3 * r + c] = p[(r, c)];
                    }
                }
            }),
        )
    } else {
        rigidbody::integrate_full(state0, inertia, config.t_max, config.dt)
    }
}

fn integrate_heavytop(
    config: &RunConfig,
    state0: &HeavyTopState,
    params: &HeavyTopParams,
) -> mechphase::Result<Trajectory> {
    if config.project {
        let rhs = heavytop::reduced_rhs_flat(params);
        let y0 = [
            state0.pi.x,
            state0.pi.y,
            state0.pi.z,
            state0.gamma.x,
            state0.gamma.y,
            state0.gamma.z,
        ];
        mechphase::integrate::rk4_integrate_with(
            rhs,
            &y0,
            0.0,
            config.t_max,
            config.dt,
            Some(|y: &mut [f64]| {
                let n = (y[3] * y[3] + y[4] * y[4] + y[5] * y[5]).sqrt();
                if n > 0.0 {
                    y[3] /= n;
                    y[4] /= n;
                    y[5] /= n;
                }
            }),
        )
    } else {
        heavytop::integrate_reduced(state0, params, config.t_max, config.dt)
    }
}

fn heavytop_orbit_ic(
    config: &RunConfig,
    params: &HeavyTopParams,
) -> mechphase::Result<(HeavyTopState, f64)> {
    let ht = config.heavy_top.as_ref().unwrap();
    let orbit = ht
        .orbit
        .as_ref()
        .ok_or(MpError::BadParams("missing [heavy_top.orbit] table"))?;
    let spin = match orbit.resonance_ratio {
        Some(ratio) => heavytop::tune_spin_for_ratio(
            params,
            orbit.tilt,
            ratio,
            0.25 * orbit.spin,
            4.0 * orbit.spin,
        )
        .ok_or(MpError::BadParams(
            "no spin in range achieves the requested resonance ratio",
        ))?,
        None => orbit.spin,
    };
    match orbit.kind {
        LagrangeOrbitKind::SteadyPrecession => {
            let sp = heavytop::steady_precession(params, orbit.tilt, spin)?;
            Ok((sp.state, sp.period))
        }
        LagrangeOrbitKind::Nutating => heavytop::lagrange_periodic_ic(
            params,
            orbit.tilt,
            spin,
            orbit.nutation,
            config.dt,
            config.t_max,
            config.tolerances.return_tol,
        ),
    }
}

/// JSON schema of the phase report emitted by `phase`.
#[derive(Debug, Serialize)]
struct PhaseReportJson {
    phase_total_direct: f64,
    phase_total_formula: Vec<Option<f64>>,
    phase_geometric: Vec<Option<f64>>,
    phase_dynamic: Vec<f64>,
    residual: Vec<Option<f64>>,
    period: f64,
    mu: [f64; 3],
    mu_magnitude: f64,
    h_mu: f64,
    method: Vec<String>,
    consistent_with_direct: Vec<bool>,
}

fn report_to_json(report: &PhaseReport, phase_tol: f64) -> PhaseReportJson {
    PhaseReportJson {
        phase_total_direct: report.direct.unwrap_or(f64::NAN),
        phase_total_formula: report.entries.iter().map(|e| e.total).collect(),
        phase_geometric: report.entries.iter().map(|e| e.geometric).collect(),
        phase_dynamic: report.entries.iter().map(|e| e.dynamic).collect(),
        residual: report.residual_vs_direct.clone(),
        period: report.period,
        mu: report.mu,
        mu_magnitude: report.mu_magnitude,
        h_mu: report.h_mu,
        method: report.entries.iter().map(|e| e.method.clone()).collect(),
        consistent_with_direct: report.consistent(phase_tol),
    }
}

/// `phase`: find a periodic reduced orbit, evaluate every implemented phase
/// formula plus the direct unreduced phase, and emit the report JSON.
/// Exit 5 when no periodic orbit exists, 4 when a residual exceeds
/// phase_tol.
pub fn cmd_phase(config: &RunConfig) -> i32 {
    let started = Instant::now();
    let mut manifest = RunManifest::new("phase", config);
    let code = match phase_inner(config) {
        Ok(report) => {
            let json = report_to_json(&report, config.tolerances.phase_tol);
            let text = serde_json::to_string_pretty(&json).expect("report serializes");
            match &config.output.report_json {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, &text) {
                        eprintln!("cannot write report to {path}: {e}");
                    }
                }
                None => println!("{text}"),
            }
            // asserted entries: those carrying a complete decomposition
            let breach = report
                .residual_vs_direct
                .iter()
                .flatten()
                .any(|r| *r > config.tolerances.phase_tol);
            if breach {
                manifest.status = "error: phase residual beyond phase_tol".into();
                eprintln!("phase residual beyond phase_tol");
                EXIT_TOLERANCE
            } else {
                EXIT_OK
            }
        }
        Err((code, msg)) => {
            manifest.status = format!("error: {msg}");
            eprintln!("phase failed: {msg}");
            code
        }
    };
    write_manifest(&mut manifest, &config.output, started);
    code
}

fn phase_inner(config: &RunConfig) -> Result<PhaseReport, (i32, String)> {
    match config.system {
        SystemKind::RigidBody => {
            let rb = config.rigid_body.as_ref().unwrap();
            let inertia = config
                .inertia(rb.inertia)
                .map_err(|e| (EXIT_CONFIG, e.to_string()))?;
            let pi0 = BodyMomentum(Vec3::new(rb.pi0[0], rb.pi0[1], rb.pi0[2]));
            let orbit = rigidbody::periodic_orbit(
                pi0,
                &inertia,
                config.dt,
                config.t_max,
                config.tolerances.return_tol,
                rb.n_samples,
            )
            .map_err(|e| (exit_code_for(&e), e.to_string()))?;
            let r0 = RunConfig::rigid_attitude0(rb);
            let report = rigidbody::rigid_body_phase(&orbit, &inertia, &r0, 1e-6)
                .map_err(|e| (exit_code_for(&e), e.to_string()))?;
            let phi =
                rigidbody::direct_phase_for_orbit(&orbit, &inertia, &r0, rb.direct_steps, 1e-4)
                    .map_err(|e| (exit_code_for(&e), e.to_string()))?;
            Ok(report.with_direct(phi))
        }
        SystemKind::HeavyTop => {
            let ht = config.heavy_top.as_ref().unwrap();
            let params = config
                .heavytop_params()
                .map_err(|e| (EXIT_CONFIG, e.to_string()))?;
            let (state, period) = heavytop_orbit_ic(config, &params)
                .map_err(|e| (exit_code_for(&e), e.to_string()))?;
            let orbit = heavytop::orbit_samples(&state, &params, period, ht.n_samples)
                .map_err(|e| (exit_code_for(&e), e.to_string()))?;
            let gap = orbit.closure_gap();
            let r0 = heavytop::initial_attitude_for(orbit.gamma[0]);
            let report =
                heavytop::heavytop_phase_report(&orbit, &params, &r0, (2.0 * gap).max(1e-6))
                    .map_err(|e| (exit_code_for(&e), e.to_string()))?;
            let phi = heavytop::heavytop_direct_phase_for_orbit(
                &orbit,
                &params,
                &r0,
                ht.direct_steps,
                (10.0 * gap).max(1e-4),
            )
            .map_err(|e| (exit_code_for(&e), e.to_string()))?;
            Ok(report.with_direct(phi))
        }
        SystemKind::Kaluza => Err((
            EXIT_CONFIG,
            "phase requires system = \"rigid-body\" or \"heavy-top\"".to_string(),
        )),
    }
}

#[derive(Debug, Serialize)]
struct KaluzaCompareJson {
    answer1_vs_answer2_endpoint_gap: f64,
    kk_vs_lorentz_endpoint_gap: f64,
    cyclotron_radius_rel_error: Option<f64>,
    two_form_residual: f64,
    p_theta_drift: f64,
    periods_compared: f64,
}

/// `kaluza-compare`: integrate the three formulations of the same motion
/// and report endpoint gaps, the cyclotron-radius error where the field is
/// uniform, and the d(alpha_mu) = mu B residual.
pub fn cmd_kaluza_compare(config: &RunConfig) -> i32 {
    let started = Instant::now();
    let mut manifest = RunManifest::new("kaluza-compare", config);
    let code = match kaluza_compare_inner(config) {
        Ok(json) => {
            let text = serde_json::to_string_pretty(&json).expect("report serializes");
            match &config.output.report_json {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, &text) {
                        eprintln!("cannot write report to {path}: {e}");
                    }
                }
                None => println!("{text}"),
            }
            let tol = &config.tolerances;
            let breach = json.answer1_vs_answer2_endpoint_gap > tol.gap_tol
                || json.kk_vs_lorentz_endpoint_gap > tol.gap_tol
                || json.two_form_residual > 1e-6
                || json.cyclotron_radius_rel_error.is_some_and(|r| r > 1e-6);
            if breach {
                manifest.status = "error: comparison gap beyond tolerance".into();
                eprintln!("comparison gap beyond tolerance");
                EXIT_TOLERANCE
            } else {
                EXIT_OK
            }
        }
        Err((code, msg)) => {
            manifest.status = format!("error: {msg}");
            eprintln!("kaluza-compare failed: {msg}");
            code
        }
    };
    write_manifest(&mut manifest, &config.output, started);
    code
}

fn kaluza_compare_inner(config: &RunConfig) -> Result<KaluzaCompareJson, (i32, String)> {
    let kz = config
        .kaluza
        .as_ref()
        .ok_or((EXIT_CONFIG, "missing [kaluza] table".to_string()))?;
    let field = RunConfig::magnetic_field(kz);
    let (e, m) = (kz.charge, kz.mass);
    let q0 = Vec3::new(kz.q0[0], kz.q0[1], kz.q0[2]);
    let v0 = Vec3::new(kz.v0[0], kz.v0[1], kz.v0[2]);
    let s0 = ChargedParticleState { q: q0, p: m * v0 };
    kaluza::validate_field(&field, q0).map_err(|er| (EXIT_CONFIG, er.to_string()))?;

    let t1 = config.t_max;
    let dt = config.dt;
    let map_e = |er: MpError| (exit_code_for(&er), er.to_string());

    let tr_l = kaluza::integrate_lorentz(&s0, &field, e, m, t1, dt).map_err(map_e)?;

    let s0_can = ChargedParticleState {
        q: s0.q,
        p: s0.p + e * field.potential(s0.q),
    };
    let tr_a2 = kaluza::integrate_answer2(&s0_can, &field, e, m, t1, dt).map_err(map_e)?;
    // compare through the momentum shift: positions only
    let gap_a = kaluza::endpoint_gap(&tr_l, &tr_a2, 0..3);

    let s_kk = KKState {
        q: s0.q,
        theta: 0.0,
        p: s0.p + e * field.potential(s0.q),
        p_theta: e,
    };
    let tr_kk = kaluza::integrate_kk(&s_kk, &field, m, t1, dt).map_err(map_e)?;
    let a = tr_l.last_state();
    let b = tr_kk.last_state();
    let gap_kk = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
    let mut p_theta_drift: f64 = 0.0;
    for s in &tr_kk.states {
        p_theta_drift = p_theta_drift.max((s[7] - e).abs());
    }

    // cyclotron radius against the analytic value (uniform fields, motion
    // with a transverse velocity component)
    let radius_err = if kz.field == FieldKind::Uniform && e != 0.0 {
        let b0 = Vec3::new(kz.b0.unwrap()[0], kz.b0.unwrap()[1], kz.b0.unwrap()[2]);
        let b_norm = b0.norm();
        let b_hat = b0 / b_norm;
        let v_perp = v0 - b_hat * v0.dot(&b_hat);
        if v_perp.norm() > 1e-12 {
            let (radius, _) = kaluza::cyclotron(e.abs(), m, b_norm, v_perp.norm());
            // gyro-center: q0 + (m / (e B^2)) v x B; the radius is the
            // distance from it, constant along the orbit
            let center = s0.q + (m / (e * b_norm * b_norm)) * v0.cross(&b0);
            let mut worst: f64 = 0.0;
            for s in tr_l.states.iter().step_by(97) {
                let q = Vec3::new(s[0], s[1], s[2]);
                let d = q - center;
                let d_perp = d - b_hat * d.dot(&b_hat);
                worst = worst.max((d_perp.norm() - radius).abs() / radius);
            }
            Some(worst)
        } else {
            None
        }
    } else {
        None
    };

    // seeded sample cloud for the two-form check
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    let mut rng = StdRng::seed_from_u64(config.seed);
    let samples: Vec<Vec3> = (0..50)
        .map(|_| {
            Vec3::new(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            )
        })
        .collect();
    let two_form = kaluza::magnetic_two_form_check(&field, e, &samples);

    Ok(KaluzaCompareJson {
        answer1_vs_answer2_endpoint_gap: gap_a,
        kk_vs_lorentz_endpoint_gap: gap_kk,
        cyclotron_radius_rel_error: radius_err,
        two_form_residual: two_form.max_residual,
        p_theta_drift,
        periods_compared: t1,
    })
}

/// `selftest`: run the reduced-scale invariant suites of every module and
/// print one line per check. Exit 1 on any failure.
pub fn cmd_selftest(inject_fault: Option<&str>) -> i32 {
    let fault = match inject_fault {
        None => None,
        Some("euler-sign") => Some(mechphase::selftest::Fault::EulerSignFlip),
        Some(other) => {
            eprintln!("unknown fault: {other} (available: euler-sign)");
            return EXIT_CONFIG;
        }
    };
    let results = mechphase::selftest::run_selftest(fault);
    for suite in &results {
        let tag = if suite.passed { "PASS" } else { "FAIL" };
        println!("[{tag}] suite {}", suite.suite);
        for c in &suite.checks {
            let tag = if c.passed { "pass" } else { "FAIL" };
            println!("  [{tag}] {}: {}", c.name, c.detail);
        }
    }
    if mechphase::selftest::all_passed(&results) {
        println!("selftest: all suites passed");
        EXIT_OK
    } else {
        println!("selftest: FAILURES detected");
        EXIT_SELFTEST_FAIL
    }
}

#[derive(Debug, Serialize)]
struct BatchEntry {
    config: String,
    exit_code: i32,
}

/// `batch`: run `simulate` for each config in order; results merge
/// deterministically by config order. The exit code is the first nonzero
/// member code.
pub fn cmd_batch(paths: &[String]) -> i32 {
    let mut entries = Vec::new();
    let mut code = EXIT_OK;
    for path in paths {
        let entry_code = match RunConfig::from_path(Path::new(path)) {
            Ok(config) => cmd_simulate(&config),
            Err(e) => {
                eprintln!("{path}: {e}");
                EXIT_CONFIG
            }
        };
        if code == EXIT_OK && entry_code != EXIT_OK {
            code = entry_code;
        }
        entries.push(BatchEntry {
            config: path.clone(),
            exit_code: entry_code,
        });
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&entries).expect("batch summary serializes")
    );
    code
}
