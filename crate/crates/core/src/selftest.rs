//! Reduced-scale invariant suites over every module, callable from the CLI.
//!
//! Each suite re-runs the load-bearing checks at a fraction of the
//! acceptance workload: algebra axioms, conservation over one period,
//! one phase consistency case per system, and the field-theory
//! equivalences. A fault hook exists so the failure path itself can be
//! exercised end to end.

use crate::integrate::{quadrature, rk4_integrate, SphericalLoop};
use crate::kaluza::{self, ChargedParticleState, KKState, MagneticField};
use crate::liegroup::{exp_so3, hat, wrap_angle, InertiaTensor, Rotation, Vec3};
use crate::mechsys::{self, generator, mechanical_connection, split_s1};
use crate::rigidbody::{self, BodyMomentum};
use crate::{heavytop, Error};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Deliberately injected defects, used to validate that the selftest
/// actually catches broken dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Flips the sign of the Euler term in the unreduced rigid-body flow;
    /// energy and Casimir survive, spatial momentum conservation does not.
    EulerSignFlip,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SuiteResult {
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

fn check(name: &str, passed: bool, detail: String) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        passed,
        detail,
    }
}

fn tol_check(name: &str, value: f64, tol: f64) -> CheckResult {
    check(
        name,
        value < tol,
        format!("{value:.3e} (tolerance {tol:.1e})"),
    )
}

fn suite(name: &str, checks: Vec<CheckResult>) -> SuiteResult {
    SuiteResult {
        suite: name.to_string(),
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

fn rand_vec3(rng: &mut StdRng, scale: f64) -> Vec3 {
    Vec3::new(
        rng.gen_range(-scale..scale),
        rng.gen_range(-scale..scale),
        rng.gen_range(-scale..scale),
    )
}

fn liegroup_suite(seed: u64) -> SuiteResult {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut worst_ortho: f64 = 0.0;
    let mut worst_roundtrip: f64 = 0.0;
    let mut worst_angle: f64 = 0.0;
    for _ in 0..200 {
        let v = rand_vec3(&mut rng, 1.0);
        if v.norm() < 1e-6 {
            continue;
        }
        let axis = v.normalize();
        let theta: f64 = rng.gen_range(-3.0..3.0);
        let r = exp_so3(theta * axis);
        worst_ortho = worst_ortho.max(r.ortho_residual());
        if theta.abs() < std::f64::consts::PI - 1e-3 {
            worst_roundtrip =
                worst_roundtrip.max((crate::liegroup::log_so3(&r) - theta * axis).norm());
        }
        if let Ok(phi) = crate::liegroup::angle_about_axis(&r, axis, 1e-9) {
            worst_angle = worst_angle.max((phi - wrap_angle(theta)).abs());
        }
    }
    suite(
        "liegroup",
        vec![
            tol_check("exp produces orthonormal rotations", worst_ortho, 1e-12),
            tol_check("log inverts exp below pi", worst_roundtrip, 1e-9),
            tol_check("angle extraction wraps correctly", worst_angle, 1e-9),
        ],
    )
}

fn integrate_suite() -> SuiteResult {
    let mut checks = Vec::new();

    let exact = 1.0 / 3.0;
    let err_at = |dt: f64| {
        let tr = rk4_integrate(|_, y| vec![-y[0] * y[0]], &[1.0], 0.0, 2.0, dt).unwrap();
        (tr.last_state()[0] - exact).abs()
    };
    let ratio = err_at(1e-2) / err_at(5e-3);
    checks.push(check(
        "rk4 is fourth order",
        (8.0..32.0).contains(&ratio),
        format!("error ratio under halving: {ratio:.2}"),
    ));

    let dt = std::f64::consts::PI / 500.0;
    let sin: Vec<f64> = (0..=500).map(|k| (k as f64 * dt).sin()).collect();
    checks.push(tol_check(
        "simpson quadrature of sin over [0, pi]",
        (quadrature(&sin, dt).unwrap() - 2.0).abs(),
        1e-9,
    ));

    let n = 2000;
    let equator: Vec<Vec3> = (0..=n)
        .map(|k| {
            let phi = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            Vec3::new(phi.cos(), phi.sin(), 0.0)
        })
        .collect();
    let lp = SphericalLoop::new(equator, 1e-9).unwrap();
    let area = crate::integrate::spherical_signed_area(&lp).unwrap();
    checks.push(tol_check(
        "hemisphere area",
        (area - 2.0 * std::f64::consts::PI).abs(),
        1e-6,
    ));

    let t =
        crate::integrate::detect_period(|_, y| vec![y[1], -y[0]], &[1.0, 0.0], 1e-3, 10.0, 1e-4)
            .unwrap();
    checks.push(tol_check(
        "harmonic oscillator period",
        (t - 2.0 * std::f64::consts::PI).abs(),
        1e-8,
    ));

    suite("integrate", checks)
}

fn mechsys_suite(seed: u64) -> SuiteResult {
    let mut rng = StdRng::seed_from_u64(seed);
    let inertia = InertiaTensor::new(3.0, 2.0, 1.0).unwrap();
    let mut worst_axiom: f64 = 0.0;
    let mut worst_split: f64 = 0.0;
    let mut worst_amended: f64 = 0.0;
    let mut worst_equiv: f64 = 0.0;
    for _ in 0..200 {
        let r = exp_so3(rand_vec3(&mut rng, 3.0));
        let xi = rand_vec3(&mut rng, 2.0);
        let a = mechanical_connection(&r, &generator(xi, &r), &inertia).unwrap();
        worst_axiom = worst_axiom.max((a - xi).norm());

        let zeta = {
            let v = rand_vec3(&mut rng, 1.0);
            if v.norm() < 1e-3 {
                Vec3::z()
            } else {
                v.normalize()
            }
        };
        let v = r.matrix() * hat(rand_vec3(&mut rng, 2.0));
        let (ver, hor) = split_s1(&r, &v, &inertia, zeta).unwrap();
        worst_split = worst_split.max((ver + hor - v).norm());
        let a_hor = mechsys::mechanical_connection_s1(&r, &hor, &inertia, zeta).unwrap();
        worst_split = worst_split.max(a_hor.abs());

        let mu = rand_vec3(&mut rng, 2.0);
        let closed = mechsys::amended_potential(&r, mu, &inertia, |_| 0.0);
        let omega = inertia.apply_inv(r.apply_inverse(mu));
        let h_alpha = 0.5 * inertia.apply(omega).dot(&omega);
        worst_amended = worst_amended.max((closed - h_alpha).abs());

        let g = exp_so3(rand_vec3(&mut rng, 3.0));
        let lhs =
            mechsys::alpha_mu_pairing(&g.compose(&r), mu, &(g.matrix() * v), &inertia).unwrap();
        let rhs = mechsys::alpha_mu_pairing(&r, g.apply_inverse(mu), &v, &inertia).unwrap();
        worst_equiv = worst_equiv.max((lhs - rhs).abs());
    }
    suite(
        "mechsys",
        vec![
            tol_check("connection axiom A(xi_Q) = xi", worst_axiom, 1e-12),
            tol_check("horizontal-vertical split", worst_split, 1e-12),
            tol_check("amended potential = H(alpha_mu)", worst_amended, 1e-12),
            tol_check("alpha_mu equivariance", worst_equiv, 1e-11),
        ],
    )
}

fn rigidbody_suite(fault: Option<Fault>) -> SuiteResult {
    let inertia = InertiaTensor::new(3.0, 2.0, 1.0).unwrap();
    let pi0 = Vec3::new(0.97, 0.2, 0.12);
    let mut checks = Vec::new();

    let orbit =
        match rigidbody::periodic_orbit(BodyMomentum(pi0), &inertia, 1e-3, 200.0, 1e-7, 10_000) {
            Ok(o) => o,
            Err(e) => {
                return suite(
                    "rigidbody",
                    vec![check("periodic orbit detection", false, e.to_string())],
                )
            }
        };

    // unreduced conservation over one period, with the optional fault
    let r0 = Rotation::identity();
    let state0 = rigidbody::RigidBodyFullState {
        attitude: r0,
        momentum: BodyMomentum(pi0),
    };
    let sign = if fault == Some(Fault::EulerSignFlip) {
        -1.0
    } else {
        1.0
    };
    let rhs = |_t: f64, y: &[f64]| {
        let m = crate::liegroup::Mat3::new(y[0], y[1], y[2], y[3], y[4], y[5], y[6], y[7], y[8]);
        let pi = Vec3::new(y[9], y[10], y[11]);
        let omega = inertia.apply_inv(pi);
        let rdot = m * hat(omega);
        let pidot = sign * pi.cross(&omega);
        let mut dy = Vec::with_capacity(12);
        for r in 0..3 {
            for c in 0..3 {
                dy.push(rdot[(r, c)]);
            }
        }
        dy.extend_from_slice(pidot.as_slice());
        dy
    };
    let tr = rk4_integrate(
        rhs,
        &rigidbody::flatten_full(&state0),
        0.0,
        orbit.period,
        1e-3,
    )
    .unwrap();
    let (dh, dc, dmu) = rigidbody::full_trajectory_drift(&tr, &inertia);
    checks.push(tol_check("energy drift over one period", dh, 1e-8));
    checks.push(tol_check("Casimir drift over one period", dc, 1e-8));
    checks.push(tol_check("spatial momentum conservation", dmu, 1e-7));

    // phase consistency on one orbit
    match rigidbody::rigid_body_phase(&orbit, &inertia, &r0, 1e-6) {
        Ok(report) => {
            match rigidbody::direct_phase_for_orbit(&orbit, &inertia, &r0, 10_000, 1e-4) {
                Ok(phi) => {
                    let report = report.with_direct(phi);
                    let worst = report
                        .residual_vs_direct
                        .iter()
                        .flatten()
                        .cloned()
                        .fold(0.0f64, f64::max);
                    checks.push(tol_check("phase formulas vs direct", worst, 1e-3));
                }
                Err(e) => checks.push(check("direct phase", false, e.to_string())),
            }
        }
        Err(e) => checks.push(check("phase report", false, e.to_string())),
    }

    suite("rigidbody", checks)
}

fn heavytop_suite() -> SuiteResult {
    let params = heavytop::HeavyTopParams::new(
        InertiaTensor::new(1.0, 1.0, 0.6).unwrap(),
        1.5,
        1.0,
        1.0,
        Vec3::z(),
    )
    .unwrap();
    let mut checks = Vec::new();

    let sp = match heavytop::steady_precession(&params, 0.6, 8.0) {
        Ok(sp) => sp,
        Err(e) => {
            return suite(
                "heavytop",
                vec![check("steady precession", false, e.to_string())],
            )
        }
    };
    let tr = heavytop::integrate_reduced(&sp.state, &params, sp.period, 1e-3).unwrap();
    let (dmu, dg) = heavytop::casimir_drift(&tr);
    checks.push(tol_check("Pi.Gamma drift over one period", dmu, 1e-8));
    checks.push(tol_check("|Gamma|^2 drift over one period", dg, 1e-8));

    let orbit = heavytop::orbit_samples(&sp.state, &params, sp.period, 10_000).unwrap();
    let r0 = heavytop::initial_attitude_for(orbit.gamma[0]);
    match (
        heavytop::heavytop_phase_report(&orbit, &params, &r0, 1e-6),
        heavytop::heavytop_direct_phase_for_orbit(&orbit, &params, &r0, 10_000, 1e-4),
    ) {
        (Ok(report), Ok(phi)) => {
            let report = report.with_direct(phi);
            let res = report.residual_vs_direct[0].unwrap_or(f64::INFINITY);
            checks.push(tol_check("holonomy phase vs direct", res, 1e-3));
        }
        (Err(e), _) | (_, Err(e)) => checks.push(check("phase consistency", false, e.to_string())),
    }

    suite("heavytop", checks)
}

fn kaluza_suite(seed: u64) -> SuiteResult {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut checks = Vec::new();
    let (e, m, b0) = (1.0, 1.0, 1.0);
    let field = MagneticField::uniform(Vec3::new(0.0, 0.0, b0));

    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let s = ChargedParticleState {
            q: rand_vec3(&mut rng, 2.0),
            p: rand_vec3(&mut rng, 2.0),
        };
        let (q1, p1) = kaluza::vfield_answer1(&s, &field, e, m);
        let (q2, p2) = kaluza::lorentz_rhs(&s, &field, e, m);
        worst = worst.max((q1 - q2).norm() + (p1 - p2).norm());
    }
    checks.push(tol_check(
        "magnetic symplectic form vs Lorentz",
        worst,
        1e-12,
    ));

    let v = 0.8;
    let s0 = ChargedParticleState {
        q: Vec3::zeros(),
        p: Vec3::new(m * v, 0.0, 0.1),
    };
    let (_, period) = kaluza::cyclotron(e, m, b0, v);
    let t1 = 5.0 * period;
    let dt = period / 1000.0;
    let tr1 = kaluza::integrate_lorentz(&s0, &field, e, m, t1, dt).unwrap();
    let s0_can = ChargedParticleState {
        q: s0.q,
        p: s0.p + e * field.potential(s0.q),
    };
    let tr2 = kaluza::integrate_answer2(&s0_can, &field, e, m, t1, dt).unwrap();
    checks.push(tol_check(
        "minimal coupling after momentum shift",
        kaluza::endpoint_gap(&tr1, &tr2, 0..3),
        1e-9,
    ));

    let s_kk = KKState {
        q: s0.q,
        theta: 0.0,
        p: s0.p + e * field.potential(s0.q),
        p_theta: e,
    };
    let tr3 = kaluza::integrate_kk(&s_kk, &field, m, t1, dt).unwrap();
    let a = tr1.last_state();
    let b = tr3.last_state();
    let gap = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
    checks.push(tol_check("reduced geodesic flow vs Lorentz", gap, 1e-8));

    let samples: Vec<Vec3> = (0..30).map(|_| rand_vec3(&mut rng, 2.0)).collect();
    let rep = kaluza::magnetic_two_form_check(&field, e, &samples);
    checks.push(tol_check("d(alpha_mu) = mu B", rep.max_residual, 1e-6));

    suite("kaluza", checks)
}

/// Runs every suite; `fault` injects a deliberate defect to exercise the
/// failure path.
pub fn run_selftest(fault: Option<Fault>) -> Vec<SuiteResult> {
    vec![
        liegroup_suite(2024),
        integrate_suite(),
        mechsys_suite(2025),
        rigidbody_suite(fault),
        heavytop_suite(),
        kaluza_suite(2026),
    ]
}

/// True when every suite passed.
pub fn all_passed(results: &[SuiteResult]) -> bool {
    results.iter().all(|s| s.passed)
}

/// Convenience for callers that want a single error out of a failed run.
pub fn as_error(results: &[SuiteResult]) -> Option<Error> {
    if all_passed(results) {
        None
    } else {
        Some(Error::BadParams("selftest failed"))
    }
}
