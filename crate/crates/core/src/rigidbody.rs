//! Free rigid body: reduced Euler dynamics on so(3)*, full attitude
//! dynamics, orbit classification, and the reconstruction-phase formulas
//! with cross-verification against the unreduced flow.
//!
//! Body and spatial angular momenta are distinct types on purpose; mixing
//! the frames is the dominant bug class in this corner of mechanics.

use crate::error::{Error, Result};
use crate::integrate::{quadrature, rk4_integrate, spherical_signed_area_about, Trajectory};
use crate::liegroup::{angle_about_axis, hat, wrap_angle, InertiaTensor, Mat3, Rotation, Vec3};
use crate::mechsys::{self, horizontal_lift, xi_step2};

/// Body angular momentum Pi (kg m^2/s, body frame). |Pi| is a Casimir of the
/// reduced flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyMomentum(pub Vec3);

/// Spatial angular momentum mu = R Pi (kg m^2/s, spatial frame); conserved
/// along the full flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialMomentum(pub Vec3);

impl BodyMomentum {
    pub fn to_spatial(&self, attitude: &Rotation) -> SpatialMomentum {
        SpatialMomentum(attitude.apply(self.0))
    }
}

impl SpatialMomentum {
    pub fn to_body(&self, attitude: &Rotation) -> BodyMomentum {
        BodyMomentum(attitude.apply_inverse(self.0))
    }

    pub fn magnitude(&self) -> f64 {
        self.0.norm()
    }

    pub fn axis(&self) -> Vec3 {
        self.0.normalize()
    }
}

/// Point of T*SO(3), left-trivialized: attitude plus body momentum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidBodyFullState {
    pub attitude: Rotation,
    pub momentum: BodyMomentum,
}

impl RigidBodyFullState {
    pub fn spatial_momentum(&self) -> SpatialMomentum {
        self.momentum.to_spatial(&self.attitude)
    }
}

/// Euler equations on so(3)*: Pidot = Pi x Omega with Omega = I^{-1} Pi.
pub fn euler_rhs(pi: BodyMomentum, inertia: &InertiaTensor) -> Vec3 {
    pi.0.cross(&inertia.apply_inv(pi.0))
}

/// Reduced Hamiltonian h(Pi) = 1/2 (Pi1^2/I1 + Pi2^2/I2 + Pi3^2/I3).
pub fn hamiltonian(pi: BodyMomentum, inertia: &InertiaTensor) -> f64 {
    0.5 * pi.0.dot(&inertia.apply_inv(pi.0))
}

/// Central-difference gradient of a scalar function on R^3.
pub fn fd_gradient(f: &dyn Fn(Vec3) -> f64, x: Vec3, h: f64) -> Vec3 {
    let mut g = Vec3::zeros();
    for i in 0..3 {
        let mut xp = x;
        let mut xm = x;
        xp[i] += h;
        xm[i] -= h;
        g[i] = (f(xp) - f(xm)) / (2.0 * h);
    }
    g
}

/// Minus Lie-Poisson bracket on so(3)*: {f, g}(Pi) = -Pi . (grad f x grad g),
/// with gradients supplied explicitly.
pub fn lie_poisson_bracket_grad(grad_f: Vec3, grad_g: Vec3, pi: Vec3) -> f64 {
    -pi.dot(&grad_f.cross(&grad_g))
}

/// Same bracket with finite-differenced gradients (h = 1e-6).
pub fn lie_poisson_bracket(f: &dyn Fn(Vec3) -> f64, g: &dyn Fn(Vec3) -> f64, pi: Vec3) -> f64 {
    let h = 1e-6;
    lie_poisson_bracket_grad(fd_gradient(f, pi, h), fd_gradient(g, pi, h), pi)
}

/// Unreduced geodesic flow on T*SO(3): Rdot = R hat(Omega), Pidot = Pi x
/// Omega. The spatial momentum R Pi is conserved analytically; its numeric
/// drift is a measured quantity.
pub fn full_rhs(state: &RigidBodyFullState, inertia: &InertiaTensor) -> (Mat3, Vec3) {
    let omega = inertia.apply_inv(state.momentum.0);
    (
        state.attitude.matrix() * hat(omega),
        state.momentum.0.cross(&omega),
    )
}

/// Flat layout of the full state: 9 row-major attitude entries then Pi.
pub fn flatten_full(state: &RigidBodyFullState) -> Vec<f64> {
    let mut y = Vec::with_capacity(12);
    let m = state.attitude.matrix();
    for r in 0..3 {
        for c in 0..3 {
            y.push(m[(r, c)]);
        }
    }
    y.extend_from_slice(state.momentum.0.as_slice());
    y
}

/// Inverse of `flatten_full`; does not re-project the attitude.
pub fn unflatten_full(y: &[f64]) -> RigidBodyFullState {
    let m = Mat3::new(y[0], y[1], y[2], y[3], y[4], y[5], y[6], y[7], y[8]);
    RigidBodyFullState {
        attitude: Rotation::from_matrix_projected_relaxed(m),
        momentum: BodyMomentum(Vec3::new(y[9], y[10], y[11])),
    }
}

impl Rotation {
    /// Wraps an integrator state that is orthonormal up to measured drift.
    pub(crate) fn from_matrix_projected_relaxed(m: Mat3) -> Rotation {
        Rotation::from_matrix(m).unwrap_or_else(|_| Rotation::from_matrix_projected(m))
    }
}

/// RHS closure over the flat 12-dimensional full state.
pub fn full_rhs_flat(inertia: &InertiaTensor) -> impl Fn(f64, &[f64]) -> Vec<f64> + '_ {
    move |_t, y| {
        let m = Mat3::new(y[0], y[1], y[2], y[3], y[4], y[5], y[6], y[7], y[8]);
        let pi = Vec3::new(y[9], y[10], y[11]);
        let omega = inertia.apply_inv(pi);
        let rdot = m * hat(omega);
        let pidot = pi.cross(&omega);
        let mut dy = Vec::with_capacity(12);
        for r in 0..3 {
            for c in 0..3 {
                dy.push(rdot[(r, c)]);
            }
        }
        dy.extend_from_slice(pidot.as_slice());
        dy
    }
}

/// Integrates the full attitude + momentum system over [0, t1].
pub fn integrate_full(
    state0: &RigidBodyFullState,
    inertia: &InertiaTensor,
    t1: f64,
    dt: f64,
) -> Result<Trajectory> {
    let mut tr = rk4_integrate(full_rhs_flat(inertia), &flatten_full(state0), 0.0, t1, dt)?;
    tr.labels = vec![
        "R11", "R12", "R13", "R21", "R22", "R23", "R31", "R32", "R33", "Pi1", "Pi2", "Pi3",
    ]
    .into_iter()
    .map(String::from)
    .collect();
    Ok(tr)
}

/// Orbit classes of the reduced flow for strictly ordered moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitClass {
    Equilibrium,
    Periodic,
    Separatrix,
}

/// Classifies the reduced orbit through Pi0. Equilibria are the principal
/// axes; the separatrix is the energy level 2h = |Pi|^2/I2 through the
/// middle axis; everything else is periodic. Requires I1 > I2 > I3.
pub fn classify_orbit(pi0: BodyMomentum, inertia: &InertiaTensor) -> Result<OrbitClass> {
    if !inertia.is_strictly_ordered() {
        return Err(Error::DegenerateInertia);
    }
    let p = pi0.0;
    let n = p.norm();
    if n == 0.0 {
        return Ok(OrbitClass::Equilibrium);
    }
    for axis in [Vec3::x(), Vec3::y(), Vec3::z()] {
        if p.cross(&axis).norm() / n < 1e-10 {
            return Ok(OrbitClass::Equilibrium);
        }
    }
    let two_h = 2.0 * hamiltonian(pi0, inertia);
    if (two_h - n * n / inertia.i2()).abs() < 1e-9 {
        return Ok(OrbitClass::Separatrix);
    }
    Ok(OrbitClass::Periodic)
}

/// Relative distance of the orbit's energy level from the separatrix level.
pub fn separatrix_margin(pi0: BodyMomentum, inertia: &InertiaTensor) -> f64 {
    let level = pi0.0.norm_squared() / inertia.i2();
    (2.0 * hamiltonian(pi0, inertia) - level).abs() / level
}

/// One period of the reduced flow, resampled on an even uniform grid.
#[derive(Debug, Clone)]
pub struct ReducedOrbitSamples {
    pub times: Vec<f64>,
    pub pi: Vec<Vec3>,
    pub period: f64,
}

impl ReducedOrbitSamples {
    pub fn closure_gap(&self) -> f64 {
        (self.pi[self.pi.len() - 1] - self.pi[0]).norm()
    }
}

/// Finds the period of the reduced orbit through `pi0` and resamples one
/// full period on `n_samples` uniform intervals (forced even for the
/// quadrature). Rejects equilibria (`NoReturn` surfaces from the detector)
/// and near-separatrix data.
pub fn periodic_orbit(
    pi0: BodyMomentum,
    inertia: &InertiaTensor,
    dt_detect: f64,
    t_max: f64,
    return_tol: f64,
    n_samples: usize,
) -> Result<ReducedOrbitSamples> {
    if separatrix_margin(pi0, inertia) < 1e-6 {
        return Err(Error::SeparatrixOrbit {
            rel: separatrix_margin(pi0, inertia),
        });
    }
    let rhs = |_t: f64, y: &[f64]| {
        euler_rhs(BodyMomentum(Vec3::new(y[0], y[1], y[2])), inertia)
            .as_slice()
            .to_vec()
    };
    let period =
        crate::integrate::detect_period(rhs, pi0.0.as_slice(), dt_detect, t_max, return_tol)?;

    let n = n_samples + n_samples % 2;
    let tr = rk4_integrate(rhs, pi0.0.as_slice(), 0.0, period, period / n as f64)?;
    let pi: Vec<Vec3> = tr
        .states
        .iter()
        .map(|s| Vec3::new(s[0], s[1], s[2]))
        .collect();
    Ok(ReducedOrbitSamples {
        times: tr.times,
        pi,
        period,
    })
}

/// One decomposition of the reconstruction phase.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PhaseEntry {
    pub method: String,
    /// Geometric part; absent for decompositions whose geometric term is a
    /// surface integral this artifact does not evaluate.
    pub geometric: Option<f64>,
    pub dynamic: f64,
    /// geometric + dynamic when both are available.
    pub total: Option<f64>,
}

/// Total, geometric, and dynamic phases with the method used for each and
/// the cross-check residuals.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PhaseReport {
    pub period: f64,
    pub h_mu: f64,
    pub mu: [f64; 3],
    pub mu_magnitude: f64,
    pub entries: Vec<PhaseEntry>,
    /// Phase of the full unreduced integration, when the caller ran it.
    pub direct: Option<f64>,
    /// |wrap(total_i - total_j)| over complete entry pairs, in index order.
    pub cross_residuals: Vec<f64>,
    /// |wrap(total_i - direct)| per entry, when both exist.
    pub residual_vs_direct: Vec<Option<f64>>,
}

impl PhaseReport {
    /// Attaches the direct-integration phase and recomputes residuals.
    pub fn with_direct(mut self, phi: f64) -> Self {
        self.direct = Some(phi);
        self.residual_vs_direct = self
            .entries
            .iter()
            .map(|e| e.total.map(|t| wrap_angle(t - phi).abs()))
            .collect();
        self
    }

    /// Entries whose total matches the direct phase within tol (mod 2 pi).
    pub fn consistent(&self, tol: f64) -> Vec<bool> {
        self.residual_vs_direct
            .iter()
            .map(|r| r.map(|x| x < tol).unwrap_or(false))
            .collect()
    }
}

fn cross_residuals(entries: &[PhaseEntry]) -> Vec<f64> {
    let totals: Vec<f64> = entries.iter().filter_map(|e| e.total).collect();
    let mut out = Vec::new();
    for i in 0..totals.len() {
        for j in i + 1..totals.len() {
            out.push(wrap_angle(totals[i] - totals[j]).abs());
        }
    }
    out
}

/// Phase decomposition of one reduced period, via both printed forms:
///
/// * solid-angle form: geometric = -Lambda (signed enclosed solid angle of
///   Pi(t)/|mu|), dynamic = 2 h T / |mu|;
/// * holonomy form: geometric = holonomy of the mechanical-connection lift,
///   dynamic = <mu, zeta> quadrature of 1/|zeta_Q|^2 along the lift,
///   evaluated from generators.
///
/// The complementary spherical cap is reported as a third entry; the two
/// caps differ by 4 pi, so both totals agree with the direct phase mod
/// 2 pi and the report flags each against it.
pub fn rigid_body_phase(
    orbit: &ReducedOrbitSamples,
    inertia: &InertiaTensor,
    initial_attitude: &Rotation,
    closure_tol: f64,
) -> Result<PhaseReport> {
    let pi0 = BodyMomentum(orbit.pi[0]);
    let margin = separatrix_margin(pi0, inertia);
    if margin < 1e-6 {
        return Err(Error::SeparatrixOrbit { rel: margin });
    }
    let gap = orbit.closure_gap();
    if gap >= closure_tol {
        return Err(Error::NotClosed {
            gap,
            tol: closure_tol,
        });
    }

    let mu = pi0.to_spatial(initial_attitude);
    let mu_norm = mu.magnitude();
    if mu_norm < 1e-12 {
        return Err(Error::ZeroMomentum { mu: mu_norm });
    }
    let zeta = mu.axis();
    let t_period = orbit.period;
    let h_mu = hamiltonian(pi0, inertia);

    // solid-angle form
    let base: Vec<Vec3> = orbit.pi.iter().map(|p| p / mu_norm).collect();
    let lp = crate::integrate::SphericalLoop::new(base.clone(), 10.0 * closure_tol / mu_norm)?;
    let axis = crate::integrate::choose_area_axis(&lp)?;
    let lambda = spherical_signed_area_about(&lp, axis)?;
    let dynamic_energy = 2.0 * h_mu * t_period / mu_norm;
    let solid_angle = PhaseEntry {
        method: "solid-angle".into(),
        geometric: Some(-lambda),
        dynamic: dynamic_energy,
        total: Some(-lambda + dynamic_energy),
    };

    // the complementary cap differs by the full sphere
    let lambda_alt = lambda - 4.0 * std::f64::consts::PI;
    let alternate = PhaseEntry {
        method: "solid-angle-complement-cap".into(),
        geometric: Some(-lambda_alt),
        dynamic: dynamic_energy,
        total: Some(-lambda_alt + dynamic_energy),
    };

    // holonomy form along the mechanical-connection lift
    let lift = horizontal_lift(&orbit.times, &base, initial_attitude, zeta, inertia)?;
    let chi = lift.holonomy(zeta, (10.0 * gap / mu_norm).max(1e-6))?;
    let xi: Vec<f64> = lift
        .rotations
        .iter()
        .map(|r| xi_step2(r, mu.0, zeta, inertia))
        .collect::<Result<_>>()?;
    let dt = orbit.times[1] - orbit.times[0];
    let dynamic_quad = quadrature(&xi, dt)?;
    let holonomy = PhaseEntry {
        method: "holonomy".into(),
        geometric: Some(chi),
        dynamic: dynamic_quad,
        total: Some(chi + dynamic_quad),
    };

    let entries = vec![solid_angle, holonomy, alternate];
    let cross = cross_residuals(&entries);
    Ok(PhaseReport {
        period: t_period,
        h_mu,
        mu: [mu.0.x, mu.0.y, mu.0.z],
        mu_magnitude: mu_norm,
        entries,
        direct: None,
        cross_residuals: cross,
        residual_vs_direct: vec![None; 3],
    })
}

/// Phase of the full unreduced trajectory: the angle about mu/|mu| of
/// R(T) R(0)^{-1}, the group element carrying the initial phase point to
/// the final one.
pub fn direct_phase(full_traj: &Trajectory, axis_tol: f64) -> Result<f64> {
    let first = unflatten_full(&full_traj.states[0]);
    let last = unflatten_full(full_traj.last_state());
    let mu = first.spatial_momentum();
    let g = last.attitude.compose(&first.attitude.transpose());
    angle_about_axis(&g, mu.axis(), axis_tol)
}

/// Runs the unreduced oracle for one period of `orbit` from
/// `initial_attitude` at dt = T / n_steps and extracts the direct phase.
pub fn direct_phase_for_orbit(
    orbit: &ReducedOrbitSamples,
    inertia: &InertiaTensor,
    initial_attitude: &Rotation,
    n_steps: usize,
    axis_tol: f64,
) -> Result<f64> {
    let state0 = RigidBodyFullState {
        attitude: *initial_attitude,
        momentum: BodyMomentum(orbit.pi[0]),
    };
    let tr = integrate_full(
        &state0,
        inertia,
        orbit.period,
        orbit.period / n_steps as f64,
    )?;
    direct_phase(&tr, axis_tol)
}

/// Conserved-quantity drift of a full trajectory: max relative energy
/// drift, max relative Casimir drift, max spatial-momentum error.
pub fn full_trajectory_drift(tr: &Trajectory, inertia: &InertiaTensor) -> (f64, f64, f64) {
    let first = unflatten_full(&tr.states[0]);
    let h0 = hamiltonian(first.momentum, inertia);
    let c0 = first.momentum.0.norm_squared();
    let mu0 = first.spatial_momentum().0;
    let mut dh: f64 = 0.0;
    let mut dc: f64 = 0.0;
    let mut dmu: f64 = 0.0;
    for s in &tr.states {
        let st = unflatten_full(s);
        dh = dh.max((hamiltonian(st.momentum, inertia) - h0).abs() / h0.abs().max(1e-300));
        dc = dc.max((st.momentum.0.norm_squared() - c0).abs() / c0.max(1e-300));
        dmu = dmu.max((st.spatial_momentum().0 - mu0).norm());
    }
    (dh, dc, dmu)
}

/// Reconstruction problem for this orbit (used by the generic engine).
pub fn reconstruction_problem(
    orbit: &ReducedOrbitSamples,
    inertia: &InertiaTensor,
    initial_attitude: &Rotation,
    connection: mechsys::ConnectionKind,
) -> mechsys::ReconstructionProblem {
    let mu = BodyMomentum(orbit.pi[0]).to_spatial(initial_attitude);
    mechsys::ReconstructionProblem {
        orbit: mechsys::ReducedOrbit::RigidBody {
            times: orbit.times.clone(),
            pi: orbit.pi.clone(),
            mu: mu.0,
        },
        initial_attitude: *initial_attitude,
        inertia: *inertia,
        connection,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liegroup::exp_so3;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    fn inertia321() -> InertiaTensor {
        InertiaTensor::new(3.0, 2.0, 1.0).unwrap()
    }

    #[test]
    fn euler_rhs_spec_values() {
        let i = inertia321();
        // principal axis: relative equilibrium
        let r = euler_rhs(BodyMomentum(Vec3::new(1.3, 0.0, 0.0)), &i);
        assert!(r.norm() < 1e-15);
        // spherical body: Omega parallel to Pi everywhere
        let sph = InertiaTensor::new(2.0, 2.0, 2.0).unwrap();
        let r = euler_rhs(BodyMomentum(Vec3::new(0.3, -1.0, 0.7)), &sph);
        assert!(r.norm() < 1e-15);
        // direct cross-product oracle
        let i = InertiaTensor::new(2.0, 1.5, 1.0).unwrap();
        let r = euler_rhs(BodyMomentum(Vec3::new(0.0, 1.0, 1.0)), &i);
        let expected = Vec3::new(1.0, 1.0, 1.0).cross(&Vec3::new(0.0, 2.0 / 3.0, 1.0));
        let _ = expected;
        assert!((r - Vec3::new(1.0 / 3.0, 0.0, 0.0)).norm() < 1e-15, "{r:?}");
    }

    #[test]
    fn hamiltonian_spec_values() {
        let i = InertiaTensor::new(2.0, 1.5, 1.0).unwrap();
        let h = hamiltonian(BodyMomentum(Vec3::x()), &i);
        assert_eq!(h, 0.25);
        let p = BodyMomentum(Vec3::new(0.4, -0.2, 0.9));
        assert!(
            (hamiltonian(BodyMomentum(2.0 * p.0), &i) - 4.0 * hamiltonian(p, &i)).abs() < 1e-15
        );
    }

    #[test]
    fn bracket_antisymmetry_and_structure_constants() {
        let f = |p: Vec3| p.x;
        let g = |p: Vec3| p.y;
        let at = Vec3::new(0.0, 0.0, 1.0);
        let b = lie_poisson_bracket(&f, &g, at);
        assert!((b - (-1.0)).abs() < 1e-9, "structure constant: {b}");
        let q = |p: Vec3| p.x * p.y + p.z.sin();
        assert!(lie_poisson_bracket(&q, &q, at).abs() < 1e-12);
    }

    #[test]
    fn bracket_generates_euler_flow() {
        let i = inertia321();
        let h = move |p: Vec3| 0.5 * p.dot(&i.apply_inv(p));
        let mut rng = StdRng::seed_from_u64(211);
        for _ in 0..100 {
            let p = Vec3::new(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            );
            let rhs = euler_rhs(BodyMomentum(p), &i);
            for (idx, coord) in [(0usize, "x"), (1, "y"), (2, "z")] {
                let fi = move |q: Vec3| q[idx];
                let b = lie_poisson_bracket(&fi, &h, p);
                assert!(
                    (b - rhs[idx]).abs() < 1e-6,
                    "component {coord}: bracket {b} vs rhs {}",
                    rhs[idx]
                );
            }
        }
    }

    #[test]
    fn bracket_kills_casimir() {
        let mut rng = StdRng::seed_from_u64(212);
        let casimir = |p: Vec3| p.norm_squared();
        for _ in 0..20 {
            let p = Vec3::new(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            );
            let a = rng.gen_range(-1.0..1.0);
            let g = move |q: Vec3| a * q.x * q.z + (q.y * 0.7).cos();
            assert!(lie_poisson_bracket(&casimir, &g, p).abs() < 1e-9);
        }
    }

    #[test]
    fn full_flow_equilibrium_is_uniform_rotation() {
        let i = inertia321();
        let mu_norm = 1.4;
        let state0 = RigidBodyFullState {
            attitude: Rotation::identity(),
            momentum: BodyMomentum(Vec3::new(mu_norm, 0.0, 0.0)),
        };
        let t1 = 5.0;
        let tr = integrate_full(&state0, &i, t1, 1e-3).unwrap();
        let last = unflatten_full(tr.last_state());
        let expected = exp_so3(Vec3::new(t1 * mu_norm / 3.0, 0.0, 0.0));
        assert!(last.attitude.distance(&expected) < 1e-9);
    }

    #[test]
    fn full_flow_conserves_momentum_and_energy() {
        let i = inertia321();
        let state0 = RigidBodyFullState {
            attitude: exp_so3(Vec3::new(0.2, -0.4, 0.8)),
            momentum: BodyMomentum(Vec3::new(0.9, 0.25, 0.1)),
        };
        let orbit = periodic_orbit(state0.momentum, &i, 1e-3, 100.0, 1e-6, 1000).unwrap();
        let tr = integrate_full(&state0, &i, orbit.period, 1e-3).unwrap();
        let (dh, dc, dmu) = full_trajectory_drift(&tr, &i);
        assert!(dh < 1e-8, "energy drift {dh}");
        assert!(dc < 1e-8, "casimir drift {dc}");
        assert!(dmu < 1e-8, "spatial momentum drift {dmu}");
    }

    #[test]
    fn classify_orbit_spec_cases() {
        let i = inertia321();
        assert_eq!(
            classify_orbit(BodyMomentum(Vec3::new(2.0, 0.0, 0.0)), &i).unwrap(),
            OrbitClass::Equilibrium
        );
        // separatrix: 2h = |Pi|^2 / I2 off the middle axis
        // pick Pi = (a, 0, c) with a^2/I1 + c^2/I3 = (a^2+c^2)/I2
        let a = 1.0;
        let c = (a * a * (1.0f64 / 2.0 - 1.0 / 3.0) / (1.0 - 1.0 / 2.0)).sqrt();
        let pi = BodyMomentum(Vec3::new(a, 0.0, c));
        assert_eq!(classify_orbit(pi, &i).unwrap(), OrbitClass::Separatrix);
        assert_eq!(
            classify_orbit(BodyMomentum(Vec3::new(1.0, 0.2, 0.1)), &i).unwrap(),
            OrbitClass::Periodic
        );
        let sym = InertiaTensor::new(2.0, 2.0, 1.0).unwrap();
        assert!(matches!(
            classify_orbit(BodyMomentum(Vec3::x()), &sym),
            Err(Error::DegenerateInertia)
        ));
    }

    #[test]
    fn classified_periodic_orbit_has_detectable_period() {
        let i = inertia321();
        let pi0 = BodyMomentum(Vec3::new(1.0, 0.2, 0.1));
        assert_eq!(classify_orbit(pi0, &i).unwrap(), OrbitClass::Periodic);
        let orbit = periodic_orbit(pi0, &i, 1e-3, 100.0, 1e-6, 2000).unwrap();
        assert!(orbit.period > 0.0);
        assert!(orbit.closure_gap() < 1e-6);
    }

    #[test]
    fn period_matches_dense_oracle() {
        // oracle: dense integration at dt/100 with parabolic refinement of
        // the closest return
        let i = inertia321();
        let pi0 = Vec3::new(1.0, 0.25, 0.15);
        let orbit = periodic_orbit(BodyMomentum(pi0), &i, 1e-3, 100.0, 1e-6, 1000).unwrap();

        let rhs = |_t: f64, y: &[f64]| {
            euler_rhs(BodyMomentum(Vec3::new(y[0], y[1], y[2])), &i)
                .as_slice()
                .to_vec()
        };
        let dt = 1e-5;
        let tr = rk4_integrate(rhs, pi0.as_slice(), 0.0, 1.2 * orbit.period, dt).unwrap();
        let mut best = (f64::INFINITY, 0usize);
        for (k, s) in tr.states.iter().enumerate() {
            if tr.times[k] < 10.0 * dt {
                continue;
            }
            let d = (Vec3::new(s[0], s[1], s[2]) - pi0).norm();
            if d < best.0 {
                best = (d, k);
            }
        }
        let k = best.1;
        // parabola through (k-1, k, k+1) on squared distance
        let d2 = |j: usize| {
            let s = &tr.states[j];
            (Vec3::new(s[0], s[1], s[2]) - pi0).norm_squared()
        };
        let denom = d2(k - 1) - 2.0 * d2(k) + d2(k + 1);
        let delta = 0.5 * (d2(k - 1) - d2(k + 1)) / denom;
        let t_oracle = tr.times[k] + delta * dt;
        assert!(
            (orbit.period - t_oracle).abs() < 1e-6,
            "period {} vs oracle {t_oracle}",
            orbit.period
        );
    }

    #[test]
    fn equilibrium_direct_phase_is_analytic() {
        let i = inertia321();
        let t1 = 4.0;
        let mu_norm = 1.2;
        let state0 = RigidBodyFullState {
            attitude: Rotation::identity(),
            momentum: BodyMomentum(Vec3::new(mu_norm, 0.0, 0.0)),
        };
        let tr = integrate_full(&state0, &i, t1, 1e-3).unwrap();
        let phi = direct_phase(&tr, 1e-6).unwrap();
        assert!((phi - wrap_angle(t1 * mu_norm / 3.0)).abs() < 1e-9);
    }

    #[test]
    fn spherical_body_direct_phase() {
        let v: f64 = 2.0;
        let sph = InertiaTensor::new(v, v, v).unwrap();
        let t1 = 3.0;
        let state0 = RigidBodyFullState {
            attitude: exp_so3(Vec3::new(0.1, 0.7, -0.3)),
            momentum: BodyMomentum(Vec3::new(0.4, -0.8, 1.0)),
        };
        let tr = integrate_full(&state0, &sph, t1, 1e-3).unwrap();
        let phi = direct_phase(&tr, 1e-6).unwrap();
        let mu_norm = state0.momentum.0.norm();
        assert!((phi - wrap_angle(t1 * mu_norm / v)).abs() < 1e-8);
    }

    fn phase_case(pi0: Vec3, i: &InertiaTensor, n: usize) -> (PhaseReport, f64) {
        let orbit = periodic_orbit(BodyMomentum(pi0), i, 1e-3, 200.0, 1e-7, n).unwrap();
        let r0 = Rotation::identity();
        let report = rigid_body_phase(&orbit, i, &r0, 1e-6).unwrap();
        let phi = direct_phase_for_orbit(&orbit, i, &r0, 20_000, 1e-5).unwrap();
        (report.with_direct(phi), phi)
    }

    #[test]
    fn phase_forms_agree_near_long_axis() {
        let i = inertia321();
        let (report, _phi) = phase_case(Vec3::new(0.98, 0.15, 0.1), &i, 20_000);
        // decomposition invariant: total is exactly geometric + dynamic
        for e in &report.entries {
            if let (Some(g), Some(t)) = (e.geometric, e.total) {
                assert_eq!(t, g + e.dynamic);
            }
        }
        // the two formula forms agree with each other
        assert!(
            report.cross_residuals[0] < 1e-4,
            "cross residual {}",
            report.cross_residuals[0]
        );
        // and with the unreduced oracle
        for (k, r) in report.residual_vs_direct.iter().enumerate() {
            let r = r.unwrap();
            assert!(r < 1e-3, "entry {k} residual {r}");
        }
    }

    #[test]
    fn phase_forms_agree_near_short_axis() {
        let i = inertia321();
        let (report, _phi) = phase_case(Vec3::new(0.12, 0.18, 0.97), &i, 20_000);
        assert!(report.cross_residuals[0] < 1e-4);
        for r in report.residual_vs_direct.iter().flatten() {
            assert!(*r < 1e-3);
        }
    }

    #[test]
    fn cap_flip_changes_total_by_full_sphere() {
        let i = inertia321();
        let (report, phi) = phase_case(Vec3::new(0.95, 0.2, 0.18), &i, 20_000);
        let t_main = report.entries[0].total.unwrap();
        let t_alt = report.entries[2].total.unwrap();
        assert!(
            (t_alt - t_main - 4.0 * PI).abs() < 1e-12,
            "cap flip must shift by 4 pi"
        );
        // both caps match the direct phase mod 2 pi
        assert!(wrap_angle(t_main - phi).abs() < 1e-3);
        assert!(wrap_angle(t_alt - phi).abs() < 1e-3);
        let flags = report.consistent(1e-3);
        assert!(flags[0] && flags[2]);
    }

    #[test]
    fn time_reversal_negates_phase() {
        let i = inertia321();
        let pi0 = Vec3::new(0.96, 0.2, 0.14);
        let orbit = periodic_orbit(BodyMomentum(pi0), &i, 1e-3, 200.0, 1e-7, 20_000).unwrap();
        let r0 = Rotation::identity();
        let phi = direct_phase_for_orbit(&orbit, &i, &r0, 20_000, 1e-5).unwrap();

        // integrate the full system backward over one period
        let state0 = RigidBodyFullState {
            attitude: r0,
            momentum: BodyMomentum(pi0),
        };
        let fwd = full_rhs_flat(&i);
        let bwd = |t: f64, y: &[f64]| fwd(t, y).into_iter().map(|v| -v).collect::<Vec<f64>>();
        let tr = rk4_integrate(
            bwd,
            &flatten_full(&state0),
            0.0,
            orbit.period,
            orbit.period / 20_000.0,
        )
        .unwrap();
        let phi_bwd = direct_phase(&tr, 1e-5).unwrap();
        assert!(
            wrap_angle(phi + phi_bwd).abs() < 1e-3,
            "phi {phi} phi_bwd {phi_bwd}"
        );

        // formula side: reversed loop flips the area sign, time reversal
        // flips the dynamic term
        let report = rigid_body_phase(&orbit, &i, &r0, 1e-6).unwrap();
        let geo = report.entries[0].geometric.unwrap();
        let dyn_ = report.entries[0].dynamic;
        let total_bwd = -geo - dyn_;
        assert!(wrap_angle(total_bwd - phi_bwd).abs() < 1e-3);
    }

    #[test]
    fn separatrix_guard_rejects() {
        let i = inertia321();
        let a = 1.0;
        let c = (a * a * (1.0f64 / 2.0 - 1.0 / 3.0) / (1.0 - 1.0 / 2.0)).sqrt();
        let pi0 = BodyMomentum(Vec3::new(a, 1e-9, c));
        assert!(matches!(
            periodic_orbit(pi0, &i, 1e-3, 50.0, 1e-6, 100),
            Err(Error::SeparatrixOrbit { .. })
        ));
    }

    #[test]
    fn reconstruction_matches_direct_integration() {
        let i = inertia321();
        let pi0 = Vec3::new(0.97, 0.2, 0.12);
        let orbit = periodic_orbit(BodyMomentum(pi0), &i, 1e-3, 200.0, 1e-7, 20_000).unwrap();
        let r0 = exp_so3(Vec3::new(0.3, -0.2, 0.5));
        let problem = reconstruction_problem(&orbit, &i, &r0, mechsys::ConnectionKind::Mechanical);
        let rec = mechsys::reconstruct(&problem).unwrap();

        let state0 = RigidBodyFullState {
            attitude: r0,
            momentum: BodyMomentum(pi0),
        };
        let tr = integrate_full(&state0, &i, orbit.period, orbit.period / 20_000.0).unwrap();
        let direct_last = unflatten_full(tr.last_state());
        let gap = rec
            .attitudes
            .last()
            .unwrap()
            .distance(&direct_last.attitude);
        assert!(gap < 1e-5, "attitude gap {gap}");

        // momentum map along the reconstructed curve
        let mu = r0.apply(pi0);
        for k in (0..rec.times.len()).step_by(397) {
            assert!((rec.momentum_map(k) - mu).norm() < 1e-7);
        }
    }

    #[test]
    fn reconstruction_of_equilibrium_is_exact_rotation() {
        let i = inertia321();
        let mu_norm = 1.1;
        let pi0 = Vec3::new(mu_norm, 0.0, 0.0);
        let t1 = 6.0;
        let n = 600;
        let times: Vec<f64> = (0..=n).map(|k| k as f64 * t1 / n as f64).collect();
        let pi = vec![pi0; n + 1];
        let r0 = Rotation::identity();
        let problem = mechsys::ReconstructionProblem {
            orbit: mechsys::ReducedOrbit::RigidBody {
                times,
                pi,
                mu: r0.apply(pi0),
            },
            initial_attitude: r0,
            inertia: i,
            connection: mechsys::ConnectionKind::Mechanical,
        };
        let rec = mechsys::reconstruct(&problem).unwrap();
        let expected = exp_so3(Vec3::new(t1 * mu_norm / 3.0, 0.0, 0.0));
        let gap = rec.attitudes.last().unwrap().distance(&expected);
        assert!(gap < 1e-9, "gap {gap}");
    }

    #[test]
    fn canonical_connection_reconstruction_agrees() {
        // both connection choices must reconstruct the same motion, and the
        // canonical lift's holonomy is the solid-angle geometric phase
        let i = inertia321();
        let pi0 = Vec3::new(0.95, 0.22, 0.15);
        let orbit = periodic_orbit(BodyMomentum(pi0), &i, 1e-3, 200.0, 1e-7, 20_000).unwrap();
        let r0 = Rotation::identity();

        let rec_mech = mechsys::reconstruct(&reconstruction_problem(
            &orbit,
            &i,
            &r0,
            mechsys::ConnectionKind::Mechanical,
        ))
        .unwrap();
        let rec_can = mechsys::reconstruct(&reconstruction_problem(
            &orbit,
            &i,
            &r0,
            mechsys::ConnectionKind::CanonicalOneForm,
        ))
        .unwrap();
        let gap = rec_mech
            .attitudes
            .last()
            .unwrap()
            .distance(rec_can.attitudes.last().unwrap());
        assert!(gap < 1e-5, "connections disagree by {gap}");

        // canonical dynamic phase = 2 h T / |mu| (Liouville pairing)
        let h = hamiltonian(BodyMomentum(pi0), &i);
        let mu_norm = pi0.norm();
        let expected_dyn = 2.0 * h * orbit.period / mu_norm;
        assert!((rec_can.theta.last().unwrap() - expected_dyn).abs() < 1e-10);

        // canonical holonomy = -Lambda mod 2 pi
        let report = rigid_body_phase(&orbit, &i, &r0, 1e-6).unwrap();
        let minus_lambda = report.entries[0].geometric.unwrap();
        let mu = r0.apply(pi0);
        let zeta = mu.normalize();
        let h_end = rec_can
            .lift
            .last()
            .unwrap()
            .compose(&rec_can.lift[0].transpose());
        let chi_can = angle_about_axis(&h_end, zeta, 1e-5).unwrap();
        assert!(
            wrap_angle(chi_can - minus_lambda).abs() < 1e-4,
            "chi_can {chi_can} vs -Lambda {minus_lambda}"
        );
    }
}
