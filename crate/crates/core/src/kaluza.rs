//! Charged particle in a magnetic field: the Lorentz force law, its two
//! Hamiltonian formulations (magnetic symplectic form vs. minimal
//! coupling), and the Kaluza-Klein geodesic flow whose reduction at fixed
//! charge reproduces the particle dynamics.
//!
//! The magnetic field enters through its vector potential A, so B = curl A
//! is divergence free by construction. Built-in fields carry analytic
//! Jacobians; the finite-difference fallback is good to ~1e-9 and is only
//! used for caller-supplied potentials.

use crate::error::{Error, Result};
use crate::integrate::{rk4_integrate, Trajectory};
use crate::liegroup::{Mat3, Vec3};
use nalgebra::{Matrix6, Vector6};

/// Position and kinetic momentum p = m v of a charged particle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChargedParticleState {
    pub q: Vec3,
    pub p: Vec3,
}

/// Kaluza-Klein phase point: particle position, circle angle, canonical
/// momenta. `p_theta` is the conserved charge coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KKState {
    pub q: Vec3,
    pub theta: f64,
    /// Canonical momentum conjugate to q (kinetic momentum plus
    /// p_theta A(q)).
    pub p: Vec3,
    pub p_theta: f64,
}

type PotentialFn = Box<dyn Fn(Vec3) -> Vec3 + Send + Sync>;
type JacobianFn = Box<dyn Fn(Vec3) -> Mat3 + Send + Sync>;

/// A magnetic field given by its vector potential; B = curl A.
pub struct MagneticField {
    a: PotentialFn,
    /// Jacobian G with G[(i, j)] = dA_j / dq_i; analytic for the built-in
    /// fields, finite-differenced otherwise.
    grad: Option<JacobianFn>,
}

impl MagneticField {
    /// Uniform field B0 from the symmetric gauge A = 1/2 B0 x q.
    pub fn uniform(b0: Vec3) -> Self {
        let j = 0.5 * crate::liegroup::hat(b0);
        MagneticField {
            a: Box::new(move |q| 0.5 * b0.cross(&q)),
            grad: Some(Box::new(move |_| j.transpose())),
        }
    }

    /// B = (0, 0, b0 (1 + alpha x)): a linear-gradient field from
    /// A = (0, b0 (x + alpha x^2 / 2), 0).
    pub fn linear_gradient(b0: f64, alpha: f64) -> Self {
        MagneticField {
            a: Box::new(move |q| Vec3::new(0.0, b0 * (q.x + 0.5 * alpha * q.x * q.x), 0.0)),
            grad: Some(Box::new(move |q| {
                let mut g = Mat3::zeros();
                g[(0, 1)] = b0 * (1.0 + alpha * q.x);
                g
            })),
        }
    }

    /// Beltrami test field: A = (a sin z + c cos y, b sin x + a cos z,
    /// c sin y + b cos x); curl A equals A itself, so B is dipole-free and
    /// fully three-dimensional.
    pub fn abc(a: f64, b: f64, c: f64) -> Self {
        MagneticField {
            a: Box::new(move |q| {
                Vec3::new(
                    a * q.z.sin() + c * q.y.cos(),
                    b * q.x.sin() + a * q.z.cos(),
                    c * q.y.sin() + b * q.x.cos(),
                )
            }),
            grad: Some(Box::new(move |q| {
                Mat3::new(
                    0.0,
                    b * q.x.cos(),
                    -b * q.x.sin(),
                    -c * q.y.sin(),
                    0.0,
                    c * q.y.cos(),
                    a * q.z.cos(),
                    -a * q.z.sin(),
                    0.0,
                )
            })),
        }
    }

    /// Caller-supplied analytic potential; derivatives fall back to central
    /// differences.
    pub fn from_potential(a: impl Fn(Vec3) -> Vec3 + Send + Sync + 'static) -> Self {
        MagneticField {
            a: Box::new(a),
            grad: None,
        }
    }

    /// Adds the pure-gauge term c grad(x y) = c (y, x, 0) to the potential.
    /// B is unchanged; only gauge-dependent quantities move.
    pub fn with_gauge_xy(self, c: f64) -> Self {
        let base_a = self.a;
        let grad = self.grad.map(|base_g| -> JacobianFn {
            Box::new(move |q: Vec3| {
                let mut g = base_g(q);
                g[(0, 1)] += c;
                g[(1, 0)] += c;
                g
            })
        });
        MagneticField {
            a: Box::new(move |q| base_a(q) + c * Vec3::new(q.y, q.x, 0.0)),
            grad,
        }
    }

    pub fn potential(&self, q: Vec3) -> Vec3 {
        (self.a)(q)
    }

    /// Jacobian G[(i, j)] = dA_j / dq_i.
    pub fn potential_jacobian(&self, q: Vec3) -> Mat3 {
        if let Some(g) = &self.grad {
            return g(q);
        }
        let h = 1e-6;
        let mut g = Mat3::zeros();
        for i in 0..3 {
            let mut qp = q;
            let mut qm = q;
            qp[i] += h;
            qm[i] -= h;
            let d = ((self.a)(qp) - (self.a)(qm)) / (2.0 * h);
            for j in 0..3 {
                g[(i, j)] = d[j];
            }
        }
        g
    }

    /// B = curl A from the potential Jacobian.
    pub fn b(&self, q: Vec3) -> Vec3 {
        let g = self.potential_jacobian(q);
        Vec3::new(
            g[(1, 2)] - g[(2, 1)],
            g[(2, 0)] - g[(0, 2)],
            g[(0, 1)] - g[(1, 0)],
        )
    }

    /// Max |div B| over the sample points, by central differences of `b`.
    pub fn div_b_residual(&self, samples: &[Vec3]) -> f64 {
        let h = 1e-4;
        let mut worst: f64 = 0.0;
        for &q in samples {
            let mut div = 0.0;
            for i in 0..3 {
                let mut qp = q;
                let mut qm = q;
                qp[i] += h;
                qm[i] -= h;
                div += (self.b(qp)[i] - self.b(qm)[i]) / (2.0 * h);
            }
            worst = worst.max(div.abs());
        }
        worst
    }
}

/// Lorentz force law: qdot = p/m, pdot = e (p/m) x B(q).
pub fn lorentz_rhs(
    s: &ChargedParticleState,
    field: &MagneticField,
    e: f64,
    m: f64,
) -> (Vec3, Vec3) {
    let v = s.p / m;
    (v, e * v.cross(&field.b(s.q)))
}

/// Hamiltonian vector field of the kinetic energy relative to the magnetic
/// symplectic form Omega_B = Omega_can - e B, obtained by a pointwise
/// 6x6 linear solve of Omega_B(X_h, .) = dh. Must agree with `lorentz_rhs`.
pub fn vfield_answer1(
    s: &ChargedParticleState,
    field: &MagneticField,
    e: f64,
    m: f64,
) -> (Vec3, Vec3) {
    // matrix of Omega_B in the basis (q, p): [[e hat(B), I], [-I, 0]]
    let b = field.b(s.q);
    let hb = crate::liegroup::hat(b);
    let mut omega = Matrix6::<f64>::zeros();
    for i in 0..3 {
        for j in 0..3 {
            omega[(i, j)] = e * hb[(i, j)];
        }
        omega[(i, i + 3)] = 1.0;
        omega[(i + 3, i)] = -1.0;
    }
    // dh for h = |p|^2 / 2m
    let mut dh = Vector6::<f64>::zeros();
    for i in 0..3 {
        dh[i + 3] = s.p[i] / m;
    }
    // Omega(X, v) = X^T M v = dh(v) for all v  =>  M^T X = dh
    let x = omega
        .transpose()
        .lu()
        .solve(&dh)
        .expect("magnetic symplectic form is nondegenerate");
    (Vec3::new(x[0], x[1], x[2]), Vec3::new(x[3], x[4], x[5]))
}

/// Canonical Hamilton equations of the minimally coupled Hamiltonian
/// h_A = |p - e A(q)|^2 / 2m. Here `p` is the canonical momentum.
pub fn vfield_answer2(
    s: &ChargedParticleState,
    field: &MagneticField,
    e: f64,
    m: f64,
) -> (Vec3, Vec3) {
    let a = field.potential(s.q);
    let g = field.potential_jacobian(s.q);
    let v = (s.p - e * a) / m;
    // pdot_i = (e/m) sum_j (p - eA)_j dA_j/dq_i
    (v, e * g * v)
}

/// Kaluza-Klein geodesic equations in canonical coordinates for the metric
/// |dq|^2 (mass m) + (dtheta + A . dq)^2: p_theta is exactly conserved and
/// plays the role of the charge.
pub fn kk_geodesic_rhs(s: &KKState, field: &MagneticField, m: f64) -> (Vec3, f64, Vec3, f64) {
    let a = field.potential(s.q);
    let g = field.potential_jacobian(s.q);
    let v = (s.p - s.p_theta * a) / m;
    let qdot = v;
    let theta_dot = s.p_theta - a.dot(&v);
    let pdot = s.p_theta * (g * v);
    (qdot, theta_dot, pdot, 0.0)
}

/// KK Hamiltonian h = |p - p_theta A|^2 / 2m + p_theta^2 / 2.
pub fn kk_hamiltonian(s: &KKState, field: &MagneticField, m: f64) -> f64 {
    let a = field.potential(s.q);
    (s.p - s.p_theta * a).norm_squared() / (2.0 * m) + 0.5 * s.p_theta * s.p_theta
}

/// Flat-state integrators. Layouts: Lorentz/Answer-2: [q, p];
/// KK: [q, theta, p, p_theta].
pub fn integrate_lorentz(
    s0: &ChargedParticleState,
    field: &MagneticField,
    e: f64,
    m: f64,
    t1: f64,
    dt: f64,
) -> Result<Trajectory> {
    let rhs = |_t: f64, y: &[f64]| {
        let s = ChargedParticleState {
            q: Vec3::new(y[0], y[1], y[2]),
            p: Vec3::new(y[3], y[4], y[5]),
        };
        let (qd, pd) = lorentz_rhs(&s, field, e, m);
        vec![qd.x, qd.y, qd.z, pd.x, pd.y, pd.z]
    };
    let y0 = [s0.q.x, s0.q.y, s0.q.z, s0.p.x, s0.p.y, s0.p.z];
    let mut tr = rk4_integrate(rhs, &y0, 0.0, t1, dt)?;
    tr.labels = vec!["qx", "qy", "qz", "px", "py", "pz"]
        .into_iter()
        .map(String::from)
        .collect();
    Ok(tr)
}

pub fn integrate_answer2(
    s0: &ChargedParticleState,
    field: &MagneticField,
    e: f64,
    m: f64,
    t1: f64,
    dt: f64,
) -> Result<Trajectory> {
    let rhs = |_t: f64, y: &[f64]| {
        let s = ChargedParticleState {
            q: Vec3::new(y[0], y[1], y[2]),
            p: Vec3::new(y[3], y[4], y[5]),
        };
        let (qd, pd) = vfield_answer2(&s, field, e, m);
        vec![qd.x, qd.y, qd.z, pd.x, pd.y, pd.z]
    };
    let y0 = [s0.q.x, s0.q.y, s0.q.z, s0.p.x, s0.p.y, s0.p.z];
    rk4_integrate(rhs, &y0, 0.0, t1, dt)
}

pub fn integrate_kk(
    s0: &KKState,
    field: &MagneticField,
    m: f64,
    t1: f64,
    dt: f64,
) -> Result<Trajectory> {
    let rhs = |_t: f64, y: &[f64]| {
        let s = KKState {
            q: Vec3::new(y[0], y[1], y[2]),
            theta: y[3],
            p: Vec3::new(y[4], y[5], y[6]),
            p_theta: y[7],
        };
        let (qd, td, pd, ptd) = kk_geodesic_rhs(&s, field, m);
        vec![qd.x, qd.y, qd.z, td, pd.x, pd.y, pd.z, ptd]
    };
    let y0 = [
        s0.q.x, s0.q.y, s0.q.z, s0.theta, s0.p.x, s0.p.y, s0.p.z, s0.p_theta,
    ];
    rk4_integrate(rhs, &y0, 0.0, t1, dt)
}

/// Report of the finite-difference check d alpha_mu = mu B on the
/// Kaluza-Klein bundle, where alpha_mu = mu (A . dq + dtheta).
#[derive(Debug, Clone, serde::Serialize)]
pub struct TwoFormReport {
    pub max_residual: f64,
    pub points_checked: usize,
}

/// Verifies by central differences that the exterior derivative of
/// mu (A_x dx + A_y dy + A_z dz + dtheta) equals mu times the B two-form
/// (B_x dy^dz - B_y dx^dz + B_z dx^dy) at the sample points.
pub fn magnetic_two_form_check(field: &MagneticField, mu: f64, samples: &[Vec3]) -> TwoFormReport {
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for &q in samples {
        // d(alpha)_ij = mu (dA_j/dq_i - dA_i/dq_j) by finite differences
        let mut fd = Mat3::zeros();
        for i in 0..3 {
            let mut qp = q;
            let mut qm = q;
            qp[i] += h;
            qm[i] -= h;
            let d = ((field.a)(qp) - (field.a)(qm)) / (2.0 * h);
            for j in 0..3 {
                fd[(i, j)] = d[j];
            }
        }
        let b = field.b(q);
        // two-form components: F_01 = B_z, F_02 = -B_y, F_12 = B_x
        let target = [(0usize, 1usize, b.z), (0, 2, -b.y), (1, 2, b.x)];
        for (i, j, f_ij) in target {
            let d_alpha = mu * (fd[(i, j)] - fd[(j, i)]);
            worst = worst.max((d_alpha - mu * f_ij).abs());
        }
    }
    TwoFormReport {
        max_residual: worst,
        points_checked: samples.len(),
    }
}

/// Analytic cyclotron data in a uniform field of magnitude b0: radius
/// m |v_perp| / (e b0) and period 2 pi m / (e b0).
pub fn cyclotron(e: f64, m: f64, b0: f64, v_perp: f64) -> (f64, f64) {
    (
        m * v_perp / (e * b0),
        2.0 * std::f64::consts::PI * m / (e * b0),
    )
}

/// Endpoint position gap between two flat trajectories of equal layout.
pub fn endpoint_gap(a: &Trajectory, b: &Trajectory, dims: std::ops::Range<usize>) -> f64 {
    let sa = a.last_state();
    let sb = b.last_state();
    dims.map(|i| (sa[i] - sb[i]).powi(2)).sum::<f64>().sqrt()
}

/// Convenience error type check for non-finite field evaluations.
pub fn validate_field(field: &MagneticField, probe: Vec3) -> Result<()> {
    let a = field.potential(probe);
    let b = field.b(probe);
    if !a.iter().all(|x| x.is_finite()) || !b.iter().all(|x| x.is_finite()) {
        return Err(Error::BadParams(
            "magnetic field evaluates to non-finite values",
        ));
    }
    Ok(())
}
