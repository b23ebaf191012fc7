//! The reduction-theory layer: locked inertia tensor, mechanical connection,
//! amended potential, horizontal lift, and the four-step reconstruction
//! engine, specialized to Q = SO(3) with a left-invariant kinetic metric.
//!
//! Conventions. The symmetry acts by left multiplication, so the
//! infinitesimal generator of xi is hat(xi) R and the momentum map of the
//! lifted action is the spatial angular momentum mu = R I Omega, with
//! Omega = vee(R^T Rdot) the body angular velocity. The one-dimensional
//! isotropy subgroup of mu is generated by the unit spatial axis zeta; the
//! quotient SO(3) -> S^2 is R -> R^T zeta, which evaluates to Pi/|mu| for
//! the free rigid body and to Gamma for the heavy top. All lift and phase
//! machinery below works on that single bundle.

use crate::error::{Error, Result};
use crate::integrate::cumulative_quadrature;
use crate::liegroup::{exp_so3, hat, vee_skew, InertiaTensor, Mat3, Rotation, Vec3};

/// Tolerance on the tangency residual |skew defect of R^T Rdot|.
pub const TANGENT_TOL: f64 = 1e-9;

/// Lift residual tolerances from the module contract: projection and
/// horizontality must stay below these along the curve; exceeding ten times
/// either aborts the lift.
pub const LIFT_PROJECTION_TOL: f64 = 1e-7;
pub const LIFT_HORIZONTALITY_TOL: f64 = 1e-7;

/// Locked inertia tensor of the left SO(3) action with the left-invariant
/// kinetic metric: I(R) = R diag(I) R^T, a symmetric positive definite map
/// g -> g* in the spatial frame.
pub fn locked_inertia(r: &Rotation, inertia: &InertiaTensor) -> Mat3 {
    let m = r.matrix();
    m * inertia.diag() * m.transpose()
}

/// Infinitesimal generator of xi at R for the left action: xi_Q(R) = hat(xi) R.
pub fn generator(xi: Vec3, r: &Rotation) -> Mat3 {
    hat(xi) * r.matrix()
}

/// Body angular velocity of a tangent vector, Omega = vee(R^T Rdot).
/// Errors if Rdot is not tangent at R within `TANGENT_TOL`.
pub fn body_velocity(r: &Rotation, rdot: &Mat3) -> Result<Vec3> {
    let w = r.matrix().transpose() * rdot;
    let residual = (w + w.transpose()).norm();
    if residual >= TANGENT_TOL {
        return Err(Error::NotTangent { residual });
    }
    Ok(vee_skew(&w))
}

/// Kinetic inner product of two tangent vectors at R.
pub fn kinetic_inner(r: &Rotation, v1: &Mat3, v2: &Mat3, inertia: &InertiaTensor) -> Result<f64> {
    let o1 = body_velocity(r, v1)?;
    let o2 = body_velocity(r, v2)?;
    Ok(inertia.apply(o1).dot(&o2))
}

/// Momentum map of the lifted left action evaluated on the covector
/// metric-paired with Rdot: the spatial angular momentum R I Omega.
pub fn spatial_momentum(r: &Rotation, rdot: &Mat3, inertia: &InertiaTensor) -> Result<Vec3> {
    let omega = body_velocity(r, rdot)?;
    Ok(r.apply(inertia.apply(omega)))
}

/// Mechanical connection of the full SO(3) action:
/// A(R)(Rdot) = I(R)^{-1} J(Rdot^flat), solved through the locked inertia.
pub fn mechanical_connection(r: &Rotation, rdot: &Mat3, inertia: &InertiaTensor) -> Result<Vec3> {
    let mu = spatial_momentum(r, rdot, inertia)?;
    let lock = locked_inertia(r, inertia);
    Ok(lock
        .lu()
        .solve(&mu)
        .expect("locked inertia is positive definite"))
}

/// Mechanical connection of the S^1 subaction generated by the unit spatial
/// axis `zeta`, as a scalar: a = <J, zeta> / <I(R) zeta, zeta>.
pub fn mechanical_connection_s1(
    r: &Rotation,
    rdot: &Mat3,
    inertia: &InertiaTensor,
    zeta: Vec3,
) -> Result<f64> {
    let mu = spatial_momentum(r, rdot, inertia)?;
    let denom = zeta.dot(&(locked_inertia(r, inertia) * zeta));
    if denom < 1e-14 {
        return Err(Error::DegenerateGenerator { norm_sq: denom });
    }
    Ok(mu.dot(&zeta) / denom)
}

/// Vertical and horizontal projections for the S^1 bundle SO(3) -> S^2:
/// ver = (A(v)) zeta_Q(R), hor = v - ver, with A(hor) = 0.
pub fn split_s1(
    r: &Rotation,
    rdot: &Mat3,
    inertia: &InertiaTensor,
    zeta: Vec3,
) -> Result<(Mat3, Mat3)> {
    let a = mechanical_connection_s1(r, rdot, inertia, zeta)?;
    let ver = a * generator(zeta, r);
    let hor = rdot - ver;
    Ok((ver, hor))
}

/// Pairing of the connection one-form alpha_mu = A(.)^* mu with a tangent
/// vector: alpha_mu(R)(Rdot) = <mu, A(R)(Rdot)>.
pub fn alpha_mu_pairing(
    r: &Rotation,
    mu: Vec3,
    rdot: &Mat3,
    inertia: &InertiaTensor,
) -> Result<f64> {
    Ok(mu.dot(&mechanical_connection(r, rdot, inertia)?))
}

/// Amended potential of the full SO(3) action:
/// V_mu(R) = V(R) + 1/2 <mu, I(R)^{-1} mu>.
pub fn amended_potential<V>(r: &Rotation, mu: Vec3, inertia: &InertiaTensor, potential: V) -> f64
where
    V: Fn(&Rotation) -> f64,
{
    let lock = locked_inertia(r, inertia);
    let w = lock.lu().solve(&mu).expect("locked inertia is invertible");
    potential(r) + 0.5 * mu.dot(&w)
}

/// Amended potential of the S^1 subaction with momentum `mu` about `zeta`:
/// V(R) + mu^2 / (2 <I(R) zeta, zeta>).
pub fn amended_potential_s1<V>(
    r: &Rotation,
    mu: f64,
    zeta: Vec3,
    inertia: &InertiaTensor,
    potential: V,
) -> f64
where
    V: Fn(&Rotation) -> f64,
{
    let denom = zeta.dot(&(locked_inertia(r, inertia) * zeta));
    potential(r) + 0.5 * mu * mu / denom
}

/// Scalar Lie-algebra element solving the Step-2 algebraic system along a
/// lifted configuration: a = <mu, zeta> / |zeta_Q(q_h)|^2, so that
/// xi = a zeta matches the momentum constraint on the isotropy algebra.
pub fn xi_step2(q_h: &Rotation, mu: Vec3, zeta: Vec3, inertia: &InertiaTensor) -> Result<f64> {
    let norm_sq = zeta.dot(&(locked_inertia(q_h, inertia) * zeta));
    if norm_sq < 1e-14 {
        return Err(Error::DegenerateGenerator { norm_sq });
    }
    Ok(mu.dot(&zeta) / norm_sq)
}

/// Step 3 for an abelian isotropy algebra: g(t_k) = exp(Theta_k zeta) with
/// Theta the running quadrature of the scalar rates.
pub fn solve_group_ode(xi: &[f64], dt: f64, zeta: Vec3) -> Vec<Rotation> {
    cumulative_quadrature(xi, dt)
        .into_iter()
        .map(|theta| exp_so3(theta * zeta))
        .collect()
}

/// Step 3 when xi is constant (compact-group shortcut): g(t) = exp(t xi).
pub fn group_ode_constant(xi: Vec3, t: f64) -> Rotation {
    exp_so3(t * xi)
}

/// Step 3 when xidot(t) = alpha(t) xi(t): g(t) = exp(f(t) xi(t)) with
/// f(t) = int_0^t exp(int_t^s alpha(r) dr) ds, evaluated by nested
/// quadrature on `n` panels.
pub fn group_ode_proportional<A>(xi0: Vec3, alpha: A, t: f64, n: usize) -> Rotation
where
    A: Fn(f64) -> f64,
{
    let n = n.max(4) + n % 2;
    let h = t / n as f64;
    let alpha_samples: Vec<f64> = (0..=n).map(|k| alpha(k as f64 * h)).collect();
    let cum_alpha = cumulative_quadrature(&alpha_samples, h);
    let a_t = cum_alpha[n];
    let inner: Vec<f64> = cum_alpha.iter().map(|a_s| (a_s - a_t).exp()).collect();
    let f = crate::integrate::quadrature(&inner, h).expect("n >= 4 samples");
    let xi_t = xi0 * a_t.exp();
    exp_so3(f * xi_t)
}

/// Which principal connection drives the horizontal lift.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConnectionKind {
    /// Horizontal space = metric orthogonal of the group orbit.
    Mechanical,
    /// Normalized canonical one-form on the momentum level set; its
    /// horizontality condition reads Pi . Omega = 0 in body coordinates.
    CanonicalOneForm,
}

/// Horizontal-lift output: attitudes plus the body rates that generated
/// them (used by the reconstruction to recover velocities).
#[derive(Debug, Clone)]
pub struct LiftedPath {
    pub times: Vec<f64>,
    pub rotations: Vec<Rotation>,
    pub body_rates: Vec<Vec3>,
}

impl LiftedPath {
    /// Holonomy angle of a closed base loop: the rotation angle of
    /// R_h(T) R_h(0)^T about `zeta`.
    pub fn holonomy(&self, zeta: Vec3, axis_tol: f64) -> Result<f64> {
        let first = self.rotations.first().expect("nonempty lift");
        let last = self.rotations.last().expect("nonempty lift");
        let h = last.compose(&first.transpose());
        crate::liegroup::angle_about_axis(&h, zeta, axis_tol)
    }
}

pub(crate) enum LiftTwist<'a> {
    Mechanical,
    /// Body momentum samples along the base curve; used for the canonical
    /// one-form connection, whose horizontal space is Pi . Omega = 0.
    Canonical {
        body_momentum: &'a [Vec3],
    },
}

/// Central differences of a sampled curve, one-sided (second order) at the
/// endpoints.
pub(crate) fn central_differences(samples: &[Vec3], dt: f64) -> Vec<Vec3> {
    let n = samples.len();
    assert!(n >= 3, "need at least 3 samples for differencing");
    let mut d = Vec::with_capacity(n);
    d.push((-3.0 * samples[0] + 4.0 * samples[1] - samples[2]) / (2.0 * dt));
    for k in 1..n - 1 {
        d.push((samples[k + 1] - samples[k - 1]) / (2.0 * dt));
    }
    d.push((3.0 * samples[n - 1] - 4.0 * samples[n - 2] + samples[n - 3]) / (2.0 * dt));
    d
}

/// Horizontal lift of a base curve on S^2 through `q0`, relative to the
/// mechanical connection of the S^1 action about `zeta`.
///
/// The base velocity comes from central differences of the samples; the
/// uniquely determined horizontal body rate is then integrated with RK4 and
/// periodic re-orthonormalization. The result satisfies the projection and
/// horizontality residual bounds of the module contract or fails with
/// `DriftExceeded`.
pub fn horizontal_lift(
    times: &[f64],
    base: &[Vec3],
    q0: &Rotation,
    zeta: Vec3,
    inertia: &InertiaTensor,
) -> Result<LiftedPath> {
    lift_with_twist(times, base, q0, zeta, inertia, LiftTwist::Mechanical)
}

pub(crate) fn lift_with_twist(
    times: &[f64],
    base: &[Vec3],
    q0: &Rotation,
    zeta: Vec3,
    inertia: &InertiaTensor,
    twist: LiftTwist,
) -> Result<LiftedPath> {
    if times.len() != base.len() || times.len() < 3 {
        return Err(Error::TooFewSamples {
            got: times.len().min(base.len()),
            need: 3,
        });
    }
    let dt = times[1] - times[0];
    let n = times.len();

    let residual0 = (q0.apply_inverse(zeta) - base[0]).norm();
    if residual0 >= 1e-9 {
        return Err(Error::ProjectionMismatch {
            residual: residual0,
            tol: 1e-9,
        });
    }

    // body rate at each node: Omega = xdot x x + c x, with the twist c
    // chosen to annihilate the connection
    let xdot = central_differences(base, dt);
    let mut rates = Vec::with_capacity(n);
    for k in 0..n {
        let x = base[k];
        let perp = xdot[k].cross(&x);
        let c = match &twist {
            LiftTwist::Mechanical => {
                let ix = inertia.apply(x);
                -x.dot(&inertia.apply(perp)) / x.dot(&ix)
            }
            LiftTwist::Canonical { body_momentum } => {
                let pi = body_momentum[k];
                let denom = pi.dot(&x);
                if denom.abs() < 1e-14 {
                    return Err(Error::DegenerateGenerator { norm_sq: denom });
                }
                -pi.dot(&perp) / denom
            }
        };
        rates.push(perp + c * x);
    }

    // RK4 on Rdot = R hat(Omega(t)) with Omega linearly interpolated
    let mut rotations = Vec::with_capacity(n);
    let mut r = *q0;
    rotations.push(r);
    for k in 0..n - 1 {
        let h = times[k + 1] - times[k];
        let w0 = hat(rates[k]);
        let wm = hat(0.5 * (rates[k] + rates[k + 1]));
        let w1 = hat(rates[k + 1]);
        let m = r.matrix();
        let k1 = m * w0;
        let k2 = (m + 0.5 * h * k1) * wm;
        let k3 = (m + 0.5 * h * k2) * wm;
        let k4 = (m + h * k3) * w1;
        let next = m + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        r = if (k + 1) % 100 == 0 {
            Rotation::from_matrix_projected(next)
        } else {
            // between projections the matrix stays orthonormal to RK4 accuracy
            Rotation::from_matrix_projected_unchecked(next)
        };
        rotations.push(r);
    }

    let lifted = LiftedPath {
        times: times.to_vec(),
        rotations,
        body_rates: rates,
    };
    check_lift_residuals(
        &lifted,
        base,
        zeta,
        inertia,
        matches!(twist, LiftTwist::Mechanical),
    )?;
    Ok(lifted)
}

/// Projection and horizontality residuals of a lift, evaluated post hoc
/// (central differences of the produced samples). Fails with
/// `DriftExceeded` beyond ten times the contract tolerances.
fn check_lift_residuals(
    lift: &LiftedPath,
    base: &[Vec3],
    zeta: Vec3,
    inertia: &InertiaTensor,
    mechanical: bool,
) -> Result<()> {
    for (k, r) in lift.rotations.iter().enumerate() {
        let proj = (r.apply_inverse(zeta) - base[k]).norm();
        if proj > 10.0 * LIFT_PROJECTION_TOL {
            return Err(Error::DriftExceeded {
                what: "lift projection",
                residual: proj,
                tol: LIFT_PROJECTION_TOL,
                t: lift.times[k],
            });
        }
    }
    if mechanical {
        let n = lift.rotations.len();
        let dt = lift.times[1] - lift.times[0];
        for k in 1..n - 1 {
            let rdot = attitude_derivative(&lift.rotations, k, dt);
            let omega = vee_skew(&(lift.rotations[k].matrix().transpose() * rdot));
            let x = lift.rotations[k].apply_inverse(zeta);
            let a = x.dot(&inertia.apply(omega)) / x.dot(&inertia.apply(x));
            if a.abs() > 10.0 * LIFT_HORIZONTALITY_TOL {
                return Err(Error::DriftExceeded {
                    what: "lift horizontality",
                    residual: a.abs(),
                    tol: LIFT_HORIZONTALITY_TOL,
                    t: lift.times[k],
                });
            }
        }
    }
    Ok(())
}

/// Fourth-order finite-difference estimate of Rdot at node k (third order at
/// the nodes adjacent to the ends). The high-order stencil keeps the
/// estimator error well below the residuals it is supposed to measure.
pub(crate) fn attitude_derivative(rotations: &[Rotation], k: usize, dt: f64) -> Mat3 {
    let n = rotations.len();
    let m = |j: usize| rotations[j].matrix();
    if k >= 2 && k + 2 < n {
        (m(k - 2) - 8.0 * m(k - 1) + 8.0 * m(k + 1) - m(k + 2)) / (12.0 * dt)
    } else if k == 1 {
        (-2.0 * m(0) - 3.0 * m(1) + 6.0 * m(2) - m(3)) / (6.0 * dt)
    } else if k + 2 == n {
        (2.0 * m(n - 1) + 3.0 * m(n - 2) - 6.0 * m(n - 3) + m(n - 4)) / (6.0 * dt)
    } else {
        (m(k + 1) - m(k.saturating_sub(1))) / (2.0 * dt)
    }
}

/// Reduced trajectory data for the reconstruction engine.
#[derive(Debug, Clone)]
pub enum ReducedOrbit {
    /// Body angular momentum samples of the free rigid body with the
    /// conserved spatial momentum.
    RigidBody {
        times: Vec<f64>,
        pi: Vec<Vec3>,
        mu: Vec3,
    },
    /// (Pi, Gamma) samples of the heavy top with the conserved vertical
    /// momentum mu = Pi . Gamma.
    HeavyTop {
        times: Vec<f64>,
        pi: Vec<Vec3>,
        gamma: Vec<Vec3>,
        mu: f64,
    },
}

/// Everything the four-step procedure needs.
#[derive(Debug, Clone)]
pub struct ReconstructionProblem {
    pub orbit: ReducedOrbit,
    pub initial_attitude: Rotation,
    pub inertia: InertiaTensor,
    pub connection: ConnectionKind,
}

/// Output of the four-step procedure: the lift (Step 1), the Lie-algebra
/// rates (Step 2), their integral (Step 3), and the reconstructed attitudes
/// with body momenta via the Legendre transform (Step 4).
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub times: Vec<f64>,
    pub zeta: Vec3,
    pub mu_pair: f64,
    pub lift: Vec<Rotation>,
    pub attitudes: Vec<Rotation>,
    pub xi: Vec<f64>,
    pub theta: Vec<f64>,
    pub body_momentum: Vec<Vec3>,
}

impl Reconstruction {
    /// Spatial momentum map value at sample k of the reconstructed curve.
    pub fn momentum_map(&self, k: usize) -> Vec3 {
        self.attitudes[k].apply(self.body_momentum[k])
    }
}

/// Four-step reconstruction of the unreduced trajectory from a reduced one.
///
/// Step 1 horizontally lifts the base curve, Step 2 solves the algebraic
/// momentum condition for xi(t) = a(t) zeta, Step 3 integrates the abelian
/// group equation by quadrature, and Step 4 assembles q(t) = g(t) q_h(t)
/// with velocities recovered through the Legendre transform.
pub fn reconstruct(problem: &ReconstructionProblem) -> Result<Reconstruction> {
    let inertia = &problem.inertia;
    let q0 = &problem.initial_attitude;

    let (times, base, zeta, mu_pair, kinetic): (Vec<f64>, Vec<Vec3>, Vec3, f64, Vec<f64>) =
        match &problem.orbit {
            ReducedOrbit::RigidBody { times, pi, mu } => {
                let mu_norm = mu.norm();
                if mu_norm < 1e-12 {
                    return Err(Error::ZeroMomentum { mu: mu_norm });
                }
                let level = (q0.apply(pi[0]) - mu).norm();
                if level >= 1e-9 {
                    return Err(Error::ProjectionMismatch {
                        residual: level,
                        tol: 1e-9,
                    });
                }
                let base: Vec<Vec3> = pi.iter().map(|p| p / mu_norm).collect();
                let kinetic = pi
                    .iter()
                    .map(|p| 0.5 * p.dot(&inertia.apply_inv(*p)))
                    .collect();
                (times.clone(), base, mu / mu_norm, mu_norm, kinetic)
            }
            ReducedOrbit::HeavyTop {
                times,
                pi,
                gamma,
                mu,
            } => {
                if mu.abs() < 1e-10 {
                    return Err(Error::ZeroMomentum { mu: *mu });
                }
                let level = (pi[0].dot(&gamma[0]) - mu).abs();
                if level >= 1e-9 {
                    return Err(Error::ProjectionMismatch {
                        residual: level,
                        tol: 1e-9,
                    });
                }
                if problem.connection == ConnectionKind::CanonicalOneForm {
                    return Err(Error::UnsupportedConnection(
                        "canonical one-form lift is only implemented for the rigid body",
                    ));
                }
                (times.clone(), gamma.clone(), Vec3::z(), *mu, Vec::new())
            }
        };

    let lifted = match problem.connection {
        ConnectionKind::Mechanical => {
            lift_with_twist(&times, &base, q0, zeta, inertia, LiftTwist::Mechanical)?
        }
        ConnectionKind::CanonicalOneForm => {
            let body_momentum: Vec<Vec3> = base.iter().map(|x| mu_pair * x).collect();
            lift_with_twist(
                &times,
                &base,
                q0,
                zeta,
                inertia,
                LiftTwist::Canonical {
                    body_momentum: &body_momentum,
                },
            )?
        }
    };

    // Step 2: scalar rates along the lift
    let xi: Vec<f64> = match problem.connection {
        ConnectionKind::Mechanical => lifted
            .rotations
            .iter()
            .map(|r| xi_step2(r, mu_pair * zeta, zeta, inertia))
            .collect::<Result<_>>()?,
        ConnectionKind::CanonicalOneForm => {
            // Liouville pairing: xi = 2 K(d(t)) / <mu, zeta>
            kinetic.iter().map(|k| 2.0 * k / mu_pair).collect()
        }
    };

    // Step 3: abelian quadrature
    let dt = times[1] - times[0];
    let theta = cumulative_quadrature(&xi, dt);

    // Step 4: q = g q_h, velocities through the Legendre transform
    let mut attitudes = Vec::with_capacity(times.len());
    let mut body_momentum = Vec::with_capacity(times.len());
    for k in 0..times.len() {
        let g = exp_so3(theta[k] * zeta);
        let q = g.compose(&lifted.rotations[k]);
        let omega = lifted.body_rates[k] + xi[k] * lifted.rotations[k].apply_inverse(zeta);
        attitudes.push(q);
        body_momentum.push(inertia.apply(omega));
    }

    Ok(Reconstruction {
        times,
        zeta,
        mu_pair,
        lift: lifted.rotations,
        attitudes,
        xi,
        theta,
        body_momentum,
    })
}

impl Rotation {
    /// Internal fast path for tight integration loops: wrap a matrix that is
    /// known to be orthonormal to integrator accuracy.
    pub(crate) fn from_matrix_projected_unchecked(m: Mat3) -> Rotation {
        // safe because every consumer re-checks residuals downstream
        Rotation::from_matrix(m).unwrap_or_else(|_| Rotation::from_matrix_projected(m))
    }
}
