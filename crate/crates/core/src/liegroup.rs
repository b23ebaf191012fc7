//! Exact-algebra primitives for SO(3), its Lie algebra so(3), and the dual.
//!
//! Vectors in R^3 double as Lie-algebra elements (angular velocities) and as
//! dual elements (momenta) under the usual identification x <-> hat(x), where
//! hat(x) y = x cross y. Rotations are stored as orthonormal 3x3 matrices and
//! re-orthonormalized by polar projection when drift accumulates.

use crate::error::{Error, Result};
use nalgebra::{Matrix3, Vector3};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Orthogonality / determinant tolerance for the `Rotation` invariants.
pub const ROTATION_TOL: f64 = 1e-12;

/// Below this angle the Rodrigues / log coefficients switch to series form.
pub const SMALL_ANGLE: f64 = 1e-8;

/// Wrap an angle to (-pi, pi].
pub fn wrap_angle(x: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut y = x.rem_euclid(two_pi);
    if y > std::f64::consts::PI {
        y -= two_pi;
    }
    y
}

/// hat(v) w = v x w; the matrix is skew-symmetric.
pub fn hat(v: Vec3) -> Mat3 {
    Mat3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Inverse of `hat`. Fails if `m` is not skew within 1e-9.
pub fn vee(m: &Mat3) -> Result<Vec3> {
    let asym = (m + m.transpose()).norm();
    if asym >= 1e-9 {
        return Err(Error::NotSkew { asym });
    }
    Ok(Vec3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)]))
}

/// Skew part of a matrix read off as a vector, without the skewness check.
/// Used where the input is tangent only up to discretization error.
pub fn vee_skew(m: &Mat3) -> Vec3 {
    0.5 * Vec3::new(
        m[(2, 1)] - m[(1, 2)],
        m[(0, 2)] - m[(2, 0)],
        m[(1, 0)] - m[(0, 1)],
    )
}

/// An element of SO(3), stored as an orthonormal matrix with det +1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(Mat3);

impl Rotation {
    pub fn identity() -> Self {
        Rotation(Mat3::identity())
    }

    /// Validates R^T R = 1 and det R = +1 within `ROTATION_TOL`.
    pub fn from_matrix(m: Mat3) -> Result<Self> {
        let ortho = (m.transpose() * m - Mat3::identity()).norm();
        let det = m.determinant();
        if ortho > ROTATION_TOL || (det - 1.0).abs() > ROTATION_TOL {
            return Err(Error::NotRotation { ortho, det });
        }
        Ok(Rotation(m))
    }

    /// Accepts a matrix that is only approximately orthonormal and projects
    /// it onto SO(3) (polar projection via SVD).
    pub fn from_matrix_projected(m: Mat3) -> Self {
        Rotation(polar_project(m))
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        Rotation(self.0.transpose())
    }

    pub fn apply(&self, v: Vec3) -> Vec3 {
        self.0 * v
    }

    /// R^T v without forming the transpose.
    pub fn apply_inverse(&self, v: Vec3) -> Vec3 {
        self.0.tr_mul(&v)
    }

    pub fn compose(&self, other: &Rotation) -> Rotation {
        Rotation(self.0 * other.0)
    }

    /// Frobenius distance to another rotation.
    pub fn distance(&self, other: &Rotation) -> f64 {
        (self.0 - other.0).norm()
    }

    /// Orthogonality residual |R^T R - 1|; diagnostic for drift.
    pub fn ortho_residual(&self) -> f64 {
        (self.0.transpose() * self.0 - Mat3::identity()).norm()
    }

    /// Re-orthonormalize in place by polar projection.
    pub fn renormalize(&mut self) {
        self.0 = polar_project(self.0);
    }
}

impl std::ops::Mul for Rotation {
    type Output = Rotation;
    fn mul(self, rhs: Rotation) -> Rotation {
        self.compose(&rhs)
    }
}

/// Nearest rotation in Frobenius norm: R (R^T R)^{-1/2}, computed via SVD
/// with the determinant sign fixed.
pub fn polar_project(m: Mat3) -> Mat3 {
    let svd = m.svd(true, true);
    let u = svd.u.expect("svd requested u");
    let vt = svd.v_t.expect("svd requested v_t");
    let mut r = u * vt;
    if r.determinant() < 0.0 {
        let mut u2 = u;
        u2.column_mut(2).neg_mut();
        r = u2 * vt;
    }
    r
}

/// Rodrigues formula; rotation by |v| about v/|v|. Below `SMALL_ANGLE` the
/// coefficients come from their second-order series to avoid 0/0.
pub fn exp_so3(v: Vec3) -> Rotation {
    let theta2 = v.norm_squared();
    let theta = theta2.sqrt();
    let (a, b) = if theta < SMALL_ANGLE {
        (1.0 - theta2 / 6.0, 0.5 - theta2 / 24.0)
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / theta2)
    };
    let vx = hat(v);
    Rotation(Mat3::identity() + a * vx + b * (vx * vx))
}

/// Logarithm of a rotation; |log| in [0, pi]. The angle-pi branch is resolved
/// from the largest diagonal entry of R.
pub fn log_so3(r: &Rotation) -> Vec3 {
    let m = r.matrix();
    let cos_theta = ((m.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let theta = cos_theta.acos();

    if theta < SMALL_ANGLE {
        // log ~ skew part; the theta^2/6 correction is below rounding here
        return vee_skew(m);
    }
    if theta < std::f64::consts::PI - 1e-4 {
        let factor = theta / (2.0 * theta.sin());
        return factor
            * Vec3::new(
                m[(2, 1)] - m[(1, 2)],
                m[(0, 2)] - m[(2, 0)],
                m[(1, 0)] - m[(0, 1)],
            );
    }

    // Near pi: R = cos(t) I + (1-cos t) n n^T + sin(t) hat(n); extract the
    // axis from the diagonal, branching on its largest entry.
    let one_minus = 1.0 - cos_theta;
    let diag = [m[(0, 0)], m[(1, 1)], m[(2, 2)]];
    let i = if diag[0] >= diag[1] && diag[0] >= diag[2] {
        0
    } else if diag[1] >= diag[2] {
        1
    } else {
        2
    };
    let j = (i + 1) % 3;
    let k = (i + 2) % 3;
    let mut n = Vec3::zeros();
    n[i] = ((diag[i] - cos_theta) / one_minus).max(0.0).sqrt();
    n[j] = (m[(i, j)] + m[(j, i)]) / (2.0 * one_minus * n[i]);
    n[k] = (m[(i, k)] + m[(k, i)]) / (2.0 * one_minus * n[i]);
    n.normalize_mut();
    // sign consistent with the (possibly tiny) skew part
    let s = vee_skew(m);
    if s.dot(&n) < 0.0 {
        n = -n;
    }
    theta * n
}

/// Rotation angle of `r` about a unit `axis` it is expected to fix, in
/// (-pi, pi] with the right-hand rule. Errors if `r` moves the axis by more
/// than `tol`.
pub fn angle_about_axis(r: &Rotation, axis: Vec3, tol: f64) -> Result<f64> {
    let moved = (r.apply(axis) - axis).norm();
    if moved >= tol {
        return Err(Error::AxisNotFixed { moved, tol });
    }
    let (u, v) = plane_basis(axis);
    let ru = r.apply(u);
    let rv = r.apply(v);
    // angle of the 2x2 in-plane block; insensitive to first order in the
    // out-of-plane components of an approximately axis-fixing rotation
    let sin_phi = v.dot(&ru) - u.dot(&rv);
    let cos_phi = u.dot(&ru) + v.dot(&rv);
    Ok(sin_phi.atan2(cos_phi))
}

/// An orthonormal pair (u, v) with u x v = axis.
pub fn plane_basis(axis: Vec3) -> (Vec3, Vec3) {
    let seed = if axis.x.abs() <= axis.y.abs() && axis.x.abs() <= axis.z.abs() {
        Vec3::x()
    } else if axis.y.abs() <= axis.z.abs() {
        Vec3::y()
    } else {
        Vec3::z()
    };
    let u = (seed - axis * seed.dot(&axis)).normalize();
    let v = axis.cross(&u);
    (u, v)
}

/// Principal moments of inertia in a body frame, I1 >= I2 >= I3 > 0 (kg m^2).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct InertiaTensor {
    i1: f64,
    i2: f64,
    i3: f64,
}

impl InertiaTensor {
    pub fn new(i1: f64, i2: f64, i3: f64) -> Result<Self> {
        if !(i1.is_finite() && i2.is_finite() && i3.is_finite() && i3 > 0.0) {
            return Err(Error::BadParams("principal moments must be positive"));
        }
        if !(i1 >= i2 && i2 >= i3) {
            return Err(Error::BadParams(
                "principal moments must satisfy I1 >= I2 >= I3",
            ));
        }
        Ok(InertiaTensor { i1, i2, i3 })
    }

    pub fn moments(&self) -> (f64, f64, f64) {
        (self.i1, self.i2, self.i3)
    }

    pub fn i1(&self) -> f64 {
        self.i1
    }
    pub fn i2(&self) -> f64 {
        self.i2
    }
    pub fn i3(&self) -> f64 {
        self.i3
    }

    pub fn diag(&self) -> Mat3 {
        Mat3::from_diagonal(&Vec3::new(self.i1, self.i2, self.i3))
    }

    /// I v (body frame).
    pub fn apply(&self, v: Vec3) -> Vec3 {
        Vec3::new(self.i1 * v.x, self.i2 * v.y, self.i3 * v.z)
    }

    /// I^{-1} v (body frame); angular velocity from body momentum.
    pub fn apply_inv(&self, v: Vec3) -> Vec3 {
        Vec3::new(v.x / self.i1, v.y / self.i2, v.z / self.i3)
    }

    pub fn trace(&self) -> f64 {
        self.i1 + self.i2 + self.i3
    }

    pub fn is_strictly_ordered(&self) -> bool {
        self.i1 > self.i2 && self.i2 > self.i3
    }
}
