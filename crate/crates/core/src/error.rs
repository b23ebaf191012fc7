//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by the numerical kernels and the reduction machinery.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A matrix handed to `vee` was not skew-symmetric.
    #[error("matrix is not skew-symmetric (|M + M^T| = {asym:.3e})")]
    NotSkew { asym: f64 },

    /// A 3x3 matrix failed the rotation invariants.
    #[error("matrix is not a rotation (orthogonality residual {ortho:.3e}, det {det:.6})")]
    NotRotation { ortho: f64, det: f64 },

    /// The rotation does not fix the requested axis; the trajectory did not
    /// return to the momentum level set.
    #[error("rotation moves the axis by {moved:.3e} (tol {tol:.1e})")]
    AxisNotFixed { moved: f64, tol: f64 },

    /// Integration produced NaN/Inf; the step size is too large for the flow.
    #[error("state became non-finite at t = {t}")]
    NonFiniteState { t: f64 },

    /// Quadrature or differencing got fewer samples than it can handle.
    #[error("too few samples ({got}, need at least {need})")]
    TooFewSamples { got: usize, need: usize },

    /// No return to the initial state within `t_max`: equilibrium,
    /// separatrix, or quasi-periodic input.
    #[error("no periodic return within t_max = {t_max}")]
    NoReturn { t_max: f64 },

    /// A spherical loop's endpoints do not match.
    #[error("loop not closed (gap {gap:.3e}, tol {tol:.1e})")]
    LoopNotClosed { gap: f64, tol: f64 },

    /// A vector expected to be unit length was not.
    #[error("vector is not unit length (norm {norm})")]
    NotUnit { norm: f64 },

    /// Every candidate axis for the spherical-area chart lies on the loop.
    #[error("no usable pole: every candidate axis lies on the loop")]
    PoleOnLoop,

    /// The supplied matrix is not in the tangent space at the given rotation.
    #[error("not a tangent vector at R (skew residual {residual:.3e})")]
    NotTangent { residual: f64 },

    /// The isotropy generator degenerates at this configuration.
    #[error("degenerate generator: |zeta_Q|^2 = {norm_sq:.3e}")]
    DegenerateGenerator { norm_sq: f64 },

    /// The initial point does not project onto the start of the base curve.
    #[error(
        "initial point does not project to base curve (residual {residual:.3e}, tol {tol:.1e})"
    )]
    ProjectionMismatch { residual: f64, tol: f64 },

    /// A lift or reconstruction residual exceeded 10x its tolerance mid-curve.
    #[error("{what} residual {residual:.3e} exceeded 10x tolerance {tol:.1e} at t = {t}")]
    DriftExceeded {
        what: &'static str,
        residual: f64,
        tol: f64,
        t: f64,
    },

    /// The reduced orbit handed to a phase computation is not closed.
    #[error("orbit not closed (gap {gap:.3e}, tol {tol:.1e})")]
    NotClosed { gap: f64, tol: f64 },

    /// Principal moments are not strictly ordered; the full orbit
    /// classification degenerates to symmetric-top logic.
    #[error("principal moments not strictly ordered (I1 > I2 > I3 required)")]
    DegenerateInertia,

    /// The steady-precession quadratic has no real root at the requested tilt.
    #[error("no steady precession at this tilt (discriminant {discriminant:.3e})")]
    NoPrecessionRoot { discriminant: f64 },

    /// The S^1 momentum vanishes; the isotropy group enlarges and the phase
    /// decomposition is undefined.
    #[error("momentum Pi.Gamma = {mu:.3e} is too close to zero")]
    ZeroMomentum { mu: f64 },

    /// The orbit sits on (or too near) the separatrix; its period diverges.
    #[error("orbit within {rel:.3e} of the separatrix; phase computation rejected")]
    SeparatrixOrbit { rel: f64 },

    /// The requested connection is not implemented for this system.
    #[error("unsupported connection for this system: {0}")]
    UnsupportedConnection(&'static str),

    /// A physical parameter violated its type invariant.
    #[error("invalid parameter: {0}")]
    BadParams(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
