//! Run configuration: a single TOML file with nested tables. Unknown keys
//! are rejected everywhere.

use mechphase::heavytop::{HeavyTopParams, HeavyTopState};
use mechphase::kaluza::MagneticField;
use mechphase::liegroup::{exp_so3, InertiaTensor, Rotation, Vec3};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemKind,
    pub dt: f64,
    pub t_max: f64,
    #[serde(default)]
    pub seed: u64,
    /// Per-step projection of constrained state components (off by default;
    /// drift is measured, not enforced).
    #[serde(default)]
    pub project: bool,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub rigid_body: Option<RigidBodyConfig>,
    #[serde(default)]
    pub heavy_top: Option<HeavyTopConfig>,
    #[serde(default)]
    pub kaluza: Option<KaluzaConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SystemKind {
    #[serde(rename = "rigid-body")]
    RigidBody,
    #[serde(rename = "heavy-top")]
    HeavyTop,
    #[serde(rename = "kaluza")]
    Kaluza,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Close-return tolerance for period detection.
    #[serde(default = "default_return_tol")]
    pub return_tol: f64,
    /// Residual bound for phase consistency (exit 4 beyond it).
    #[serde(default = "default_phase_tol")]
    pub phase_tol: f64,
    /// Conserved-quantity drift bound for simulate (exit 4 beyond it).
    #[serde(default = "default_drift_tol")]
    pub drift_tol: f64,
    /// Endpoint-gap bound for the field-theory comparisons.
    #[serde(default = "default_gap_tol")]
    pub gap_tol: f64,
}

fn default_return_tol() -> f64 {
    1e-7
}
fn default_phase_tol() -> f64 {
    1e-3
}
fn default_drift_tol() -> f64 {
    1e-6
}
fn default_gap_tol() -> f64 {
    1e-8
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            return_tol: default_return_tol(),
            phase_tol: default_phase_tol(),
            drift_tol: default_drift_tol(),
            gap_tol: default_gap_tol(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RigidBodyConfig {
    /// Principal moments, I1 >= I2 >= I3 > 0.
    pub inertia: [f64; 3],
    /// Initial body angular momentum.
    pub pi0: [f64; 3],
    /// Initial attitude as a rotation vector (axis * angle); identity when
    /// omitted.
    #[serde(default)]
    pub attitude0: Option<[f64; 3]>,
    /// Samples per period for the phase pipeline.
    #[serde(default = "default_n_samples")]
    pub n_samples: usize,
    /// Steps for the unreduced phase oracle.
    #[serde(default = "default_n_samples")]
    pub direct_steps: usize,
}

fn default_n_samples() -> usize {
    20_000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeavyTopConfig {
    pub inertia: [f64; 3],
    pub mass: f64,
    pub gravity: f64,
    pub length: f64,
    #[serde(default = "default_chi")]
    pub chi: [f64; 3],
    /// Explicit initial condition (simulate).
    #[serde(default)]
    pub pi0: Option<[f64; 3]>,
    #[serde(default)]
    pub gamma0: Option<[f64; 3]>,
    /// Periodic-orbit specification (phase).
    #[serde(default)]
    pub orbit: Option<LagrangeOrbitConfig>,
    #[serde(default = "default_n_samples")]
    pub n_samples: usize,
    #[serde(default = "default_n_samples")]
    pub direct_steps: usize,
}

fn default_chi() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LagrangeOrbitConfig {
    pub kind: LagrangeOrbitKind,
    pub tilt: f64,
    pub spin: f64,
    /// Tilt-velocity perturbation (rad/s) for nutating orbits.
    #[serde(default)]
    pub nutation: f64,
    /// When set, the spin is re-tuned so the relative-spin to nutation
    /// frequency ratio hits this value (low-order resonances make the
    /// nutating reduced orbit close).
    #[serde(default)]
    pub resonance_ratio: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LagrangeOrbitKind {
    #[serde(rename = "steady-precession")]
    SteadyPrecession,
    #[serde(rename = "nutating")]
    Nutating,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KaluzaConfig {
    pub field: FieldKind,
    /// Uniform field vector.
    #[serde(default)]
    pub b0: Option<[f64; 3]>,
    /// Linear-gradient parameters: B = (0, 0, b (1 + alpha x)).
    #[serde(default)]
    pub b_magnitude: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    /// Beltrami field coefficients.
    #[serde(default)]
    pub abc: Option<[f64; 3]>,
    pub charge: f64,
    pub mass: f64,
    pub q0: [f64; 3],
    pub v0: [f64; 3],
    /// Pure-gauge shift of the potential by this multiple of grad(x y);
    /// the field B is unchanged.
    #[serde(default)]
    pub gauge_xy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldKind {
    #[serde(rename = "uniform")]
    Uniform,
    #[serde(rename = "linear-gradient")]
    LinearGradient,
    #[serde(rename = "abc")]
    Abc,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub trajectory_csv: Option<String>,
    #[serde(default)]
    pub manifest_json: Option<String>,
    #[serde(default)]
    pub report_json: Option<String>,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl RunConfig {
    pub fn from_path(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let config: RunConfig = toml::from_str(&text).map_err(|e| ConfigError(format!("{e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.dt > 0.0) {
            return Err(ConfigError("dt must be positive".into()));
        }
        if !(self.t_max > 0.0) {
            return Err(ConfigError("t_max must be positive".into()));
        }
        match self.system {
            SystemKind::RigidBody => {
                if self.rigid_body.is_none() {
                    return Err(ConfigError(
                        "system = \"rigid-body\" requires a [rigid_body] table".into(),
                    ));
                }
            }
            SystemKind::HeavyTop => {
                let ht = self.heavy_top.as_ref().ok_or_else(|| {
                    ConfigError("system = \"heavy-top\" requires a [heavy_top] table".into())
                })?;
                if ht.orbit.is_none() && (ht.pi0.is_none() || ht.gamma0.is_none()) {
                    return Err(ConfigError(
                        "heavy_top needs either pi0 + gamma0 or an [heavy_top.orbit] table".into(),
                    ));
                }
            }
            SystemKind::Kaluza => {
                let kz = self.kaluza.as_ref().ok_or_else(|| {
                    ConfigError("system = \"kaluza\" requires a [kaluza] table".into())
                })?;
                match kz.field {
                    FieldKind::Uniform if kz.b0.is_none() => {
                        return Err(ConfigError("uniform field requires b0".into()))
                    }
                    FieldKind::LinearGradient if kz.b_magnitude.is_none() || kz.alpha.is_none() => {
                        return Err(ConfigError(
                            "linear-gradient field requires b_magnitude and alpha".into(),
                        ))
                    }
                    FieldKind::Abc if kz.abc.is_none() => {
                        return Err(ConfigError("abc field requires abc coefficients".into()))
                    }
                    _ => {}
                }
                if !(kz.mass > 0.0) {
                    return Err(ConfigError("kaluza mass must be positive".into()));
                }
            }
        }
        Ok(())
    }

    pub fn inertia(&self, moments: [f64; 3]) -> Result<InertiaTensor, ConfigError> {
        InertiaTensor::new(moments[0], moments[1], moments[2])
            .map_err(|e| ConfigError(e.to_string()))
    }

    pub fn rigid_attitude0(rb: &RigidBodyConfig) -> Rotation {
        match rb.attitude0 {
            Some(v) => exp_so3(Vec3::new(v[0], v[1], v[2])),
            None => Rotation::identity(),
        }
    }

    pub fn heavytop_params(&self) -> Result<HeavyTopParams, ConfigError> {
        let ht = self
            .heavy_top
            .as_ref()
            .ok_or_else(|| ConfigError("missing [heavy_top] table".into()))?;
        let inertia = self.inertia(ht.inertia)?;
        HeavyTopParams::new(
            inertia,
            ht.mass,
            ht.gravity,
            ht.length,
            Vec3::new(ht.chi[0], ht.chi[1], ht.chi[2]),
        )
        .map_err(|e| ConfigError(e.to_string()))
    }

    pub fn heavytop_state(ht: &HeavyTopConfig) -> Option<HeavyTopState> {
        match (ht.pi0, ht.gamma0) {
            (Some(p), Some(g)) => Some(HeavyTopState {
                pi: Vec3::new(p[0], p[1], p[2]),
                gamma: Vec3::new(g[0], g[1], g[2]),
            }),
            _ => None,
        }
    }

    pub fn magnetic_field(kz: &KaluzaConfig) -> MagneticField {
        let base = match kz.field {
            FieldKind::Uniform => {
                let b = kz.b0.unwrap();
                MagneticField::uniform(Vec3::new(b[0], b[1], b[2]))
            }
            FieldKind::LinearGradient => {
                MagneticField::linear_gradient(kz.b_magnitude.unwrap(), kz.alpha.unwrap())
            }
            FieldKind::Abc => {
                let c = kz.abc.unwrap();
                MagneticField::abc(c[0], c[1], c[2])
            }
        };
        if kz.gauge_xy != 0.0 {
            base.with_gauge_xy(kz.gauge_xy)
        } else {
            base
        }
    }
}
