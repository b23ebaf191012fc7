//! Deterministic ODE integration, quadrature, period detection, and signed
//! spherical area. These are the numeric kernels every system module shares.
//!
//! The single required integrator is fixed-step classical RK4; conserved
//! quantities are measured after the fact, never enforced (an optional
//! projection hook exists for callers that want it). Everything here is
//! deterministic: identical inputs give bit-identical outputs.

use crate::error::{Error, Result};
use crate::liegroup::Vec3;

/// Uniformly sampled time series of flat state vectors.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub dt: f64,
    pub labels: Vec<String>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, |s| s.len())
    }

    pub fn last_state(&self) -> &[f64] {
        self.states.last().expect("trajectory is non-empty")
    }

    /// Checks uniform spacing |t_{k+1} - t_k - dt| < 1e-12 and equal state
    /// dimensions.
    pub fn validate(&self) -> Result<()> {
        let dim = self.dim();
        for s in &self.states {
            if s.len() != dim {
                return Err(Error::BadParams("trajectory states have mixed dimensions"));
            }
        }
        for k in 0..self.times.len().saturating_sub(1) {
            if (self.times[k + 1] - self.times[k] - self.dt).abs() >= 1e-12 {
                return Err(Error::BadParams("trajectory spacing is not uniform"));
            }
        }
        Ok(())
    }
}

/// Classical fixed-step RK4 over [t0, t1]. The requested step is shortened
/// uniformly so the grid lands exactly on t1; the effective step never
/// exceeds `dt` and the grid stays uniform.
pub fn rk4_integrate<F>(rhs: F, y0: &[f64], t0: f64, t1: f64, dt: f64) -> Result<Trajectory>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    rk4_integrate_with(rhs, y0, t0, t1, dt, None::<fn(&mut [f64])>)
}

/// RK4 with an optional per-step projection hook (renormalization of
/// constrained components). The hook is off in every acceptance run; drift
/// is a measured quantity.
pub fn rk4_integrate_with<F, P>(
    rhs: F,
    y0: &[f64],
    t0: f64,
    t1: f64,
    dt: f64,
    mut project: Option<P>,
) -> Result<Trajectory>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
    P: FnMut(&mut [f64]),
{
    if !(dt > 0.0) || !(t1 > t0) {
        return Err(Error::BadParams("rk4 requires dt > 0 and t1 > t0"));
    }
    let span = t1 - t0;
    let n_steps = (span / dt - 1e-12).ceil().max(1.0) as usize;
    let h = span / n_steps as f64;

    let mut times = Vec::with_capacity(n_steps + 1);
    let mut states = Vec::with_capacity(n_steps + 1);
    let mut y = y0.to_vec();
    times.push(t0);
    states.push(y.clone());

    for k in 0..n_steps {
        let t = t0 + k as f64 * h;
        rk4_step(&rhs, t, &mut y, h);
        if let Some(p) = project.as_mut() {
            p(&mut y);
        }
        if y.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteState { t: t + h });
        }
        times.push(if k + 1 == n_steps {
            t1
        } else {
            t0 + (k + 1) as f64 * h
        });
        states.push(y.clone());
    }

    Ok(Trajectory {
        times,
        states,
        dt: h,
        labels: Vec::new(),
    })
}

/// One classical RK4 step in place.
pub fn rk4_step<F>(rhs: &F, t: f64, y: &mut [f64], h: f64)
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    let n = y.len();
    let k1 = rhs(t, y);
    let mut tmp = vec![0.0; n];
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k1[i];
    }
    let k2 = rhs(t + 0.5 * h, &tmp);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k2[i];
    }
    let k3 = rhs(t + 0.5 * h, &tmp);
    for i in 0..n {
        tmp[i] = y[i] + h * k3[i];
    }
    let k4 = rhs(t + h, &tmp);
    for i in 0..n {
        y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

/// Composite Simpson rule over uniformly spaced samples. An odd interval
/// count gets Simpson on the leading even block and a trapezoid on the last
/// panel.
pub fn quadrature(samples: &[f64], dt: f64) -> Result<f64> {
    let n = samples.len();
    if n < 3 {
        return Err(Error::TooFewSamples { got: n, need: 3 });
    }
    let intervals = n - 1;
    let simpson_intervals = if intervals.is_multiple_of(2) {
        intervals
    } else {
        intervals - 1
    };
    let mut sum = 0.0;
    let mut k = 0;
    while k + 2 <= simpson_intervals {
        sum += dt / 3.0 * (samples[k] + 4.0 * samples[k + 1] + samples[k + 2]);
        k += 2;
    }
    if simpson_intervals < intervals {
        sum += 0.5 * dt * (samples[n - 2] + samples[n - 1]);
    }
    Ok(sum)
}

/// Running integral of `samples`: entry k is the quadrature over [0, t_k].
/// Even indices carry full Simpson accuracy; odd indices close with one
/// trapezoid panel.
pub fn cumulative_quadrature(samples: &[f64], dt: f64) -> Vec<f64> {
    let n = samples.len();
    let mut cum = vec![0.0; n];
    for k in 1..n {
        if k % 2 == 0 {
            cum[k] = cum[k - 2] + dt / 3.0 * (samples[k - 2] + 4.0 * samples[k - 1] + samples[k]);
        } else {
            cum[k] = cum[k - 1] + 0.5 * dt * (samples[k - 1] + samples[k]);
        }
    }
    cum
}

/// First return time of a flow to its initial state.
///
/// Marches RK4 at `dt` and watches crossings of the Poincare hyperplane
/// through `y0` with normal `ydot(0)`. A crossing later than `10 dt` whose
/// state lies within `return_tol` of `y0` is refined by bisection on the
/// hyperplane crossing to 1e-10 relative accuracy.
pub fn detect_period<F>(flow: F, y0: &[f64], dt: f64, t_max: f64, return_tol: f64) -> Result<f64>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    let v0 = flow(0.0, y0);
    let speed = norm(&v0);
    if speed < 1e-14 {
        // equilibrium: the orbit is a point and never crosses the section
        return Err(Error::NoReturn { t_max });
    }
    let normal: Vec<f64> = v0.iter().map(|x| x / speed).collect();

    let section = |y: &[f64]| -> f64 {
        y.iter()
            .zip(y0.iter())
            .zip(normal.iter())
            .map(|((a, b), n)| (a - b) * n)
            .sum()
    };
    let dist = |y: &[f64]| -> f64 {
        y.iter()
            .zip(y0.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    };

    let mut y = y0.to_vec();
    let mut t = 0.0;
    let mut s_prev = 0.0;
    let guard = 10.0 * dt;

    while t < t_max {
        let y_prev = y.clone();
        rk4_step(&flow, t, &mut y, dt);
        let t_next = t + dt;
        if y.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteState { t: t_next });
        }
        let s_next = section(&y);
        if t > guard && s_prev < 0.0 && s_next >= 0.0 {
            // bisection on the sub-step crossing
            let mut lo = 0.0;
            let mut hi = dt;
            for _ in 0..200 {
                if hi - lo <= 1e-10 * t_next.max(1.0) {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                let mut ym = y_prev.clone();
                rk4_step(&flow, t, &mut ym, mid);
                if section(&ym) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let tau = 0.5 * (lo + hi);
            let mut y_cross = y_prev.clone();
            rk4_step(&flow, t, &mut y_cross, tau);
            if dist(&y_cross) < return_tol {
                return Ok(t + tau);
            }
        }
        s_prev = s_next;
        t = t_next;
    }
    Err(Error::NoReturn { t_max })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Closed, uniformly sampled loop of unit vectors on S^2.
#[derive(Debug, Clone)]
pub struct SphericalLoop {
    samples: Vec<Vec3>,
}

impl SphericalLoop {
    /// Validates unit norms (1e-9) and loop closure within `closure_tol`.
    pub fn new(samples: Vec<Vec3>, closure_tol: f64) -> Result<Self> {
        if samples.len() < 3 {
            return Err(Error::TooFewSamples {
                got: samples.len(),
                need: 3,
            });
        }
        for s in &samples {
            if (s.norm() - 1.0).abs() >= 1e-9 {
                return Err(Error::NotUnit { norm: s.norm() });
            }
        }
        let gap = (samples[0] - samples[samples.len() - 1]).norm();
        if gap >= closure_tol {
            return Err(Error::LoopNotClosed {
                gap,
                tol: closure_tol,
            });
        }
        Ok(SphericalLoop { samples })
    }

    pub fn samples(&self) -> &[Vec3] {
        &self.samples
    }

    pub fn reversed(&self) -> SphericalLoop {
        let mut samples = self.samples.clone();
        samples.reverse();
        SphericalLoop { samples }
    }

    /// Smallest angular distance (radians) from `axis` to any loop sample.
    pub fn min_angle_to(&self, axis: Vec3) -> f64 {
        self.samples
            .iter()
            .map(|s| s.dot(&axis).clamp(-1.0, 1.0).acos())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Signed spherical area enclosed by `lp`, in steradians in (-4 pi, 4 pi).
///
/// The chart axis is chosen automatically: the normalized sample mean, then
/// the normalized sum of consecutive cross products (the loop's oriented
/// area vector), then the antipode of the mean. The first candidate farther
/// than 1e-6 rad from every sample wins; if none qualifies the loop is
/// unusable (`PoleOnLoop`). The returned value is the area of the cap that
/// contains the chosen axis, positive when the loop runs counterclockwise
/// around it seen from outside the sphere.
pub fn spherical_signed_area(lp: &SphericalLoop) -> Result<f64> {
    let axis = choose_area_axis(lp)?;
    spherical_signed_area_about(lp, axis)
}

/// Axis the automatic chart would use for this loop.
pub fn choose_area_axis(lp: &SphericalLoop) -> Result<Vec3> {
    let samples = lp.samples();
    let mean: Vec3 = samples.iter().sum::<Vec3>() / samples.len() as f64;
    let mut cross_sum = Vec3::zeros();
    for k in 0..samples.len() - 1 {
        cross_sum += samples[k].cross(&samples[k + 1]);
    }
    let mut candidates = Vec::new();
    if mean.norm() > 1e-6 {
        candidates.push(mean.normalize());
    }
    if cross_sum.norm() > 1e-9 {
        candidates.push(cross_sum.normalize());
    }
    if mean.norm() > 1e-6 {
        candidates.push(-mean.normalize());
    }
    for c in candidates {
        if lp.min_angle_to(c) > 1e-6 {
            return Ok(c);
        }
    }
    Err(Error::PoleOnLoop)
}

/// Signed enclosed area computed as the line integral of (1 - cos theta)
/// d phi in spherical coordinates about `axis`, which must be interior to
/// the cap being measured (the chart is single-valued only there). Returns
/// the cap containing `axis`, signed by traversal direction.
pub fn spherical_signed_area_about(lp: &SphericalLoop, axis: Vec3) -> Result<f64> {
    if (axis.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::NotUnit { norm: axis.norm() });
    }
    if lp.min_angle_to(axis) <= 1e-6 {
        return Err(Error::PoleOnLoop);
    }
    let (u, v) = crate::liegroup::plane_basis(axis);
    let samples = lp.samples();

    let mut area = 0.0;
    let mut prev_phi = f64::NAN;
    let mut prev_one_minus_cos = 0.0;
    for (k, s) in samples.iter().enumerate() {
        let cos_theta = s.dot(&axis).clamp(-1.0, 1.0);
        let phi = s.dot(&v).atan2(s.dot(&u));
        let one_minus_cos = 1.0 - cos_theta;
        if k > 0 {
            let mut dphi = phi - prev_phi;
            if dphi > std::f64::consts::PI {
                dphi -= 2.0 * std::f64::consts::PI;
            } else if dphi < -std::f64::consts::PI {
                dphi += 2.0 * std::f64::consts::PI;
            }
            area += 0.5 * (one_minus_cos + prev_one_minus_cos) * dphi;
        }
        prev_phi = phi;
        prev_one_minus_cos = one_minus_cos;
    }
    Ok(area)
}
