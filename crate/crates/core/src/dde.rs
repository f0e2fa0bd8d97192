//! Mean-field time-domain integration of the delayed equations of motion.
//!
//! The state is `v = (<c>, <c†>)` with
//! `v1' = -G v1 + eps v2 - q v1(t - tau)` and the conjugate equation for `v2`.
//! Vacuum inputs have zero mean, so no noise enters. Steps are RK4 on a grid
//! aligned with the delay (`tau` is an integer number of steps), so the
//! delayed value at a full step is a stored sample and at a half step is a
//! cubic Hermite midpoint.

use thiserror::Error;

use crate::model::Model;
use crate::scalar::{Cx, Real};

/// Norm above which integration stops and the run counts as growing.
pub const OVERFLOW_NORM: f64 = 1e12;
/// Steps per delay and per inverse rate required by [`integrate`].
pub const STEPS_PER_SCALE: f64 = 50.0;
/// `|rate| < MARGINAL_REL * G` is classified as marginal.
pub const MARGINAL_REL: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DdeError {
    #[error("time step {dt} exceeds the limit {limit}")]
    StepTooLarge { dt: f64, limit: f64 },
    #[error("state became non-finite at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("trace norm is identically zero")]
    DegenerateTrace,
    #[error("trace covers {covered} but classification needs at least {needed}")]
    TraceTooShort { covered: f64, needed: f64 },
    #[error("invalid integration request: {0}")]
    InvalidRequest(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    Decaying,
    Growing,
    Marginal,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Classification::Decaying => "decaying",
            Classification::Growing => "growing",
            Classification::Marginal => "marginal",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DdeTrace<T> {
    pub t: Vec<T>,
    pub v: Vec<[Cx<T>; 2]>,
    pub norm: Vec<T>,
    pub tau: T,
    /// Total decay `G` of the model, the scale for classification.
    pub g: T,
    /// Integration stopped early at the overflow guard.
    pub overflowed: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fit<T> {
    pub class: Classification,
    /// Least-squares slope of `ln |v|` over the final half of the trace.
    pub rate: T,
}

/// Largest rate in the equations of motion.
fn max_rate<T: Real>(model: &Model<T>) -> T {
    model.derived().g.max(model.eps_abs()).max(model.delayed_coupling().norm())
}

/// Largest step accepted by [`integrate`]: `min(tau, 1/max rate) / 50`.
pub fn suggested_dt<T: Real>(model: &Model<T>) -> T {
    let scale = T::lit(STEPS_PER_SCALE);
    let rate = max_rate(model);
    let mut dt = T::infinity();
    if model.tau() > T::zero() {
        dt = model.tau() / scale;
    }
    if rate > T::zero() {
        dt = dt.min(T::one() / (scale * rate));
    }
    if dt.is_finite() {
        dt
    } else {
        T::one() / scale
    }
}

struct Rhs<T> {
    g: T,
    eps: Cx<T>,
    q: Cx<T>,
}

impl<T: Real> Rhs<T> {
    fn eval(&self, v: [Cx<T>; 2], d: [Cx<T>; 2]) -> [Cx<T>; 2] {
        [
            v[0] * (-self.g) + self.eps * v[1] - self.q * d[0],
            v[1] * (-self.g) + self.eps.conj() * v[0] - self.q.conj() * d[1],
        ]
    }
}

fn axpy<T: Real>(v: [Cx<T>; 2], a: T, k: [Cx<T>; 2]) -> [Cx<T>; 2] {
    [v[0] + k[0] * a, v[1] + k[1] * a]
}

fn norm2<T: Real>(v: &[Cx<T>; 2]) -> T {
    (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()
}

/// Integrates from the constant history `v(t) = v0` on `[-tau, 0]` up to the
/// first grid time at or after `t_end`.
///
/// The step is reduced to `tau / ceil(tau / dt)` so the delay spans a whole
/// number of steps. Runs that exceed [`OVERFLOW_NORM`] stop early.
pub fn integrate<T: Real>(model: &Model<T>, v0: [Cx<T>; 2], t_end: T, dt: T) -> Result<DdeTrace<T>, DdeError> {
    if !(dt > T::zero()) || !(t_end >= T::zero()) || !t_end.is_finite() {
        return Err(DdeError::InvalidRequest("dt must be positive and t_end non-negative"));
    }
    let limit = suggested_dt(model);
    if dt > limit * (T::one() + T::lit(1e-12)) {
        return Err(DdeError::StepTooLarge { dt: dt.as_f64(), limit: limit.as_f64() });
    }
    let tau = model.tau();
    let (h, lag) = if tau > T::zero() {
        let n = (tau / dt).ceil().max(T::one());
        (tau / n, n.to_usize().unwrap_or(usize::MAX))
    } else {
        (dt, 0)
    };
    let steps = (t_end / h - T::lit(1e-9)).ceil().max(T::zero()).to_usize().unwrap_or(0);
    let rhs = Rhs { g: model.derived().g, eps: model.epsilon(), q: model.delayed_coupling() };
    let half = T::lit(0.5);
    let eighth = T::lit(0.125);
    let overflow = T::lit(OVERFLOW_NORM);

    let mut v = vec![v0];
    let mut f: Vec<[Cx<T>; 2]> = Vec::with_capacity(steps + 1);
    let mut t = vec![T::zero()];
    let mut norm = vec![norm2(&v0)];
    let mut overflowed = false;

    // delayed sample at grid index k - lag; history before t = 0
    let sample = |v: &[[Cx<T>; 2]], k: usize| if k < lag { v0 } else { v[k - lag] };

    for k in 0..steps {
        let vk = v[k];
        if lag == 0 {
            // no delay: the delayed term is the current state
            let g = |x: [Cx<T>; 2]| rhs.eval(x, x);
            let k1 = g(vk);
            let k2 = g(axpy(vk, h * half, k1));
            let k3 = g(axpy(vk, h * half, k2));
            let k4 = g(axpy(vk, h, k3));
            f.push(k1);
            v.push(combine(vk, h, k1, k2, k3, k4));
        } else {
            let d0 = sample(&v, k);
            let d1 = sample(&v, k + 1);
            let dm = if k < lag {
                v0
            } else {
                let (fa, fb) = (f[k - lag], f[k + 1 - lag]);
                let (a, b) = (v[k - lag], v[k + 1 - lag]);
                [
                    (a[0] + b[0]) * half + (fa[0] - fb[0]) * (h * eighth),
                    (a[1] + b[1]) * half + (fa[1] - fb[1]) * (h * eighth),
                ]
            };
            let k1 = rhs.eval(vk, d0);
            let k2 = rhs.eval(axpy(vk, h * half, k1), dm);
            let k3 = rhs.eval(axpy(vk, h * half, k2), dm);
            let k4 = rhs.eval(axpy(vk, h, k3), d1);
            f.push(k1);
            v.push(combine(vk, h, k1, k2, k3, k4));
        }
        let tn = h * T::lit((k + 1) as f64);
        let vn = v[k + 1];
        let nn = norm2(&vn);
        if !nn.is_finite() {
            return Err(DdeError::NonFiniteState { t: tn.as_f64() });
        }
        t.push(tn);
        norm.push(nn);
        if nn > overflow {
            overflowed = true;
            break;
        }
    }
    Ok(DdeTrace { t, v, norm, tau, g: model.derived().g, overflowed })
}

fn combine<T: Real>(v: [Cx<T>; 2], h: T, k1: [Cx<T>; 2], k2: [Cx<T>; 2], k3: [Cx<T>; 2], k4: [Cx<T>; 2]) -> [Cx<T>; 2] {
    let two = T::lit(2.0);
    let w = h / T::lit(6.0);
    [
        v[0] + (k1[0] + k2[0] * two + k3[0] * two + k4[0]) * w,
        v[1] + (k1[1] + k2[1] * two + k3[1] * two + k4[1]) * w,
    ]
}

/// Fits `ln |v|` over the final half of the trace.
///
/// Needs the trace to span at least `10 tau` or `10 / G` unless it stopped
/// at the overflow guard.
pub fn classify<T: Real>(trace: &DdeTrace<T>) -> Result<Fit<T>, DdeError> {
    if trace.norm.iter().all(|&n| n == T::zero()) {
        return Err(DdeError::DegenerateTrace);
    }
    let covered = trace.t.last().copied().unwrap_or(T::zero());
    let ten = T::lit(10.0);
    let mut needed = ten * trace.tau;
    if trace.g > T::zero() {
        needed = needed.min(ten / trace.g);
    }
    if !trace.overflowed && covered < needed {
        return Err(DdeError::TraceTooShort { covered: covered.as_f64(), needed: needed.as_f64() });
    }
    let start = trace.t.len() / 2;
    let pts: Vec<(T, T)> = trace.t[start..]
        .iter()
        .zip(&trace.norm[start..])
        .filter(|(_, &n)| n > T::zero())
        .map(|(&t, &n)| (t, n.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(DdeError::DegenerateTrace);
    }
    let count = T::lit(pts.len() as f64);
    let mt = pts.iter().map(|p| p.0).sum::<T>() / count;
    let my = pts.iter().map(|p| p.1).sum::<T>() / count;
    let sxy: T = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: T = pts.iter().map(|p| (p.0 - mt) * (p.0 - mt)).sum();
    let rate = sxy / sxx;
    let class = if trace.overflowed {
        Classification::Growing
    } else if rate.abs() < T::lit(MARGINAL_REL) * trace.g {
        Classification::Marginal
    } else if rate < T::zero() {
        Classification::Decaying
    } else {
        Classification::Growing
    };
    Ok(Fit { class, rate })
}

/// Largest `|v(t) - v0|` along a trace.
pub fn max_drift<T: Real>(trace: &DdeTrace<T>, v0: [Cx<T>; 2]) -> T {
    trace
        .v
        .iter()
        .map(|v| norm2(&[v[0] - v0[0], v[1] - v0[1]]))
        .fold(T::zero(), T::max)
}

/// Drift of a constant state over `10 tau` under pure Pyragas control.
///
/// Requires the perfect-mirror loop without pump or other losses. With
/// destructive interference the delayed term cancels the loop damping on
/// constant states and the drift is zero; with constructive interference the
/// state decays at about `2 gamma1`.
pub fn pyragas_invariance_check<T: Real>(model: &Model<T>, v0: [Cx<T>; 2]) -> Result<T, DdeError> {
    if !model.is_default_loop() {
        return Err(DdeError::InvalidRequest("Pyragas check needs phi = pi and gamma_f = gamma1"));
    }
    if model.gamma2() != T::zero() || model.gamma3() != T::zero() || model.eps_abs() != T::zero() {
        return Err(DdeError::InvalidRequest("Pyragas check needs gamma2 = gamma3 = 0 and no pump"));
    }
    if !(model.tau() > T::zero()) {
        return Err(DdeError::InvalidRequest("Pyragas check needs a positive delay"));
    }
    let trace = integrate(model, v0, T::lit(10.0) * model.tau(), suggested_dt(model))?;
    Ok(max_drift(&trace, v0))
}
