//! Asymptotic stability of the delayed linear system.
//!
//! With a loop phase that makes the delayed coupling real, the characteristic
//! equation `det[s - A - beta e^{-s tau}] = 0` factors into two scalar
//! equations `s = alpha_i + beta e^{-s tau}` with `alpha_{1,2} = ±|eps| - G`,
//! whose rightmost roots are `s_i = alpha_i + W₀(beta tau e^{-alpha_i tau}) / tau`.
//! `beta` is `+gamma1` for destructive and `-gamma1` for constructive
//! interference in the default loop, and `sqrt(gamma1 gamma_f) b` in general.

use rayon::prelude::*;
use thiserror::Error;

use crate::lambert::{lambert_w0, lambert_w0_from_ln, NonConvergence};
use crate::model::{Interference, Matched, Model};
use crate::scalar::{cx, logspace, Cx, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StabilityError {
    #[error("loop phase is neither constructive nor destructive; closed-form roots do not apply (use the root oracle)")]
    GenericPhase,
    #[error("closed-form roots need a positive delay")]
    ZeroDelay,
    #[error(transparent)]
    Lambert(#[from] NonConvergence),
    #[error("no characteristic root found from any seed; widen the seed grid")]
    NoRootFound,
}

/// Relative size of `Re s_1` (in units of `G`) below which a verdict is marginal.
pub const MARGINAL_REL: f64 = 1e-5;

/// Real delayed coupling `beta`, or [`StabilityError::GenericPhase`].
pub fn loop_gain<T: Real>(model: &Model<T>) -> Result<T, StabilityError> {
    let k = (model.gamma1() * model.gamma_f()).sqrt();
    if k == T::zero() {
        // no loop, so its phase is irrelevant
        return Ok(T::zero());
    }
    let b = model.loop_sign().ok_or(StabilityError::GenericPhase)?;
    Ok(b * k)
}

/// Rightmost root of `s = alpha + beta e^{-s tau}`.
fn scalar_root<T: Real>(alpha: T, beta: T, tau: T) -> Result<Cx<T>, NonConvergence> {
    if beta == T::zero() {
        return Ok(cx(alpha, T::zero()));
    }
    let shift = -alpha * tau;
    let w = if shift < T::lit(0.5) * T::max_value().ln() {
        lambert_w0(cx(beta * tau * shift.exp(), T::zero()))?
    } else {
        let arg = if beta < T::zero() { T::PI() } else { T::zero() };
        lambert_w0_from_ln(cx((beta.abs() * tau).ln() + shift, arg))?
    };
    Ok(cx(alpha, T::zero()) + w / tau)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CharRoots<T> {
    /// Branch with `alpha_1 = |eps| - G`.
    pub s1: Cx<T>,
    /// Branch with `alpha_2 = -|eps| - G`.
    pub s2: Cx<T>,
}

pub fn char_roots_lambert<T: Real>(model: &Model<T>) -> Result<CharRoots<T>, StabilityError> {
    roots_with_gain(model, false)
}

/// `flip_gain` negates `beta`, mislabelling the interference class; used to
/// check that the verification suite catches the mistake.
pub(crate) fn roots_with_gain<T: Real>(model: &Model<T>, flip_gain: bool) -> Result<CharRoots<T>, StabilityError> {
    let mut beta = loop_gain(model)?;
    if flip_gain {
        beta = -beta;
    }
    let tau = model.tau();
    if !(tau > T::zero()) {
        return Err(StabilityError::ZeroDelay);
    }
    let g = model.derived().g;
    let e = model.eps_abs();
    Ok(CharRoots { s1: scalar_root(e - g, beta, tau)?, s2: scalar_root(-e - g, beta, tau)? })
}

/// `tau Re s_1` of the default loop as a function of `gamma1 tau` and
/// `alpha_tilde`: `Re W₀(b x e^{-x (alpha_tilde - 1)}) + x (alpha_tilde - 1)`
/// with `x = gamma1 tau` and `b = +1` (destructive) or `-1` (constructive).
///
/// Same sign and zero set as `Re s_1`.
pub fn s1w_dimensionless<T: Real>(gamma1_tau: T, alpha_tilde: T, matched: Matched) -> Result<T, NonConvergence> {
    let u = gamma1_tau * (alpha_tilde - T::one());
    let b: T = matched.feedback_sign();
    Ok(scalar_root(u, b * gamma1_tau, T::one())?.re)
}

/// Zero of [`s1w_dimensionless`] in `alpha_tilde` by bisection on `[lo, hi]`.
///
/// Returns `None` when the indicator has the same sign at both ends.
pub fn boundary_alpha<T: Real>(gamma1_tau: T, matched: Matched, lo: T, hi: T) -> Result<Option<T>, NonConvergence> {
    let f = |a: T| s1w_dimensionless(gamma1_tau, a, matched);
    let (mut lo, mut hi) = (lo, hi);
    let (flo, fhi) = (f(lo)?, f(hi)?);
    if flo == T::zero() {
        return Ok(Some(lo));
    }
    if fhi == T::zero() {
        return Ok(Some(hi));
    }
    if (flo < T::zero()) == (fhi < T::zero()) {
        return Ok(None);
    }
    let rising = flo < T::zero();
    for _ in 0..200 {
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if fm == T::zero() {
            return Ok(Some(mid));
        }
        if (fm < T::zero()) == rising {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some((lo + hi) / T::lit(2.0)))
}

/// Delay-independent stability test with its evidence.
#[derive(Clone, Debug, PartialEq)]
pub struct RouthHurwitz<T> {
    /// Eigenvalues `-G ± |eps| + beta` of the undelayed system.
    pub zero_delay_eigenvalues: [T; 2],
    /// Condition 1: the undelayed matrix is Hurwitz.
    pub zero_delay_hurwitz: bool,
    /// Smallest scanned `T` whose auxiliary cubic has an imaginary-axis root,
    /// `Some(inf)` when the crossing only appears in the `T -> inf` limit.
    pub crossing: Option<T>,
    /// Number of `T` values scanned.
    pub scanned: usize,
    /// Closed form `G - sqrt(gamma1 gamma_f) > |eps|`, i.e. `(gamma2 + gamma3)/2 > |eps|`
    /// for the default loop.
    pub shortcut: bool,
    /// Conditions 1 and 2 together.
    pub delay_independent: bool,
}

impl<T> RouthHurwitz<T> {
    pub fn agrees(&self) -> bool {
        self.shortcut == self.delay_independent
    }
}

/// `T` values scanned for condition 2: `{0} ∪ logspace(1e-3, 1e3, 2001)`.
pub fn routh_hurwitz_grid<T: Real>() -> Vec<T> {
    let mut grid = vec![T::zero()];
    grid.extend(logspace(T::lit(1e-3), T::lit(1e3), 2001));
    grid
}

/// Coefficients `[a0, a1, a2, a3]` of `(s + c)(1 + T s)² - beta (1 - T s)²`.
fn auxiliary_cubic<T: Real>(c: T, beta: T, t: T) -> [T; 4] {
    let two = T::lit(2.0);
    [c - beta, T::one() + two * (c + beta) * t, two * t + (c - beta) * t * t, t * t]
}

/// First `T` on `grid` (or the `T -> inf` limit) at which the branch
/// `s + c = beta e^{-s tau}` has a root on the imaginary axis for some delay.
///
/// With the substitution `e^{-s tau} = ((1 - T s)/(1 + T s))²` a root `s = i y`
/// of the cubic exists iff `a0 = 0`, or `a0 a3 = a1 a2` with `a1 / a3 > 0`.
fn imaginary_crossing<T: Real>(c: T, beta: T, grid: &[T]) -> Option<T> {
    let h = |t: T| {
        let [a0, a1, a2, a3] = auxiliary_cubic(c, beta, t);
        (a0 * a3 - a1 * a2, a1 * a3)
    };
    if c - beta == T::zero() {
        return grid.first().copied();
    }
    let mut prev: Option<(T, T, T)> = None;
    for &t in grid {
        if t == T::zero() {
            continue;
        }
        let (v, pos) = h(t);
        if v == T::zero() && pos > T::zero() {
            return Some(t);
        }
        if let Some((_, pv, ppos)) = prev {
            if (pv < T::zero()) != (v < T::zero()) && (pos > T::zero() || ppos > T::zero()) {
                return Some(t);
            }
        }
        prev = Some((t, v, pos));
    }
    // a0 a3 - a1 a2 = -2T - 4(c + beta)T² - 2(c² - beta²)T³
    let lead = -(c * c - beta * beta);
    let lead = if lead == T::zero() { -(c + beta) } else { lead };
    match prev {
        Some((_, v, _)) if lead > T::zero() && v < T::zero() => Some(T::infinity()),
        _ => None,
    }
}

pub fn routh_hurwitz_delay_independent<T: Real>(model: &Model<T>) -> Result<RouthHurwitz<T>, StabilityError> {
    routh_hurwitz_on(model, &routh_hurwitz_grid())
}

pub fn routh_hurwitz_on<T: Real>(model: &Model<T>, grid: &[T]) -> Result<RouthHurwitz<T>, StabilityError> {
    let beta = loop_gain(model)?;
    let g = model.derived().g;
    let e = model.eps_abs();
    let eig = [-g + e + beta, -g - e + beta];
    let zero_delay_hurwitz = eig.iter().all(|&l| l < T::zero());
    let crossing = [g - e, g + e]
        .into_iter()
        .filter_map(|c| imaginary_crossing(c, beta, grid))
        .reduce(T::min);
    let shortcut = g - (model.gamma1() * model.gamma_f()).sqrt() > e;
    Ok(RouthHurwitz {
        zero_delay_eigenvalues: eig,
        zero_delay_hurwitz,
        crossing,
        scanned: grid.len(),
        shortcut,
        delay_independent: zero_delay_hurwitz && crossing.is_none(),
    })
}

/// Seed grid for [`char_root_oracle_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeedGrid {
    pub re_points: usize,
    pub im_points: usize,
}

impl Default for SeedGrid {
    fn default() -> Self {
        SeedGrid { re_points: 15, im_points: 15 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleRoots<T> {
    /// Distinct roots, rightmost first.
    pub roots: Vec<Cx<T>>,
    pub max_residual: T,
}

impl<T: Real> OracleRoots<T> {
    pub fn dominant(&self) -> Cx<T> {
        self.roots[0]
    }
}

/// Characteristic function `(s + G + q E)(s + G + q̄ E) - |eps|²` with
/// `E = e^{-s tau}`, its derivative and a magnitude scale for the residual.
fn characteristic<T: Real>(s: Cx<T>, g: T, q: Cx<T>, e2: T, tau: T) -> (Cx<T>, Cx<T>, T) {
    let ex = (-s * tau).exp();
    let a = s + g + q * ex;
    let b = s + g + q.conj() * ex;
    let f = a * b - e2;
    let da = -(q * ex * tau) + T::one();
    let db = -(q.conj() * ex * tau) + T::one();
    let scale = (s.norm() + g + q.norm() * ex.norm()).powi(2) + e2;
    (f, da * b + a * db, scale.max(T::one()))
}

fn newton<T: Real>(mut s: Cx<T>, g: T, q: Cx<T>, e2: T, tau: T) -> Option<(Cx<T>, T)> {
    let tiny = T::epsilon() * T::lit(16.0);
    for _ in 0..100 {
        let (f, df, _) = characteristic(s, g, q, e2, tau);
        if !(df.norm() > T::zero()) {
            return None;
        }
        let step = f / df;
        s -= step;
        if !(s.re.is_finite() && s.im.is_finite()) {
            return None;
        }
        if step.norm() <= tiny * (T::one() + s.norm()) {
            break;
        }
    }
    let (f, _, scale) = characteristic(s, g, q, e2, tau);
    let r = f.norm() / scale;
    (r <= T::lit(1e-10)).then_some((s, r))
}

/// Rightmost characteristic root found by Newton's method from a seed grid.
///
/// Works for any loop phase. Without delay or feedback the quadratic is
/// solved in closed form.
pub fn char_root_oracle<T: Real>(model: &Model<T>) -> Result<Cx<T>, StabilityError> {
    Ok(char_root_oracle_with(model, SeedGrid::default())?.dominant())
}

pub fn char_root_oracle_with<T: Real>(model: &Model<T>, seeds: SeedGrid) -> Result<OracleRoots<T>, StabilityError> {
    let g = model.derived().g;
    let q = model.delayed_coupling();
    let e = model.eps_abs();
    let tau = model.tau();
    if tau == T::zero() || q.norm() == T::zero() {
        // (s + G + Re q)² + (Im q)² = |eps|²
        let root = cx(e * e - q.im * q.im, T::zero()).sqrt();
        let centre = cx(-g - q.re, T::zero());
        let mut roots = vec![centre + root, centre - root];
        roots.dedup();
        return Ok(OracleRoots { roots, max_residual: T::zero() });
    }
    let re_hi = (T::lit(2.0) * g).max(e - g + q.norm() + T::one());
    let re_lo = T::lit(-5.0) * g;
    let im_hi = T::lit(3.0) * T::PI() / tau;
    let res = crate::scalar::linspace(re_lo, re_hi, seeds.re_points.max(1));
    let ims = crate::scalar::linspace(-im_hi, im_hi, seeds.im_points.max(1));
    let starts: Vec<Cx<T>> = res.iter().flat_map(|&r| ims.iter().map(move |&i| cx(r, i))).collect();
    let mut found: Vec<(Cx<T>, T)> = starts
        .par_iter()
        .filter_map(|&s0| newton(s0, g, q, e * e, tau))
        .collect();
    if found.is_empty() {
        return Err(StabilityError::NoRootFound);
    }
    found.sort_by(|a, b| b.0.re.partial_cmp(&a.0.re).unwrap().then(b.0.im.partial_cmp(&a.0.im).unwrap()));
    let max_residual = found.iter().map(|r| r.1).fold(T::zero(), T::max);
    let mut roots: Vec<Cx<T>> = Vec::new();
    for (s, _) in found {
        let tol = T::lit(1e-7) * (T::one() + s.norm());
        if roots.iter().all(|r| (r - s).norm() > tol) {
            roots.push(s);
        }
    }
    Ok(OracleRoots { roots, max_residual })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Lambert,
    Oracle,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityVerdict<T> {
    /// `Re s_1` (ns⁻¹); decides stability.
    pub s1w: T,
    /// `Re s_2` (ns⁻¹); absent when only the oracle ran.
    pub s2w: Option<T>,
    pub stable: bool,
    /// `|Re s_1| <= MARGINAL_REL * G`.
    pub marginal: bool,
    pub interference: Interference<T>,
    pub routh_hurwitz: Option<RouthHurwitz<T>>,
    pub dominant_root: Option<Cx<T>>,
    pub method: Method,
}

/// Stability verdict; closed form for matched phases, root oracle otherwise
/// (only when `with_oracle` is set).
pub fn assess<T: Real>(model: &Model<T>, with_oracle: bool) -> Result<StabilityVerdict<T>, StabilityError> {
    let oracle = if with_oracle { Some(char_root_oracle(model)?) } else { None };
    let g = model.derived().g.max(T::min_positive_value());
    let marginal = |s: T| s.abs() <= T::lit(MARGINAL_REL) * g;
    let interference = model.interference();
    let no_loop = model.delayed_coupling().norm() == T::zero();
    let closed = if (model.tau() == T::zero() && model.loop_sign().is_some()) || no_loop {
        let beta = loop_gain(model)?;
        let e = model.eps_abs();
        let g = model.derived().g;
        Ok(CharRoots { s1: cx(e - g + beta, T::zero()), s2: cx(-e - g + beta, T::zero()) })
    } else {
        char_roots_lambert(model)
    };
    match (closed, oracle) {
        (Ok(r), dominant_root) => Ok(StabilityVerdict {
            s1w: r.s1.re,
            s2w: Some(r.s2.re),
            stable: r.s1.re < T::zero(),
            marginal: marginal(r.s1.re),
            interference,
            routh_hurwitz: Some(routh_hurwitz_delay_independent(model)?),
            dominant_root,
            method: Method::Lambert,
        }),
        (Err(StabilityError::GenericPhase), Some(root)) => Ok(StabilityVerdict {
            s1w: root.re,
            s2w: None,
            stable: root.re < T::zero(),
            marginal: marginal(root.re),
            interference,
            routh_hurwitz: None,
            dominant_root: Some(root),
            method: Method::Oracle,
        }),
        (Err(e), _) => Err(e),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MapCell<T> {
    pub gamma1_tau: T,
    pub alpha_tilde: T,
    /// `tau Re s_1`.
    pub s1w: T,
    pub stable: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityMap<T> {
    pub matched: Matched,
    pub gamma1_tau: Vec<T>,
    pub alpha_tilde: Vec<T>,
    /// Row-major: all `alpha_tilde` values for the first `gamma1_tau`, then the next.
    pub cells: Vec<MapCell<T>>,
    /// Zero crossings `(gamma1_tau, alpha_tilde)` found by linear interpolation
    /// between neighbouring cells along `alpha_tilde`.
    pub boundary: Vec<(T, T)>,
}

pub fn stability_map<T: Real>(
    matched: Matched,
    gamma1_tau: &[T],
    alpha_tilde: &[T],
) -> Result<StabilityMap<T>, StabilityError> {
    let pairs: Vec<(T, T)> = gamma1_tau.iter().flat_map(|&x| alpha_tilde.iter().map(move |&a| (x, a))).collect();
    let cells = pairs
        .par_iter()
        .map(|&(x, a)| {
            let s1w = s1w_dimensionless(x, a, matched)?;
            Ok(MapCell { gamma1_tau: x, alpha_tilde: a, s1w, stable: s1w < T::zero() })
        })
        .collect::<Result<Vec<_>, NonConvergence>>()?;
    let mut boundary = Vec::new();
    if !alpha_tilde.is_empty() {
        for row in cells.chunks(alpha_tilde.len()) {
            for w in row.windows(2) {
                let (a, b) = (w[0], w[1]);
                if a.s1w == T::zero() {
                    boundary.push((a.gamma1_tau, a.alpha_tilde));
                } else if (a.s1w < T::zero()) != (b.s1w < T::zero()) && b.s1w != T::zero() {
                    let t = a.s1w / (a.s1w - b.s1w);
                    boundary.push((a.gamma1_tau, a.alpha_tilde + t * (b.alpha_tilde - a.alpha_tilde)));
                }
            }
            if let Some(last) = row.last().filter(|c| c.s1w == T::zero()) {
                boundary.push((last.gamma1_tau, last.alpha_tilde));
            }
        }
    }
    Ok(StabilityMap {
        matched,
        gamma1_tau: gamma1_tau.to_vec(),
        alpha_tilde: alpha_tilde.to_vec(),
        cells,
        boundary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DelaySpec, ModelParams};
    use std::f64::consts::PI;

    /// Scaled delay `tau ~ pi / 2` with `gamma1 = x / tau`, `gamma2 = 2 + 2 gamma1`.
    fn scenario(x: f64, alpha: f64, matched: Matched) -> Model<f64> {
        let delta = match matched {
            Matched::Destructive => 0,
            Matched::Constructive => 1,
        };
        let delay = DelaySpec::scaled(0.5, delta).unwrap();
        let g1 = x / delay.tau(1e6);
        ModelParams::new(g1, 2.0 + 2.0 * g1, 0.0, (alpha + 1.0) * g1 + 1.0, delay).validate().unwrap()
    }

    /// Constructive crossing for gamma1 tau > 1: `x sin(psi) = psi`, boundary `1 + cos(psi)`.
    fn constructive_boundary(x: f64) -> f64 {
        if x <= 1.0 {
            return 2.0;
        }
        let (mut lo, mut hi) = (1e-12, PI);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if x * mid.sin() - mid > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        1.0 + (0.5 * (lo + hi)).cos()
    }

    #[test]
    fn destructive_boundary_is_zero() {
        for x in [0.1, 1.0, 10.0] {
            assert!(s1w_dimensionless(x, 0.0f64, Matched::Destructive).unwrap().abs() < 1e-12);
            assert!(s1w_dimensionless(x, -0.1, Matched::Destructive).unwrap() < 0.0);
            assert!(s1w_dimensionless(x, 0.1, Matched::Destructive).unwrap() > 0.0);
        }
    }

    #[test]
    fn constructive_boundary_matches_crossing_condition() {
        for x in [0.1, 0.5, 0.9, 1.5, 3.0, 10.0, 30.0] {
            let b = boundary_alpha(x, Matched::Constructive, -1.0, 3.0).unwrap().unwrap();
            assert!((b - constructive_boundary(x)).abs() < 1e-6, "x={x}: {b}");
        }
        assert!(s1w_dimensionless(0.5, 1.99, Matched::Constructive).unwrap() < 0.0);
        assert!(s1w_dimensionless(0.5, 2.01, Matched::Constructive).unwrap() > 0.0);
    }

    #[test]
    fn scenario_helper_has_exact_phase() {
        let m = scenario(0.7, 0.5, Matched::Destructive);
        assert_eq!(m.loop_sign(), Some(1.0));
        let m = scenario(0.7, 0.5, Matched::Constructive);
        assert_eq!(m.loop_sign(), Some(-1.0));
    }

    #[test]
    fn lambert_roots_match_oracle() {
        for matched in [Matched::Destructive, Matched::Constructive] {
            for x in [0.2, 0.9, 2.5] {
                for alpha in [-0.7, 0.4, 1.3, 2.6] {
                    let m = scenario(x, alpha, matched);
                    let r = char_roots_lambert(&m).unwrap();
                    let o = char_root_oracle(&m).unwrap();
                    assert!((r.s1.re - o.re).abs() < 1e-8, "{matched} x={x} a={alpha}: {} vs {}", r.s1, o);
                    assert!(r.s1.re >= r.s2.re);
                    let scaled = s1w_dimensionless(x, alpha, matched).unwrap();
                    assert!((scaled - r.s1.re * m.tau()).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn short_delay_limit() {
        let m = ModelParams::new(2.0, 2.0, 0.0, 0.5, DelaySpec::scaled(0.0001, 0).unwrap()).validate().unwrap();
        let r = char_roots_lambert(&m).unwrap();
        assert!((r.s1.re - (0.5 - 1.0f64)).abs() < 2e-3);
    }

    #[test]
    fn generic_phase_and_zero_delay() {
        let m = ModelParams::new(1.0, 2.0, 0.0, 0.5, DelaySpec::Raw { tau: 1.234 }).validate().unwrap();
        assert_eq!(char_roots_lambert(&m), Err(StabilityError::GenericPhase));
        assert_eq!(routh_hurwitz_delay_independent(&m).unwrap_err(), StabilityError::GenericPhase);
        let v = assess(&m, true).unwrap();
        assert_eq!(v.method, Method::Oracle);
        let m = ModelParams::new(1.0, 2.0, 0.0, 0.5, DelaySpec::Raw { tau: 0.0 }).validate().unwrap();
        assert_eq!(char_roots_lambert(&m), Err(StabilityError::ZeroDelay));
    }

    #[test]
    fn no_feedback_roots_are_eigenvalues() {
        let m = ModelParams::new(0.0, 2.0, 1.0, 0.7, DelaySpec::Raw { tau: 1.0 }).validate().unwrap();
        let o = char_root_oracle_with(&m, SeedGrid::default()).unwrap();
        assert_eq!(o.roots, vec![cx(-1.5 + 0.7, 0.0), cx(-1.5 - 0.7, 0.0)]);
    }

    #[test]
    fn point_p_is_stable_but_not_delay_independent() {
        let m = ModelParams::new(2.75, 3.0, 0.0, 6.5, DelaySpec::scaled(0.1, 1).unwrap()).validate().unwrap();
        let v = assess(&m, true).unwrap();
        assert!(v.stable);
        assert!(v.dominant_root.unwrap().re < 0.0);
        let rh = v.routh_hurwitz.unwrap();
        assert!(!rh.delay_independent && !rh.shortcut);
    }

    #[test]
    fn routh_hurwitz_cases() {
        for d in [0, 1] {
            let m = ModelParams::new(1.0, 2.0, 0.5, 1.2, DelaySpec::scaled(0.3, d).unwrap()).validate().unwrap();
            let rh = routh_hurwitz_delay_independent(&m).unwrap();
            assert!(rh.shortcut && rh.delay_independent, "{rh:?}");
            let m = ModelParams::new(1.0, 2.0, 0.5, 1.3, DelaySpec::scaled(0.3, d).unwrap()).validate().unwrap();
            let rh = routh_hurwitz_delay_independent(&m).unwrap();
            assert!(!rh.shortcut && !rh.delay_independent, "{rh:?}");
        }
        let m = ModelParams::new(3.0, 0.0, 0.0, 0.0, DelaySpec::scaled(0.3, 1).unwrap()).validate().unwrap();
        let rh = routh_hurwitz_delay_independent(&m).unwrap();
        // c = |beta| exactly: the cubic never crosses but the shortcut is strict
        assert!(rh.delay_independent && !rh.shortcut);
    }

    #[test]
    fn map_boundaries() {
        let xs = [0.3, 3.0];
        let alphas = crate::scalar::linspace(-1.0, 4.0, 51);
        let map = stability_map(Matched::Constructive, &xs, &alphas).unwrap();
        let _: &StabilityMap<f64> = &map;
        assert_eq!(map.cells.len(), 102);
        assert_eq!(map.boundary.len(), 2);
        assert!((map.boundary[0].1 - 2.0f64).abs() < 1e-9);
        assert!((map.boundary[1].1 - constructive_boundary(3.0)).abs() < 0.01);
        let single = stability_map(Matched::Destructive, &[1.0], &[0.5]).unwrap();
        assert_eq!(single.cells.len(), 1);
        assert!(single.boundary.is_empty());
    }

    #[test]
    fn fig3_is_marginal_and_stable() {
        let m = ModelParams::new(2.0, 2.0, 0.0, 1.0 - 1e-6, DelaySpec::scaled(0.5, 0).unwrap()).validate().unwrap();
        let v = assess(&m, false).unwrap();
        assert!(v.stable && v.marginal);
    }

    #[test]
    fn no_feedback_uses_undelayed_eigenvalues() {
        // raw delay with an arbitrary carrier phase; the loop is absent
        for (eps, stable) in [(0.9f64, true), (1.1, false)] {
            let m = ModelParams::new(0.0, 2.0, 0.0, eps, DelaySpec::Raw { tau: 1.234 }).validate().unwrap();
            let v = assess(&m, false).unwrap();
            assert!((v.s1w - (eps - 1.0)).abs() < 1e-15);
            assert_eq!(v.stable, stable);
        }
    }
}
