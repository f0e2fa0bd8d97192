//! Principal branch `W₀` of the Lambert W function for complex arguments.

use thiserror::Error;

use crate::scalar::{cx, Cx, Real};

const MAX_ITER: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("Lambert W did not converge for z = {re} + {im}i")]
pub struct NonConvergence {
    pub re: f64,
    pub im: f64,
}

/// Maximum accepted defining residual `|w e^w - z|`, relative to `max(1, |z|)`.
pub fn residual_tolerance<T: Real>() -> T {
    if T::epsilon() < T::lit(1e-10) {
        T::lit(1e-12)
    } else {
        T::lit(1e-4)
    }
}

/// `|w e^w - z| / max(1, |z|)`.
pub fn defining_residual<T: Real>(w: Cx<T>, z: Cx<T>) -> T {
    (w * w.exp() - z).norm() / T::one().max(z.norm())
}

/// Whether `w` lies in the range of the principal branch: `Im w` in `(-pi, pi)`
/// and to the right of the curve `Re w = -Im w cot(Im w)` (the image of the
/// branch cut), or real with `w >= -1`. `slack` widens the region to absorb
/// rounding for arguments on the cut itself.
pub fn is_principal<T: Real>(w: Cx<T>, slack: T) -> bool {
    let eta = w.im;
    if eta.abs() >= T::PI() {
        return false;
    }
    if eta == T::zero() {
        return w.re >= -T::one() - slack;
    }
    w.re >= -eta / eta.tan() - slack * (T::one() + w.norm())
}

/// Starting points for Halley's iteration, best first for the region of `z`.
fn initial_guesses<T: Real>(z: Cx<T>) -> [Cx<T>; 3] {
    let one = T::one();
    let two = T::lit(2.0);
    // expansion about the branch point -1/e in p = sqrt(2(e z + 1))
    let p = ((z * T::E() + one) * two).sqrt();
    let branch = cx(-one, T::zero()) + p - p * p / T::lit(3.0) + p * p * p * T::lit(11.0 / 72.0);
    // Taylor series about 0
    let small = z - z * z + z * z * z * T::lit(1.5);
    // asymptotic series for large |z|
    let asym = if z.norm() > T::lit(0.5) {
        let l1 = z.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    } else {
        small
    };
    if (z + T::E().recip()).norm() < T::lit(0.5) {
        [branch, small, asym]
    } else if z.norm() < one {
        [small, branch, asym]
    } else {
        [asym, branch, small]
    }
}

fn finite<T: Real>(z: Cx<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

fn halley<T: Real>(z: Cx<T>, mut w: Cx<T>) -> Cx<T> {
    let one = T::one();
    let two = T::lit(2.0);
    let tiny = T::epsilon() * T::lit(4.0);
    for _ in 0..MAX_ITER {
        let ew = w.exp();
        let f = w * ew - z;
        if f.norm() <= tiny * T::one().max(z.norm()) {
            break;
        }
        let wp1 = w + one;
        let denom = ew * wp1 - (w + two) * f / (wp1 * two);
        if denom.norm() == T::zero() || !finite(denom) {
            break;
        }
        let step = f / denom;
        w -= step;
        if step.norm() <= tiny * (one + w.norm()) {
            break;
        }
    }
    w
}

/// `W₀(z)`, the principal branch of the Lambert W function.
///
/// Arguments on the negative real ray below `-1/e` are taken from the upper
/// side of the cut, with a negative-zero imaginary part counted as `+0`.
pub fn lambert_w0<T: Real>(z: Cx<T>) -> Result<Cx<T>, NonConvergence> {
    let z = cx(z.re, z.im + T::zero());
    if z.re == T::zero() && z.im == T::zero() {
        return Ok(z);
    }
    if !finite(z) {
        return Err(NonConvergence { re: z.re.as_f64(), im: z.im.as_f64() });
    }
    let tol = residual_tolerance::<T>();
    let slack = T::epsilon().sqrt();
    let mut best: Option<(T, Cx<T>)> = None;
    for guess in initial_guesses(z) {
        let w = halley(z, guess);
        if !finite(w) || !is_principal(w, slack) {
            continue;
        }
        let r = defining_residual(w, z);
        if r <= tol {
            return Ok(w);
        }
        if best.is_none_or(|(b, _)| r < b) {
            best = Some((r, w));
        }
    }
    match best {
        // the branch point itself: residual is limited by the rounding of -1/e
        Some((r, w)) if r <= tol.sqrt() && (z + T::E().recip()).norm() < tol.sqrt() => Ok(w),
        _ => Err(NonConvergence { re: z.re.as_f64(), im: z.im.as_f64() }),
    }
}

/// `W₀(e^{ln_z})` for arguments whose exponential would overflow.
///
/// Solves `w + ln w = ln_z` by Newton's method. Falls back to
/// [`lambert_w0`] when `e^{ln_z}` is representable.
pub fn lambert_w0_from_ln<T: Real>(ln_z: Cx<T>) -> Result<Cx<T>, NonConvergence> {
    if ln_z.re < T::lit(0.5) * T::max_value().ln() {
        return lambert_w0(ln_z.exp());
    }
    let one = T::one();
    let tiny = T::epsilon() * T::lit(4.0);
    let mut w = ln_z - ln_z.ln();
    for _ in 0..MAX_ITER {
        let g = w + w.ln() - ln_z;
        let step = g / (w.inv() + one);
        w -= step;
        if step.norm() <= tiny * (one + w.norm()) {
            return Ok(w);
        }
    }
    Err(NonConvergence { re: f64::INFINITY, im: ln_z.im.as_f64() })
}
