//! Frequency-domain solution of the delayed Langevin system.
//!
//! `omega` is always the detuning from the carrier in the frame rotating at
//! `omega0`. The loop factor `e^{-i(omega - omega0) tau}` is evaluated as
//! `e^{i omega0 tau} * e^{-i omega tau}` with the exactly reduced carrier
//! phase, so for a scaled delay `omega = 0` sits exactly on the constructive
//! or destructive condition.
//!
//! In the notation of the coefficient lists, `Z*(-omega)` means
//! `conj(Z(-omega))`, the lower-right element of the 2×2 matrix
//! `M(omega) = [[Z(omega), -eps], [-eps*, Z*(-omega)]]`.

use thiserror::Error;

use crate::model::Model;
use crate::scalar::{cis_neg, cx, real, Cx, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ResponseError {
    #[error("det M(omega) = {delta_abs:e} is below the singularity floor at omega = {omega}")]
    SingularDelta { omega: f64, delta_abs: f64 },
    #[error("model has a non-default loop (gamma_f != gamma1 or phi != pi); use the general evaluation")]
    NonDefaultLoop,
}

/// Relative floor for `|Delta(omega)|`: evaluations with
/// `|Delta| < DELTA_FLOOR * max(1, gamma2^2)` are reported as singular.
pub const DELTA_FLOOR: f64 = 1e-12;

/// Internal-mode response at one detuning.
#[derive(Clone, Debug, PartialEq)]
pub struct FreqResponse<T> {
    pub omega: T,
    /// `s(omega)`.
    pub s_plus: Cx<T>,
    /// `s*(-omega)`.
    pub s_minus_conj: Cx<T>,
    /// `Z(omega)`.
    pub z_plus: Cx<T>,
    /// `Z*(-omega)`.
    pub z_minus_conj: Cx<T>,
    /// `det M(omega)`.
    pub delta: Cx<T>,
    /// `A⁻_j(omega)`, `j = 1, 2, 3`.
    pub a_minus: [Cx<T>; 3],
    /// `A⁺_j(omega)`, `j = 1, 2, 3`.
    pub a_plus: [Cx<T>; 3],
}

/// Input-output port functions: `b_out^i = X_i b_in^i + Y_i c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PortFunctions<T> {
    pub x: [Cx<T>; 2],
    pub y: [Cx<T>; 2],
}

/// `e^{i omega0 tau} e^{-i omega tau}`.
#[inline]
fn carrier_delay<T: Real>(omega: T, model: &Model<T>) -> Cx<T> {
    model.carrier() * cis_neg(omega * model.tau())
}

/// `s(omega) = 1 - e^{-i(omega - omega0) tau}`.
pub fn eval_s<T: Real>(omega: T, model: &Model<T>) -> Cx<T> {
    real(T::one()) - carrier_delay(omega, model)
}

fn singular_floor<T: Real>(model: &Model<T>) -> T {
    let g2 = model.gamma2();
    T::lit(DELTA_FLOOR).max(T::epsilon() * T::lit(16.0)) * T::one().max(g2 * g2)
}

fn check_delta<T: Real>(omega: T, delta: Cx<T>, model: &Model<T>) -> Result<(), ResponseError> {
    let abs = delta.norm();
    if abs < singular_floor(model) || !abs.is_finite() {
        return Err(ResponseError::SingularDelta { omega: omega.as_f64(), delta_abs: abs.as_f64() });
    }
    Ok(())
}

/// Response of the default loop (`phi = pi`, `gamma_f = gamma1`).
pub fn eval_response<T: Real>(omega: T, model: &Model<T>) -> Result<FreqResponse<T>, ResponseError> {
    if !model.is_default_loop() {
        return Err(ResponseError::NonDefaultLoop);
    }
    eval_response_default(omega, model, false)
}

/// `flip_anomalous` replaces `s*(-omega)` by `1 + e^{-i(omega + omega0)tau}`
/// inside `A⁺_1` only; used by the verification suite as a mutation.
pub(crate) fn eval_response_default<T: Real>(
    omega: T,
    model: &Model<T>,
    flip_anomalous: bool,
) -> Result<FreqResponse<T>, ResponseError> {
    let half = T::lit(0.5);
    let open = (model.gamma2() + model.gamma3()) * half;
    let g1 = model.gamma1();
    let eps = model.epsilon();

    let s_plus = eval_s(omega, model);
    let s_minus_conj = eval_s(-omega, model).conj();
    let z_plus = cx(open, omega) + s_plus * g1;
    let z_minus_conj = cx(open, omega) + s_minus_conj * g1;
    let delta = z_plus * z_minus_conj - real(model.eps_abs() * model.eps_abs());
    check_delta(omega, delta, model)?;

    let anomalous_loop = if flip_anomalous { real(T::lit(2.0)) - s_minus_conj } else { s_minus_conj };
    let sq = [g1.sqrt(), model.gamma2().sqrt(), model.gamma3().sqrt()];
    let a_minus = [
        -(s_plus * z_minus_conj) * sq[0] / delta,
        -z_minus_conj * sq[1] / delta,
        -z_minus_conj * sq[2] / delta,
    ];
    let a_plus = [
        -(anomalous_loop * eps) * sq[0] / delta,
        -eps * sq[1] / delta,
        -eps * sq[2] / delta,
    ];
    Ok(FreqResponse { omega, s_plus, s_minus_conj, z_plus, z_minus_conj, delta, a_minus, a_plus })
}

/// Response for an arbitrary loop phase `phi` and return coupling `gamma_f`.
///
/// Fourier transforming
/// `dc/dt = -(gamma1+gamma_f+gamma2+gamma3)/2 c + eps c† - sqrt(gamma1 gamma_f) e^{i phi} c(t-tau)
///          - sqrt(gamma1) b1(t) - sqrt(gamma_f) e^{i phi} b1(t-tau) - ...`
/// in the rotating frame gives
/// `Z(omega) = i omega + (gamma1+gamma_f+gamma2+gamma3)/2 + sqrt(gamma1 gamma_f) L(omega)`
/// and the `b1` coupling `k(omega) = -sqrt(gamma1) - sqrt(gamma_f) L(omega)`, with
/// `L(omega) = e^{i phi} e^{-i(omega - omega0) tau}`. The lower row of `M` uses
/// `conj(Z(-omega))` and `conj(k(-omega))`.
pub fn eval_response_general<T: Real>(omega: T, model: &Model<T>) -> Result<FreqResponse<T>, ResponseError> {
    let g = model.derived().g;
    let g1 = model.gamma1();
    let gf = model.gamma_f();
    let mix = (g1 * gf).sqrt();
    let eps = model.epsilon();
    let lp = loop_factor(omega, model);
    let lm = loop_factor(-omega, model);

    let z_plus = cx(g, omega) + lp * mix;
    let z_minus_conj = (cx(g, -omega) + lm * mix).conj();
    let delta = z_plus * z_minus_conj - real(model.eps_abs() * model.eps_abs());
    check_delta(omega, delta, model)?;

    let k_plus = -(real(g1.sqrt()) + lp * gf.sqrt());
    let k_minus_conj = -(real(g1.sqrt()) + lm * gf.sqrt()).conj();
    let sq2 = model.gamma2().sqrt();
    let sq3 = model.gamma3().sqrt();
    let a_minus = [k_plus * z_minus_conj / delta, -z_minus_conj * sq2 / delta, -z_minus_conj * sq3 / delta];
    let a_plus = [k_minus_conj * eps / delta, -eps * sq2 / delta, -eps * sq3 / delta];
    Ok(FreqResponse {
        omega,
        s_plus: eval_s(omega, model),
        s_minus_conj: eval_s(-omega, model).conj(),
        z_plus,
        z_minus_conj,
        delta,
        a_minus,
        a_plus,
    })
}

/// `e^{i phi} e^{-i(omega - omega0) tau}`.
fn loop_factor<T: Real>(omega: T, model: &Model<T>) -> Cx<T> {
    model.loop_rotation() * carrier_delay(omega, model)
}

/// Port functions for the general loop:
/// `X_1 = e^{i phi} e^{-i(omega-omega0) tau}`,
/// `Y_1 = sqrt(gamma1) e^{i phi} e^{-i(omega-omega0) tau} + sqrt(gamma_f)`,
/// `X_2 = 1`, `Y_2 = sqrt(gamma2)`.
pub fn eval_ports<T: Real>(omega: T, model: &Model<T>) -> PortFunctions<T> {
    let l = loop_factor(omega, model);
    let y1 = if model.is_default_loop() {
        eval_s(omega, model) * model.gamma1().sqrt()
    } else {
        l * model.gamma1().sqrt() + real(model.gamma_f().sqrt())
    };
    PortFunctions { x: [l, real(T::one())], y: [y1, real(model.gamma2().sqrt())] }
}

/// Dispatches to [`eval_response`] for the default loop and to
/// [`eval_response_general`] otherwise.
pub fn response<T: Real>(omega: T, model: &Model<T>) -> Result<FreqResponse<T>, ResponseError> {
    if model.is_default_loop() {
        eval_response_default(omega, model, false)
    } else {
        eval_response_general(omega, model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DelaySpec, ModelParams};

    fn model(g1: f64, g2: f64, g3: f64, eps: f64, delta: u8) -> Model<f64> {
        ModelParams::new(g1, g2, g3, eps, DelaySpec::scaled(0.5, delta).unwrap()).validate().unwrap()
    }

    fn close(a: Cx<f64>, b: Cx<f64>, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn s_values_on_carrier() {
        let d = model(2.0, 2.0, 0.0, 1.0, 0);
        let c = model(2.0, 2.0, 0.0, 1.0, 1);
        assert_eq!(eval_s(0.0, &d), cx(0.0, 0.0));
        assert_eq!(eval_s(0.0, &c), cx(2.0, 0.0));
        let w = std::f64::consts::PI / d.tau();
        assert!(close(eval_s(w, &d), cx(2.0, 0.0), 1e-14));
    }

    #[test]
    fn no_pump_no_feedback() {
        let m = ModelParams::new(0.0, 2.0, 0.0, 0.0, DelaySpec::Raw { tau: 1.0 }).validate().unwrap();
        for w in [-3.0, 0.0, 0.7] {
            let r = eval_response(w, &m).unwrap();
            assert!(close(r.z_plus, cx(1.0, w), 1e-15));
            assert!(close(r.delta, cx(1.0 - w * w, 2.0 * w), 1e-14));
            assert!(r.a_plus.iter().all(|a| a.norm() == 0.0));
        }
    }

    #[test]
    fn constructive_carrier_values() {
        let m = model(2.0, 2.0, 0.0, 1.0, 1);
        let r = eval_response(0.0, &m).unwrap();
        assert_eq!(r.z_plus, cx(5.0, 0.0));
        assert_eq!(r.delta, cx(24.0, 0.0));
        // independent determinant of M = [[Z, -eps], [-eps*, Z*(-w)]]
        let det = r.z_plus * r.z_minus_conj - cx(1.0, 0.0) * cx(1.0, 0.0);
        assert_eq!(det, r.delta);
    }

    #[test]
    fn threshold_is_singular() {
        let m = model(2.0, 2.0, 0.0, 1.0, 0);
        assert!(matches!(eval_response(0.0, &m), Err(ResponseError::SingularDelta { .. })));
        let m = model(2.0, 2.0, 0.0, 1.0 - 1e-6, 0);
        let r = eval_response(0.0, &m).unwrap();
        assert!((r.delta.re - (1.0 - (1.0 - 1e-6f64).powi(2))).abs() < 1e-15);
    }

    #[test]
    fn ports_default_and_pure_delay() {
        let m = model(2.0, 2.0, 0.0, 1.0, 1);
        for w in [-2.0, 0.1, 5.0] {
            let p = eval_ports(w, &m);
            assert!(close(p.y[0], eval_s(w, &m) * 2f64.sqrt(), 1e-15));
            assert!((p.x[0].norm() - 1.0).abs() < 1e-15);
            assert_eq!(p.x[1], cx(1.0, 0.0));
            assert_eq!(p.y[1], cx(2f64.sqrt(), 0.0));
        }
        let m = ModelParams::new(0.0, 1.0, 0.0, 0.1, DelaySpec::Raw { tau: 0.3 })
            .with_loop(0.0, 0.4)
            .validate()
            .unwrap();
        let p = eval_ports(1.5, &m);
        assert_eq!(p.y[0], cx(0.0, 0.0));
        let expected = Cx::from_polar(1.0, 0.4) * m.carrier() * Cx::from_polar(1.0, -1.5 * 0.3);
        assert!(close(p.x[0], expected, 1e-15));
    }

    #[test]
    fn general_reduces_to_default() {
        let m = model(1.3, 0.7, 0.2, 0.4, 1);
        for w in [-4.0, -0.3, 0.0, 0.9, 6.0] {
            let a = eval_response(w, &m).unwrap();
            let b = eval_response_general(w, &m).unwrap();
            assert!(close(a.z_plus, b.z_plus, 1e-13));
            assert!(close(a.delta, b.delta, 1e-13));
            for j in 0..3 {
                assert!(close(a.a_minus[j], b.a_minus[j], 1e-13));
                assert!(close(a.a_plus[j], b.a_plus[j], 1e-13));
            }
        }
    }

    #[test]
    fn markovian_channel() {
        let m = model(1.5, 0.5, 0.25, 0.3, 0).markovian();
        for w in [-1.0, 0.0, 2.0] {
            let r = eval_response_general(w, &m).unwrap();
            assert!(close(r.z_plus, cx((1.5 + 0.5 + 0.25) / 2.0, w), 1e-15));
        }
    }

    #[test]
    fn in_phase_loop_adds_loss() {
        // phi = 0 with destructive carrier phase: the loop term enters Re Z with +gamma1
        let m = ModelParams::new(1.5, 0.5, 0.0, 0.3, DelaySpec::scaled(0.5, 0).unwrap())
            .with_loop(1.5, 0.0)
            .validate()
            .unwrap();
        let r = eval_response_general(0.0, &m).unwrap();
        assert!(close(r.z_plus, cx(0.25 + 1.5 + 1.5, 0.0), 1e-15));
    }

    #[test]
    fn non_default_loop_rejected_by_default_path() {
        let m = model(1.0, 1.0, 0.0, 0.1, 0).markovian();
        assert_eq!(eval_response(0.0, &m), Err(ResponseError::NonDefaultLoop));
    }

    #[test]
    fn textbook_single_sided_reduction() {
        let m = ModelParams::new(0.0, 2.0, 0.0, 0.6, DelaySpec::Raw { tau: 0.0 }).with_beta(0.4).validate().unwrap();
        let eps = Cx::from_polar(0.6, 0.4);
        for w in [-2.0, 0.0, 1.0] {
            let r = eval_response(w, &m).unwrap();
            let z = cx(1.0, w);
            let det = z * z - 0.36;
            assert!(close(r.a_minus[1], -z * 2f64.sqrt() / det, 1e-14));
            assert!(close(r.a_plus[1], -eps * 2f64.sqrt() / det, 1e-14));
            assert_eq!(r.a_minus[0].norm(), 0.0);
            assert_eq!(r.a_minus[2].norm(), 0.0);
        }
    }

    proptest::proptest! {
        #[test]
        fn conjugation_and_determinant(w in -20.0f64..20.0, g1 in 0.01f64..3.0, g2 in 0.0f64..3.0, eps in 0.0f64..1.0, d in 0u8..2) {
            let m = model(g1, g2, 0.1, eps, d);
            let r = eval_response(w, &m).unwrap();
            let r_neg = eval_response(-w, &m).unwrap();
            proptest::prop_assert!(close(r.z_minus_conj, r_neg.z_plus.conj(), 1e-14));
            proptest::prop_assert!(r.s_plus.norm() <= 2.0 + 1e-15);
            // det of the explicit 2x2 matrix
            let e = m.epsilon();
            let mat = [[r.z_plus, -e], [-e.conj(), r.z_minus_conj]];
            let det = mat[0][0] * mat[1][1] - mat[0][1] * mat[1][0];
            proptest::prop_assert!(close(det, r.delta, 1e-12));
        }
    }
}
