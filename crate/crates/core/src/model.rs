//! Scenario parameters, validation and derived quantities.
//!
//! Units are ns⁻¹ for every rate and ns for the delay. The carrier frequency
//! `omega0` defaults to 10⁶ ns⁻¹ (1 fs⁻¹), so `omega0 * tau` is of order 10⁶ rad
//! and cannot be reduced modulo 2π in floating point without losing the phase.
//! A [`DelaySpec::Scaled`] delay therefore carries the delay as an exact
//! rational and the loop phase is reduced with integer arithmetic.

use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{cx, Cx, Real};

/// Default carrier frequency, ns⁻¹.
pub const DEFAULT_OMEGA0: f64 = 1.0e6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("rate `{name}` must be non-negative, got {value}")]
    NegativeRate { name: &'static str, value: f64 },
    #[error("parameter `{0}` is not finite")]
    NonFinite(&'static str),
    #[error("omega0 must be positive")]
    ZeroOmega0,
    #[error("malformed delay specification: {0}")]
    MalformedDelaySpec(String),
    #[error("gamma1 = 0 with a scaled delay: alpha_tilde is undefined")]
    Gamma1ZeroWithScaledDelay,
}

/// Feedback delay.
///
/// `Scaled` encodes `tau = (S + delta / omega0) * pi` ns. With the default
/// `omega0 = 10⁶ ns⁻¹` this is `(S + 10⁻⁶ delta) * pi`. `omega0 * S` must be a
/// whole number, so `omega0 * tau / pi = omega0 * S + delta` is an integer and
/// its parity fixes the loop phase exactly.
#[derive(Clone, Debug, PartialEq)]
pub enum DelaySpec<T> {
    Raw { tau: T },
    Scaled { scale: Ratio<i64>, delta: u8 },
}

impl<T: Real> DelaySpec<T> {
    /// Scaled delay from a decimal scale such as `0.5`.
    ///
    /// The value is interpreted through its shortest decimal representation,
    /// so `0.1` means exactly one tenth.
    pub fn scaled(scale: f64, delta: u8) -> Result<Self, ModelError> {
        let scale = ratio_from_decimal(&format!("{scale}"))
            .ok_or_else(|| ModelError::MalformedDelaySpec(format!("scale {scale} is not a finite decimal")))?;
        Self::scaled_exact(scale, delta)
    }

    pub fn scaled_exact(scale: Ratio<i64>, delta: u8) -> Result<Self, ModelError> {
        if delta > 1 {
            return Err(ModelError::MalformedDelaySpec(format!("delta must be 0 or 1, got {delta}")));
        }
        if scale.is_negative() {
            return Err(ModelError::MalformedDelaySpec(format!("scale must be non-negative, got {scale}")));
        }
        Ok(DelaySpec::Scaled { scale, delta })
    }

    /// Delay in ns as a floating-point number.
    pub fn tau(&self, omega0: T) -> T {
        match self {
            DelaySpec::Raw { tau } => *tau,
            DelaySpec::Scaled { scale, delta } => {
                let s = T::lit(*scale.numer() as f64) / T::lit(*scale.denom() as f64);
                (s + T::lit(f64::from(*delta)) / omega0) * T::PI()
            }
        }
    }
}

/// Parses a plain decimal literal (`-1.25`, `3`, `2.5e-3`) into an exact ratio.
pub fn ratio_from_decimal(text: &str) -> Option<Ratio<i64>> {
    let text = text.trim();
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let mut numer: i128 = 0;
    for c in int_part.chars().chain(frac_part.chars()) {
        numer = numer.checked_mul(10)?.checked_add(i128::from(c as u8 - b'0'))?;
    }
    let scale = exponent - frac_part.len() as i32;
    let mut denom: i128 = 1;
    if scale >= 0 {
        numer = numer.checked_mul(10i128.checked_pow(scale as u32)?)?;
    } else {
        denom = 10i128.checked_pow((-scale) as u32)?;
    }
    let g = numer.gcd(&denom).max(1);
    let (numer, denom) = (numer / g, denom / g);
    let numer = i64::try_from(if negative { -numer } else { numer }).ok()?;
    let denom = i64::try_from(denom).ok()?;
    Some(Ratio::new(numer, denom))
}

/// `omega0 * tau` reduced modulo 2π.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CarrierPhase<T> {
    /// Exactly 0 (`odd == false`) or exactly π (`odd == true`).
    Exact { odd: bool },
    /// Floating-point reduction of a raw delay; accurate only to about
    /// `omega0 * tau * f64::EPSILON` rad.
    Approx(T),
}

impl<T: Real> CarrierPhase<T> {
    /// The phase as a number in `[0, 2π)`.
    pub fn value(&self) -> T {
        match *self {
            CarrierPhase::Exact { odd } => {
                if odd {
                    T::PI()
                } else {
                    T::zero()
                }
            }
            CarrierPhase::Approx(p) => p,
        }
    }

    /// `e^{i omega0 tau}`, exactly ±1 for the exact variant.
    pub fn factor(&self) -> Cx<T> {
        match *self {
            CarrierPhase::Exact { odd } => cx(if odd { -T::one() } else { T::one() }, T::zero()),
            CarrierPhase::Approx(p) => cx(p.cos(), p.sin()),
        }
    }
}

/// Reduces `omega0 * tau` modulo 2π.
///
/// Scaled delays are reduced exactly: the result is π times the parity of
/// `omega0 * S + delta`. Raw delays fall back to floating-point reduction.
pub fn phase_of_omega0_tau<T: Real>(delay: &DelaySpec<T>, omega0: T) -> Result<CarrierPhase<T>, ModelError> {
    match delay {
        DelaySpec::Raw { tau } => {
            let two_pi = T::PI() + T::PI();
            let mut p = (omega0 * *tau) % two_pi;
            if p < T::zero() {
                p += two_pi;
            }
            if p >= two_pi {
                p = T::zero();
            }
            Ok(CarrierPhase::Approx(p))
        }
        DelaySpec::Scaled { scale, delta } => {
            let w0 = ratio_from_decimal(&format!("{}", omega0.as_f64()))
                .ok_or_else(|| ModelError::MalformedDelaySpec(format!("omega0 = {omega0} has no exact decimal form")))?;
            let w0 = Ratio::new(i128::from(*w0.numer()), i128::from(*w0.denom()));
            let s = Ratio::new(i128::from(*scale.numer()), i128::from(*scale.denom()));
            let cycles = w0
                .numer()
                .checked_mul(*s.numer())
                .map(|n| Ratio::new(n, w0.denom() * s.denom()))
                .ok_or_else(|| ModelError::MalformedDelaySpec("omega0 * S overflows".into()))?;
            if !cycles.is_integer() {
                return Err(ModelError::MalformedDelaySpec(format!(
                    "omega0 * S = {cycles} is not a whole number"
                )));
            }
            let n = cycles.to_integer() + i128::from(*delta);
            Ok(CarrierPhase::Exact { odd: n.is_odd() })
        }
    }
}

/// Interference of the returning loop field at the feedback mirror.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Interference<T> {
    /// `omega0 tau ≡ π (mod 2π)`.
    Constructive,
    /// `omega0 tau ≡ 0 (mod 2π)`.
    Destructive,
    /// Any other phase, in `[0, 2π)`.
    Generic(T),
}

impl<T: Real> Interference<T> {
    pub fn matched(&self) -> Option<Matched> {
        match self {
            Interference::Constructive => Some(Matched::Constructive),
            Interference::Destructive => Some(Matched::Destructive),
            Interference::Generic(_) => None,
        }
    }
}

impl<T: Real> fmt::Display for Interference<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Interference::Constructive => f.write_str("constructive"),
            Interference::Destructive => f.write_str("destructive"),
            Interference::Generic(p) => write!(f, "generic({p})"),
        }
    }
}

/// One of the two interference conditions for which closed-form stability
/// results exist.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Matched {
    Constructive,
    Destructive,
}

impl Matched {
    /// Sign of the delayed coupling in `s = alpha + sign * gamma1 * e^{-s tau}`:
    /// `+1` for destructive, `-1` for constructive interference.
    pub fn feedback_sign<T: Real>(self) -> T {
        match self {
            Matched::Destructive => T::one(),
            Matched::Constructive => -T::one(),
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Matched::Destructive => Matched::Constructive,
            Matched::Constructive => Matched::Destructive,
        }
    }
}

impl fmt::Display for Matched {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Matched::Constructive => f.write_str("constructive"),
            Matched::Destructive => f.write_str("destructive"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    ShortDelay,
    LongDelay,
    Boundary,
}

/// Quadrature phase selection.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum ThetaMode<T> {
    /// Locked to the pump phase: `2 theta = beta + pi`.
    #[default]
    Locked,
    Fixed(T),
    /// Per-frequency analytic minimum.
    Optimal,
}

impl<T: Real> ThetaMode<T> {
    /// Fixed quadrature angle, or `None` for [`ThetaMode::Optimal`].
    pub fn angle(&self, beta: T) -> Option<T> {
        match *self {
            ThetaMode::Locked => Some((beta + T::PI()) / T::lit(2.0)),
            ThetaMode::Fixed(t) => Some(t),
            ThetaMode::Optimal => None,
        }
    }
}

/// Physical scenario. Every field is in ns⁻¹, ns or rad.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams<T> {
    pub omega0: T,
    /// Pump magnitude `|epsilon|`.
    pub eps_abs: T,
    /// Pump phase `beta`.
    pub eps_phase: T,
    /// Feedback-port coupling.
    pub gamma1: T,
    /// Loss through mirror M2.
    pub gamma2: T,
    /// Feedback imperfection loss.
    pub gamma3: T,
    /// Return coupling; `None` means `gamma1`.
    pub gamma_f: Option<T>,
    /// Loop phase shift; `None` means π.
    pub phi: Option<T>,
    pub delay: DelaySpec<T>,
    pub theta: ThetaMode<T>,
}

impl<T: Real> ModelParams<T> {
    pub fn new(gamma1: T, gamma2: T, gamma3: T, eps_abs: T, delay: DelaySpec<T>) -> Self {
        ModelParams {
            omega0: T::lit(DEFAULT_OMEGA0),
            eps_abs,
            eps_phase: T::zero(),
            gamma1,
            gamma2,
            gamma3,
            gamma_f: None,
            phi: None,
            delay,
            theta: ThetaMode::Locked,
        }
    }

    pub fn with_beta(mut self, beta: T) -> Self {
        self.eps_phase = beta;
        self
    }

    pub fn with_loop(mut self, gamma_f: T, phi: T) -> Self {
        self.gamma_f = Some(gamma_f);
        self.phi = Some(phi);
        self
    }

    pub fn with_theta(mut self, theta: ThetaMode<T>) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_omega0(mut self, omega0: T) -> Self {
        self.omega0 = omega0;
        self
    }

    pub fn validate(&self) -> Result<Model<T>, ModelError> {
        validate(self.clone())
    }
}

/// Composite quantities derived from [`ModelParams`].
#[derive(Clone, Debug, PartialEq)]
pub struct DerivedParams<T> {
    /// Total decay `(gamma1 + gamma_f + gamma2 + gamma3) / 2`.
    pub g: T,
    /// `(|eps| - (gamma2 + gamma3)/2) / gamma1`; absent when `gamma1 = 0`.
    pub alpha_tilde: Option<T>,
    pub gamma1_tau: T,
    pub interference: Interference<T>,
    pub regime: Regime,
    pub tau: T,
}

/// A validated scenario with its derived quantities and cached phase factors.
#[derive(Clone, Debug, PartialEq)]
pub struct Model<T> {
    params: ModelParams<T>,
    derived: DerivedParams<T>,
    carrier_phase: CarrierPhase<T>,
    carrier: Cx<T>,
    loop_rotation: Cx<T>,
    gamma_f: T,
    phi: T,
}

/// Checks a scenario and computes its [`DerivedParams`].
pub fn validate<T: Real>(params: ModelParams<T>) -> Result<Model<T>, ModelError> {
    let finite: [(&'static str, T); 5] = [
        ("omega0", params.omega0),
        ("eps_abs", params.eps_abs),
        ("eps_phase", params.eps_phase),
        ("phi", params.phi.unwrap_or_else(T::PI)),
        ("theta", match params.theta {
            ThetaMode::Fixed(t) => t,
            _ => T::zero(),
        }),
    ];
    for (name, value) in finite {
        if !value.is_finite() {
            return Err(ModelError::NonFinite(name));
        }
    }
    let rates: [(&'static str, T); 4] = [
        ("gamma1", params.gamma1),
        ("gamma2", params.gamma2),
        ("gamma3", params.gamma3),
        ("gamma_f", params.gamma_f.unwrap_or(params.gamma1)),
    ];
    for (name, value) in rates {
        if !value.is_finite() {
            return Err(ModelError::NonFinite(name));
        }
        if value < T::zero() {
            return Err(ModelError::NegativeRate { name, value: value.as_f64() });
        }
    }
    if params.eps_abs < T::zero() {
        return Err(ModelError::NegativeRate { name: "eps_abs", value: params.eps_abs.as_f64() });
    }
    if params.omega0 <= T::zero() {
        return Err(ModelError::ZeroOmega0);
    }
    match &params.delay {
        DelaySpec::Raw { tau } => {
            if !tau.is_finite() {
                return Err(ModelError::NonFinite("tau"));
            }
            if *tau < T::zero() {
                return Err(ModelError::MalformedDelaySpec(format!("tau must be non-negative, got {tau}")));
            }
        }
        DelaySpec::Scaled { scale, delta } => {
            if *delta > 1 || scale.is_negative() || scale.denom().is_zero() {
                return Err(ModelError::MalformedDelaySpec(format!("scale {scale}, delta {delta}")));
            }
            if params.gamma1 == T::zero() {
                return Err(ModelError::Gamma1ZeroWithScaledDelay);
            }
        }
    }

    let carrier_phase = phase_of_omega0_tau(&params.delay, params.omega0)?;
    let tau = params.delay.tau(params.omega0);
    let gamma_f = params.gamma_f.unwrap_or(params.gamma1);
    let phi = params.phi.unwrap_or_else(T::PI);
    let half = T::lit(0.5);

    let interference = match carrier_phase {
        CarrierPhase::Exact { odd: true } => Interference::Constructive,
        CarrierPhase::Exact { odd: false } => Interference::Destructive,
        CarrierPhase::Approx(p) if p == T::zero() => Interference::Destructive,
        CarrierPhase::Approx(p) => Interference::Generic(p),
    };
    let gamma1_tau = params.gamma1 * tau;
    let regime = if gamma1_tau < T::one() {
        Regime::ShortDelay
    } else if gamma1_tau > T::one() {
        Regime::LongDelay
    } else {
        Regime::Boundary
    };
    let alpha_tilde = (params.gamma1 > T::zero())
        .then(|| (params.eps_abs - (params.gamma2 + params.gamma3) * half) / params.gamma1);
    let derived = DerivedParams {
        g: (params.gamma1 + gamma_f + params.gamma2 + params.gamma3) * half,
        alpha_tilde,
        gamma1_tau,
        interference,
        regime,
        tau,
    };

    Ok(Model {
        carrier: carrier_phase.factor(),
        loop_rotation: exact_rotation(phi),
        carrier_phase,
        derived,
        gamma_f,
        phi,
        params,
    })
}

/// `e^{i phi}`, exactly ±1 when `phi` is exactly 0 or π.
fn exact_rotation<T: Real>(phi: T) -> Cx<T> {
    if phi == T::PI() {
        cx(-T::one(), T::zero())
    } else if phi == T::zero() {
        cx(T::one(), T::zero())
    } else {
        cx(phi.cos(), phi.sin())
    }
}

impl<T: Real> Model<T> {
    pub fn params(&self) -> &ModelParams<T> {
        &self.params
    }

    pub fn derived(&self) -> &DerivedParams<T> {
        &self.derived
    }

    pub fn tau(&self) -> T {
        self.derived.tau
    }

    pub fn interference(&self) -> Interference<T> {
        self.derived.interference
    }

    pub fn carrier_phase(&self) -> CarrierPhase<T> {
        self.carrier_phase
    }

    /// `e^{i omega0 tau}`.
    pub fn carrier(&self) -> Cx<T> {
        self.carrier
    }

    /// `e^{i phi}`.
    pub fn loop_rotation(&self) -> Cx<T> {
        self.loop_rotation
    }

    pub fn gamma1(&self) -> T {
        self.params.gamma1
    }

    pub fn gamma2(&self) -> T {
        self.params.gamma2
    }

    pub fn gamma3(&self) -> T {
        self.params.gamma3
    }

    pub fn gamma_f(&self) -> T {
        self.gamma_f
    }

    pub fn phi(&self) -> T {
        self.phi
    }

    pub fn eps_abs(&self) -> T {
        self.params.eps_abs
    }

    /// Complex pump `|eps| e^{i beta}`.
    pub fn epsilon(&self) -> Cx<T> {
        let beta = self.params.eps_phase;
        if beta == T::zero() {
            cx(self.params.eps_abs, T::zero())
        } else {
            Cx::from_polar(self.params.eps_abs, beta)
        }
    }

    /// Decay rate into the non-feedback reservoirs, `(gamma2 + gamma3) / 2`.
    pub fn open_loss(&self) -> T {
        (self.params.gamma2 + self.params.gamma3) * T::lit(0.5)
    }

    /// `phi = pi` and `gamma_f = gamma1`: the perfect-mirror Pyragas loop.
    pub fn is_default_loop(&self) -> bool {
        self.phi == T::PI() && self.gamma_f == self.params.gamma1
    }

    /// Coefficient `q` of the delayed term in `dc/dt = ... - q c(t - tau)`:
    /// `sqrt(gamma1 gamma_f) e^{i phi} e^{i omega0 tau}`.
    pub fn delayed_coupling(&self) -> Cx<T> {
        self.loop_rotation * self.carrier * (self.params.gamma1 * self.gamma_f).sqrt()
    }

    /// Real sign `b` with `-q = b sqrt(gamma1 gamma_f)`, when the loop
    /// rotation and carrier phase combine to exactly ±1.
    pub fn loop_sign(&self) -> Option<T> {
        let z = self.loop_rotation * self.carrier;
        if z.im == T::zero() && z.re.abs() == T::one() {
            Some(-z.re)
        } else {
            None
        }
    }

    /// Quadrature angle of the configured [`ThetaMode`].
    pub fn theta(&self) -> Option<T> {
        self.params.theta.angle(self.params.eps_phase)
    }

    /// The same scenario with the feedback loop replaced by a Markovian
    /// reservoir of rate `gamma1` (`gamma_f = 0`).
    pub fn markovian(&self) -> Model<T> {
        let mut params = self.params.clone();
        params.gamma_f = Some(T::zero());
        params.phi = Some(self.phi);
        validate(params).expect("markovian variant of a valid model is valid")
    }
}

impl<T: Real> fmt::Display for DerivedParams<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "G = {}, gamma1*tau = {}, interference = {}", self.g, self.gamma1_tau, self.interference)?;
        match self.alpha_tilde {
            Some(a) => write!(f, ", alpha_tilde = {a}"),
            None => f.write_str(", alpha_tilde = n/a"),
        }
    }
}
