//! Scattering coefficients, output correlations and squeezing spectra.
//!
//! The quadrature variance is evaluated as the sum of squares
//! `P_i(omega, theta) = sum_j |e^{-i theta} S⁻_ij(omega) + e^{i theta} conj(S⁺_ij(-omega))|²`,
//! which equals `2 Re[e^{-2i theta} M_i(omega)] + N_i(omega) + N_i(-omega) - 1`
//! whenever the Bogoliubov identity holds. Near threshold `N` and `M` grow like
//! `1/Delta²` and the closed form cancels catastrophically (about 10⁻⁴ absolute
//! error at 10⁻⁶ below threshold); the sum of squares only loses accuracy
//! within each amplitude and is non-negative by construction. The closed form is kept as
//! [`squeezing_spectrum_closed_form`] for cross-checks.

use std::fmt;

use rayon::prelude::*;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::model::{Model, ModelParams, ThetaMode};
use crate::response::{eval_ports, eval_response_default, response, FreqResponse, PortFunctions, ResponseError};
use crate::scalar::{linspace, Cx, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error(transparent)]
    Response(#[from] ResponseError),
    #[error("frequency grid is empty")]
    EmptyGrid,
    #[error("frequency grid must be strictly increasing (index {0})")]
    GridNotIncreasing(usize),
}

/// Output channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Port {
    /// `b_out^1`, the free output of the feedback channel (waveguide).
    Feedback,
    /// `b_out^2`, the output through mirror M2.
    Mirror,
}

impl Port {
    pub const BOTH: [Port; 2] = [Port::Feedback, Port::Mirror];

    /// Zero-based index, matching the reservoir index `j - 1`.
    pub fn index(self) -> usize {
        match self {
            Port::Feedback => 0,
            Port::Mirror => 1,
        }
    }

    pub fn from_number(n: u8) -> Option<Port> {
        match n {
            1 => Some(Port::Feedback),
            2 => Some(Port::Mirror),
            _ => None,
        }
    }
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index() + 1)
    }
}

/// Scattering data of one output port at one detuning.
#[derive(Clone, Debug, PartialEq)]
pub struct ScatteringRow<T> {
    pub port: Port,
    pub omega: T,
    /// `S⁻_ij(omega)`.
    pub s_minus: [Cx<T>; 3],
    /// `S⁺_ij(omega)`.
    pub s_plus: [Cx<T>; 3],
    /// `S⁺_ij(-omega)`, needed for `M_i`.
    pub s_plus_mirrored: [Cx<T>; 3],
    /// `N_i(omega) = sum_j |S⁻_ij(omega)|²`.
    pub n: T,
    /// `M_i(omega) = sum_j S⁻_ij(omega) S⁺_ij(-omega)`.
    pub m: Cx<T>,
    /// `|sum_j |S⁻_ij|² - |S⁺_ij|² - 1|`.
    pub bogoliubov_residual: T,
}

/// `S⁻_ij = Y_i A⁻_j + X_i delta_ij`, `S⁺_ij = Y_i A⁺_j`.
fn port_coefficients<T: Real>(
    resp: &FreqResponse<T>,
    ports: &PortFunctions<T>,
    port: Port,
) -> ([Cx<T>; 3], [Cx<T>; 3]) {
    let i = port.index();
    let y = ports.y[i];
    let mut s_minus = resp.a_minus.map(|a| y * a);
    s_minus[i] += ports.x[i];
    (s_minus, resp.a_plus.map(|a| y * a))
}

fn bogoliubov_residual<T: Real>(s_minus: &[Cx<T>; 3], s_plus: &[Cx<T>; 3]) -> T {
    let sum: T = s_minus.iter().zip(s_plus).map(|(a, b)| a.norm_sqr() - b.norm_sqr()).sum();
    (sum - T::one()).abs()
}

/// Response and port functions at `omega` and `-omega`.
struct Mirrored<T> {
    pos: (FreqResponse<T>, PortFunctions<T>),
    neg: (FreqResponse<T>, PortFunctions<T>),
}

impl<T: Real> Mirrored<T> {
    fn eval(omega: T, model: &Model<T>, flip_anomalous: bool) -> Result<Self, ResponseError> {
        let resp = |w: T| {
            if flip_anomalous && model.is_default_loop() {
                eval_response_default(w, model, true)
            } else {
                response(w, model)
            }
        };
        Ok(Mirrored {
            pos: (resp(omega)?, eval_ports(omega, model)),
            neg: (resp(-omega)?, eval_ports(-omega, model)),
        })
    }

    fn row(&self, port: Port) -> ScatteringRow<T> {
        let (s_minus, s_plus) = port_coefficients(&self.pos.0, &self.pos.1, port);
        let (_, s_plus_mirrored) = port_coefficients(&self.neg.0, &self.neg.1, port);
        let n = s_minus.iter().map(|s| s.norm_sqr()).sum();
        let m = s_minus.iter().zip(&s_plus_mirrored).map(|(a, b)| a * b).sum();
        ScatteringRow {
            port,
            omega: self.pos.0.omega,
            bogoliubov_residual: bogoliubov_residual(&s_minus, &s_plus),
            s_minus,
            s_plus,
            s_plus_mirrored,
            n,
            m,
        }
    }

    /// `N_i(-omega)`.
    fn n_mirrored(&self, port: Port) -> T {
        let (s_minus, _) = port_coefficients(&self.neg.0, &self.neg.1, port);
        s_minus.iter().map(|s| s.norm_sqr()).sum()
    }
}

pub fn scattering_row<T: Real>(port: Port, omega: T, model: &Model<T>) -> Result<ScatteringRow<T>, ResponseError> {
    Ok(Mirrored::eval(omega, model, false)?.row(port))
}

/// Scattering row with `s*(-omega)` flipped inside `A⁺_1`; a deliberate
/// defect used to check that the verification suite catches it.
pub(crate) fn scattering_row_mutated<T: Real>(
    port: Port,
    omega: T,
    model: &Model<T>,
) -> Result<ScatteringRow<T>, ResponseError> {
    Ok(Mirrored::eval(omega, model, true)?.row(port))
}

impl<T: Real> ScatteringRow<T> {
    /// Quadrature variance at angle `theta`.
    pub fn quadrature_variance(&self, theta: T) -> T {
        let (sin, cos) = theta.sin_cos();
        let rot_neg = Cx::new(cos, -sin);
        let rot_pos = Cx::new(cos, sin);
        self.s_minus
            .iter()
            .zip(&self.s_plus_mirrored)
            .map(|(a, b)| (rot_neg * a + rot_pos * b.conj()).norm_sqr())
            .sum()
    }

    /// Angle in `[0, pi)` minimising the quadrature variance, and the minimum.
    pub fn optimal_theta(&self) -> (T, T) {
        if self.m.norm() == T::zero() {
            return (T::zero(), self.quadrature_variance(T::zero()));
        }
        let mut theta = (self.m.arg() + T::PI()) / T::lit(2.0);
        if theta >= T::PI() {
            theta -= T::PI();
        }
        if theta < T::zero() {
            theta += T::PI();
        }
        (theta, self.quadrature_variance(theta))
    }
}

/// `P_i(omega, theta)`.
pub fn squeezing_spectrum<T: Real>(port: Port, omega: T, theta: T, model: &Model<T>) -> Result<T, ResponseError> {
    Ok(scattering_row(port, omega, model)?.quadrature_variance(theta))
}

/// `2 Re[e^{-2i theta} M_i(omega)] + N_i(omega) + N_i(-omega) - 1`, evaluated literally.
pub fn squeezing_spectrum_closed_form<T: Real>(
    port: Port,
    omega: T,
    theta: T,
    model: &Model<T>,
) -> Result<T, ResponseError> {
    let both = Mirrored::eval(omega, model, false)?;
    let row = both.row(port);
    let two_theta = theta + theta;
    let rot = Cx::new(two_theta.cos(), -two_theta.sin());
    Ok(T::lit(2.0) * (rot * row.m).re + row.n + both.n_mirrored(port) - T::one())
}

/// Optimal quadrature angle `theta*` in `[0, pi)` with `2 theta* = arg M_i + pi`,
/// and `P_min = N_i(omega) + N_i(-omega) - 1 - 2|M_i(omega)|`.
pub fn optimal_theta<T: Real>(port: Port, omega: T, model: &Model<T>) -> Result<(T, T), ResponseError> {
    Ok(scattering_row(port, omega, model)?.optimal_theta())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowStatus {
    Ok,
    /// `det M` vanished at `omega` or `-omega`; the row is a gap.
    Singular,
}

impl fmt::Display for RowStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowStatus::Ok => f.write_str("ok"),
            RowStatus::Singular => f.write_str("singular"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumValues<T> {
    /// `P_1`, `P_2`.
    pub p: [T; 2],
    pub n: [T; 2],
    pub m: [Cx<T>; 2],
    /// Quadrature angle used for each port.
    pub theta: [T; 2],
    pub bogoliubov_residual: [T; 2],
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumRow<T> {
    pub omega: T,
    pub status: RowStatus,
    pub values: Option<SpectrumValues<T>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumTable<T> {
    pub fingerprint: String,
    pub theta: ThetaMode<T>,
    pub rows: Vec<SpectrumRow<T>>,
}

impl<T: Real> SpectrumTable<T> {
    pub fn ok_rows(&self) -> impl Iterator<Item = (T, &SpectrumValues<T>)> {
        self.rows.iter().filter_map(|r| r.values.as_ref().map(|v| (r.omega, v)))
    }

    pub fn singular_count(&self) -> usize {
        self.rows.iter().filter(|r| r.status == RowStatus::Singular).count()
    }
}

/// Short stable hash of a parameter set.
pub fn fingerprint<T: Real>(params: &ModelParams<T>) -> String {
    let digest = Sha256::digest(format!("{params:?}").as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Grid of `points` detunings symmetric about zero with half-width
/// `6 max(G, pi / tau)`.
pub fn default_grid<T: Real>(model: &Model<T>, points: usize) -> Vec<T> {
    let g = model.derived().g;
    let tau = model.tau();
    let scale = if tau > T::zero() { g.max(T::PI() / tau) } else { g };
    let half = T::lit(6.0) * scale.max(T::epsilon());
    linspace(-half, half, points)
}

pub const DEFAULT_GRID_POINTS: usize = 2001;

fn evaluate_row<T: Real>(omega: T, model: &Model<T>, theta: ThetaMode<T>) -> SpectrumRow<T> {
    let Ok(both) = Mirrored::eval(omega, model, false) else {
        return SpectrumRow { omega, status: RowStatus::Singular, values: None };
    };
    let fixed = theta.angle(model.params().eps_phase);
    let rows = Port::BOTH.map(|p| both.row(p));
    let eval = |row: &ScatteringRow<T>| match fixed {
        Some(th) => (th, row.quadrature_variance(th)),
        None => row.optimal_theta(),
    };
    let (e1, e2) = (eval(&rows[0]), eval(&rows[1]));
    SpectrumRow {
        omega,
        status: RowStatus::Ok,
        values: Some(SpectrumValues {
            p: [e1.1, e2.1],
            n: [rows[0].n, rows[1].n],
            m: [rows[0].m, rows[1].m],
            theta: [e1.0, e2.0],
            bogoliubov_residual: [rows[0].bogoliubov_residual, rows[1].bogoliubov_residual],
        }),
    }
}

/// Evaluates both output spectra over a strictly increasing grid.
///
/// Rows are computed in parallel; their order always follows the grid.
/// Singular points become gaps with [`RowStatus::Singular`].
pub fn spectrum_table<T: Real>(
    model: &Model<T>,
    grid: &[T],
    theta: ThetaMode<T>,
) -> Result<SpectrumTable<T>, SpectrumError> {
    if grid.is_empty() {
        return Err(SpectrumError::EmptyGrid);
    }
    if let Some(k) = grid.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(SpectrumError::GridNotIncreasing(k + 1));
    }
    let rows = grid.par_iter().map(|&w| evaluate_row(w, model, theta)).collect();
    Ok(SpectrumTable { fingerprint: fingerprint(model.params()), theta, rows })
}
