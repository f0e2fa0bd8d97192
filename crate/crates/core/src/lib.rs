//! Degenerate parametric oscillator with time-delayed coherent self-feedback.
//!
//! The crate computes output squeezing spectra of a two-sided cavity whose
//! first port is fed back onto itself after a delay `tau`, classifies the
//! stability of the delayed linear dynamics, and integrates the mean-field
//! equations of motion in the time domain as an independent check.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix the scalar to `f64`, which the documented tolerances assume.
//!
//! ```
//! use dpo_feedback::{DelaySpec, ModelParams, Port, squeezing_spectrum};
//!
//! let model = ModelParams::new(2.0, 2.0, 0.0, 0.999_999, DelaySpec::scaled(0.5, 0).unwrap())
//!     .validate()
//!     .unwrap();
//! let theta = model.theta().unwrap();
//! let p2 = squeezing_spectrum(Port::Mirror, 0.0, theta, &model).unwrap();
//! assert!(p2 < 1e-4);
//! ```

// `!(x > 0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod dde;
pub mod lambert;
pub mod model;
pub mod report;
pub mod response;
pub mod scalar;
pub mod spectrum;
pub mod stability;
pub mod verify;

pub use config::{ConfigError, RunManifest, Scenario, ScenarioFile};
pub use dde::{classify, integrate, pyragas_invariance_check, Classification, DdeError};
pub use lambert::lambert_w0;
pub use model::{DelaySpec, Interference, Matched, ModelError, ModelParams, ThetaMode};
pub use response::{eval_ports, eval_response, eval_s, response, ResponseError};
pub use scalar::{Cx, Real};
pub use spectrum::{optimal_theta, scattering_row, spectrum_table, squeezing_spectrum, Port, SpectrumError};
pub use stability::{
    assess, char_root_oracle, char_roots_lambert, routh_hurwitz_delay_independent, s1w_dimensionless,
    stability_map, StabilityError,
};

pub type Model = model::Model<f64>;
pub type Model32 = model::Model<f32>;
pub type Params = model::ModelParams<f64>;
pub type SpectrumTable = spectrum::SpectrumTable<f64>;
pub type StabilityVerdict = stability::StabilityVerdict<f64>;
pub type StabilityMap = stability::StabilityMap<f64>;
pub type DdeTrace = dde::DdeTrace<f64>;

/// Any error raised by the library.
#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Response(#[from] ResponseError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Stability(#[from] StabilityError),
    #[error(transparent)]
    Dde(#[from] DdeError),
    #[error(transparent)]
    Config(#[from] ConfigError),
}
