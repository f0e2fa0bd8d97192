//! Scenario files, run manifests and the checked-in presets.
//!
//! Scenarios are TOML with a `schema_version` key and optional sections
//! `[model]`, `[pump]`, `[delay]`, `[theta]`, `[grid]`, `[map]` and `[dde]`.
//! Unknown keys are rejected. See `docs/scenario-schema.md` for the layout.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ratio_from_decimal, DelaySpec, Matched, ModelError, ModelParams, ThetaMode, DEFAULT_OMEGA0};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("parse error at line {line}, column {col}: {message}")]
    Parse { line: usize, col: usize, message: String },
    #[error("unknown key `{key}` at line {line}, column {col}")]
    UnknownKey { key: String, line: usize, col: usize },
    #[error("schema_version {found} is not supported (expected {expected}); {hint}")]
    VersionMismatch { found: i64, expected: u32, hint: String },
    #[error("both a raw `tau` and a scaled delay (`scale_s`/`delta`) are given")]
    ConflictingDelaySpec,
    #[error("pump needs exactly one of `epsilon_abs`, `above_loss`, `below_threshold`")]
    ConflictingPump,
    #[error("missing required setting: {0}")]
    Missing(&'static str),
    #[error("invalid setting: {0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("I/O error on `{path}`: {message}")]
    Io { path: String, message: String },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub gamma1: f64,
    pub gamma2: f64,
    #[serde(default)]
    pub gamma3: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_f: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

/// Pump magnitude, given directly or relative to the open-port loss
/// `(gamma2 + gamma3) / 2`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_abs: Option<f64>,
    /// `|eps| = (gamma2 + gamma3)/2 + above_loss`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub above_loss: Option<f64>,
    /// `|eps| = (1 - eta) (gamma2 + gamma3)/2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub below_threshold: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelaySection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<u8>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThetaKind {
    Locked,
    Fixed,
    Optimal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaSection {
    pub mode: ThetaKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_points: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSection {
    pub interference: Matched,
    pub gamma1_tau_min: f64,
    pub gamma1_tau_max: f64,
    pub gamma1_tau_points: usize,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub alpha_points: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DdeSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v0_re: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v0_im: Option<f64>,
}

/// On-disk scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pump: Option<PumpSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay: Option<DelaySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<ThetaSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<MapSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dde: Option<DdeSection>,
}

impl Default for ScenarioFile {
    fn default() -> Self {
        ScenarioFile {
            schema_version: SCHEMA_VERSION,
            name: None,
            description: None,
            model: None,
            pump: None,
            delay: None,
            theta: None,
            grid: None,
            map: None,
            dde: None,
        }
    }
}

/// Command-line overrides; every `Some` replaces the file value.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub gamma1: Option<f64>,
    pub gamma2: Option<f64>,
    pub gamma3: Option<f64>,
    pub gamma_f: Option<f64>,
    pub phi: Option<f64>,
    pub omega0: Option<f64>,
    pub beta: Option<f64>,
    pub epsilon_abs: Option<f64>,
    pub eta: Option<f64>,
    pub tau: Option<f64>,
    pub scale_s: Option<f64>,
    pub delta: Option<u8>,
    pub theta: Option<ThetaSection>,
    pub omega_min: Option<f64>,
    pub omega_max: Option<f64>,
    pub omega_points: Option<usize>,
    pub interference: Option<Matched>,
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

fn map_toml_error(text: &str, err: &toml::de::Error) -> ConfigError {
    let (line, col) = err.span().map_or((0, 0), |s| line_col(text, s.start));
    let message = err.message().to_string();
    if let Some(rest) = message.strip_prefix("unknown field `") {
        if let Some(key) = rest.split('`').next() {
            return ConfigError::UnknownKey { key: key.to_string(), line, col };
        }
    }
    ConfigError::Parse { line, col, message }
}

/// Parses scenario text, checking `schema_version` before anything else.
pub fn parse_scenario(text: &str) -> Result<ScenarioFile, ConfigError> {
    let table: toml::Table = text.parse().map_err(|e| map_toml_error(text, &e))?;
    match table.get("schema_version") {
        None => return Err(ConfigError::Missing("schema_version")),
        Some(toml::Value::Integer(v)) if *v == i64::from(SCHEMA_VERSION) => {}
        Some(toml::Value::Integer(v)) => {
            return Err(ConfigError::VersionMismatch {
                found: *v,
                expected: SCHEMA_VERSION,
                hint: version_hint(*v),
            })
        }
        Some(_) => return Err(ConfigError::Invalid("schema_version must be an integer".into())),
    }
    toml::from_str(text).map_err(|e| map_toml_error(text, &e))
}

fn version_hint(found: i64) -> String {
    if found > i64::from(SCHEMA_VERSION) {
        "the file was written by a newer release; upgrade dpo-sim or rewrite the file for version 1".into()
    } else {
        "set schema_version = 1 and check the keys against docs/scenario-schema.md".into()
    }
}

pub fn to_toml<S: Serialize>(value: &S) -> String {
    toml::to_string(value).expect("scenario types serialize to TOML")
}

fn io_err(path: &Path, e: &std::io::Error) -> ConfigError {
    ConfigError::Io { path: path.display().to_string(), message: e.to_string() }
}

pub fn load_scenario_file(path: &Path) -> Result<ScenarioFile, ConfigError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, &e))?;
    parse_scenario(&text)
}

pub fn save_scenario(file: &ScenarioFile, path: &Path) -> Result<(), ConfigError> {
    write_text(path, &to_toml(file))
}

fn write_text(path: &Path, text: &str) -> Result<(), ConfigError> {
    if path.as_os_str().is_empty() {
        return Err(ConfigError::Io { path: String::new(), message: "empty path".into() });
    }
    fs::write(path, text).map_err(|e| io_err(path, &e))
}

/// Resolved scenario: the merged file plus the validated model parameters
/// when the file describes a model.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub file: ScenarioFile,
    pub params: Option<ModelParams<f64>>,
}

impl ScenarioFile {
    /// Applies command-line overrides in place.
    pub fn apply(&mut self, o: &Overrides) -> Result<(), ConfigError> {
        if o.tau.is_some() && (o.scale_s.is_some() || o.delta.is_some()) {
            return Err(ConfigError::ConflictingDelaySpec);
        }
        let model_touched = [o.gamma1, o.gamma2, o.gamma3, o.gamma_f, o.phi, o.omega0, o.beta]
            .iter()
            .any(Option::is_some);
        if model_touched && self.model.is_none() {
            self.model = Some(ModelSection {
                gamma1: o.gamma1.ok_or(ConfigError::Missing("gamma1"))?,
                gamma2: o.gamma2.ok_or(ConfigError::Missing("gamma2"))?,
                gamma3: 0.0,
                gamma_f: None,
                phi: None,
                omega0: None,
                beta: None,
            });
        }
        if let Some(m) = self.model.as_mut() {
            set(&mut m.gamma1, o.gamma1);
            set(&mut m.gamma2, o.gamma2);
            set(&mut m.gamma3, o.gamma3);
            set_opt(&mut m.gamma_f, o.gamma_f);
            set_opt(&mut m.phi, o.phi);
            set_opt(&mut m.omega0, o.omega0);
            set_opt(&mut m.beta, o.beta);
        }
        match (o.epsilon_abs, o.eta) {
            (Some(_), Some(_)) => return Err(ConfigError::ConflictingPump),
            (Some(e), None) => self.pump = Some(PumpSection { epsilon_abs: Some(e), ..Default::default() }),
            (None, Some(eta)) => self.pump = Some(PumpSection { below_threshold: Some(eta), ..Default::default() }),
            (None, None) => {}
        }
        if let Some(tau) = o.tau {
            self.delay = Some(DelaySection { tau: Some(tau), ..Default::default() });
        } else if o.scale_s.is_some() || o.delta.is_some() {
            let d = self.delay.get_or_insert_with(Default::default);
            if o.scale_s.is_some() {
                d.tau = None;
            }
            set_opt(&mut d.scale_s, o.scale_s);
            set_opt(&mut d.delta, o.delta);
        }
        if let Some(t) = &o.theta {
            self.theta = Some(t.clone());
        }
        if o.omega_min.is_some() || o.omega_max.is_some() || o.omega_points.is_some() {
            let g = self.grid.get_or_insert_with(Default::default);
            set_opt(&mut g.omega_min, o.omega_min);
            set_opt(&mut g.omega_max, o.omega_max);
            set_opt(&mut g.omega_points, o.omega_points);
        }
        if let Some(i) = o.interference {
            match self.map.as_mut() {
                Some(m) => m.interference = i,
                None => return Err(ConfigError::Missing("[map] section for --interference")),
            }
        }
        if o.t_end.is_some() || o.dt.is_some() {
            let d = self.dde.get_or_insert_with(Default::default);
            set_opt(&mut d.t_end, o.t_end);
            set_opt(&mut d.dt, o.dt);
        }
        Ok(())
    }

    pub fn delay_spec(&self) -> Result<Option<DelaySpec<f64>>, ConfigError> {
        let Some(d) = &self.delay else { return Ok(None) };
        match (d.tau, d.scale_s, d.delta) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => Err(ConfigError::ConflictingDelaySpec),
            (Some(tau), None, None) => Ok(Some(DelaySpec::Raw { tau })),
            (None, Some(s), delta) => {
                let ratio = ratio_from_decimal(&format!("{s}"))
                    .ok_or_else(|| ConfigError::Invalid(format!("scale_s = {s} is not a finite decimal")))?;
                Ok(Some(DelaySpec::scaled_exact(ratio, delta.unwrap_or(0))?))
            }
            (None, None, Some(_)) => Err(ConfigError::Missing("scale_s (delta given without a scale)")),
            (None, None, None) => Err(ConfigError::Missing("tau or scale_s")),
        }
    }

    pub fn theta_mode(&self) -> Result<ThetaMode<f64>, ConfigError> {
        match &self.theta {
            None => Ok(ThetaMode::Locked),
            Some(ThetaSection { mode: ThetaKind::Locked, value: None }) => Ok(ThetaMode::Locked),
            Some(ThetaSection { mode: ThetaKind::Optimal, value: None }) => Ok(ThetaMode::Optimal),
            Some(ThetaSection { mode: ThetaKind::Fixed, value: Some(v) }) => Ok(ThetaMode::Fixed(*v)),
            Some(ThetaSection { mode: ThetaKind::Fixed, value: None }) => Err(ConfigError::Missing("theta.value")),
            Some(_) => Err(ConfigError::Invalid("theta.value is only allowed with mode = \"fixed\"".into())),
        }
    }

    /// `eta` of a pump given relative to threshold.
    pub fn eta(&self) -> Option<f64> {
        self.pump.as_ref().and_then(|p| p.below_threshold)
    }

    /// Model parameters, or `None` when the file has no `[model]` section.
    pub fn model_params(&self) -> Result<Option<ModelParams<f64>>, ConfigError> {
        let Some(m) = &self.model else { return Ok(None) };
        let delay = self.delay_spec()?.ok_or(ConfigError::Missing("[delay]"))?;
        let pump = self.pump.clone().ok_or(ConfigError::Missing("[pump]"))?;
        let open = (m.gamma2 + m.gamma3) / 2.0;
        let eps = match (pump.epsilon_abs, pump.above_loss, pump.below_threshold) {
            (Some(e), None, None) => e,
            (None, Some(a), None) => open + a,
            (None, None, Some(eta)) => (1.0 - eta) * open,
            _ => return Err(ConfigError::ConflictingPump),
        };
        let mut p = ModelParams::new(m.gamma1, m.gamma2, m.gamma3, eps, delay)
            .with_omega0(m.omega0.unwrap_or(DEFAULT_OMEGA0))
            .with_beta(m.beta.unwrap_or(0.0))
            .with_theta(self.theta_mode()?);
        p.gamma_f = m.gamma_f;
        p.phi = m.phi;
        p.validate()?;
        Ok(Some(p))
    }

    pub fn resolve(self) -> Result<Scenario, ConfigError> {
        let params = self.model_params()?;
        Ok(Scenario { file: self, params })
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn set_opt<T>(slot: &mut Option<T>, value: Option<T>) {
    if value.is_some() {
        *slot = value;
    }
}

/// Loads a scenario file and merges command-line overrides (which win).
pub fn load_scenario(path: &Path, overrides: &Overrides) -> Result<Scenario, ConfigError> {
    let mut file = load_scenario_file(path)?;
    file.apply(overrides)?;
    file.resolve()
}

/// Everything needed to repeat a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub schema_version: u32,
    pub csv_schema_version: u32,
    pub subcommand: String,
    /// No randomness enters any computation.
    pub deterministic: bool,
    pub outputs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolved: Option<ResolvedModel>,
    pub scenario: ScenarioFile,
}

/// The validated model parameters in flat form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolvedModel {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub gamma_f: f64,
    pub phi: f64,
    pub omega0: f64,
    pub epsilon_abs: f64,
    pub beta: f64,
    pub tau: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
}

pub const CSV_SCHEMA_VERSION: u32 = 1;

impl RunManifest {
    pub fn new(subcommand: &str, scenario: &Scenario, outputs: Vec<String>) -> Self {
        let resolved = scenario.params.as_ref().map(|p| ResolvedModel {
            gamma1: p.gamma1,
            gamma2: p.gamma2,
            gamma3: p.gamma3,
            gamma_f: p.gamma_f.unwrap_or(p.gamma1),
            phi: p.phi.unwrap_or(std::f64::consts::PI),
            omega0: p.omega0,
            epsilon_abs: p.eps_abs,
            beta: p.eps_phase,
            tau: p.delay.tau(p.omega0),
            eta: scenario.file.eta(),
        });
        RunManifest {
            schema_version: SCHEMA_VERSION,
            csv_schema_version: CSV_SCHEMA_VERSION,
            subcommand: subcommand.to_string(),
            deterministic: true,
            outputs,
            resolved,
            scenario: scenario.file.clone(),
        }
    }

    pub fn to_toml(&self) -> String {
        to_toml(self)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let table: toml::Table = text.parse().map_err(|e| map_toml_error(text, &e))?;
        match table.get("schema_version") {
            Some(toml::Value::Integer(v)) if *v == i64::from(SCHEMA_VERSION) => {}
            Some(toml::Value::Integer(v)) => {
                return Err(ConfigError::VersionMismatch { found: *v, expected: SCHEMA_VERSION, hint: version_hint(*v) })
            }
            _ => return Err(ConfigError::Missing("schema_version")),
        }
        toml::from_str(text).map_err(|e| map_toml_error(text, &e))
    }
}

pub fn save_manifest(manifest: &RunManifest, path: &Path) -> Result<(), ConfigError> {
    write_text(path, &manifest.to_toml())
}

pub fn load_manifest(path: &Path) -> Result<RunManifest, ConfigError> {
    if path.as_os_str().is_empty() {
        return Err(ConfigError::Io { path: String::new(), message: "empty path".into() });
    }
    let text = fs::read_to_string(path).map_err(|e| io_err(path, &e))?;
    RunManifest::parse(&text)
}

/// Checked-in presets, one per figure.
pub const PRESETS: &[(&str, &str)] = &[
    ("fig3", include_str!("../presets/fig3.toml")),
    ("fig4", include_str!("../presets/fig4.toml")),
    ("fig5-g05", include_str!("../presets/fig5-g05.toml")),
    ("fig5-g3", include_str!("../presets/fig5-g3.toml")),
    ("fig5-g9", include_str!("../presets/fig5-g9.toml")),
    ("fig2a-map", include_str!("../presets/fig2a-map.toml")),
    ("fig2b-map", include_str!("../presets/fig2b-map.toml")),
];

pub fn preset_text(name: &str) -> Result<&'static str, ConfigError> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| ConfigError::UnknownPreset(name.to_string()))
}

pub fn preset(name: &str) -> Result<ScenarioFile, ConfigError> {
    parse_scenario(preset_text(name)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_canonical() {
        for (name, text) in PRESETS {
            let file = parse_scenario(text).unwrap();
            assert_eq!(to_toml(&file), *text, "preset {name} is not in canonical form");
            file.resolve().unwrap();
        }
    }

    #[test]
    fn fig3_preset_parameters() {
        let s = preset("fig3").unwrap().resolve().unwrap();
        let p = s.params.unwrap();
        assert_eq!((p.gamma1, p.gamma2, p.gamma3), (2.0, 2.0, 0.0));
        assert_eq!(p.eps_abs, (1.0 - 1e-6) * 1.0);
        let m = p.validate().unwrap();
        assert_eq!(m.interference(), crate::model::Interference::Destructive);
    }

    #[test]
    fn unknown_key_is_named() {
        let text = "schema_version = 1\n[model]\ngamm1 = 2.0\ngamma2 = 1.0\n";
        match parse_scenario(text) {
            Err(ConfigError::UnknownKey { key, line, .. }) => {
                assert_eq!(key, "gamm1");
                assert_eq!(line, 3);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_error_has_position() {
        let text = "schema_version = 1\n[model\n";
        assert!(matches!(parse_scenario(text), Err(ConfigError::Parse { line: 2, .. })));
    }

    #[test]
    fn version_checks() {
        let e = parse_scenario("schema_version = 2\n").unwrap_err();
        assert!(matches!(e, ConfigError::VersionMismatch { found: 2, .. }));
        assert!(e.to_string().contains("upgrade"));
        assert_eq!(parse_scenario("name = \"x\"\n"), Err(ConfigError::Missing("schema_version")));
    }

    #[test]
    fn conflicting_delay() {
        let text = "schema_version = 1\n[model]\ngamma1 = 1.0\ngamma2 = 1.0\n[pump]\nepsilon_abs = 0.1\n[delay]\ntau = 1.0\nscale_s = 0.5\n";
        let f = parse_scenario(text).unwrap();
        assert_eq!(f.resolve(), Err(ConfigError::ConflictingDelaySpec));
        let mut f = preset("fig3").unwrap();
        let o = Overrides { tau: Some(1.0), delta: Some(1), ..Default::default() };
        assert_eq!(f.apply(&o), Err(ConfigError::ConflictingDelaySpec));
    }

    #[test]
    fn overrides_win() {
        let mut f = preset("fig5-g3").unwrap();
        f.apply(&Overrides { gamma2: Some(9.0), ..Default::default() }).unwrap();
        let p = f.resolve().unwrap().params.unwrap();
        assert_eq!(p.gamma2, 9.0);
        assert_eq!(p.eps_abs, 9.5);
        let mut f = preset("fig3").unwrap();
        f.apply(&Overrides { delta: Some(1), epsilon_abs: Some(0.0), ..Default::default() }).unwrap();
        let p = f.resolve().unwrap().params.unwrap();
        assert_eq!(p.delay, DelaySpec::scaled(0.5, 1).unwrap());
        assert_eq!(p.eps_abs, 0.0);
    }

    #[test]
    fn manifest_round_trip_and_io_errors() {
        let s = preset("fig3").unwrap().resolve().unwrap();
        let m = RunManifest::new("spectrum", &s, vec!["out.csv".into()]);
        let text = m.to_toml();
        assert_eq!(RunManifest::parse(&text).unwrap(), m);
        assert!(matches!(load_manifest(Path::new("")), Err(ConfigError::Io { .. })));
        assert!(matches!(save_manifest(&m, Path::new("")), Err(ConfigError::Io { .. })));
        let bumped = text.replacen("schema_version = 1", "schema_version = 7", 1);
        assert!(matches!(RunManifest::parse(&bumped), Err(ConfigError::VersionMismatch { found: 7, .. })));
    }
}
