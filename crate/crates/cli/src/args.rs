use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dpo_feedback::config::{Overrides, ThetaKind, ThetaSection};
use dpo_feedback::verify::Fault;
use dpo_feedback::Matched;

#[derive(Parser, Debug)]
#[command(name = "dpo-sim", version, about = "Squeezing spectra and stability of a parametric oscillator with delayed coherent feedback")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Quadrature noise spectra at both outputs as CSV.
    Spectrum(SpectrumArgs),
    /// Stability verdict for one scenario.
    Stability(StabilityArgs),
    /// Stability indicator over a (gamma1*tau, alpha_tilde) grid, plus its zero line.
    StabilityMap(MapArgs),
    /// Integrates the mean-field delay equation and classifies the trajectory.
    Dde(DdeArgs),
    /// Runs the cross-oracle self-check suite.
    Verify(VerifyArgs),
}

/// Where the scenario comes from and what overrides it.
#[derive(Args, Debug, Default)]
pub struct ScenarioArgs {
    /// Start from a built-in scenario.
    #[arg(long, value_name = "NAME", conflicts_with_all = ["config", "manifest"])]
    pub preset: Option<String>,
    /// Start from a scenario file.
    #[arg(long, value_name = "FILE", conflicts_with = "manifest")]
    pub config: Option<PathBuf>,
    /// Repeat a run from its manifest (a manifest file or a CSV written by this tool).
    #[arg(long, value_name = "FILE")]
    pub manifest: Option<PathBuf>,

    /// Feedback-port decay rate.
    #[arg(long, allow_negative_numbers = true)]
    pub gamma1: Option<f64>,
    /// Mirror-port decay rate.
    #[arg(long, allow_negative_numbers = true)]
    pub gamma2: Option<f64>,
    /// Internal loss rate.
    #[arg(long, allow_negative_numbers = true)]
    pub gamma3: Option<f64>,
    /// Rate at which the returning field couples back in (default: gamma1).
    #[arg(long = "gamma-f", allow_negative_numbers = true)]
    pub gamma_f: Option<f64>,
    /// Loop phase (default: pi).
    #[arg(long, allow_negative_numbers = true)]
    pub phi: Option<f64>,
    /// Pump amplitude |eps|.
    #[arg(long = "epsilon-abs", allow_negative_numbers = true, conflicts_with = "eta")]
    pub epsilon_abs: Option<f64>,
    /// Pump phase.
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Carrier frequency.
    #[arg(long, allow_negative_numbers = true)]
    pub omega0: Option<f64>,
    /// Pump set below the open-port loss: |eps| = (1 - eta) (gamma2 + gamma3)/2.
    #[arg(long, allow_negative_numbers = true)]
    pub eta: Option<f64>,

    /// Delay time.
    #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["scale_s", "delta"])]
    pub tau: Option<f64>,
    /// Delay scale S in tau = (S + delta/omega0) pi.
    #[arg(long = "scale-S", allow_negative_numbers = true)]
    pub scale_s: Option<f64>,
    /// Delay offset selecting the interference class (0 or 1).
    #[arg(long)]
    pub delta: Option<u8>,

    /// Fixed homodyne angle.
    #[arg(long, allow_negative_numbers = true, conflicts_with = "theta_opt")]
    pub theta: Option<f64>,
    /// Optimize the homodyne angle at every frequency.
    #[arg(long = "theta-opt")]
    pub theta_opt: bool,
}

impl ScenarioArgs {
    pub fn overrides(&self) -> Overrides {
        let theta = if self.theta_opt {
            Some(ThetaSection { mode: ThetaKind::Optimal, value: None })
        } else {
            self.theta.map(|v| ThetaSection { mode: ThetaKind::Fixed, value: Some(v) })
        };
        Overrides {
            gamma1: self.gamma1,
            gamma2: self.gamma2,
            gamma3: self.gamma3,
            gamma_f: self.gamma_f,
            phi: self.phi,
            omega0: self.omega0,
            beta: self.beta,
            epsilon_abs: self.epsilon_abs,
            eta: self.eta,
            tau: self.tau,
            scale_s: self.scale_s,
            delta: self.delta,
            theta,
            ..Overrides::default()
        }
    }
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long = "omega-min", allow_negative_numbers = true)]
    pub omega_min: Option<f64>,
    #[arg(long = "omega-max", allow_negative_numbers = true)]
    pub omega_max: Option<f64>,
    #[arg(long = "omega-points")]
    pub omega_points: Option<usize>,
    /// CSV destination (stdout when absent).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Also write the spectrum without feedback (gamma_f = 0) to a `-markovian` file.
    #[arg(long = "compare-markovian")]
    pub compare_markovian: bool,
    /// Threshold scenario with the loop in phase; writes `-delta0` and `-delta1` files.
    #[arg(long = "fig3-preset", conflicts_with_all = ["preset", "config", "manifest", "fig5_preset", "delta"])]
    pub fig3_preset: bool,
    /// Above-threshold short-delay scenario; `--gamma2` picks 0.5, 3 or 9.
    #[arg(long = "fig5-preset", conflicts_with_all = ["preset", "config", "manifest"])]
    pub fig5_preset: bool,
}

#[derive(Args, Debug)]
pub struct StabilityArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Also locate the dominant characteristic root numerically; works for any loop phase.
    #[arg(long = "with-oracle")]
    pub with_oracle: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum InterferenceArg {
    Constructive,
    Destructive,
}

impl From<InterferenceArg> for Matched {
    fn from(a: InterferenceArg) -> Self {
        match a {
            InterferenceArg::Constructive => Matched::Constructive,
            InterferenceArg::Destructive => Matched::Destructive,
        }
    }
}

#[derive(Args, Debug)]
pub struct MapArgs {
    /// Built-in map scenario (fig2a-map or fig2b-map).
    #[arg(long, value_name = "NAME", conflicts_with_all = ["config", "manifest"])]
    pub preset: Option<String>,
    #[arg(long, value_name = "FILE", conflicts_with = "manifest")]
    pub config: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub manifest: Option<PathBuf>,
    /// Interference class of the map.
    #[arg(long, value_enum)]
    pub interference: Option<InterferenceArg>,
    /// Map CSV destination; the zero line goes to a `-boundary` file beside it.
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Args, Debug)]
pub struct DdeArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Integration time (default: 20 max(tau, 1/G)).
    #[arg(long = "t-end")]
    pub t_end: Option<f64>,
    /// Step bound; the actual step divides tau evenly.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Trace CSV destination (stdout when absent).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FaultArg {
    None,
    AnomalousCoupling,
    InterferenceMapping,
}

impl From<FaultArg> for Fault {
    fn from(f: FaultArg) -> Self {
        match f {
            FaultArg::None => Fault::None,
            FaultArg::AnomalousCoupling => Fault::AnomalousCoupling,
            FaultArg::InterferenceMapping => Fault::InterferenceMapping,
        }
    }
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long = "inject-fault", value_enum, default_value = "none", hide = true)]
    pub inject_fault: FaultArg,
}
