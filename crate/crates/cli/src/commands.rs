use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use dpo_feedback::config::{
    load_scenario_file, preset, DdeSection, GridSection, Overrides, RunManifest, Scenario,
};
use dpo_feedback::dde::{self, Classification};
use dpo_feedback::model::Model;
use dpo_feedback::report::{write_boundary_csv, write_map_csv, write_spectrum_csv, write_trace_csv};
use dpo_feedback::scalar::linspace;
use dpo_feedback::spectrum::{default_grid, DEFAULT_GRID_POINTS};
use dpo_feedback::stability::{assess, stability_map, Method};
use dpo_feedback::verify::run_suite;
use dpo_feedback::{ConfigError, Cx, DdeError, Error, ScenarioFile, StabilityError};

use crate::args::{DdeArgs, MapArgs, ScenarioArgs, SpectrumArgs, StabilityArgs, VerifyArgs};

/// A failed run and its exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad input: 2.
    Validation(String),
    /// Nothing could be evaluated: 3.
    Degenerate(String),
    /// Reading or writing files: 4.
    Io(String),
    /// A self-check failed: 1.
    Check(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Check(_) => 1,
            Failure::Validation(_) => 2,
            Failure::Degenerate(_) => 3,
            Failure::Io(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Degenerate(m) | Failure::Io(m) | Failure::Check(m) => m,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io { .. } => Failure::Io(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(c) => c.into(),
            Error::Model(_) | Error::Spectrum(_) => Failure::Validation(e.to_string()),
            Error::Stability(StabilityError::GenericPhase) => {
                Failure::Validation(format!("{e}; rerun with --with-oracle"))
            }
            Error::Stability(StabilityError::ZeroDelay) => Failure::Validation(e.to_string()),
            Error::Dde(DdeError::StepTooLarge { .. } | DdeError::InvalidRequest(_)) => {
                Failure::Validation(e.to_string())
            }
            Error::Response(_) | Error::Stability(_) | Error::Dde(_) => Failure::Degenerate(e.to_string()),
        }
    }
}

fn lib<E: Into<Error>>(e: E) -> Failure {
    Failure::from(e.into())
}

fn io_failure(path: &Path, e: &io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

/// Manifest text, either bare or as the `# ` header of a CSV.
fn read_manifest(path: &Path) -> Result<RunManifest, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| io_failure(path, &e))?;
    let body = if text.starts_with('#') {
        text.lines()
            .map_while(|l| l.strip_prefix('#'))
            .map(|l| l.strip_prefix(' ').unwrap_or(l))
            .collect::<Vec<_>>()
            .join("\n")
    } else {
        text
    };
    Ok(RunManifest::parse(&body)?)
}

fn base_file(
    subcommand: &str,
    preset_name: Option<&str>,
    config: Option<&Path>,
    manifest: Option<&Path>,
) -> Result<ScenarioFile, Failure> {
    if let Some(path) = manifest {
        let m = read_manifest(path)?;
        if m.subcommand != subcommand {
            return Err(Failure::Validation(format!(
                "manifest was written by `{}`, not `{subcommand}`",
                m.subcommand
            )));
        }
        return Ok(m.scenario);
    }
    match (preset_name, config) {
        (Some(name), _) => Ok(preset(name)?),
        (None, Some(path)) => Ok(load_scenario_file(path)?),
        (None, None) => Ok(ScenarioFile::default()),
    }
}

fn scenario(subcommand: &str, args: &ScenarioArgs, extra: &Overrides) -> Result<ScenarioFile, Failure> {
    let mut file = base_file(subcommand, args.preset.as_deref(), args.config.as_deref(), args.manifest.as_deref())?;
    file.apply(&args.overrides())?;
    file.apply(extra)?;
    Ok(file)
}

fn require_model(s: &Scenario) -> Result<Model<f64>, Failure> {
    match &s.params {
        Some(p) => p.clone().validate().map_err(lib),
        None => Err(Failure::Validation(
            "no model given: use --preset, --config, or at least --gamma1, --gamma2, a pump and a delay".into(),
        )),
    }
}

/// `dir/stem-suffix.ext` next to `path`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    let name = match path.extension() {
        Some(ext) => format!("{stem}-{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}-{suffix}"),
    };
    path.with_file_name(name)
}

fn output_name(path: Option<&Path>) -> String {
    match path {
        Some(p) => p.file_name().map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned()),
        None => "-".into(),
    }
}

/// Writes through `body` to `path`, or to stdout.
fn emit<F>(path: Option<&Path>, body: F) -> Result<(), Failure>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| io_failure(p, &e))?;
            let mut w = BufWriter::new(file);
            body(&mut w).and_then(|()| w.flush()).map_err(|e| io_failure(p, &e))
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            body(&mut w).and_then(|()| w.flush()).map_err(|e| Failure::Io(format!("stdout: {e}")))
        }
    }
}

/// Fixes the frequency grid in the scenario so the manifest alone reproduces it.
fn pin_grid(file: &mut ScenarioFile, model: &Model<f64>) -> Result<Vec<f64>, Failure> {
    let g = file.grid.clone().unwrap_or_default();
    let grid = match (g.omega_min, g.omega_max) {
        (Some(lo), Some(hi)) => linspace(lo, hi, g.omega_points.unwrap_or(DEFAULT_GRID_POINTS)),
        (None, None) => default_grid(model, g.omega_points.unwrap_or(DEFAULT_GRID_POINTS)),
        _ => return Err(Failure::Validation("give both --omega-min and --omega-max, or neither".into())),
    };
    if grid.is_empty() {
        return Err(Failure::Validation("--omega-points must be at least 1".into()));
    }
    file.grid = Some(GridSection {
        omega_min: grid.first().copied(),
        omega_max: grid.last().copied(),
        omega_points: Some(grid.len()),
    });
    Ok(grid)
}

fn spectrum_file(mut file: ScenarioFile, output: Option<&Path>) -> Result<(), Failure> {
    let model = require_model(&file.clone().resolve()?)?;
    let grid = pin_grid(&mut file, &model)?;
    let resolved = file.resolve()?;
    let model = require_model(&resolved)?;
    let table = dpo_feedback::spectrum_table(&model, &grid, model.params().theta).map_err(lib)?;
    if table.ok_rows().next().is_none() {
        return Err(Failure::Degenerate(format!(
            "the response matrix is singular at all {} frequencies",
            table.rows.len()
        )));
    }
    let manifest = RunManifest::new("spectrum", &resolved, vec![output_name(output)]);
    emit(output, |mut w| write_spectrum_csv(&mut w, Some(&manifest), &table))
}

fn fig5_preset_name(gamma2: Option<f64>) -> &'static str {
    match gamma2 {
        Some(0.5) => "fig5-g05",
        Some(9.0) => "fig5-g9",
        _ => "fig5-g3",
    }
}

pub fn spectrum(args: &SpectrumArgs) -> Result<(), Failure> {
    let grid = Overrides {
        omega_min: args.omega_min,
        omega_max: args.omega_max,
        omega_points: args.omega_points,
        ..Overrides::default()
    };
    let mut runs: Vec<(ScenarioFile, Option<PathBuf>)> = Vec::new();
    if args.fig3_preset {
        let Some(out) = &args.output else {
            return Err(Failure::Validation("--fig3-preset writes two files; give --output".into()));
        };
        for delta in [0u8, 1] {
            let mut file = preset("fig3")?;
            file.apply(&args.scenario.overrides())?;
            file.apply(&Overrides { delta: Some(delta), ..grid.clone() })?;
            runs.push((file, Some(sibling(out, &format!("delta{delta}")))));
        }
    } else {
        let mut file = if args.fig5_preset {
            preset(fig5_preset_name(args.scenario.gamma2))?
        } else {
            base_file("spectrum", args.scenario.preset.as_deref(), args.scenario.config.as_deref(), args.scenario.manifest.as_deref())?
        };
        file.apply(&args.scenario.overrides())?;
        file.apply(&grid)?;
        runs.push((file, args.output.clone()));
    }
    if args.compare_markovian {
        let mut extra = Vec::new();
        for (file, out) in &runs {
            let Some(out) = out else {
                return Err(Failure::Validation("--compare-markovian writes a second file; give --output".into()));
            };
            let mut reference = file.clone();
            // same grid as the feedback run
            let model = require_model(&reference.clone().resolve()?)?;
            pin_grid(&mut reference, &model)?;
            if let Some(m) = reference.model.as_mut() {
                m.gamma_f = Some(0.0);
            }
            extra.push((reference, Some(sibling(out, "markovian"))));
        }
        runs.extend(extra);
    }
    for (file, out) in runs {
        spectrum_file(file, out.as_deref())?;
        if let Some(p) = out {
            eprintln!("wrote {}", p.display());
        }
    }
    Ok(())
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

pub fn stability(args: &StabilityArgs) -> Result<(), Failure> {
    let resolved = scenario("stability", &args.scenario, &Overrides::default())?.resolve()?;
    let model = require_model(&resolved)?;
    let d = model.derived();
    let v = assess(&model, args.with_oracle).map_err(lib)?;
    let tau = model.tau();
    println!("model: {d}");
    match v.method {
        Method::Lambert => {
            println!("S1W = Re s1 = {:.6e} (tau Re s1 = {:.6e})", v.s1w, tau * v.s1w);
            if let Some(s2) = v.s2w {
                println!("S2W = Re s2 = {:.6e} (tau Re s2 = {:.6e})", s2, tau * s2);
            }
        }
        Method::Oracle => println!("Re s (dominant root) = {:.6e}", v.s1w),
    }
    let word = match (v.stable, v.marginal) {
        (_, true) => "marginal",
        (true, false) => "stable",
        (false, false) => "unstable",
    };
    println!("verdict: {word}");
    if let Some(rh) = &v.routh_hurwitz {
        println!(
            "delay-independent stability: {} (undelayed system Hurwitz: {}, closed-form test: {})",
            yes_no(rh.delay_independent),
            yes_no(rh.zero_delay_hurwitz),
            yes_no(rh.shortcut)
        );
    }
    if let Some(r) = v.dominant_root {
        println!("dominant root (oracle): {:.9e} {:+.9e}i", r.re, r.im);
    }
    let di = v.routh_hurwitz.as_ref().map_or("na", |rh| if rh.delay_independent { "1" } else { "0" });
    let s2 = v.s2w.map_or_else(|| "na".into(), |s| format!("{s:.11e}"));
    let root = v.dominant_root.map_or_else(|| "na".into(), |r| format!("{:.11e},{:.11e}", r.re, r.im));
    println!(
        "result verdict={word} stable={} marginal={} s1w={:.11e} s2w={s2} delay_independent={di} interference={} method={} root={root}",
        u8::from(v.stable),
        u8::from(v.marginal),
        v.s1w,
        v.interference,
        match v.method {
            Method::Lambert => "lambert",
            Method::Oracle => "oracle",
        }
    );
    Ok(())
}

pub fn stability_map_cmd(args: &MapArgs) -> Result<(), Failure> {
    let mut file = base_file("stability-map", args.preset.as_deref(), args.config.as_deref(), args.manifest.as_deref())?;
    file.apply(&Overrides { interference: args.interference.map(Into::into), ..Overrides::default() })?;
    let resolved = file.resolve()?;
    let Some(m) = resolved.file.map.clone() else {
        return Err(Failure::Validation("no [map] section: use --preset fig2a-map, fig2b-map or a --config file".into()));
    };
    if m.gamma1_tau_points == 0 || m.alpha_points == 0 {
        return Err(Failure::Validation("map grids need at least one point each".into()));
    }
    let xs = linspace(m.gamma1_tau_min, m.gamma1_tau_max, m.gamma1_tau_points);
    let alphas = linspace(m.alpha_min, m.alpha_max, m.alpha_points);
    let map = stability_map(m.interference, &xs, &alphas).map_err(lib)?;
    let boundary = sibling(&args.output, "boundary");
    let manifest = RunManifest::new(
        "stability-map",
        &resolved,
        vec![output_name(Some(&args.output)), output_name(Some(&boundary))],
    );
    emit(Some(&args.output), |mut w| write_map_csv(&mut w, Some(&manifest), &map))?;
    emit(Some(&boundary), |mut w| write_boundary_csv(&mut w, Some(&manifest), &map))?;
    let stable = map.cells.iter().filter(|c| c.stable).count();
    eprintln!(
        "{} map: {stable} of {} cells stable, {} boundary points; wrote {} and {}",
        m.interference,
        map.cells.len(),
        map.boundary.len(),
        args.output.display(),
        boundary.display()
    );
    Ok(())
}

pub fn dde_cmd(args: &DdeArgs) -> Result<(), Failure> {
    let extra = Overrides { t_end: args.t_end, dt: args.dt, ..Overrides::default() };
    let mut file = scenario("dde", &args.scenario, &extra)?;
    let model = require_model(&file.clone().resolve()?)?;
    let d = file.dde.clone().unwrap_or_default();
    let g = model.derived().g;
    let t_end = d.t_end.unwrap_or_else(|| 20.0 * model.tau().max(if g > 0.0 { 1.0 / g } else { 1.0 }));
    let dt = d.dt.unwrap_or_else(|| dde::suggested_dt(&model));
    let v = Cx::new(d.v0_re.unwrap_or(1.0), d.v0_im.unwrap_or(0.0));
    file.dde = Some(DdeSection { t_end: Some(t_end), dt: Some(dt), v0_re: Some(v.re), v0_im: Some(v.im) });
    let resolved = file.resolve()?;
    let trace = dde::integrate(&model, [v, v.conj()], t_end, dt).map_err(lib)?;
    let fit = dde::classify(&trace).map_err(lib)?;
    let manifest = RunManifest::new("dde", &resolved, vec![output_name(args.output.as_deref())]);
    emit(args.output.as_deref(), |mut w| write_trace_csv(&mut w, Some(&manifest), &trace))?;
    let class = match fit.class {
        Classification::Decaying => "decaying",
        Classification::Growing => "growing",
        Classification::Marginal => "marginal",
    };
    let overflow = if trace.overflowed { " (stopped at the overflow guard)" } else { "" };
    let summary = format!(
        "classification: {class}, fitted rate {:.6e}, {} samples up to t = {:.6e}{overflow}",
        fit.rate,
        trace.t.len(),
        trace.t.last().copied().unwrap_or(0.0)
    );
    if args.output.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(())
}

pub fn verify(args: &VerifyArgs) -> Result<(), Failure> {
    let results = run_suite(args.inject_fault.into());
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
    for r in &results {
        println!("{:<width$}  {}  {}", r.name, if r.passed { "PASS" } else { "FAIL" }, r.detail);
    }
    let failed: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.name).collect();
    println!("{} checks, {} failed", results.len(), failed.len());
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!("failed checks: {}", failed.join(", "))))
    }
}
