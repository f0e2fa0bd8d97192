//! Self-verification suite: independent cross-checks between modules.

use std::f64::consts::PI;

use crate::config::{preset, PRESETS};
use crate::dde::pyragas_invariance_check;
use crate::lambert::{defining_residual, is_principal, lambert_w0};
use crate::model::{DelaySpec, Interference, Matched, Model, ModelParams, Regime, ThetaMode};
use crate::scalar::{cx, linspace, Cx};
use crate::spectrum::{scattering_row, scattering_row_mutated, spectrum_table, Port};
use crate::stability::{char_root_oracle, roots_with_gain, routh_hurwitz_delay_independent};

/// Deliberate defects for checking that the suite notices them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Fault {
    #[default]
    None,
    /// Flip the loop term inside the anomalous feedback-port coefficient.
    AnomalousCoupling,
    /// Swap which interference class gets the positive delayed coupling.
    InterferenceMapping,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> CheckResult {
    CheckResult { name, passed, detail }
}

/// Additive recurrence `frac(k a_d)`, a low-discrepancy sequence in `[0, 1)`.
fn weyl(k: usize, dim: usize) -> f64 {
    const A: [f64; 8] = [
        0.754_877_666_246_692_7,
        0.569_840_290_998_053_3,
        0.618_033_988_749_894_8,
        0.414_213_562_373_095_1,
        0.732_050_807_568_877_2,
        0.236_067_977_499_789_7,
        0.645_751_311_064_590_6,
        0.316_624_790_355_399_8,
    ];
    ((k as f64 + 0.5) * A[dim % A.len()]).fract()
}

fn lerp(u: f64, lo: f64, hi: f64) -> f64 {
    lo + u * (hi - lo)
}

/// Stable scenario number `k`: pump below the open-port loss.
pub fn sample_stable_scenario(k: usize) -> Model<f64> {
    let g1 = lerp(weyl(k, 0), 0.1, 3.0);
    let g2 = lerp(weyl(k, 1), 0.0, 3.0);
    let g3 = lerp(weyl(k, 2), 0.0, 1.0);
    let frac = lerp(weyl(k, 3), 0.0, 0.99);
    let scale = [0.1, 0.2, 0.5, 1.0][k % 4];
    let delta = ((k / 4) % 2) as u8;
    ModelParams::new(g1, g2, g3, frac * (g2 + g3) / 2.0, DelaySpec::scaled(scale, delta).expect("valid delay"))
        .with_beta(lerp(weyl(k, 4), 0.0, 2.0 * PI))
        .validate()
        .expect("sampled scenario is valid")
}

fn bogoliubov(fault: Fault) -> CheckResult {
    let mut worst = 0.0f64;
    let draws = 2000;
    for k in 0..draws {
        let m = sample_stable_scenario(k);
        let w = lerp(weyl(k, 5), -20.0, 20.0);
        for port in Port::BOTH {
            let row = match fault {
                Fault::AnomalousCoupling => scattering_row_mutated(port, w, &m),
                _ => scattering_row(port, w, &m),
            };
            match row {
                Ok(r) => worst = worst.max(r.bogoliubov_residual),
                Err(_) => worst = f64::INFINITY,
            }
        }
    }
    check("bogoliubov-identity", worst <= 1e-9, format!("{draws} draws, max residual {worst:.3e}"))
}

fn fig3(delta: u8, eps: f64) -> Model<f64> {
    ModelParams::new(2.0, 2.0, 0.0, eps, DelaySpec::scaled(0.5, delta).expect("valid delay"))
        .validate()
        .expect("valid scenario")
}

fn noise_floor() -> CheckResult {
    let mut worst = 0.0f64;
    for delta in [0, 1] {
        let m = fig3(delta, 0.0);
        for w in linspace(-10.0, 10.0, 41) {
            for port in Port::BOTH {
                let row = scattering_row(port, w, &m).expect("no pump is never singular");
                for th in linspace(0.0, PI, 7) {
                    worst = worst.max((row.quadrature_variance(th) - 1.0).abs());
                }
            }
        }
    }
    check("no-pump-noise-floor", worst <= 1e-12, format!("max |P - 1| = {worst:.3e}"))
}

/// Single-mode squeezing spectrum of a cavity with total loss `kappa`,
/// measured through a port of rate `gamma`.
fn textbook(gamma: f64, kappa: f64, eps: f64, w: f64) -> f64 {
    let d = kappa / 2.0 + eps;
    1.0 - 2.0 * gamma * eps / (w * w + d * d)
}

fn markovian_reduction() -> CheckResult {
    let mut worst = 0.0f64;
    for delta in [0, 1] {
        let m = fig3(delta, 1.0 - 1e-6).markovian();
        let grid = crate::spectrum::default_grid(&fig3(delta, 1.0 - 1e-6), 401);
        let t = spectrum_table(&m, &grid, ThetaMode::Locked).expect("valid grid");
        for (w, v) in t.ok_rows() {
            worst = worst.max((v.p[0] - textbook(2.0, 4.0, 1.0 - 1e-6, w)).abs());
            worst = worst.max((v.p[1] - textbook(2.0, 4.0, 1.0 - 1e-6, w)).abs());
        }
    }
    check("markovian-reduction", worst <= 1e-9, format!("max deviation {worst:.3e}"))
}

fn threshold_squeezing() -> CheckResult {
    let m = fig3(0, 1.0 - 1e-6);
    let th = m.theta().expect("fixed theta");
    let p2 = scattering_row(Port::Mirror, 0.0, &m).map(|r| r.quadrature_variance(th));
    let p1 = scattering_row(Port::Feedback, 0.0, &m).map(|r| r.quadrature_variance(th));
    match (p1, p2) {
        (Ok(p1), Ok(p2)) => check(
            "threshold-squeezing",
            p2 <= 1e-4 && (p1 - 1.0).abs() <= 1e-9,
            format!("P2(0) = {p2:.3e}, P1(0) = {p1:.12}"),
        ),
        _ => check("threshold-squeezing", false, "singular response".into()),
    }
}

fn lambert() -> CheckResult {
    let mut worst = 0.0f64;
    let mut off_branch = 0;
    let n = 4000;
    for k in 0..n {
        let r = 1e3f64.powf(lerp(weyl(k, 0), -3.0, 1.0));
        let z = if k % 5 == 0 {
            cx(-1.0 / std::f64::consts::E - r, 0.0)
        } else {
            Cx::from_polar(r, lerp(weyl(k, 1), -PI, PI))
        };
        match lambert_w0(z) {
            Ok(w) => {
                worst = worst.max(defining_residual(w, z));
                if !is_principal(w, 1e-8) {
                    off_branch += 1;
                }
            }
            Err(_) => worst = f64::INFINITY,
        }
    }
    let bp = lambert_w0(cx(-1.0 / std::f64::consts::E, 0.0)).map_or(f64::INFINITY, |w| (w - cx(-1.0, 0.0)).norm());
    let bp_ok = bp <= 1e-6;
    check(
        "lambert-w-residual",
        worst <= 1e-12 && off_branch == 0 && bp_ok,
        format!("{n} points, max residual {worst:.3e}, off-branch {off_branch}, |W(-1/e) + 1| = {bp:.3e}"),
    )
}

/// Scaled delay `tau ~ pi / 2` with `gamma1 = x / tau` and the given `alpha_tilde`.
pub fn map_scenario(gamma1_tau: f64, alpha_tilde: f64, matched: Matched) -> Model<f64> {
    let delta = match matched {
        Matched::Destructive => 0,
        Matched::Constructive => 1,
    };
    let delay = DelaySpec::scaled(0.5, delta).expect("valid delay");
    let g1 = gamma1_tau / delay.tau(crate::model::DEFAULT_OMEGA0);
    let g2 = 2.0 + 2.0 * g1;
    ModelParams::new(g1, g2, 0.0, alpha_tilde * g1 + g2 / 2.0, delay)
        .validate()
        .expect("valid scenario")
}

fn sign_agreement(fault: Fault) -> CheckResult {
    let mut compared = 0;
    let mut disagree = 0;
    for matched in [Matched::Destructive, Matched::Constructive] {
        for x in linspace(0.1, 5.0, 8) {
            for a in linspace(-0.9, 3.9, 8) {
                let m = map_scenario(x, a, matched);
                let (Ok(r), Ok(o)) = (roots_with_gain(&m, fault == Fault::InterferenceMapping), char_root_oracle(&m)) else {
                    disagree += 1;
                    continue;
                };
                if (o.re * m.tau()).abs() < 1e-3 {
                    continue;
                }
                compared += 1;
                if (r.s1.re < 0.0) != (o.re < 0.0) {
                    disagree += 1;
                }
            }
        }
    }
    check(
        "stability-sign-agreement",
        disagree == 0,
        format!("{compared} cells compared, {disagree} disagreements"),
    )
}

fn routh_hurwitz() -> CheckResult {
    let mut mismatches = 0;
    let n = 200;
    for k in 0..n {
        let g1 = lerp(weyl(k, 0), 0.1, 3.0);
        let g2 = lerp(weyl(k, 1), 0.1, 3.0);
        let g3 = lerp(weyl(k, 2), 0.0, 1.0);
        let eps = lerp(weyl(k, 3), 0.0, 1.5) * (g2 + g3) / 2.0;
        let m = ModelParams::new(g1, g2, g3, eps, DelaySpec::scaled(0.1, (k % 2) as u8).expect("valid"))
            .validate()
            .expect("valid");
        match routh_hurwitz_delay_independent(&m) {
            Ok(rh) if rh.agrees() => {}
            _ => mismatches += 1,
        }
    }
    check("routh-hurwitz-shortcut", mismatches == 0, format!("{n} scenarios, {mismatches} mismatches"))
}

fn pyragas() -> CheckResult {
    let m = ModelParams::new(2.0, 0.0, 0.0, 0.0, DelaySpec::scaled(0.5, 0).expect("valid"))
        .validate()
        .expect("valid");
    let v0 = [cx(1.0, 0.0), cx(1.0, 0.0)];
    match pyragas_invariance_check(&m, v0) {
        Ok(d) => check("pyragas-drift", d <= 1e-8 * 2f64.sqrt(), format!("max drift {d:.3e}")),
        Err(e) => check("pyragas-drift", false, e.to_string()),
    }
}

struct Expected {
    name: &'static str,
    g: f64,
    alpha_tilde: f64,
    gamma1_tau: f64,
    interference: Interference<f64>,
    regime: Regime,
}

fn presets() -> CheckResult {
    let fig5 = |name, g2: f64| Expected {
        name,
        g: 2.75 + g2 / 2.0,
        alpha_tilde: 5.0 / 2.75,
        gamma1_tau: 2.75 * 0.100_001 * PI,
        interference: Interference::Constructive,
        regime: Regime::ShortDelay,
    };
    let fig3 = |name| Expected {
        name,
        g: 3.0,
        alpha_tilde: -5e-7,
        gamma1_tau: PI,
        interference: Interference::Destructive,
        regime: Regime::LongDelay,
    };
    let expected = [fig3("fig3"), fig3("fig4"), fig5("fig5-g05", 0.5), fig5("fig5-g3", 3.0), fig5("fig5-g9", 9.0)];
    let mut bad = Vec::new();
    for e in &expected {
        let ok = preset(e.name)
            .and_then(|f| f.resolve())
            .ok()
            .and_then(|s| s.params)
            .and_then(|p| p.validate().ok())
            .is_some_and(|m| {
                let d = m.derived();
                (d.g - e.g).abs() < 1e-12
                    && d.alpha_tilde.is_some_and(|a| (a - e.alpha_tilde).abs() < 1e-12)
                    && (d.gamma1_tau - e.gamma1_tau).abs() < 1e-12
                    && d.interference == e.interference
                    && d.regime == e.regime
            });
        if !ok {
            bad.push(e.name);
        }
    }
    for (name, _) in PRESETS.iter().filter(|(n, _)| n.ends_with("-map")) {
        let want = if name.starts_with("fig2a") { Matched::Constructive } else { Matched::Destructive };
        if !preset(name).is_ok_and(|f| f.map.is_some_and(|m| m.interference == want)) {
            bad.push(name);
        }
    }
    check("preset-derived", bad.is_empty(), format!("{} presets, failing: {bad:?}", PRESETS.len()))
}

/// Runs every check.
pub fn run_suite(fault: Fault) -> Vec<CheckResult> {
    vec![
        bogoliubov(fault),
        noise_floor(),
        markovian_reduction(),
        threshold_squeezing(),
        lambert(),
        sign_agreement(fault),
        routh_hurwitz(),
        pyragas(),
        presets(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outcome(results: &[CheckResult], name: &str) -> bool {
        results.iter().find(|r| r.name == name).unwrap().passed
    }

    #[test]
    fn clean_build_passes() {
        let r = run_suite(Fault::None);
        for c in &r {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }

    #[test]
    fn anomalous_fault_is_caught() {
        let r = run_suite(Fault::AnomalousCoupling);
        assert!(!outcome(&r, "bogoliubov-identity"));
    }

    #[test]
    fn mapping_fault_is_caught() {
        let r = run_suite(Fault::InterferenceMapping);
        assert!(!outcome(&r, "stability-sign-agreement"));
    }
}
