use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dpo_sim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dpo-sim"))
        .args(args)
        .current_dir(dir)
        .env_remove("DPO_SIM_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

/// Data rows of a CSV, split into fields.
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn column(header_and_rows: &str, name: &str) -> Vec<f64> {
    let header = header_and_rows.lines().find(|l| !l.starts_with('#')).unwrap();
    let idx = header.split(',').position(|h| h == name).unwrap();
    rows(header_and_rows).iter().map(|r| r[idx].parse().unwrap()).collect()
}

fn value_at_zero(csv: &str, name: &str) -> f64 {
    let omega = column(csv, "omega");
    let k = omega.iter().position(|&w| w == 0.0).expect("grid contains 0");
    column(csv, name)[k]
}

#[test]
fn fig3_preset_writes_both_delays() {
    let dir = tempfile::tempdir().unwrap();
    let out = dpo_sim(dir.path(), &["spectrum", "--fig3-preset", "-o", "fig3.csv"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    for delta in ["delta0", "delta1"] {
        let text = fs::read_to_string(dir.path().join(format!("fig3-{delta}.csv"))).unwrap();
        assert!(text.contains(&format!("delta = {}", &delta[5..])));
        assert_eq!(column(&text, "omega").len(), 2001);
    }
    let d0 = fs::read_to_string(dir.path().join("fig3-delta0.csv")).unwrap();
    assert!(value_at_zero(&d0, "P2") <= 1e-4);
    assert!((value_at_zero(&d0, "P1") - 1.0).abs() <= 1e-9);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["spectrum", "--preset", "fig5-g3", "--theta-opt", "--omega-points", "301", "-o", "a.csv"];
    assert_eq!(code(&dpo_sim(dir.path(), &args)), 0);
    let first = fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(code(&dpo_sim(dir.path(), &args)), 0);
    assert_eq!(first, fs::read(dir.path().join("a.csv")).unwrap());

    // thread count does not change the output
    let threaded = Command::new(env!("CARGO_BIN_EXE_dpo-sim"))
        .args(args)
        .current_dir(dir.path())
        .env("DPO_SIM_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(code(&threaded), 0);
    assert_eq!(first, fs::read(dir.path().join("a.csv")).unwrap());
}

#[test]
fn manifest_reproduces_every_output() {
    let dir = tempfile::tempdir().unwrap();
    let again = dir.path().join("again");
    fs::create_dir(&again).unwrap();
    let out = dpo_sim(dir.path(), &["spectrum", "--fig3-preset", "--compare-markovian", "--omega-points", "101", "-o", "s.csv"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    for name in ["s-delta0.csv", "s-delta1.csv", "s-delta0-markovian.csv", "s-delta1-markovian.csv"] {
        let source = dir.path().join(name);
        let rerun = dpo_sim(&again, &["spectrum", "--manifest", source.to_str().unwrap(), "-o", name]);
        assert_eq!(code(&rerun), 0, "{}", stderr(&rerun));
        assert_eq!(fs::read(&source).unwrap(), fs::read(again.join(name)).unwrap(), "{name}");
    }

    let out = dpo_sim(dir.path(), &["dde", "--preset", "fig5-g3", "-o", "t.csv"]);
    assert_eq!(code(&out), 0);
    let rerun = dpo_sim(&again, &["dde", "--manifest", "../t.csv", "-o", "t.csv"]);
    assert_eq!(code(&rerun), 0, "{}", stderr(&rerun));
    assert_eq!(fs::read(dir.path().join("t.csv")).unwrap(), fs::read(again.join("t.csv")).unwrap());
}

#[test]
fn manifest_from_another_subcommand_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    dpo_sim(dir.path(), &["dde", "--preset", "fig5-g3", "-o", "t.csv"]);
    let out = dpo_sim(dir.path(), &["spectrum", "--manifest", "t.csv"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("`dde`"));
}

#[test]
fn markovian_reference_has_no_feedback() {
    let dir = tempfile::tempdir().unwrap();
    let out = dpo_sim(dir.path(), &["spectrum", "--preset", "fig4", "--compare-markovian", "--omega-points", "11", "-o", "f.csv"]);
    assert_eq!(code(&out), 0);
    let reference = fs::read_to_string(dir.path().join("f-markovian.csv")).unwrap();
    assert!(reference.contains("# gamma_f = 0.0"));
    let main = fs::read_to_string(dir.path().join("f.csv")).unwrap();
    assert_eq!(column(&main, "omega"), column(&reference, "omega"));
}

#[test]
fn no_pump_gives_flat_unit_spectra() {
    let dir = tempfile::tempdir().unwrap();
    let out = dpo_sim(
        dir.path(),
        &["spectrum", "--gamma1", "2", "--gamma2", "1", "--epsilon-abs", "0", "--scale-S", "0.3", "--delta", "1", "--omega-points", "51"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    for name in ["P1", "P2"] {
        assert!(column(&text, name).iter().all(|p| (p - 1.0).abs() <= 1e-12));
    }
}

#[test]
fn fig5_preset_follows_gamma2() {
    let dir = tempfile::tempdir().unwrap();
    for (g2, name) in [("0.5", "fig5-g05"), ("3", "fig5-g3"), ("9", "fig5-g9")] {
        let out = dpo_sim(dir.path(), &["spectrum", "--fig5-preset", "--gamma2", g2, "--omega-points", "21"]);
        assert_eq!(code(&out), 0);
        let text = stdout(&out);
        assert!(text.contains(&format!("# name = \"{name}\"")), "{name}");
        assert_eq!(column(&text, "P1").len(), 21);
        assert_eq!(column(&text, "P2").len(), 21);
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let validation = dpo_sim(dir.path(), &["spectrum", "--gamma1", "-1", "--gamma2", "1", "--epsilon-abs", "0", "--tau", "1"]);
    assert_eq!(code(&validation), 2);
    assert!(stderr(&validation).contains("gamma1"));

    let singular = dpo_sim(
        dir.path(),
        &["spectrum", "--preset", "fig3", "--eta", "0", "--omega-min", "0", "--omega-max", "0", "--omega-points", "1"],
    );
    assert_eq!(code(&singular), 3);

    let missing = dpo_sim(dir.path(), &["spectrum", "--config", "nope.toml"]);
    assert_eq!(code(&missing), 4);

    let unwritable = dpo_sim(dir.path(), &["spectrum", "--preset", "fig3", "--omega-points", "3", "-o", "no/such/dir/x.csv"]);
    assert_eq!(code(&unwritable), 4);

    let unknown_preset = dpo_sim(dir.path(), &["stability", "--preset", "fig7"]);
    assert_eq!(code(&unknown_preset), 2);

    let threads = Command::new(env!("CARGO_BIN_EXE_dpo-sim"))
        .args(["stability", "--preset", "fig3"])
        .env("DPO_SIM_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(code(&threads), 2);
}

#[test]
fn config_errors_name_the_problem() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("typo.toml"), "schema_version = 1\n\n[model]\ngamm1 = 2.0\ngamma2 = 1.0\n").unwrap();
    let out = dpo_sim(dir.path(), &["stability", "--config", "typo.toml"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("gamm1") && stderr(&out).contains("line 4"), "{}", stderr(&out));

    fs::write(
        dir.path().join("both.toml"),
        "schema_version = 1\n\n[model]\ngamma1 = 1.0\ngamma2 = 1.0\n\n[pump]\nepsilon_abs = 0.1\n\n[delay]\ntau = 1.0\nscale_s = 0.5\n",
    )
    .unwrap();
    let out = dpo_sim(dir.path(), &["stability", "--config", "both.toml"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("delay"), "{}", stderr(&out));

    fs::write(dir.path().join("v9.toml"), "schema_version = 9\n").unwrap();
    let out = dpo_sim(dir.path(), &["stability", "--config", "v9.toml"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("schema_version 9"));
}

#[test]
fn command_line_overrides_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dpo_sim(dir.path(), &["spectrum", "--preset", "fig3", "--gamma3", "0.25", "--omega-points", "3"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("# gamma3 = 0.25"));
}

fn result_line(text: &str) -> String {
    text.lines().find(|l| l.starts_with("result ")).expect("machine-readable line").to_string()
}

#[test]
fn stability_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let fig3 = dpo_sim(dir.path(), &["stability", "--preset", "fig3"]);
    assert_eq!(code(&fig3), 0);
    let line = result_line(&stdout(&fig3));
    assert!(line.contains("verdict=marginal") && line.contains("stable=1"), "{line}");

    let point_p = dpo_sim(dir.path(), &["stability", "--preset", "fig5-g3", "--with-oracle"]);
    let line = result_line(&stdout(&point_p));
    assert!(line.contains("verdict=stable") && line.contains("delay_independent=0"), "{line}");
    assert!(!line.contains("root=na"));

    // no feedback: stable iff |eps| < G = 1
    for (eps, verdict) in [("0.9", "verdict=stable"), ("1.1", "verdict=unstable")] {
        let out = dpo_sim(dir.path(), &["stability", "--gamma1", "0", "--gamma2", "2", "--epsilon-abs", eps, "--tau", "1.3"]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        assert!(result_line(&stdout(&out)).contains(verdict));
    }
}

#[test]
fn generic_phase_points_to_the_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["stability", "--gamma1", "2", "--gamma2", "2", "--epsilon-abs", "0.5", "--tau", "1"];
    let out = dpo_sim(dir.path(), &args);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("--with-oracle"));

    let mut with = args.to_vec();
    with.push("--with-oracle");
    let out = dpo_sim(dir.path(), &with);
    assert_eq!(code(&out), 0);
    assert!(result_line(&stdout(&out)).contains("method=oracle"));
}

#[test]
fn stability_map_presets_and_single_cell() {
    let dir = tempfile::tempdir().unwrap();
    let out = dpo_sim(dir.path(), &["stability-map", "--preset", "fig2a-map", "-o", "a.csv"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let map = fs::read_to_string(dir.path().join("a.csv")).unwrap();
    assert_eq!(rows(&map).len(), 100 * 101);
    let boundary = fs::read_to_string(dir.path().join("a-boundary.csv")).unwrap();
    let xs = column(&boundary, "gamma1_tau");
    let alphas = column(&boundary, "alpha_tilde_boundary");
    for (x, a) in xs.iter().zip(&alphas) {
        if *x < 1.0 {
            assert!((a - 2.0).abs() < 0.05, "x = {x}: {a}");
        }
    }

    let out = dpo_sim(dir.path(), &["stability-map", "--preset", "fig2a-map", "--interference", "destructive", "-o", "b.csv"]);
    assert_eq!(code(&out), 0);
    let boundary = fs::read_to_string(dir.path().join("b-boundary.csv")).unwrap();
    assert!(column(&boundary, "alpha_tilde_boundary").iter().all(|a| a.abs() < 0.05));

    fs::write(
        dir.path().join("one.toml"),
        "schema_version = 1\n\n[map]\ninterference = \"constructive\"\ngamma1_tau_min = 0.5\ngamma1_tau_max = 0.5\n\
         gamma1_tau_points = 1\nalpha_min = 1.0\nalpha_max = 1.0\nalpha_points = 1\n",
    )
    .unwrap();
    let out = dpo_sim(dir.path(), &["stability-map", "--config", "one.toml", "-o", "one.csv"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let one = rows(&fs::read_to_string(dir.path().join("one.csv")).unwrap());
    assert_eq!(one.len(), 1);
    assert_eq!(one[0][3], "1");
}

#[test]
fn dde_classifies_and_writes_a_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = dpo_sim(dir.path(), &["dde", "--preset", "fig5-g3", "-o", "t.csv"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("classification: decaying"));
    let trace = fs::read_to_string(dir.path().join("t.csv")).unwrap();
    assert!(trace.lines().any(|l| l == "t,re_v1,im_v1,norm"));

    // destructive loop with nothing else: the feedback term vanishes on a constant state
    let out = dpo_sim(dir.path(), &["dde", "--gamma1", "2", "--gamma2", "0", "--epsilon-abs", "0", "--scale-S", "0.5", "--delta", "0"]);
    assert_eq!(code(&out), 0);
    assert!(stderr(&out).contains("classification: marginal"));
    // printed with 12 significant digits
    let norms = column(&stdout(&out), "norm");
    assert!(norms.iter().all(|n| (n - 2f64.sqrt()).abs() < 1e-11));

    let out = dpo_sim(dir.path(), &["dde", "--preset", "fig5-g3", "--dt", "10"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn verify_passes_and_catches_faults() {
    let dir = tempfile::tempdir().unwrap();
    let out = dpo_sim(dir.path(), &["verify"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("0 failed"));

    let out = dpo_sim(dir.path(), &["verify", "--inject-fault", "anomalous-coupling"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).lines().any(|l| l.starts_with("bogoliubov-identity") && l.contains("FAIL")));

    let out = dpo_sim(dir.path(), &["verify", "--inject-fault", "interference-mapping"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).lines().any(|l| l.starts_with("stability-sign-agreement") && l.contains("FAIL")));
}
