//! Black-box checks of the batch CLI: exit codes, artifact layout, seed
//! precedence, and byte-level determinism of every emitted file.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ajbf::harness::{FAILURES_HEADER, RESULTS_HEADER};

const BIN: &str = env!("CARGO_BIN_EXE_ajbf");

/// Spec used by most tests: two trials, both schemes, two sweep points on a
/// deliberately tiny scenario so each invocation finishes in well under a
/// second.
const TINY_SPEC: &str = r#"
version = 1
name = "tiny"
trials = 2
base_seed = 9
schemes = ["ao-ajhbf", "wmmse"]
record_runtime = false

[[sweeps]]
axis = "m-per-ap"
values = [2, 4]

[scenario]
aps = 2
ues = 2
jammers = 1
ap_antennas = 4
ap_rf_chains = 2
ue_antennas = 2
ue_rf_chains = 1
jammer_antennas = 2
ue_paths = 2
jammer_paths = 2
p_max_watts = 4.0
noise_watts = 1e-3
sinr_threshold = 1.0

[scenario.large_scale]
model = "fixed"
gain = 1e-2

[estimation]
quantizer_bits = 4
n_stat = 4
"#;

struct Workspace {
    _dir: tempfile::TempDir,
    spec: PathBuf,
    out: PathBuf,
}

fn workspace(spec_text: &str) -> Workspace {
    let dir = tempfile::tempdir().expect("tempdir");
    let spec = dir.path().join("spec.toml");
    std::fs::write(&spec, spec_text).expect("write spec");
    let out = dir.path().join("out");
    Workspace { spec, out, _dir: dir }
}

fn run_cli(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env_remove("AJBF_SEED");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("spawn ajbf")
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}

fn seed_column(results_csv: &Path) -> Vec<u64> {
    let text = String::from_utf8(read(results_csv)).expect("utf8");
    text.lines()
        .skip(1)
        .map(|line| line.split(',').nth(4).expect("seed column").parse().expect("seed"))
        .collect()
}

#[test]
fn run_emits_complete_artifacts_with_stable_schema() {
    let ws = workspace(TINY_SPEC);
    let out = run_cli(
        &["run", ws.spec.to_str().unwrap(), "--out-dir", ws.out.to_str().unwrap()],
        &[],
    );
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let results = read(&ws.out.join("results.csv"));
    let text = String::from_utf8(results).expect("utf8");
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(RESULTS_HEADER));
    // trials x schemes x sweep values data rows.
    assert_eq!(lines.count(), 2 * 2 * 2);

    let failures = String::from_utf8(read(&ws.out.join("failures.csv"))).expect("utf8");
    assert_eq!(failures.lines().next(), Some(FAILURES_HEADER));
    assert_eq!(failures.lines().count(), 1, "no failures expected");

    let manifest: serde_json::Value =
        serde_json::from_str(&String::from_utf8(read(&ws.out.join("manifest.json"))).unwrap())
            .expect("manifest json");
    assert_eq!(manifest["trials"].as_u64(), Some(2));
    assert_eq!(manifest["base_seed"].as_u64(), Some(9));
    assert_eq!(manifest["quantizer_alpha"].as_f64(), Some(0.990503));
    assert_eq!(manifest["scheme_trials"].as_u64(), Some(8));

    let summary: serde_json::Value =
        serde_json::from_str(&String::from_utf8(read(&ws.out.join("summary.json"))).unwrap())
            .expect("summary json");
    assert_eq!(summary["points"].as_array().map(Vec::len), Some(4));

    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("results.csv"), "stdout lists artifacts: {stdout}");
}

#[test]
fn reruns_are_byte_identical_even_across_thread_counts() {
    let ws = workspace(TINY_SPEC);
    let base = ws.out.to_str().unwrap().to_string();
    for (dir, threads) in [("a", None), ("b", None), ("c", Some("2"))] {
        let out_dir = format!("{base}-{dir}");
        let mut args =
            vec!["run", ws.spec.to_str().unwrap(), "--out-dir", &out_dir];
        if let Some(t) = threads {
            args.extend(["--threads", t]);
        }
        let out = run_cli(&args, &[]);
        assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    }
    for file in ["results.csv", "summary.json", "manifest.json"] {
        let a = read(&PathBuf::from(format!("{base}-a")).join(file));
        let b = read(&PathBuf::from(format!("{base}-b")).join(file));
        let c = read(&PathBuf::from(format!("{base}-c")).join(file));
        assert_eq!(a, b, "{file} differs between identical reruns");
        assert_eq!(a, c, "{file} differs across thread counts");
    }
}

#[test]
fn seed_precedence_is_flag_then_env_then_spec() {
    let ws = workspace(TINY_SPEC);
    let spec = ws.spec.to_str().unwrap();
    let base = ws.out.to_str().unwrap().to_string();

    let cases: &[(&str, Vec<&str>, &[(&str, &str)], u64)] = &[
        ("spec", vec![], &[], 9),
        ("flag", vec!["--seed", "42"], &[], 42),
        ("env", vec![], &[("AJBF_SEED", "43")], 43),
        ("both", vec!["--seed", "42"], &[("AJBF_SEED", "43")], 42),
    ];
    for (tag, extra, envs, expected) in cases {
        let out_dir = format!("{base}-{tag}");
        let mut args = vec!["run", spec, "--out-dir", &out_dir];
        args.extend(extra.iter().copied());
        let out = run_cli(&args, envs);
        assert!(out.status.success(), "{tag}: {}", String::from_utf8_lossy(&out.stderr));
        let seeds = seed_column(&PathBuf::from(&out_dir).join("results.csv"));
        let lo = *seeds.iter().min().expect("rows");
        assert_eq!(lo, *expected, "{tag}: lowest seed should be the base seed");
        assert!(
            seeds.iter().all(|s| (*s - expected) < 2),
            "{tag}: seeds {seeds:?} should cover base..base+trials"
        );
    }
}

#[test]
fn malformed_seed_env_is_rejected() {
    let ws = workspace(TINY_SPEC);
    let out = run_cli(
        &["run", ws.spec.to_str().unwrap(), "--out-dir", ws.out.to_str().unwrap()],
        &[("AJBF_SEED", "not-a-number")],
    );
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("error:") && stderr.contains("AJBF_SEED"), "stderr: {stderr}");
}

#[test]
fn summarize_reproduces_the_run_summary_byte_for_byte() {
    let ws = workspace(TINY_SPEC);
    let out_dir = ws.out.to_str().unwrap();
    let out = run_cli(&["run", ws.spec.to_str().unwrap(), "--out-dir", out_dir], &[]);
    assert!(out.status.success());

    let redo = ws._dir.path().join("redo");
    let out = run_cli(
        &[
            "summarize",
            ws.out.join("results.csv").to_str().unwrap(),
            "--out-dir",
            redo.to_str().unwrap(),
        ],
        &[],
    );
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        read(&ws.out.join("summary.json")),
        read(&redo.join("summary.json")),
        "summarize must reproduce the run's summary exactly"
    );
}

#[test]
fn plot_reproduces_the_run_charts_byte_for_byte() {
    let ws = workspace(TINY_SPEC);
    let out_dir = ws.out.to_str().unwrap();
    let out = run_cli(&["run", ws.spec.to_str().unwrap(), "--out-dir", out_dir], &[]);
    assert!(out.status.success());
    let svgs: Vec<PathBuf> = std::fs::read_dir(&ws.out)
        .expect("read out dir")
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "svg"))
        .collect();
    assert!(!svgs.is_empty(), "run should emit at least one chart");

    let redo = ws._dir.path().join("redo");
    let out = run_cli(
        &[
            "plot",
            ws.out.join("summary.json").to_str().unwrap(),
            "--out-dir",
            redo.to_str().unwrap(),
        ],
        &[],
    );
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    for svg in svgs {
        let name = svg.file_name().unwrap();
        // SVG charts parse as XML and survive the round trip unchanged.
        let bytes = read(&svg);
        roxmltree::Document::parse(std::str::from_utf8(&bytes).expect("utf8 svg"))
            .expect("well-formed svg");
        assert_eq!(bytes, read(&redo.join(name)), "{name:?} differs");
    }
}

#[test]
fn preset_flag_fills_in_a_scenario_but_never_overrides_one() {
    // Without a [scenario] table the preset flag selects the baseline.
    let minimal = r#"
version = 1
name = "preset-pick"
trials = 1
base_seed = 3
schemes = ["ao-ajhbf"]
record_runtime = false

[[sweeps]]
axis = "m-per-ap"
values = [16]
"#;
    let ws = workspace(minimal);
    let out = run_cli(
        &[
            "run",
            ws.spec.to_str().unwrap(),
            "--out-dir",
            ws.out.to_str().unwrap(),
            "--preset",
            "desk",
        ],
        &[],
    );
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let manifest: serde_json::Value =
        serde_json::from_str(&String::from_utf8(read(&ws.out.join("manifest.json"))).unwrap())
            .expect("manifest");
    assert_eq!(manifest["preset"].as_str(), Some("desk"));
    assert_eq!(manifest["scenario"]["ues"].as_u64(), Some(5));

    // With an explicit [scenario] table the flag must be refused.
    let ws2 = workspace(TINY_SPEC);
    let out = run_cli(
        &[
            "run",
            ws2.spec.to_str().unwrap(),
            "--out-dir",
            ws2.out.to_str().unwrap(),
            "--preset",
            "desk",
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("error:"), "stderr: {stderr}");

    // Unknown preset names are rejected up front.
    let out = run_cli(
        &[
            "run",
            ws.spec.to_str().unwrap(),
            "--out-dir",
            ws.out.to_str().unwrap(),
            "--preset",
            "bogus",
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unreadable_spec_and_malformed_spec_exit_with_one() {
    let out = run_cli(&["run", "/nonexistent/spec.toml"], &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));

    let ws = workspace("version = 1\nname = \"broken\"\ntrials = 0\n");
    let out = run_cli(&["run", ws.spec.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));
}

#[test]
fn widespread_trial_failures_exit_with_two() {
    // An absurd shadowing spread overflows every link gain, so each scheme
    // run fails its numerical guard and the run trips the failure budget.
    let broken = TINY_SPEC.replace(
        "[scenario.large_scale]\nmodel = \"fixed\"\ngain = 1e-2",
        "[scenario.large_scale]\nmodel = \"path-loss\"\nref_gain_db = -30.5\nexponent_db_per_decade = 36.7\nshadowing_std_db = 1e5",
    );
    assert!(broken.contains("path-loss"), "replacement must have applied");
    let ws = workspace(&broken);
    let out = run_cli(
        &["run", ws.spec.to_str().unwrap(), "--out-dir", ws.out.to_str().unwrap()],
        &[],
    );
    assert_eq!(out.status.code(), Some(2), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("failed"));

    let failures = String::from_utf8(read(&ws.out.join("failures.csv"))).expect("utf8");
    assert_eq!(failures.lines().next(), Some(FAILURES_HEADER));
    assert!(failures.lines().count() > 1, "failure rows must be recorded");
}
