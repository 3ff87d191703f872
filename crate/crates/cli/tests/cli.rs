use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn intratp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_intratp"))
        .args(args)
        .env_remove("INTRATP_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn synth_case(dir: &Path, name: &str) -> PathBuf {
    let out = intratp(&["synth", "--name", name, "--out", dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    PathBuf::from(String::from_utf8(out.stdout).unwrap().trim())
}

fn tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(
                    p.strip_prefix(dir).unwrap().to_string_lossy().into_owned(),
                    fs::read(&p).unwrap(),
                );
            }
        }
    }
    out
}

fn stats_means(dir: &Path) -> Vec<f64> {
    fs::read_to_string(dir.join("stats.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn synth_writes_a_loadable_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_case(dir.path(), "fig6");
    assert!(manifest.ends_with("manifest.toml"));
    intratp_core::load_scenario(&manifest).unwrap();

    let random = tempfile::tempdir().unwrap();
    let out = intratp(&[
        "synth",
        "--seed",
        "3",
        "--nodes",
        "2",
        "--tps",
        "6",
        "--out",
        random.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let s = intratp_core::load_scenario(&random.path().join("manifest.toml")).unwrap();
    assert_eq!(s.network.nodes().len(), 2);
    assert_eq!(s.tps(), 6);
}

#[test]
fn mirrored_case_has_zero_mean_need_under_s2() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_case(&dir.path().join("scenario"), "fig4_5");
    let out_dir = dir.path().join("out");
    let out = intratp(&[
        "run",
        "--manifest",
        manifest.to_str().unwrap(),
        "--setup",
        "S2",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stderr(&out).contains("A: max"));
    for mean in stats_means(&out_dir) {
        assert!(mean <= 1e-3, "{mean}");
    }
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["setup"], "S2");
    assert_eq!(meta["use_trm"], true);
}

#[test]
fn trm_setup_does_not_raise_mean_need() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("scenario");
    let out = intratp(&[
        "synth",
        "--seed",
        "12",
        "--nodes",
        "3",
        "--tps",
        "8",
        "--out",
        scenario.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let manifest = scenario.join("manifest.toml");
    let mut totals = Vec::new();
    for setup in ["S1", "S2"] {
        let out_dir = dir.path().join(setup);
        let out = intratp(&[
            "run",
            "--manifest",
            manifest.to_str().unwrap(),
            "--setup",
            setup,
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        let meta: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(out_dir.join("metadata.json")).unwrap()).unwrap();
        totals.push(meta["objective"].as_f64().unwrap());
    }
    assert!(totals[1] <= totals[0] * (1.0 + 1e-6), "{totals:?}");
}

#[test]
fn stages_compose_and_runs_repeat_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("scenario");
    let out = intratp(&[
        "synth",
        "--seed",
        "5",
        "--nodes",
        "3",
        "--tps",
        "6",
        "--out",
        scenario.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let manifest = scenario.join("manifest.toml");
    let m = manifest.to_str().unwrap();

    let run = |name: &str| {
        let o = dir.path().join(name);
        let out = intratp(&["run", "--manifest", m, "--setup", "S3", "--out", o.to_str().unwrap()]);
        assert!(out.status.success(), "{}", stderr(&out));
        tree(&o)
    };
    let (a, b) = (run("a"), run("b"));
    assert_eq!(a, b);

    let staged = dir.path().join("staged");
    for stage in ["disaggregate", "net", "analyze"] {
        let out = intratp(&[
            stage,
            "--manifest",
            m,
            "--setup",
            "S3",
            "--out",
            staged.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{stage}: {}", stderr(&out));
    }
    assert_eq!(tree(&staged), a);
}

#[test]
fn out_dir_falls_back_to_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_case(&dir.path().join("scenario"), "fig3");
    let env_out = dir.path().join("from-env");
    let out = Command::new(env!("CARGO_BIN_EXE_intratp"))
        .args(["run", "--manifest", manifest.to_str().unwrap()])
        .env("INTRATP_OUT_DIR", &env_out)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(env_out.join("stats.csv").exists());

    let out = intratp(&["run", "--manifest", manifest.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("INTRATP_OUT_DIR"));
}

#[test]
fn missing_network_file_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_case(dir.path(), "fig4_5");
    fs::remove_file(dir.path().join("network.toml")).unwrap();
    let out = intratp(&[
        "run",
        "--manifest",
        manifest.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("network.toml"), "{}", stderr(&out));
}

#[test]
fn bad_rows_are_reported_with_their_position() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_case(dir.path(), "fig6");
    let demand = dir.path().join("demand.csv");
    let text = fs::read_to_string(&demand).unwrap().replacen("A,2,260", "A,2,-260", 1);
    fs::write(&demand, text).unwrap();
    let out = intratp(&[
        "run",
        "--manifest",
        manifest.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("demand.csv") && err.contains("row 3"), "{err}");
}

#[test]
fn infeasible_schedules_exit_with_code_3() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_case(dir.path(), "fig4_5");
    let network = dir.path().join("network.toml");
    let text = fs::read_to_string(&network).unwrap();
    let narrowed = text
        .replace("ntc_fwd = 1000.0", "ntc_fwd = 10.0")
        .replace("ntc_rev = 1000.0", "ntc_rev = 10.0");
    assert_ne!(text, narrowed);
    fs::write(&network, narrowed).unwrap();
    let out = intratp(&[
        "run",
        "--manifest",
        manifest.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("infeasible"));
}

#[test]
fn show_config_prints_effective_settings() {
    let out = intratp(&["run", "--show-config"]);
    assert!(out.status.success());
    let defaults: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(defaults["alpha"], 0.001);
    assert_eq!(defaults["max_iterations"], 100);

    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_case(dir.path(), "fig3");
    let out = intratp(&[
        "run",
        "--show-config",
        "--manifest",
        manifest.to_str().unwrap(),
        "--setup",
        "S4",
        "--use-trm",
        "false",
        "--alpha",
        "0.002",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let cfg: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(cfg["setup"], "S4");
    assert_eq!(cfg["netting"]["use_trm"], false);
    assert_eq!(cfg["netting"]["alpha"], 0.002);
    assert_eq!(cfg["ramp"]["hydro"]["rate"], 15.0);
    assert!(!dir.path().join("stats.csv").exists());
}

#[test]
fn bad_arguments_are_rejected() {
    assert_eq!(
        intratp(&["run", "--setup", "S9", "--show-config"]).status.code(),
        Some(2)
    );
    let dir = tempfile::tempdir().unwrap();
    let out = intratp(&["synth", "--name", "fig9", "--out", dir.path().to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("fig9"));
}
