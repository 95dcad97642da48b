use std::process::Command;

fn craftsynth(args: &[&str]) -> std::process::Output {
    let out = Command::new(env!("CARGO_BIN_EXE_craftsynth")).args(args).output().unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn json_stdout(args: &[&str]) -> serde_json::Value {
    serde_json::from_slice(&craftsynth(args).stdout).unwrap()
}

#[test]
fn synth_rz_meets_eps() {
    let v = json_stdout(&["synth", "--rz", "0.7", "--eps", "1e-2"]);
    assert!(v["d_diamond_float"].as_f64().unwrap() <= 1e-2);
    assert!(v["tcount"].as_u64().unwrap() > 0);
}

#[test]
fn synth_reads_target_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("h.json");
    let r = std::f64::consts::FRAC_1_SQRT_2;
    std::fs::write(&target, format!("[[[{r},0],[{r},0]],[[{r},0],[{m},0]]]", m = -r)).unwrap();
    let out = dir.path().join("out.json");
    craftsynth(&["synth", "--target-json", target.to_str().unwrap(), "--eps", "1e-3", "--out", out.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["tcount"].as_u64(), Some(0));
}

#[test]
fn craft_pauli_succeeds() {
    let v = json_stdout(&["craft", "--constraint", "pauli", "--eps", "1e-2", "--haar-seed", "3"]);
    assert_eq!(v["solution"]["success"].as_bool(), Some(true));
}

#[test]
fn whitenoise_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("wn.csv");
    craftsynth(&["whitenoise", "--p", "1e-3", "--layers", "20", "--seeds", "3", "--out", out.to_str().unwrap()]);
    let text = std::fs::read_to_string(out).unwrap();
    assert_eq!(text.lines().next(), Some("#schema=v1"));
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn sweep_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"kind":"fig1_accuracy","eps":[1e-2],"c":[7],"R":[1],"instances":2,"pipeline":"direct"}"#)
        .unwrap();
    craftsynth(&["sweep", "--config", cfg.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()]);
    for name in ["fig1_accuracy.csv", "fig1_accuracy.json", "fig1_accuracy_summary.json"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
}

#[test]
fn overhead_defaults_to_depolarizing() {
    let v = json_stdout(&["overhead", "--rate", "1e-3", "--layers", "100"]);
    assert!(v["total"].as_f64().unwrap() > 1.0);
}

#[test]
fn overhead_takes_ratio_list() {
    let v = json_stdout(&["overhead", "--rate", "4.8e-9", "--layers", "1e8", "--method", "ed_pec", "--ratios", "0,0,1"]);
    assert!((v["total"].as_f64().unwrap() - 6.82).abs() < 0.01);
}
