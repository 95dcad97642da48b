use craftsynth::harness::{
    read_csv, run_and_write, run_experiment, write_csv, ExperimentConfig, ExperimentKind, Pipeline, RunRecord,
    SCHEMA_LINE,
};

fn records(cfg: &ExperimentConfig) -> Vec<RunRecord> {
    run_experiment(cfg).unwrap().into_iter().map(|t| t.record).collect()
}

fn csv_bytes(rows: &[RunRecord]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows).unwrap();
    buf
}

fn small_fig1() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Fig1Accuracy);
    cfg.eps = vec![1e-2];
    cfg.c = vec![3.0, 5.0, 7.0];
    cfg.bigr = vec![1, 3];
    cfg.instances = 10;
    cfg.base_seed = 31;
    cfg.pipeline = Pipeline::Direct;
    cfg
}

#[test]
fn csv_is_identical_across_thread_counts() {
    let mut cfg = small_fig1();
    cfg.c = vec![7.0];
    cfg.bigr = vec![1];
    cfg.instances = 4;
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| csv_bytes(&records(&cfg)))
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, csv_bytes(&records(&cfg)));
}

#[test]
fn fig1_failure_rate_shrinks_with_c_and_r() {
    let rows = records(&small_fig1());
    let fail_rate = |c: f64, r: usize| {
        let g: Vec<_> = rows.iter().filter(|x| x.c == Some(c) && x.bigr == Some(r)).collect();
        assert!(!g.is_empty());
        g.iter().filter(|x| !x.success).count() as f64 / g.len() as f64
    };
    for r in [1, 3] {
        assert!(fail_rate(3.0, r) >= fail_rate(5.0, r));
        assert!(fail_rate(5.0, r) >= fail_rate(7.0, r));
    }
    for c in [3.0, 5.0, 7.0] {
        assert!(fail_rate(c, 1) >= fail_rate(c, 3));
    }
}

#[test]
fn sweep_files_round_trip() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Whitenoise);
    cfg.eps = vec![0.0, 1e-2];
    cfg.instances = 3;
    cfg.whitenoise.layers = vec![50];
    let dir = tempfile::tempdir().unwrap();
    let report = run_and_write(&cfg, dir.path()).unwrap();
    assert_eq!(report.groups.len(), 2);

    let text = std::fs::read_to_string(dir.path().join("whitenoise.csv")).unwrap();
    assert_eq!(text.lines().next(), Some(SCHEMA_LINE));
    let back = read_csv(text.as_bytes()).unwrap();
    assert_eq!(back.len(), 6);
    assert_eq!(csv_bytes(&back), text.as_bytes());
    assert!(back.iter().all(|r| r.k_mean.is_some() && r.layers == Some(50)));

    for name in ["whitenoise.json", "whitenoise_summary.json"] {
        let v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join(name)).unwrap()).unwrap();
        assert!(!v.is_null());
    }
}
