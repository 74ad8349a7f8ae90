use pdestream::harness::{
    aggregate_csv, load_data, metrics_csv, run_experiment_on, truth_residual, write_results, DataSource,
    ExperimentConfig, OnlineIdentifier, METRICS_HEADER,
};
use pdestream::sims::{simulate, NoiseScale, Problem};
use pdestream::tensor::snapshot;
use pdestream::Error;

fn short_ks(steps: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(Problem::Ks);
    cfg.sim.steps = steps;
    cfg.trials = 3;
    cfg.noise = vec![0.0, 0.01];
    cfg
}

// wall_ms is the only column allowed to differ between runs
fn without_timing(csv: &str) -> String {
    let col = METRICS_HEADER.iter().position(|h| *h == "wall_ms").unwrap();
    csv.lines()
        .map(|l| {
            let mut f: Vec<&str> = l.split(',').collect();
            f.remove(col);
            f.join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn offline_needs_a_full_window() {
    let mut cfg = short_ks(30);
    cfg.k_mem = 5;
    let clean = simulate(&cfg.sim).unwrap();
    let r = OnlineIdentifier::offline(&cfg.online_settings(), &clean[..4], None);
    assert!(matches!(r, Err(Error::NotReady { have: 4, need: 5 })));
    assert!(OnlineIdentifier::offline(&cfg.online_settings(), &clean[..5], None).is_ok());
}

#[test]
fn rows_contiguous_and_streaming_invariants() {
    let cfg = short_ks(80);
    let clean = simulate(&cfg.sim).unwrap();
    let res = run_experiment_on(&cfg, &clean).unwrap();
    assert_eq!(res.trials.len(), 6);
    assert!(res.failures.is_empty());
    for t in &res.trials {
        assert_eq!(t.rows.len(), 80 - cfg.k_mem + 1);
        assert_eq!(t.rows[0].step, cfg.k_mem as u64 - 1);
        assert!(t.rows.windows(2).all(|w| w[1].step == w[0].step + 1 && w[1].t > w[0].t));
        assert_eq!(t.online_lstsq_calls, 0);
        assert!(t.peak_feature_dp <= t.memory_budget_dp);
        assert!(t.rows.iter().all(|r| r.weights.len() == 21));
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let mut cfg = short_ks(60);
    let clean = simulate(&cfg.sim).unwrap();
    cfg.threads = 1;
    let a = run_experiment_on(&cfg, &clean).unwrap();
    cfg.threads = 3;
    let b = run_experiment_on(&cfg, &clean).unwrap();
    let key = |r: &pdestream::harness::TrialResult| (r.sigma.to_bits(), r.trial);
    let mut ta: Vec<_> = a.trials.iter().collect();
    let mut tb: Vec<_> = b.trials.iter().collect();
    ta.sort_by_key(|t| key(t));
    tb.sort_by_key(|t| key(t));
    for (x, y) in ta.iter().zip(&tb) {
        assert_eq!(
            without_timing(&metrics_csv(&a.library, &x.rows)),
            without_timing(&metrics_csv(&b.library, &y.rows))
        );
    }
    // distinct trials see distinct noise
    let noisy: Vec<_> = ta.iter().filter(|t| t.sigma > 0.0).collect();
    assert_ne!(noisy[0].rows.last().unwrap().weights, noisy[1].rows.last().unwrap().weights);
}

#[test]
fn single_trial_aggregate_is_the_trial() {
    let mut cfg = short_ks(50);
    cfg.trials = 1;
    cfg.noise = vec![0.001];
    let clean = simulate(&cfg.sim).unwrap();
    let res = run_experiment_on(&cfg, &clean).unwrap();
    let (s, agg) = &res.aggregates[0];
    assert_eq!(*s, 0.001);
    let t = &res.trials[0];
    assert_eq!(agg.len(), t.rows.len());
    for (a, r) in agg.iter().zip(&t.rows) {
        assert_eq!((a.step, a.t, a.mean_tpr, a.mean_e2), (r.step, r.t, r.tpr, r.e2));
        assert!(a.wavespeed.is_none());
    }
}

#[test]
fn csv_schema_and_written_files() {
    let mut cfg = short_ks(40);
    cfg.trials = 2;
    cfg.noise = vec![0.0];
    let clean = simulate(&cfg.sim).unwrap();
    let res = run_experiment_on(&cfg, &clean).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files = write_results(&cfg, &res, dir.path()).unwrap();
    let names: Vec<String> = files
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    for n in [
        "ks_k21_noise0_trial000.csv",
        "ks_k21_noise0_trial001.csv",
        "ks_k21_noise0_aggregate.csv",
        "ks_k21_summary.csv",
        "config.txt",
    ] {
        assert!(names.iter().any(|x| x == n), "{n} missing from {names:?}");
    }
    let csv = std::fs::read_to_string(dir.path().join("ks_k21_noise0_trial000.csv")).unwrap();
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    assert_eq!(&header[..9], &METRICS_HEADER);
    assert_eq!(&header[9..], res.library.labels().iter().map(String::as_str).collect::<Vec<_>>());
    assert!(csv.lines().skip(1).all(|l| l.split(',').count() == header.len()));

    let back = ExperimentConfig::parse(&std::fs::read_to_string(dir.path().join("config.txt")).unwrap()).unwrap();
    assert_eq!(back, cfg);
    assert_eq!(aggregate_csv(&res.aggregates[0].1).lines().count(), 1 + res.trials[0].rows.len());
}

#[test]
fn directory_source_matches_simulation() {
    let cfg = short_ks(45);
    let clean = simulate(&cfg.sim).unwrap();
    let dir = tempfile::tempdir().unwrap();
    for f in &clean {
        snapshot::write(dir.path(), f).unwrap();
    }
    let mut from_dir = cfg.clone();
    from_dir.source = DataSource::Directory(dir.path().to_path_buf());
    let loaded = load_data(&from_dir).unwrap();
    assert_eq!(loaded.len(), clean.len());
    for (a, b) in loaded.iter().zip(&clean) {
        assert_eq!((a.step(), a.values()), (b.step(), b.values()));
        assert_eq!(a.time(), b.time());
    }
    let a = run_experiment_on(&cfg, &clean).unwrap();
    let b = run_experiment_on(&from_dir, &loaded).unwrap();
    assert_eq!(
        a.trials.iter().map(|t| t.rows.last().unwrap().weights.clone()).collect::<Vec<_>>(),
        b.trials.iter().map(|t| t.rows.last().unwrap().weights.clone()).collect::<Vec<_>>()
    );
}

#[test]
fn empty_directory_is_a_config_error() {
    let mut cfg = short_ks(40);
    let dir = tempfile::tempdir().unwrap();
    cfg.source = DataSource::Directory(dir.path().to_path_buf());
    assert!(matches!(load_data(&cfg), Err(Error::Config(_))));
}

#[test]
fn wave2d_aggregate_tracks_wavespeed() {
    let mut cfg = ExperimentConfig::new(Problem::Wave2d);
    cfg.sim.steps = 40;
    cfg.trials = 2;
    let clean = simulate(&cfg.sim).unwrap();
    assert!(truth_residual(&cfg, &clean).unwrap() < 1e-3);
    let res = run_experiment_on(&cfg, &clean).unwrap();
    for a in &res.aggregates[0].1 {
        let (c, mean, lo, hi) = a.wavespeed.unwrap();
        assert!(c > 0.0 && lo <= mean && mean <= hi);
    }
}

#[test]
fn running_noise_scale() {
    let mut cfg = short_ks(50);
    cfg.trials = 1;
    cfg.noise = vec![0.0, 0.01];
    let clean = simulate(&cfg.sim).unwrap();
    let a = run_experiment_on(&cfg, &clean).unwrap();
    cfg.noise_scale = NoiseScale::Running;
    let b = run_experiment_on(&cfg, &clean).unwrap();
    let last = |r: &pdestream::harness::ExperimentResult, s: f64| {
        r.trials.iter().find(|t| t.sigma == s).unwrap().rows.last().unwrap().weights.clone()
    };
    assert_eq!(last(&a, 0.0), last(&b, 0.0));
    assert_ne!(last(&a, 0.01), last(&b, 0.01));
    assert!(ExperimentConfig::parse("noise_scale = sometimes").is_err());
    assert_eq!(ExperimentConfig::parse(&cfg.to_text()).unwrap(), cfg);
}

#[test]
fn kernels_are_built_once() {
    for problem in [Problem::Ks, Problem::Wave2d] {
        let mut cfg = ExperimentConfig::new(problem);
        cfg.sim.steps = cfg.k_mem + 10;
        let clean = simulate(&cfg.sim).unwrap();
        let settings = cfg.online_settings();
        let (mut id, _) = OnlineIdentifier::offline(&settings, &clean[..cfg.k_mem], None).unwrap();
        let d = problem.dim();
        let ops = id.library().operator_count();
        let counts = |id: &OnlineIdentifier| {
            (
                id.temporal_kernels().cached_vector_count(),
                id.spatial_kernels().cached_kernel_count(),
                id.spatial_kernels().cached_transform_count(),
            )
        };
        let before = counts(&id);
        assert_eq!(before.0, ops + 1);
        assert_eq!(before.1, d * 5);
        for f in &clean[cfg.k_mem..] {
            id.step(f).unwrap();
        }
        assert_eq!(counts(&id), before);
    }
}

#[test]
fn offline_dominant_terms_are_the_true_support() {
    let cfg = short_ks(30);
    let clean = simulate(&cfg.sim).unwrap();
    let (id, _) = OnlineIdentifier::offline(&cfg.online_settings(), &clean, None).unwrap();
    let sys = id.system().unwrap();
    let w = id.weights();
    assert!(w.iter().filter(|v| **v != 0.0).count() > 3);
    let mut balance: Vec<(f64, usize)> = (0..w.len()).map(|k| ((sys.g.column(k) * w[k]).norm(), k)).collect();
    balance.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut top: Vec<usize> = balance[..3].iter().map(|x| x.1).collect();
    top.sort();
    let lib = id.library();
    let mut truth = vec![
        lib.column(0, 2, 1).unwrap(),
        lib.column(0, 4, 1).unwrap(),
        lib.column(0, 1, 2).unwrap(),
    ];
    truth.sort();
    assert_eq!(top, truth);
}
