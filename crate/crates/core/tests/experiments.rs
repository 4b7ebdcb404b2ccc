use oplip::config::RunConfig;
use oplip::experiments::{periodic_counterexample, run_config, ExperimentReport};
use oplip::{MpConfig, ScalarFunction};

fn run(name: &str, params: &[(&str, &str)]) -> ExperimentReport {
    let mut cfg = RunConfig::new("experiment");
    cfg.set("name", name);
    for (k, v) in params {
        cfg.set(k, v);
    }
    run_config(&cfg).unwrap()
}

#[test]
fn periodic_estimates_track_toeplitz_slope() {
    let cfg = MpConfig { restarts: 8, ..MpConfig::default() };
    let rep = periodic_counterexample(&ScalarFunction::exp_2pi_i(), 0.25, &[8, 16, 32], 0.75, &cfg).unwrap();
    assert!(rep.summary.stat("slope_gap").unwrap() <= 0.05);
    assert!(rep.summary.stat("max_proportionality_defect").unwrap() <= 1e-12);
    assert!(rep.spot_checks_pass());
}

#[test]
fn summaries_are_recomputable_from_records() {
    for (name, params) in [
        ("holder-weak", vec![("dims", "8,12"), ("trials", "30")]),
        ("lipschitz-ratio", vec![("dims", "8,12"), ("trials", "30"), ("p", "0.5")]),
        ("toeplitz-growth", vec![("n-list", "4,8,16"), ("m", "64")]),
        ("quasicommutator", vec![("trials", "5")]),
    ] {
        let rep = run(name, &params);
        assert_eq!(rep.recompute_summary().unwrap(), rep.summary, "{name}");
        assert!(rep.spot_checks_pass(), "{name}");
        assert_eq!(rep.trials_jsonl().unwrap().lines().count(), rep.records.len());
        assert_eq!(rep.trials_csv().unwrap().lines().count(), rep.records.len() + 1);
    }
}

#[test]
fn ensemble_spot_checks_cover_five_percent() {
    let rep = run("holder-weak", &[("dims", "8"), ("trials", "100")]);
    assert_eq!(rep.spot_checks.len(), 5);
    assert_eq!(rep.artifacts.len(), 10);
}

#[test]
fn seeds_change_records_but_not_shape() {
    let a = run("quasicommutator", &[("trials", "4"), ("seed", "1")]);
    let b = run("quasicommutator", &[("trials", "4"), ("seed", "2")]);
    assert_eq!(a.records.len(), b.records.len());
    assert_ne!(a.records, b.records);
    let c = run("quasicommutator", &[("trials", "4"), ("seed", "1")]);
    assert_eq!(a.records, c.records);
}
