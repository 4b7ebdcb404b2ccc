use std::path::Path;
use std::process::{Command, Output};

use oplip::experiments::ExperimentReport;
use oplip::matrix::{diag_real, identity, ones, write_matrix_binary, write_matrix_text};
use oplip::{rng, schatten_norm, weak_norm, SchattenIndex};

fn oplip(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oplip"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Value column of a `key  value` table.
fn field(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| {
            let mut it = l.split_whitespace();
            (it.next() == Some(key)).then(|| it.next().unwrap().parse().unwrap())
        })
        .unwrap_or_else(|| panic!("no `{key}` in\n{text}"))
}

#[test]
fn identity_half_norm_is_sixteen() {
    let dir = tempfile::tempdir().unwrap();
    write_matrix_text(dir.path().join("id.txt"), &identity(4)).unwrap();
    let o = oplip(&["norms", "id.txt", "--p", "0.5"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().nth(1).unwrap(), "0.5\t16\t16");
}

#[test]
fn stored_matrix_norms_match_library_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let m = rng::gaussian_matrix(&mut rng::stream(5, 0), 7, 5);
    write_matrix_binary(dir.path().join("m.oplm"), &m).unwrap();
    let o = oplip(&["norms", "m.oplm", "--p", "0.3,0.5,1,2,inf"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    for line in stdout(&o).lines().skip(1) {
        let cols: Vec<&str> = line.split('\t').collect();
        let p: f64 = cols[0].parse().unwrap();
        let s: f64 = cols[1].parse().unwrap();
        assert_eq!(s.to_bits(), schatten_norm(&m, SchattenIndex::new(p).unwrap()).unwrap().to_bits());
        if p.is_finite() {
            let w: f64 = cols[2].parse().unwrap();
            assert_eq!(w.to_bits(), weak_norm(&m, p).unwrap().to_bits());
        }
    }
}

#[test]
fn zero_index_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    write_matrix_text(dir.path().join("id.txt"), &identity(2)).unwrap();
    let o = oplip(&["norms", "id.txt", "--p", "0"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("p = 0"));
}

#[test]
fn malformed_matrix_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.txt"), "2 2\n1,0 0,0\n0,0 x,1\n").unwrap();
    let o = oplip(&["norms", "bad.txt"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn mp_closed_forms() {
    let dir = tempfile::tempdir().unwrap();
    write_matrix_text(dir.path().join("ones.txt"), &ones(8, 8)).unwrap();
    write_matrix_text(dir.path().join("diag.txt"), &diag_real(&[1.0, 2.0, 3.0])).unwrap();
    write_matrix_text(dir.path().join("seven.txt"), &diag_real(&[7.0])).unwrap();

    let o = oplip(&["mp", "ones.txt", "--p", "0.5"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!((field(&stdout(&o), "value") - 1.0).abs() <= 1e-6);

    let o = oplip(&["mp", "diag.txt", "--p", "0.5", "--seed", "3"], dir.path());
    assert!((field(&stdout(&o), "value") - 6.0).abs() <= 0.06);
    assert_eq!(field(&stdout(&o), "master_seed"), 3.0);

    let o = oplip(&["mp", "seven.txt", "--p", "0.5", "--format", "record"], dir.path());
    let rec = oplip::MultiplierEstimate::from_record(&stdout(&o)).unwrap();
    assert!((rec.value - 7.0).abs() < 1e-12);
}

#[test]
fn toeplitz_growth_bundle_has_slope() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("acc.conf"),
        "# acceptance configuration\np = 0.5\nepsilon = 0.5\nm = 1024\nn-list = 4,8,16,32,64\n",
    )
    .unwrap();
    let o = oplip(&["experiment", "toeplitz-growth", "--config", "acc.conf", "--out", "run"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("fit:r"));
    let rep = ExperimentReport::read_json(dir.path().join("run/report.json")).unwrap();
    let slope = rep.summary.fit("r").unwrap().slope;
    assert!((slope - 1.0).abs() <= 0.1, "{slope}");
    assert!(dir.path().join("run/trials.csv").exists());
}

#[test]
fn constant_periodic_function_exits_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let o = oplip(&["experiment", "periodic", "--f", "const:1", "--out", "x"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("degenerate offset"));
}

#[test]
fn unknown_experiment_lists_available() {
    let dir = tempfile::tempdir().unwrap();
    let o = oplip(&["experiment", "spectral-gap"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("holder-weak") && stderr(&o).contains("toeplitz-growth"));
}

#[test]
fn replay_is_byte_identical_and_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let run = [
        "experiment", "holder-weak", "--dims", "6,8", "--trials", "20", "--seed", "4", "--out", "hw",
    ];
    let o = oplip(&run, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let o = oplip(&["replay", "hw"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("identical"));

    let path = dir.path().join("hw/trials.jsonl");
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::write(&path, text.replacen("\"w\":", "\"w\":1e9,\"x\":", 1)).unwrap();
    let o = oplip(&["replay", "hw"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("record 0"));
}

#[test]
fn dry_run_prints_resolved_config_only() {
    let dir = tempfile::tempdir().unwrap();
    let o = oplip(&["experiment", "lipschitz-ratio", "--p", "0.5", "--dry-run", "--out", "never"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    let cfg = oplip::config::RunConfig::from_text(&text).unwrap();
    assert_eq!(cfg.get_str("p"), Some("0.5"));
    assert_eq!(cfg.get_str("trials"), Some("200"));
    assert_eq!(cfg.get_str("seed"), Some("0"));
    assert!(!dir.path().join("never").exists());

    let o = oplip(&["norms", "--p", "1", "--dry-run"], dir.path());
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("command = norms"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.conf"), "p = 0.5\ntrials = 7\n").unwrap();
    let o = oplip(&["experiment", "quasicommutator", "--config", "c.conf", "--trials", "3", "--dry-run"], dir.path());
    let cfg = oplip::config::RunConfig::from_text(&stdout(&o)).unwrap();
    assert_eq!(cfg.get_str("trials"), Some("3"));
    assert_eq!(cfg.get_str("p"), Some("0.5"));
}

#[test]
fn filter_and_toeplitz_bound() {
    let dir = tempfile::tempdir().unwrap();
    let o = oplip(&["filter", "--wavelet-N", "1", "--format", "record"], dir.path());
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    let h0 = v["h"][0].as_f64().unwrap();
    assert!((h0 - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);

    let o = oplip(&["toeplitz-bound", "--coeffs", "0:1,1:0.5,-1:0.5"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!((field(&stdout(&o), "bound") - 1.0).abs() < 1e-9);

    let o = oplip(&["filter", "--wavelet-N", "21"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn threads_flag_caps_parallelism() {
    let dir = tempfile::tempdir().unwrap();
    let o = oplip(&["experiment", "quasicommutator", "--trials", "2", "--threads", "1", "--format", "record", "--out", "q"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let rep: ExperimentReport = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(rep.fingerprint.threads, 1);
}
