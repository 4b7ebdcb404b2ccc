//! Experiment reports: per-trial records, recomputable summaries and the
//! on-disk replay bundle.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};

/// One row of an experiment. `values` holds finite numbers only, so the JSON
/// form round-trips exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: usize,
    pub group: String,
    pub seed: Option<u64>,
    pub discarded: bool,
    pub values: BTreeMap<String, f64>,
}

impl TrialRecord {
    pub fn new(index: usize, group: impl Into<String>) -> Self {
        Self { index, group: group.into(), seed: None, discarded: false, values: BTreeMap::new() }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.set(key, value);
        self
    }

    /// Non-finite values are dropped and flagged with a `<key>_infinite` entry.
    pub fn set(&mut self, key: &str, value: f64) {
        if value.is_finite() {
            self.values.insert(key.to_string(), value);
        } else {
            self.values.insert(format!("{key}_infinite"), 1.0);
        }
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied()
    }
}

/// Least-squares line through `(ln x, ln y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    /// 95% band `slope -+ t * stderr` (Student t with `points - 2` dof).
    pub band: (f64, f64),
    pub points: usize,
}

fn t_quantile_975(dof: usize) -> f64 {
    const TABLE: [f64; 10] = [12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228];
    match dof {
        0 => f64::INFINITY,
        d if d <= TABLE.len() => TABLE[d - 1],
        d if d <= 20 => 2.086,
        d if d <= 30 => 2.042,
        _ => 1.96,
    }
}

pub fn fit_loglog(x: &[f64], y: &[f64]) -> Result<SlopeFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidInput("log-log fit needs at least two paired points".into()));
    }
    if x.iter().chain(y).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::InvalidInput("log-log fit needs positive finite data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("log-log fit needs distinct abscissae".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let dof = lx.len() - 2;
    let stderr = if dof == 0 {
        0.0
    } else {
        let rss: f64 = lx.iter().zip(&ly).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
        (rss / dof as f64 / sxx).sqrt()
    };
    let half = if dof == 0 { 0.0 } else { t_quantile_975(dof) * stderr };
    Ok(SlopeFit { slope, intercept, stderr, band: (slope - half, slope + half), points: lx.len() })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub stats: BTreeMap<String, f64>,
    pub fits: BTreeMap<String, SlopeFit>,
}

impl Summary {
    pub fn stat(&self, key: &str) -> Option<f64> {
        self.stats.get(key).copied()
    }

    pub fn fit(&self, key: &str) -> Option<&SlopeFit> {
        self.fits.get(key)
    }

    pub(crate) fn set(&mut self, key: impl Into<String>, value: f64) {
        if value.is_finite() {
            self.stats.insert(key.into(), value);
        }
    }
}

/// A stored per-trial value re-derived from serialized inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpotCheck {
    pub label: String,
    pub recorded: f64,
    pub recomputed: f64,
    pub passed: bool,
}

impl SpotCheck {
    pub fn new(label: impl Into<String>, recorded: f64, recomputed: f64) -> Self {
        let passed = (recorded - recomputed).abs() <= 1e-12 * recorded.abs().max(1.0);
        Self { label: label.into(), recorded, recomputed, passed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub package: String,
    pub version: String,
    pub os: String,
    pub arch: String,
    pub threads: usize,
}

impl Fingerprint {
    pub fn current() -> Self {
        Self {
            package: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            os: std::env::consts::OS.into(),
            arch: std::env::consts::ARCH.into(),
            threads: rayon::current_num_threads(),
        }
    }
}

/// A named binary or text artifact written next to the report.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub id: String,
    pub params: BTreeMap<String, String>,
    pub master_seed: u64,
    pub records: Vec<TrialRecord>,
    pub summary: Summary,
    pub discarded: usize,
    pub warnings: Vec<String>,
    pub spot_checks: Vec<SpotCheck>,
    pub fingerprint: Fingerprint,
    #[serde(skip)]
    pub artifacts: Vec<Artifact>,
}

impl ExperimentReport {
    pub(crate) fn assemble(
        id: &str,
        params: BTreeMap<String, String>,
        master_seed: u64,
        records: Vec<TrialRecord>,
        warnings: Vec<String>,
    ) -> Result<Self> {
        let summary = super::summarize(id, &records)?;
        let discarded = records.iter().filter(|r| r.discarded).count();
        Ok(Self {
            id: id.to_string(),
            params,
            master_seed,
            records,
            summary,
            discarded,
            warnings,
            spot_checks: Vec::new(),
            fingerprint: Fingerprint::current(),
            artifacts: Vec::new(),
        })
    }

    /// Rebuilds the summary from the per-trial records alone.
    pub fn recompute_summary(&self) -> Result<Summary> {
        super::summarize(&self.id, &self.records)
    }

    pub fn spot_checks_pass(&self) -> bool {
        self.spot_checks.iter().all(|s| s.passed)
    }

    /// Per-trial records, one JSON object per line. This is the byte stream
    /// compared on replay.
    pub fn trials_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r)?);
            out.push('\n');
        }
        Ok(out)
    }

    /// One CSV row per trial; value columns are the union of record keys.
    pub fn trials_csv(&self) -> Result<String> {
        let keys: BTreeSet<&str> = self.records.iter().flat_map(|r| r.values.keys().map(String::as_str)).collect();
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["index", "group", "seed", "discarded"];
        header.extend(keys.iter().copied());
        w.write_record(&header).map_err(csv_err)?;
        for r in &self.records {
            let mut row = vec![
                r.index.to_string(),
                r.group.clone(),
                r.seed.map(|s| s.to_string()).unwrap_or_default(),
                r.discarded.to_string(),
            ];
            row.extend(keys.iter().map(|k| r.values.get(*k).map(|v| v.to_string()).unwrap_or_default()));
            w.write_record(&row).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Numerical(format!("csv: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::Numerical(format!("csv: {e}")))
    }

    /// Flat `key  value` table of the summary, headed by id and seed.
    pub fn summary_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "experiment  {}", self.id);
        let _ = writeln!(out, "master_seed {}", self.master_seed);
        let _ = writeln!(out, "trials      {} ({} discarded)", self.records.len(), self.discarded);
        for (k, v) in &self.summary.stats {
            let _ = writeln!(out, "{k:<32} {v:.6e}");
        }
        for (k, f) in &self.summary.fits {
            let _ = writeln!(
                out,
                "{:<32} {:.4} +- {:.4} (95% band [{:.4}, {:.4}], {} points)",
                format!("fit:{k}"),
                f.slope,
                f.stderr,
                f.band.0,
                f.band.1,
                f.points
            );
        }
        for s in &self.spot_checks {
            let _ = writeln!(out, "spot-check {:<21} {}", s.label, if s.passed { "ok" } else { "MISMATCH" });
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        out
    }

    /// Writes `config.txt`, `report.json`, `trials.jsonl`, `trials.csv` and
    /// the archived artifacts under `artifacts/`.
    pub fn write_bundle(&self, dir: impl AsRef<Path>, config: &RunConfig) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        fs::write(dir.join(CONFIG_FILE), config.to_text())?;
        fs::write(dir.join("report.json"), serde_json::to_string_pretty(self)?)?;
        fs::write(dir.join(TRIALS_FILE), self.trials_jsonl()?)?;
        fs::write(dir.join("trials.csv"), self.trials_csv()?)?;
        if !self.artifacts.is_empty() {
            let sub = dir.join("artifacts");
            fs::create_dir_all(&sub)?;
            for a in &self.artifacts {
                fs::write(sub.join(&a.name), &a.bytes)?;
            }
        }
        Ok(())
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Numerical(format!("csv: {e}"))
}

pub const CONFIG_FILE: &str = "config.txt";
pub const TRIALS_FILE: &str = "trials.jsonl";

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayOutcome {
    pub identical: bool,
    pub records: usize,
    /// Zero-based line of the first differing record.
    pub first_difference: Option<usize>,
    pub report: ExperimentReport,
}

/// Re-runs the experiment stored in `dir` and compares per-trial records
/// byte for byte.
pub fn replay_bundle(dir: impl AsRef<Path>) -> Result<ReplayOutcome> {
    let dir = dir.as_ref();
    let config = RunConfig::from_text(&fs::read_to_string(dir.join(CONFIG_FILE))?)?;
    let stored = fs::read_to_string(dir.join(TRIALS_FILE))?;
    let report = super::run_config(&config)?;
    let fresh = report.trials_jsonl()?;
    let first_difference = if stored == fresh {
        None
    } else {
        let mut a = stored.lines();
        let mut b = fresh.lines();
        let mut i = 0;
        loop {
            match (a.next(), b.next()) {
                (Some(x), Some(y)) if x == y => i += 1,
                _ => break Some(i),
            }
        }
    };
    Ok(ReplayOutcome {
        identical: first_difference.is_none(),
        records: report.records.len(),
        first_difference,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loglog_fit_recovers_power_law() {
        let x = [4.0, 8.0, 16.0, 32.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(1.5)).collect();
        let f = fit_loglog(&x, &y).unwrap();
        assert!((f.slope - 1.5).abs() < 1e-12 && f.stderr < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
        assert!(fit_loglog(&[1.0], &[1.0]).is_err());
        assert!(fit_loglog(&[1.0, 2.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn noisy_fit_band_contains_slope() {
        let x = [1.0, 2.0, 4.0, 8.0, 16.0];
        let y = [1.0, 2.2, 3.8, 8.5, 15.0];
        let f = fit_loglog(&x, &y).unwrap();
        assert!(f.band.0 < f.slope && f.slope < f.band.1);
        assert!(f.stderr > 0.0);
    }

    #[test]
    fn non_finite_values_are_flagged() {
        let mut r = TrialRecord::new(0, "g");
        r.set("a", f64::INFINITY);
        r.set("b", 2.0);
        assert_eq!(r.get("a"), None);
        assert_eq!(r.get("a_infinite"), Some(1.0));
        let line = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<TrialRecord>(&line).unwrap(), r);
    }
}
