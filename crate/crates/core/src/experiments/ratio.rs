//! Ensemble ratio experiments: Lipschitz ratios, weak Hölder ratios and
//! partial-sum dominance.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use super::ensemble::{Ensemble, Pair};
use super::report::{Artifact, ExperimentReport, SpotCheck, Summary, TrialRecord};
use super::{difference_spectra, HOLDER_WEAK, LIPSCHITZ_RATIO, SUBMAJORIZATION};
use crate::besov::{besov_seminorm_wavelet, finite_difference_besov, DifferenceGrid, SampledFunction};
use crate::error::{Error, Result};
use crate::function::ScalarFunction;
use crate::matrix::{from_binary, to_binary};
use crate::rng;
use crate::spectral::{p_sharp, HermitianOperator, SingularSpectrum};
use crate::wavelet::{daubechies_system, default_order, wavelet_coefficients, Interval, Quadrature};

/// Trials with `||A - B||_p` below this are discarded.
pub const DISCARD_BELOW: f64 = 1e-12;

/// Every `SPOT_STRIDE`-th trial is archived and re-derived (5%).
pub const SPOT_STRIDE: usize = 20;

/// Wavelet settings for the Besov part of the envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeConfig {
    /// Daubechies order; `None` picks [`default_order`].
    pub order: Option<usize>,
    pub j_range: (i32, i32),
    pub quadrature: Quadrature,
}

impl Default for EnvelopeConfig {
    fn default() -> Self {
        Self { order: None, j_range: (-2, 6), quadrature: Quadrature::default() }
    }
}

/// `||f'||_inf + |f|_{B^{1/p}_{p#,p}}` on the spectral range.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub derivative_sup: f64,
    pub seminorm: f64,
    pub warnings: Vec<String>,
}

impl Envelope {
    /// Infinite when either part is.
    pub fn total(&self) -> f64 {
        self.derivative_sup + self.seminorm
    }
}

pub fn lipschitz_envelope(f: &ScalarFunction, p: f64, range: (f64, f64), cfg: &EnvelopeConfig) -> Result<Envelope> {
    let ps = p_sharp(p)?;
    let order = cfg.order.unwrap_or_else(|| default_order(p));
    let sys = daubechies_system(order)?;
    let bx = Interval::new(range.0, range.1)?;
    let coeffs = wavelet_coefficients(|t| f.eval(t), &sys, cfg.j_range, bx, cfg.quadrature)?;
    let rep = besov_seminorm_wavelet(&coeffs, 1.0 / p, ps, p)?;
    let d = f.derivative_sup(range.0, range.1);
    Ok(Envelope {
        derivative_sup: if d.is_finite() { d } else { f64::INFINITY },
        seminorm: rep.value,
        warnings: rep.warnings,
    })
}

/// Hölder-Zygmund seminorm `B^{alpha + 1/p#}_{p#,inf}` by finite differences
/// on the range widened by one unit on each side.
pub fn holder_seminorm(f: &ScalarFunction, alpha: f64, p: f64, range: (f64, f64)) -> Result<f64> {
    let ps = p_sharp(p)?;
    let s = alpha + 1.0 / ps;
    let order = s.floor() as usize + 1;
    let dom = Interval::new(range.0 - 1.0, range.1 + 1.0)?;
    let sampled = SampledFunction::from_fn(|t| f.eval(t), dom, 8192)?;
    Ok(finite_difference_besov(&sampled, s, ps, order, DifferenceGrid::default())?.value)
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(Error::UnsupportedIndex(p))
    }
}

type TrialFn<'a> = dyn Fn(&HermitianOperator, &HermitianOperator) -> Result<Option<BTreeMap<String, f64>>> + Sync + 'a;

/// Runs `eval` over every ensemble; `key` is the value spot-checked against
/// archived matrices.
fn run_ensembles(
    id: &str,
    ensembles: &[Ensemble],
    key: &str,
    eval: &TrialFn<'_>,
    params: BTreeMap<String, String>,
    master_seed: u64,
    warnings: Vec<String>,
) -> Result<ExperimentReport> {
    let mut records = Vec::new();
    let mut spot_checks = Vec::new();
    let mut artifacts = Vec::new();
    for ens in ensembles {
        let outcomes: Vec<(TrialRecord, Option<Pair>)> = (0..ens.count)
            .into_par_iter()
            .map(|t| -> Result<(TrialRecord, Option<Pair>)> {
                let pair = ens.draw(t)?;
                let mut rec = TrialRecord::new(0, format!("dim={}", ens.dim));
                rec.seed = Some(rng::derive_seed(ens.master_seed, t as u64));
                rec.set("dim", ens.dim as f64);
                rec.set("trial", t as f64);
                rec.set("contraction", pair.contraction);
                match eval(&pair.a, &pair.b)? {
                    Some(values) => {
                        for (k, v) in values {
                            rec.set(&k, v);
                        }
                    }
                    None => rec.discarded = true,
                }
                let keep = (t % SPOT_STRIDE == 0).then_some(pair);
                Ok((rec, keep))
            })
            .collect::<Result<_>>()?;
        for (mut rec, pair) in outcomes {
            rec.index = records.len();
            if let Some(pair) = pair {
                let t = rec.get("trial").unwrap_or(0.0) as usize;
                let (ba, bb) = (to_binary(pair.a.entries()), to_binary(pair.b.entries()));
                let a = HermitianOperator::new(from_binary(&ba)?)?;
                let b = HermitianOperator::new(from_binary(&bb)?)?;
                let label = format!("dim={} trial={t}", ens.dim);
                if let (Some(recorded), Some(values)) = (rec.get(key), eval(&a, &b)?) {
                    let recomputed = values.get(key).copied().unwrap_or(f64::NAN);
                    spot_checks.push(SpotCheck::new(label, recorded, recomputed));
                }
                artifacts.push(Artifact { name: format!("dim-{:04}-trial-{t:06}-a.oplm", ens.dim), bytes: ba });
                artifacts.push(Artifact { name: format!("dim-{:04}-trial-{t:06}-b.oplm", ens.dim), bytes: bb });
            }
            records.push(rec);
        }
    }
    let mut report = ExperimentReport::assemble(id, params, master_seed, records, warnings)?;
    report.spot_checks = spot_checks;
    report.artifacts = artifacts;
    Ok(report)
}

fn base_params(f: &ScalarFunction, p: f64, ensembles: &[Ensemble]) -> BTreeMap<String, String> {
    let mut m = BTreeMap::from([
        ("f".to_string(), f.name().to_string()),
        ("p".to_string(), p.to_string()),
    ]);
    if let Some(e) = ensembles.first() {
        m.insert("spectrum".into(), e.spectrum_law.to_string());
        m.insert("perturbation".into(), e.perturbation_law.to_string());
        m.insert("trials".into(), e.count.to_string());
    }
    m.insert("dims".into(), ensembles.iter().map(|e| e.dim.to_string()).collect::<Vec<_>>().join(","));
    m
}

fn common_range(ensembles: &[Ensemble]) -> Result<(f64, f64)> {
    let first = ensembles.first().ok_or_else(|| Error::InvalidInput("no ensembles".into()))?;
    if ensembles.iter().any(|e| e.range() != first.range()) {
        return Err(Error::InvalidInput("ensembles must share a spectral range".into()));
    }
    Ok(first.range())
}

/// `rho = ||f(A) - f(B)||_p / ||A - B||_p` per trial, with the envelope
/// `||f'||_inf + |f|_{B^{1/p}_{p#,p}}`.
pub fn lipschitz_ratio(
    f: &ScalarFunction,
    ensembles: &[Ensemble],
    p: f64,
    env: &EnvelopeConfig,
    master_seed: u64,
) -> Result<ExperimentReport> {
    check_p(p)?;
    let range = common_range(ensembles)?;
    let envelope = lipschitz_envelope(f, p, range, env)?;
    let total = envelope.total();
    let eval = move |a: &HermitianOperator, b: &HermitianOperator| -> Result<Option<BTreeMap<String, f64>>> {
        let (x, y) = difference_spectra(f, a, b)?;
        let ny = y.schatten(p);
        if ny < DISCARD_BELOW {
            return Ok(None);
        }
        let rho = x.schatten(p) / ny;
        let mut v = BTreeMap::from([
            ("ratio".to_string(), rho),
            ("norm_difference".to_string(), ny),
            ("rank_difference".to_string(), rank(&y) as f64),
            ("envelope".to_string(), total),
        ]);
        v.insert("ratio_over_envelope".into(), rho / total);
        Ok(Some(v))
    };
    let mut params = base_params(f, p, ensembles);
    params.insert("seed".into(), master_seed.to_string());
    run_ensembles(LIPSCHITZ_RATIO, ensembles, "ratio", &eval, params, master_seed, envelope.warnings)
}

/// `w = ||f(A) - f(B)||_{p/alpha, inf} / ||A - B||_p^alpha` per trial.
pub fn holder_weak_ratio(
    f: &ScalarFunction,
    alpha: f64,
    ensembles: &[Ensemble],
    p: f64,
    master_seed: u64,
) -> Result<ExperimentReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::pre(format!("alpha must lie in (0,1), got {alpha}")));
    }
    check_p(p)?;
    let range = common_range(ensembles)?;
    let seminorm = holder_seminorm(f, alpha, p, range)?;
    if !seminorm.is_finite() {
        return Err(Error::pre(format!("Hölder-Zygmund seminorm of `{}` is not finite", f.name())));
    }
    let eval = move |a: &HermitianOperator, b: &HermitianOperator| -> Result<Option<BTreeMap<String, f64>>> {
        let (x, y) = difference_spectra(f, a, b)?;
        let ny = y.schatten(p);
        if ny < DISCARD_BELOW {
            return Ok(None);
        }
        let w = x.weak(p / alpha) / ny.powf(alpha);
        Ok(Some(BTreeMap::from([
            ("w".to_string(), w),
            ("norm_difference".to_string(), ny),
            ("seminorm".to_string(), seminorm),
            ("w_over_seminorm".to_string(), w / seminorm),
        ])))
    };
    let mut params = base_params(f, p, ensembles);
    params.insert("alpha".into(), alpha.to_string());
    params.insert("seed".into(), master_seed.to_string());
    run_ensembles(HOLDER_WEAK, ensembles, "w", &eval, params, master_seed, Vec::new())
}

/// Smallest `C` with `sum_{k<=n} mu_k(X)^p <= C^p E^p sum_{k<=n} mu_k(Y)^p`
/// for all `n`, where `X = f(A) - f(B)`, `Y = A - B`.
pub fn submajorization_sweep(
    f: &ScalarFunction,
    ensembles: &[Ensemble],
    p: f64,
    env: &EnvelopeConfig,
    master_seed: u64,
) -> Result<ExperimentReport> {
    check_p(p)?;
    let range = common_range(ensembles)?;
    let envelope = lipschitz_envelope(f, p, range, env)?;
    let total = envelope.total();
    if !total.is_finite() {
        return Err(Error::pre(format!("envelope of `{}` is not finite", f.name())));
    }
    let eval = move |a: &HermitianOperator, b: &HermitianOperator| -> Result<Option<BTreeMap<String, f64>>> {
        let (x, y) = difference_spectra(f, a, b)?;
        if y.schatten(p) < DISCARD_BELOW {
            return Ok(None);
        }
        let sx = x.partial_pow_sums(p);
        let sy = y.partial_pow_sums(p);
        let len = sx.len().max(sy.len());
        let at = |v: &[f64], i: usize| v.get(i).or(v.last()).copied().unwrap_or(0.0);
        let worst = (0..len).map(|i| at(&sx, i) / at(&sy, i)).fold(0.0f64, f64::max);
        let ratio = worst.powf(1.0 / p);
        Ok(Some(BTreeMap::from([
            ("partial_sum_ratio".to_string(), ratio),
            ("envelope".to_string(), total),
            ("c_trial".to_string(), ratio / total),
        ])))
    };
    let mut params = base_params(f, p, ensembles);
    params.insert("seed".into(), master_seed.to_string());
    run_ensembles(SUBMAJORIZATION, ensembles, "partial_sum_ratio", &eval, params, master_seed, envelope.warnings)
}

fn rank(s: &SingularSpectrum) -> usize {
    s.values().iter().filter(|v| **v > 0.0).count()
}

/// Per-dimension maxima of `keys`, overall maxima and the drift
/// `max_d / min_d - 1` of the per-dimension maxima.
pub(crate) fn summarize_ensembles(records: &[TrialRecord], keys: &[&str]) -> Result<Summary> {
    let mut s = Summary::default();
    let dims: BTreeSet<u64> = records.iter().filter_map(|r| r.get("dim")).map(|d| d as u64).collect();
    s.set("trials", records.len() as f64);
    s.set("discarded", records.iter().filter(|r| r.discarded).count() as f64);
    for key in keys {
        let mut per_dim = Vec::new();
        for &d in &dims {
            let m = records
                .iter()
                .filter(|r| !r.discarded && r.get("dim") == Some(d as f64))
                .filter_map(|r| r.get(key))
                .fold(f64::NEG_INFINITY, f64::max);
            if m.is_finite() {
                s.set(format!("max_{key}@dim={d}"), m);
                per_dim.push(m);
            }
        }
        if let (Some(hi), Some(lo)) = (
            per_dim.iter().copied().reduce(f64::max),
            per_dim.iter().copied().reduce(f64::min),
        ) {
            s.set(format!("max_{key}"), hi);
            s.set(format!("drift_{key}"), hi / lo - 1.0);
        }
    }
    Ok(s)
}
