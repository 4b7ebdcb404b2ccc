//! Counterexample growth curves: the Toeplitz family `1/(eps + m(j-k))` and
//! divided differences of a periodic function on shifted integer grids.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::report::{fit_loglog, Artifact, ExperimentReport, SpotCheck, Summary, TrialRecord};
use super::{difference_spectra, PERIODIC, PERIODIC_PAIRS, TOEPLITZ_GROWTH};
use crate::error::{Error, Result};
use crate::function::ScalarFunction;
use crate::matrix::{c, CMatrix, C64};
use crate::rng;
use crate::schur::{divided_difference_matrix, mp_lower_bound_warm, MpConfig, MultiplierEstimate};
use crate::spectral::{p_sharp, singular_values, HermitianOperator};

/// `{1/(eps + m(j-k))}_{j,k<n}`.
pub fn toeplitz_family(n: usize, epsilon: f64, m: u64) -> CMatrix {
    let m = m as f64;
    CMatrix::from_fn(n, n, |j, k| c(1.0 / (epsilon + m * (j as f64 - k as f64)), 0.0))
}

/// `||{1/(eps + m(j-k))}||_p / n`.
pub fn toeplitz_ratio(n: usize, epsilon: f64, m: u64, p: f64) -> Result<f64> {
    Ok(singular_values(&toeplitz_family(n, epsilon, m))?.schatten(p) / n as f64)
}

fn check_n_list(n_list: &[usize]) -> Result<()> {
    if n_list.is_empty() || n_list.contains(&0) {
        return Err(Error::InvalidInput("n_list must be a nonempty list of positive sizes".into()));
    }
    Ok(())
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::pre(format!("epsilon must lie in (0,1), got {epsilon}")));
    }
    Ok(())
}

/// Records `r(n) = ||T o X_{n,m}||_p / n` and its value at `2m`.
pub fn toeplitz_growth(p: f64, epsilon: f64, n_list: &[usize], m: u64) -> Result<ExperimentReport> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::UnsupportedIndex(p));
    }
    check_epsilon(epsilon)?;
    check_n_list(n_list)?;
    let n_max = *n_list.iter().max().unwrap_or(&1);
    if m < n_max as u64 {
        return Err(Error::pre(format!("m = {m} must be at least max(n_list) = {n_max}")));
    }
    // The doubled family needs 2m(n-1) to be an exact float.
    let exact = m
        .checked_mul(2)
        .and_then(|m2| m2.checked_mul(n_max as u64 - 1))
        .is_some_and(|v| v <= 1 << 53);
    if !exact {
        return Err(Error::InvalidInput(format!("overflow: m = {m} is too large for n = {n_max}")));
    }

    let records: Vec<TrialRecord> = n_list
        .par_iter()
        .enumerate()
        .map(|(i, &n)| -> Result<TrialRecord> {
            let r = toeplitz_ratio(n, epsilon, m, p)?;
            let r2 = toeplitz_ratio(n, epsilon, 2 * m, p)?;
            let limit = (n as f64).powf(1.0 / p) / (epsilon * n as f64);
            Ok(TrialRecord::new(i, format!("n={n}"))
                .with("n", n as f64)
                .with("r", r)
                .with("r_doubled", r2)
                .with("doubling_change", (r2 - r).abs() / r)
                .with("limit", limit)
                .with("limit_deviation", (r - limit).abs() / limit))
        })
        .collect::<Result<_>>()?;

    let params = BTreeMap::from([
        ("p".to_string(), p.to_string()),
        ("epsilon".to_string(), epsilon.to_string()),
        ("n-list".to_string(), join(n_list)),
        ("m".to_string(), m.to_string()),
    ]);
    ExperimentReport::assemble(TOEPLITZ_GROWTH, params, 0, records, Vec::new())
}

pub(crate) fn summarize_toeplitz(records: &[TrialRecord]) -> Result<Summary> {
    let mut s = Summary::default();
    let n = column(records, "n")?;
    let r = column(records, "r")?;
    if n.len() >= 2 {
        s.fits.insert("r".into(), fit_loglog(&n, &r)?);
    }
    let (imin, imax) = arg_extremes(&n);
    s.set("r_ratio", r[imax] / r[imin]);
    let change = column(records, "doubling_change")?;
    let max_change = change.iter().fold(0.0f64, |a, &b| a.max(b));
    s.set("max_doubling_change", max_change);
    s.set("doubling_converged", if max_change <= 0.01 { 1.0 } else { 0.0 });
    s.set("max_limit_deviation", column(records, "limit_deviation")?.iter().fold(0.0f64, |a, &b| a.max(b)));
    Ok(s)
}

/// Probe moduli for `X_{n,m}` compressions: indicators of `{0, m, 2m, ...}`
/// for `m = 1, 2, 4, ...` below `n`.
pub fn compression_probes(n: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut out = Vec::new();
    let mut m = 1;
    while m < n || (m == 1 && n == 1) {
        let v: Vec<f64> = (0..n).map(|j| if j % m == 0 { 1.0 } else { 0.0 }).collect();
        out.push((v.clone(), v));
        m *= 2;
    }
    out
}

struct PeriodicPoint {
    dd: CMatrix,
    estimate: MultiplierEstimate,
    record: TrialRecord,
}

fn periodic_point(
    f: &ScalarFunction,
    epsilon: f64,
    n: usize,
    p: f64,
    offset: C64,
    cfg: &MpConfig,
    index: usize,
) -> Result<PeriodicPoint> {
    let lambda: Vec<f64> = (0..n).map(|j| j as f64 + epsilon).collect();
    let mu: Vec<f64> = (0..n).map(|k| k as f64).collect();
    let dd = divided_difference_matrix(f, &lambda, &mu, None)?.entries;
    let mut defect = 0.0f64;
    for j in 0..n {
        for k in 0..n {
            let expected = offset / c(epsilon + j as f64 - k as f64, 0.0);
            defect = defect.max(((dd[(j, k)] - expected) / expected).norm());
        }
    }
    let local = MpConfig { seed: rng::derive_seed(cfg.seed, n as u64), ..cfg.clone() };
    let estimate = mp_lower_bound_warm(&dd, p, &local, &compression_probes(n))?;
    let spectrum = singular_values(&dd)?;
    let upper = spectrum.schatten(p_sharp(p)?);
    let diag_probe = dd[(0, 0)].norm();
    let mut record = TrialRecord::new(index, format!("n={n}"));
    record.seed = Some(local.seed);
    record.set("n", n as f64);
    record.set("estimate", estimate.value);
    record.set("upper_psharp", upper);
    record.set("diag_probe", diag_probe);
    record.set("growth_vs_diag", estimate.value / diag_probe);
    record.set("proportionality_defect", defect);
    record.set("toeplitz_r", toeplitz_ratio(n, epsilon, 1, p)?);
    record.set("best_start", estimate.best_start as f64);
    record.set("converged", if estimate.converged { 1.0 } else { 0.0 });
    Ok(PeriodicPoint { dd, estimate, record })
}

fn periodic_preconditions(f: &ScalarFunction, epsilon: f64, n_list: &[usize], p: f64) -> Result<C64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::UnsupportedIndex(p));
    }
    check_epsilon(epsilon)?;
    check_n_list(n_list)?;
    if let Some(period) = f.tag().period {
        if (period - 1.0).abs() > 1e-12 {
            return Err(Error::pre(format!("`{}` has period {period}; rescale it to period 1", f.name())));
        }
    }
    let offset = f.eval_checked(epsilon)? - f.eval_checked(0.0)?;
    if offset.norm() <= 1e-12 * f.eval(0.0).norm().max(1.0) {
        return Err(Error::DegenerateOffset(epsilon));
    }
    Ok(offset)
}

/// Certified `m_p` lower bounds for `f^[1]` on `lambda_j = j + eps`,
/// `mu_k = k`, warm-started from the compression probes.
pub fn periodic_counterexample(
    f: &ScalarFunction,
    epsilon: f64,
    n_list: &[usize],
    p: f64,
    cfg: &MpConfig,
) -> Result<ExperimentReport> {
    let offset = periodic_preconditions(f, epsilon, n_list, p)?;
    let mut records = Vec::new();
    let mut spot_checks = Vec::new();
    let mut artifacts = Vec::new();
    for (i, &n) in n_list.iter().enumerate() {
        let point = periodic_point(f, epsilon, n, p, offset, cfg, i)?;
        let bytes = crate::matrix::to_binary(&point.dd);
        let stored = crate::matrix::from_binary(&bytes)?;
        spot_checks.push(SpotCheck::new(format!("n={n}"), point.estimate.value, point.estimate.recompute(&stored)?));
        artifacts.push(Artifact { name: format!("n-{n:04}-dd.oplm"), bytes });
        artifacts.push(Artifact { name: format!("n-{n:04}-witness.txt"), bytes: point.estimate.to_record().into_bytes() });
        records.push(point.record);
    }
    let params = BTreeMap::from([
        ("f".to_string(), f.name().to_string()),
        ("p".to_string(), p.to_string()),
        ("epsilon".to_string(), epsilon.to_string()),
        ("n-list".to_string(), join(n_list)),
        ("restarts".to_string(), cfg.restarts.to_string()),
    ]);
    let mut report = ExperimentReport::assemble(PERIODIC, params, cfg.seed, records, Vec::new())?;
    report.spot_checks = spot_checks;
    report.artifacts = artifacts;
    Ok(report)
}

/// Factor per doubling of `n` between consecutive records.
fn doubling_factors(n: &[f64], v: &[f64]) -> Vec<f64> {
    n.windows(2)
        .zip(v.windows(2))
        .map(|(nn, vv)| (vv[1] / vv[0]).powf(1.0 / (nn[1] / nn[0]).log2()))
        .collect()
}

pub(crate) fn summarize_periodic(records: &[TrialRecord]) -> Result<Summary> {
    let mut s = Summary::default();
    let n = column(records, "n")?;
    let est = column(records, "estimate")?;
    let tr = column(records, "toeplitz_r")?;
    if n.len() >= 2 {
        let fe = fit_loglog(&n, &est)?;
        let ft = fit_loglog(&n, &tr)?;
        s.set("slope_gap", (fe.slope - ft.slope).abs());
        s.fits.insert("estimate".into(), fe);
        s.fits.insert("toeplitz_r".into(), ft);
        let factors = doubling_factors(&n, &est);
        s.set("min_doubling_factor", factors.iter().fold(f64::INFINITY, |a, &b| a.min(b)));
        s.set("max_doubling_factor", factors.iter().fold(0.0f64, |a, &b| a.max(b)));
    }
    s.set(
        "max_proportionality_defect",
        column(records, "proportionality_defect")?.iter().fold(0.0f64, |a, &b| a.max(b)),
    );
    s.set("max_estimate", est.iter().fold(0.0f64, |a, &b| a.max(b)));
    Ok(s)
}

/// Lipschitz ratios for the pairs `A = diag(lambda, mu)`,
/// `B = A + t [[0, xi eta^T], [eta xi^T, 0]]` built from the periodic
/// witnesses; to first order in `t` the ratio is the witness value.
pub fn periodic_pairs(
    f: &ScalarFunction,
    epsilon: f64,
    n_list: &[usize],
    p: f64,
    coupling: f64,
    cfg: &MpConfig,
) -> Result<ExperimentReport> {
    let offset = periodic_preconditions(f, epsilon, n_list, p)?;
    if !(coupling > 0.0 && coupling.is_finite()) {
        return Err(Error::pre(format!("coupling must be positive, got {coupling}")));
    }
    let mut records = Vec::new();
    let mut spot_checks = Vec::new();
    let mut artifacts = Vec::new();
    for (i, &n) in n_list.iter().enumerate() {
        let point = periodic_point(f, epsilon, n, p, offset, cfg, i)?;
        let nodes: Vec<f64> = (0..n).map(|j| j as f64 + epsilon).chain((0..n).map(|k| k as f64)).collect();
        let a = HermitianOperator::from_real_diagonal(&nodes)?;
        let mut bm = a.entries().clone();
        for j in 0..n {
            for k in 0..n {
                let v = point.estimate.xi[j] * point.estimate.eta[k] * coupling;
                bm[(j, n + k)] = v;
                bm[(n + k, j)] = v.conj();
            }
        }
        let b = HermitianOperator::new(bm)?;
        let rho = pair_ratio(f, &a, &b, p)?;
        let mut record = point.record;
        record.set("rho", rho);
        record.set("rho_over_estimate", rho / point.estimate.value);
        records.push(record);

        let a2 = HermitianOperator::new(crate::matrix::from_binary(&crate::matrix::to_binary(a.entries()))?)?;
        let b2 = HermitianOperator::new(crate::matrix::from_binary(&crate::matrix::to_binary(b.entries()))?)?;
        spot_checks.push(SpotCheck::new(format!("n={n}"), rho, pair_ratio(f, &a2, &b2, p)?));
        artifacts.push(Artifact { name: format!("n-{n:04}-a.oplm"), bytes: crate::matrix::to_binary(a.entries()) });
        artifacts.push(Artifact { name: format!("n-{n:04}-b.oplm"), bytes: crate::matrix::to_binary(b.entries()) });
    }
    let params = BTreeMap::from([
        ("f".to_string(), f.name().to_string()),
        ("p".to_string(), p.to_string()),
        ("epsilon".to_string(), epsilon.to_string()),
        ("n-list".to_string(), join(n_list)),
        ("coupling".to_string(), coupling.to_string()),
        ("restarts".to_string(), cfg.restarts.to_string()),
    ]);
    let mut report = ExperimentReport::assemble(PERIODIC_PAIRS, params, cfg.seed, records, Vec::new())?;
    report.spot_checks = spot_checks;
    report.artifacts = artifacts;
    Ok(report)
}

fn pair_ratio(f: &ScalarFunction, a: &HermitianOperator, b: &HermitianOperator, p: f64) -> Result<f64> {
    let (x, y) = difference_spectra(f, a, b)?;
    Ok(x.schatten(p) / y.schatten(p))
}

pub(crate) fn summarize_pairs(records: &[TrialRecord]) -> Result<Summary> {
    let mut s = summarize_periodic(records)?;
    let n = column(records, "n")?;
    let rho = column(records, "rho")?;
    if n.len() >= 2 {
        s.fits.insert("rho".into(), fit_loglog(&n, &rho)?);
        let factors = doubling_factors(&n, &rho);
        s.set("min_rho_doubling_factor", factors.iter().fold(f64::INFINITY, |a, &b| a.min(b)));
        s.set("rho_monotone", if rho.windows(2).all(|w| w[1] > w[0]) { 1.0 } else { 0.0 });
    }
    s.set("max_rho", rho.iter().fold(0.0f64, |a, &b| a.max(b)));
    Ok(s)
}

pub(crate) fn column(records: &[TrialRecord], key: &str) -> Result<Vec<f64>> {
    records
        .iter()
        .map(|r| {
            r.get(key)
                .ok_or_else(|| Error::InvalidInput(format!("record {} lacks `{key}`", r.index)))
        })
        .collect()
}

fn arg_extremes(v: &[f64]) -> (usize, usize) {
    let mut lo = 0;
    let mut hi = 0;
    for (i, x) in v.iter().enumerate() {
        if *x < v[lo] {
            lo = i;
        }
        if *x > v[hi] {
            hi = i;
        }
    }
    (lo, hi)
}

pub(crate) fn join(values: &[usize]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}
