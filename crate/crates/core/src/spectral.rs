//! Spectra, singular values, Schatten and weak quasi-norms, functional
//! calculus, submajorization and the cut projection.

use std::cmp::Ordering;
use std::sync::OnceLock;

use nalgebra::{DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{c, ensure_finite, ensure_same_shape, CMatrix, C64};

/// Nonincreasing singular values `mu(0) >= mu(1) >= ... >= 0`.
///
/// Indices past the stored length read as zero, so quasi-norm sums behave as
/// if the sequence were padded with zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularSpectrum {
    values: Vec<f64>,
}

impl SingularSpectrum {
    /// Sorts (descending) and takes absolute values.
    pub fn from_unsorted(mut values: Vec<f64>) -> Self {
        for v in values.iter_mut() {
            *v = v.abs();
        }
        values.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, k: usize) -> f64 {
        self.values.get(k).copied().unwrap_or(0.0)
    }

    /// `(sum_k mu(k)^p)^(1/p)`; `p = inf` gives `mu(0)`.
    pub fn schatten(&self, p: f64) -> f64 {
        lp_norm(&self.values, p)
    }

    /// `sum_k mu(k)^p`.
    pub fn pow_sum(&self, p: f64) -> f64 {
        self.values.iter().map(|v| v.powf(p)).sum()
    }

    /// `sup_n (n+1)^(1/p) mu(n)`.
    pub fn weak(&self, p: f64) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(n, v)| ((n + 1) as f64).powf(1.0 / p) * v)
            .fold(0.0, f64::max)
    }

    /// Running sums `sum_{k<=n} mu(k)^p` for `n = 0..len`.
    pub fn partial_pow_sums(&self, p: f64) -> Vec<f64> {
        let mut acc = 0.0;
        self.values
            .iter()
            .map(|v| {
                acc += v.powf(p);
                acc
            })
            .collect()
    }
}

/// `l_p` quasi-norm of a sequence of magnitudes, scaled by its maximum so a
/// single nonzero term is returned exactly.
pub fn lp_norm(values: &[f64], p: f64) -> f64 {
    let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if p.is_infinite() || max == 0.0 {
        return max;
    }
    let sum: f64 = values.iter().map(|v| (v.abs() / max).powf(p)).sum();
    max * sum.powf(1.0 / p)
}

/// Schatten index `p` in `(0, inf]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchattenIndex {
    p: f64,
}

impl SchattenIndex {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p <= 0.0 {
            return Err(Error::InvalidIndex(p));
        }
        Ok(Self { p })
    }

    pub fn infinity() -> Self {
        Self { p: f64::INFINITY }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Conjugate index `p/(1-p)` (`inf` at `p = 1`), defined for `p <= 1`.
    pub fn p_sharp(&self) -> Result<f64> {
        p_sharp(self.p)
    }
}

pub fn p_sharp(p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::UnsupportedIndex(p));
    }
    if p == 1.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(p / (1.0 - p))
    }
}

/// Singular value decomposition with nonincreasing singular values:
/// `m = u * diag(sigma) * v_adj`.
pub struct SortedSvd {
    pub u: CMatrix,
    pub sigma: Vec<f64>,
    pub v_adj: CMatrix,
}

pub fn sorted_svd(m: &CMatrix) -> Result<SortedSvd> {
    ensure_finite(m)?;
    let svd = m.clone().svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v)) => (u, v),
        _ => return Err(Error::Numerical("SVD did not converge".into())),
    };
    let sv = svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].partial_cmp(&sv[a]).unwrap_or(Ordering::Equal));
    let u = CMatrix::from_fn(u.nrows(), order.len(), |j, k| u[(j, order[k])]);
    let v_adj = CMatrix::from_fn(order.len(), v_t.ncols(), |j, k| v_t[(order[j], k)]);
    let sigma = order.iter().map(|&i| sv[i]).collect();
    Ok(SortedSvd { u, sigma, v_adj })
}

pub fn singular_values(m: &CMatrix) -> Result<SingularSpectrum> {
    ensure_finite(m)?;
    if m.is_empty() {
        return Ok(SingularSpectrum { values: Vec::new() });
    }
    let sv = m.singular_values();
    let mut spectrum = SingularSpectrum::from_unsorted(sv.iter().copied().collect());
    let cutoff = rank_cutoff(m.nrows().max(m.ncols()), spectrum.get(0));
    for v in spectrum.values.iter_mut() {
        if *v <= cutoff {
            *v = 0.0;
        }
    }
    Ok(spectrum)
}

/// Singular values at or below `dim * eps * sigma_max` are round-off and are
/// reported as exact zeros; for `p < 1` they would otherwise inflate
/// `sum sigma^p` by roughly `dim * eps^p`.
pub fn rank_cutoff(dim: usize, sigma_max: f64) -> f64 {
    dim as f64 * f64::EPSILON * sigma_max
}

pub fn schatten_norm(m: &CMatrix, idx: SchattenIndex) -> Result<f64> {
    Ok(singular_values(m)?.schatten(idx.p()))
}

pub fn weak_norm(m: &CMatrix, p: f64) -> Result<f64> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidIndex(p));
    }
    Ok(singular_values(m)?.weak(p))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmajorizationReport {
    pub holds: bool,
    /// `min_n (rhs_n + tol - lhs_n)`.
    pub min_slack: f64,
    /// Per-`n` slack `rhs_n - lhs_n` (without the tolerance).
    pub slacks: Vec<f64>,
}

/// Checks `sum_{k<=n} mu(k, X+Y)^p <= sum_{k<=n} mu(k,X)^p + mu(k,Y)^p + tol`
/// for every `n`.
pub fn submajorization_holds(x: &CMatrix, y: &CMatrix, p: f64, tol: f64) -> Result<SubmajorizationReport> {
    ensure_same_shape(x, y)?;
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::UnsupportedIndex(p));
    }
    let sum = singular_values(&(x + y))?.partial_pow_sums(p);
    let sx = singular_values(x)?.partial_pow_sums(p);
    let sy = singular_values(y)?.partial_pow_sums(p);
    let slacks: Vec<f64> = (0..sum.len()).map(|n| sx[n] + sy[n] - sum[n]).collect();
    let min_slack = slacks.iter().fold(f64::INFINITY, |m, s| m.min(s + tol));
    let min_slack = if slacks.is_empty() { tol } else { min_slack };
    Ok(SubmajorizationReport {
        holds: min_slack >= 0.0,
        min_slack,
        slacks,
    })
}

/// Projection `P` with `1 - P` onto the top `n+1` singular directions of `X`,
/// and the two sides of
/// `||X(1-P)||_p^p + (n+1) ||XP||_inf^p <= 2 sum_{k<=n} mu(k,X)^p`.
#[derive(Debug, Clone)]
pub struct CutCertificate {
    pub n: usize,
    pub p: f64,
    /// Diagonal of `P` in the singular basis (`true` = kept by `P`).
    pub kept: Vec<bool>,
    /// Right singular vectors (columns), i.e. the eigenbasis of `|X|`.
    pub basis: CMatrix,
    pub lhs: f64,
    pub rhs: f64,
}

impl CutCertificate {
    /// `P` as a 0/1 diagonal matrix in the eigenbasis of `|X|`.
    pub fn projection(&self) -> CMatrix {
        let d: Vec<f64> = self.kept.iter().map(|&k| if k { 1.0 } else { 0.0 }).collect();
        crate::matrix::diag_real(&d)
    }

    /// `P` in the standard basis.
    pub fn projection_standard(&self) -> CMatrix {
        &self.basis * self.projection() * self.basis.adjoint()
    }

    pub fn complement_rank(&self) -> usize {
        self.kept.iter().filter(|k| !**k).count()
    }

    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs
    }
}

pub fn cut_projection(x: &CMatrix, n: usize, p: f64) -> Result<CutCertificate> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::UnsupportedIndex(p));
    }
    let dim = x.ncols();
    if n >= dim {
        return Err(Error::OutOfRange { index: n, dim });
    }
    let svd = sorted_svd(x)?;
    // Right singular vectors, completed to a basis when x is wide.
    let v = complete_basis(&svd.v_adj.adjoint());
    let mu: Vec<f64> = (0..dim).map(|k| svd.sigma.get(k).copied().unwrap_or(0.0)).collect();

    let kept: Vec<bool> = (0..dim).map(|k| k > n).collect();
    let head: Vec<f64> = mu[..=n].iter().map(|m| m.powf(p)).collect();
    let top: f64 = head.iter().sum();
    // ||XP||_inf = mu(n+1) <= mu(n); summing the same number of terms keeps
    // the comparison exact in floating point.
    let cut = mu.get(n + 1).copied().unwrap_or(0.0).powf(p);
    let tail: f64 = head.iter().map(|_| cut).sum();
    Ok(CutCertificate {
        n,
        p,
        kept,
        basis: v,
        lhs: top + tail,
        rhs: top + top,
    })
}

/// Extends orthonormal columns to a unitary by Gram-Schmidt against the
/// standard basis.
fn complete_basis(cols: &CMatrix) -> CMatrix {
    let n = cols.nrows();
    let mut basis: Vec<DVector<C64>> = cols.column_iter().map(|c| c.into_owned()).collect();
    let mut e = 0;
    while basis.len() < n && e < n {
        let mut v = DVector::from_fn(n, |i, _| if i == e { c(1.0, 0.0) } else { C64::default() });
        for b in &basis {
            let proj = b.dotc(&v);
            v -= b * proj;
        }
        let norm = v.norm();
        if norm > 1e-8 {
            basis.push(v / c(norm, 0.0));
        }
        e += 1;
    }
    CMatrix::from_columns(&basis)
}

/// Eigendecomposition `A = V diag(lambda) V*` ordered by descending
/// `|lambda|`, ties broken by ascending signed eigenvalue.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

/// Finite complex Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianOperator {
    entries: CMatrix,
    correction: f64,
    eigen: OnceLock<Eigen>,
}

impl HermitianOperator {
    /// Replaces `m` by `(m + m*)/2`; the largest entry change is kept as
    /// [`HermitianOperator::correction`].
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidInput(format!(
                "Hermitian operator must be square, got {:?}",
                m.shape()
            )));
        }
        if m.is_empty() {
            return Err(Error::Empty);
        }
        ensure_finite(&m)?;
        let sym = (&m + m.adjoint()) * c(0.5, 0.0);
        let correction = crate::matrix::max_abs(&(&sym - &m));
        Ok(Self {
            entries: sym,
            correction,
            eigen: OnceLock::new(),
        })
    }

    pub fn from_real_diagonal(values: &[f64]) -> Result<Self> {
        Self::new(crate::matrix::diag_real(values))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn correction(&self) -> f64 {
        self.correction
    }

    pub fn eigen(&self) -> &Eigen {
        self.eigen.get_or_init(|| {
            let se = SymmetricEigen::new(self.entries.clone());
            let vals: Vec<f64> = se.eigenvalues.iter().copied().collect();
            let mut order: Vec<usize> = (0..vals.len()).collect();
            order.sort_by(|&a, &b| {
                vals[b]
                    .abs()
                    .partial_cmp(&vals[a].abs())
                    .unwrap_or(Ordering::Equal)
                    .then(vals[a].partial_cmp(&vals[b]).unwrap_or(Ordering::Equal))
            });
            let n = vals.len();
            let vectors = CMatrix::from_fn(n, n, |j, k| se.eigenvectors[(j, order[k])]);
            Eigen {
                values: order.iter().map(|&i| vals[i]).collect(),
                vectors,
            }
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigen().values
    }
}

fn spectral_map(a: &HermitianOperator, fvals: &[C64]) -> CMatrix {
    let e = a.eigen();
    let n = a.dim();
    let mut scaled = e.vectors.clone();
    for k in 0..n {
        for j in 0..n {
            scaled[(j, k)] *= fvals[k];
        }
    }
    scaled * e.vectors.adjoint()
}

fn evaluate_on_spectrum(a: &HermitianOperator, f: impl Fn(f64) -> C64) -> Result<Vec<C64>> {
    a.eigenvalues()
        .iter()
        .map(|&l| {
            let v = f(l);
            if v.re.is_finite() && v.im.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonFinite(l))
            }
        })
        .collect()
}

/// `f(A) = V diag(f(lambda)) V*` for real-valued `f`.
pub fn apply_function(f: impl Fn(f64) -> f64, a: &HermitianOperator) -> Result<HermitianOperator> {
    let vals = evaluate_on_spectrum(a, |t| c(f(t), 0.0))?;
    HermitianOperator::new(spectral_map(a, &vals))
}

/// `f(A)` for complex-valued `f`; the result is normal but not Hermitian.
pub fn apply_complex_function(f: impl Fn(f64) -> C64, a: &HermitianOperator) -> Result<CMatrix> {
    let vals = evaluate_on_spectrum(a, f)?;
    Ok(spectral_map(a, &vals))
}
