//! Schur products, divided-difference matrices and `m_p` multiplier bounds.

mod optimizer;
mod toeplitz;

pub use optimizer::{mp_lower_bound, mp_lower_bound_warm, schur_ratio, MpConfig, MultiplierEstimate};
pub use toeplitz::{toeplitz_m1_upper, toeplitz_matrix, ToeplitzBound, DEFAULT_GRID_LOG2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{FunctionTag, ScalarFunction};
use crate::matrix::{c, ensure_same_shape, CMatrix, C64};
use crate::spectral::{lp_norm, p_sharp, singular_values};

/// Entrywise product.
pub fn schur_product(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    ensure_same_shape(a, b)?;
    Ok(a.component_mul(b))
}

/// `{f^[1](lambda_j, mu_k)}` on disjoint node sets.
#[derive(Debug, Clone)]
pub struct DividedDifferenceMatrix {
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub entries: CMatrix,
    pub tag: FunctionTag,
    /// Separation threshold the nodes were checked against.
    pub delta: f64,
}

impl DividedDifferenceMatrix {
    /// Largest `|entry| - L` when the tag carries a Lipschitz constant `L`
    /// (nonpositive when the bound holds).
    pub fn lipschitz_excess(&self) -> Option<f64> {
        let l = self.tag.lipschitz?;
        Some(crate::matrix::max_abs(&self.entries) - l)
    }
}

/// Default separation `1e-6 * span` of all nodes.
pub fn default_separation(lambda: &[f64], mu: &[f64]) -> f64 {
    let (lo, hi) = lambda
        .iter()
        .chain(mu)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    1e-6 * (hi - lo).max(0.0)
}

pub fn divided_difference_matrix(
    f: &ScalarFunction,
    lambda: &[f64],
    mu: &[f64],
    delta: Option<f64>,
) -> Result<DividedDifferenceMatrix> {
    if lambda.is_empty() || mu.is_empty() {
        return Err(Error::Empty);
    }
    if lambda.iter().chain(mu).any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("non-finite node".into()));
    }
    let delta = delta.unwrap_or_else(|| default_separation(lambda, mu));
    if !(delta >= 0.0) {
        return Err(Error::InvalidInput(format!("separation must be nonnegative, got {delta}")));
    }
    for &l in lambda {
        for &m in mu {
            let gap = (l - m).abs();
            if gap == 0.0 || gap < delta {
                return Err(Error::Separation { lambda: l, mu: m, delta });
            }
        }
    }
    let fl: Vec<C64> = lambda.iter().map(|&t| f.eval_checked(t)).collect::<Result<_>>()?;
    let fm: Vec<C64> = mu.iter().map(|&t| f.eval_checked(t)).collect::<Result<_>>()?;
    let entries = CMatrix::from_fn(lambda.len(), mu.len(), |j, k| (fl[j] - fm[k]) / c(lambda[j] - mu[k], 0.0));
    Ok(DividedDifferenceMatrix {
        lambda: lambda.to_vec(),
        mu: mu.to_vec(),
        entries,
        tag: f.tag().clone(),
        delta,
    })
}

/// Bound for a generalised block-diagonal matrix from bounds on its blocks:
/// `(sum b_j^{p#})^{1/p#}` for `p < 1`, `max b_j` for `p = 1`.
pub fn block_diagonal_bound(blocks: &[f64], p: f64) -> Result<f64> {
    let ps = p_sharp(p)?;
    if blocks.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
        return Err(Error::InvalidInput("block bounds must be finite and nonnegative".into()));
    }
    Ok(lp_norm(blocks, ps))
}

/// `A (x) 1_N`: entry `((j,l1),(k,l2)) = A[j][k]`, index `(j,l) -> j*N + l`.
pub fn inflate(a: &CMatrix, n_big: usize) -> Result<CMatrix> {
    if n_big == 0 {
        return Err(Error::InvalidInput("inflation factor must be at least 1".into()));
    }
    Ok(CMatrix::from_fn(a.nrows() * n_big, a.ncols() * n_big, |r, s| a[(r / n_big, s / n_big)]))
}

/// The data of the tensor inflation identity
/// `(1_N (x) A) o (u (x) v*) = Q_u (A o (u~ (x) v~)) Q_v*`.
///
/// Here `(u (x) v*)_{(j,l1),(k,l2)} = u_{j,l1} conj(v_{k,l2})`,
/// `u~_j = (sum_l |u_{j,l}|^2)^{1/2}` and `Q_u e_j = u_{j,.} / u~_j`
/// (zero column when `u~_j = 0`).
#[derive(Debug, Clone)]
pub struct InflationWitness {
    pub n_big: usize,
    pub u: Vec<C64>,
    pub v: Vec<C64>,
    pub qu: CMatrix,
    pub qv: CMatrix,
    pub u_tilde: Vec<f64>,
    pub v_tilde: Vec<f64>,
    /// Operator norm of the difference of the two sides.
    pub residual: f64,
    /// Largest entrywise deviation of `Q*Q` from the identity on the support.
    pub isometry_defect: f64,
}

fn compress(u: &[C64], n: usize, n_big: usize) -> (CMatrix, Vec<f64>) {
    let tilde: Vec<f64> = (0..n)
        .map(|j| (0..n_big).map(|l| u[j * n_big + l].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let q = CMatrix::from_fn(n * n_big, n, |r, j| {
        if r / n_big == j && tilde[j] != 0.0 {
            u[r] / tilde[j]
        } else {
            C64::default()
        }
    });
    (q, tilde)
}

fn isometry_defect(q: &CMatrix, tilde: &[f64]) -> f64 {
    let g = q.adjoint() * q;
    let mut worst: f64 = 0.0;
    for j in 0..tilde.len() {
        for k in 0..tilde.len() {
            let target = if j == k && tilde[j] != 0.0 { 1.0 } else { 0.0 };
            worst = worst.max((g[(j, k)] - c(target, 0.0)).norm());
        }
    }
    worst
}

pub fn verify_inflation_identity(a: &CMatrix, u: &[C64], v: &[C64], n_big: usize) -> Result<InflationWitness> {
    if !a.is_square() {
        return Err(Error::InvalidInput("inflation needs a square matrix".into()));
    }
    let n = a.nrows();
    if n_big == 0 || u.len() != n * n_big || v.len() != n * n_big {
        return Err(Error::ShapeMismatch {
            left: (n * n_big, n * n_big),
            right: (u.len(), v.len()),
        });
    }
    for w in [u, v] {
        let norm = crate::matrix::vector_norm(w);
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotUnit(norm));
        }
    }
    let lhs = CMatrix::from_fn(n * n_big, n * n_big, |r, s| a[(r / n_big, s / n_big)] * u[r] * v[s].conj());
    let (qu, u_tilde) = compress(u, n, n_big);
    let (qv, v_tilde) = compress(v, n, n_big);
    let core = CMatrix::from_fn(n, n, |j, k| a[(j, k)] * (u_tilde[j] * v_tilde[k]));
    let rhs = &qu * core * qv.adjoint();
    let residual = singular_values(&(lhs - rhs))?.get(0);
    let isometry_defect = isometry_defect(&qu, &u_tilde).max(isometry_defect(&qv, &v_tilde));
    Ok(InflationWitness {
        n_big,
        u: u.to_vec(),
        v: v.to_vec(),
        qu,
        qv,
        u_tilde,
        v_tilde,
        residual,
        isometry_defect,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogeneityReport {
    pub scale: f64,
    /// `max |M_s - s M| / max |s M|` for `M = f^[1](lambda, mu)` and
    /// `M_s = f_(s)^[1](lambda/s, mu/s)`, `f_(s)(t) = f(s t)`.
    pub proportionality_defect: f64,
    pub estimate: f64,
    /// Estimate for `M_s`, divided by `s`.
    pub scaled_estimate: f64,
    /// `|scaled_estimate - estimate| / estimate`.
    pub discrepancy: f64,
}

pub fn homogeneity_check(
    f: &ScalarFunction,
    lambda: &[f64],
    mu: &[f64],
    scale: f64,
    p: f64,
    cfg: &MpConfig,
) -> Result<HomogeneityReport> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidInput(format!("scale must be positive, got {scale}")));
    }
    let base = divided_difference_matrix(f, lambda, mu, None)?;
    let inner = f.clone();
    let dilated = ScalarFunction::new(
        FunctionTag {
            name: format!("{}(s*t)", f.name()),
            lipschitz: f.tag().lipschitz.map(|l| l * scale),
            period: f.tag().period.map(|t| t / scale),
            real_valued: f.tag().real_valued,
        },
        move |t| inner.eval(scale * t),
    );
    let ls: Vec<f64> = lambda.iter().map(|x| x / scale).collect();
    let ms: Vec<f64> = mu.iter().map(|x| x / scale).collect();
    let scaled = divided_difference_matrix(&dilated, &ls, &ms, None)?;
    let target = &base.entries * c(scale, 0.0);
    let denom = crate::matrix::max_abs(&target);
    let diff = crate::matrix::max_abs(&(&scaled.entries - &target));
    let proportionality_defect = if denom > 0.0 { diff / denom } else { diff };

    let estimate = mp_lower_bound(&base.entries, p, cfg)?.value;
    let scaled_estimate = mp_lower_bound(&scaled.entries, p, cfg)?.value / scale;
    let discrepancy = if estimate > 0.0 {
        (scaled_estimate - estimate).abs() / estimate
    } else {
        scaled_estimate.abs()
    };
    Ok(HomogeneityReport {
        scale,
        proportionality_defect,
        estimate,
        scaled_estimate,
        discrepancy,
    })
}
