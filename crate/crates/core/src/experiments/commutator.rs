//! Block embedding turning the quasi-commutator `AX - XB` into a commutator.

use std::collections::BTreeMap;

use super::report::{ExperimentReport, Summary, TrialRecord};
use super::QUASICOMMUTATOR;
use crate::error::{Error, Result};
use crate::matrix::{max_abs, CMatrix};
use crate::rng;
use crate::spectral::{singular_values, HermitianOperator};

pub struct Embedding {
    /// `[[A, 0], [0, B]]`.
    pub a_tilde: HermitianOperator,
    /// `[[0, X], [X*, 0]]`.
    pub x_tilde: HermitianOperator,
    /// `[A~, X~]`.
    pub commutator: CMatrix,
    /// `AX - XB`.
    pub quasi: CMatrix,
    /// Largest entry of `[A~, X~] - [[0, AX - XB], [-(AX - XB)*, 0]]`.
    pub residual: f64,
}

impl Embedding {
    /// `(||[A~, X~]||_p, 2^{1/p} ||AX - XB||_p)`.
    pub fn norms(&self, p: f64) -> Result<(f64, f64)> {
        let lhs = singular_values(&self.commutator)?.schatten(p);
        let rhs = 2f64.powf(1.0 / p) * singular_values(&self.quasi)?.schatten(p);
        Ok((lhs, rhs))
    }
}

pub fn quasicommutator_embedding(a: &HermitianOperator, b: &HermitianOperator, x: &CMatrix) -> Result<Embedding> {
    let (n, m) = (a.dim(), b.dim());
    if x.shape() != (n, m) {
        return Err(Error::ShapeMismatch { left: (n, m), right: x.shape() });
    }
    let mut at = CMatrix::zeros(n + m, n + m);
    at.view_mut((0, 0), (n, n)).copy_from(a.entries());
    at.view_mut((n, n), (m, m)).copy_from(b.entries());
    let mut xt = CMatrix::zeros(n + m, n + m);
    xt.view_mut((0, n), (n, m)).copy_from(x);
    xt.view_mut((n, 0), (m, n)).copy_from(&x.adjoint());
    let commutator = &at * &xt - &xt * &at;
    let quasi = a.entries() * x - x * b.entries();
    let mut expected = CMatrix::zeros(n + m, n + m);
    expected.view_mut((0, n), (n, m)).copy_from(&quasi);
    expected.view_mut((n, 0), (m, n)).copy_from(&(-quasi.adjoint()));
    let residual = max_abs(&(&commutator - &expected));
    Ok(Embedding {
        a_tilde: HermitianOperator::new(at)?,
        x_tilde: HermitianOperator::new(xt)?,
        commutator,
        quasi,
        residual,
    })
}

/// Random Gaussian triples `(A, B, X)` of size `dim`.
pub fn quasicommutator_trials(dim: usize, trials: usize, p: f64, master_seed: u64) -> Result<ExperimentReport> {
    if !(p > 0.0) {
        return Err(Error::InvalidIndex(p));
    }
    if dim == 0 {
        return Err(Error::Empty);
    }
    let records = (0..trials)
        .map(|t| -> Result<TrialRecord> {
            let mut s = rng::stream(master_seed, t as u64);
            let a = HermitianOperator::new(rng::gaussian_hermitian(&mut s, dim))?;
            let b = HermitianOperator::new(rng::gaussian_hermitian(&mut s, dim))?;
            let x = rng::gaussian_matrix(&mut s, dim, dim);
            let e = quasicommutator_embedding(&a, &b, &x)?;
            let (lhs, rhs) = e.norms(p)?;
            let mut r = TrialRecord::new(t, format!("dim={dim}"));
            r.seed = Some(rng::derive_seed(master_seed, t as u64));
            r.set("residual", e.residual);
            r.set("lhs", lhs);
            r.set("rhs", rhs);
            r.set("norm_defect", (lhs - rhs).abs() / rhs.max(f64::MIN_POSITIVE));
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    let params = BTreeMap::from([
        ("dims".to_string(), dim.to_string()),
        ("trials".to_string(), trials.to_string()),
        ("p".to_string(), p.to_string()),
        ("seed".to_string(), master_seed.to_string()),
    ]);
    ExperimentReport::assemble(QUASICOMMUTATOR, params, master_seed, records, Vec::new())
}

pub(crate) fn summarize(records: &[TrialRecord]) -> Result<Summary> {
    let mut s = Summary::default();
    let max = |key: &str| records.iter().filter_map(|r| r.get(key)).fold(0.0f64, f64::max);
    s.set("max_residual", max("residual"));
    s.set("max_norm_defect", max("norm_defect"));
    s.set("trials", records.len() as f64);
    Ok(s)
}
