//! Upper bounds on `m_1` norms of Toeplitz matrices `{t_{j-k}}` via the
//! `L_1` norm of the symbol `sum_n t_n e^{i n theta}`.

use std::collections::BTreeMap;
use std::sync::Arc;

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{CMatrix, C64};

/// Default circle grid `2^16`.
pub const DEFAULT_GRID_LOG2: u32 = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToeplitzBound {
    /// `(2 pi)^{-1} ||symbol||_{L_1}` on the refined grid.
    pub value: f64,
    /// Same quantity on the base grid.
    pub coarse: f64,
    pub grid: usize,
    /// `false` when the base and refined grids disagree by more than `1e-6`.
    pub converged: bool,
}

/// Dense `n x n` Toeplitz matrix `{t(j - k)}`.
pub fn toeplitz_matrix(n: usize, t: impl Fn(i64) -> C64) -> CMatrix {
    CMatrix::from_fn(n, n, |j, k| t(j as i64 - k as i64))
}

fn mean_abs_symbol(coeffs: &BTreeMap<i64, C64>, grid: usize, fft: &Arc<dyn rustfft::Fft<f64>>) -> f64 {
    let mut buf = vec![C64::default(); grid];
    for (&n, &t) in coeffs {
        buf[n.rem_euclid(grid as i64) as usize] += t;
    }
    // the inverse transform evaluates sum_n t_n e^{+2 pi i n m / grid}
    fft.process(&mut buf);
    buf.iter().map(|z| z.norm()).sum::<f64>() / grid as f64
}

/// `(2 pi)^{-1} int |sum_n t_n e^{i n theta}| d theta`, an upper bound on the
/// `m_1` norm of the Toeplitz matrix with these coefficients.
pub fn toeplitz_m1_upper(coeffs: &BTreeMap<i64, C64>, grid_log2: u32) -> Result<ToeplitzBound> {
    if coeffs.is_empty() {
        return Err(Error::InvalidInput("empty Toeplitz coefficient list".into()));
    }
    if coeffs.values().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::InvalidInput("non-finite Toeplitz coefficient".into()));
    }
    let degree = coeffs.keys().map(|n| n.unsigned_abs()).max().unwrap_or(0) as usize;
    // keep the symbol itself free of wrap-around
    let grid = (1usize << grid_log2.min(26)).max((4 * degree + 4).next_power_of_two());
    let mut planner = FftPlanner::new();
    let coarse = mean_abs_symbol(coeffs, grid, &planner.plan_fft_inverse(grid));
    let value = mean_abs_symbol(coeffs, 2 * grid, &planner.plan_fft_inverse(2 * grid));
    Ok(ToeplitzBound {
        value,
        coarse,
        grid,
        converged: (value - coarse).abs() <= 1e-6 * value.max(1.0),
    })
}
