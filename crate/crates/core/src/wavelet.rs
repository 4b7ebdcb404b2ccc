//! Compactly supported Daubechies wavelets.
//!
//! A [`WaveletSystem`] holds the scaling filter `h` (length `2N`), the
//! alternating-flip wavelet filter `g_k = (-1)^k h_{2N-1-k}` and lazily
//! computed samples of `phi` and `psi` on the dyadic grids `2^-J`,
//! `J <= 14`. Samples are exact dyadic values of the refinable functions:
//! the integer values of `phi` solve the eigenproblem of the refinement
//! matrix and every finer grid follows from one application of
//! `phi(x) = sqrt(2) sum_k h_k phi(2x - k)`.
//!
//! Wavelet coefficients `<f, psi_{j,k}>`, `psi_{j,k}(t) = 2^{j/2} psi(2^j t - k)`,
//! are computed by composite Riemann sums against those samples.

use std::f64::consts::SQRT_2;
use std::fmt::Write as _;
use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{c, CMatrix, C64};

pub const MAX_ORDER: usize = 20;
pub const MAX_RESOLUTION: u32 = 14;

/// Approximate Hölder exponents of `psi` for `N = 1..=10`.
const REGULARITY: [f64; 10] = [0.0, 0.550, 1.088, 1.618, 1.969, 2.189, 2.460, 2.761, 3.074, 3.381];

pub fn regularity_hint(n: usize) -> f64 {
    if n == 0 {
        0.0
    } else if n <= REGULARITY.len() {
        REGULARITY[n - 1]
    } else {
        0.2075 * n as f64 + 1.3
    }
}

/// `max(10, ceil(4/p))`, capped at the largest supported order.
pub fn default_order(p: f64) -> usize {
    let n = ((4.0 / p).ceil() as usize).max(10);
    n.min(MAX_ORDER)
}

#[derive(Clone)]
pub struct WaveletSystem {
    inner: Arc<Inner>,
}

struct Inner {
    n: usize,
    h: Vec<f64>,
    g: Vec<f64>,
    hint: f64,
    phi: Vec<OnceLock<Vec<f64>>>,
    psi: Vec<OnceLock<Vec<f64>>>,
}

impl std::fmt::Debug for WaveletSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WaveletSystem")
            .field("vanishing_moments", &self.inner.n)
            .field("scaling_filter", &self.inner.h)
            .field("regularity_hint", &self.inner.hint)
            .finish()
    }
}

/// The minimal-phase Daubechies system with `n` vanishing moments (`n = 1` is
/// Haar).
pub fn daubechies_system(n: usize) -> Result<WaveletSystem> {
    let h = daubechies_filter(n)?;
    let len = h.len();
    let g = (0..len)
        .map(|k| if k % 2 == 0 { h[len - 1 - k] } else { -h[len - 1 - k] })
        .collect();
    let levels = MAX_RESOLUTION as usize + 1;
    Ok(WaveletSystem {
        inner: Arc::new(Inner {
            n,
            h,
            g,
            hint: regularity_hint(n),
            phi: (0..levels).map(|_| OnceLock::new()).collect(),
            psi: (0..levels).map(|_| OnceLock::new()).collect(),
        }),
    })
}

/// Scaling filter of the minimal-phase Daubechies wavelet, normalised to
/// `sum h = sqrt(2)`.
pub fn daubechies_filter(n: usize) -> Result<Vec<f64>> {
    if n == 0 || n > MAX_ORDER {
        return Err(Error::WaveletOrder(n));
    }
    // Q(y) = sum_{k<N} C(N-1+k, k) y^k, with y = sin^2(w/2).
    let mut q = vec![1.0f64; n];
    for k in 1..n {
        q[k] = q[k - 1] * (n - 1 + k) as f64 / k as f64;
    }
    let roots = polynomial_roots(&q)?;

    let mut poly = vec![Complex64::new(1.0, 0.0)];
    for y in roots {
        // z + 1/z = 2 - 4y; keep the root inside the unit circle.
        let w = Complex64::new(1.0, 0.0) - y * 2.0;
        let d = (w * w - 1.0).sqrt();
        let z = if (w + d).norm() < 1.0 { w + d } else { w - d };
        poly = poly_mul(&poly, &[-z, Complex64::new(1.0, 0.0)]);
    }
    for _ in 0..n {
        poly = poly_mul(&poly, &[Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)]);
    }
    let mut h: Vec<f64> = poly.iter().rev().map(|z| z.re).collect();
    let sum: f64 = h.iter().sum();
    for v in h.iter_mut() {
        *v *= SQRT_2 / sum;
    }
    Ok(h)
}

fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Roots of `sum_k a_k y^k` (ascending coefficients): companion-matrix
/// eigenvalues polished by Newton steps.
fn polynomial_roots(a: &[f64]) -> Result<Vec<Complex64>> {
    let deg = a.len() - 1;
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = a[deg];
    let companion = DMatrix::from_fn(deg, deg, |i, j| {
        if j == deg - 1 {
            -a[i] / lead
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let eig = companion.complex_eigenvalues();
    let horner = |z: Complex64| {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &coef in a.iter().rev() {
            dp = dp * z + p;
            p = p * z + coef;
        }
        (p, dp)
    };
    let mut roots = Vec::with_capacity(deg);
    for &z0 in eig.iter() {
        let mut z = z0;
        for _ in 0..20 {
            let (p, dp) = horner(z);
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            z -= step;
            if step.norm() <= 1e-15 * z.norm().max(1.0) {
                break;
            }
        }
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Numerical("filter polynomial root did not converge".into()));
        }
        roots.push(z);
    }
    Ok(roots)
}

/// Deviations of a scaling filter from its defining identities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterDefects {
    /// `|sum h - sqrt(2)|`.
    pub sum: f64,
    /// `max_m |sum_k h_k h_{k+2m} - delta_{m,0}|`.
    pub orthonormality: f64,
    /// `max_{m<N} |sum_k (-1)^k k^m h_k|`, scaled by `(2N-1)^m`.
    pub moments: f64,
}

impl WaveletSystem {
    pub fn vanishing_moments(&self) -> usize {
        self.inner.n
    }

    pub fn scaling_filter(&self) -> &[f64] {
        &self.inner.h
    }

    pub fn wavelet_filter(&self) -> &[f64] {
        &self.inner.g
    }

    /// Length `2N - 1` of the support `[0, 2N - 1]` of `phi` and `psi`.
    pub fn support_length(&self) -> usize {
        2 * self.inner.n - 1
    }

    pub fn support(&self) -> (f64, f64) {
        (0.0, self.support_length() as f64)
    }

    pub fn regularity_hint(&self) -> f64 {
        self.inner.hint
    }

    pub fn is_haar(&self) -> bool {
        self.inner.n == 1
    }

    pub fn filter_defects(&self) -> FilterDefects {
        let h = &self.inner.h;
        let len = h.len();
        let sum = (h.iter().sum::<f64>() - SQRT_2).abs();
        let mut orth = 0.0f64;
        for m in 0..len / 2 {
            let s: f64 = (0..len - 2 * m).map(|k| h[k] * h[k + 2 * m]).sum();
            let target = if m == 0 { 1.0 } else { 0.0 };
            orth = orth.max((s - target).abs());
        }
        let scale = (len - 1) as f64;
        let mut moments = 0.0f64;
        for m in 0..self.inner.n {
            let s: f64 = h
                .iter()
                .enumerate()
                .map(|(k, v)| {
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    sign * (k as f64 / scale).powi(m as i32) * v
                })
                .sum();
            moments = moments.max(s.abs());
        }
        FilterDefects { sum, orthonormality: orth, moments }
    }

    fn check_resolution(j: u32) -> Result<()> {
        if j > MAX_RESOLUTION {
            Err(Error::Resolution { requested: j, cap: MAX_RESOLUTION })
        } else {
            Ok(())
        }
    }

    /// `phi(i 2^-J)` for `i = 0..=(2N-1) 2^J`.
    pub fn phi_samples(&self, j: u32) -> Result<&[f64]> {
        Self::check_resolution(j)?;
        Ok(self.phi_level(j))
    }

    fn phi_level(&self, j: u32) -> &[f64] {
        self.inner.phi[j as usize].get_or_init(|| {
            if self.is_haar() {
                let step = 1usize << j;
                (0..=step).map(|i| if i < step { 1.0 } else { 0.0 }).collect()
            } else if j == 0 {
                self.integer_values()
            } else {
                let coarse = self.phi_level(j - 1);
                refine(&self.inner.h, coarse, self.support_length(), j, 1 << (j - 1))
            }
        })
    }

    /// `psi(i 2^-J)` for `i = 0..=(2N-1) 2^J`: the dyadic samples produced by
    /// the cascade refinement, cached per resolution.
    pub fn psi_samples(&self, j: u32) -> Result<&[f64]> {
        Self::check_resolution(j)?;
        Ok(self.inner.psi[j as usize].get_or_init(|| {
            let step = 1usize << j;
            if self.is_haar() {
                return (0..=step)
                    .map(|i| if 2 * i < step { 1.0 } else if i < step { -1.0 } else { 0.0 })
                    .collect();
            }
            let phi = self.phi_level(j);
            let len = self.support_length() * step + 1;
            (0..len)
                .map(|i| {
                    let mut acc = 0.0;
                    for (k, gk) in self.inner.g.iter().enumerate() {
                        let idx = 2 * i as isize - (k * step) as isize;
                        if idx >= 0 && (idx as usize) < len {
                            acc += gk * phi[idx as usize];
                        }
                    }
                    SQRT_2 * acc
                })
                .collect()
        }))
    }

    fn integer_values(&self) -> Vec<f64> {
        let l = self.support_length();
        let mut out = vec![0.0; l + 1];
        // Interior points 1..l-1; phi vanishes at 0 and l.
        let m = l - 1;
        let h = &self.inner.h;
        let mut a = DMatrix::from_fn(m, m, |r, col| {
            let idx = 2 * (r + 1) as isize - (col + 1) as isize;
            let v = if idx >= 0 && (idx as usize) < h.len() { SQRT_2 * h[idx as usize] } else { 0.0 };
            if r == col {
                v - 1.0
            } else {
                v
            }
        });
        for col in 0..m {
            a[(m - 1, col)] = 1.0;
        }
        let mut rhs = DVector::zeros(m);
        rhs[m - 1] = 1.0;
        let sol = a.lu().solve(&rhs).unwrap_or_else(|| DVector::zeros(m));
        for i in 0..m {
            out[i + 1] = sol[i];
        }
        out
    }

    /// `psi(x)`: closed form for Haar, otherwise linear interpolation of the
    /// finest cached samples.
    pub fn psi_at(&self, x: f64) -> f64 {
        let l = self.support_length() as f64;
        if !(x >= 0.0 && x < l) {
            return 0.0;
        }
        if self.is_haar() {
            return if x < 0.5 { 1.0 } else { -1.0 };
        }
        let samples = self.psi_samples(MAX_RESOLUTION).expect("finest resolution is valid");
        let pos = x * (1u64 << MAX_RESOLUTION) as f64;
        let i = pos.floor() as usize;
        let frac = pos - i as f64;
        let a = samples[i];
        let b = samples.get(i + 1).copied().unwrap_or(0.0);
        a + frac * (b - a)
    }

    /// `psi_{j,k}(t) = 2^{j/2} psi(2^j t - k)`.
    pub fn psi_jk(&self, j: i32, k: i64, t: f64) -> f64 {
        let s = 2f64.powi(j);
        s.sqrt() * self.psi_at(s * t - k as f64)
    }

    /// Riemann sums `sum_i psi(x_i)^m-weighted` at resolution `J`: returns
    /// `(int psi, int psi^2, max_{m<N} |int x^m psi| / (2N-1)^m)`.
    pub fn quadrature_invariants(&self, j: u32) -> Result<(f64, f64, f64)> {
        let psi = self.psi_samples(j)?;
        let step = 2f64.powi(-(j as i32));
        let integral: f64 = psi.iter().sum::<f64>() * step;
        let energy: f64 = psi.iter().map(|v| v * v).sum::<f64>() * step;
        let scale = self.support_length() as f64;
        let mut moments = 0.0f64;
        for m in 0..self.inner.n {
            let s: f64 = psi
                .iter()
                .enumerate()
                .map(|(i, v)| (i as f64 * step / scale).powi(m as i32) * v)
                .sum::<f64>()
                * step;
            moments = moments.max(s.abs());
        }
        Ok((integral, energy, moments))
    }
}

fn refine(h: &[f64], coarse: &[f64], support: usize, j: u32, coarse_step: usize) -> Vec<f64> {
    let len = support * (1usize << j) + 1;
    (0..len)
        .map(|i| {
            let mut acc = 0.0;
            for (k, hk) in h.iter().enumerate() {
                let idx = i as isize - (k * coarse_step) as isize;
                if idx >= 0 && (idx as usize) < coarse.len() {
                    acc += hk * coarse[idx as usize];
                }
            }
            SQRT_2 * acc
        })
        .collect()
}

/// Gram matrix of `{psi_{j,k}}` over `window` by Riemann sums at resolution
/// `J` (in units of the finer of each pair).
pub fn gram_matrix(sys: &WaveletSystem, window: &[(i32, i64)], resolution: u32) -> Result<CMatrix> {
    let n = window.len();
    let mut entries = vec![0.0; n * n];
    entries.par_chunks_mut(n).enumerate().try_for_each(|(a, row)| -> Result<()> {
        for (b, slot) in row.iter_mut().enumerate() {
            *slot = inner_product(sys, window[a], window[b], resolution)?;
        }
        Ok(())
    })?;
    Ok(CMatrix::from_row_slice(n, n, &entries.into_iter().map(|v| c(v, 0.0)).collect::<Vec<_>>()))
}

/// `<psi_{j1,k1}, psi_{j2,k2}>` by a Riemann sum at resolution `J` in the
/// variable of the finer wavelet; all samples are exact dyadic values.
pub fn inner_product(sys: &WaveletSystem, a: (i32, i64), b: (i32, i64), resolution: u32) -> Result<f64> {
    let ((ja, ka), (jb, kb)) = if a.0 <= b.0 { (a, b) } else { (b, a) };
    let diff = (jb - ja) as u32;
    let fine = resolution + diff;
    WaveletSystem::check_resolution(fine)?;
    let psi_b = sys.psi_samples(resolution)?;
    let psi_a = sys.psi_samples(fine)?;
    let l = sys.support_length() as i64;
    // x = i 2^-J; psi_a argument 2^{-diff}(x + kb) - ka on grid 2^-(J+diff).
    let offset = (kb << resolution) - (ka << fine);
    let mut acc = 0.0;
    for (i, vb) in psi_b.iter().enumerate() {
        if *vb == 0.0 {
            continue;
        }
        let idx = i as i64 + offset;
        if idx >= 0 && idx <= l << fine {
            acc += vb * psi_a[idx as usize];
        }
    }
    Ok(acc * 2f64.powi(-(resolution as i32)) * 2f64.powf(-(diff as f64) / 2.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidInput(format!("invalid interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.lo && t <= self.hi
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Quadrature resolution policy: level `j` is integrated on the grid
/// `2^-J_x` in the wavelet variable with `J_x = clamp(target - j, base, 14)`;
/// levels whose spatial step `2^-(j + J_x)` would exceed `2^-min_spatial`
/// are rejected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub base: u32,
    pub target: i32,
    pub min_spatial: i32,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self { base: 8, target: 8, min_spatial: 4 }
    }
}

impl Quadrature {
    pub fn resolution(&self, j: i32) -> Result<u32> {
        let jx = (self.target - j).clamp(self.base as i32, MAX_RESOLUTION as i32) as u32;
        if j + jx as i32 >= self.min_spatial {
            Ok(jx)
        } else {
            Err(Error::Resolution {
                requested: (self.min_spatial - j).max(0) as u32,
                cap: MAX_RESOLUTION,
            })
        }
    }
}

/// Coefficients of one level, stored densely from `k_min`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub j: i32,
    pub k_min: i64,
    pub values: Vec<C64>,
    /// Largest difference against the next coarser quadrature grid.
    pub quad_error: f64,
}

impl Level {
    pub fn get(&self, k: i64) -> C64 {
        let idx = k - self.k_min;
        if idx >= 0 && (idx as usize) < self.values.len() {
            self.values[idx as usize]
        } else {
            C64::default()
        }
    }

    pub fn k_range(&self) -> std::ops::Range<i64> {
        self.k_min..self.k_min + self.values.len() as i64
    }

    /// `(sum_k |c_k|^p)^{1/p}`, `p = inf` giving the maximum.
    pub fn sequence_norm(&self, p: f64) -> f64 {
        let moduli: Vec<f64> = self.values.iter().map(|z| z.norm()).collect();
        crate::spectral::lp_norm(&moduli, p)
    }
}

#[derive(Debug, Clone)]
pub struct WaveletCoefficients {
    system: WaveletSystem,
    truncation_box: Interval,
    levels: Vec<Level>,
}

/// Translations `k` at level `j` whose support `2^-j [k, k + 2N - 1]` meets
/// the interior of `bx`.
pub fn translation_range(sys: &WaveletSystem, j: i32, bx: Interval) -> std::ops::RangeInclusive<i64> {
    let s = 2f64.powi(j);
    let l = sys.support_length() as f64;
    let lo = (s * bx.lo - l).floor() as i64 + 1;
    let hi = (s * bx.hi).ceil() as i64 - 1;
    lo..=hi
}

fn check_levels(j_min: i32, j_max: i32) -> Result<()> {
    if j_min > j_max {
        return Err(Error::InvalidInput(format!("empty level range [{j_min}, {j_max}]")));
    }
    Ok(())
}

/// `<f, psi_{j,k}>` for `j_min <= j <= j_max` and all `k` whose support meets
/// `bx`.
pub fn wavelet_coefficients<F>(
    f: F,
    sys: &WaveletSystem,
    j_range: (i32, i32),
    bx: Interval,
    quad: Quadrature,
) -> Result<WaveletCoefficients>
where
    F: Fn(f64) -> C64 + Sync,
{
    check_levels(j_range.0, j_range.1)?;
    let mut levels = Vec::new();
    for j in j_range.0..=j_range.1 {
        let jx = quad.resolution(j)?;
        let psi = sys.psi_samples(jx)?;
        let ks = translation_range(sys, j, bx);
        let scale = 2f64.powi(-j);
        let step = 2f64.powi(-(jx as i32));
        let weight = scale.sqrt();
        let results: Vec<(C64, f64)> = ks
            .clone()
            .into_par_iter()
            .map(|k| {
                let mut fine = C64::default();
                let mut coarse = C64::default();
                for (i, v) in psi.iter().enumerate() {
                    if *v == 0.0 {
                        continue;
                    }
                    let t = (i as f64 * step + k as f64) * scale;
                    let term = f(t) * *v;
                    fine += term;
                    if i % 2 == 0 {
                        coarse += term;
                    }
                }
                let fine = fine * (weight * step);
                let coarse = coarse * (weight * 2.0 * step);
                (fine, (fine - coarse).norm())
            })
            .collect();
        let quad_error = results.iter().fold(0.0f64, |a, r| a.max(r.1));
        if results.iter().any(|r| !(r.0.re.is_finite() && r.0.im.is_finite())) {
            return Err(Error::Numerical(format!("non-finite coefficient at level {j}")));
        }
        levels.push(Level {
            j,
            k_min: *ks.start(),
            values: results.into_iter().map(|r| r.0).collect(),
            quad_error,
        });
    }
    Ok(WaveletCoefficients { system: sys.clone(), truncation_box: bx, levels })
}

impl WaveletCoefficients {
    /// Builds a coefficient set from explicit `(j, k, value)` entries; the
    /// stored `k` range of each level covers both the box and the entries.
    pub fn from_entries(
        sys: &WaveletSystem,
        j_range: (i32, i32),
        bx: Interval,
        entries: &[(i32, i64, C64)],
    ) -> Result<Self> {
        check_levels(j_range.0, j_range.1)?;
        let mut levels = Vec::new();
        for j in j_range.0..=j_range.1 {
            let ks = translation_range(sys, j, bx);
            let mut lo = *ks.start();
            let mut hi = *ks.end();
            for &(ej, ek, _) in entries {
                if ej == j {
                    lo = lo.min(ek);
                    hi = hi.max(ek);
                }
            }
            let len = if hi >= lo { (hi - lo + 1) as usize } else { 0 };
            levels.push(Level { j, k_min: lo, values: vec![C64::default(); len], quad_error: 0.0 });
        }
        for &(j, k, v) in entries {
            if j < j_range.0 || j > j_range.1 {
                return Err(Error::InvalidInput(format!("entry level {j} outside [{}, {}]", j_range.0, j_range.1)));
            }
            let level = &mut levels[(j - j_range.0) as usize];
            level.values[(k - level.k_min) as usize] += v;
        }
        Ok(Self { system: sys.clone(), truncation_box: bx, levels })
    }

    pub fn system(&self) -> &WaveletSystem {
        &self.system
    }

    pub fn j_range(&self) -> (i32, i32) {
        (self.levels[0].j, self.levels[self.levels.len() - 1].j)
    }

    pub fn truncation_box(&self) -> Interval {
        self.truncation_box
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn level(&self, j: i32) -> Option<&Level> {
        let (lo, hi) = self.j_range();
        if j < lo || j > hi {
            None
        } else {
            Some(&self.levels[(j - lo) as usize])
        }
    }

    pub fn get(&self, j: i32, k: i64) -> C64 {
        self.level(j).map(|l| l.get(k)).unwrap_or_default()
    }

    /// Largest quadrature error estimate over all levels.
    pub fn quad_error(&self) -> f64 {
        self.levels.iter().fold(0.0, |a, l| a.max(l.quad_error))
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.levels
            .iter()
            .flat_map(|l| l.values.iter())
            .fold(0.0, |a, z| a.max(z.norm()))
    }

    /// All coefficients multiplied by `lambda`.
    pub fn scaled(&self, lambda: C64) -> Self {
        let mut out = self.clone();
        for level in out.levels.iter_mut() {
            for v in level.values.iter_mut() {
                *v *= lambda;
            }
        }
        out
    }

    /// Sparse text form: a header of `#` lines followed by one `j k re im`
    /// line per nonzero coefficient.
    pub fn to_sparse_text(&self) -> String {
        let (lo, hi) = self.j_range();
        let mut out = String::new();
        let _ = writeln!(out, "# wavelet {}", self.system.vanishing_moments());
        let _ = writeln!(out, "# levels {lo} {hi}");
        let _ = writeln!(out, "# box {} {}", self.truncation_box.lo, self.truncation_box.hi);
        for level in &self.levels {
            for (i, v) in level.values.iter().enumerate() {
                if *v != C64::default() {
                    let _ = writeln!(out, "{} {} {} {}", level.j, level.k_min + i as i64, v.re, v.im);
                }
            }
        }
        out
    }

    pub fn from_sparse_text(text: &str) -> Result<Self> {
        let mut order = None;
        let mut range = None;
        let mut bx = None;
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.trim();
            if content.is_empty() {
                continue;
            }
            let bad = |msg: String| Error::Parse { line, msg };
            let num = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("bad number `{s}`: {e}")));
            let int = |s: &str| s.parse::<i64>().map_err(|e| bad(format!("bad integer `{s}`: {e}")));
            if let Some(rest) = content.strip_prefix('#') {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                match parts.as_slice() {
                    ["wavelet", n] => order = Some(int(n)? as usize),
                    ["levels", a, b] => range = Some((int(a)? as i32, int(b)? as i32)),
                    ["box", a, b] => bx = Some(Interval::new(num(a)?, num(b)?).map_err(|e| bad(e.to_string()))?),
                    _ => {}
                }
                continue;
            }
            let parts: Vec<&str> = content.split_whitespace().collect();
            if parts.len() != 4 {
                return Err(bad(format!("expected `j k re im`, found `{content}`")));
            }
            entries.push((int(parts[0])? as i32, int(parts[1])?, c(num(parts[2])?, num(parts[3])?)));
        }
        let missing = |what: &str| Error::Parse { line: 0, msg: format!("missing `# {what}` header") };
        let sys = daubechies_system(order.ok_or_else(|| missing("wavelet"))?)?;
        Self::from_entries(
            &sys,
            range.ok_or_else(|| missing("levels"))?,
            bx.ok_or_else(|| missing("box"))?,
            &entries,
        )
    }
}

/// The level-`j` part `f_j = sum_k <f, psi_{j,k}> psi_{j,k}`.
#[derive(Debug, Clone)]
pub struct LevelProjection {
    system: WaveletSystem,
    level: Level,
    domain: Interval,
}

pub fn level_projection(coeffs: &WaveletCoefficients, j: i32) -> Result<LevelProjection> {
    let level = coeffs.level(j).ok_or_else(|| {
        let (lo, hi) = coeffs.j_range();
        Error::InvalidInput(format!("level {j} outside [{lo}, {hi}]"))
    })?;
    Ok(LevelProjection {
        system: coeffs.system.clone(),
        level: level.clone(),
        domain: coeffs.truncation_box,
    })
}

impl LevelProjection {
    pub fn j(&self) -> i32 {
        self.level.j
    }

    pub fn eval(&self, t: f64) -> Result<C64> {
        if !self.domain.contains(t) {
            return Err(Error::OutOfDomain { t, lo: self.domain.lo, hi: self.domain.hi });
        }
        Ok(self.eval_unchecked(t))
    }

    pub(crate) fn eval_unchecked(&self, t: f64) -> C64 {
        let s = 2f64.powi(self.level.j);
        let x = s * t;
        let l = self.system.support_length() as f64;
        let k_lo = ((x - l).floor() as i64).max(self.level.k_min);
        let k_hi = (x.floor() as i64).min(self.level.k_min + self.level.values.len() as i64 - 1);
        let mut acc = C64::default();
        for k in k_lo..=k_hi {
            let v = self.level.get(k);
            if v != C64::default() {
                acc += v * self.system.psi_at(x - k as f64);
            }
        }
        acc * s.sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelNorm {
    /// Quadrature `||f_j||_p`.
    pub norm: f64,
    /// `2^{j(1/2 - 1/p)} (sum_k |<f, psi_{j,k}>|^p)^{1/p}`.
    pub sequence_norm: f64,
    /// `norm / sequence_norm`, absent when the level is zero.
    pub ratio: Option<f64>,
}

/// Samples of `f_j` on the grid `2^-(j + J)` covering the union of supports;
/// every sample is an exact combination of dyadic `psi` values.
fn level_samples(sys: &WaveletSystem, level: &Level, resolution: u32) -> Result<Vec<C64>> {
    let psi = sys.psi_samples(resolution)?;
    let step = 1i64 << resolution;
    let len = ((level.values.len() as i64 - 1 + sys.support_length() as i64) * step + 1).max(0) as usize;
    let mut out = vec![C64::default(); len];
    for (i, v) in level.values.iter().enumerate() {
        if *v == C64::default() {
            continue;
        }
        let base = i as i64 * step;
        for (m, s) in psi.iter().enumerate() {
            out[(base + m as i64) as usize] += v * *s;
        }
    }
    Ok(out)
}

/// `||f_j||_p` by a Riemann sum at resolution `J` together with the
/// equivalence ratio against the coefficient sequence.
pub fn level_lp_norm(coeffs: &WaveletCoefficients, j: i32, p: f64, resolution: u32) -> Result<LevelNorm> {
    if !(p > 0.0) {
        return Err(Error::InvalidIndex(p));
    }
    let level = coeffs.level(j).ok_or_else(|| Error::InvalidInput(format!("level {j} not computed")))?;
    let samples = level_samples(&coeffs.system, level, resolution)?;
    let moduli: Vec<f64> = samples.iter().map(|z| z.norm()).collect();
    let scale = 2f64.powi(j);
    let cell = 2f64.powi(-(resolution as i32)) / scale;
    let norm = if p.is_infinite() {
        moduli.iter().fold(0.0f64, |a, &b| a.max(b)) * scale.sqrt()
    } else {
        crate::spectral::lp_norm(&moduli, p) * cell.powf(1.0 / p) * scale.sqrt()
    };
    let inv_p = if p.is_infinite() { 0.0 } else { 1.0 / p };
    let sequence_norm = scale.powf(0.5 - inv_p) * level.sequence_norm(p);
    let ratio = if sequence_norm > 0.0 { Some(norm / sequence_norm) } else { None };
    Ok(LevelNorm { norm, sequence_norm, ratio })
}

/// `||psi||_p` by a Riemann sum at resolution `J`.
pub fn psi_lp_norm(sys: &WaveletSystem, p: f64, resolution: u32) -> Result<f64> {
    let psi = sys.psi_samples(resolution)?;
    let moduli: Vec<f64> = psi.iter().map(|v| v.abs()).collect();
    if p.is_infinite() {
        return Ok(moduli.iter().fold(0.0, |a: f64, &b| a.max(b)));
    }
    Ok(crate::spectral::lp_norm(&moduli, p) * 2f64.powi(-(resolution as i32)).powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn haar_filter() {
        let sys = daubechies_system(1).unwrap();
        let h = sys.scaling_filter();
        assert!((h[0] - 1.0 / SQRT_2).abs() < 1e-15 && (h[1] - 1.0 / SQRT_2).abs() < 1e-15);
        let psi = sys.psi_samples(3).unwrap();
        assert_eq!(&psi[..8], &[1.0, 1.0, 1.0, 1.0, -1.0, -1.0, -1.0, -1.0]);
    }

    #[test]
    fn db2_matches_closed_form() {
        let h = daubechies_filter(2).unwrap();
        let s3 = 3f64.sqrt();
        let d = 4.0 * SQRT_2;
        let expected = [(1.0 + s3) / d, (3.0 + s3) / d, (3.0 - s3) / d, (1.0 - s3) / d];
        for (a, b) in h.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{h:?}");
        }
    }

    #[test]
    fn db2_solves_defining_system() {
        // sum h = sqrt 2, sum h^2 = 1, h0 h2 + h1 h3 = 0, sum (-1)^k k h_k = 0.
        let h = daubechies_filter(2).unwrap();
        let residuals = [
            h.iter().sum::<f64>() - SQRT_2,
            h.iter().map(|v| v * v).sum::<f64>() - 1.0,
            h[0] * h[2] + h[1] * h[3],
            -h[1] + 2.0 * h[2] - 3.0 * h[3],
        ];
        assert!(residuals.iter().all(|r| r.abs() <= 1e-12), "{residuals:?}");
    }

    #[test]
    fn filter_invariants_up_to_twenty() {
        for n in 1..=MAX_ORDER {
            let d = daubechies_system(n).unwrap().filter_defects();
            assert!(d.sum < 1e-12, "N = {n}: {d:?}");
            assert!(d.orthonormality < 1e-10, "N = {n}: {d:?}");
            assert!(d.moments < 1e-10, "N = {n}: {d:?}");
        }
        assert!(matches!(daubechies_system(0), Err(Error::WaveletOrder(0))));
        assert!(matches!(daubechies_system(21), Err(Error::WaveletOrder(21))));
    }

    #[test]
    fn resolution_cap() {
        let sys = daubechies_system(2).unwrap();
        assert!(matches!(sys.psi_samples(15), Err(Error::Resolution { requested: 15, cap: 14 })));
    }

    #[test]
    fn cascade_is_self_consistent() {
        let sys = daubechies_system(4).unwrap();
        let a = sys.psi_samples(10).unwrap();
        let b = sys.psi_samples(11).unwrap();
        let diff = a.iter().enumerate().fold(0.0f64, |m, (i, v)| m.max((v - b[2 * i]).abs()));
        assert!(diff <= 1e-12, "{diff}");
        // Linear interpolation between neighbouring levels.
        let interp = (0..a.len() - 1).fold(0.0f64, |m, i| m.max(((a[i] + a[i + 1]) / 2.0 - b[2 * i + 1]).abs()));
        assert!(interp <= 1e-4, "{interp}");
    }

    #[test]
    fn quadrature_invariants_hold() {
        for n in 1..=10 {
            let sys = daubechies_system(n).unwrap();
            let (integral, energy, moments) = sys.quadrature_invariants(MAX_RESOLUTION).unwrap();
            assert!(integral.abs() <= 1e-6, "N = {n}: {integral}");
            assert!((energy - 1.0).abs() <= 1e-6, "N = {n}: {energy}");
            assert!(moments <= 1e-5, "N = {n}: {moments}");
        }
        let (integral, _, _) = daubechies_system(4).unwrap().quadrature_invariants(12).unwrap();
        assert!(integral.abs() <= 1e-6);
    }

    #[test]
    fn gram_matrix_is_identity() {
        let sys = daubechies_system(4).unwrap();
        let mut window = Vec::new();
        for j in 0..5 {
            for k in -2..3 {
                window.push((j, k));
            }
        }
        let g = gram_matrix(&sys, &window, 9).unwrap();
        let defect = crate::matrix::max_abs(&(g - CMatrix::identity(window.len(), window.len())));
        assert!(defect <= 1e-5, "{defect}");
    }

    #[test]
    fn haar_coefficient_of_identity() {
        let sys = daubechies_system(1).unwrap();
        let bx = Interval::new(0.0, 1.0).unwrap();
        let co = wavelet_coefficients(|t| c(t, 0.0), &sys, (0, 0), bx, Quadrature::default()).unwrap();
        assert!((co.get(0, 0).re + 0.25).abs() < 1e-8);
    }

    #[test]
    fn coefficients_of_a_wavelet_are_a_delta() {
        let sys = daubechies_system(4).unwrap();
        let bx = Interval::new(-4.0, 12.0).unwrap();
        let s = sys.clone();
        let co = wavelet_coefficients(move |t| c(s.psi_at(t), 0.0), &sys, (-2, 2), bx, Quadrature::default()).unwrap();
        for level in co.levels() {
            for k in level.k_range() {
                let target = if level.j == 0 && k == 0 { 1.0 } else { 0.0 };
                assert!((level.get(k) - target).norm() <= 1e-6, "({}, {k}): {}", level.j, level.get(k));
            }
        }
        let f0 = level_projection(&co, 0).unwrap();
        for i in 0..200 {
            let t = -1.0 + i as f64 * 0.05;
            assert!((f0.eval(t).unwrap().re - sys.psi_at(t)).abs() <= 1e-6);
        }
        assert!(matches!(f0.eval(20.0), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn constants_have_vanishing_coefficients() {
        let sys = daubechies_system(3).unwrap();
        let bx = Interval::new(-2.0, 2.0).unwrap();
        let co = wavelet_coefficients(|_| c(3.0, 0.0), &sys, (0, 3), bx, Quadrature::default()).unwrap();
        assert!(co.max_abs() <= 1e-6, "{}", co.max_abs());
    }

    #[test]
    fn scale_covariance() {
        // <f(2.), psi_{j+1,k}> = 2^{-1/2} <f, psi_{j,k}>.
        let sys = daubechies_system(3).unwrap();
        let f = |t: f64| c((-t * t).exp(), 0.0);
        let bx = Interval::new(-3.0, 3.0).unwrap();
        let half = Interval::new(-1.5, 1.5).unwrap();
        let fixed = Quadrature { base: 10, target: 0, min_spatial: 0 };
        for (quad, tol) in [(fixed, Some(1e-14)), (Quadrature::default(), None)] {
            let a = wavelet_coefficients(f, &sys, (-1, 2), bx, quad).unwrap();
            let b = wavelet_coefficients(move |t| f(2.0 * t), &sys, (0, 3), half, quad).unwrap();
            let tol = tol.unwrap_or(2.0 * (a.quad_error() + b.quad_error()));
            for j in -1..=2 {
                for k in a.level(j).unwrap().k_range() {
                    let lhs = b.get(j + 1, k);
                    let rhs = a.get(j, k) / SQRT_2;
                    assert!((lhs - rhs).norm() <= tol, "({j}, {k}): {lhs} vs {rhs}");
                }
            }
        }
    }

    #[test]
    fn level_norm_examples() {
        let sys = daubechies_system(4).unwrap();
        let bx = Interval::new(0.0, 4.0).unwrap();
        let single = WaveletCoefficients::from_entries(&sys, (2, 2), bx, &[(2, 3, c(1.0, 0.0))]).unwrap();
        for p in [0.5, 1.0, 2.0, f64::INFINITY] {
            let r = level_lp_norm(&single, 2, p, 10).unwrap();
            let expected = psi_lp_norm(&sys, p, 10).unwrap();
            assert!((r.ratio.unwrap() - expected).abs() <= 1e-12 * expected, "p = {p}");
        }

        let haar = daubechies_system(1).unwrap();
        let mut r = rng::stream(3, 0);
        let entries: Vec<_> = (0..6).map(|k| (1, k, rng::complex_gaussian(&mut r))).collect();
        let co = WaveletCoefficients::from_entries(&haar, (1, 1), bx, &entries).unwrap();
        let n = level_lp_norm(&co, 1, 2.0, 6).unwrap();
        assert!((n.ratio.unwrap() - 1.0).abs() <= 1e-6);

        let empty = WaveletCoefficients::from_entries(&sys, (0, 0), bx, &[]).unwrap();
        assert_eq!(level_lp_norm(&empty, 0, 1.0, 8).unwrap().ratio, None);
        assert_eq!(level_projection(&empty, 0).unwrap().eval(1.0).unwrap(), C64::default());
    }

    #[test]
    fn sup_norm_tracks_largest_coefficient() {
        let sys = daubechies_system(4).unwrap();
        let bx = Interval::new(0.0, 8.0).unwrap();
        let mut r = rng::stream(5, 0);
        for trial in 0..20 {
            let j = trial % 3;
            let entries: Vec<_> = (0..8).map(|k| (j, k, c(rng::gaussian(&mut r), 0.0))).collect();
            let co = WaveletCoefficients::from_entries(&sys, (j, j), bx, &entries).unwrap();
            let n = level_lp_norm(&co, j, f64::INFINITY, 10).unwrap();
            let max = entries.iter().fold(0.0f64, |a, e| a.max(e.2.norm()));
            let ratio = n.norm / (2f64.powi(j).sqrt() * max);
            assert!(ratio > 0.2 && ratio < 10.0, "{ratio}");
        }
    }

    #[test]
    fn sparse_text_round_trip() {
        let sys = daubechies_system(2).unwrap();
        let bx = Interval::new(-1.0, 1.0).unwrap();
        let co = wavelet_coefficients(|t| c(t.sin(), t.cos()), &sys, (-1, 1), bx, Quadrature::default()).unwrap();
        let back = WaveletCoefficients::from_sparse_text(&co.to_sparse_text()).unwrap();
        for level in co.levels() {
            for k in level.k_range() {
                assert_eq!(back.get(level.j, k), level.get(k));
            }
        }
        assert!(matches!(
            WaveletCoefficients::from_sparse_text("# wavelet 2\n# levels 0 0\n# box 0 1\n0 1 x 0\n"),
            Err(Error::Parse { line: 4, .. })
        ));
    }
}
