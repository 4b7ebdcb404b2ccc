//! Homogeneous Besov seminorms.
//!
//! Two independent evaluations are provided: the wavelet-coefficient sum
//!
//! ```text
//! ( sum_j 2^{j q (s + 1/2 - 1/p)} ( sum_k |<f, psi_{j,k}>|^p )^{q/p} )^{1/q}
//! ```
//!
//! and the Littlewood-Paley form `|| { 2^{js} ||Delta_j f||_p }_j ||_{l_q}`
//! with `Delta_j` the Fourier multiplier `Phi(2^-j xi)` applied by FFT. A
//! finite-difference seminorm and the reconstruction of a Lipschitz function
//! from its level projections (up to an affine term) complete the module.

use std::f64::consts::PI;

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::C64;
use crate::spectral::lp_norm;
use crate::wavelet::{level_projection, Interval, WaveletCoefficients};

/// A seminorm value with its truncation diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BesovReport {
    pub value: f64,
    pub j_window: (i32, i32),
    /// Share of the `l_q` sum carried by the first or last level of the
    /// window, whichever is larger.
    pub tail_share: f64,
    /// Per-level weighted terms `2^{j(...)} ||.||`.
    pub level_terms: Vec<f64>,
    pub warnings: Vec<String>,
}

fn check_exponents(p: f64, q: f64) -> Result<()> {
    if !(p > 0.0) {
        return Err(Error::InvalidIndex(p));
    }
    if !(q > 0.0) {
        return Err(Error::InvalidIndex(q));
    }
    Ok(())
}

fn inverse(p: f64) -> f64 {
    if p.is_infinite() {
        0.0
    } else {
        1.0 / p
    }
}

fn summarise(terms: Vec<f64>, q: f64, j_window: (i32, i32), warnings: Vec<String>) -> BesovReport {
    let value = lp_norm(&terms, q);
    let edge = terms.first().copied().unwrap_or(0.0).max(terms.last().copied().unwrap_or(0.0));
    let tail_share = if value == 0.0 {
        0.0
    } else if q.is_infinite() {
        edge / value
    } else {
        (edge / value).powf(q)
    };
    BesovReport { value, j_window, tail_share, level_terms: terms, warnings }
}

/// Wavelet-coefficient seminorm over the levels stored in `coeffs`.
pub fn besov_seminorm_wavelet(coeffs: &WaveletCoefficients, s: f64, p: f64, q: f64) -> Result<BesovReport> {
    check_exponents(p, q)?;
    if coeffs.levels().iter().all(|l| l.values.is_empty()) {
        return Err(Error::Empty);
    }
    let mut warnings = Vec::new();
    let hint = coeffs.system().regularity_hint();
    if hint <= s.abs() {
        warnings.push(format!(
            "wavelet regularity hint {hint} does not exceed |s| = {}",
            s.abs()
        ));
    }
    let exponent = s + 0.5 - inverse(p);
    let terms: Vec<f64> = coeffs
        .levels()
        .iter()
        .map(|l| {
            let inner = l.sequence_norm(p);
            if inner == 0.0 {
                0.0
            } else {
                2f64.powf(l.j as f64 * exponent) * inner
            }
        })
        .collect();
    Ok(summarise(terms, q, coeffs.j_range(), warnings))
}

/// Uniform samples `values[i] = f(t0 + i h)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledFunction {
    pub t0: f64,
    pub h: f64,
    pub values: Vec<C64>,
}

impl SampledFunction {
    /// `n` samples on `[lo, hi)`.
    pub fn from_fn(f: impl Fn(f64) -> C64, domain: Interval, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput("at least two samples are required".into()));
        }
        let h = domain.length() / n as f64;
        let values = (0..n).map(|i| f(domain.lo + i as f64 * h)).collect::<Vec<_>>();
        if values.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidInput("non-finite sample".into()));
        }
        Ok(Self { t0: domain.lo, h, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Riemann-sum `L_p` norm.
    pub fn lp_norm(&self, p: f64) -> f64 {
        riemann_norm(&self.values, self.h, p)
    }
}

fn riemann_norm(values: &[C64], h: f64, p: f64) -> f64 {
    let moduli: Vec<f64> = values.iter().map(|z| z.norm()).collect();
    if p.is_infinite() {
        lp_norm(&moduli, p)
    } else {
        lp_norm(&moduli, p) * h.powf(1.0 / p)
    }
}

fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / x).exp();
    let b = (-1.0 / (1.0 - x)).exp();
    a / (a + b)
}

/// Dyadic band-pass bank `Phi(2^-j xi)`, `j_min <= j <= j_max`, in angular
/// frequency.
///
/// `chi` equals 1 on `|xi| <= 6/7`, vanishes for `|xi| >= 1` and is smooth;
/// `Phi(xi) = chi(xi/2) - chi(xi)` is supported in `6/7 < |xi| < 2`, equals 1
/// on `1 <= |xi| <= 12/7`, and the dilates telescope to a partition of unity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LittlewoodPaleyBank {
    pub j_min: i32,
    pub j_max: i32,
    /// Minimum number of frequency bins below the lower edge of a band for
    /// it to count as resolved.
    pub min_bins: f64,
    /// Largest admissible share of spectral energy in the top octave.
    pub alias_tolerance: f64,
}

impl LittlewoodPaleyBank {
    pub fn new(j_min: i32, j_max: i32) -> Result<Self> {
        if j_min > j_max {
            return Err(Error::InvalidInput(format!("empty band range [{j_min}, {j_max}]")));
        }
        Ok(Self { j_min, j_max, min_bins: 4.0, alias_tolerance: 1e-6 })
    }

    pub fn chi(xi: f64) -> f64 {
        let a = xi.abs();
        1.0 - smooth_step((a - 6.0 / 7.0) * 7.0)
    }

    pub fn phi(xi: f64) -> f64 {
        Self::chi(xi / 2.0) - Self::chi(xi)
    }

    /// `|sum_{j in bank} Phi(2^-j xi) - 1|`.
    pub fn partition_defect(&self, xi: f64) -> f64 {
        let sum: f64 = (self.j_min..=self.j_max).map(|j| Self::phi(xi * 2f64.powi(-j))).sum();
        (sum - 1.0).abs()
    }

    /// Bands `j` of the bank fully resolved on `n` samples with spacing `h`:
    /// the lower edge `6/7 2^j` spans at least `min_bins` frequency bins and
    /// the upper edge `2^{j+1}` stays below half the Nyquist frequency.
    pub fn resolved_window(&self, n: usize, h: f64) -> Option<(i32, i32)> {
        let dxi = 2.0 * PI / (n as f64 * h);
        let nyquist = PI / h;
        let lo = (self.j_min..=self.j_max).find(|&j| 6.0 / 7.0 * 2f64.powi(j) >= self.min_bins * dxi)?;
        let hi = (self.j_min..=self.j_max).rev().find(|&j| 2f64.powi(j + 1) <= nyquist / 2.0)?;
        (lo <= hi).then_some((lo, hi))
    }
}

fn frequencies(n: usize, h: f64) -> Vec<f64> {
    let dxi = 2.0 * PI / (n as f64 * h);
    (0..n)
        .map(|m| {
            let signed = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
            signed * dxi
        })
        .collect()
}

/// Littlewood-Paley seminorm over the resolved part of the bank.
pub fn besov_seminorm_littlewood_paley(
    f: &SampledFunction,
    s: f64,
    p: f64,
    q: f64,
    bank: &LittlewoodPaleyBank,
) -> Result<BesovReport> {
    check_exponents(p, q)?;
    let n = f.len();
    let window = bank.resolved_window(n, f.h).ok_or_else(|| {
        Error::InvalidInput(format!("no band of [{}, {}] is resolved on this grid", bank.j_min, bank.j_max))
    })?;
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(n);
    let inverse_fft = planner.plan_fft_inverse(n);
    let mut spectrum = f.values.clone();
    forward.process(&mut spectrum);

    let xi = frequencies(n, f.h);
    let nyquist = PI / f.h;
    let total: f64 = spectrum.iter().map(|z| z.norm_sqr()).sum();
    if total > 0.0 {
        let top: f64 = spectrum
            .iter()
            .zip(&xi)
            .filter(|(_, w)| w.abs() > nyquist / 2.0)
            .map(|(z, _)| z.norm_sqr())
            .sum();
        let share = top / total;
        if share > bank.alias_tolerance {
            return Err(Error::Aliasing { share });
        }
    }

    let mut terms = Vec::new();
    for j in window.0..=window.1 {
        let scale = 2f64.powi(-j);
        let mut band: Vec<C64> = spectrum
            .iter()
            .zip(&xi)
            .map(|(z, w)| z * LittlewoodPaleyBank::phi(w * scale))
            .collect();
        inverse_fft.process(&mut band);
        for z in band.iter_mut() {
            *z /= n as f64;
        }
        terms.push(2f64.powf(j as f64 * s) * riemann_norm(&band, f.h, p));
    }
    Ok(summarise(terms, q, window, Vec::new()))
}

/// Logarithmic grid of integer difference steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DifferenceGrid {
    /// Smallest step, in samples.
    pub k_min: usize,
    /// Geometric growth of consecutive steps.
    pub ratio: f64,
    /// Largest `order * step` as a fraction of the sampled length.
    pub max_fraction: f64,
}

impl Default for DifferenceGrid {
    fn default() -> Self {
        Self { k_min: 16, ratio: 2f64.powf(0.25), max_fraction: 0.25 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferenceReport {
    pub value: f64,
    /// Step at which the supremum is attained.
    pub h_star: f64,
    pub steps: Vec<f64>,
    pub terms: Vec<f64>,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `sup_h h^{-s} ( int |Delta_h^n f|^{p} dt )^{1/p}` over the step grid, the
/// integral running over points where the whole stencil is sampled.
pub fn finite_difference_besov(
    f: &SampledFunction,
    s: f64,
    p: f64,
    order: usize,
    grid: DifferenceGrid,
) -> Result<DifferenceReport> {
    if !(p > 0.0) {
        return Err(Error::InvalidIndex(p));
    }
    if !(order as f64 > s) {
        return Err(Error::pre(format!("difference order {order} must exceed s = {s}")));
    }
    if !(s > (inverse(p) - 1.0).max(0.0)) {
        return Err(Error::pre(format!("s = {s} must exceed max(1/p - 1, 0)")));
    }
    let len = f.len();
    let k_max = (grid.max_fraction * len as f64 / order as f64).floor() as usize;
    if grid.k_min == 0 || grid.k_min > k_max {
        return Err(Error::InvalidInput(format!(
            "difference steps exhaust the sampled domain ({len} samples, order {order})"
        )));
    }
    let weights: Vec<f64> = (0..=order)
        .map(|k| {
            let sign = if (order - k) % 2 == 0 { 1.0 } else { -1.0 };
            sign * binomial(order, k)
        })
        .collect();

    let mut steps = Vec::new();
    let mut k = grid.k_min as f64;
    while (k.round() as usize) <= k_max {
        let ki = k.round() as usize;
        if steps.last() != Some(&ki) {
            steps.push(ki);
        }
        k *= grid.ratio;
    }

    let mut terms = Vec::with_capacity(steps.len());
    for &ki in &steps {
        let count = len - order * ki;
        let diffs: Vec<C64> = (0..count)
            .map(|i| {
                weights
                    .iter()
                    .enumerate()
                    .map(|(m, w)| f.values[i + m * ki] * *w)
                    .sum()
            })
            .collect();
        let h = ki as f64 * f.h;
        terms.push(h.powf(-s) * riemann_norm(&diffs, f.h, p));
    }
    let (best, value) = terms
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    Ok(DifferenceReport {
        value,
        h_star: steps[best] as f64 * f.h,
        steps: steps.iter().map(|&k| k as f64 * f.h).collect(),
        terms,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reconstruction {
    /// Fitted slope of the affine correction.
    pub c: f64,
    /// `max_t |f(t) - f(0) - c t - sum_j (f_j(t) - f_j(0))|` over the probe grid.
    pub residual: f64,
    pub j_window: (i32, i32),
}

/// Fits the slope `c` minimising the sup over `probe` of
/// `|f(t) - f(0) - c t - sum_j (f_j(t) - f_j(0))|`.
pub fn reconstruct_with_correction<F>(coeffs: &WaveletCoefficients, f: F, probe: &[f64]) -> Result<Reconstruction>
where
    F: Fn(f64) -> C64,
{
    let (j_lo, j_hi) = coeffs.j_range();
    if j_hi < j_lo + 1 {
        return Err(Error::pre("reconstruction needs at least two levels"));
    }
    if probe.is_empty() {
        return Err(Error::Empty);
    }
    let bx = coeffs.truncation_box();
    if !bx.contains(0.0) {
        return Err(Error::OutOfDomain { t: 0.0, lo: bx.lo, hi: bx.hi });
    }
    let projections = (j_lo..=j_hi)
        .map(|j| level_projection(coeffs, j))
        .collect::<Result<Vec<_>>>()?;
    let series = |t: f64| -> Result<C64> {
        let mut acc = C64::default();
        for pj in &projections {
            acc += pj.eval(t)?;
        }
        Ok(acc)
    };
    let base = f(0.0) - series(0.0)?;
    let remainders = probe
        .iter()
        .map(|&t| Ok(f(t) - series(t)? - base))
        .collect::<Result<Vec<C64>>>()?;

    let sup = |c: f64| {
        remainders
            .iter()
            .zip(probe)
            .fold(0.0f64, |m, (r, &t)| m.max((r - c * t).norm()))
    };
    // Least-squares start, then golden-section search on a bracket outside
    // of which the convex objective cannot improve.
    let tt: f64 = probe.iter().map(|t| t * t).sum();
    let c0 = if tt > 0.0 {
        remainders.iter().zip(probe).map(|(r, &t)| r.re * t).sum::<f64>() / tt
    } else {
        0.0
    };
    let t_max = probe.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let g0 = sup(c0);
    let (c, residual) = if t_max == 0.0 || g0 == 0.0 {
        (c0, g0)
    } else {
        let width = 2.0 * g0 / t_max;
        golden_min(&sup, c0 - width, c0 + width)
    };
    Ok(Reconstruction { c, residual, j_window: (j_lo, j_hi) })
}

fn golden_min(g: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut g1, mut g2) = (g(x1), g(x2));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if g1 <= g2 {
            b = x2;
            x2 = x1;
            g2 = g1;
            x1 = b - r * (b - a);
            g1 = g(x1);
        } else {
            a = x1;
            x1 = x2;
            g1 = g2;
            x2 = a + r * (b - a);
            g2 = g(x2);
        }
    }
    if g1 <= g2 {
        (x1, g1)
    } else {
        (x2, g2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::c;
    use crate::wavelet::{daubechies_system, wavelet_coefficients, Quadrature};
    use proptest::prelude::*;

    fn bump(t: f64) -> C64 {
        c((-t * t).exp(), 0.0)
    }

    #[test]
    fn single_wavelet_seminorm_is_exact() {
        let sys = daubechies_system(4).unwrap();
        let bx = Interval::new(-4.0, 4.0).unwrap();
        for (j0, k0) in [(-2, 0), (0, 1), (3, -5)] {
            let co = WaveletCoefficients::from_entries(&sys, (-3, 4), bx, &[(j0, k0, c(1.0, 0.0))]).unwrap();
            for (s, p, q) in [(1.0, 2.0, 2.0), (0.5, 0.5, 1.0), (2.0, f64::INFINITY, 1.0), (1.5, 1.0, f64::INFINITY)] {
                let r = besov_seminorm_wavelet(&co, s, p, q).unwrap();
                assert_eq!(r.value, 2f64.powf(j0 as f64 * (s + 0.5 - inverse(p))));
            }
        }
        let zero = WaveletCoefficients::from_entries(&sys, (0, 1), bx, &[]).unwrap();
        assert_eq!(besov_seminorm_wavelet(&zero, 1.0, 1.0, 1.0).unwrap().value, 0.0);
    }

    #[test]
    fn regularity_warning() {
        let sys = daubechies_system(2).unwrap();
        let bx = Interval::new(0.0, 1.0).unwrap();
        let co = WaveletCoefficients::from_entries(&sys, (0, 0), bx, &[(0, 0, c(1.0, 0.0))]).unwrap();
        assert_eq!(besov_seminorm_wavelet(&co, 1.0, 1.0, 1.0).unwrap().warnings.len(), 1);
        assert!(besov_seminorm_wavelet(&co, 0.5, 1.0, 1.0).unwrap().warnings.is_empty());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn wavelet_seminorm_is_absolutely_homogeneous(
            entries in proptest::collection::vec((0i32..3, -3i64..3, -5.0f64..5.0, -5.0f64..5.0), 1..12),
            lambda_exp in -8i32..8,
            lambda in -3.0f64..3.0,
            s in 0.0f64..2.0,
            p in 0.3f64..4.0,
            q in 0.3f64..4.0,
        ) {
            let sys = daubechies_system(3).unwrap();
            let bx = Interval::new(-1.0, 1.0).unwrap();
            let entries: Vec<_> = entries.into_iter().map(|(j, k, a, b)| (j, k, c(a, b))).collect();
            let co = WaveletCoefficients::from_entries(&sys, (0, 2), bx, &entries).unwrap();
            let base = besov_seminorm_wavelet(&co, s, p, q).unwrap().value;
            let pow2 = 2f64.powi(lambda_exp);
            let scaled = besov_seminorm_wavelet(&co.scaled(c(-pow2, 0.0)), s, p, q).unwrap().value;
            prop_assert_eq!(scaled, pow2 * base);
            let general = besov_seminorm_wavelet(&co.scaled(c(lambda, 0.0)), s, p, q).unwrap().value;
            prop_assert!((general - lambda.abs() * base).abs() <= 1e-12 * (lambda.abs() * base).max(1e-300));
        }
    }

    #[test]
    fn bump_seminorm_is_stable_under_window_growth() {
        let sys = daubechies_system(6).unwrap();
        let bx = Interval::new(-6.0, 6.0).unwrap();
        let narrow = wavelet_coefficients(bump, &sys, (-6, 6), bx, Quadrature::default()).unwrap();
        let wide = wavelet_coefficients(bump, &sys, (-8, 8), bx, Quadrature::default()).unwrap();
        for (s, p, q) in [(1.0, 1.0, 1.0), (2.0, 2.0, 2.0), (1.0, f64::INFINITY, 1.0)] {
            let a = besov_seminorm_wavelet(&narrow, s, p, q).unwrap();
            let b = besov_seminorm_wavelet(&wide, s, p, q).unwrap();
            assert!(a.value.is_finite() && a.value > 0.0);
            assert!((a.value / b.value - 1.0).abs() <= 0.05, "{} vs {}", a.value, b.value);
        }
    }

    #[test]
    fn partition_of_unity() {
        let bank = LittlewoodPaleyBank::new(-10, 10).unwrap();
        for i in 0..2000 {
            let xi = 2f64.powf(-9.0 + 18.0 * i as f64 / 2000.0);
            assert!(bank.partition_defect(xi) <= 1e-8);
            assert!(bank.partition_defect(-xi) <= 1e-8);
        }
        assert_eq!(LittlewoodPaleyBank::phi(0.8), 0.0);
        assert_eq!(LittlewoodPaleyBank::phi(1.3), 1.0);
        assert_eq!(LittlewoodPaleyBank::phi(2.0), 0.0);
    }

    #[test]
    fn littlewood_paley_single_annulus() {
        // f^ supported where Phi(2^-j .) = 1 and its neighbours vanish.
        let n = 1 << 14;
        let h = 1.0 / 32.0;
        let xi = frequencies(n, h);
        for (j, s, p) in [(1, 1.0, 2.0), (2, 2.0, 1.0), (0, 1.5, f64::INFINITY)] {
            let centre = 2f64.powi(j) * 1.36;
            let half = 2f64.powi(j) * 0.3;
            let mut spectrum: Vec<C64> = xi
                .iter()
                .map(|w| {
                    let u = (w.abs() - centre) / half;
                    if u.abs() < 1.0 {
                        c((-1.0 / (1.0 - u * u)).exp(), 0.0)
                    } else {
                        C64::default()
                    }
                })
                .collect();
            FftPlanner::<f64>::new().plan_fft_inverse(n).process(&mut spectrum);
            let values: Vec<C64> = spectrum.iter().map(|z| z / n as f64).collect();
            let f = SampledFunction { t0: -(n as f64) * h / 2.0, h, values };
            let bank = LittlewoodPaleyBank::new(-3, 4).unwrap();
            let r = besov_seminorm_littlewood_paley(&f, s, p, p, &bank).unwrap();
            let expected = 2f64.powf(j as f64 * s) * f.lp_norm(p);
            assert!((r.value / expected - 1.0).abs() <= 0.02, "{} vs {expected}", r.value);
        }
    }

    #[test]
    fn littlewood_paley_zero_and_aliasing() {
        let bank = LittlewoodPaleyBank::new(-2, 3).unwrap();
        let zero = SampledFunction { t0: 0.0, h: 1.0 / 32.0, values: vec![C64::default(); 4096] };
        assert_eq!(besov_seminorm_littlewood_paley(&zero, 1.0, 1.0, 1.0, &bank).unwrap().value, 0.0);
        let noisy = SampledFunction {
            t0: 0.0,
            h: 1.0,
            values: (0..256).map(|i| c(if i % 2 == 0 { 1.0 } else { -1.0 }, 0.0)).collect(),
        };
        let wide = LittlewoodPaleyBank::new(-6, 3).unwrap();
        assert!(matches!(
            besov_seminorm_littlewood_paley(&noisy, 1.0, 1.0, 1.0, &wide),
            Err(Error::Aliasing { .. })
        ));
    }

    #[test]
    fn finite_differences() {
        let domain = Interval::new(-8.0, 8.0).unwrap();
        let zero = SampledFunction::from_fn(|_| C64::default(), domain, 4096).unwrap();
        assert_eq!(finite_difference_besov(&zero, 1.5, 1.0, 2, DifferenceGrid::default()).unwrap().value, 0.0);
        let affine = SampledFunction::from_fn(|t| c(2.0 * t - 1.0, 0.0), domain, 4096).unwrap();
        assert!(finite_difference_besov(&affine, 1.5, 1.0, 2, DifferenceGrid::default()).unwrap().value <= 1e-9);

        let sqrt_abs = |t: f64| c(t.abs().sqrt(), 0.0);
        let coarse = SampledFunction::from_fn(sqrt_abs, domain, 1 << 14).unwrap();
        let fine = SampledFunction::from_fn(sqrt_abs, domain, 1 << 15).unwrap();
        let g = DifferenceGrid::default();
        let a = finite_difference_besov(&coarse, 1.5, 1.0, 2, g).unwrap().value;
        let b = finite_difference_besov(&fine, 1.5, 1.0, 2, DifferenceGrid { k_min: 2 * g.k_min, ..g }).unwrap().value;
        assert!(a.is_finite() && a > 0.0);
        assert!((a / b - 1.0).abs() <= 0.10, "{a} vs {b}");

        assert!(finite_difference_besov(&coarse, 2.5, 1.0, 2, g).is_err());
        let short = SampledFunction::from_fn(sqrt_abs, domain, 64).unwrap();
        assert!(finite_difference_besov(&short, 1.5, 1.0, 2, g).is_err());
    }

    #[test]
    fn reconstruction_of_exact_cases() {
        let sys = daubechies_system(4).unwrap();
        let probe: Vec<f64> = (0..=400).map(|i| -2.0 + i as f64 * 0.01).collect();

        let bx = Interval::new(-4.0, 12.0).unwrap();
        let s = sys.clone();
        let co = wavelet_coefficients(move |t| c(s.psi_at(t), 0.0), &sys, (-2, 2), bx, Quadrature::default()).unwrap();
        let s = sys.clone();
        let probe_psi: Vec<f64> = (0..=400).map(|i| -1.0 + i as f64 * 0.03).collect();
        let r = reconstruct_with_correction(&co, move |t| c(s.psi_at(t), 0.0), &probe_psi).unwrap();
        assert!(r.c.abs() <= 1e-5 && r.residual <= 1e-5, "{r:?}");

        let bx = Interval::new(-4.0, 4.0).unwrap();
        let co = wavelet_coefficients(|t| c(t, 0.0), &sys, (-2, 3), bx, Quadrature::default()).unwrap();
        let r = reconstruct_with_correction(&co, |t| c(t, 0.0), &probe).unwrap();
        assert!((r.c - 1.0).abs() <= 1e-5 && r.residual <= 1e-5, "{r:?}");

        let single = WaveletCoefficients::from_entries(&sys, (0, 0), bx, &[]).unwrap();
        assert!(reconstruct_with_correction(&single, |t| c(t, 0.0), &probe).is_err());
    }
}
