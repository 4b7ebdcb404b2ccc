//! Certified lower bounds on `m_p` Schur multiplier norms, `0 < p <= 1`.
//!
//! For `p <= 1` the multiplier norm is the supremum of `||A o (xi (x) eta)||_p`
//! over unit vectors, so every feasible pair gives a lower bound. Left and
//! right diagonal unitaries do not change singular values, hence only the
//! moduli `a = |xi|`, `b = |eta|` matter and the search runs over them.
//!
//! With `b` fixed, `w -> sum_i sigma_i(D_sqrt(w) A D_b)^p` is concave on the
//! simplex `w = a^2`, and its Euler-scaled gradient is
//! `w_j d_j = (p/2) sum_i |U_ji|^2 sigma_i^p`. The inner step sets
//! `w_j` proportional to `sum_i |U_ji|^2 sigma_i^p` (the KKT fixed-point
//! map), with geometric damping if a full step would not ascend.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{c, ensure_finite, CMatrix, C64};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpConfig {
    pub restarts: usize,
    pub tol: f64,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for MpConfig {
    fn default() -> Self {
        Self {
            restarts: 32,
            tol: 1e-9,
            max_iters: 5000,
            seed: 0,
        }
    }
}

/// Lower bound on `||A||_{m_p}` with its witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierEstimate {
    pub value: f64,
    pub p: f64,
    pub xi: Vec<C64>,
    pub eta: Vec<C64>,
    /// Number of starts run (warm starts plus random restarts).
    pub restarts: usize,
    pub converged: bool,
    /// Final value of each start, in start order.
    pub trace: Vec<f64>,
    /// Iterations used by each start.
    pub iterations: Vec<usize>,
    /// Index of the winning start.
    pub best_start: usize,
    pub seed: u64,
}

/// `||A o (xi (x) eta)||_p` with `(xi (x) eta)_{jk} = xi_j eta_k`.
pub fn schur_ratio(a: &CMatrix, xi: &[C64], eta: &[C64], p: f64) -> Result<f64> {
    if xi.len() != a.nrows() || eta.len() != a.ncols() {
        return Err(Error::ShapeMismatch {
            left: a.shape(),
            right: (xi.len(), eta.len()),
        });
    }
    let x = CMatrix::from_fn(a.nrows(), a.ncols(), |j, k| a[(j, k)] * xi[j] * eta[k]);
    Ok(crate::spectral::singular_values(&x)?.schatten(p))
}

#[derive(Clone, Copy, PartialEq)]
enum Side {
    Left,
    Right,
}

/// `sum sigma^p` at `(left, right)` and the fixed-point weights for `side`.
fn weights(a: &CMatrix, left: &[f64], right: &[f64], p: f64, side: Side) -> (f64, Vec<f64>) {
    let x = CMatrix::from_fn(a.nrows(), a.ncols(), |j, k| a[(j, k)] * (left[j] * right[k]));
    let svd = x.svd(side == Side::Left, side == Side::Right);
    let sp: Vec<f64> = svd.singular_values.iter().map(|s| s.powf(p)).collect();
    let total: f64 = sp.iter().sum();
    let w = match side {
        Side::Left => {
            let u = svd.u.expect("requested U");
            (0..u.nrows())
                .map(|j| (0..sp.len()).map(|i| u[(j, i)].norm_sqr() * sp[i]).sum())
                .collect()
        }
        Side::Right => {
            let vt = svd.v_t.expect("requested V");
            (0..vt.ncols())
                .map(|k| (0..sp.len()).map(|i| vt[(i, k)].norm_sqr() * sp[i]).sum())
                .collect()
        }
    };
    (total, w)
}

fn normalize_moduli(v: &mut [f64]) -> bool {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 && norm.is_finite() {
        v.iter_mut().for_each(|x| *x /= norm);
        true
    } else {
        false
    }
}

struct Run {
    pow_sum: f64,
    left: Vec<f64>,
    right: Vec<f64>,
    iterations: usize,
    converged: bool,
}

/// One ascent half-step on `side`. `current` is `sum sigma^p` at the present
/// point and `w` the fixed-point weights for `side` there. Returns the new
/// pow-sum and the weights for the opposite side at the accepted point.
fn half_step(
    a: &CMatrix,
    p: f64,
    left: &mut Vec<f64>,
    right: &mut Vec<f64>,
    side: Side,
    current: f64,
    w: &[f64],
) -> (f64, Vec<f64>, bool) {
    let other = if side == Side::Left { Side::Right } else { Side::Left };
    let total: f64 = w.iter().sum();
    let old = if side == Side::Left { left.clone() } else { right.clone() };
    if total > 0.0 && total.is_finite() {
        let target: Vec<f64> = w.iter().map(|x| x / total).collect();
        let mut tau = 1.0;
        for _ in 0..8 {
            let mut cand: Vec<f64> = old
                .iter()
                .zip(&target)
                .map(|(o, t)| ((o * o).powf(1.0 - tau) * t.powf(tau)).sqrt())
                .collect();
            if normalize_moduli(&mut cand) {
                let (s, wo) = if side == Side::Left {
                    weights(a, &cand, right, p, other)
                } else {
                    weights(a, left, &cand, p, other)
                };
                if s >= current {
                    if side == Side::Left {
                        *left = cand;
                    } else {
                        *right = cand;
                    }
                    return (s, wo, true);
                }
            }
            tau *= 0.5;
        }
    }
    let (s, wo) = weights(a, left, right, p, other);
    (s, wo, false)
}

fn ascend(a: &CMatrix, p: f64, mut left: Vec<f64>, mut right: Vec<f64>, cfg: &MpConfig) -> Run {
    if !normalize_moduli(&mut left) || !normalize_moduli(&mut right) {
        return Run {
            pow_sum: 0.0,
            left,
            right,
            iterations: 0,
            converged: true,
        };
    }
    let (mut s, mut wl) = weights(a, &left, &right, p, Side::Left);
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..cfg.max_iters {
        iterations = it + 1;
        let start = s;
        let (s1, wr, moved_l) = half_step(a, p, &mut left, &mut right, Side::Left, s, &wl);
        let (s2, wl2, moved_r) = half_step(a, p, &mut left, &mut right, Side::Right, s1, &wr);
        s = s2;
        wl = wl2;
        let gain = if start > 0.0 { (s / start).powf(1.0 / p) - 1.0 } else { 0.0 };
        if (!moved_l && !moved_r) || gain < cfg.tol {
            converged = true;
            break;
        }
    }
    Run {
        pow_sum: s,
        left,
        right,
        iterations,
        converged,
    }
}

/// Multi-start alternating ascent for `sup ||A o (xi (x) eta)||_p`.
pub fn mp_lower_bound(a: &CMatrix, p: f64, cfg: &MpConfig) -> Result<MultiplierEstimate> {
    mp_lower_bound_warm(a, p, cfg, &[])
}

/// As [`mp_lower_bound`], with extra starting pairs (moduli of `xi`, `eta`)
/// run before the random restarts.
pub fn mp_lower_bound_warm(
    a: &CMatrix,
    p: f64,
    cfg: &MpConfig,
    warm: &[(Vec<f64>, Vec<f64>)],
) -> Result<MultiplierEstimate> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::UnsupportedIndex(p));
    }
    if a.is_empty() {
        return Err(Error::Empty);
    }
    ensure_finite(a)?;
    let (rows, cols) = a.shape();
    for (l, r) in warm {
        if l.len() != rows || r.len() != cols {
            return Err(Error::ShapeMismatch {
                left: (rows, cols),
                right: (l.len(), r.len()),
            });
        }
    }

    let mut starts: Vec<(Vec<f64>, Vec<f64>)> = warm
        .iter()
        .map(|(l, r)| (l.iter().map(|x| x.abs()).collect(), r.iter().map(|x| x.abs()).collect()))
        .collect();
    for r in 0..cfg.restarts {
        let mut s = rng::stream(cfg.seed, r as u64);
        let l: Vec<f64> = rng::unit_vector(&mut s, rows).iter().map(|z| z.norm()).collect();
        let rr: Vec<f64> = rng::unit_vector(&mut s, cols).iter().map(|z| z.norm()).collect();
        starts.push((l, rr));
    }
    if starts.is_empty() {
        return Err(Error::pre("mp_lower_bound needs at least one start"));
    }

    let runs: Vec<Run> = starts
        .into_par_iter()
        .map(|(l, r)| ascend(a, p, l, r, cfg))
        .collect();

    let trace: Vec<f64> = runs.iter().map(|r| r.pow_sum.max(0.0).powf(1.0 / p)).collect();
    let iterations: Vec<usize> = runs.iter().map(|r| r.iterations).collect();
    let best_start = (0..runs.len())
        .max_by(|&i, &j| trace[i].partial_cmp(&trace[j]).unwrap_or(std::cmp::Ordering::Equal).then(j.cmp(&i)))
        .unwrap_or(0);
    let best = &runs[best_start];
    let to_unit = |v: &[f64]| -> Vec<C64> {
        let mut v = v.to_vec();
        if !normalize_moduli(&mut v) {
            v = vec![0.0; v.len()];
            v[0] = 1.0;
        }
        v.into_iter().map(|x| c(x, 0.0)).collect()
    };
    let xi = to_unit(&best.left);
    let eta = to_unit(&best.right);
    let value = schur_ratio(a, &xi, &eta, p)?;
    Ok(MultiplierEstimate {
        value,
        p,
        xi,
        eta,
        restarts: runs.len(),
        converged: best.converged,
        trace,
        iterations,
        best_start,
        seed: cfg.seed,
    })
}

impl MultiplierEstimate {
    /// Recomputes `||A o (xi (x) eta)||_p` from the stored witness.
    pub fn recompute(&self, a: &CMatrix) -> Result<f64> {
        schur_ratio(a, &self.xi, &self.eta, self.p)
    }

    /// Textual `key = value` record; vectors as space-separated `re,im`.
    pub fn to_record(&self) -> String {
        let vec = |v: &[C64]| v.iter().map(|z| format!("{},{}", z.re, z.im)).collect::<Vec<_>>().join(" ");
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        let ints = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        format!(
            "value = {}\np = {}\nseed = {}\nrestarts = {}\nconverged = {}\nbest_start = {}\niterations = {}\ntrace = {}\nxi = {}\neta = {}\n",
            self.value,
            self.p,
            self.seed,
            self.restarts,
            self.converged,
            self.best_start,
            ints(&self.iterations),
            list(&self.trace),
            vec(&self.xi),
            vec(&self.eta),
        )
    }

    pub fn from_record(text: &str) -> Result<Self> {
        let map = crate::config::parse_key_values(text)?;
        let get = |k: &str| {
            map.get(k)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| Error::Parse { line: 0, msg: format!("missing key `{k}`") })
        };
        let line_of = |k: &str| map.get(k).map(|(l, _)| *l).unwrap_or(0);
        let num = |k: &str| -> Result<f64> {
            get(k)?.parse::<f64>().map_err(|e| Error::Parse { line: line_of(k), msg: format!("{k}: {e}") })
        };
        let int = |k: &str| -> Result<u64> {
            get(k)?.parse::<u64>().map_err(|e| Error::Parse { line: line_of(k), msg: format!("{k}: {e}") })
        };
        let floats = |k: &str| -> Result<Vec<f64>> {
            get(k)?
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|e| Error::Parse { line: line_of(k), msg: format!("{k}: {e}") }))
                .collect()
        };
        let usizes = |k: &str| -> Result<Vec<usize>> {
            get(k)?
                .split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|e| Error::Parse { line: line_of(k), msg: format!("{k}: {e}") }))
                .collect()
        };
        let cvec = |k: &str| -> Result<Vec<C64>> {
            get(k)?
                .split_whitespace()
                .map(|t| {
                    let (re, im) = t
                        .split_once(',')
                        .ok_or_else(|| Error::Parse { line: line_of(k), msg: format!("{k}: expected re,im") })?;
                    let f = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse { line: line_of(k), msg: format!("{k}: {e}") });
                    Ok(c(f(re)?, f(im)?))
                })
                .collect()
        };
        Ok(Self {
            value: num("value")?,
            p: num("p")?,
            seed: int("seed")?,
            restarts: int("restarts")? as usize,
            converged: get("converged")? == "true",
            best_start: int("best_start")? as usize,
            iterations: usizes("iterations")?,
            trace: floats("trace")?,
            xi: cvec("xi")?,
            eta: cvec("eta")?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{diag_real, ones};
    use crate::spectral::lp_norm;

    fn quick() -> MpConfig {
        MpConfig {
            restarts: 8,
            ..MpConfig::default()
        }
    }

    #[test]
    fn single_entry() {
        let a = CMatrix::from_element(1, 1, c(-3.0, 4.0));
        let est = mp_lower_bound(&a, 0.5, &quick()).unwrap();
        assert!((est.value - 5.0).abs() < 1e-12);
        assert!((est.xi[0].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn all_ones_is_one() {
        for &p in &[0.3, 0.5, 1.0] {
            let est = mp_lower_bound(&ones(6, 6), p, &quick()).unwrap();
            assert!((est.value - 1.0).abs() < 1e-9, "p = {p}: {}", est.value);
        }
    }

    /// Brute force over a grid of the simplex for `w = |xi|^2`, `z = |eta|^2`
    /// on a 3x3 diagonal: `||diag(l) o (xi (x) eta)||_p^p = sum |l_j|^p (w_j z_j)^(p/2)`.
    fn simplex_brute_force(l: &[f64; 3], p: f64, steps: usize) -> f64 {
        let mut grid = Vec::new();
        for i in 0..=steps {
            for j in 0..=(steps - i) {
                let k = steps - i - j;
                grid.push([i as f64 / steps as f64, j as f64 / steps as f64, k as f64 / steps as f64]);
            }
        }
        let mut best: f64 = 0.0;
        // the optimum has w = z, so a joint search over the diagonal slice is
        // checked against a sparse full search
        for w in &grid {
            let s: f64 = (0..3).map(|t| l[t].abs().powf(p) * w[t].powf(p)).sum();
            best = best.max(s.powf(1.0 / p));
        }
        for w in grid.iter().step_by(7) {
            for z in grid.iter().step_by(7) {
                let s: f64 = (0..3).map(|t| l[t].abs().powf(p) * (w[t] * z[t]).powf(p / 2.0)).sum();
                best = best.max(s.powf(1.0 / p));
            }
        }
        best
    }

    #[test]
    fn diagonal_matches_brute_force_and_lagrange() {
        let l = [1.0, -2.0, 0.5];
        for &p in &[0.5, 2.0 / 3.0] {
            let brute = simplex_brute_force(&l, p, 400);
            let ps = p / (1.0 - p);
            let lagrange = lp_norm(&l, ps);
            assert!((brute - lagrange).abs() / lagrange < 1e-3, "grid {brute} vs {lagrange}");
            let est = mp_lower_bound(&diag_real(&l), p, &quick()).unwrap();
            assert!(est.value <= lagrange * (1.0 + 1e-12));
            assert!((est.value - lagrange).abs() / lagrange < 1e-6, "{} vs {lagrange}", est.value);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(mp_lower_bound(&ones(2, 2), 1.5, &quick()), Err(Error::UnsupportedIndex(_))));
        assert!(matches!(mp_lower_bound(&CMatrix::zeros(0, 0), 0.5, &quick()), Err(Error::Empty)));
    }

    #[test]
    fn zero_matrix_gives_zero() {
        let est = mp_lower_bound(&CMatrix::zeros(3, 3), 0.5, &quick()).unwrap();
        assert_eq!(est.value, 0.0);
    }

    #[test]
    fn witness_reproduces_value_and_is_unit() {
        let mut r = rng::stream(3, 3);
        let a = rng::gaussian_matrix(&mut r, 5, 4);
        let est = mp_lower_bound(&a, 0.5, &quick()).unwrap();
        let nx = crate::matrix::vector_norm(&est.xi);
        let ne = crate::matrix::vector_norm(&est.eta);
        assert!((nx - 1.0).abs() < 1e-12 && (ne - 1.0).abs() < 1e-12);
        let again = est.recompute(&a).unwrap();
        assert!((again - est.value).abs() <= 1e-10 * est.value);
        assert_eq!(est.trace.len(), 8);
        assert!(est.trace.iter().all(|t| *t <= est.value * (1.0 + 1e-9)));
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let mut r = rng::stream(9, 9);
        let a = rng::gaussian_matrix(&mut r, 4, 4);
        let e1 = mp_lower_bound(&a, 0.75, &quick()).unwrap();
        let e2 = mp_lower_bound(&a, 0.75, &quick()).unwrap();
        assert_eq!(e1, e2);
    }

    #[test]
    fn record_round_trip() {
        let mut r = rng::stream(4, 4);
        let a = rng::gaussian_matrix(&mut r, 3, 3);
        let est = mp_lower_bound(&a, 0.5, &quick()).unwrap();
        let back = MultiplierEstimate::from_record(&est.to_record()).unwrap();
        assert_eq!(back, est);
    }
}
