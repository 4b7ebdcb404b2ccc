//! Seeded random pairs `(A, B)` of Hermitian matrices with `B - A` low rank
//! or small.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{c, CMatrix, C64};
use crate::rng;
use crate::spectral::HermitianOperator;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SpectrumLaw {
    /// Eigenvalues uniform on `[lo, hi]`.
    Uniform { lo: f64, hi: f64 },
    /// Eigenvalues `scale * N(0,1)`, confined to `[-4 scale, 4 scale]`.
    Gaussian { scale: f64 },
    /// Eigenvalues `+-2^-k` with `k` uniform in `0..=8`.
    Dyadic,
}

impl SpectrumLaw {
    /// Interval every drawn pair is confined to.
    pub fn range(&self) -> (f64, f64) {
        match *self {
            SpectrumLaw::Uniform { lo, hi } => (lo, hi),
            SpectrumLaw::Gaussian { scale } => (-4.0 * scale, 4.0 * scale),
            SpectrumLaw::Dyadic => (-1.0, 1.0),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            SpectrumLaw::Uniform { lo, hi } => lo.is_finite() && hi.is_finite() && lo < hi,
            SpectrumLaw::Gaussian { scale } => scale.is_finite() && scale > 0.0,
            SpectrumLaw::Dyadic => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid spectrum law {self}")))
        }
    }

    fn sample(&self, s: &mut rng::Stream) -> f64 {
        match *self {
            SpectrumLaw::Uniform { lo, hi } => rng::uniform(s, lo, hi),
            SpectrumLaw::Gaussian { scale } => (scale * rng::gaussian(s)).clamp(-4.0 * scale, 4.0 * scale),
            SpectrumLaw::Dyadic => {
                let k = (rng::uniform(s, 0.0, 9.0).floor() as i32).min(8);
                let sign = if rng::uniform(s, 0.0, 1.0) < 0.5 { -1.0 } else { 1.0 };
                sign * 2f64.powi(-k)
            }
        }
    }
}

impl fmt::Display for SpectrumLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectrumLaw::Uniform { lo, hi } => write!(f, "uniform:{lo}:{hi}"),
            SpectrumLaw::Gaussian { scale } => write!(f, "gaussian:{scale}"),
            SpectrumLaw::Dyadic => f.write_str("dyadic"),
        }
    }
}

impl FromStr for SpectrumLaw {
    type Err = Error;

    /// `uniform:<lo>:<hi>`, `gaussian[:<scale>]` or `dyadic`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| {
            t.parse::<f64>()
                .map_err(|e| Error::InvalidInput(format!("spectrum law `{s}`: {e}")))
        };
        let law = match parts.as_slice() {
            ["uniform", lo, hi] => SpectrumLaw::Uniform { lo: num(lo)?, hi: num(hi)? },
            ["gaussian"] => SpectrumLaw::Gaussian { scale: 1.0 },
            ["gaussian", scale] => SpectrumLaw::Gaussian { scale: num(scale)? },
            ["dyadic"] => SpectrumLaw::Dyadic,
            _ => {
                return Err(Error::InvalidInput(format!(
                    "unknown spectrum law `{s}` (uniform:<lo>:<hi>, gaussian[:<scale>], dyadic)"
                )))
            }
        };
        law.validate()?;
        Ok(law)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PerturbationLaw {
    /// `sum_{i<rank} s_i c_i v_i v_i*` with random signs `s_i`, unit vectors
    /// `v_i` and `c_i` log-uniform on `[lo, hi]`.
    Rank { rank: usize, lo: f64, hi: f64 },
    /// `scale * (G + G*) / (2 sqrt(dim))` with Ginibre `G`.
    GaussianScaled { scale: f64 },
    /// `diag(scale * N(0,1))` in the standard basis.
    Diagonal { scale: f64 },
}

impl PerturbationLaw {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            PerturbationLaw::Rank { rank, lo, hi } => (1..=4).contains(&rank) && lo > 0.0 && lo <= hi && hi.is_finite(),
            PerturbationLaw::GaussianScaled { scale } | PerturbationLaw::Diagonal { scale } => {
                scale.is_finite() && scale >= 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid perturbation law {self} (rank must be 1..=4)")))
        }
    }

    fn sample(&self, s: &mut rng::Stream, n: usize) -> CMatrix {
        match *self {
            PerturbationLaw::Rank { rank, lo, hi } => {
                let mut p = CMatrix::zeros(n, n);
                for _ in 0..rank {
                    let mag = rng::uniform(s, lo.ln(), hi.ln()).exp();
                    let sign = if rng::uniform(s, 0.0, 1.0) < 0.5 { -1.0 } else { 1.0 };
                    let v = rng::unit_vector(s, n);
                    for j in 0..n {
                        for k in 0..n {
                            p[(j, k)] += v[j] * v[k].conj() * (sign * mag);
                        }
                    }
                }
                p
            }
            PerturbationLaw::GaussianScaled { scale } => {
                rng::gaussian_hermitian(s, n) * c(scale / (n as f64).sqrt(), 0.0)
            }
            PerturbationLaw::Diagonal { scale } => {
                let d: Vec<f64> = (0..n).map(|_| scale * rng::gaussian(s)).collect();
                crate::matrix::diag_real(&d)
            }
        }
    }
}

impl fmt::Display for PerturbationLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PerturbationLaw::Rank { rank, lo, hi } => write!(f, "rank:{rank}:{lo}:{hi}"),
            PerturbationLaw::GaussianScaled { scale } => write!(f, "gaussian:{scale}"),
            PerturbationLaw::Diagonal { scale } => write!(f, "diagonal:{scale}"),
        }
    }
}

impl FromStr for PerturbationLaw {
    type Err = Error;

    /// `rank:<r>[:<lo>:<hi>]`, `gaussian:<scale>` or `diagonal:<scale>`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| {
            t.parse::<f64>()
                .map_err(|e| Error::InvalidInput(format!("perturbation law `{s}`: {e}")))
        };
        let rank = |t: &str| {
            t.parse::<usize>()
                .map_err(|e| Error::InvalidInput(format!("perturbation law `{s}`: {e}")))
        };
        let law = match parts.as_slice() {
            ["rank", r] => PerturbationLaw::Rank { rank: rank(r)?, lo: 1e-3, hi: 1.0 },
            ["rank", r, lo, hi] => PerturbationLaw::Rank { rank: rank(r)?, lo: num(lo)?, hi: num(hi)? },
            ["gaussian", scale] => PerturbationLaw::GaussianScaled { scale: num(scale)? },
            ["diagonal", scale] => PerturbationLaw::Diagonal { scale: num(scale)? },
            _ => {
                return Err(Error::InvalidInput(format!(
                    "unknown perturbation law `{s}` (rank:<r>[:<lo>:<hi>], gaussian:<scale>, diagonal:<scale>)"
                )))
            }
        };
        law.validate()?;
        Ok(law)
    }
}

/// `count` seeded draws of `A = U diag(lambda) U*`, `B = A + P`.
///
/// Trial `i` uses the stream `(master_seed, i)`, so any single trial can be
/// regenerated without the others. If `B` leaves the law's range, both
/// matrices are contracted affinely towards the midpoint of the range; this
/// keeps `rank(B - A)` and rescales `B - A` by the contraction factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub dim: usize,
    pub count: usize,
    pub spectrum_law: SpectrumLaw,
    pub perturbation_law: PerturbationLaw,
    pub master_seed: u64,
}

pub struct Pair {
    pub a: HermitianOperator,
    pub b: HermitianOperator,
    /// Affine contraction factor applied to both (1 if none).
    pub contraction: f64,
}

impl Ensemble {
    pub fn new(
        dim: usize,
        count: usize,
        spectrum_law: SpectrumLaw,
        perturbation_law: PerturbationLaw,
        master_seed: u64,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Empty);
        }
        spectrum_law.validate()?;
        perturbation_law.validate()?;
        Ok(Self { dim, count, spectrum_law, perturbation_law, master_seed })
    }

    pub fn range(&self) -> (f64, f64) {
        self.spectrum_law.range()
    }

    pub fn draw(&self, trial: usize) -> Result<Pair> {
        let n = self.dim;
        let mut s = rng::stream(self.master_seed, trial as u64);
        let lambda: Vec<f64> = (0..n).map(|_| self.spectrum_law.sample(&mut s)).collect();
        let u = rng::haar_unitary(&mut s, n);
        let mut scaled = u.clone();
        for k in 0..n {
            for j in 0..n {
                scaled[(j, k)] *= lambda[k];
            }
        }
        let a = scaled * u.adjoint();
        let b = &a + self.perturbation_law.sample(&mut s, n);

        let (lo, hi) = self.range();
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let a = HermitianOperator::new(a)?;
        let b = HermitianOperator::new(b)?;
        let reach = a
            .eigenvalues()
            .iter()
            .chain(b.eigenvalues())
            .fold(0.0f64, |m, &v| m.max((v - mid).abs()));
        if reach <= half {
            return Ok(Pair { a, b, contraction: 1.0 });
        }
        let kappa = half / reach;
        let shift = |m: &CMatrix| -> Result<HermitianOperator> {
            let mut out = m * c(kappa, 0.0);
            for j in 0..n {
                out[(j, j)] += C64::new(mid * (1.0 - kappa), 0.0);
            }
            HermitianOperator::new(out)
        };
        Ok(Pair {
            a: shift(a.entries())?,
            b: shift(b.entries())?,
            contraction: kappa,
        })
    }
}
