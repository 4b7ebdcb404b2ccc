//! Experiment drivers and their reports.
//!
//! Every driver returns an [`ExperimentReport`] whose summary is a pure
//! function of its per-trial records. [`run_config`] maps a [`RunConfig`]
//! (command `experiment`, parameter `name`) onto a driver after filling in
//! defaults, so a stored config replays the same computation.

mod commutator;
mod ensemble;
mod growth;
mod ratio;
mod report;

pub use commutator::{quasicommutator_embedding, quasicommutator_trials, Embedding};
pub use ensemble::{Ensemble, Pair, PerturbationLaw, SpectrumLaw};
pub use growth::{
    compression_probes, periodic_counterexample, periodic_pairs, toeplitz_family, toeplitz_growth, toeplitz_ratio,
};
pub use ratio::{
    holder_seminorm, holder_weak_ratio, lipschitz_envelope, lipschitz_ratio, submajorization_sweep, Envelope,
    EnvelopeConfig, DISCARD_BELOW, SPOT_STRIDE,
};
pub use report::{
    fit_loglog, replay_bundle, Artifact, ExperimentReport, Fingerprint, ReplayOutcome, SlopeFit, SpotCheck, Summary,
    TrialRecord, CONFIG_FILE, TRIALS_FILE,
};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::function::ScalarFunction;
use crate::matrix::C64;
use crate::rng;
use crate::schur::MpConfig;
use crate::spectral::{apply_complex_function, singular_values, HermitianOperator, SingularSpectrum};
use crate::wavelet::{default_order, Quadrature};

pub const TOEPLITZ_GROWTH: &str = "toeplitz-growth";
pub const PERIODIC: &str = "periodic";
pub const PERIODIC_PAIRS: &str = "periodic-pairs";
pub const LIPSCHITZ_RATIO: &str = "lipschitz-ratio";
pub const HOLDER_WEAK: &str = "holder-weak";
pub const SUBMAJORIZATION: &str = "submajorization";
pub const QUASICOMMUTATOR: &str = "quasicommutator";

pub const EXPERIMENTS: [&str; 7] = [
    TOEPLITZ_GROWTH,
    PERIODIC,
    PERIODIC_PAIRS,
    LIPSCHITZ_RATIO,
    HOLDER_WEAK,
    SUBMAJORIZATION,
    QUASICOMMUTATOR,
];

/// Singular values of a difference below `8 * dim * eps * scale` are
/// round-off of the operands (scale = their spectral radius) and are zeroed.
pub fn difference_floor(dim: usize, scale: f64) -> f64 {
    8.0 * dim as f64 * f64::EPSILON * scale
}

fn floored(s: SingularSpectrum, floor: f64) -> SingularSpectrum {
    SingularSpectrum::from_unsorted(s.values().iter().map(|&v| if v <= floor { 0.0 } else { v }).collect())
}

/// Spectra of `f(A) - f(B)` and `A - B`, each floored relative to the size
/// of its operands rather than of the difference.
pub fn difference_spectra(
    f: &ScalarFunction,
    a: &HermitianOperator,
    b: &HermitianOperator,
) -> Result<(SingularSpectrum, SingularSpectrum)> {
    let n = a.dim();
    let eval = |t: f64| f.eval(t);
    let fa = apply_complex_function(eval, a)?;
    let fb = apply_complex_function(eval, b)?;
    let radius = |op: &HermitianOperator| op.eigenvalues().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let fscale = a
        .eigenvalues()
        .iter()
        .chain(b.eigenvalues())
        .fold(0.0f64, |m, &t| m.max(f.eval(t).norm()));
    let x = floored(singular_values(&(fa - fb))?, difference_floor(n, fscale));
    let y = floored(
        singular_values(&(a.entries() - b.entries()))?,
        difference_floor(n, radius(a).max(radius(b))),
    );
    Ok((x, y))
}

pub(crate) fn summarize(id: &str, records: &[TrialRecord]) -> Result<Summary> {
    match id {
        TOEPLITZ_GROWTH => growth::summarize_toeplitz(records),
        PERIODIC => growth::summarize_periodic(records),
        PERIODIC_PAIRS => growth::summarize_pairs(records),
        LIPSCHITZ_RATIO => ratio::summarize_ensembles(records, &["ratio", "ratio_over_envelope"]),
        HOLDER_WEAK => ratio::summarize_ensembles(records, &["w", "w_over_seminorm"]),
        SUBMAJORIZATION => ratio::summarize_ensembles(records, &["partial_sum_ratio", "c_trial"]),
        QUASICOMMUTATOR => commutator::summarize(records),
        _ => Err(unknown(id)),
    }
}

fn unknown(name: &str) -> Error {
    Error::InvalidInput(format!("unknown experiment `{name}` (available: {})", EXPERIMENTS.join(", ")))
}

/// Fills every parameter the named experiment reads with its default, so the
/// resolved config fully determines the run.
pub fn resolve_defaults(cfg: &mut RunConfig) -> Result<()> {
    let name = cfg
        .get_str("name")
        .ok_or_else(|| Error::InvalidInput("missing experiment `name`".into()))?
        .to_string();
    if !EXPERIMENTS.contains(&name.as_str()) {
        return Err(unknown(&name));
    }
    cfg.set_default("seed", 0);
    let ensemble = |cfg: &mut RunConfig, f: &str, p: f64, dims: &str, trials: usize| {
        cfg.set_default("f", f)
            .set_default("p", p)
            .set_default("dims", dims)
            .set_default("trials", trials)
            .set_default("spectrum", "uniform:-1:1")
            .set_default("perturbation", "rank:1:0.001:1");
    };
    match name.as_str() {
        TOEPLITZ_GROWTH => {
            cfg.set_default("p", 0.5)
                .set_default("epsilon", 0.5)
                .set_default("n-list", "4,8,16,32,64")
                .set_default("m", 1024);
        }
        PERIODIC => {
            cfg.set_default("f", "exp2pi")
                .set_default("p", 0.75)
                .set_default("epsilon", 0.25)
                .set_default("n-list", "8,16,32,64")
                .set_default("restarts", 32);
        }
        PERIODIC_PAIRS => {
            cfg.set_default("f", "exp2pi")
                .set_default("p", 0.5)
                .set_default("epsilon", 0.25)
                .set_default("n-list", "8,16,32")
                .set_default("coupling", 1e-3)
                .set_default("restarts", 16);
        }
        LIPSCHITZ_RATIO => ensemble(cfg, "square", 1.0, "16,32,64", 200),
        HOLDER_WEAK => {
            ensemble(cfg, "abspow:0.5", 0.5, "16,32,64", 200);
            cfg.set_default("alpha", 0.5);
        }
        SUBMAJORIZATION => ensemble(cfg, "square", 0.75, "32,64,128", 100),
        QUASICOMMUTATOR => {
            cfg.set_default("p", 0.5).set_default("dims", 4).set_default("trials", 20);
        }
        _ => unreachable!(),
    }
    if matches!(name.as_str(), LIPSCHITZ_RATIO | SUBMAJORIZATION) {
        let p: f64 = cfg.require("p")?;
        cfg.set_default("wavelet-N", default_order(p))
            .set_default("j-min", -2)
            .set_default("j-max", 6);
    }
    Ok(())
}

fn ensembles(cfg: &RunConfig, seed: u64) -> Result<Vec<Ensemble>> {
    let dims: Vec<usize> = cfg.get_list("dims")?.unwrap_or_default();
    if dims.is_empty() {
        return Err(Error::InvalidInput("`dims` must list at least one dimension".into()));
    }
    let trials: usize = cfg.require("trials")?;
    let spectrum: SpectrumLaw = cfg.require::<String>("spectrum")?.parse()?;
    let perturbation: PerturbationLaw = cfg.require::<String>("perturbation")?.parse()?;
    dims.iter()
        .map(|&d| Ensemble::new(d, trials, spectrum, perturbation, rng::derive_seed(seed, d as u64)))
        .collect()
}

fn envelope_config(cfg: &RunConfig) -> Result<EnvelopeConfig> {
    Ok(EnvelopeConfig {
        order: cfg.get("wavelet-N")?,
        j_range: (cfg.require("j-min")?, cfg.require("j-max")?),
        quadrature: Quadrature::default(),
    })
}

/// Runs the experiment named by `cfg` (after [`resolve_defaults`]).
pub fn run_config(cfg: &RunConfig) -> Result<ExperimentReport> {
    let mut cfg = cfg.clone();
    resolve_defaults(&mut cfg)?;
    let name = cfg.require::<String>("name")?;
    let seed: u64 = cfg.require("seed")?;
    let p: f64 = cfg.require("p")?;
    let function = || -> Result<ScalarFunction> { ScalarFunction::from_name(&cfg.require::<String>("f")?) };
    let n_list = || -> Result<Vec<usize>> {
        cfg.get_list("n-list")?
            .ok_or_else(|| Error::InvalidInput("missing parameter `n-list`".into()))
    };
    let mp = || -> Result<MpConfig> {
        Ok(MpConfig { restarts: cfg.require("restarts")?, seed, ..MpConfig::default() })
    };
    let mut report = match name.as_str() {
        TOEPLITZ_GROWTH => toeplitz_growth(p, cfg.require("epsilon")?, &n_list()?, cfg.require("m")?)?,
        PERIODIC => periodic_counterexample(&function()?, cfg.require("epsilon")?, &n_list()?, p, &mp()?)?,
        PERIODIC_PAIRS => periodic_pairs(
            &function()?,
            cfg.require("epsilon")?,
            &n_list()?,
            p,
            cfg.require("coupling")?,
            &mp()?,
        )?,
        LIPSCHITZ_RATIO => lipschitz_ratio(&function()?, &ensembles(&cfg, seed)?, p, &envelope_config(&cfg)?, seed)?,
        HOLDER_WEAK => holder_weak_ratio(&function()?, cfg.require("alpha")?, &ensembles(&cfg, seed)?, p, seed)?,
        SUBMAJORIZATION => {
            submajorization_sweep(&function()?, &ensembles(&cfg, seed)?, p, &envelope_config(&cfg)?, seed)?
        }
        QUASICOMMUTATOR => quasicommutator_trials(cfg.require("dims")?, cfg.require("trials")?, p, seed)?,
        _ => return Err(unknown(&name)),
    };
    report.params = cfg.params.clone();
    report.master_seed = seed;
    Ok(report)
}

/// `f(eps) - f(0)` is the scale linking the periodic matrices to the
/// Toeplitz family.
pub fn periodic_offset(f: &ScalarFunction, epsilon: f64) -> C64 {
    f.eval(epsilon) - f.eval(0.0)
}
