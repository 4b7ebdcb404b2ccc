use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use oplip::besov::besov_seminorm_wavelet;
use oplip::config::{OutputFormat, RunConfig};
use oplip::experiments::{replay_bundle, run_config};
use oplip::matrix::{c, read_matrix, CMatrix, C64};
use oplip::spectral::{cut_projection, singular_values, submajorization_holds, SchattenIndex};
use oplip::wavelet::{daubechies_system, default_order, wavelet_coefficients, Interval, Quadrature};
use oplip::{mp_lower_bound, toeplitz_m1_upper, Error, MpConfig, Result, ScalarFunction};
use serde_json::json;

pub fn execute(cfg: &RunConfig) -> Result<String> {
    match cfg.command.as_str() {
        "norms" => norms(cfg),
        "mp" => mp(cfg),
        "cut" => cut(cfg),
        "submaj" => submaj(cfg),
        "filter" => filter(cfg),
        "toeplitz-bound" => toeplitz_bound(cfg),
        "besov" => besov(cfg),
        "experiment" => experiment(cfg),
        "replay" => replay(cfg),
        other => Err(Error::InvalidInput(format!("unknown command `{other}`"))),
    }
}

fn input(cfg: &RunConfig) -> Result<CMatrix> {
    let path = cfg
        .input
        .as_ref()
        .ok_or_else(|| Error::InvalidInput(format!("`{}` needs an input matrix", cfg.command)))?;
    read_matrix(path)
}

fn records(rows: &[serde_json::Value]) -> String {
    rows.iter().map(|r| format!("{r}\n")).collect()
}

fn norms(cfg: &RunConfig) -> Result<String> {
    let m = input(cfg)?;
    let ps: Vec<f64> = cfg.get_list("p")?.unwrap_or_else(|| vec![1.0]);
    let spectrum = singular_values(&m)?;
    let mut rows = Vec::new();
    for p in ps {
        SchattenIndex::new(p)?;
        rows.push((p, spectrum.schatten(p), spectrum.weak(p)));
    }
    Ok(match cfg.format {
        OutputFormat::Table => {
            let mut out = String::from("p\tschatten\tweak\n");
            for (p, s, w) in rows {
                let _ = writeln!(out, "{p}\t{s}\t{w}");
            }
            out
        }
        OutputFormat::Record => records(
            &rows
                .iter()
                .map(|(p, s, w)| json!({ "p": p.to_string(), "schatten": s, "weak": w }))
                .collect::<Vec<_>>(),
        ),
    })
}

fn mp(cfg: &RunConfig) -> Result<String> {
    let m = input(cfg)?;
    let mp_cfg = MpConfig {
        restarts: cfg.get("restarts")?.unwrap_or(32),
        seed: cfg.get("seed")?.unwrap_or(0),
        ..MpConfig::default()
    };
    let est = mp_lower_bound(&m, cfg.require("p")?, &mp_cfg)?;
    Ok(match cfg.format {
        OutputFormat::Record => est.to_record(),
        OutputFormat::Table => {
            let vec = |v: &[C64]| v.iter().map(|z| format!("{:.6}", z.re)).collect::<Vec<_>>().join(" ");
            format!(
                "value       {}\np           {}\nmaster_seed {}\nrestarts    {}\nconverged   {}\nbest_start  {}\nxi          {}\neta         {}\n",
                est.value,
                est.p,
                est.seed,
                est.restarts,
                est.converged,
                est.best_start,
                vec(&est.xi),
                vec(&est.eta)
            )
        }
    })
}

fn cut(cfg: &RunConfig) -> Result<String> {
    let m = input(cfg)?;
    let cert = cut_projection(&m, cfg.require("n")?, cfg.get("p")?.unwrap_or(1.0))?;
    Ok(match cfg.format {
        OutputFormat::Table => format!(
            "n               {}\np               {}\nlhs             {}\nrhs             {}\nholds           {}\ncomplement_rank {}\n",
            cert.n,
            cert.p,
            cert.lhs,
            cert.rhs,
            cert.holds(),
            cert.complement_rank()
        ),
        OutputFormat::Record => records(&[json!({
            "n": cert.n, "p": cert.p, "lhs": cert.lhs, "rhs": cert.rhs,
            "holds": cert.holds(), "complement_rank": cert.complement_rank(),
        })]),
    })
}

fn submaj(cfg: &RunConfig) -> Result<String> {
    let x = input(cfg)?;
    let y = read_matrix(PathBuf::from(cfg.require::<String>("y")?))?;
    let p = cfg.get("p")?.unwrap_or(1.0);
    let rep = submajorization_holds(&x, &y, p, 1e-9)?;
    Ok(match cfg.format {
        OutputFormat::Table => format!("p         {p}\nholds     {}\nmin_slack {}\n", rep.holds, rep.min_slack),
        OutputFormat::Record => records(&[json!({ "p": p, "holds": rep.holds, "min_slack": rep.min_slack, "slacks": rep.slacks })]),
    })
}

fn filter(cfg: &RunConfig) -> Result<String> {
    let sys = daubechies_system(cfg.require("wavelet-N")?)?;
    let d = sys.filter_defects();
    let (h, g) = (sys.scaling_filter(), sys.wavelet_filter());
    Ok(match cfg.format {
        OutputFormat::Table => {
            let mut out = format!(
                "# N = {}, support {:?}, regularity hint {}\n# defects: sum {:.3e}, orthonormality {:.3e}, moments {:.3e}\nk\th\tg\n",
                sys.vanishing_moments(),
                sys.support(),
                sys.regularity_hint(),
                d.sum,
                d.orthonormality,
                d.moments
            );
            for k in 0..h.len() {
                let _ = writeln!(out, "{k}\t{}\t{}", h[k], g[k]);
            }
            out
        }
        OutputFormat::Record => records(&[json!({
            "N": sys.vanishing_moments(), "h": h, "g": g,
            "defects": { "sum": d.sum, "orthonormality": d.orthonormality, "moments": d.moments },
        })]),
    })
}

fn parse_coeffs(text: &str) -> Result<BTreeMap<i64, C64>> {
    let bad = |t: &str| Error::InvalidInput(format!("coefficient `{t}`: expected k:re[:im]"));
    let mut out = BTreeMap::new();
    for item in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(item));
        let (k, z) = match parts.as_slice() {
            [k, re] => (k.parse::<i64>().map_err(|_| bad(item))?, c(num(re)?, 0.0)),
            [k, re, im] => (k.parse::<i64>().map_err(|_| bad(item))?, c(num(re)?, num(im)?)),
            _ => return Err(bad(item)),
        };
        out.insert(k, z);
    }
    Ok(out)
}

fn toeplitz_bound(cfg: &RunConfig) -> Result<String> {
    let coeffs = parse_coeffs(&cfg.require::<String>("coeffs")?)?;
    let b = toeplitz_m1_upper(&coeffs, cfg.get("grid-log2")?.unwrap_or(16))?;
    Ok(match cfg.format {
        OutputFormat::Table => format!(
            "bound     {}\ncoarse    {}\ngrid      {}\nconverged {}\n",
            b.value, b.coarse, b.grid, b.converged
        ),
        OutputFormat::Record => records(&[json!(b)]),
    })
}

fn besov(cfg: &RunConfig) -> Result<String> {
    let f = ScalarFunction::from_name(&cfg.require::<String>("f")?)?;
    let p: f64 = cfg.require("p")?;
    let s: f64 = cfg.require("s")?;
    let q: f64 = cfg.require("q")?;
    let order = cfg.get("wavelet-N")?.unwrap_or_else(|| default_order(p.min(1.0)));
    let j_range = (cfg.get("j-min")?.unwrap_or(-4), cfg.get("j-max")?.unwrap_or(6));
    let dom: Vec<f64> = cfg.get_list("domain")?.unwrap_or_else(|| vec![-1.0, 1.0]);
    if dom.len() != 2 {
        return Err(Error::InvalidInput("`domain` must be `lo,hi`".into()));
    }
    let sys = daubechies_system(order)?;
    let coeffs = wavelet_coefficients(|t| f.eval(t), &sys, j_range, Interval::new(dom[0], dom[1])?, Quadrature::default())?;
    let rep = besov_seminorm_wavelet(&coeffs, s, p, q)?;
    Ok(match cfg.format {
        OutputFormat::Table => {
            let mut out = format!(
                "seminorm   {}\nwindow     {:?}\ntail_share {}\nwavelet-N  {order}\n",
                rep.value, rep.j_window, rep.tail_share
            );
            for w in &rep.warnings {
                let _ = writeln!(out, "warning: {w}");
            }
            out
        }
        OutputFormat::Record => records(&[json!({
            "seminorm": rep.value, "j_window": [rep.j_window.0, rep.j_window.1],
            "tail_share": rep.tail_share, "level_terms": rep.level_terms, "warnings": rep.warnings,
            "wavelet_N": order,
        })]),
    })
}

fn experiment(cfg: &RunConfig) -> Result<String> {
    let report = run_config(cfg)?;
    let dir = cfg
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("oplip-{}-seed{}", report.id, report.master_seed)));
    report.write_bundle(&dir, cfg)?;
    Ok(match cfg.format {
        OutputFormat::Table => format!("{}bundle      {}\n", report.summary_table(), dir.display()),
        OutputFormat::Record => format!("{}\n", serde_json::to_string(&report)?),
    })
}

fn replay(cfg: &RunConfig) -> Result<String> {
    let dir = cfg.input.as_ref().ok_or_else(|| Error::InvalidInput("replay needs a bundle directory".into()))?;
    let out = replay_bundle(dir)?;
    match out.first_difference {
        None => Ok(format!("identical   {} records\nmaster_seed {}\n", out.records, out.report.master_seed)),
        Some(i) => Err(Error::Numerical(format!("replay differs from the stored bundle at record {i}"))),
    }
}
