mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use oplip::config::RunConfig;
use oplip::{Error, Result};

/// Schatten quasi-norms, Schur multiplier estimates, wavelet/Besov seminorms
/// and reproducible operator-Lipschitz experiments.
#[derive(Parser, Debug)]
#[command(name = "oplip", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    params: Params,

    /// Key-value config file (`key = value`, `#` comments); flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output file, or bundle directory for `experiment`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// `table` or `record`.
    #[arg(long, global = true)]
    format: Option<String>,

    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Print the resolved configuration and exit.
    #[arg(long, global = true)]
    dry_run: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Schatten and weak quasi-norms of a stored matrix, one row per p.
    Norms { input: Option<PathBuf> },
    /// Certified lower bound on the m_p Schur multiplier norm.
    Mp { input: Option<PathBuf> },
    /// Cut projection certificate at rank n.
    Cut {
        input: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Partial-sum check of mu(X+Y)^p against mu(X)^p + mu(Y)^p.
    Submaj { x: Option<PathBuf>, y: Option<PathBuf> },
    /// Daubechies filter coefficients and their defects.
    Filter,
    /// Upper bound on the m_1 norm of a Toeplitz multiplier from its
    /// coefficients (`--coeffs k:re[:im],...`).
    ToeplitzBound {
        #[arg(long, allow_hyphen_values = true)]
        coeffs: Option<String>,
        #[arg(long)]
        grid_log2: Option<u32>,
    },
    /// Wavelet Besov seminorm of a named function on a box.
    Besov {
        #[arg(long, allow_hyphen_values = true)]
        domain: Option<String>,
    },
    /// Run a named experiment and write its replay bundle.
    Experiment { name: Option<String> },
    /// Re-run a stored bundle and compare per-trial records byte for byte.
    Replay { bundle: PathBuf },
}

#[derive(Args, Debug, Default)]
struct Params {
    /// Schatten index (a comma-separated list for `norms`; `inf` allowed).
    #[arg(long, global = true)]
    p: Option<String>,
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    s: Option<f64>,
    #[arg(long, global = true)]
    q: Option<f64>,
    /// Daubechies order (vanishing moments).
    #[arg(long = "wavelet-N", global = true)]
    wavelet_n: Option<usize>,
    /// Comma-separated matrix sizes.
    #[arg(long, global = true)]
    dims: Option<String>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    restarts: Option<usize>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    j_min: Option<i32>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    j_max: Option<i32>,
    /// Function name (`identity`, `square`, `exp2pi`, `abspow:<a>`, ...).
    #[arg(long, global = true)]
    f: Option<String>,
    /// Comma-separated sizes for growth experiments.
    #[arg(long, global = true)]
    n_list: Option<String>,
    #[arg(long, global = true)]
    m: Option<u64>,
    #[arg(long, global = true)]
    spectrum: Option<String>,
    #[arg(long, global = true)]
    perturbation: Option<String>,
    #[arg(long, global = true)]
    coupling: Option<f64>,
}

impl Params {
    fn apply(&self, cfg: &mut RunConfig) {
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                cfg.set(k, v);
            }
        };
        put("p", self.p.clone());
        put("epsilon", self.epsilon.map(|v| v.to_string()));
        put("alpha", self.alpha.map(|v| v.to_string()));
        put("s", self.s.map(|v| v.to_string()));
        put("q", self.q.map(|v| v.to_string()));
        put("wavelet-N", self.wavelet_n.map(|v| v.to_string()));
        put("dims", self.dims.clone());
        put("trials", self.trials.map(|v| v.to_string()));
        put("seed", self.seed.map(|v| v.to_string()));
        put("restarts", self.restarts.map(|v| v.to_string()));
        put("j-min", self.j_min.map(|v| v.to_string()));
        put("j-max", self.j_max.map(|v| v.to_string()));
        put("f", self.f.clone());
        put("n-list", self.n_list.clone());
        put("m", self.m.map(|v| v.to_string()));
        put("spectrum", self.spectrum.clone());
        put("perturbation", self.perturbation.clone());
        put("coupling", self.coupling.map(|v| v.to_string()));
    }
}

fn resolve(cli: &Cli) -> Result<RunConfig> {
    let name = match &cli.command {
        Command::Norms { .. } => "norms",
        Command::Mp { .. } => "mp",
        Command::Cut { .. } => "cut",
        Command::Submaj { .. } => "submaj",
        Command::Filter => "filter",
        Command::ToeplitzBound { .. } => "toeplitz-bound",
        Command::Besov { .. } => "besov",
        Command::Experiment { .. } => "experiment",
        Command::Replay { .. } => "replay",
    };
    let mut cfg = RunConfig::new(name);
    if let Some(path) = &cli.config {
        cfg.merge_file(&std::fs::read_to_string(path)?)?;
    }
    cli.params.apply(&mut cfg);
    match &cli.command {
        Command::Norms { input } | Command::Mp { input } => {
            if input.is_some() {
                cfg.input = input.clone();
            }
        }
        Command::Cut { input, n } => {
            if input.is_some() {
                cfg.input = input.clone();
            }
            if let Some(n) = n {
                cfg.set("n", n);
            }
        }
        Command::Submaj { x, y } => {
            if let Some(x) = x {
                cfg.input = Some(x.clone());
            }
            if let Some(y) = y {
                cfg.set("y", y.display());
            }
        }
        Command::ToeplitzBound { coeffs, grid_log2 } => {
            if let Some(c) = coeffs {
                cfg.set("coeffs", c);
            }
            if let Some(g) = grid_log2 {
                cfg.set("grid-log2", g);
            }
        }
        Command::Besov { domain } => {
            if let Some(d) = domain {
                cfg.set("domain", d);
            }
        }
        Command::Experiment { name } => {
            if let Some(n) = name {
                cfg.set("name", n);
            }
            oplip::experiments::resolve_defaults(&mut cfg)?;
        }
        Command::Replay { bundle } => cfg.input = Some(bundle.clone()),
        Command::Filter => {}
    }
    if let Some(out) = &cli.out {
        cfg.output = Some(out.clone());
    }
    if let Some(f) = &cli.format {
        cfg.format = f.parse()?;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::InvalidInput("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
    }
    let cfg = resolve(&cli)?;
    if cli.dry_run {
        print!("{}", cfg.to_text());
        return Ok(());
    }
    let text = commands::execute(&cfg)?;
    match (&cfg.output, cfg.command.as_str()) {
        (Some(path), cmd) if cmd != "experiment" => std::fs::write(path, text)?,
        _ => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}
