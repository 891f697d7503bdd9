//! `congamma`: reproducible numerical experiments on gamma-series prime
//! counting, Goldbach straddle expectations, and 1D piecewise-constant
//! propagators. Reports go to stdout as CSV (default) or JSON; every value
//! is a full-precision decimal string.

mod cache;
mod config;
mod grid;
mod report;
mod runner;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{CommandKind, ExperimentConfig, ReportFormat};
use congamma_core::Error;

#[derive(Parser)]
#[command(name = "congamma", version, about, disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Gamma-series integer count N(x); equals x on the whole line
    Identity(CommonArgs),
    /// Scaled count pi1_bar(x) tracking the prime-power count Pi(x)
    Primes(CommonArgs),
    /// Prime-double count pi2i_bar(x, i)
    Doubles(CommonArgs),
    /// Goldbach straddle expectation S(x) and failure probability
    Goldbach(CommonArgs),
    /// Expected maximal prime gap near p, Cramer-style
    Cramer(CommonArgs),
    /// Exact sieve counts pi(x) and Pi(x)
    Sieve(CommonArgs),
    /// Step-potential scattering coefficients r, t
    PropStep(CommonArgs),
    /// Green function of a piecewise-constant potential
    PropGreen(CommonArgs),
    /// Bound-state energies of a square well from the bounce expansion
    PropSpectrum(CommonArgs),
}

impl Command {
    fn split(&self) -> (CommandKind, &CommonArgs) {
        match self {
            Command::Identity(a) => (CommandKind::Identity, a),
            Command::Primes(a) => (CommandKind::Primes, a),
            Command::Doubles(a) => (CommandKind::Doubles, a),
            Command::Goldbach(a) => (CommandKind::Goldbach, a),
            Command::Cramer(a) => (CommandKind::Cramer, a),
            Command::Sieve(a) => (CommandKind::Sieve, a),
            Command::PropStep(a) => (CommandKind::PropStep, a),
            Command::PropGreen(a) => (CommandKind::PropGreen, a),
            Command::PropSpectrum(a) => (CommandKind::PropSpectrum, a),
        }
    }
}

#[derive(Args)]
struct CommonArgs {
    /// Evaluation grid: value, comma list, or start:stop:scale[:n]
    /// (scales: log10, log:n, lin:n)
    #[arg(long)]
    x: Option<String>,
    /// Prime-double index (gap 2i)
    #[arg(long)]
    i: Option<u32>,
    /// Working decimal digits
    #[arg(long)]
    digits: Option<u32>,
    /// Series term budget
    #[arg(long)]
    max_terms: Option<usize>,
    /// Series tail tolerance
    #[arg(long, allow_negative_numbers = true)]
    tail_tol: Option<f64>,
    /// Command-specific mode (primes: series|mobius; goldbach:
    /// direct|factored|paper-lower-bound; prop-green: oracle|recursion)
    #[arg(long)]
    mode: Option<String>,
    /// Report format: csv or json
    #[arg(long)]
    format: Option<String>,
    /// Worker threads (0 = all cores); reports do not depend on this
    #[arg(long)]
    threads: Option<usize>,
    /// Checkpoint cache file (relative paths land in $CONGAMMA_CACHE_DIR)
    #[arg(long = "cache")]
    cache_path: Option<String>,
    /// Add exact-sieve comparison columns (value: sieve)
    #[arg(long)]
    compare: Option<String>,
    /// Particle energy
    #[arg(long, allow_negative_numbers = true)]
    energy: Option<f64>,
    /// Step height or well depth
    #[arg(long, allow_negative_numbers = true)]
    v0: Option<f64>,
    /// Piecewise potential: `breakpoints: ...;values: ...` or @file
    #[arg(long)]
    potential: Option<String>,
    /// Green function source point
    #[arg(long, allow_negative_numbers = true)]
    xa: Option<f64>,
    /// Green function observation point
    #[arg(long, allow_negative_numbers = true)]
    xb: Option<f64>,
    /// Bounce recursion depth
    #[arg(long)]
    depth: Option<u32>,
    /// Well width
    #[arg(long, allow_negative_numbers = true)]
    length: Option<f64>,
    /// Spectrum scan lower edge
    #[arg(long, allow_negative_numbers = true)]
    e_min: Option<f64>,
    /// Spectrum scan upper edge
    #[arg(long, allow_negative_numbers = true)]
    e_max: Option<f64>,
    /// Spectrum root tolerance
    #[arg(long, allow_negative_numbers = true)]
    spec_tol: Option<f64>,
    /// Load defaults from a key=value config file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the fully resolved config of this run to a key=value file
    #[arg(long)]
    emit_config: Option<PathBuf>,
}

/// File values override defaults; explicit flags override the file.
fn build_config(kind: CommandKind, args: &CommonArgs) -> congamma_core::Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let cfg = ExperimentConfig::parse_key_values(&text)?;
            if cfg.command != kind {
                return Err(Error::domain(
                    "config",
                    format!(
                        "config file is for `{}` but `{}` was invoked",
                        cfg.command.name(),
                        kind.name()
                    ),
                ));
            }
            cfg
        }
        None => ExperimentConfig::defaults(kind),
    };
    if let Some(v) = &args.x {
        cfg.x = Some(v.clone());
    }
    if let Some(v) = args.i {
        cfg.i = v;
    }
    if let Some(v) = args.digits {
        cfg.digits = v;
    }
    if let Some(v) = args.max_terms {
        cfg.max_terms = v;
    }
    if let Some(v) = args.tail_tol {
        cfg.tail_tol = v;
    }
    if let Some(v) = &args.mode {
        cfg.mode = Some(v.clone());
    }
    if let Some(v) = &args.format {
        cfg.format = ReportFormat::parse(v)?;
    }
    if let Some(v) = args.threads {
        cfg.threads = v;
    }
    if let Some(v) = &args.cache_path {
        cfg.cache_path = Some(v.clone());
    }
    if let Some(v) = &args.compare {
        cfg.compare = Some(v.clone());
    }
    if let Some(v) = args.energy {
        cfg.energy = Some(v);
    }
    if let Some(v) = args.v0 {
        cfg.v0 = Some(v);
    }
    if let Some(v) = &args.potential {
        cfg.potential = Some(v.clone());
    }
    if let Some(v) = args.xa {
        cfg.xa = Some(v);
    }
    if let Some(v) = args.xb {
        cfg.xb = Some(v);
    }
    if let Some(v) = args.depth {
        cfg.depth = v;
    }
    if let Some(v) = args.length {
        cfg.length = Some(v);
    }
    if let Some(v) = args.e_min {
        cfg.e_min = Some(v);
    }
    if let Some(v) = args.e_max {
        cfg.e_max = Some(v);
    }
    if let Some(v) = args.spec_tol {
        cfg.spec_tol = v;
    }
    Ok(cfg)
}

fn fail(e: Error) -> ! {
    eprintln!("error: {e}");
    let code = match &e {
        Error::PrecisionExhausted {
            suggested_digits, ..
        } => {
            eprintln!("hint: re-run with --digits {suggested_digits}");
            3
        }
        Error::NonConvergence { .. } => {
            eprintln!("hint: re-run with a larger --max-terms or looser --tail-tol");
            3
        }
        _ => 2,
    };
    std::process::exit(code)
}

fn main() {
    let cli = Cli::parse();
    let (kind, args) = cli.command.split();
    let cfg = match build_config(kind, args) {
        Ok(cfg) => cfg,
        Err(e) => fail(e),
    };
    if let Some(path) = &args.emit_config {
        if let Err(e) = std::fs::write(path, cfg.to_key_values()) {
            fail(e.into());
        }
    }
    let stdout = std::io::stdout();
    if let Err(e) = runner::execute(&cfg, &mut stdout.lock()) {
        fail(e);
    }
}
