//! Command line surface.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use eslab_core::Window;

use crate::error::{CliError, CliResult};

/// Seed used when `--seed` is absent.
pub const DEFAULT_SEED: u64 = 0x5eed_2024;

const AFTER_HELP: &str = "\
Reports:
  csv   RFC 4180, header row first. Floats use 17 significant digits in
        scientific notation (1.2345678901234567e3), integers are plain, no
        digit grouping. A scan that stops on an error ends with a line
        `# error: <message>`.
  json  Array of objects with keys in column order; non-finite floats are
        null. A scan that stops on an error ends with {\"error\": \"<message>\"}.
        `waring` always writes a single JSON object.

Cache:
  Sieved windows are stored as <dir>/table-<N>-<H>.bin: the bytes \"ESLAB1\",
  N and H as little-endian u64, then per integer a factor count byte,
  (u32 prime, u8 exponent) pairs and the u64 cofactor. The directory comes
  from --cache or ESLAB_CACHE; without either nothing is cached.

Exit codes: 0 success, 2 usage error, 3 budget exceeded, 4 I/O error,
1 any other failure.";

#[derive(Parser, Debug, Clone, PartialEq)]
#[command(
    name = "eslab",
    version,
    about = "Exponential sums over primes in short intervals",
    after_help = AFTER_HELP
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    /// Report path; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Directory for sieve caches.
    #[arg(long, global = true, env = "ESLAB_CACHE")]
    pub cache: Option<PathBuf>,

    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Weight {
    Lambda,
    Mobius,
}

fn parse_theta(s: &str) -> Result<f64, String> {
    let t: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if t > 0.0 && t <= 1.0 {
        Ok(t)
    } else {
        Err(format!("theta = {t} must lie in (0, 1]"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Perturbations(pub Vec<f64>);

fn parse_list(s: &str) -> Result<Perturbations, String> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse::<f64>().map_err(|_| format!("'{x}' is not a number")))
        .collect::<Result<_, _>>()
        .map(Perturbations)
}

/// The window `(N, N+H]`, with `H` given directly or as `⌊N^θ⌋`.
#[derive(Args, Debug, Clone, PartialEq)]
pub struct WindowArgs {
    #[arg(long = "N")]
    pub n: u64,
    #[arg(long = "H", conflicts_with = "theta")]
    pub h: Option<u64>,
    #[arg(long, value_parser = parse_theta)]
    pub theta: Option<f64>,
}

impl WindowArgs {
    pub fn window(&self) -> CliResult<Window> {
        match (self.h, self.theta) {
            (Some(h), _) => Ok(Window::new(self.n, h)?),
            (None, Some(t)) => Ok(Window::from_theta(self.n, t)?),
            (None, None) => Err(CliError::Usage("one of --H or --theta is required".into())),
        }
    }

    /// `θ` as given, or `log H / log N`.
    pub fn theta(&self) -> Option<f64> {
        self.theta.or_else(|| {
            let h = self.h?;
            (self.n > 1 && h > 0).then(|| (h as f64).ln() / (self.n as f64).ln())
        })
    }
}

#[derive(Subcommand, Debug, Clone, PartialEq)]
pub enum Command {
    /// Sieve a window: ψ increment, prime count, Möbius sum.
    Sieve {
        #[command(flatten)]
        window: WindowArgs,
        /// One row per integer instead of a summary.
        #[arg(long)]
        per_n: bool,
    },
    /// Λ and μ sums against e(α n^k).
    Expsum {
        #[command(flatten)]
        window: WindowArgs,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// `a/q`, a decimal, or 32 hex digits of the fixed-point fraction.
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
    },
    /// Farey-grid scan of g(n) = Σ α_j (n-N)^j with rational structure recovery.
    Scan {
        #[command(flatten)]
        window: WindowArgs,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Farey order of the grid denominators.
        #[arg(long, default_value_t = 20)]
        farey: u64,
        /// Comma-separated multipliers c of the offsets c/H^j added to each
        /// coefficient; an empty list keeps the exact Farey points.
        #[arg(long, default_value = "0,0.1,10", value_parser = parse_list, allow_hyphen_values = true)]
        perturb: Perturbations,
        #[arg(long, default_value_t = 10_000)]
        qmax: u64,
        /// Arc parameter Q (default (log N)^2).
        #[arg(long)]
        arc_q: Option<f64>,
    },
    /// Heath-Brown decomposition with per-integer identity checks.
    HbVerify {
        #[command(flatten)]
        window: WindowArgs,
        #[arg(long, value_enum, default_value_t = Weight::Lambda)]
        target: Weight,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        alpha: String,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Tuple budget.
        #[arg(long, default_value_t = 200_000_000)]
        budget: u64,
    },
    /// Short-interval Waring-Goldbach instance: exact count, major-arc
    /// prediction and explicit representations (JSON).
    Waring {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        s: u32,
        #[arg(long = "N")]
        n: u64,
        #[arg(long, value_parser = parse_theta)]
        theta: f64,
        #[arg(long, default_value_t = 10_000)]
        qmax: u64,
        #[arg(long, default_value_t = 10)]
        limit: usize,
    },
    /// Exact Vinogradov counts J_{t,k}(H).
    Vmvt {
        #[arg(long)]
        t: u32,
        #[arg(long)]
        k: u32,
        /// Repeat for several H.
        #[arg(long = "H", required = true)]
        h: Vec<u64>,
    },
    /// Recover t from the Taylor phase of (t/2π) log(n/N) through the n^{it} model.
    Nit {
        #[command(flatten)]
        window: WindowArgs,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long = "t", allow_hyphen_values = true)]
        t0: f64,
        #[arg(long, default_value_t = 1)]
        q: u64,
        /// Progression exponent B in H₀ = H (log N)^{-B} (default 2 + 2k).
        #[arg(long = "B")]
        b: Option<f64>,
    },
}

impl RunConfig {
    pub fn window_args(&self) -> Option<&WindowArgs> {
        match &self.command {
            Command::Sieve { window, .. }
            | Command::Expsum { window, .. }
            | Command::Scan { window, .. }
            | Command::HbVerify { window, .. }
            | Command::Nit { window, .. } => Some(window),
            Command::Waring { .. } | Command::Vmvt { .. } => None,
        }
    }

    /// Advisory messages for the diagnostic stream.
    pub fn notes(&self) -> Vec<String> {
        let theta = match &self.command {
            Command::Waring { theta, .. } => Some(*theta),
            _ => self.window_args().and_then(WindowArgs::theta),
        };
        match theta {
            Some(t) if t <= 2.0 / 3.0 => vec![format!(
                "note: theta = {t} <= 2/3, below the range where log-power savings are expected; exploratory only"
            )],
            _ => Vec::new(),
        }
    }
}

/// Parses arguments (without the program name).
pub fn parse_config<I, T>(args: I) -> Result<RunConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv = std::iter::once(OsString::from("eslab")).chain(args.into_iter().map(Into::into));
    let config = RunConfig::try_parse_from(argv)?;
    if let Some(w) = config.window_args() {
        if w.h.is_none() && w.theta.is_none() {
            return Err(RunConfig::command().error(
                ErrorKind::MissingRequiredArgument,
                "one of --H or --theta is required",
            ));
        }
    }
    Ok(config)
}
