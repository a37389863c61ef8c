//! `shuffle-amp`: privacy amplification by shuffling, from the command line.

mod decompose_cmd;
mod grid;
mod output;
mod sweep;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use output::Format;
use sweep::{ErrorKind, GridFlags, Quantity, SweepSpec};

const EXIT_VERIFY: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_PRECONDITION: u8 = 3;
const EXIT_ALL_FAILED: u8 = 4;

/// Error that ends the process with a specific exit code.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into() }
    }

    pub fn precondition(message: impl Into<String>) -> Self {
        Failure { code: EXIT_PRECONDITION, message: message.into() }
    }
}

const GRID_HELP: &str = "\
GRIDS:
  Grid flags take a comma-separated list (1,2,4), geom:START:STOP:COUNT or
  lin:START:STOP:COUNT, and the forms can be mixed. Rows come out in grid order:
  eps0, then n, then the inner grid (delta, alpha, k, T), then variant.

CSV COLUMNS:
  adp-eps  eps0,n,delta,variant,value,lower,upper,unit,seconds,note,error
  rdp-eps  eps0,n,alpha,variant,value,lower,upper,unit,seconds,note,error
  compose  eps0,n,delta,T,variant,value,lower,upper,unit,seconds,note,error
  krr      eps0,n,k,delta,alpha,variant,value,lower,upper,general_ref,unit,seconds,note,error

  value is the reported bound, lower/upper the certified bracket around it.
  general_ref is the general-extremal bound at the same eps0, n and delta or alpha.
  seconds is the wall time of the group of rows sharing one distribution pair.
  Values are in nats unless --base2 is given.

VARIANTS:
  adp-eps  general-extremal (default), fmt20, custom (--p, --q), analytic, tail (--p), lower
  rdp-eps  general-extremal (default), fmt20, custom (--p, --q), closedform, lower
  compose  rdp, advanced (default: both)
  krr      upper, lower (default: both)

EXIT CODES:
  0 ok, 1 verify failure, 2 usage, 3 precondition failed, 4 every sweep row failed";

#[derive(Parser)]
#[command(name = "shuffle-amp", version, about = "Bounds on privacy amplification by shuffling", after_help = GRID_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Shuffled (eps, delta) bounds.
    #[command(after_help = GRID_HELP)]
    Eps(QueryArgs),
    /// Rényi divergence bounds on the shuffled output.
    #[command(after_help = GRID_HELP)]
    Rdp(QueryArgs),
    /// Multi-round composition: Rényi accounting against advanced composition.
    #[command(after_help = GRID_HELP)]
    Compose(QueryArgs),
    /// Bounds specialized to k-ary randomized response.
    #[command(after_help = GRID_HELP)]
    Krr(QueryArgs),
    /// Any of the above over grids, with progress on stderr.
    #[command(after_help = GRID_HELP)]
    Sweep(SweepArgs),
    /// Decompose a local randomizer and test extremal-class membership.
    Decompose(DecomposeArgs),
    /// Check the numeric engines against exact enumeration.
    Verify(VerifyArgs),
}

#[derive(Args, Clone)]
struct QueryArgs {
    /// Local privacy parameter(s), nats.
    #[arg(long)]
    eps0: Option<String>,
    /// Number of clients.
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    /// Rényi order(s); rdp defaults to a geometric grid from 1.25 to 1024.
    #[arg(long)]
    alpha: Option<String>,
    /// Domain size(s) for randomized response.
    #[arg(long)]
    k: Option<String>,
    /// Number(s) of composed rounds.
    #[arg(long = "T", value_name = "T")]
    t: Option<String>,
    /// Bound variant; repeat for several.
    #[arg(long = "variant")]
    variants: Vec<String>,
    /// Clone probability for the custom and tail variants.
    #[arg(long)]
    p: Option<f64>,
    /// Middle-mass probability for the custom variant.
    #[arg(long)]
    q: Option<f64>,
    /// Tail mass dropped per distribution [default: 1e-15, or 1e-30 with Rényi orders].
    #[arg(long)]
    trunc: Option<f64>,
    /// Bisection tolerance on eps.
    #[arg(long, default_value_t = shuffle_amp::bounds::DEFAULT_TOL)]
    tol: f64,
    /// Worker threads [default: all cores].
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file [default: stdout].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report divergences in bits instead of nats.
    #[arg(long)]
    base2: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    quantity: Quantity,
    #[command(flatten)]
    query: QueryArgs,
}

#[derive(Args)]
struct DecomposeArgs {
    /// CSV path (header of output labels, one row per input; a leading
    /// `input` column names the rows) or krr:K:EPS0, rappor:K:ALPHA:BETA,
    /// uniform:INPUTS:OUTPUTS.
    randomizer: String,
    /// First input of the pair, by label or row index [default: first row].
    #[arg(long)]
    x0: Option<String>,
    /// Second input of the pair [default: second row].
    #[arg(long)]
    x1: Option<String>,
    /// Privacy level to decompose at [default: the tight level of the matrix].
    #[arg(long)]
    eps0: Option<f64>,
    /// Also bound the shuffled eps for this many clients.
    #[arg(long)]
    n: Option<u64>,
    #[arg(long, default_value_t = 1e-6)]
    delta: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = verify::Level::Quick)]
    level: verify::Level,
}

fn flags(a: &QueryArgs) -> GridFlags {
    GridFlags {
        eps0: a.eps0.clone(),
        n: a.n.clone(),
        delta: a.delta.clone(),
        alpha: a.alpha.clone(),
        k: a.k.clone(),
        t: a.t.clone(),
        variants: a.variants.clone(),
        p: a.p,
        q: a.q,
        trunc: a.trunc,
        tol: a.tol,
    }
}

fn query(quantity: Quantity, a: &QueryArgs, is_sweep: bool) -> Result<u8, Failure> {
    let spec = SweepSpec::from_flags(quantity, &flags(a))?;
    if spec.uses_general_extremal() {
        eprintln!(
            "note: general-extremal bounds assume every local randomizer lies in the extremal class; \
             use --variant fmt20 for arbitrary eps0-DP randomizers"
        );
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = a.jobs {
        if j == 0 {
            return Err(Failure::usage("--jobs must be >= 1"));
        }
        builder = builder.num_threads(j);
    }
    let pool = builder.build().map_err(|e| Failure::usage(e.to_string()))?;
    let rows = pool.install(|| sweep::run(&spec, is_sweep));

    let mut w = output::open(a.out.as_deref())?;
    output::write_rows(&mut *w, quantity, &rows, a.format, a.base2)?;

    let errors: Vec<_> = rows.iter().filter_map(|r| r.error.as_ref()).collect();
    for e in &errors {
        eprintln!("error: {}", e.message);
    }
    if is_sweep {
        return Ok(if !rows.is_empty() && errors.len() == rows.len() { EXIT_ALL_FAILED } else { 0 });
    }
    Ok(if errors.iter().any(|e| e.kind == ErrorKind::Precondition) {
        EXIT_PRECONDITION
    } else if errors.is_empty() {
        0
    } else {
        EXIT_USAGE
    })
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Eps(a) => query(Quantity::AdpEps, &a, false),
        Command::Rdp(a) => query(Quantity::RdpEps, &a, false),
        Command::Compose(a) => query(Quantity::Compose, &a, false),
        Command::Krr(a) => query(Quantity::Krr, &a, false),
        Command::Sweep(s) => query(s.quantity, &s.query, true),
        Command::Decompose(d) => {
            let report = decompose_cmd::run(&decompose_cmd::Request {
                source: &d.randomizer,
                x0: d.x0.as_deref(),
                x1: d.x1.as_deref(),
                eps0: d.eps0,
                n: d.n,
                delta: d.delta,
            })?;
            let mut w = output::open(d.out.as_deref())?;
            decompose_cmd::write(&mut *w, &report, d.format)?;
            Ok(0)
        }
        Command::Verify(v) => {
            let (lines, ok) = verify::run(v.level);
            for l in &lines {
                println!("{l}");
            }
            Ok(if ok { 0 } else { EXIT_VERIFY })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
