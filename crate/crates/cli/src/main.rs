use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use nbtb_core::report::{Format, Mode, Report, RunConfig};
use nbtb_core::{Domain, Error, SurfaceKind};

const EXIT_INCONCLUSIVE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(name = "nbtb", version, about = "Tension and bitension of normal bundles of surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-sample curvature, tension and residual records plus a verdict.
    Analyze(RunArgs),
    /// Verdict and summary only.
    Classify(RunArgs),
    /// Like analyze, with closed-form vs. oracle deltas on every record.
    VerifyOracle {
        #[command(flatten)]
        run: RunArgs,
        /// Also compare the jet oracle against finite differences.
        #[arg(long)]
        fd: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Args)]
struct RunArgs {
    /// TOML config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Surface spec, e.g. `sphere:r=1`, `torus:R=2,r=0.5`, `graph:c20=1,c03=1`.
    #[arg(long)]
    surface: Option<String>,
    /// Parameter box `u0,u1,v0,v1`.
    #[arg(long)]
    domain: Option<String>,
    /// Grid resolution `NUxNV`.
    #[arg(long)]
    grid: Option<String>,
    /// Comma-separated fibre heights.
    #[arg(long, allow_hyphen_values = true)]
    t: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

/// Config file contents; every key optional so flags can fill the gaps.
#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    surface: Option<String>,
    domain: Option<Domain>,
    grid: Option<[usize; 2]>,
    t: Option<Vec<f64>>,
    tol: Option<f64>,
    mode: Option<Mode>,
    finite_differences: Option<bool>,
    out: Option<PathBuf>,
    format: Option<Format>,
}

/// Marks errors caused by the user's input rather than by the numerics.
#[derive(Debug)]
struct ConfigError(String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| config_error(format!("invalid {what} value {x:?}"))))
        .collect()
}

fn parse_grid(s: &str) -> Result<[usize; 2]> {
    let parts: Vec<&str> = s.split(['x', 'X']).collect();
    match parts.as_slice() {
        [nu, nv] => match (nu.trim().parse(), nv.trim().parse()) {
            (Ok(nu), Ok(nv)) => Ok([nu, nv]),
            _ => Err(config_error(format!("invalid grid {s:?}, expected NUxNV"))),
        },
        _ => Err(config_error(format!("invalid grid {s:?}, expected NUxNV"))),
    }
}

fn parse_domain(s: &str) -> Result<Domain> {
    match parse_list(s, "domain")?.as_slice() {
        &[u0, u1, v0, v1] => Ok(Domain::new([u0, u1], [v0, v1])),
        _ => Err(config_error(format!("invalid domain {s:?}, expected u0,u1,v0,v1"))),
    }
}

fn parse_surface(s: &str) -> Result<SurfaceKind> {
    s.parse::<SurfaceKind>().map_err(|e| config_error(e.to_string()))
}

fn build_config(args: &RunArgs, mode: Mode, fd: bool) -> Result<RunConfig> {
    let file = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
            toml::from_str::<FileConfig>(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };
    let surface = match (&args.surface, &file.surface) {
        (Some(s), _) | (None, Some(s)) => parse_surface(s)?,
        (None, None) => return Err(config_error("no surface given (use --surface or a config file)")),
    };
    let mut config = RunConfig::new(surface);
    // the subcommand decides; a `mode` key in the file only documents intent
    if file.mode.is_some_and(|m| m != mode) {
        eprintln!("note: config file mode is overridden by the subcommand");
    }
    config.mode = mode;
    config.domain = match &args.domain {
        Some(d) => Some(parse_domain(d)?),
        None => file.domain,
    };
    if let Some(g) = args.grid.as_deref().map(parse_grid).transpose()?.or(file.grid) {
        config.grid = g;
    }
    if let Some(t) = args.t.as_deref().map(|s| parse_list(s, "t")).transpose()?.or(file.t) {
        config.t = t;
    }
    if let Some(tol) = args.tol.or(file.tol) {
        config.tol = tol;
    }
    config.finite_differences = fd || file.finite_differences.unwrap_or(false);
    config.out = args.out.clone().or(file.out);
    config.format = match args.format {
        Some(FormatArg::Json) => Format::Json,
        Some(FormatArg::Csv) => Format::Csv,
        None => file.format.unwrap_or_default(),
    };
    Ok(config)
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("NBTB_THREADS") else {
        return Ok(());
    };
    let threads: usize = match value.trim().parse() {
        Ok(n) if n > 0 => n,
        _ => return Err(config_error(format!("NBTB_THREADS must be a positive integer, got {value:?}"))),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("configuring the thread pool")?;
    Ok(())
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).context("writing to standard output")
        }
    }
}

fn print_summary(report: &Report) {
    let m = &report.summary.max;
    match (&report.verdict, &report.inconclusive) {
        (Some(v), _) => eprintln!("{}: {} (biharmonic: {})", report.config.surface, v.class.name(), v.biharmonic),
        (None, Some(reason)) => eprintln!("{}: inconclusive: {reason}", report.config.surface),
        (None, None) => {}
    }
    eprintln!(
        "  max |tau| {:.3e}  c1 {:.3e}  c2 {:.3e}  c3 {:.3e}  c4 {:.3e}  e3 {:.3e}  |tau2(t=0)| {:.3e}",
        m.tension, m.c1, m.c2, m.c3, m.c4, m.e3comp, m.bitension_t0
    );
    if let Some(o) = &report.summary.oracle_max {
        eprintln!("  oracle deltas: tension {:.3e}  e3 {:.3e}  bitension {:.3e}", o.tension, o.e3comp, o.bitension);
    }
}

fn execute(cli: Cli) -> Result<bool> {
    configure_threads()?;
    let (args, mode, fd) = match &cli.command {
        Command::Analyze(a) => (a, Mode::Analyze, false),
        Command::Classify(a) => (a, Mode::Classify, false),
        Command::VerifyOracle { run, fd } => (run, Mode::VerifyOracle, *fd),
    };
    let config = build_config(args, mode, fd)?;
    let report = nbtb_core::report::run(&config)?;
    let text = report.render(config.format)?;
    write_output(config.out.as_deref(), &text)?;
    print_summary(&report);
    Ok(!report.is_inconclusive())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigError>().is_some() {
        return EXIT_CONFIG;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::ConfigParse(_) | Error::InvalidSurface(_) | Error::OutOfDomain { .. } | Error::FiberOutOfRange { .. }) => EXIT_CONFIG,
        Some(Error::InconclusiveClassification(_)) => EXIT_INCONCLUSIVE,
        Some(_) => EXIT_NUMERIC,
        None if err.downcast_ref::<std::io::Error>().is_some() => EXIT_CONFIG,
        None => EXIT_NUMERIC,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_INCONCLUSIVE),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
