//! `photonlim` — capacity-efficiency tradeoffs for photon-limited
//! coherent-state optical links.
//!
//! Subcommands: `curves` (DIE vs PIE tradeoff sweeps), `adaptive` (exact
//! evaluation of the adaptive coded-sequence Dolinar receiver), `simulate`
//! (Monte Carlo of the feedback receiver against the Helstrom bound), and
//! `check` (self-audit of identities and dominance orderings).
//!
//! Exit codes: 0 success, 2 usage error, 3 I/O error, 4 enumeration size
//! cap, 5 numerical-validity violation.

use clap::{Args, Parser, Subcommand};
use photonlim::adaptive::{metrics, run_exact_bpsk, AdaptiveError, ReceiverMode};
use photonlim::channel::{helstrom_error, DolinarChannel};
use photonlim::code::{CodeError, LinearCode};
use photonlim::curves::{tradeoff_curve, CurveError, Scheme};
use photonlim::feedback::{run_monte_carlo, Constellation, FeedbackError, FeedbackSimConfig};
use photonlim_cli::config::{load_config, resolve, resolve_opt};
use photonlim_cli::output::{
    adaptive_csv, adaptive_json, curves_csv, curves_json, emit, simulate_json, AdaptiveRow,
    SimulateReport,
};
use photonlim_cli::{checks, CliError};
use std::collections::BTreeMap;
use std::process::ExitCode;
use std::str::FromStr;

#[derive(Parser)]
#[command(
    name = "photonlim",
    version,
    about = "Photon- and dimensional-information-efficiency tradeoffs for optical links"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep tradeoff curves over an energy grid and write CSV or JSON
    Curves(CurvesArgs),
    /// Exactly evaluate the adaptive coded-sequence Dolinar receiver
    Adaptive(AdaptiveArgs),
    /// Monte Carlo the feedback receiver and compare with the Helstrom bound
    Simulate(SimulateArgs),
    /// Run the self-check report (identities, asymptotics, dominance)
    Check(CheckArgs),
}

#[derive(Args)]
struct GridArgs {
    /// Smallest grid energy (mean photons per mode)
    #[arg(long)]
    e_min: Option<f64>,
    /// Largest grid energy
    #[arg(long)]
    e_max: Option<f64>,
    /// Number of grid points
    #[arg(long)]
    points: Option<usize>,
    /// Grid spacing: log or linear
    #[arg(long)]
    spacing: Option<Spacing>,
}

#[derive(Args)]
struct IoArgs {
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<String>,
    /// Output format: csv or json
    #[arg(long)]
    format: Option<Format>,
    /// Plain-text `key = value` config file; flags override its values
    #[arg(long)]
    config: Option<String>,
}

#[derive(Args)]
struct CurvesArgs {
    /// Comma-separated scheme names (e.g. holevo,ook-dolinar,approx1)
    #[arg(long)]
    schemes: Option<String>,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct AdaptiveArgs {
    /// Code: parity32 | hamming74 | uncoded:N | file:PATH
    #[arg(long)]
    code: Option<String>,
    /// Comma-separated receiver modes: adaptive,fixed
    #[arg(long)]
    modes: Option<String>,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct SimulateArgs {
    /// Mean photons per mode of each BPSK state
    #[arg(long = "E")]
    energy: Option<f64>,
    /// Prior of the first BPSK state
    #[arg(long)]
    xi: Option<f64>,
    /// Monte Carlo trials
    #[arg(long)]
    trials: Option<u64>,
    /// RNG seed
    #[arg(long)]
    seed: Option<u64>,
    /// Per-step count probability bound (at most 0.01)
    #[arg(long)]
    dt_factor: Option<f64>,
    /// Local-oscillator amplitude cap (default 50x the signal amplitude)
    #[arg(long)]
    lo_cap: Option<f64>,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<String>,
    /// Plain-text `key = value` config file; flags override its values
    #[arg(long)]
    config: Option<String>,
}

#[derive(Args)]
struct CheckArgs {
    /// Plain-text `key = value` config file (accepted for uniformity)
    #[arg(long)]
    config: Option<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Spacing {
    Log,
    Linear,
}

impl FromStr for Spacing {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "log" => Ok(Spacing::Log),
            "linear" => Ok(Spacing::Linear),
            other => Err(format!("unknown spacing `{other}`")),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}`")),
        }
    }
}

fn main() -> ExitCode {
    if let Err(e) = configure_thread_pool() {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code());
    }
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Curves(args) => cmd_curves(args),
        Command::Adaptive(args) => cmd_adaptive(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Check(args) => cmd_check(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// PHOTONLIM_THREADS caps the rayon worker pool.
fn configure_thread_pool() -> Result<(), CliError> {
    if let Ok(raw) = std::env::var("PHOTONLIM_THREADS") {
        let n: usize = raw
            .parse()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| CliError::Usage(format!("PHOTONLIM_THREADS: invalid value `{raw}`")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(())
}

fn energy_grid(
    grid: &GridArgs,
    config: &BTreeMap<String, String>,
) -> Result<Vec<f64>, CliError> {
    let e_min = resolve(grid.e_min, config, "e-min", 1e-4)?;
    let e_max = resolve(grid.e_max, config, "e-max", 10.0)?;
    let points = resolve(grid.points, config, "points", 200)?;
    let spacing = resolve(grid.spacing, config, "spacing", Spacing::Log)?;
    if !(e_min > 0.0) || !e_min.is_finite() || !e_max.is_finite() {
        return Err(CliError::Usage(format!("energy grid must be positive: e-min = {e_min}")));
    }
    if points == 0 {
        return Err(CliError::Usage("points must be at least 1".into()));
    }
    if points > 1 && e_min >= e_max {
        return Err(CliError::Usage(format!(
            "e-min ({e_min}) must be below e-max ({e_max})"
        )));
    }
    if points == 1 {
        return Ok(vec![e_min]);
    }
    let n = (points - 1) as f64;
    Ok((0..points)
        .map(|i| match spacing {
            Spacing::Log => (e_min.ln() + (e_max.ln() - e_min.ln()) * i as f64 / n).exp(),
            Spacing::Linear => e_min + (e_max - e_min) * i as f64 / n,
        })
        .collect())
}

fn map_curve_error(e: CurveError) -> CliError {
    CliError::Usage(e.to_string())
}

fn cmd_curves(args: CurvesArgs) -> Result<ExitCode, CliError> {
    let config = load_config(args.io.config.as_deref())?;
    let schemes_raw = resolve(args.schemes, &config, "schemes", "".to_string())?;
    if schemes_raw.trim().is_empty() {
        return Err(CliError::Usage(
            "no schemes given; use --schemes, e.g. --schemes holevo,bpsk-dolinar".into(),
        ));
    }
    let schemes: Vec<Scheme> = schemes_raw
        .split(',')
        .map(|name| name.trim().parse::<Scheme>().map_err(map_curve_error))
        .collect::<Result<_, _>>()?;
    let grid = energy_grid(&args.grid, &config)?;
    let format = resolve(args.io.format, &config, "format", Format::Csv)?;
    let out = resolve_opt(args.io.out, &config, "out")?;

    let mut rows = Vec::with_capacity(schemes.len() * grid.len());
    for scheme in schemes {
        let points = tradeoff_curve(scheme, &grid).map_err(map_curve_error)?;
        rows.extend(points.into_iter().map(|p| (scheme.to_string(), p)));
    }
    let payload = match format {
        Format::Csv => curves_csv(&rows),
        Format::Json => curves_json(&rows),
    };
    emit(out.as_deref(), &payload)?;
    Ok(ExitCode::SUCCESS)
}

fn parse_code(spec: &str) -> Result<(String, LinearCode), CliError> {
    let map_code_error = |e: CodeError| match e {
        CodeError::BlockTooLong(n) => {
            CliError::SizeCap(format!("block length {n} exceeds the enumeration cap"))
        }
        other => CliError::Usage(other.to_string()),
    };
    match spec {
        "parity32" => Ok(("parity32".into(), LinearCode::parity_3_2())),
        "hamming74" => Ok(("hamming74".into(), LinearCode::hamming_7_4())),
        other => {
            if let Some(n) = other.strip_prefix("uncoded:") {
                let n: usize = n
                    .parse()
                    .map_err(|_| CliError::Usage(format!("invalid uncoded length `{n}`")))?;
                Ok((format!("uncoded:{n}"), LinearCode::uncoded(n).map_err(map_code_error)?))
            } else if let Some(path) = other.strip_prefix("file:") {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Io(format!("cannot read code file {path}: {e}")))?;
                Ok((format!("file:{path}"), LinearCode::parse(&text).map_err(map_code_error)?))
            } else {
                Err(CliError::Usage(format!(
                    "unknown code `{other}`; expected parity32 | hamming74 | uncoded:N | file:PATH"
                )))
            }
        }
    }
}

fn cmd_adaptive(args: AdaptiveArgs) -> Result<ExitCode, CliError> {
    let config = load_config(args.io.config.as_deref())?;
    let code_spec = resolve(args.code, &config, "code", "parity32".to_string())?;
    let (code_name, code) = parse_code(&code_spec)?;
    let modes_raw = resolve(args.modes, &config, "modes", "adaptive,fixed".to_string())?;
    let modes: Vec<ReceiverMode> = modes_raw
        .split(',')
        .map(|m| match m.trim() {
            "adaptive" => Ok(ReceiverMode::Adaptive),
            "fixed" => Ok(ReceiverMode::Fixed),
            other => Err(CliError::Usage(format!("unknown mode `{other}`"))),
        })
        .collect::<Result<_, _>>()?;
    let grid = energy_grid(&args.grid, &config)?;
    let format = resolve(args.io.format, &config, "format", Format::Csv)?;
    let out = resolve_opt(args.io.out, &config, "out")?;

    let mut rows = Vec::with_capacity(modes.len() * grid.len());
    for &mode in &modes {
        for &energy in &grid {
            let run = run_exact_bpsk(&code, energy, mode).map_err(|e| match e {
                AdaptiveError::EnumerationTooLarge(n) => {
                    CliError::SizeCap(format!("joint enumeration of {n} cells exceeds the cap"))
                }
                other => CliError::Usage(other.to_string()),
            })?;
            rows.push(AdaptiveRow {
                code: code_name.clone(),
                mode: mode.label(),
                energy,
                metrics: metrics(&run, &code),
            });
        }
    }
    let payload = match format {
        Format::Csv => adaptive_csv(&rows, code.block_length()),
        Format::Json => adaptive_json(&rows),
    };
    emit(out.as_deref(), &payload)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(args: SimulateArgs) -> Result<ExitCode, CliError> {
    let config = load_config(args.config.as_deref())?;
    let energy = resolve(args.energy, &config, "E", 0.2)?;
    let xi = resolve(args.xi, &config, "xi", 0.5)?;
    let trials = resolve(args.trials, &config, "trials", 100_000)?;
    let seed = resolve(args.seed, &config, "seed", 0)?;
    let dt_factor = resolve(args.dt_factor, &config, "dt-factor", 0.01)?;
    let lo_cap = resolve_opt(args.lo_cap, &config, "lo-cap")?;
    let out = resolve_opt(args.out, &config, "out")?;

    if !(energy > 0.0) || !energy.is_finite() {
        return Err(CliError::Usage(format!("--E must be positive, got {energy}")));
    }
    if !(0.0..=1.0).contains(&xi) {
        return Err(CliError::Usage(format!("--xi must lie in [0, 1], got {xi}")));
    }
    let constellation = Constellation::bpsk(energy.sqrt(), xi)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let mut cfg = FeedbackSimConfig::new(constellation);
    cfg.trials = trials;
    cfg.seed = seed;
    cfg.dt_factor = dt_factor;
    cfg.lo_cap = lo_cap;
    let est = run_monte_carlo(&cfg).map_err(|e| match e {
        FeedbackError::InvalidDtFactor(_) | FeedbackError::StepTooCoarse(_) => {
            CliError::Numeric(e.to_string())
        }
        other => CliError::Usage(other.to_string()),
    })?;

    let channel = DolinarChannel::new((-4.0 * energy).exp(), xi.min(1.0 - xi))
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let helstrom = helstrom_error(channel).get();
    let z_score = if est.std_error > 0.0 {
        (est.pe_estimate - helstrom) / est.std_error
    } else {
        0.0
    };
    let report = SimulateReport {
        pe_estimate: est.pe_estimate,
        stderr: est.std_error,
        helstrom,
        z_score,
    };
    emit(out.as_deref(), &simulate_json(&report))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_check(args: CheckArgs) -> Result<ExitCode, CliError> {
    let _ = load_config(args.config.as_deref())?;
    let items = checks::run_all_checks();
    let mut all_pass = true;
    for item in &items {
        println!("{} {}: {}", if item.pass { "PASS" } else { "FAIL" }, item.name, item.detail);
        all_pass &= item.pass;
    }
    if all_pass {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::FAILURE)
    }
}
