//! `zlb`: grid scans, simulations and experiments for the ZLB model, written
//! as CSV (or JSON for `solve`) plus a `.meta.json` sidecar.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use log::info;
use zlb_core::ModelError;

use crate::config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(String),
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numeric(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::InvalidParameter { .. }
            | ModelError::DegenerateChain
            | ModelError::Unsupported(_) => CliError::Config(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Command {
    Solve,
    RegionScan,
    DurationScan,
    Simulate,
    ContinuousRpe,
    ForwardGuidance,
    AttentionScan,
    IhCheck,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::RegionScan => "region-scan",
            Command::DurationScan => "duration-scan",
            Command::Simulate => "simulate",
            Command::ContinuousRpe => "continuous-rpe",
            Command::ForwardGuidance => "forward-guidance",
            Command::AttentionScan => "attention-scan",
            Command::IhCheck => "ih-check",
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "zlb",
    version,
    about = "Equilibria, learning and experiments for the ZLB New Keynesian model"
)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output file; defaults to `<command>.csv` (`solve.json` for solve).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the `seed` key of the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for scans; defaults to the number of cores.
    #[arg(long)]
    workers: Option<usize>,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| CliError::Config(format!("{}: {e}", cli.config.display())))?;
    let mut cfg = RunConfig::parse(&text)?;
    if let Some(seed) = cli.seed {
        cfg.seed = Some(seed);
    }
    if let Some(out) = &cli.out {
        cfg.out = Some(out.to_string_lossy().into_owned());
    }
    let name = cli.command.name();
    let out = match &cfg.out {
        Some(o) => PathBuf::from(o),
        None if cli.command == Command::Solve => PathBuf::from("solve.json"),
        None => PathBuf::from(format!("{name}.csv")),
    };
    if matches!(cli.command, Command::Simulate | Command::IhCheck) && cfg.seed.is_none() {
        cfg.seed = Some(0);
    }
    if cli.workers == Some(0) {
        return Err(CliError::Config("--workers must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;

    let mut all_true = true;
    let written = pool.install(|| match cli.command {
        Command::Solve => commands::solve(&cfg, &out),
        Command::RegionScan => commands::region_scan(&cfg, &out),
        Command::DurationScan => commands::duration_scan(&cfg, &out),
        Command::Simulate => commands::simulate_cmd(&cfg, &out),
        Command::ContinuousRpe => commands::continuous_rpe(&cfg, &out),
        Command::ForwardGuidance => commands::forward_guidance(&cfg, &out),
        Command::AttentionScan => commands::attention_scan(&cfg, &out),
        Command::IhCheck => commands::ih_check(&cfg, &out).map(|(w, ok)| {
            all_true = ok;
            w
        }),
    })?;
    output::write_meta(&out, name, &written, &cfg)?;
    for w in &written {
        info!("wrote {}", w.display());
    }
    if !all_true {
        return Err(CliError::Numeric(
            "the infinite-horizon check failed for at least one case".into(),
        ));
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("ZLB_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("zlb: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
