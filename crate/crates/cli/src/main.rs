//! `qotto`: command-line front end for the cooperative Otto-cycle harness.
//!
//! Exit status: 0 on success, 1 on invalid input (flags, presets, configs,
//! parameter regimes) or a failed self-test, 2 when a propagation did not
//! converge.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qotto::experiments::{
    crossings_table, cycle_table, limit_table, selftest, sweep_copies, sweep_tau, worker_count, ExperimentConfig,
    Format, Preset, Table, TauGrid,
};
use qotto::{PulseMode, QottoError, StrokeMode};

#[derive(Parser, Debug)]
#[command(name = "qotto", version, about = "Cooperative many-copy quantum Otto cycles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one cycle and print its work, heats and efficiencies.
    RunCycle(RunArgs),
    /// Finite-duration swap pulses on a logarithmic τ grid.
    SweepTau(TauArgs),
    /// Copy-number sweep with perfect swaps (or quantum-adiabatic strokes).
    SweepN(SweepNArgs),
    /// Many-body limit of the cooperative efficiency.
    Limit(Common),
    /// Collective level crossings crossed by the E1 ramp.
    Crossings(CrossingArgs),
    /// Run the invariant suite; nonzero exit on any failure.
    Selftest(SelftestArgs),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Named parameter set.
    #[arg(long, value_parser = parse_preset, conflicts_with = "config")]
    preset: Option<Preset>,
    /// JSON experiment configuration (unknown keys are rejected).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Worker threads (overrides QOTTO_WORKERS).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    copies: Option<usize>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Finite pulse duration; selects the time-dependent dense path.
    #[arg(long)]
    tau: Option<f64>,
    /// Initial integrator steps per pulse window.
    #[arg(long)]
    steps: Option<usize>,
    /// Step budget; exceeding it is reported as non-convergence.
    #[arg(long)]
    max_steps: Option<usize>,
}

#[derive(Args, Debug)]
struct TauArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    copies: Option<usize>,
    /// Single τ instead of the grid.
    #[arg(long, conflicts_with_all = ["tau_min", "tau_max", "tau_points"])]
    tau: Option<f64>,
    #[arg(long)]
    tau_min: Option<f64>,
    #[arg(long)]
    tau_max: Option<f64>,
    #[arg(long)]
    tau_points: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    max_steps: Option<usize>,
}

#[derive(Args, Debug)]
struct SweepNArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    n_min: Option<usize>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
}

#[derive(Args, Debug)]
struct CrossingArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    copies: Option<usize>,
}

#[derive(Args, Debug)]
struct SelftestArgs {
    /// Seed of the randomized permutation cycles.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModeArg {
    #[value(alias = "quantum-adiabatic")]
    Qa,
    #[value(alias = "perfect-swap")]
    Perfect,
}

impl From<ModeArg> for StrokeMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Qa => StrokeMode::QuantumAdiabatic,
            ModeArg::Perfect => StrokeMode::PerfectSwap,
        }
    }
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    s.parse().map_err(|e: QottoError| e.to_string())
}

/// Why a command failed, mapped onto the exit status.
enum Failure {
    Invalid(String),
    NonConvergence(String),
}

impl From<QottoError> for Failure {
    fn from(e: QottoError) -> Self {
        match e {
            QottoError::NonConvergence { .. } => Failure::NonConvergence(e.to_string()),
            other => Failure::Invalid(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Invalid(format!("i/o: {e}"))
    }
}

fn load_config(common: &Common) -> Result<ExperimentConfig, Failure> {
    match (&common.preset, &common.config) {
        (Some(p), None) => Ok(ExperimentConfig::from_preset(*p)),
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Invalid(format!("config {}: {e}", path.display())))?;
            Ok(ExperimentConfig::from_json(&text)?)
        }
        (None, None) => Err(Failure::Invalid("one of --preset or --config is required".into())),
        (Some(_), Some(_)) => Err(Failure::Invalid("--preset and --config are mutually exclusive".into())),
    }
}

fn emit(table: &Table, common: &Common, config: &ExperimentConfig) -> Result<(), Failure> {
    let format = match common.format {
        OutputFormat::Csv => Format::Csv,
        OutputFormat::Json => Format::Json,
    };
    match common.out.as_ref().or(config.output.as_ref()) {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            table.write(format, &mut w)?;
            w.flush()?;
        }
        None => table.write(format, io::stdout().lock())?,
    }
    Ok(())
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::RunCycle(a) => {
            let mut config = load_config(&a.common)?;
            if let Some(n) = a.copies {
                config.copies = n;
            }
            if let Some(m) = a.mode {
                config.mode = m.into();
            }
            config.steps = a.steps.unwrap_or(config.steps);
            config.max_steps = a.max_steps.unwrap_or(config.max_steps);
            // finite τ needs the dense propagation; otherwise the population path suffices
            let pulse = a.tau.map(PulseMode::FiniteTau);
            let table = cycle_table(&config, pulse)?;
            emit(&table, &a.common, &config)
        }
        Command::SweepTau(a) => {
            let mut config = load_config(&a.common)?;
            if let Some(n) = a.copies {
                config.copies = n;
            }
            config.steps = a.steps.unwrap_or(config.steps);
            config.max_steps = a.max_steps.unwrap_or(config.max_steps);
            if let Some(t) = a.tau {
                config.tau = TauGrid { min: t, max: t, points: 1 };
            }
            config.tau.min = a.tau_min.unwrap_or(config.tau.min);
            config.tau.max = a.tau_max.unwrap_or(config.tau.max);
            config.tau.points = a.tau_points.unwrap_or(config.tau.points);
            let (table, errors) = sweep_tau(&config, worker_count(a.common.workers))?;
            emit(&table, &a.common, &config)?;
            // failed rows are still reported; non-convergence outranks other errors
            let worst = errors.iter().find(|e| matches!(e, QottoError::NonConvergence { .. })).or(errors.first());
            match worst {
                None => Ok(()),
                Some(e) => Err(e.clone().into()),
            }
        }
        Command::SweepN(a) => {
            let mut config = load_config(&a.common)?;
            config.n_min = a.n_min.unwrap_or(config.n_min);
            config.n_max = a.n_max.unwrap_or(config.n_max);
            if let Some(m) = a.mode {
                config.mode = m.into();
            }
            let table = sweep_copies(&config, worker_count(a.common.workers))?;
            emit(&table, &a.common, &config)
        }
        Command::Limit(common) => {
            let config = load_config(&common)?;
            let (_, table) = limit_table(&config)?;
            emit(&table, &common, &config)
        }
        Command::Crossings(a) => {
            let mut config = load_config(&a.common)?;
            if let Some(n) = a.copies {
                config.copies = n;
            }
            let table = crossings_table(&config)?;
            emit(&table, &a.common, &config)
        }
        Command::Selftest(a) => {
            let checks = selftest(a.seed);
            let mut out = io::stdout().lock();
            for c in &checks {
                writeln!(out, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            if failed > 0 {
                return Err(Failure::Invalid(format!("{failed} of {} self-test checks failed", checks.len())));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::NonConvergence(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
