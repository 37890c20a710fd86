use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use springchain_cli::{output, parse_config_with, run, CliError, RunOptions, EXIT_USAGE};

#[derive(Parser, Debug)]
#[command(name = "springchain", version, about = "Spin-chain experiments on layered hard/soft magnets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct Common {
    /// Experiment definition (TOML). Omitted keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for result files.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Set a config key, e.g. `--override experiment.H_a=4800`. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Write a per-step convergence trace (relax).
    #[arg(long)]
    trace: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    Relax(Common),
    Sweep(Common),
    CriticalAngle(Common),
    CriticalFields(Common),
    TorqueCurve(Common),
    AngleCurve(Common),
}

impl Command {
    fn split(self) -> (&'static str, Common) {
        match self {
            Command::Relax(c) => ("relax", c),
            Command::Sweep(c) => ("sweep", c),
            Command::CriticalAngle(c) => ("critical-angle", c),
            Command::CriticalFields(c) => ("critical-fields", c),
            Command::TorqueCurve(c) => ("torque-curve", c),
            Command::AngleCurve(c) => ("angle-curve", c),
        }
    }
}

fn execute(kind: &str, common: Common) -> Result<i32, CliError> {
    let text = match &common.config {
        Some(p) => {
            let raw = output::read_file(p)?;
            // Result files carry their config in the header.
            output::extract_config(&raw).unwrap_or(raw)
        }
        None => String::new(),
    };
    let mut overrides = common.overrides;
    overrides.push(format!("experiment.kind=\"{kind}\""));
    let cfg = parse_config_with(&text, &overrides)?;
    let opts = RunOptions { out_dir: common.out, trace: common.trace };
    let outcome = run(&cfg, &opts, &mut std::io::stdout())?;
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let (kind, common) = cli.command.split();
    match execute(kind, common) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("springchain: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
