use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hpgate_cli::config::Tolerances;
use hpgate_cli::{run, ConfigError, Experiment, ExperimentConfig, Outcome, THREADS_ENV};

#[derive(Parser)]
#[command(name = "hpgate", version, about = "Verification suites for hybridly protected quantum gates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spin-layer synthesis of the gate catalog against closed forms.
    VerifyGates(RunArgs),
    /// Holonomy, parallel transport, decoupling and DFS certificates.
    VerifyProtection(RunArgs),
    /// Calibrated gates on coupled quantum Rabi models.
    SimulateQrm(RunArgs),
    /// Noise sweep over a magnitude grid (JSON report plus CSV).
    NoiseSweep(RunArgs),
    /// Print the default configuration as TOML.
    Defaults {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML config, or a JSON config / earlier report.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// JSON report path; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    /// Replaces every tolerance.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Comma-separated gate names (X, Z, H, S, T, ZZ, CZ).
    #[arg(long, value_delimiter = ',')]
    gates: Option<Vec<String>>,
}

impl RunArgs {
    fn config(&self) -> Result<ExperimentConfig, ConfigError> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(trials) = self.trials {
            cfg.trials = trials;
        }
        if let Some(t) = self.tolerance {
            cfg.tolerances = Tolerances::uniform(t);
        }
        if let Some(gates) = &self.gates {
            cfg.gates = gates.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value.trim().parse().map_err(|_| format!("{THREADS_ENV}={value} is not a thread count"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn exit(outcome: Outcome) -> ExitCode {
    ExitCode::from(outcome as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return exit(Outcome::ConfigError);
    }
    let (experiment, args) = match cli.command {
        Command::VerifyGates(a) => (Experiment::VerifyGates, a),
        Command::VerifyProtection(a) => (Experiment::VerifyProtection, a),
        Command::SimulateQrm(a) => (Experiment::SimulateQrm, a),
        Command::NoiseSweep(a) => (Experiment::NoiseSweep, a),
        Command::Defaults { out } => {
            let text = ExperimentConfig::default().to_toml();
            return match out {
                Some(path) => match std::fs::write(&path, text) {
                    Ok(()) => exit(Outcome::Pass),
                    Err(e) => {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        exit(Outcome::ConfigError)
                    }
                },
                None => {
                    print!("{text}");
                    exit(Outcome::Pass)
                }
            };
        }
    };
    let report = match args.config().and_then(|cfg| run(experiment, &cfg)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return exit(Outcome::ConfigError);
        }
    };
    match &args.out {
        Some(path) => match report.write(path) {
            Ok(files) => {
                for f in files {
                    eprintln!("wrote {}", f.display());
                }
            }
            Err(e) => {
                eprintln!("error: cannot write {}: {e}", path.display());
                return exit(Outcome::ConfigError);
            }
        },
        None => println!("{}", report.to_json()),
    }
    for r in report.records.iter().filter(|r| !r.passed()) {
        for c in r.checks.iter().filter(|c| !c.pass) {
            eprintln!("FAIL {} {}: {:e} > {:e}", r.name, c.name, c.value, c.tolerance);
        }
    }
    for e in &report.errors {
        eprintln!("ERROR {}: {}", e.name, e.message);
    }
    exit(report.outcome())
}
