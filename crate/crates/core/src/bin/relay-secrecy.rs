use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use relay_secrecy::cli::validate::{report_csv, run_all, ValidateOptions};
use relay_secrecy::cli::{exit_code, run_to_file, ExperimentConfig, Scenario, Sweep};
use relay_secrecy::Result;

/// Secrecy-rate experiments for a multi-antenna AF relay with a
/// wireless-powered jammer.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its results as CSV.
    Run {
        #[arg(long, value_parser = parse_scenario)]
        scenario: Scenario,
        /// `key = value` overrides
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Also write an SVG next to the CSV.
        #[arg(long)]
        plot: bool,
    },
    /// Sweep one variable over a scenario.
    Sweep {
        #[arg(long)]
        var: String,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long)]
        step: f64,
        #[arg(long, value_parser = parse_scenario, default_value = "custom")]
        scenario: Scenario,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        plot: bool,
    },
    /// Run the numerical self-checks.
    Validate {
        /// Write the checks as CSV.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        tolerance_scale: f64,
    },
}

fn parse_scenario(s: &str) -> std::result::Result<Scenario, String> {
    s.parse().map_err(|e: relay_secrecy::Error| e.to_string())
}

fn load(scenario: Scenario, config: Option<PathBuf>) -> Result<ExperimentConfig> {
    match config {
        Some(path) => ExperimentConfig::load(scenario, &path),
        None => Ok(ExperimentConfig::preset(scenario)),
    }
}

fn execute(command: Command) -> Result<ExitCode> {
    match command {
        Command::Run {
            scenario,
            config,
            out,
            plot,
        } => {
            let config = load(scenario, config)?;
            let rows = run_to_file(&config, &out, plot)?;
            eprintln!("wrote {} rows to {}", rows.len(), out.display());
        }
        Command::Sweep {
            var,
            from,
            to,
            step,
            scenario,
            config,
            out,
            plot,
        } => {
            let mut config = load(scenario, config)?;
            config.sweep = Sweep::new(var.parse()?, from, to, step);
            config.validate()?;
            let rows = run_to_file(&config, &out, plot)?;
            eprintln!("wrote {} rows to {}", rows.len(), out.display());
        }
        Command::Validate {
            report,
            trials,
            seed,
            tolerance_scale,
        } => {
            let checks = run_all(&ValidateOptions {
                n_trials: trials,
                seed,
                tolerance_scale,
            })?;
            for c in &checks {
                println!("{}", c.summary());
            }
            if let Some(path) = report {
                std::fs::write(path, report_csv(&checks))?;
            }
            if checks.iter().any(|c| !c.passed()) {
                return Ok(ExitCode::from(3));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
