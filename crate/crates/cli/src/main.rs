//! `actinet`: run scenarios, sweeps, re-analyses and renders.
//!
//! Exit codes: 0 success, 2 configuration error, 3 I/O error,
//! 4 numerical blowup.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use actinet::runner::{self, render, Analysis, RunError, RunOptions, Scenario};
use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "actinet",
    version,
    about = "Excitation-wave gates on conductive networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every input pair and analysis of a scenario file.
    Simulate {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run a scenario once per value of one scalar setting.
    Sweep {
        config: PathBuf,
        /// Setting to vary, e.g. `c2` or `spiking.window`.
        #[arg(long)]
        param: String,
        /// Values, comma- or space-separated.
        #[arg(long, num_args = 0.., value_delimiter = ',', allow_negative_numbers = true)]
        values: Vec<f64>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Re-run one analysis over the recordings in an output directory.
    Analyze {
        dir: PathBuf,
        #[arg(long, value_parser = parse_analysis)]
        mode: Analysis,
    },
    /// Render a checkpoint or PGM map to PNG.
    Render {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Debug, clap::Args)]
struct Overrides {
    /// Output directory, replacing the one in the file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override a scalar setting, e.g. `--set c2=0.107 --set n_iters=5000`.
    #[arg(long = "set", value_name = "NAME=VALUE", value_parser = parse_assignment)]
    set: Vec<(String, f64)>,
}

impl Overrides {
    fn load(&self, config: &Path) -> Result<Scenario, RunError> {
        let mut s = Scenario::load(config)?;
        for (name, value) in &self.set {
            s.set(name, *value)?;
        }
        if let Some(out) = &self.out {
            s.output_dir = out.clone();
        }
        s.validate()?;
        Ok(s)
    }
}

fn parse_analysis(s: &str) -> Result<Analysis, String> {
    s.parse()
}

fn parse_assignment(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=VALUE, got {s:?}"))?;
    let v = v
        .trim()
        .parse()
        .map_err(|_| format!("{k}: {v:?} is not a number"))?;
    Ok((k.trim().to_owned(), v))
}

fn run(cli: Cli) -> Result<serde_json::Value, RunError> {
    let opts = RunOptions::from_env()?;
    let value = match cli.command {
        Command::Simulate { config, overrides } => {
            let s = overrides.load(&config)?;
            let summary = runner::run_scenario(&s, &opts)?;
            serde_json::to_value(&summary)
        }
        Command::Sweep {
            config,
            param,
            values,
            overrides,
        } => {
            let s = overrides.load(&config)?;
            let report = runner::sweep(&s, &param, &values, &opts)?;
            serde_json::to_value(&report)
        }
        Command::Analyze { dir, mode } => Ok(runner::analyze_dir(&dir, mode, &opts)?),
        Command::Render { input, output } => {
            render::render_file(&input, &output)?;
            serde_json::to_value(output.display().to_string())
        }
    };
    Ok(value.expect("reports serialise"))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(v) => {
            println!("{}", serde_json::to_string_pretty(&v).expect("JSON"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("actinet: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
