//! `symbench`: run benchmarking campaigns, verify design ensembles, and fit
//! decay curves.
//!
//! Exit codes: 0 success (or verification passed), 1 runtime failure (or
//! verification failed), 2 invalid input, 3 ensemble too large to enumerate.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use symbench::campaign::{self, CampaignConfig};
use symbench::fitting::{fit_decay, FitOptions};
use symbench::protocol::DecayCurve;
use symbench::Error;

#[derive(Parser)]
#[command(name = "symbench", version, about = "Symmetry benchmarking of noisy qubit registers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a campaign and write curve CSV, fit JSON and plot data.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Worker thread cap; results do not depend on it.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Check the one-design conditions of the configured ensemble.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        mode: VerifyMode,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Fit a decay curve CSV and print the result as JSON.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
        order: u8,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct VerifyMode {
    /// Enumerate the whole ensemble.
    #[arg(long)]
    exact: bool,
    /// Estimate the averages from this many random draws.
    #[arg(long)]
    samples: Option<usize>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

fn load_config(path: &Path) -> Result<CampaignConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::new(2, format!("cannot read {}: {e}", path.display())))?;
    campaign::parse_config(&text).map_err(|e| Failure::new(2, format!("invalid config {}: {e}", path.display())))
}

fn set_threads(threads: Option<usize>) -> Result<(), Failure> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(Failure::new(2, "--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::new(1, format!("cannot start thread pool: {e}")))?;
    }
    Ok(())
}

fn write_file(dir: &Path, name: &str, content: &str) -> Result<PathBuf, Failure> {
    let path = dir.join(name);
    fs::write(&path, content).map_err(|e| Failure::new(1, format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn output_dir(cfg: &CampaignConfig) -> Result<PathBuf, Failure> {
    let dir = PathBuf::from(&cfg.output_dir);
    fs::create_dir_all(&dir).map_err(|e| Failure::new(1, format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

fn cmd_run(config: &Path, threads: Option<usize>) -> Result<u8, Failure> {
    let cfg = load_config(config)?;
    set_threads(threads)?;
    let out = campaign::run_campaign(&cfg).map_err(|e| Failure::new(1, format!("campaign failed: {e}")))?;
    let dir = output_dir(&cfg)?;
    for (name, content) in &out.files {
        let path = write_file(&dir, name, content)?;
        eprintln!("wrote {}", path.display());
    }
    print!("{}", out.summary);
    Ok(0)
}

fn cmd_verify(config: &Path, mode: &VerifyMode, threads: Option<usize>) -> Result<u8, Failure> {
    let cfg = load_config(config)?;
    set_threads(threads)?;
    let samples = if mode.exact { None } else { mode.samples };
    let report = match campaign::run_verification(&cfg, samples) {
        Ok(r) => r,
        Err(e @ Error::Capability(_)) => return Err(Failure::new(3, format!("cannot verify: {e}"))),
        Err(e @ (Error::Argument(_) | Error::Validation(_))) => {
            return Err(Failure::new(2, format!("invalid verification request: {e}")))
        }
        Err(e) => return Err(Failure::new(1, format!("verification failed to run: {e}"))),
    };
    let json = serde_json::to_string_pretty(&report).expect("report is serializable") + "\n";
    write_file(&output_dir(&cfg)?, "verification.json", &json)?;
    print!("{json}");
    if report.passed {
        Ok(0)
    } else {
        let failed: Vec<String> = report.failed_conditions().iter().map(|c| format!("{c:?}")).collect();
        eprintln!("one-design conditions violated: {}", failed.join(", "));
        Ok(1)
    }
}

fn cmd_fit(input: &Path, order: u8) -> Result<u8, Failure> {
    let text = fs::read_to_string(input).map_err(|e| Failure::new(2, format!("cannot read {}: {e}", input.display())))?;
    let (curve, stderr_missing) =
        DecayCurve::from_csv(&text).map_err(|e| Failure::new(2, format!("malformed CSV {}: {e}", input.display())))?;
    if stderr_missing {
        eprintln!("warning: no stderr column; fitting with uniform weights");
    }
    let fit = fit_decay(&curve, FitOptions::order(order as usize)).map_err(|e| match e {
        Error::Argument(_) => Failure::new(2, format!("cannot fit {}: {e}", input.display())),
        _ => Failure::new(1, format!("fit failed: {e}")),
    })?;
    println!("{}", serde_json::to_string_pretty(&fit).expect("fit is serializable"));
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config, threads } => cmd_run(config, *threads),
        Command::Verify { config, mode, threads } => cmd_verify(config, mode, *threads),
        Command::Fit { input, order } => cmd_fit(input, *order),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
