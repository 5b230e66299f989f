#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod report;
mod run;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use config::{Check, ConfigError, RunConfig};
use report::Report;
use run::{ReportBody, RunError, SideFiles};

const EXIT_FAILED: u8 = 1;
const EXIT_INPUT: u8 = 2;

#[derive(Parser)]
#[command(
    name = "carleson",
    version,
    about = "Numerical checks of Carleson-measure conditions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the dyadic depth.
    #[arg(long)]
    depth: Option<usize>,
    /// Directory for report.json and per-check files.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the checks listed in the configuration.
    Run(Common),
    /// Square, Whitney, boundary and equivalence checks.
    Check(Common),
    /// Embedding constant over the test family.
    Embed(Common),
    /// Stopping-time decomposition of the map.
    Stopping(Common),
    /// Quasi-nearly subharmonic constant of the configured candidate.
    Qns(Common),
    /// Seeded random square/ball comparison suite.
    Suite(Common),
    /// Print a CSV produced by --out as an aligned table.
    Report { file: PathBuf },
}

fn load(common: &Common) -> Result<RunConfig, ConfigError> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(depth) = common.depth {
        cfg.knobs.depth = depth;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(body: &ReportBody, files: &SideFiles, started: Instant, out: Option<&Path>) -> Result<(), String> {
    print!("{}", report::summary(body));
    if let Some(dir) = out {
        let timing = BTreeMap::from([("seconds".to_string(), started.elapsed().as_secs_f64())]);
        run::write_side_files(dir, files).map_err(|e| format!("{}: {e}", dir.display()))?;
        let json = report::to_json(&Report { body, timing });
        std::fs::write(dir.join("report.json"), json).map_err(|e| format!("{}: {e}", dir.display()))?;
    }
    Ok(())
}

fn execute(common: &Common, checks: Option<&[Check]>, suite: bool) -> ExitCode {
    let started = Instant::now();
    let cfg = match load(common) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(EXIT_INPUT);
        }
    };
    let result = if suite {
        run::run_suite(&cfg, common.depth).map(|b| (b, SideFiles::new()))
    } else {
        run::run(&cfg, checks.unwrap_or(&cfg.checks))
    };
    let (body, files) = match result {
        Ok(r) => r,
        Err(RunError::Config(e)) => {
            eprintln!("config error: {e}");
            return ExitCode::from(EXIT_INPUT);
        }
        Err(RunError::Numeric(e)) => {
            eprintln!("numeric error: {e}");
            return ExitCode::from(EXIT_FAILED);
        }
    };
    if let Err(e) = emit(&body, &files, started, common.out.as_deref()) {
        eprintln!("output error: {e}");
        return ExitCode::from(EXIT_INPUT);
    }
    if body.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAILED)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Run(c) => execute(c, None, false),
        Command::Check(c) => execute(
            c,
            Some(&[Check::Square, Check::Whitney, Check::Boundary, Check::Equivalence]),
            false,
        ),
        Command::Embed(c) => execute(c, Some(&[Check::Embed]), false),
        Command::Stopping(c) => execute(c, Some(&[Check::Stopping]), false),
        Command::Qns(c) => execute(c, Some(&[Check::Qns]), false),
        Command::Suite(c) => execute(c, None, true),
        Command::Report { file } => {
            let rendered = std::fs::File::open(file)
                .map_err(|e| e.to_string())
                .and_then(|f| report::render_csv(f).map_err(|e| e.to_string()));
            match rendered {
                Ok(text) => {
                    print!("{text}");
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("{}: {e}", file.display());
                    ExitCode::from(EXIT_INPUT)
                }
            }
        }
    }
}
