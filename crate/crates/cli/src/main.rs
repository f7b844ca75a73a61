mod config;
mod expconv;
mod failure;
mod figure;
mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use jessen_core::scenes::{RotationScene, ShiftScene};

use crate::failure::Failure;

#[derive(Debug, Parser)]
#[command(
    name = "jessen",
    version,
    about = "Numerical verification of Jessen-type inequalities for positive semigroups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the lattice, semigroup, Jessen, adjoint and Gram suites and write report.json.
    Verify {
        /// Suite config (JSON); the bundled two-state benchmark when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory; overrides JESSEN_OUTPUT_DIR and the config.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Reproduce a counterexample scene as CSV, SVG and JSON.
    Figure {
        which: Which,
        /// Shift in x for scene 1a; a multiple of --step.
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        /// Grid half-width for scene 1a.
        #[arg(long, default_value_t = 6.0)]
        half_width: f64,
        /// Grid step for scene 1a.
        #[arg(long, default_value_t = 0.05)]
        step: f64,
        /// Rotation steps for scene 1b (angle 2 pi k / n).
        #[arg(long, default_value_t = 90)]
        k: usize,
        /// Points on the circle for scene 1b.
        #[arg(long, default_value_t = 360)]
        n: usize,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Build Gram matrices over exponent midpoints and test them for order-PSD.
    Expconv {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Which {
    #[value(name = "1a")]
    Shift,
    #[value(name = "1b")]
    Rotation,
}

fn run(cmd: Command) -> Result<bool, Failure> {
    match cmd {
        Command::Verify { config, output_dir } => {
            let suite = config::load(config.as_deref())?;
            let report = verify::run(&suite)?;
            let dir = output::resolve(output_dir.as_deref(), suite.output_dir.as_deref());
            let path = output::write_json(&dir, "report.json", &report)?;
            output::write_metadata(&dir, "verify", config.as_deref())?;
            let failures = report.failures();
            for f in &failures {
                eprintln!("FAIL {f}");
            }
            println!(
                "verify: {} asserted, {} failed, {} observed negative controls; report at {}",
                report.asserted_count(),
                failures.len(),
                report.observed.negative_controls.len(),
                path.display()
            );
            Ok(report.passed)
        }
        Command::Figure {
            which,
            t,
            half_width,
            step,
            k,
            n,
            output_dir,
        } => {
            let dir = output::resolve(output_dir.as_deref(), None);
            let line = match which {
                Which::Shift => figure::shift(&ShiftScene { half_width, step, t }, &dir)?,
                Which::Rotation => figure::rotation(&RotationScene { n, k }, &dir)?,
            };
            println!("{line}");
            Ok(true)
        }
        Command::Expconv { config, output_dir } => {
            let suite = config::load(config.as_deref())?;
            let (report, csv, table) = expconv::run(&suite)?;
            let dir = output::resolve(output_dir.as_deref(), suite.output_dir.as_deref());
            expconv::write(&dir, &report, &csv, &table)?;
            output::write_metadata(&dir, "expconv", config.as_deref())?;
            let failed = report.cases.iter().filter(|c| !c.summary.pass).count();
            println!(
                "expconv: {} Gram matrices, {failed} not PSD within tolerance; output in {}",
                report.cases.len(),
                dir.display()
            );
            Ok(report.passed)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.code())
        }
    }
}
