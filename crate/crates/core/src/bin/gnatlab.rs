//! Experiment runner for tangent-bundle metrics built from six generator
//! curves over a surface chart.
//!
//! Exit codes: 0 success, 1 at least one residual exceeded its tolerance,
//! 2 configuration error (nothing written), 3 math or i/o failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gnatlab::config::{ExperimentConfig, OutputFormat};
use gnatlab::runner::{execute, write_report, ExperimentCommand};

#[derive(Parser)]
#[command(
    name = "gnatlab",
    version,
    about = "Numerical laboratory for natural metrics on tangent bundles of surfaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify the metric (nondegenerate / Riemannian) over a t-grid
    CheckMetric(RunArgs),
    /// Jacobi spectra over the configured sample
    Spectrum(RunArgs),
    /// Residuals of the structural identities and zero patterns
    VerifyIdentities(RunArgs),
    /// Test whether Jacobi spectra depend on the direction or the point
    Osserman(RunArgs),
    /// All of the above in one aggregate report
    Report(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment configuration
    #[arg(long)]
    config: PathBuf,
    /// Report file (default: the config's outputs.path, else stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format (default: the config's outputs.format, else csv)
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> OutputFormat {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, args) = match &cli.command {
        Cmd::CheckMetric(a) => (ExperimentCommand::CheckMetric, a),
        Cmd::Spectrum(a) => (ExperimentCommand::Spectrum, a),
        Cmd::VerifyIdentities(a) => (ExperimentCommand::VerifyIdentities, a),
        Cmd::Osserman(a) => (ExperimentCommand::Osserman, a),
        Cmd::Report(a) => (ExperimentCommand::Report, a),
    };

    // configuration stage: any failure exits 2 before output exists
    let resolved = match ExperimentConfig::load(&args.config).and_then(|c| c.resolve()) {
        Ok(rc) => rc,
        Err(e) => {
            eprintln!("gnatlab: configuration error: {e}");
            return ExitCode::from(2);
        }
    };

    let format: OutputFormat = args
        .format
        .map(OutputFormat::from)
        .or_else(|| resolved.outputs.as_ref().map(|o| o.format))
        .unwrap_or_default();
    let path: Option<PathBuf> = args.out.clone().or_else(|| {
        resolved
            .outputs
            .as_ref()
            .and_then(|o| o.path.as_ref().map(PathBuf::from))
    });

    let outcome = match execute(cmd, &resolved) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("gnatlab: {e}");
            return ExitCode::from(3);
        }
    };
    if let Err(e) = write_report(&outcome, format, path.as_deref()) {
        eprintln!("gnatlab: {e}");
        return ExitCode::from(3);
    }

    if outcome.violations > 0 {
        eprintln!(
            "gnatlab: {} of {} rows exceeded their tolerance",
            outcome.violations,
            outcome.rows.len()
        );
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
