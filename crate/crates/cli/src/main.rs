//! `bladegauge`: batch verification, residual dumps and flows for rotating-blade gauge fields.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails or a
//! computation breaks down, 2 for usage and configuration errors.

mod commands;
mod config;
mod failure;
mod output;
mod schema;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{parse_vector, Vector};
use crate::failure::Failure;

#[derive(Parser)]
#[command(name = "bladegauge", version, about = "Rotating-blade verification harness for U(n) gauge fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug, Default)]
pub struct ScenarioFlags {
    /// Builtin scenario name or path to a scenario JSON file
    #[arg(long)]
    pub scenario: Option<String>,
    /// Run configuration file (flags given on the command line take precedence)
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Plane-wave wave vector, comma-separated
    #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
    pub k: Option<Vector>,
    /// Plane-wave polarisation, comma-separated
    #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
    pub n: Option<Vector>,
    /// Monopole strength
    #[arg(long, allow_hyphen_values = true)]
    pub g: Option<f64>,
    /// Seed for seeded scenarios and sample points
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the identity suite on a scenario (default: every builtin fixture)
    Verify {
        #[command(flatten)]
        scenario: ScenarioFlags,
        /// Write the JSON report here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate an equation-of-motion residual on grid cell centres
    Residuals {
        #[command(flatten)]
        scenario: ScenarioFlags,
        /// Equation: ym, modified, maxmod, shape or sigma
        #[arg(long)]
        eq: Option<String>,
        /// Grid: inline JSON, a JSON file, or lo:hi:cells per axis
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        /// Per-point CSV output
        #[arg(long)]
        csv: Option<PathBuf>,
        /// JSON summary output (default stdout)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Exit with status 1 when the largest residual exceeds its threshold
        #[arg(long)]
        check: bool,
    },
    /// Gradient flow of the lattice sigma-model action
    SigmaFlow {
        /// Initial field JSON
        #[arg(long)]
        init: PathBuf,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, default_value_t = 0.05)]
        eta: f64,
        /// JSON action trace output (default stdout)
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Final field dump as JSON (point, R entries)
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Build the Darboux frame of a 1-form and check it
    Darboux {
        /// Darboux input JSON
        #[arg(long)]
        input: PathBuf,
        /// Number of random sample points
        #[arg(long, default_value_t = 64)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Curvature table of a builtin embedded surface
    Embedded {
        #[arg(long, value_enum)]
        surface: SurfaceName,
        /// Sphere radius
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        /// Torus major radius
        #[arg(long, default_value_t = 2.0)]
        major: f64,
        /// Torus minor radius
        #[arg(long, default_value_t = 0.5)]
        minor: f64,
        /// Sample points per chart axis
        #[arg(long, default_value_t = 8)]
        points: usize,
        /// CSV output (default stdout)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SurfaceName {
    Plane,
    Sphere,
    Cylinder,
    Torus,
}

fn init_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("BLADEGAUGE_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("BLADEGAUGE_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Usage(format!("cannot size thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), Failure> {
    init_threads()?;
    match cli.command {
        Command::Verify { scenario, out } => commands::verify(&scenario, out.as_deref()),
        Command::Residuals {
            scenario,
            eq,
            grid,
            csv,
            out,
            check,
        } => commands::residuals(&scenario, eq.as_deref(), grid.as_deref(), csv.as_deref(), out.as_deref(), check),
        Command::SigmaFlow {
            init,
            steps,
            eta,
            trace,
            dump,
        } => commands::sigma_flow(&init, steps, eta, trace.as_deref(), dump.as_deref()),
        Command::Darboux {
            input,
            samples,
            seed,
            out,
        } => commands::darboux(&input, samples, seed, out.as_deref()),
        Command::Embedded {
            surface,
            a,
            major,
            minor,
            points,
            out,
        } => commands::embedded(surface, a, major, minor, points, out.as_deref()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("bladegauge: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
