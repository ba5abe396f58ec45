//! Command-line front end: sampling, estimators and the verification suites.

mod commands;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "sle", version, about = "Sampling and verification tools for chordal and two-sided radial SLE")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fixed-step chordal traces in the upper half-plane, written as SLC1 plus JSON sidecars.
    SampleChordal(SampleChordal),
    /// Two-sided radial traces through an interior point.
    SampleTwosided(SampleTwosided),
    /// Compare two-sided first segments with the reweighted chordal oracle.
    #[command(name = "oracle-2sr")]
    Oracle2sr(Oracle2sr),
    /// Minkowski content (natural length) of a stored trace.
    NaturalLength(NaturalLength),
    /// Green's function of a configuration at a point.
    Green(Green),
    /// Escape probabilities and their log-log slope for a directory of traces.
    EscapeStats(EscapeStats),
    /// Moment scaling of natural length in shrinking disks.
    ThetaScan(ThetaScan),
    /// Riemann-sum aggregate of two-sided laws against length-biased chordal SLE.
    VerifyLengthbias(VerifyLengthbias),
    /// Run verification suites and write their reports.
    RunSuite(RunSuite),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum DomainArg {
    /// Upper half-plane from 0 to ∞.
    Halfplane,
    /// Unit disk from -1 to 1.
    Disk,
    /// Plane minus (-∞,-1] and [1,∞), from -1 to 1.
    TwoSlit,
}

/// Parse `x,y` into a point.
pub fn parse_point(s: &str) -> Result<(f64, f64), String> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("expected x,y, got {s:?}"))?;
    let p = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    Ok((p(x)?, p(y)?))
}

#[derive(Args)]
pub struct SampleChordal {
    #[arg(long)]
    pub kappa: f64,
    /// Capacity time at which each trace stops.
    #[arg(long, default_value_t = 1.0)]
    pub tmax: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub dt: f64,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct SampleTwosided {
    #[arg(long)]
    pub kappa: f64,
    #[arg(long, value_enum, default_value_t = DomainArg::Disk)]
    pub domain: DomainArg,
    /// Interior target point `x,y`.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true, default_value = "0,0")]
    pub zeta: (f64, f64),
    /// Bulk spatial step.
    #[arg(long, default_value_t = 0.05)]
    pub h: f64,
    /// Radius at which the tilted phase stops; dist(ζ, ∂D)/64 by default.
    #[arg(long)]
    pub stop: Option<f64>,
    /// Keep capacity time instead of natural time.
    #[arg(long)]
    pub capacity: bool,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct Oracle2sr {
    #[arg(long, default_value_t = 8.0 / 3.0)]
    pub kappa: f64,
    /// Samples per law.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 0.05)]
    pub h: f64,
    #[arg(long)]
    pub seed: u64,
    /// Also write the two-sided ensemble here.
    #[arg(long)]
    pub ensemble: Option<PathBuf>,
}

#[derive(Args)]
pub struct NaturalLength {
    /// SLC1 trace.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub kappa: f64,
    /// Explicit decreasing scales; a relative ladder when omitted.
    #[arg(long, value_delimiter = ',')]
    pub eps: Vec<f64>,
    /// Write the naturally parametrized trace here.
    #[arg(long)]
    pub reparam: Option<PathBuf>,
}

#[derive(Args)]
pub struct Green {
    #[arg(long)]
    pub kappa: f64,
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub zeta: (f64, f64),
    #[arg(long, value_enum, default_value_t = DomainArg::Halfplane)]
    pub domain: DomainArg,
    /// Half-plane start point.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub from: f64,
    /// Half-plane end point; ∞ when omitted.
    #[arg(long, allow_hyphen_values = true)]
    pub to: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub c_kappa: f64,
}

#[derive(Args)]
pub struct EscapeStats {
    /// Directory of SLC1 traces with sidecars.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "2,4,8,16")]
    pub radii: Vec<f64>,
}

#[derive(Args)]
pub struct ThetaScan {
    #[arg(long, default_value_t = 8.0 / 3.0)]
    pub kappa: f64,
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true, default_value = "0,0")]
    pub zeta: (f64, f64),
    #[arg(long, value_delimiter = ',', default_value = "0.25,0.125,0.0625")]
    pub diameters: Vec<f64>,
    #[arg(long, default_value_t = 600)]
    pub n: usize,
    #[arg(long, default_value_t = 0.05)]
    pub h: f64,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Args)]
pub struct VerifyLengthbias {
    #[arg(long, default_value_t = 8.0 / 3.0)]
    pub kappa: f64,
    /// Two-sided samples per mesh and chordal traces.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 0.05)]
    pub h: f64,
    /// Mesh ladder as fractions of the domain's bounding square.
    #[arg(long, value_delimiter = ',', default_value = "0.25,0.125,0.0625")]
    pub mesh: Vec<f64>,
    /// Stop refining after this many seconds; the report is marked incomplete.
    #[arg(long)]
    pub time_budget: Option<f64>,
    #[arg(long)]
    pub seed: u64,
    /// Directory for the JSON report, CSV and plot script.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct RunSuite {
    /// Experiment file; without it the suites come from `--suite`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub suite: Vec<String>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Overrides the experiment's output directory.
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// Use the full acceptance budgets instead of the pilot ones.
    #[arg(long)]
    pub full: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::SampleChordal(a) => commands::sample_chordal(a),
        Command::SampleTwosided(a) => commands::sample_twosided(a),
        Command::Oracle2sr(a) => commands::oracle_2sr(a),
        Command::NaturalLength(a) => commands::natural_length(a),
        Command::Green(a) => commands::green(a),
        Command::EscapeStats(a) => commands::escape_stats(a),
        Command::ThetaScan(a) => commands::theta_scan(a),
        Command::VerifyLengthbias(a) => commands::verify_lengthbias(a),
        Command::RunSuite(a) => commands::run_suite(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
