use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod error;
mod format;

use config::{List, Vec3};

#[derive(Debug, Parser)]
#[command(name = "swnoon", version, about = "Spin-wave NOON state interferometer simulator")]
struct Cli {
    /// Flat `key = value` configuration file; command-line flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Seed for simulated detector counts.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (CSV); standard output when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the generation sequence and print the resulting state.
    Generate(GenerateArgs),
    /// Scan the interferometer signal over displacements.
    Fringe(FringeArgs),
    /// Tabulate E(ℓ) over orders, lifetimes, and blockade shifts.
    ErrorSweep(SweepArgs),
    /// Fit the cloud displacement to a counts CSV.
    Estimate(EstimateArgs),
    /// Check an ensemble geometry against shift and error targets.
    Feasibility(FeasibilityArgs),
}

#[derive(Debug, Args)]
struct WaveArgs {
    /// Wave vector of the g → r_a beam, rad/μm (`x,y,z`).
    #[arg(long, value_name = "X,Y,Z", allow_hyphen_values = true)]
    k_gr_a: Option<Vec3>,
    #[arg(long, value_name = "X,Y,Z", allow_hyphen_values = true)]
    k_ra_sa: Option<Vec3>,
    #[arg(long, value_name = "X,Y,Z", allow_hyphen_values = true)]
    k_gr_b: Option<Vec3>,
    #[arg(long, value_name = "X,Y,Z", allow_hyphen_values = true)]
    k_rb_sb: Option<Vec3>,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long)]
    order: Option<u32>,
    /// Only print the number of light pulses in the sequence.
    #[arg(long)]
    pulses: bool,
    /// Displace the cloud after generation and report the readout signal, μm.
    #[arg(long, value_name = "X,Y,Z", allow_hyphen_values = true)]
    displacement: Option<Vec3>,
    #[command(flatten)]
    waves: WaveArgs,
}

#[derive(Debug, Args)]
struct FringeArgs {
    #[arg(long)]
    order: Option<u32>,
    /// First displacement setting, μm.
    #[arg(long, allow_hyphen_values = true)]
    min: Option<f64>,
    /// Last displacement setting, μm.
    #[arg(long, allow_hyphen_values = true)]
    max: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    /// Unit scan direction; defaults to the direction of Δk.
    #[arg(long, value_name = "X,Y,Z", allow_hyphen_values = true)]
    direction: Option<Vec3>,
    /// Shots per setting; 0 omits the counts column.
    #[arg(long)]
    shots: Option<u64>,
    /// True cloud offset x₀ along the scan, μm.
    #[arg(long, allow_hyphen_values = true)]
    offset: Option<f64>,
    #[command(flatten)]
    waves: WaveArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Comma-separated orders.
    #[arg(long)]
    orders: Option<List<u32>>,
    /// Comma-separated blockade shifts, MHz.
    #[arg(long)]
    shifts: Option<List<f64>>,
    /// Comma-separated Rydberg lifetimes, μs.
    #[arg(long)]
    lifetimes: Option<List<f64>>,
    #[arg(long)]
    atoms: Option<f64>,
    /// Where to write the plot script; defaults to `<out>.plot.py` when --out is set.
    #[arg(long, value_name = "PATH")]
    plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// CSV with columns displacement_um, shots, count.
    input: PathBuf,
    #[arg(long)]
    order: Option<u32>,
    /// Shots per setting when the CSV has no shots column.
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long, value_name = "X,Y,Z", allow_hyphen_values = true)]
    direction: Option<Vec3>,
    #[command(flatten)]
    waves: WaveArgs,
}

#[derive(Debug, Args)]
struct FeasibilityArgs {
    /// Principal quantum number.
    #[arg(long)]
    n: Option<u32>,
    /// Ensemble radius, μm.
    #[arg(long)]
    radius_um: Option<f64>,
    /// Atomic density, cm⁻³.
    #[arg(long)]
    density_cm3: Option<f64>,
    #[arg(long)]
    order: Option<u32>,
    #[arg(long)]
    lifetime_us: Option<f64>,
    #[arg(long)]
    target_shift_mhz: Option<f64>,
    /// Accepted relative shortfall of the shift.
    #[arg(long)]
    shift_tolerance: Option<f64>,
    /// Upper bound on E(ℓ).
    #[arg(long)]
    target_error: Option<f64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match commands::dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("swnoon: error[{}]: {e}", e.kind());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
