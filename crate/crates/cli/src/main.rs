mod commands;
mod config;
mod error;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Internal-feedback experiments: gain sweeps, stabilizability without
/// internal feedback, controller synthesis, simulation and audits.
#[derive(Debug, Parser)]
#[command(name = "dpflab", version)]
struct Cli {
    /// Config file with one `[command]` section per subcommand; flags win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sweep the one-step-delay filter gains l1, l2 over (a, sigma_w, sigma_v).
    Fig5(Fig5Args),
    /// Largest |a| stabilizable without internal feedback for Td = 1..td-max.
    Fig7(Fig7Args),
    /// Synthesize a controller and write it with its wiring and signal sizes.
    Synth(SynthArgs),
    /// Simulate a saved controller and estimate its cost.
    Simulate(SimulateArgs),
    /// Audit saved controller files (Riccati residuals, achievability, stability).
    Check(CheckArgs),
}

#[derive(Debug, Args)]
pub struct Fig5Args {
    /// Pole values.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub a: Option<Vec<f64>>,
    /// Disturbance standard deviations (default: logspace over [0.1, 10]).
    #[arg(long = "sigma-w", value_delimiter = ',')]
    pub sigma_w: Option<Vec<f64>>,
    /// Sensor noise standard deviations (default: logspace over [0.1, 10]).
    #[arg(long = "sigma-v", value_delimiter = ',')]
    pub sigma_v: Option<Vec<f64>>,
    /// Number of points in the default logspace grids.
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Fig7Args {
    #[arg(long = "td-max")]
    pub td_max: Option<usize>,
    /// Bisection tolerance on |a|.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Sf,
    Fc,
    Of,
    Sls,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DynamicsArg {
    Lateral,
    Feedback,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NoiseArg {
    Gaussian,
    Impulse,
    Zero,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Plant file; replaces the scalar flags.
    #[arg(long, value_name = "FILE")]
    pub plant: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    #[arg(long = "sigma-w")]
    pub sigma_w: Option<f64>,
    #[arg(long = "sigma-v")]
    pub sigma_v: Option<f64>,
    /// Net delay steps in front of the scalar plant.
    #[arg(long)]
    pub td: Option<usize>,
    #[arg(long, value_enum)]
    pub controller: Option<KindArg>,
    /// SLS horizon (number of spectral components).
    #[arg(long = "T", visible_alias = "horizon")]
    pub horizon: Option<usize>,
    /// SLS delay mask file.
    #[arg(long, value_name = "FILE")]
    pub mask: Option<PathBuf>,
    /// FC only: zero every gain on an internal wire.
    #[arg(long = "no-dpf")]
    pub no_dpf: bool,
    /// OF only: how the estimator self-loop is classified.
    #[arg(long = "estimator-dynamics", value_enum)]
    pub estimator_dynamics: Option<DynamicsArg>,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Controller file written by `synth`.
    #[arg(long, value_name = "FILE")]
    pub controller: Option<PathBuf>,
    /// Plant file replacing the one stored with the controller.
    #[arg(long, value_name = "FILE")]
    pub plant: Option<PathBuf>,
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Monte Carlo rollouts for the cost estimate.
    #[arg(long)]
    pub rollouts: Option<usize>,
    #[arg(long, env = "DPFLAB_SEED")]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub noise: Option<NoiseArg>,
    /// Impulse channel (state index, from 0).
    #[arg(long)]
    pub channel: Option<usize>,
    /// Impulse time step.
    #[arg(long)]
    pub time: Option<usize>,
    /// Skip the Monte Carlo cost estimate.
    #[arg(long = "no-cost")]
    pub no_cost: bool,
    /// Trajectory CSV path.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(required = true, value_name = "FILE")]
    pub files: Vec<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = cli.config.as_deref();
    let result = match &cli.command {
        Command::Fig5(args) => commands::fig5(args, cfg),
        Command::Fig7(args) => commands::fig7(args, cfg),
        Command::Synth(args) => commands::synth(args, cfg),
        Command::Simulate(args) => commands::simulate(args, cfg),
        Command::Check(args) => commands::check(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
