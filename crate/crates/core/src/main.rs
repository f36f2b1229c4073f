use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use uav_secrecy::cli::{run_command, Command, RunConfig};
use uav_secrecy::transform::Strategy;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    /// Joint trajectory and resource design
    Optimize,
    /// The fixed-bandwidth and fixed-timeslot reference designs
    Baseline,
    /// Compare strategies across Eve uncertainty radii
    Sweep,
    /// Check a scenario file and list violated invariants
    Validate,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum StrategyArg {
    Joint,
    FixedBandwidth,
    FixedTimeslot,
}

#[derive(Debug, Parser)]
#[command(version, about = "Secure UAV relay trajectory and resource design")]
struct Args {
    command: Cmd,
    /// Scenario file, or `default_mission` for the bundled one
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum)]
    strategy: Option<StrategyArg>,
    /// Eve uncertainty radii in km, comma separated
    #[arg(long, value_delimiter = ',')]
    de_grid: Option<Vec<f64>>,
    /// Eve QoS target in Mbit/s
    #[arg(long)]
    re: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Record measured wall times instead of zeros
    #[arg(long)]
    wall_clock: bool,
}

fn main() -> ExitCode {
    let a = Args::parse();
    let command = match a.command {
        Cmd::Optimize => Command::Optimize,
        Cmd::Baseline => Command::Baseline,
        Cmd::Sweep => Command::Sweep,
        Cmd::Validate => Command::Validate,
    };
    let cfg = RunConfig {
        command,
        scenario: a.scenario,
        out: a.out,
        strategy: a.strategy.map(|s| match s {
            StrategyArg::Joint => Strategy::Joint,
            StrategyArg::FixedBandwidth => Strategy::FixedBandwidth,
            StrategyArg::FixedTimeslot => Strategy::FixedTimeslot,
        }),
        de_grid_km: a.de_grid,
        re_mbps: a.re,
        epsilon: a.epsilon,
        max_iters: a.max_iters,
        deterministic: !a.wall_clock,
    };
    let code = run_command(&cfg, &mut std::io::stdout().lock());
    ExitCode::from(code as u8)
}
