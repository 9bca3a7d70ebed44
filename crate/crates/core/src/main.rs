use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand as ClapSubcommand};

use hybrid_v2x::cli::config::{parse_modes, parse_weathers};
use hybrid_v2x::cli::{cmd_validate, run, RunOptions, Subcommand};
use hybrid_v2x::metrics::Mode;
use hybrid_v2x::scenario::WeatherKind;

#[derive(Parser)]
#[command(name = "hybrid-v2x", version, about = "Hybrid RF/VLC V2I uplink Monte Carlo simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(ClapSubcommand)]
enum Command {
    /// Packet reception probability vs. distance.
    PrpSweep(CommonArgs),
    /// Delay outage rate vs. delay threshold.
    DorSweep(CommonArgs),
    /// Mean achievable rate vs. distance.
    RateSweep(CommonArgs),
    /// Parse and check a configuration, printing its resolved form.
    Validate(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Configuration file (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Trials per sweep point.
    #[arg(long)]
    trials: Option<u64>,
    /// Comma-separated weather list (clear,rain,fog,dry_snow).
    #[arg(long, value_parser = parse_weather_list)]
    weather: Option<WeatherList>,
    /// Comma-separated mode list (pure_vlc,pure_rf,la,non_la).
    #[arg(long, value_parser = parse_mode_list)]
    modes: Option<ModeList>,
    /// Also write whitespace-delimited per-curve files.
    #[arg(long)]
    gnuplot: bool,
    /// Worker threads (0 = all cores). Does not affect results.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Write per-trial SINR dumps next to the rate sweep output.
    #[arg(long, hide = true)]
    dump_trials: bool,
}

// Newtypes so clap treats a comma list as one value rather than many.
#[derive(Clone)]
struct WeatherList(Vec<WeatherKind>);

#[derive(Clone)]
struct ModeList(Vec<Mode>);

fn parse_weather_list(s: &str) -> Result<WeatherList, String> {
    parse_weathers(s).map(WeatherList).map_err(|e| e.to_string())
}

fn parse_mode_list(s: &str) -> Result<ModeList, String> {
    parse_modes(s).map(ModeList).map_err(|e| e.to_string())
}

impl From<CommonArgs> for RunOptions {
    fn from(a: CommonArgs) -> Self {
        RunOptions {
            config_path: a.config,
            out_dir: a.out,
            seed: a.seed,
            trials: a.trials,
            weathers: a.weather.map(|w| w.0),
            modes: a.modes.map(|m| m.0),
            gnuplot: a.gnuplot,
            workers: a.workers,
            dump_trials: a.dump_trials,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, args) = match cli.command {
        Command::PrpSweep(a) => (Subcommand::PrpSweep, a),
        Command::DorSweep(a) => (Subcommand::DorSweep, a),
        Command::RateSweep(a) => (Subcommand::RateSweep, a),
        Command::Validate(a) => (Subcommand::Validate, a),
    };
    let opts = RunOptions::from(args);

    let result = if cmd == Subcommand::Validate {
        cmd_validate(&opts).map(|text| {
            print!("{text}");
            println!("ok");
        })
    } else {
        run(cmd, &opts).map(|written| {
            for p in written {
                println!("wrote {}", p.display());
            }
        })
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
