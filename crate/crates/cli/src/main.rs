use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod output;
mod settings;

#[derive(Parser)]
#[command(
    name = "neotrack",
    version,
    about = "Track resuscitation equipment and count providers from per-frame detections"
)]
struct Cli {
    /// Worker threads; 0 uses all cores, 1 runs serially
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    /// More log output (repeatable)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

/// Pipeline parameters: defaults, then the config file, then `--set`.
#[derive(Args, Debug, Clone)]
pub struct PipelineArgs {
    /// `key = value` config file
    #[arg(long, env = "NEOTRACK_CONFIG")]
    config: Option<PathBuf>,

    /// Override one config key, e.g. `--set t_peak=150`
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Locate and track BMR, SP and HRS; writes per-class track and stage CSVs
    Track(commands::track::TrackArgs),
    /// Estimate the number of providers from hand detections
    Hcp(commands::track::HcpArgs),
    /// Score track and provider timelines against reference annotations
    Eval(commands::eval::EvalArgs),
    /// Generate synthetic training scenes from blue-screen object frames
    Synth(commands::synth::SynthArgs),
    /// Generate detection streams and ground truth from scenario files
    Simulate(commands::simulate::SimulateArgs),
    /// Plot the post-processing stages of one tracked class as SVG
    Plot(commands::track::PlotArgs),
}

/// Bad invocation detected after argument parsing.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// 2 for usage and I/O problems, 1 for everything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<io::Error>() || cause.is::<UsageError>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<neotrack_core::Error>() {
            return match e {
                neotrack_core::Error::Io(_) | neotrack_core::Error::Image(_) => 2,
                _ => 1,
            };
        }
    }
    1
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build()?;
    let parallel = cli.jobs != 1;
    pool.install(|| match cli.command {
        Command::Track(a) => commands::track::run_track(a),
        Command::Hcp(a) => commands::track::run_hcp(a),
        Command::Eval(a) => commands::eval::run_eval(a),
        Command::Synth(a) => commands::synth::run_synth(a, parallel),
        Command::Simulate(a) => commands::simulate::run_simulate(a),
        Command::Plot(a) => commands::track::run_plot(a),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
