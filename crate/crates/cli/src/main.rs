use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::info;
use wavekit::harness::{self, ExperimentConfig, RunOutput, Scale};
use wavekit::WaveError;

#[derive(Parser)]
#[command(
    name = "wavekit",
    version,
    about = "Full-field acoustic experiments against analytic oracles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    Desk,
    Paper,
}

impl From<ScaleArg> for Scale {
    fn from(s: ScaleArg) -> Self {
        match s {
            ScaleArg::Desk => Scale::Desk,
            ScaleArg::Paper => Scale::Paper,
        }
    }
}

#[derive(clap::Args)]
struct RunArgs {
    config: PathBuf,
    /// Output directory (default: `output_dir` from the config, else ./out/<experiment>)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    scale: Option<ScaleArg>,
    /// Worker threads for oracle evaluation and FFTs
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Full-field run plus oracle comparison
    Run(RunArgs),
    /// Check a config and print the resolved values
    Validate {
        config: PathBuf,
        #[arg(long, value_enum)]
        scale: Option<ScaleArg>,
    },
    /// Analytic traces only
    Oracle(RunArgs),
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<WaveError>() {
        Some(WaveError::NumericalFailure(_)) => 3,
        Some(WaveError::Io(_)) | None => 1,
        Some(_) => 2,
    }
}

fn out_dir(args: &RunArgs, cfg: &ExperimentConfig) -> PathBuf {
    args.out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| Path::new("out").join(cfg.experiment.name()))
}

fn print_summary(out: &RunOutput, dir: &Path) {
    println!(
        "{} ({}) -> {}",
        out.config.experiment.name(),
        out.config.scale.name(),
        dir.display()
    );
    for (k, v) in &out.summary {
        println!("  {k:<32} {v:.6}");
    }
}

fn execute(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Validate { config, scale } => {
            let cfg = ExperimentConfig::load(&config, scale.map(Into::into))?;
            let prep = harness::prepare(&cfg)?;
            let s = prep.grid.shape();
            print!("{}", cfg.to_text());
            println!(
                "# grid {}x{}x{}, {} steps, {} receivers",
                s[0],
                s[1],
                s[2],
                prep.n_t,
                prep.receivers.len()
            );
            Ok(())
        }
        Command::Run(args) | Command::Oracle(args) if args.threads == Some(0) => {
            Err(WaveError::Config("--threads must be at least 1".into()).into())
        }
        Command::Run(args) => {
            let cfg = ExperimentConfig::load(&args.config, args.scale.map(Into::into))?;
            configure_threads(args.threads)?;
            let dir = out_dir(&args, &cfg);
            info!("running {} into {}", cfg.experiment.name(), dir.display());
            let out = harness::run_experiment(&cfg)?;
            out.write(&dir)?;
            print_summary(&out, &dir);
            Ok(())
        }
        Command::Oracle(args) => {
            let cfg = ExperimentConfig::load(&args.config, args.scale.map(Into::into))?;
            configure_threads(args.threads)?;
            let dir = out_dir(&args, &cfg);
            let out = harness::run_oracle(&cfg)?;
            out.write(&dir)?;
            print_summary(&out, &dir);
            Ok(())
        }
    }
}

fn configure_threads(n: Option<usize>) -> anyhow::Result<()> {
    if let Some(n) = n {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
