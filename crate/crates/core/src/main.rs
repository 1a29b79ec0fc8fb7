use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use feplab::harness::{cmd_report, Experiment, ExperimentConfig, Source};
use feplab::Error;

#[derive(Parser)]
#[command(
    name = "feplab",
    version,
    about = "Frame error probability lab: link simulation, EESM and neural predictors"
)]
struct Cli {
    /// Experiment configuration (TOML). Built-in desk defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Top-level seed; stage seeds not pinned in the config derive from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Event source for datasets and reference FEPs.
    #[arg(long, global = true, value_parser = ["link", "oracle"])]
    source: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the training dataset and one test dataset per sweep SNR.
    Generate,
    /// Build the flat-channel reference curve of every configuration.
    Curves,
    /// Calibrate one EESM β per configuration on the training dataset.
    Calibrate,
    /// Train the neural predictor on the training dataset.
    Train,
    /// Score both predictors on the test datasets.
    Evaluate,
    /// Pretty-print the result tables of the output directory.
    Report,
    /// Run generate, curves, calibrate, train and evaluate in order.
    Run,
    /// Print the effective configuration.
    ShowConfig,
}

fn load_config(cli: &Cli) -> feplab::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if cfg.out_dir.as_os_str().is_empty() {
        cfg.out_dir = PathBuf::from("out");
    }
    if let Some(seed) = cli.seed {
        cfg.seeds.root = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    if let Some(src) = &cli.source {
        cfg.source = Some(src.parse::<Source>()?);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> feplab::Result<()> {
    let cfg = load_config(cli)?;
    if let Command::Report = cli.command {
        print!("{}", cmd_report(&cfg.out_dir)?);
        return Ok(());
    }
    if let Command::ShowConfig = cli.command {
        print!("{}", cfg.to_toml());
        return Ok(());
    }
    let exp = Experiment::new(cfg)?;
    let out = exp.layout.root().display().to_string();
    match cli.command {
        Command::Generate => {
            exp.cmd_generate()?;
            eprintln!("datasets written to {out}");
        }
        Command::Curves => {
            let curves = exp.cmd_curves()?;
            eprintln!("{} curves written to {out}", curves.len());
        }
        Command::Calibrate => {
            let pred = exp.cmd_calibrate()?;
            for (k, b) in pred.betas().iter().enumerate() {
                println!("k={} beta={}", k + 1, feplab::textfmt::fmt_sig(*b, 6));
            }
        }
        Command::Train => {
            let (_, log) = exp.cmd_train()?;
            println!(
                "best epoch {} of {}, validation CE {}",
                log.best_epoch,
                log.epochs.len(),
                feplab::textfmt::fmt_sig(log.best_validation_ce, 6)
            );
        }
        Command::Evaluate | Command::Run => {
            if let Command::Run = cli.command {
                exp.cmd_run()?;
            } else {
                exp.cmd_evaluate()?;
            }
            print!("{}", cmd_report(exp.layout.root())?);
        }
        Command::Report | Command::ShowConfig => unreachable!(),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    e.exit_code() as u8
}
