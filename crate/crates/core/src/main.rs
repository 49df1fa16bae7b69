use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use tsdce::bench::{self, BoundKind};
use tsdce::Error;

#[derive(Parser)]
#[command(name = "tsdce", version, about = "Spatial-domain mmWave channel estimation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full Monte Carlo sweep over the configured SNRs and methods.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// One realization with intermediate matrices written to a directory.
    Single {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        snr_db: f64,
        #[arg(long)]
        trial: usize,
        #[arg(long)]
        dump: PathBuf,
    },
    /// Analytic or Monte Carlo bound curves over the configured SNRs.
    Bound {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Lemma3,
    Lemma4,
    Crlb,
}

impl From<Kind> for BoundKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Lemma3 => BoundKind::Lemma3,
            Kind::Lemma4 => BoundKind::Lemma4,
            Kind::Crlb => BoundKind::Crlb,
        }
    }
}

fn threads_from_env() -> Result<Option<usize>, Error> {
    match std::env::var("TSDCE_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::InvalidConfiguration(format!(
                "TSDCE_THREADS must be a positive integer, got `{v}`"
            ))),
        },
    }
}

fn execute(cli: Cli) -> Result<(), Error> {
    let threads = threads_from_env()?;
    match cli.command {
        Command::Run { config, out } => {
            let cfg = bench::load_config(&config)?;
            let records = bench::run_experiment_with_threads(&cfg, threads)?;
            bench::emit_csv(&records, &out)?;
            log::info!("wrote {} records to {}", records.len(), out.display());
        }
        Command::Single {
            config,
            snr_db,
            trial,
            dump,
        } => {
            let cfg = bench::load_config(&config)?;
            let run = bench::dump_single(&cfg, snr_db, trial, &dump)?;
            println!(
                "trial {trial} at {snr_db} dB: nmse {} dB, {} paths estimated, dump in {}",
                bench::format_g(bench::ratio_to_db(run.nmse_ratio)),
                run.estimates.len(),
                dump.display()
            );
        }
        Command::Bound { config, kind, out } => {
            let cfg = bench::load_config(&config)?;
            let records = bench::bound_curve(&cfg, kind.into(), threads)?;
            bench::emit_csv(&records, &out)?;
            if matches!(kind, Kind::Crlb) {
                println!("crlb: residual after rank reduction modelled as white complex Gaussian");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config { .. } | Error::InvalidConfiguration(_) => ExitCode::from(2),
                Error::FailureRate { .. } => ExitCode::from(3),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
