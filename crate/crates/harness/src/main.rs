use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use specden::analysis::fit_decay_rate;
use specden::config::{Algorithm, ConfigFile, Method, Window};
use specden::experiment::{run_to_files, worst_exceedance};
use specden::io::load_csv;
use specden::HarnessError;

#[derive(Parser)]
#[command(name = "specden", version, about = "Spectral density estimation experiments on finite Markov chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write `<out>` and `<out>.meta`.
    Run(RunArgs),
    /// Fit the decay slope of the median error in an existing CSV.
    Fit {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long, default_value_t = 0.25)]
        freq: f64,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    method: Option<Method>,
    #[arg(long, value_enum)]
    algorithm: Option<Algorithm>,
    #[arg(long = "M")]
    segment_len: Option<usize>,
    #[arg(long = "K")]
    hop: Option<usize>,
    #[arg(long, value_enum)]
    window: Option<Window>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    nu: Option<f64>,
    /// Comma-separated frequencies in [-0.5, 0.5].
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    freqs: Option<Vec<f64>>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn overrides(self) -> ConfigFile {
        ConfigFile {
            method: self.method,
            algorithm: self.algorithm,
            segment_len: self.segment_len,
            hop: self.hop,
            window: self.window,
            samples: self.samples,
            trials: self.trials,
            seed: self.seed,
            q: self.q,
            nu: self.nu,
            freqs: self.freqs,
            out: self.out,
            ..Default::default()
        }
    }
}

fn run(args: RunArgs) -> Result<(), HarnessError> {
    let base = match &args.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let config = base.merge(args.overrides()).resolve()?;
    let exp = run_to_files(&config)?;
    let meta = &exp.metadata;
    eprintln!(
        "{} records, {} trials, k up to {} ({} samples), r = {}",
        exp.records.len(),
        config.trials,
        meta.segments,
        meta.samples_used,
        meta.rate.r
    );
    eprintln!(
        "worst fraction above the high-probability threshold (k >= 2): {:.3}",
        worst_exceedance(&exp.records, 2)
    );
    eprintln!("wrote {} and {}", config.out.display(), config.meta_path().display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Fit { csv, freq } => load_csv(&csv)
            .and_then(|records| fit_decay_rate(&records, freq))
            .map(|slope| println!("{slope}")),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
