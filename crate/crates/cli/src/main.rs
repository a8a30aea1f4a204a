//! `moistkit` command-line driver.
//!
//! Exit codes: 0 success, 2 usage or argument error, 3 I/O error, 4 numeric
//! failure.

mod commands;
mod tables;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "moistkit", version, about = "Texture-feature moisture classification with domain adaptation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic source/target image scenario.
    Synth {
        #[arg(long)]
        out: PathBuf,
        /// none, mild or strong
        #[arg(long, default_value = "strong")]
        shift: String,
        #[arg(long, default_value_t = 50)]
        per_class: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Extract one feature family from the images listed in a labels file.
    Extract {
        #[arg(long)]
        images: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        /// haralick, fos, fps, glrlm, lbp or combined
        #[arg(long)]
        family: String,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (0 = one per core)
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Stratified k-fold evaluation of a baseline classifier.
    Baseline {
        #[arg(long)]
        features: PathBuf,
        /// knn, logreg, gnb, mlp or voting
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 4)]
        folds: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        report: PathBuf,
    },
    /// Train the adversarial adaptation model on a labeled source and an
    /// unlabeled target.
    Adapt {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long, default_value_t = 30)]
        epochs: usize,
        #[arg(long, default_value_t = 2)]
        batch: usize,
        #[arg(long, default_value_t = 0.5)]
        lambda: f64,
        #[arg(long, default_value_t = 15)]
        warmup: usize,
        #[arg(long, default_value_t = 3)]
        clusters: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        model_out: PathBuf,
        #[arg(long)]
        report: PathBuf,
    },
    /// Score a trained model on labeled features.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        report: PathBuf,
    },
    /// Write class probabilities for every row of a feature file.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> moistkit::Result<()> {
    match cli.command {
        Command::Synth { out, shift, per_class, seed } => commands::synth(&out, &shift, per_class, seed),
        Command::Extract { images, labels, family, out, jobs } => {
            commands::extract(&images, &labels, &family, &out, jobs)
        }
        Command::Baseline { features, model, folds, seed, report } => {
            commands::baseline(&features, &model, folds, seed, &report)
        }
        Command::Adapt {
            source,
            target,
            epochs,
            batch,
            lambda,
            warmup,
            clusters,
            seed,
            model_out,
            report,
        } => {
            let cfg = moistkit::TrainConfig {
                epochs,
                batch_size: batch,
                lambda,
                warmup_epochs: warmup,
                clusters,
                seed,
                ..moistkit::TrainConfig::default()
            };
            commands::adapt(&source, &target, &cfg, &model_out, &report)
        }
        Command::Eval { model, features, report } => commands::eval(&model, &features, &report),
        Command::Predict { model, features, out } => commands::predict(&model, &features, &out),
    }
}

fn exit_code(err: &moistkit::Error) -> u8 {
    use moistkit::Error;
    match err {
        Error::Argument(_) | Error::Json(_) => 2,
        Error::Io { .. } | Error::Format { .. } => 3,
        Error::Numeric(_) => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
