//! `stadtbild` — run the document analysis pipeline, inspect its
//! prompts and emissions, and emit the static results bundle.
//!
//! Exit codes: 0 success, 1 operational failure (failed stages, bundle
//! violations), 2 configuration or input errors.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "stadtbild", version, about = "Political program analysis pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load every corpus document, segment and chunk it, and report counts.
    Validate {
        /// Corpus descriptor file (TOML).
        corpus: PathBuf,
        #[arg(long, default_value_t = 10)]
        chunk_size: usize,
    },
    /// Execute the five-stage pipeline over the configured corpus.
    Run {
        /// Run configuration file (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Use deterministic mock backends instead of HTTP services.
        #[arg(long)]
        mock: bool,
        /// Reuse cached stages from an existing manifest where possible.
        #[arg(long)]
        resume: bool,
        /// Turn descriptor contract violations into hard stage failures.
        #[arg(long)]
        strict: bool,
        /// Override the configured output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the per-stage duration/energy/emissions report of a manifest.
    Report {
        manifest: PathBuf,
        /// Underestimation correction multiplier (1.0 to 1.3).
        #[arg(long)]
        correction: Option<f64>,
    },
    /// Emit the static bilingual results bundle for a manifest.
    Site {
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Locale string tables (JSON with "de" and "en" maps).
        #[arg(long)]
        strings: Option<PathBuf>,
        /// Emit even when some documents never reached image generation.
        #[arg(long)]
        allow_incomplete: bool,
    },
    /// Prompt template tools.
    Prompts {
        #[command(subcommand)]
        action: PromptsAction,
    },
}

#[derive(Subcommand)]
enum PromptsAction {
    /// Print every pinned template with its version.
    Show,
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("warn")),
        )
        .with_writer(std::io::stderr)
        .init();

    let cli = Cli::parse();
    let code = match cli.command {
        Command::Validate { corpus, chunk_size } => commands::validate(&corpus, chunk_size),
        Command::Run {
            config,
            mock,
            resume,
            strict,
            out,
        } => commands::run(&config, mock, resume, strict, out),
        Command::Report {
            manifest,
            correction,
        } => commands::report(&manifest, correction),
        Command::Site {
            manifest,
            out,
            strings,
            allow_incomplete,
        } => commands::site(&manifest, &out, strings, allow_incomplete),
        Command::Prompts {
            action: PromptsAction::Show,
        } => commands::prompts_show(),
    };
    ExitCode::from(code)
}
