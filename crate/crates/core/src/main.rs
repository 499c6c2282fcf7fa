use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use curriculum_core::experiment::{self, ConfigFile};
use curriculum_core::Error;

#[derive(Parser)]
#[command(name = "curriculum", version, about = "Curriculum scheduler experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every seed of an experiment and write logs plus summary.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated seed list, replacing the config's.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long)]
        steps: Option<u64>,
    },
    /// Summarize the run logs in a directory.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Check a config without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

const EXIT_VALIDATION: u8 = 1;
const EXIT_RUNTIME: u8 = 2;

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if e.is_validation() {
        EXIT_VALIDATION
    } else {
        EXIT_RUNTIME
    })
}

fn emit(text: &str) -> ExitCode {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Ok(()) => ExitCode::SUCCESS,
        // downstream closed early, e.g. `| head`
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => fail(&e.into()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            out,
            seeds,
            steps,
        } => {
            let mut cfg = match ConfigFile::load(&config) {
                Ok(c) => c,
                Err(e) => return fail(&e),
            };
            if let Some(seeds) = seeds {
                cfg.run.seeds = seeds;
            }
            if let Some(steps) = steps {
                cfg.run.steps = steps;
            }
            let errs = cfg.diagnostics();
            if !errs.is_empty() {
                for e in &errs {
                    eprintln!("error: {e}");
                }
                return ExitCode::from(EXIT_VALIDATION);
            }
            let result = cfg.resolve().and_then(|exp| experiment::run_to_dir(&exp, &out));
            match result {
                Ok(s) => {
                    println!("wrote {} run logs and summary.json to {}", s.seeds.len(), out.display());
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            }
        }
        Command::Report { input, format } => match experiment::report(&input) {
            Ok(s) => {
                let text = match format {
                    Format::Csv => s.to_csv(),
                    Format::Json => match serde_json::to_string_pretty(&s) {
                        Ok(j) => j + "\n",
                        Err(e) => return fail(&e.into()),
                    },
                };
                emit(&text)
            }
            Err(e) => fail(&e),
        },
        Command::Validate { config } => match experiment::validate_path(&config) {
            Ok(d) => {
                println!("{}", d.render());
                if d.is_ok() {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(EXIT_VALIDATION)
                }
            }
            Err(e) => fail(&e),
        },
    }
}
