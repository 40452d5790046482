use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use domlab::config::ExperimentConfig;
use domlab::runner::{catalog, catalog_entry, run_to_dir, validate, EXIT_ERROR};
use domlab::{Error, Result};

#[derive(Parser)]
#[command(name = "domlab", version, about = "Stochastic domination and weak concentration laboratory")]
struct Cli {
    /// Worker threads for Monte Carlo and enumeration (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a config file or a built-in experiment name.
    Run {
        config: String,
        /// Output directory (default: runs/<name>).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List built-in experiments.
    ListExperiments {
        /// Also write each default config as <name>.toml into this directory.
        #[arg(long)]
        write: Option<PathBuf>,
    },
    /// Parse and check a config without running it.
    Validate { config: String },
}

/// Config text from a file, or from the catalog when no such file exists.
fn load(arg: &str) -> Result<(String, ExperimentConfig)> {
    let path = Path::new(arg);
    let text = if path.exists() {
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{arg}: {e}")))?
    } else if let Some(entry) = catalog_entry(arg) {
        entry.config.to_string()
    } else {
        return Err(Error::Io(format!("{arg}: no such file or built-in experiment")));
    };
    let cfg = ExperimentConfig::parse(&text).map_err(|e| match e {
        Error::Config(m) => Error::Config(format!("{arg}: {m}")),
        other => other,
    })?;
    Ok((text, cfg))
}

fn run(cli: Cli) -> Result<i32> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Parameter("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Io(e.to_string()))?;
    }
    match cli.command {
        Command::Run { config, out } => {
            let (text, cfg) = load(&config)?;
            let dir = out.unwrap_or_else(|| PathBuf::from("runs").join(&cfg.name));
            let summary = run_to_dir(&cfg, &text, &dir)?;
            let t = summary.output.report.tally;
            println!(
                "{}: {} holds, {} inconclusive, {} violated{} -> {}",
                cfg.name,
                t.holds,
                t.inconclusive,
                t.violated,
                if summary.output.report.expected_violation { " (expected-violation: true)" } else { "" },
                dir.display()
            );
            Ok(summary.exit_code)
        }
        Command::ListExperiments { write } => {
            if let Some(dir) = &write {
                std::fs::create_dir_all(dir)?;
            }
            for e in catalog() {
                println!("{:<24} {:<17} {}: {}", e.name, e.kind.name(), e.anchor, e.description);
                if let Some(dir) = &write {
                    std::fs::write(dir.join(format!("{}.toml", e.name)), e.config)?;
                }
            }
            Ok(0)
        }
        Command::Validate { config } => {
            let (_, cfg) = load(&config)?;
            validate(&cfg)?;
            println!("{}: ok ({})", config, cfg.kind.name());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
