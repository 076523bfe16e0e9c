//! Command-line front end for the coded gradient aggregation toolkit.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use gradcode::cli::{self, AnalyzeKind, CliError, Config, RunMode};

#[derive(Parser)]
#[command(
    name = "gradcode",
    version,
    about = "Coded gradient aggregation: plan schemes, simulate rounds, train, analyze"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Approx,
    Matrix,
}

impl From<ModeArg> for RunMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exact => RunMode::Exact,
            ModeArg::Approx => RunMode::Approx,
            ModeArg::Matrix => RunMode::Matrix,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AnalyzeArg {
    Lebesgue,
    Condition,
    Bounds,
}

impl From<AnalyzeArg> for AnalyzeKind {
    fn from(k: AnalyzeArg) -> Self {
        match k {
            AnalyzeArg::Lebesgue => AnalyzeKind::Lebesgue,
            AnalyzeArg::Condition => AnalyzeKind::Condition,
            AnalyzeArg::Bounds => AnalyzeKind::Bounds,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print cost, feasibility and fallback plans for a configuration.
    Plan {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Simulate one coded round and write result files.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value = "exact")]
        mode: ModeArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Run the coded training loop and write the loss trajectory.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Emit an analysis table (Lebesgue constants, conditioning, bounds).
    Analyze {
        #[arg(long, value_enum)]
        kind: AnalyzeArg,
        #[arg(long, value_delimiter = ',', default_value = "8,16,32,64")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        s1: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Construct (or rule out) a decoder-confusion witness.
    Witness {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Exhaustive encode/decode round-trip check.
    Selftest {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Plan { config, seed, json } => {
            let cfg = Config::load(&config)?;
            let report = cli::plan_report(&cfg, seed)?;
            Ok(cli::render_plan(&report, json))
        }
        Command::Run {
            config,
            mode,
            seed,
            out,
            json,
        } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| CliError::Config(format!("{}: {e}", config.display())))?;
            let cfg = Config::from_json(&text)?;
            let result = cli::cmd_run(&cfg, seed, mode.into(), &out, Some(&text))?;
            if json {
                Ok(result)
            } else {
                Ok(format!("run complete; results in {}", out.display()))
            }
        }
        Command::Train { config, seed, out, json } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| CliError::Config(format!("{}: {e}", config.display())))?;
            let cfg = Config::from_json(&text)?;
            let result = cli::cmd_train(&cfg, seed, &out, Some(&text))?;
            if json {
                Ok(result)
            } else {
                Ok(format!("training complete; results in {}", out.display()))
            }
        }
        Command::Analyze {
            kind,
            sizes,
            s1,
            seed,
            out,
            json,
        } => {
            let csv = cli::cmd_analyze(kind.into(), &sizes, s1, seed);
            let rendered = if json { cli::csv_to_json(&csv) } else { csv };
            if let Some(path) = out {
                cli::write_atomic(&path, &rendered)?;
                Ok(format!("analysis written to {}", path.display()))
            } else {
                Ok(rendered)
            }
        }
        Command::Witness { config, seed, json } => {
            let cfg = Config::load(&config)?;
            cli::cmd_witness(&cfg, seed, json)
        }
        Command::Selftest { config, seed, json } => {
            let cfg = match config {
                Some(path) => Some(Config::load(&path)?),
                None => None,
            };
            cli::cmd_selftest(cfg.as_ref(), seed, json)
        }
    }
}

fn main() {
    if let Ok(threads) = std::env::var("GRADCODE_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(output) => {
            if !output.is_empty() {
                println!("{output}");
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(err.exit_code());
        }
    }
}
