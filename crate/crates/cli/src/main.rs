use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use peano_tutor::eval::{verdict_log_jsonl, Mode};
use peano_tutor_cli::commands;
use peano_tutor_cli::config::Config;
use peano_tutor_cli::http;
use peano_tutor_cli::service::Service;
use peano_tutor_cli::workspace::Workspace;

#[derive(Parser)]
#[command(
    name = "peano-tutor",
    version,
    about = "Step-wise tutor for natural-language Peano arithmetic proofs"
)]
struct Cli {
    /// TOML configuration file; PEANO_TUTOR_* variables override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Step,
    Whole,
}

#[derive(Clone, Copy, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Subcommand)]
enum Command {
    /// Score autoformalization on the configured corpus.
    EvalAutoform {
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long = "staff-solution", value_enum, default_value = "on")]
        staff_solution: OnOff,
        /// Write one JSON line per verdict here.
        #[arg(long)]
        log: Option<PathBuf>,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Write an incorrect proof set by deleting one late step from each persona proof.
    GenIncorrect {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "incorrect")]
        out: PathBuf,
    },
    /// Check every prefix of each proof in an annotated Lean file.
    Check {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Tutor one theorem in the terminal.
    Tutor { theorem: String },
    /// Serve the session API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
    },
}

fn load_config(path: Option<&PathBuf>) -> Result<Config> {
    let mut config = match path {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    config.apply_env(|k| std::env::var(k).ok())?;
    Ok(config)
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let config = load_config(cli.config.as_ref())?;
    let journal = config.journal.clone();
    let ws = Workspace::load(config).context("loading workspace")?;

    match cli.command {
        Command::EvalAutoform {
            mode,
            staff_solution,
            log,
            json,
        } => {
            let mode = match mode {
                ModeArg::Step => Mode::Step,
                ModeArg::Whole => Mode::Whole,
            };
            let (report, records) =
                commands::eval_autoform(&ws, mode, matches!(staff_solution, OnOff::On))?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                print!("{}", report.render());
            }
            if let Some(path) = log {
                std::fs::write(&path, verdict_log_jsonl(&records))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
        }
        Command::GenIncorrect { seed, out } => {
            let s = commands::gen_incorrect(&ws, seed, &out)?;
            for (decl, k) in &s.generated {
                println!("{decl}: removed step {k}");
            }
            for r in &s.skipped {
                eprintln!("skipped {}: {}", r.decl, r.reason);
            }
            println!("manifest: {}", s.manifest.display());
        }
        Command::Check { file, json } => {
            let text = std::fs::read_to_string(&file)
                .with_context(|| format!("reading {}", file.display()))?;
            let mut checker = ws.checker()?;
            let rows = commands::check_file(&text, &mut *checker)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&rows)?);
            } else {
                print!("{}", commands::render_check_table(&rows));
            }
        }
        Command::Tutor { theorem } => {
            if ws.theorem(&theorem).is_none() {
                let names: Vec<String> = ws.corpus.theorems().into_iter().map(|t| t.name).collect();
                bail!(
                    "unknown theorem {theorem}; choose one of {}",
                    names.join(", ")
                );
            }
            let svc = Service::in_memory(Arc::new(ws));
            let stdin = std::io::stdin();
            commands::tutor_loop(&svc, &theorem, stdin.lock(), std::io::stdout())?;
        }
        Command::Serve { port } => {
            let svc = Arc::new(Service::open(Arc::new(ws), &journal)?);
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(http::serve(svc, port))?;
        }
    }
    Ok(())
}
