use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use collapsim::config::{parse_file, split_pair};
use collapsim::{run, CliError, Experiment, ExperimentConfig, Overrides, WORKERS_ENV};

#[derive(Parser)]
#[command(name = "collapsim", version, about = "Spontaneous-collapse simulation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment.
    #[command(after_help = format!(
        "Any other `--key value` is read as `--param key=value`. Worker threads: ${WORKERS_ENV}."
    ))]
    Run {
        experiment: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
    },
    /// List experiments, their parameters and tolerances.
    List,
}

const RUN_FLAGS: [&str; 5] = ["config", "seed", "trials", "out", "param"];

/// Rewrites `--key value` and `--key=value` for parameter keys into
/// `--param key=value`.
fn expand_param_flags(args: Vec<String>) -> Vec<String> {
    if args.get(1).map(String::as_str) != Some("run") {
        return args;
    }
    let mut out = Vec::with_capacity(args.len());
    let mut it = args.into_iter().peekable();
    while let Some(arg) = it.next() {
        let Some(flag) = arg.strip_prefix("--") else {
            out.push(arg);
            continue;
        };
        let (key, inline) = match flag.split_once('=') {
            Some((k, v)) => (k.to_string(), Some(v.to_string())),
            None => (flag.to_string(), None),
        };
        if key.is_empty() || RUN_FLAGS.contains(&key.as_str()) || key == "help" {
            out.push(arg);
            continue;
        }
        let value = match inline {
            Some(v) => v,
            None => match it.next() {
                Some(v) => v,
                None => {
                    out.push(arg);
                    continue;
                }
            },
        };
        out.push("--param".into());
        out.push(format!("{key}={value}"));
    }
    out
}

fn list() {
    for e in Experiment::ALL {
        let (what, trials) = e.trials();
        println!("{e}: {}", e.description());
        println!("  trials: {what} (default {trials})");
        let params: Vec<String> = e.schema().iter().map(|p| format!("{}={}", p.name, p.default)).collect();
        println!("  params: {}", params.join(" "));
        for t in e.tolerances() {
            println!("  tolerance: {t}");
        }
    }
}

fn run_command(
    experiment: &str,
    config: Option<PathBuf>,
    over: Overrides,
) -> Result<collapsim::RunSummary, CliError> {
    let experiment: Experiment = experiment.parse()?;
    let file = match config {
        Some(path) => {
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            parse_file(&text)?
        }
        None => Vec::new(),
    };
    let config = ExperimentConfig::build(experiment, &file, &over)?;
    let summary = run(&config)?;
    for m in &summary.metrics {
        let status = match m.pass {
            Some(true) => "pass",
            Some(false) => "FAIL",
            None => "info",
        };
        println!("{status:4} {} = {:.6e} {}", m.name, m.value, m.tolerance);
    }
    if let Some(e) = &summary.error {
        eprintln!("error: {e}");
    }
    println!("wrote {}", config.out.join("summary.json").display());
    Ok(summary)
}

fn main() -> ExitCode {
    let cli = Cli::parse_from(expand_param_flags(std::env::args().collect()));
    match cli.command {
        Command::List => {
            list();
            ExitCode::SUCCESS
        }
        Command::Run {
            experiment,
            config,
            seed,
            trials,
            out,
            params,
        } => {
            let over = params
                .iter()
                .map(|p| split_pair(p))
                .collect::<Result<Vec<_>, _>>()
                .map(|params| Overrides {
                    seed,
                    trials,
                    out,
                    params,
                });
            match over.and_then(|over| run_command(&experiment, config, over)) {
                Ok(s) if s.error.is_some() => ExitCode::from(3),
                Ok(s) if s.passed => ExitCode::SUCCESS,
                Ok(_) => ExitCode::from(1),
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
    }
}
