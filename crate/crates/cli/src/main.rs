//! Command-line front end. Every subcommand is a client of the HTTP
//! service: either a remote one named with `--server`, or an ephemeral
//! in-process instance spun up for the duration of the command.
//!
//! Exit codes: 0 success, 1 completed with partial failures, 2 hard failure.

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use writing_path_client::types::*;
use writing_path_client::Client;

#[derive(Parser)]
#[command(
    name = "writing-path",
    version,
    about = "Outline-guided writing runs and evaluation"
)]
struct Cli {
    /// Service base URL; without it the command runs against an ephemeral
    /// in-process service.
    #[arg(long, global = true)]
    server: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP service in the foreground.
    Serve {
        /// Listen address.
        #[arg(long, default_value = "127.0.0.1:8787")]
        addr: String,
    },
    /// Validate a line-delimited JSON seed file.
    Ingest {
        #[arg(long)]
        seeds: String,
    },
    /// Execute an experiment from a run config file.
    Run {
        #[arg(long)]
        config: String,
        /// Restrict to these modes (repeatable): meta, init, aug.
        #[arg(long = "mode")]
        modes: Vec<String>,
        /// Directory with llm.jsonl / search.jsonl fixtures for offline runs.
        #[arg(long)]
        scripted: Option<String>,
        #[arg(long)]
        cache_dir: Option<String>,
    },
    /// Evaluate the outlines and documents of a completed run.
    Eval {
        #[arg(long)]
        run: String,
        /// Scripted judge fixtures (same layout as `run --scripted`).
        #[arg(long)]
        scripted: Option<String>,
    },
    /// Emit aggregate report tables for a run.
    Report {
        #[arg(long)]
        run: String,
        /// tsv or markdown.
        #[arg(long)]
        format: String,
    },
    /// Align a human-score CSV against a run and compute rank correlations.
    Align {
        #[arg(long)]
        run: String,
        #[arg(long)]
        human: String,
        /// Abort when more than this fraction of rows fails to match.
        #[arg(long)]
        max_unmatched: Option<f64>,
    },
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_max_level(tracing_subscriber::filter::LevelFilter::WARN)
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .expect("tokio runtime");
    match runtime.block_on(dispatch(cli)) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

async fn dispatch(cli: Cli) -> anyhow::Result<ExitCode> {
    if let Command::Serve { addr } = &cli.command {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        println!("serving on http://{}", listener.local_addr()?);
        writing_path_service::serve(listener).await?;
        return Ok(ExitCode::SUCCESS);
    }

    // ephemeral in-process service unless one was named
    let (client, local) = match &cli.server {
        Some(url) => (Client::new(url.clone()), None),
        None => {
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await?;
            let addr = listener.local_addr()?;
            let handle = tokio::spawn(writing_path_service::serve(listener));
            (Client::new(format!("http://{addr}")), Some(handle))
        }
    };

    let code = execute(&client, cli.command).await?;
    if let Some(handle) = local {
        handle.abort();
    }
    Ok(code)
}

async fn execute(client: &Client, command: Command) -> anyhow::Result<ExitCode> {
    match command {
        Command::Serve { .. } => unreachable!("handled in dispatch"),
        Command::Ingest { seeds } => {
            let response = client.ingest(&IngestRequest { seeds_path: seeds }).await?;
            println!("{} seeds ok", response.count);
            for (domain, count) in &response.domains {
                println!("  {domain}: {count}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Run {
            config,
            modes,
            scripted,
            cache_dir,
        } => {
            let response = client
                .run(&RunRequest {
                    config_path: config,
                    modes,
                    scripted_dir: scripted,
                    cache_dir,
                })
                .await?;
            println!(
                "run complete: {} traces, {} failures ({} llm calls, {} search calls)",
                response.traces,
                response.failures.len(),
                response.llm_calls,
                response.search_calls
            );
            println!("run dir: {}", response.run_dir);
            for failure in &response.failures {
                eprintln!(
                    "  failed: {} {} at {}: {}",
                    failure.seed_id, failure.mode, failure.stage, failure.message
                );
            }
            Ok(if response.failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Eval { run, scripted } => {
            let response = client
                .eval(&EvalRequest {
                    run_dir: run,
                    scripted_dir: scripted,
                })
                .await?;
            println!(
                "eval complete: {} outline reports, {} scorecards",
                response.outline_reports, response.scorecards
            );
            for note in &response.notes {
                eprintln!("  note: {note}");
            }
            Ok(if response.notes.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Report { run, format } => {
            let response = client
                .report(&ReportRequest {
                    run_dir: run,
                    format,
                })
                .await?;
            for file in &response.files {
                println!("{file}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Align {
            run,
            human,
            max_unmatched,
        } => {
            let response = client
                .align(&AlignRequest {
                    run_dir: run,
                    human_csv: human,
                    max_unmatched_ratio: max_unmatched,
                })
                .await?;
            println!(
                "aligned {} rows ({} unmatched)",
                response.aligned,
                response.unmatched.len()
            );
            for (aspect, tau) in &response.taus {
                println!("  tau[{aspect}] = {tau:+.4}");
            }
            for note in &response.skipped {
                println!("  skipped {note}");
            }
            for row in &response.unmatched {
                eprintln!("  unmatched {row}");
            }
            Ok(if response.unmatched.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}
