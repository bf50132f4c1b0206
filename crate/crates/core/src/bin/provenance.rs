use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use provenance_core::conformance::{self, DisclosureReport, ReportFormat};
use provenance_core::format::{export_session, import_session, SessionFile};
use provenance_core::log::replay;
use provenance_core::service::{self, ServiceConfig, TransportChoice};
use provenance_core::store::SessionStore;

#[derive(Parser)]
#[command(
    name = "provenance",
    version,
    about = "Provenance tracking for AI-assisted writing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP session service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value = "sessions")]
        store: PathBuf,
        /// live, mock:FIXTURE or synthetic:SEED
        #[arg(long, default_value = "live")]
        transport: TransportChoice,
    },
    /// Render a disclosure report for a session file.
    Report {
        file: PathBuf,
        #[arg(long, default_value = "markdown")]
        format: String,
        /// Builtin policy name or policy file to include.
        #[arg(long)]
        policy: Option<String>,
    },
    /// Check a session file against a policy. Exits 1 when a rule fails.
    Check {
        file: PathBuf,
        #[arg(long)]
        policy: String,
    },
    /// Verify that a session file's log replays to its stored document.
    Replay { file: PathBuf },
    /// Print a stored session as a session file.
    Export {
        #[arg(long)]
        store: PathBuf,
        session_id: String,
    },
    /// Import a session file into a store and print the new session id.
    Import {
        #[arg(long)]
        store: PathBuf,
        file: PathBuf,
    },
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse().command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

type Result<T> = std::result::Result<T, Box<dyn std::error::Error>>;

fn load(file: &PathBuf) -> Result<provenance_core::SessionState> {
    let bytes = std::fs::read(file).map_err(|e| format!("{}: {e}", file.display()))?;
    Ok(import_session(&bytes)?)
}

fn run(command: Command) -> Result<ExitCode> {
    let mut stdout = std::io::stdout().lock();
    match command {
        Command::Serve {
            port,
            host,
            store,
            transport,
        } => {
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(async {
                let running = service::serve(ServiceConfig {
                    port,
                    host,
                    store_dir: store,
                    transport,
                })
                .await?;
                eprintln!("listening on {}", running.url());
                tokio::signal::ctrl_c().await?;
                running.shutdown().await?;
                Ok::<_, Box<dyn std::error::Error>>(())
            })?;
        }
        Command::Report {
            file,
            format,
            policy,
        } => {
            let format: ReportFormat = format.parse()?;
            let session = load(&file)?;
            let conformance = match policy {
                Some(p) => Some(conformance::check(
                    &session,
                    &conformance::resolve_policy(&p)?,
                )),
                None => None,
            };
            stdout.write_all(&DisclosureReport::build(&session, conformance).render(format))?;
        }
        Command::Check { file, policy } => {
            let session = load(&file)?;
            let report = conformance::check(&session, &conformance::resolve_policy(&policy)?);
            serde_json::to_writer_pretty(&mut stdout, &report)?;
            writeln!(stdout)?;
            if !report.passed() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Replay { file } => {
            let bytes = std::fs::read(&file)?;
            let parsed = SessionFile::parse(&bytes)?;
            let events = parsed.events.len();
            match parsed.clone().into_state("replay") {
                Ok(state) => {
                    writeln!(
                        stdout,
                        "ok: {events} events replay to {} characters in {} spans (revision {})",
                        state.document().len(),
                        state.document().spans().len(),
                        state.revision()
                    )?;
                }
                Err(e) => {
                    writeln!(stdout, "mismatch: {e}")?;
                    if let Ok(doc) = replay(&parsed.events, &parsed.prompts) {
                        writeln!(stdout, "replayed text: {:?}", doc.text())?;
                    }
                    return Ok(ExitCode::from(1));
                }
            }
        }
        Command::Export { store, session_id } => {
            let store = SessionStore::open(store)?;
            stdout.write_all(&export_session(&store.snapshot(&session_id)?))?;
        }
        Command::Import { store, file } => {
            let session = load(&file)?;
            let id = session.session_id().to_owned();
            SessionStore::open(store)?.insert(session)?;
            writeln!(stdout, "{id}")?;
        }
    }
    Ok(ExitCode::SUCCESS)
}
