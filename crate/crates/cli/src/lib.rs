//! `acoa` operator commands.

use std::io::{self, BufRead, IsTerminal, Write};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use tracing::{info, Level};

use acoa_core::{seed_fixtures, Auth, Error, Repository};
use acoa_server::{router, serve, AppState, RouterOptions, DEFAULT_MAX_UPLOAD_BYTES};

#[derive(Debug, Parser)]
#[command(name = "acoa", version, about = "Document the chronological trajectories of artworks")]
pub struct Cli {
    /// Log verbosity: error, warn, info, debug or trace
    #[arg(long, global = true, default_value = "info", value_parser = parse_level)]
    pub log_level: Level,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct RepoArg {
    /// Repository directory
    #[arg(env = "ACOA_REPO")]
    pub path: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create an empty repository in an empty or absent directory
    Init(RepoArg),
    /// Install the two bundled case-study works and the About record
    Seed(RepoArg),
    /// Check every work, the About record and all media checksums
    Validate(RepoArg),
    /// Write every work, the About record and referenced media to one archive file
    Export {
        #[command(flatten)]
        repo: RepoArg,
        /// Archive file to write
        archive: PathBuf,
    },
    /// Load an archive; works whose slug already exists are skipped
    Import {
        #[command(flatten)]
        repo: RepoArg,
        /// Archive file to read
        archive: PathBuf,
        /// Replace existing works and About content instead of skipping them
        #[arg(long)]
        overwrite: bool,
    },
    /// Manage administrator accounts
    #[command(subcommand)]
    Admin(AdminCommand),
    /// Run the HTTP service until interrupted
    Serve(ServeArgs),
}

#[derive(Debug, Subcommand)]
pub enum AdminCommand {
    /// Add an administrator; the password is read from the terminal (hidden) or stdin
    AddUser {
        #[command(flatten)]
        repo: RepoArg,
        username: String,
    },
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub repo: RepoArg,
    /// Address to listen on, host:port
    #[arg(long, env = "ACOA_BIND", default_value = "127.0.0.1:8080")]
    pub bind: String,
    /// Admin session lifetime in hours
    #[arg(long, env = "ACOA_SESSION_TTL", default_value_t = 12)]
    pub session_ttl: i64,
    /// Allow cross-origin API calls from this UI origin
    #[arg(long)]
    pub cors_origin: Option<String>,
    /// Serve the built web UI from this directory
    #[arg(long)]
    pub ui_dir: Option<PathBuf>,
    /// Largest accepted request body in bytes
    #[arg(long, default_value_t = DEFAULT_MAX_UPLOAD_BYTES)]
    pub max_upload_bytes: usize,
}

/// Validated `serve` settings.
#[derive(Debug, Clone)]
pub struct ServeConfig {
    pub repo_path: PathBuf,
    pub bind_address: SocketAddr,
    pub session_ttl_hours: i64,
    pub cors_origin: Option<String>,
    pub ui_dir: Option<PathBuf>,
    pub max_upload_bytes: usize,
}

/// A failure reported as a single `code: message` line.
#[derive(Debug)]
pub struct CliError {
    pub code: String,
    pub message: String,
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        // keep it on one line whatever the message contains
        write!(f, "{}: {}", self.code, self.message.replace('\n', " "))
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError {
            code: e.code().to_owned(),
            message: e.to_string(),
        }
    }
}

impl CliError {
    fn new(code: &str, message: impl Into<String>) -> Self {
        CliError {
            code: code.to_owned(),
            message: message.into(),
        }
    }
}

fn parse_level(s: &str) -> Result<Level, String> {
    s.parse::<Level>().map_err(|_| format!("unknown log level {s:?}"))
}

impl ServeArgs {
    pub fn config(&self) -> Result<ServeConfig, CliError> {
        let bind_address = self
            .bind
            .parse()
            .map_err(|_| CliError::new("invalid_config", format!("cannot parse bind address {:?}", self.bind)))?;
        if self.session_ttl < 1 {
            return Err(CliError::new("invalid_config", "session ttl must be at least 1 hour"));
        }
        Ok(ServeConfig {
            repo_path: self.repo.path.clone(),
            bind_address,
            session_ttl_hours: self.session_ttl,
            cors_origin: self.cors_origin.clone(),
            ui_dir: self.ui_dir.clone(),
            max_upload_bytes: self.max_upload_bytes,
        })
    }
}

pub fn init_logging(level: Level) {
    let _ = tracing_subscriber::fmt()
        .with_writer(io::stderr)
        .with_max_level(level)
        .with_ansi(false)
        .try_init();
}

/// Reads the new admin's password: hidden prompt on a terminal, otherwise
/// the first line of stdin.
fn read_password() -> Result<String, CliError> {
    let io_err = |e: io::Error| CliError::new("io_failure", e.to_string());
    if io::stdin().is_terminal() {
        let first = rpassword::prompt_password("Password: ").map_err(io_err)?;
        let again = rpassword::prompt_password("Repeat password: ").map_err(io_err)?;
        if first != again {
            return Err(CliError::new("password_mismatch", "passwords do not match"));
        }
        Ok(first)
    } else {
        let mut line = String::new();
        io::stdin().lock().read_line(&mut line).map_err(io_err)?;
        Ok(line.trim_end_matches(['\r', '\n']).to_owned())
    }
}

/// Runs one command, writing normal output to `out`. Returns the exit code.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<u8, CliError> {
    let w = |out: &mut dyn Write, line: String| {
        writeln!(out, "{line}").map_err(|e| CliError::new("io_failure", e.to_string()))
    };
    match cli.command {
        Command::Init(RepoArg { path }) => {
            Repository::init(&path)?;
            w(out, format!("initialized {}", path.display()))?;
        }
        Command::Seed(RepoArg { path }) => {
            let repo = Repository::open(&path)?;
            for slug in seed_fixtures(&repo)? {
                w(out, slug)?;
            }
        }
        Command::Validate(RepoArg { path }) => {
            let repo = Repository::open(&path)?;
            let problems = repo.verify()?;
            for (subject, issue) in &problems {
                let at = if issue.path.is_empty() {
                    String::new()
                } else {
                    format!(" at {}", issue.path)
                };
                w(out, format!("{subject}: {}{at}: {}", issue.code, issue.message))?;
            }
            w(out, format!("{} works, {} issues", repo.list_works().len(), problems.len()))?;
            if !problems.is_empty() {
                return Ok(1);
            }
        }
        Command::Export { repo, archive } => {
            let repo = Repository::open(&repo.path)?;
            repo.export_archive(&archive)?;
            w(out, format!("exported {} works to {}", repo.list_works().len(), archive.display()))?;
        }
        Command::Import { repo, archive, overwrite } => {
            let repo = Repository::open(&repo.path)?;
            let report = repo.import_archive(&archive, overwrite)?;
            for slug in &report.imported {
                w(out, format!("imported {slug}"))?;
            }
            for slug in &report.skipped {
                w(out, format!("skipped {slug} (already present)"))?;
            }
            w(
                out,
                format!(
                    "{} imported, {} skipped, {} media added",
                    report.imported.len(),
                    report.skipped.len(),
                    report.media_added
                ),
            )?;
        }
        Command::Admin(AdminCommand::AddUser { repo, username }) => {
            let repo = Arc::new(Repository::open(&repo.path)?);
            let password = read_password()?;
            Auth::new(repo).add_admin(&username, &password)?;
            w(out, format!("added admin {username}"))?;
        }
        Command::Serve(args) => {
            let config = args.config()?;
            run_server(config)?;
        }
    }
    Ok(0)
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = term => {},
    }
    info!("shutdown requested, draining in-flight requests");
}

pub fn run_server(config: ServeConfig) -> Result<(), CliError> {
    let repo = Arc::new(Repository::open(&config.repo_path)?);
    let auth = Arc::new(Auth::new(repo).with_ttl(chrono::Duration::hours(config.session_ttl_hours)));
    let options = RouterOptions {
        cors_origin: config.cors_origin.clone(),
        ui_dir: config.ui_dir.clone(),
        max_upload_bytes: config.max_upload_bytes,
    };
    let app = router(AppState::new(auth), &options)
        .map_err(|e| CliError::new(&e.body.code, e.body.message))?;
    let io_err = |e: io::Error| CliError::new("io_failure", e.to_string());
    let runtime = tokio::runtime::Runtime::new().map_err(io_err)?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(config.bind_address)
            .await
            .map_err(io_err)?;
        info!(addr = %config.bind_address, repo = %config.repo_path.display(), "listening");
        serve(listener, app, shutdown_signal()).await.map_err(io_err)
    })
}
