//! `lipkit` command-line front end.
//!
//! Exit codes: 0 on success, 2 when an input or parameter violates an
//! invariant, 1 when a file cannot be read or written.

mod commands;
mod config;

use std::ffi::OsString;
use std::fmt;
use std::path::Path;

use clap::Parser;
use lipkit::LipError;

pub use config::RunConfig;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    Validation(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "validation error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<LipError> for CliError {
    fn from(e: LipError) -> Self {
        CliError::Validation(e.to_string())
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

pub(crate) fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub(crate) fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
    }
}

/// Thread cap from `LIPKIT_THREADS`, if set.
fn thread_cap() -> Result<Option<usize>, CliError> {
    match std::env::var("LIPKIT_THREADS") {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(invalid(format!("LIPKIT_THREADS must be a positive integer, got {s:?}"))),
        },
    }
}

/// Execute one configured command.
pub fn run(config: &RunConfig) -> Result<(), CliError> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap()? {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Io(e.to_string()))?;
    pool.install(|| commands::dispatch(config))
}

/// Parse arguments, merge the config file and run. Returns the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let flags = match RunConfig::try_parse_from(args) {
        Ok(f) => f,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let config = match &flags.config {
        None => Ok(flags.clone()),
        Some(path) => read_file(path).and_then(|text| {
            serde_json::from_str::<RunConfig>(&text)
                .map(|file| flags.clone().over(file))
                .map_err(|e| invalid(format!("config {}: {e}", path.display())))
        }),
    };
    match config.and_then(|c| run(&c)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("lipkit: {e}");
            e.exit_code()
        }
    }
}
