//! Output plumbing: error-to-exit-code mapping, locale-independent number
//! formatting, and small file helpers.

use std::fmt;
use std::path::Path;

#[derive(Debug)]
pub enum CliError {
    Core(convlab::Error),
    Io(std::io::Error),
    Json(serde_json::Error),
    /// Verification checks failed (count).
    ChecksFailed(usize),
    BadManifest(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
            CliError::Json(e) => write!(f, "{e}"),
            CliError::ChecksFailed(n) => write!(f, "{n} verification check(s) failed"),
            CliError::BadManifest(m) => write!(f, "bad manifest: {m}"),
        }
    }
}

impl CliError {
    /// 2 validation, 3 numerical, 4 I/O.
    pub fn code(&self) -> u8 {
        match self {
            CliError::Core(convlab::Error::Io(_)) | CliError::Io(_) => 4,
            CliError::Core(convlab::Error::Quadrature { .. }) | CliError::ChecksFailed(_) => 3,
            CliError::Json(_) | CliError::BadManifest(_) => 2,
            CliError::Core(_) => 2,
        }
    }
}

impl From<convlab::Error> for CliError {
    fn from(e: convlab::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Json(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Six significant digits, scientific; the format of contour values.
pub fn sig6(v: f64) -> String {
    format!("{v:.5e}")
}

/// Full shortest-round-trip representation; deterministic and re-ingestable.
pub fn full(v: f64) -> String {
    format!("{v}")
}

/// Fixed four decimals for percent axes (grid values are step multiples).
pub fn pct4(v: f64) -> String {
    format!("{v:.4}")
}

pub fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, contents)?;
    Ok(())
}

/// Run a closure under a bounded thread pool when parallelism is compiled
/// in; the cap changes scheduling only, never results.
pub fn with_thread_cap<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    #[cfg(feature = "parallel")]
    {
        if threads == 0 {
            f()
        } else {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .expect("thread pool construction")
                .install(f)
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        f()
    }
}
