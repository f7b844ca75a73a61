//! Output directory resolution and file emission.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::failure::Failure;

/// Environment variable that overrides the configured output directory.
pub const OUTPUT_ENV: &str = "JESSEN_OUTPUT_DIR";
const DEFAULT_DIR: &str = "out";

/// Precedence: `--output-dir` flag, then `JESSEN_OUTPUT_DIR`, then the
/// config's `output_dir`, then `./out`.
pub fn resolve(flag: Option<&Path>, configured: Option<&Path>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Some(p) = std::env::var_os(OUTPUT_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(p);
    }
    configured
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_DIR))
}

pub fn write_text(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf, Failure> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| Failure::Io(format!("cannot serialize {name}: {e}")))?;
    text.push('\n');
    write_text(dir, name, &text)
}

#[derive(Serialize)]
struct Metadata<'a> {
    command: &'a str,
    version: &'a str,
    config: Option<String>,
    created_unix_secs: u64,
}

/// Run metadata kept apart from the deterministic report.
pub fn write_metadata(dir: &Path, command: &str, config: Option<&Path>) -> Result<PathBuf, Failure> {
    let created_unix_secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    write_json(
        dir,
        "metadata.json",
        &Metadata {
            command,
            version: env!("CARGO_PKG_VERSION"),
            config: config.map(|p| p.display().to_string()),
            created_unix_secs,
        },
    )
}
