use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::{CliError, CliResult};

pub const TIMESTAMP_KEY: &str = "timestamp";

pub fn unix_timestamp() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("cannot write {}: {e}", path.display()))
}

pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(root).map_err(|e| io_err(root, e))?;
        Ok(Self { root: root.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> CliResult<PathBuf> {
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(value).map_err(|e| io_err(&path, e))?;
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| io_err(&path, e))?;
        Ok(path)
    }

    pub fn text(&self, name: &str, body: &str) -> CliResult<PathBuf> {
        let path = self.path(name);
        std::fs::write(&path, body).map_err(|e| io_err(&path, e))?;
        Ok(path)
    }

    pub fn csv<R: Serialize>(&self, name: &str, rows: &[R]) -> CliResult<PathBuf> {
        let path = self.path(name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| io_err(&path, e))?;
        for r in rows {
            w.serialize(r).map_err(|e| io_err(&path, e))?;
        }
        w.flush().map_err(|e| io_err(&path, e))?;
        Ok(path)
    }
}

/// Report text with the timestamp line removed, for determinism checks.
pub fn without_timestamp(report: &str) -> String {
    let key = format!("\"{TIMESTAMP_KEY}\":");
    report
        .lines()
        .filter(|l| !l.trim_start().starts_with(&key))
        .collect::<Vec<_>>()
        .join("\n")
}
