use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::CliError;

/// Version of the report and file layouts written by this binary.
pub const FORMAT_VERSION: &str = "1.0";

/// Top-level keys carried by every JSON report.
#[derive(Debug, Clone)]
pub struct Meta {
    pub command: &'static str,
    pub seed: u64,
    pub oracle_cap: usize,
    pub graph: Value,
}

impl Meta {
    /// Merges `body` (an object) under the metadata keys.
    pub fn wrap(&self, body: Value) -> Value {
        let mut map = Map::new();
        map.insert("spec_version".into(), FORMAT_VERSION.into());
        map.insert("command".into(), self.command.into());
        map.insert("seed".into(), self.seed.into());
        map.insert("oracle_cap".into(), self.oracle_cap.into());
        map.insert("graph".into(), self.graph.clone());
        match body {
            Value::Object(fields) => map.extend(fields),
            other => {
                map.insert("result".into(), other);
            }
        }
        Value::Object(map)
    }
}

/// Fails with a usage error when the file's directory does not exist.
pub fn check_output(path: &Path, flag: &str) -> Result<(), CliError> {
    let dir = parent_dir(path);
    if dir.is_dir() {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "{flag}: directory '{}' does not exist",
            dir.display()
        )))
    }
}

pub fn check_dir(path: &Path, flag: &str) -> Result<(), CliError> {
    if path.is_dir() {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "{flag}: directory '{}' does not exist",
            path.display()
        )))
    }
}

pub fn check_input(path: &Path, flag: &str) -> Result<(), CliError> {
    if path.exists() && !path.is_dir() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{flag}: file '{}' not found", path.display())))
    }
}

fn parent_dir(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

/// Writes through a temporary file in the target directory, then renames it
/// over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Domain(format!("writing '{}': {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(parent_dir(path)).map_err(io)?;
    tmp.write_all(contents).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Domain(format!("serializing report: {e}")))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}
