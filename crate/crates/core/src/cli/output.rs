//! Output encoding, atomic writes and the run manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use tempfile::NamedTempFile;

use super::CliError;

/// CSV schema version; bump on any change to column names or order.
pub const CSV_SCHEMA: u32 = 1;

/// 17 significant digits, enough to reproduce every `f64` bit for bit.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Empty field for a missing value.
pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn csv_bytes<I>(header: &[&str], rows: I) -> Result<Vec<u8>, CliError>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(CliError::output)?;
    for row in rows {
        w.write_record(&row).map_err(CliError::output)?;
    }
    w.into_inner().map_err(|e| CliError::output(e.into_error()))
}

pub fn json_bytes<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut out = serde_json::to_vec_pretty(value).map_err(CliError::output)?;
    out.push(b'\n');
    Ok(out)
}

/// Writes through a temporary file in the destination directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| CliError::output(format!("{}: {e}", dir.display())))?;
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| CliError::output(format!("{}: {e}", dir.display())))?;
    tmp.write_all(bytes).map_err(CliError::output)?;
    tmp.persist(path).map_err(|e| CliError::output(format!("{}: {}", path.display(), e.error)))?;
    Ok(())
}

/// `prefix` with `suffix` appended to the file name (`out/run` + `.csv`).
pub fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

#[derive(Debug, Clone, Serialize)]
pub struct InputFile {
    pub path: String,
    pub sha256: String,
}

/// Everything needed to rerun a command and get the same data files back.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub csv_schema: u32,
    pub command: String,
    pub inputs: Vec<InputFile>,
    pub options: Value,
    pub params: Value,
    pub created: String,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            csv_schema: CSV_SCHEMA,
            command: command.to_string(),
            inputs: Vec::new(),
            options: Value::Null,
            params: Value::Null,
            created: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }

    pub fn input(mut self, path: impl Into<String>, bytes: &[u8]) -> Self {
        let sha256 = Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect();
        self.inputs.push(InputFile { path: path.into(), sha256 });
        self
    }

    pub fn options(mut self, options: impl Serialize) -> Self {
        self.options = serde_json::to_value(options).unwrap_or(Value::Null);
        self
    }

    pub fn params(mut self, params: impl Serialize) -> Self {
        self.params = serde_json::to_value(params).unwrap_or(Value::Null);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(num(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
        assert_eq!(opt(None), "");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/out.txt");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"two");
        assert_eq!(fs::read_dir(path.parent().unwrap()).unwrap().count(), 1);
    }
}
