use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::config::{Format, RunConfig};
use crate::error::CliError;

pub const MANIFEST_SCHEMA: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

/// Everything needed to reproduce a run. No timestamps or host data, so
/// identical configurations give byte-identical manifests.
#[derive(Debug, Serialize, serde::Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    pub format: Format,
    pub config: RunConfig,
    pub results: Value,
    pub files: Vec<String>,
}

pub struct Sink {
    dir: Option<PathBuf>,
    format: Format,
    files: Vec<String>,
}

impl Sink {
    pub fn new(dir: Option<PathBuf>, format: Format) -> Result<Self, CliError> {
        if let Some(d) = &dir {
            fs::create_dir_all(d)?;
        }
        Ok(Self { dir, format, files: Vec::new() })
    }

    /// Writes `rows` as `<stem>.csv` (header from the field names) or `<stem>.json`.
    pub fn table<T: Serialize>(&mut self, stem: &str, rows: &[T]) -> Result<(), CliError> {
        let Some(dir) = &self.dir else { return Ok(()) };
        let name = match self.format {
            Format::Csv => {
                let name = format!("{stem}.csv");
                let mut w = csv::Writer::from_path(dir.join(&name))?;
                for r in rows {
                    w.serialize(r)?;
                }
                w.flush()?;
                name
            }
            Format::Json => {
                let name = format!("{stem}.json");
                fs::write(dir.join(&name), serde_json::to_string_pretty(rows)? + "\n")?;
                name
            }
        };
        self.files.push(name);
        Ok(())
    }

    /// Writes a JSON document regardless of the table format.
    pub fn document(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        let Some(dir) = &self.dir else { return Ok(()) };
        fs::write(dir.join(name), text)?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn finish(self, config: &RunConfig, results: Value) -> Result<Option<PathBuf>, CliError> {
        let Some(dir) = self.dir else { return Ok(None) };
        let manifest = Manifest {
            schema_version: MANIFEST_SCHEMA,
            tool: "elastica".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            format: self.format,
            config: config.clone(),
            results,
            files: self.files,
        };
        let path = dir.join(MANIFEST_FILE);
        fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
        Ok(Some(path))
    }
}

pub fn read_manifest(path: &Path) -> Result<Manifest, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let m: Manifest =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("invalid manifest {}: {e}", path.display())))?;
    if m.schema_version != MANIFEST_SCHEMA {
        return Err(CliError::Config(format!(
            "manifest schema {} is not supported (expected {MANIFEST_SCHEMA})",
            m.schema_version
        )));
    }
    Ok(m)
}
