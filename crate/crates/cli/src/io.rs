use crate::{Common, Format};
use cascade3_core::{Error, Result, SCHEMA_VERSION};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest<C> {
    pub schema_version: u32,
    pub tool: String,
    pub tool_version: String,
    pub subcommand: String,
    pub config: C,
    /// Data files written by the run, relative to the manifest.
    pub outputs: Vec<String>,
    pub summary: serde_json::Value,
}

fn parse<T: DeserializeOwned>(value: serde_json::Value, root: &str) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { root.to_string() } else { format!("{root}.{path}") };
        Error::config(path, e.into_inner().to_string())
    })
}

/// Reads `--config` if given. A manifest is accepted too, in which case
/// its `config` block is used (and its subcommand must match).
pub fn load_config<C: DeserializeOwned>(common: &Common, subcommand: &str) -> Result<Option<C>> {
    let Some(path) = &common.config else { return Ok(None) };
    let text = fs::read_to_string(path).map_err(|e| Error::config("--config", format!("{}: {e}", path.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::config("--config", format!("{}: {e}", path.display())))?;
    let is_manifest = value.get("subcommand").is_some() && value.get("config").is_some();
    if is_manifest {
        let found = value["subcommand"].as_str().unwrap_or_default();
        if found != subcommand {
            return Err(Error::config("subcommand", format!("manifest is for `{found}`, not `{subcommand}`")));
        }
        let v = value["schema_version"].as_u64();
        if v != Some(SCHEMA_VERSION as u64) {
            return Err(Error::config("schema_version", format!("manifest has {v:?}, expected {SCHEMA_VERSION}")));
        }
        return parse(value["config"].clone(), "config").map(Some);
    }
    parse(value, "config").map(Some)
}

pub fn check_schema(found: u32) -> Result<()> {
    if found != SCHEMA_VERSION {
        return Err(Error::config("config.schema_version", format!("found {found}, expected {SCHEMA_VERSION}")));
    }
    Ok(())
}

/// Column table. Non-finite cells are written empty in CSV and `null` in JSON.
#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::config("--out", format!("{}: {e}", path.display()))
}

pub struct Output {
    dir: PathBuf,
    format: Format,
    svg: bool,
    files: Vec<String>,
}

impl Output {
    pub fn create(common: &Common) -> Result<Self> {
        fs::create_dir_all(&common.out).map_err(|e| io_err(&common.out, e))?;
        Ok(Output { dir: common.out.clone(), format: common.format, svg: common.svg, files: Vec::new() })
    }

    pub fn wants_svg(&self) -> bool {
        self.svg
    }

    /// Writes `stem.csv` or `stem.json` depending on `--format`.
    pub fn table(&mut self, stem: &str, table: &Table) -> Result<()> {
        match self.format {
            Format::Csv => {
                let name = format!("{stem}.csv");
                let path = self.dir.join(&name);
                let mut w = csv::Writer::from_path(&path).map_err(|e| io_err(&path, e))?;
                w.write_record(&table.columns).map_err(|e| io_err(&path, e))?;
                for row in &table.rows {
                    let cells = row.iter().map(|v| if v.is_finite() { v.to_string() } else { String::new() });
                    w.write_record(cells).map_err(|e| io_err(&path, e))?;
                }
                w.flush().map_err(|e| io_err(&path, e))?;
                self.files.push(name);
            }
            Format::Json => self.json(stem, table)?,
        }
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, stem: &str, value: &T) -> Result<()> {
        let name = format!("{stem}.json");
        self.text(&name, &to_json(value)?)
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, body).map_err(|e| io_err(&path, e))?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn finish<C: Serialize>(self, subcommand: &str, config: &C, summary: serde_json::Value) -> Result<()> {
        let manifest = Manifest {
            schema_version: SCHEMA_VERSION,
            tool: "cascade3".into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            subcommand: subcommand.into(),
            config,
            outputs: self.files,
            summary,
        };
        let path = self.dir.join(MANIFEST);
        fs::write(&path, to_json(&manifest)?).map_err(|e| io_err(&path, e))
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Numerical(format!("serialization: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub fn to_value<T: Serialize>(value: &T) -> serde_json::Value {
    serde_json::to_value(value).unwrap_or(serde_json::Value::Null)
}
