//! Atomic file output in CSV or JSON.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Writes `bytes` to `path` through a sibling temporary file and a rename,
/// so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    let mut file = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    file.write_all(bytes).and_then(|_| file.sync_all()).map_err(|e| Error::io(&tmp, e))?;
    drop(file);
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    w.into_inner().map_err(|e| Error::Csv(e.into_error().into()))
}

/// Writes `rows` to `<dir>/<stem>.<ext>` and returns the path.
pub fn write_table<T: Serialize>(dir: &Path, stem: &str, format: Format, rows: &[T]) -> Result<PathBuf> {
    let path = dir.join(format!("{stem}.{}", format.extension()));
    match format {
        Format::Csv => write_atomic(&path, &csv_bytes(rows)?)?,
        Format::Json => write_json(&path, rows)?,
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Row {
        a: u32,
        b: &'static str,
    }

    fn scratch(name: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("gibbscache-output-{name}-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        dir
    }

    #[test]
    fn tables_in_both_formats() {
        let dir = scratch("tables");
        let rows = [Row { a: 1, b: "x" }, Row { a: 2, b: "y" }];
        let csv = write_table(&dir, "t", Format::Csv, &rows).unwrap();
        assert_eq!(fs::read_to_string(csv).unwrap(), "a,b\n1,x\n2,y\n");
        let json = write_table(&dir, "t", Format::Json, &rows).unwrap();
        let back: serde_json::Value = serde_json::from_str(&fs::read_to_string(json).unwrap()).unwrap();
        assert_eq!(back[1]["b"], "y");
        let leftovers = fs::read_dir(&dir).unwrap().filter(|e| {
            e.as_ref().unwrap().file_name().to_string_lossy().contains(".tmp")
        });
        assert_eq!(leftovers.count(), 0);
        fs::remove_dir_all(dir).unwrap();
    }
}
