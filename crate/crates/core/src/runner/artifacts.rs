//! Output directory bookkeeping and the on-disk formats of recordings.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::RunError;
use crate::fhn::InputPair;
use crate::observe::{ActivityTrace, FrequencyMatrix, PotentialTrace};

pub const SUMMARY_FILE: &str = "summary.json";
pub const SCENARIO_FILE: &str = "scenario.json";
pub const TRACE_DIR: &str = "traces";
pub const ACTIVITY_DIR: &str = "activity";
pub const FREQUENCY_DIR: &str = "frequency";
pub const FRAME_DIR: &str = "frames";

/// One written file, path relative to the output directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Writes files under one root and remembers what was written.
#[derive(Debug)]
pub struct Artifacts {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl Artifacts {
    pub fn create(root: &Path) -> Result<Self, RunError> {
        fs::create_dir_all(root).map_err(|e| RunError::io(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, rel: impl AsRef<Path>, bytes: &[u8]) -> Result<(), RunError> {
        let path = self.root.join(rel.as_ref());
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| RunError::io(dir, e))?;
        }
        fs::write(&path, bytes).map_err(|e| RunError::io(&path, e))?;
        self.record(rel.as_ref().to_path_buf());
        Ok(())
    }

    /// Register a file some other component wrote under the root.
    pub fn record(&mut self, rel: PathBuf) {
        if !self.written.contains(&rel) {
            self.written.push(rel);
        }
    }

    /// Digest every recorded file, sorted by path.
    pub fn manifest(&self) -> Result<Vec<FileEntry>, RunError> {
        let mut entries = self
            .written
            .iter()
            .map(|rel| {
                let path = self.root.join(rel);
                let bytes = fs::read(&path).map_err(|e| RunError::io(&path, e))?;
                Ok(FileEntry {
                    path: slash_path(rel),
                    bytes: bytes.len() as u64,
                    sha256: hex(&Sha256::digest(&bytes)),
                })
            })
            .collect::<Result<Vec<_>, RunError>>()?;
        entries.sort_by(|a, b| a.path.cmp(&b.path));
        Ok(entries)
    }
}

fn slash_path(p: &Path) -> String {
    p.components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join("/")
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn trace_name(label: &str, inputs: InputPair) -> String {
    format!("trace_{label}_{inputs}.csv")
}

pub fn activity_name(inputs: InputPair) -> String {
    format!("activity_{inputs}.csv")
}

pub fn frequency_name(inputs: InputPair, ext: &str) -> String {
    format!("frequency_{inputs}.{ext}")
}

/// Two-column CSV with header `t,value`.
pub fn series_csv(samples: &[(u64, f64)]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t", "value"]).expect("in-memory write");
    for (t, v) in samples {
        w.write_record([t.to_string(), v.to_string()])
            .expect("in-memory write");
    }
    w.into_inner().expect("in-memory write")
}

pub fn read_series(path: &Path) -> Result<Vec<(u64, f64)>, RunError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let bad = || RunError::Config(format!("{}: malformed row {:?}", path.display(), rec));
        let t = rec.get(0).and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let v = rec.get(1).and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        out.push((t, v));
    }
    Ok(out)
}

/// Frequency matrix as `height` rows of `width` comma-separated values.
pub fn matrix_csv(m: &FrequencyMatrix) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in m.values().chunks(m.width().max(1)) {
        w.write_record(row.iter().map(|v| v.to_string()))
            .expect("in-memory write");
    }
    w.into_inner().expect("in-memory write")
}

pub fn read_matrix(path: &Path, inputs: InputPair) -> Result<FrequencyMatrix, RunError> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut values = Vec::new();
    let mut width = None;
    let mut height = 0;
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        if *width.get_or_insert(rec.len()) != rec.len() {
            return Err(RunError::Config(format!(
                "{}: ragged matrix",
                path.display()
            )));
        }
        for field in &rec {
            values.push(field.parse::<f64>().map_err(|_| {
                RunError::Config(format!("{}: bad value {field:?}", path.display()))
            })?);
        }
        height += 1;
    }
    let width = width.unwrap_or(0);
    Ok(FrequencyMatrix::from_values(
        inputs, width, height, values, true,
    ))
}

pub fn csv_error(path: &Path, e: csv::Error) -> RunError {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => RunError::io(path, io),
            _ => unreachable!("checked is_io_error"),
        }
    } else {
        RunError::Config(format!("{}: {e}", path.display()))
    }
}

/// Every `trace_{label}_{pair}.csv` in `dir`, in name order.
pub fn read_traces(dir: &Path) -> Result<Vec<PotentialTrace>, RunError> {
    let mut out = Vec::new();
    for (name, path) in sorted_entries(dir)? {
        let Some(stem) = name
            .strip_prefix("trace_")
            .and_then(|s| s.strip_suffix(".csv"))
        else {
            continue;
        };
        let Some((label, pair)) = stem.rsplit_once('_') else {
            continue;
        };
        let Ok(inputs) = pair.parse::<InputPair>() else {
            continue;
        };
        out.push(PotentialTrace {
            electrode: label.to_owned(),
            inputs,
            samples: read_series(&path)?,
        });
    }
    Ok(out)
}

pub fn read_activity(dir: &Path) -> Result<Vec<ActivityTrace>, RunError> {
    let mut out = Vec::new();
    for (name, path) in sorted_entries(dir)? {
        let Some(pair) = name
            .strip_prefix("activity_")
            .and_then(|s| s.strip_suffix(".csv"))
        else {
            continue;
        };
        if let Ok(inputs) = pair.parse::<InputPair>() {
            out.push(ActivityTrace {
                inputs,
                samples: read_series(&path)?,
            });
        }
    }
    Ok(out)
}

pub fn read_frequency(dir: &Path) -> Result<Vec<FrequencyMatrix>, RunError> {
    let mut out = Vec::new();
    for (name, path) in sorted_entries(dir)? {
        let Some(pair) = name
            .strip_prefix("frequency_")
            .and_then(|s| s.strip_suffix(".csv"))
        else {
            continue;
        };
        if let Ok(inputs) = pair.parse::<InputPair>() {
            out.push(read_matrix(&path, inputs)?);
        }
    }
    Ok(out)
}

fn sorted_entries(dir: &Path) -> Result<Vec<(String, PathBuf)>, RunError> {
    let rd = match fs::read_dir(dir) {
        Ok(rd) => rd,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(RunError::io(dir, e)),
    };
    let mut out = Vec::new();
    for entry in rd {
        let entry = entry.map_err(|e| RunError::io(dir, e))?;
        out.push((
            entry.file_name().to_string_lossy().into_owned(),
            entry.path(),
        ));
    }
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut a = Artifacts::create(dir.path()).unwrap();
        let samples = vec![(1, 0.1), (2, -3.5e-7), (3, 1.0 / 3.0)];
        a.write("traces/trace_E_1_01.csv", &series_csv(&samples))
            .unwrap();
        let traces = read_traces(&dir.path().join("traces")).unwrap();
        assert_eq!(traces.len(), 1);
        assert_eq!(traces[0].electrode, "E_1");
        assert_eq!(traces[0].inputs, InputPair::P01);
        assert_eq!(traces[0].samples, samples);
        let m = a.manifest().unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].path, "traces/trace_E_1_01.csv");
        assert_eq!(m[0].sha256.len(), 64);
    }

    #[test]
    fn matrix_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let m = FrequencyMatrix::from_values(
            InputPair::P10,
            3,
            2,
            vec![0.0, 0.5, 1.0, 0.25, 0.0, 0.125],
            true,
        );
        let path = dir.path().join(frequency_name(InputPair::P10, "csv"));
        fs::write(&path, matrix_csv(&m)).unwrap();
        assert_eq!(read_matrix(&path, InputPair::P10).unwrap(), m);
        assert_eq!(read_frequency(dir.path()).unwrap(), vec![m]);
    }

    #[test]
    fn missing_directory_reads_empty() {
        assert!(read_traces(Path::new("/nonexistent/actinet"))
            .unwrap()
            .is_empty());
    }
}
