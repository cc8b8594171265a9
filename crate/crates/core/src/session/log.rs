//! JSON Lines session logs: one event per line, UTF-8, integer-ms times.

use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::event::SessionEvent;

#[derive(Debug, Error)]
pub enum LogError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },
}

pub fn to_jsonl(events: &[SessionEvent]) -> String {
    let mut out = String::new();
    for ev in events {
        out.push_str(&serde_json::to_string(ev).expect("events serialize"));
        out.push('\n');
    }
    out
}

/// Parses log text; `origin` names the source in error messages. Blank lines
/// are skipped, line numbers are 1-based.
pub fn parse_jsonl(text: &str, origin: &str) -> Result<Vec<SessionEvent>, LogError> {
    read_events(text.as_bytes(), origin)
}

fn read_events<R: BufRead>(reader: R, origin: &str) -> Result<Vec<SessionEvent>, LogError> {
    let mut events = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| LogError::Io {
            path: origin.to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let ev = serde_json::from_str(&line).map_err(|e| LogError::Parse {
            path: origin.to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        events.push(ev);
    }
    Ok(events)
}

pub fn read_log(path: &Path) -> Result<Vec<SessionEvent>, LogError> {
    let name = path.display().to_string();
    let file = File::open(path).map_err(|source| LogError::Io {
        path: name.clone(),
        source,
    })?;
    read_events(BufReader::new(file), &name)
}

pub fn write_log(path: &Path, events: &[SessionEvent]) -> Result<(), LogError> {
    fs::write(path, to_jsonl(events)).map_err(|source| LogError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// `*.jsonl` files of a directory in name order.
pub fn list_logs(dir: &Path) -> Result<Vec<PathBuf>, LogError> {
    let entries = fs::read_dir(dir).map_err(|source| LogError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    paths.sort();
    Ok(paths)
}

/// Appends events to a log file as they happen, flushing every line.
pub struct LogWriter {
    out: BufWriter<File>,
    path: PathBuf,
}

impl LogWriter {
    pub fn create(path: &Path) -> Result<Self, LogError> {
        let file = File::create(path).map_err(|source| LogError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(LogWriter {
            out: BufWriter::new(file),
            path: path.to_path_buf(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&mut self, events: &[SessionEvent]) -> Result<(), LogError> {
        let write = |out: &mut BufWriter<File>| -> io::Result<()> {
            for ev in events {
                serde_json::to_writer(&mut *out, ev)?;
                out.write_all(b"\n")?;
            }
            out.flush()
        };
        write(&mut self.out).map_err(|source| LogError::Io {
            path: self.path.display().to_string(),
            source,
        })
    }
}
