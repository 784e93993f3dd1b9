//! Append-only per-session logs.
//!
//! Each session is one `<id>.jsonl` file: a `created` event followed by one
//! `response` event per acknowledged answer. Every append is flushed to disk
//! before the caller replies.

use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use zpdrec_core::Mode;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum LogEvent {
    Created {
        session_id: String,
        mode: Mode,
        m: u32,
        seed: u64,
        created_at: u64,
    },
    Response {
        material_id: String,
        understood: bool,
        at: u64,
    },
}

#[derive(Debug, Clone)]
pub struct SessionStore {
    dir: PathBuf,
}

impl SessionStore {
    pub fn open(dir: impl Into<PathBuf>) -> io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(SessionStore { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, session_id: &str) -> PathBuf {
        self.dir.join(format!("{session_id}.jsonl"))
    }

    pub fn append(&self, session_id: &str, event: &LogEvent) -> io::Result<()> {
        let mut line = serde_json::to_vec(event).map_err(io::Error::other)?;
        line.push(b'\n');
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(self.path(session_id))?;
        file.write_all(&line)?;
        file.sync_data()
    }

    /// Events of a session, or `None` if it has no log.
    ///
    /// A torn final line (a write that never completed, hence was never
    /// acknowledged) is dropped; corruption anywhere else is an error.
    pub fn load(&self, session_id: &str) -> io::Result<Option<Vec<LogEvent>>> {
        let file = match File::open(self.path(session_id)) {
            Ok(f) => f,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e),
        };
        let lines: Vec<String> = BufReader::new(file).lines().collect::<Result<_, _>>()?;
        let mut events = Vec::with_capacity(lines.len());
        for (i, line) in lines.iter().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str(line) {
                Ok(ev) => events.push(ev),
                Err(e) if i + 1 == lines.len() => {
                    log::warn!("session {session_id}: dropping torn last log line: {e}");
                }
                Err(e) => {
                    return Err(io::Error::new(
                        io::ErrorKind::InvalidData,
                        format!("session {session_id} line {}: {e}", i + 1),
                    ))
                }
            }
        }
        Ok(Some(events))
    }
}

/// A session id is safe to use as a file name.
pub fn valid_session_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 64 && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}
