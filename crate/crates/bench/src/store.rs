//! Evaluation records and their append-only JSONL store.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{self, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tartarus_core::objectives::{PropertyMap, Quantity};

use crate::protocol::TaggedValue;

pub const CACHE_DIR_ENV: &str = "TARTARUS_CACHE_DIR";
pub const STORE_FILE_NAME: &str = "evaluations.jsonl";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordStatus {
    Ok,
    ConstraintFail,
    ProviderError,
    Timeout,
}

impl RecordStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RecordStatus::Ok => "ok",
            RecordStatus::ConstraintFail => "constraint_fail",
            RecordStatus::ProviderError => "provider_error",
            RecordStatus::Timeout => "timeout",
        }
    }
}

/// One line of the store. Every proposal produces a record, cache hits
/// included, so replaying a store reproduces the budget as well as the cache.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub seq: u64,
    pub run: String,
    pub canonical_key: String,
    /// Digest of everything besides the molecule that determines the result.
    pub fingerprint: String,
    pub values: BTreeMap<String, TaggedValue>,
    pub status: RecordStatus,
    pub fitness: f64,
    pub passes_filters: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub wall_seconds: f64,
    pub cache_hit: bool,
    /// Budget consumed by the run after this proposal.
    pub budget_after: u64,
}

impl EvaluationRecord {
    pub fn property_map(&self) -> PropertyMap {
        self.values
            .iter()
            .map(|(k, v)| (k.clone(), Quantity::new(v.v, &v.u)))
            .collect()
    }
}

pub fn tag_values(values: &PropertyMap) -> BTreeMap<String, TaggedValue> {
    values
        .iter()
        .map(|(k, q)| {
            (
                k.clone(),
                TaggedValue {
                    v: q.value,
                    u: q.unit.clone(),
                },
            )
        })
        .collect()
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("store {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

pub struct Store {
    path: PathBuf,
    file: File,
    next_seq: u64,
}

impl Store {
    /// Opens (creating if needed) the store at `path` and returns the records
    /// already in it. A torn or corrupt tail is cut back to the last complete
    /// record.
    pub fn open(path: impl AsRef<Path>) -> Result<(Store, Vec<EvaluationRecord>), StoreError> {
        let path = path.as_ref().to_path_buf();
        let err = |source| StoreError::Io {
            path: path.clone(),
            source,
        };
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(err)?;
        }
        let mut file = OpenOptions::new()
            .read(true)
            .write(true)
            .create(true)
            .truncate(false)
            .open(&path)
            .map_err(err)?;
        let mut bytes = Vec::new();
        file.read_to_end(&mut bytes).map_err(err)?;

        let mut records = Vec::new();
        let mut valid_end = 0usize;
        let mut rest = &bytes[..];
        while let Some(nl) = rest.iter().position(|&b| b == b'\n') {
            let line = &rest[..nl];
            match serde_json::from_slice::<EvaluationRecord>(line) {
                Ok(r) => records.push(r),
                Err(_) => break,
            }
            valid_end += nl + 1;
            rest = &rest[nl + 1..];
        }
        if valid_end < bytes.len() {
            log::warn!(
                "{}: discarding {} trailing bytes after the last complete record",
                path.display(),
                bytes.len() - valid_end
            );
            file.set_len(valid_end as u64).map_err(err)?;
        }
        file.seek(SeekFrom::End(0)).map_err(err)?;
        let next_seq = records.last().map_or(0, |r| r.seq + 1);
        Ok((
            Store {
                path,
                file,
                next_seq,
            },
            records,
        ))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Assigns the next sequence number and writes the record durably.
    pub fn append(&mut self, record: &mut EvaluationRecord) -> Result<(), StoreError> {
        record.seq = self.next_seq;
        let mut line = serde_json::to_string(record).expect("records serialize");
        line.push('\n');
        self.file
            .write_all(line.as_bytes())
            .and_then(|_| self.file.flush())
            .map_err(|source| StoreError::Io {
                path: self.path.clone(),
                source,
            })?;
        self.next_seq += 1;
        Ok(())
    }
}
