//! Append-only store of commit reports.
//!
//! File layout of `reports.log`:
//!
//! ```text
//! magic    16 bytes  "RFDI-CACHE" followed by six NUL bytes
//! version   1 byte   FORMAT_VERSION
//! entry*    u64 LE payload length | payload (JSON CacheEntry) | u32 LE CRC-32 of payload
//! ```
//!
//! An entry counts only once its checksum is on disk. Opening for writing
//! truncates the file after the last intact entry; readers just stop there.
//! Later entries win over earlier ones with the same key.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::mining::CommitReport;

pub const MAGIC: [u8; 16] = *b"RFDI-CACHE\0\0\0\0\0\0";
pub const FORMAT_VERSION: u8 = 1;
pub const HEADER_LEN: u64 = 17;
pub const LOG_FILE: &str = "reports.log";

#[derive(Debug, thiserror::Error)]
pub enum CacheError {
    #[error("cache store unavailable: {0}")]
    StoreUnavailable(#[from] io::Error),
    #[error("cache store {0} is locked by another writer")]
    Locked(PathBuf),
    #[error("{0} is not a cache store or has an unsupported format version")]
    BadHeader(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub sha: String,
    pub detector_version: String,
    pub written_at: DateTime<Utc>,
    pub report: CommitReport,
}

/// Default cache directory of a repository.
pub fn default_dir(repo_root: &Path) -> PathBuf {
    repo_root.join(".refdiff-insight").join("cache")
}

/// Outcome of scanning a log file.
#[derive(Debug, Default)]
struct Scan {
    entries: Vec<CacheEntry>,
    /// End of the last intact entry.
    valid_len: u64,
    file_len: u64,
}

fn encode(entry: &CacheEntry) -> Vec<u8> {
    let payload = serde_json::to_vec(entry).expect("cache entries always serialize");
    let mut buf = Vec::with_capacity(payload.len() + 12);
    buf.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    buf.extend_from_slice(&payload);
    buf.extend_from_slice(&crc32fast::hash(&payload).to_le_bytes());
    buf
}

fn scan(bytes: &[u8], path: &Path) -> Result<Scan, CacheError> {
    let file_len = bytes.len() as u64;
    if bytes.len() < HEADER_LEN as usize {
        // A header cut short can only come from an interrupted creation.
        if MAGIC.starts_with(&bytes[..bytes.len().min(16)]) {
            return Ok(Scan { entries: Vec::new(), valid_len: 0, file_len });
        }
        return Err(CacheError::BadHeader(path.to_path_buf()));
    }
    if bytes[..16] != MAGIC || bytes[16] != FORMAT_VERSION {
        return Err(CacheError::BadHeader(path.to_path_buf()));
    }
    let mut pos = HEADER_LEN as usize;
    let mut entries = Vec::new();
    while let Some(len_bytes) = bytes.get(pos..pos + 8) {
        let len = u64::from_le_bytes(len_bytes.try_into().expect("8 bytes"));
        let Some(end) = usize::try_from(len).ok().and_then(|l| (pos + 8).checked_add(l)) else { break };
        let (Some(payload), Some(crc)) = (bytes.get(pos + 8..end), bytes.get(end..end + 4)) else { break };
        if crc32fast::hash(payload).to_le_bytes() != crc {
            break;
        }
        let Ok(entry) = serde_json::from_slice::<CacheEntry>(payload) else { break };
        entries.push(entry);
        pos = end + 4;
    }
    Ok(Scan { entries, valid_len: pos as u64, file_len })
}

type Key = (String, String);

/// An open cache. A writable store holds an exclusive advisory lock on the
/// log file until dropped.
#[derive(Debug)]
pub struct Store {
    path: PathBuf,
    file: Option<File>,
    index: HashMap<Key, CacheEntry>,
    /// Keys in first-write order.
    order: Vec<Key>,
    discarded_bytes: u64,
}

impl Store {
    /// Opens or creates the store in `dir` for reading and writing.
    pub fn open(dir: &Path) -> Result<Self, CacheError> {
        fs::create_dir_all(dir)?;
        let path = dir.join(LOG_FILE);
        let mut file = OpenOptions::new().read(true).write(true).create(true).truncate(false).open(&path)?;
        match file.try_lock() {
            Ok(()) => {}
            Err(fs::TryLockError::WouldBlock) => return Err(CacheError::Locked(path)),
            Err(fs::TryLockError::Error(e)) => return Err(e.into()),
        }
        let mut bytes = Vec::new();
        file.read_to_end(&mut bytes)?;
        let scan = scan(&bytes, &path)?;
        if scan.valid_len == 0 {
            file.set_len(0)?;
            file.seek(SeekFrom::Start(0))?;
            file.write_all(&MAGIC)?;
            file.write_all(&[FORMAT_VERSION])?;
            file.sync_all()?;
        } else if scan.valid_len < scan.file_len {
            log::warn!(
                "cache {}: dropping {} bytes after the last intact entry",
                path.display(),
                scan.file_len - scan.valid_len
            );
            file.set_len(scan.valid_len)?;
            file.sync_all()?;
        }
        file.seek(SeekFrom::End(0))?;
        let discarded = scan.file_len.saturating_sub(scan.valid_len.max(HEADER_LEN));
        let mut store = Store::from_entries(path, Some(file), scan.entries);
        store.discarded_bytes = discarded;
        Ok(store)
    }

    /// Opens an existing store without locking or repairing it. A missing
    /// store reads as empty.
    pub fn open_read_only(dir: &Path) -> Result<Self, CacheError> {
        let path = dir.join(LOG_FILE);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(e.into()),
        };
        let scan = scan(&bytes, &path)?;
        let discarded = scan.file_len.saturating_sub(scan.valid_len.max(HEADER_LEN).min(scan.file_len));
        if discarded > 0 {
            log::warn!("cache {}: ignoring {discarded} bytes after the last intact entry", path.display());
        }
        let mut store = Store::from_entries(path, None, scan.entries);
        store.discarded_bytes = discarded;
        Ok(store)
    }

    fn from_entries(path: PathBuf, file: Option<File>, entries: Vec<CacheEntry>) -> Self {
        let mut store = Store { path, file, index: HashMap::new(), order: Vec::new(), discarded_bytes: 0 };
        for e in entries {
            store.insert(e);
        }
        store
    }

    fn insert(&mut self, entry: CacheEntry) {
        let key = (entry.sha.clone(), entry.detector_version.clone());
        if !self.index.contains_key(&key) {
            self.order.push(key.clone());
        }
        self.index.insert(key, entry);
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Bytes dropped or ignored after the last intact entry when opening.
    pub fn discarded_bytes(&self) -> u64 {
        self.discarded_bytes
    }

    pub fn get(&self, sha: &str, detector_version: &str) -> Option<CommitReport> {
        self.index.get(&(sha.to_string(), detector_version.to_string())).map(|e| e.report.clone())
    }

    /// Appends a report and syncs it to disk. Storing a report equal to the
    /// live one for its key is a no-op.
    pub fn put(&mut self, report: &CommitReport) -> Result<(), CacheError> {
        let key = (report.sha.clone(), report.detector_version.clone());
        if self.index.get(&key).is_some_and(|e| e.report == *report) {
            return Ok(());
        }
        let entry = CacheEntry {
            sha: report.sha.clone(),
            detector_version: report.detector_version.clone(),
            written_at: Utc::now(),
            report: report.clone(),
        };
        let Some(file) = self.file.as_mut() else {
            return Err(CacheError::StoreUnavailable(io::Error::new(
                io::ErrorKind::PermissionDenied,
                "store opened read-only",
            )));
        };
        file.write_all(&encode(&entry))?;
        file.sync_data()?;
        self.insert(entry);
        Ok(())
    }

    /// Live entries in first-write order.
    pub fn entries(&self) -> impl Iterator<Item = &CacheEntry> {
        self.order.iter().map(|k| &self.index[k])
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    /// Live reports produced by one detector version, keyed by sha.
    pub fn reports_for(&self, detector_version: &str) -> HashMap<&str, &CommitReport> {
        self.index
            .values()
            .filter(|e| e.detector_version == detector_version)
            .map(|e| (e.sha.as_str(), &e.report))
            .collect()
    }
}

/// Removes the store in `dir`. Returns whether anything was removed.
pub fn clear(dir: &Path) -> Result<bool, CacheError> {
    let path = dir.join(LOG_FILE);
    match fs::remove_file(&path) {
        Ok(()) => Ok(true),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(false),
        Err(e) => Err(e.into()),
    }
}

/// Byte offsets at which each entry of a well-formed log ends, header
/// included as the first boundary. Used to audit stores and in tests.
pub fn entry_boundaries(bytes: &[u8]) -> Vec<u64> {
    let mut out = vec![HEADER_LEN];
    let mut pos = HEADER_LEN as usize;
    while let Some(len) = bytes.get(pos..pos + 8) {
        let len = u64::from_le_bytes(len.try_into().expect("8 bytes")) as usize;
        let end = pos + 8 + len + 4;
        if end > bytes.len() {
            break;
        }
        out.push(end as u64);
        pos = end;
    }
    out
}
