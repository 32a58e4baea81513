//! Append-only on-disk cache of Frobenius traces.
//!
//! Layout: the 4-byte magic `FTC1`, then 24-byte little-endian records
//! `(label_hash: u64, p: u64, a_p: i64)`. A trailing partial record (from an
//! interrupted append) is ignored on load and overwritten by the next append.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::model::Curve;
use crate::error::{Error, Result};

pub const CACHE_MAGIC: &[u8; 4] = b"FTC1";
const RECORD_LEN: usize = 24;

/// Cache key for a curve: the first 8 bytes of SHA-256 over its catalog line,
/// so relabelled or edited curves never share entries.
pub fn curve_key(c: &Curve) -> u64 {
    let digest = Sha256::digest(c.to_string().as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

pub struct TraceCache {
    path: PathBuf,
    entries: HashMap<(u64, u64), i64>,
    writer: BufWriter<File>,
}

impl TraceCache {
    /// Opens or creates the cache at `path`.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut file = OpenOptions::new()
            .read(true)
            .write(true)
            .create(true)
            .truncate(false)
            .open(&path)?;
        let mut bytes = Vec::new();
        file.read_to_end(&mut bytes)?;

        let mut entries = HashMap::new();
        let end = if bytes.is_empty() {
            file.write_all(CACHE_MAGIC)?;
            CACHE_MAGIC.len()
        } else {
            if bytes.len() < CACHE_MAGIC.len() || &bytes[..4] != CACHE_MAGIC {
                return Err(Error::malformed(format!(
                    "{} is not a trace cache",
                    path.display()
                )));
            }
            let body = &bytes[CACHE_MAGIC.len()..];
            let whole = body.len() / RECORD_LEN;
            for rec in body.chunks_exact(RECORD_LEN) {
                let word =
                    |i: usize| <[u8; 8]>::try_from(&rec[8 * i..8 * i + 8]).expect("8-byte field");
                let key = u64::from_le_bytes(word(0));
                let p = u64::from_le_bytes(word(1));
                let a = i64::from_le_bytes(word(2));
                entries.insert((key, p), a);
            }
            CACHE_MAGIC.len() + whole * RECORD_LEN
        };
        file.set_len(end as u64)?;
        file.seek(SeekFrom::Start(end as u64))?;
        Ok(TraceCache {
            path,
            entries,
            writer: BufWriter::new(file),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, c: &Curve, p: u64) -> Option<i64> {
        self.get_by_key(curve_key(c), p)
    }

    pub fn get_by_key(&self, key: u64, p: u64) -> Option<i64> {
        self.entries.get(&(key, p)).copied()
    }

    /// Records `a_p`; a repeated identical entry is not rewritten.
    pub fn insert(&mut self, c: &Curve, p: u64, a_p: i64) -> Result<()> {
        self.insert_by_key(curve_key(c), p, a_p)
    }

    pub fn insert_by_key(&mut self, key: u64, p: u64, a_p: i64) -> Result<()> {
        if self.entries.insert((key, p), a_p) == Some(a_p) {
            return Ok(());
        }
        let mut rec = [0u8; RECORD_LEN];
        rec[..8].copy_from_slice(&key.to_le_bytes());
        rec[8..16].copy_from_slice(&p.to_le_bytes());
        rec[16..].copy_from_slice(&a_p.to_le_bytes());
        self.writer.write_all(&rec)?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.writer.flush()?;
        Ok(())
    }
}

impl Drop for TraceCache {
    fn drop(&mut self) {
        let _ = self.writer.flush();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn persists_across_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("traces.ftc");
        let c = Curve::short("E1", 1, 1).unwrap();
        {
            let mut cache = TraceCache::open(&path).unwrap();
            cache.insert(&c, 5, -3).unwrap();
            cache.insert(&c, 7, 3).unwrap();
            cache.insert(&c, 7, 3).unwrap();
        }
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(&bytes[..4], CACHE_MAGIC);
        assert_eq!(bytes.len(), 4 + 2 * RECORD_LEN);

        let cache = TraceCache::open(&path).unwrap();
        assert_eq!(cache.get(&c, 5), Some(-3));
        assert_eq!(cache.get(&c, 7), Some(3));
        assert_eq!(cache.get(&c, 11), None);
    }

    #[test]
    fn key_depends_on_coefficients() {
        let a = Curve::short("E", 1, 1).unwrap();
        let b = Curve::short("E", 2, 3).unwrap();
        assert_ne!(curve_key(&a), curve_key(&b));
    }

    #[test]
    fn truncated_tail_is_dropped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("traces.ftc");
        let c = Curve::short("E1", 1, 1).unwrap();
        {
            let mut cache = TraceCache::open(&path).unwrap();
            cache.insert(&c, 5, -3).unwrap();
        }
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        f.write_all(&[1, 2, 3]).unwrap();
        drop(f);
        let mut cache = TraceCache::open(&path).unwrap();
        assert_eq!(cache.len(), 1);
        cache.insert(&c, 3, 0).unwrap();
        drop(cache);
        assert_eq!(std::fs::read(&path).unwrap().len(), 4 + 2 * RECORD_LEN);
    }

    #[test]
    fn rejects_foreign_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk");
        std::fs::write(&path, b"NOPE").unwrap();
        assert!(matches!(TraceCache::open(&path), Err(Error::Malformed(_))));
    }
}
