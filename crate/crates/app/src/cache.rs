//! Most-recent recommendation results, optionally mirrored to a JSON-lines
//! file so separate runs can share them.

use std::fs;
use std::io;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use lru::LruCache;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const DEFAULT_CAPACITY: usize = 64;

/// Identifies one computed recommendation. `request` distinguishes the
/// target PR or change set and the strategy.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CacheKey {
    pub project: String,
    pub head: String,
    pub config: String,
    pub request: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lookup {
    Hit,
    Miss,
    /// A refresh was requested; any stored entry was dropped first.
    Refreshed,
}

impl Lookup {
    pub fn name(self) -> &'static str {
        match self {
            Lookup::Hit => "hit",
            Lookup::Miss => "miss",
            Lookup::Refreshed => "refresh",
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Record {
    key: CacheKey,
    value: String,
    sha256: String,
}

fn checksum(value: &str) -> String {
    hex::encode(Sha256::digest(value.as_bytes()))
}

pub struct RecommendationCache {
    entries: Mutex<LruCache<CacheKey, String>>,
    file: Option<PathBuf>,
    warnings: Mutex<Vec<String>>,
}

impl RecommendationCache {
    pub fn in_memory(capacity: usize) -> Self {
        let capacity = NonZeroUsize::new(capacity).unwrap_or(NonZeroUsize::MIN);
        RecommendationCache {
            entries: Mutex::new(LruCache::new(capacity)),
            file: None,
            warnings: Mutex::new(Vec::new()),
        }
    }

    /// Loads `path` if it exists. Lines that fail to parse or whose
    /// checksum does not match are dropped with a warning.
    pub fn persistent(path: impl Into<PathBuf>, capacity: usize) -> io::Result<Self> {
        let path = path.into();
        let mut cache = Self::in_memory(capacity);
        let mut warnings = Vec::new();
        match fs::read_to_string(&path) {
            Ok(text) => {
                let entries = cache.entries.get_mut().expect("fresh lock");
                for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
                    match serde_json::from_str::<Record>(line) {
                        Ok(r) if checksum(&r.value) == r.sha256 => {
                            entries.put(r.key, r.value);
                        }
                        Ok(_) => warnings.push(format!("{}:{}: checksum mismatch, entry ignored", path.display(), n + 1)),
                        Err(e) => warnings.push(format!("{}:{}: unreadable entry ignored ({e})", path.display(), n + 1)),
                    }
                }
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => {}
            Err(e) => return Err(e),
        }
        cache.file = Some(path);
        cache.warnings = Mutex::new(warnings);
        Ok(cache)
    }

    pub fn path(&self) -> Option<&Path> {
        self.file.as_deref()
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, key: &CacheKey) -> Option<String> {
        self.entries.lock().expect("cache lock").get(key).cloned()
    }

    pub fn put(&self, key: CacheKey, value: String) -> io::Result<()> {
        let snapshot = {
            let mut entries = self.entries.lock().expect("cache lock");
            entries.put(key, value);
            self.file.as_ref().map(|_| Self::serialize(&entries))
        };
        self.save(snapshot)
    }

    pub fn invalidate(&self, key: &CacheKey) -> io::Result<()> {
        let snapshot = {
            let mut entries = self.entries.lock().expect("cache lock");
            entries.pop(key);
            self.file.as_ref().map(|_| Self::serialize(&entries))
        };
        self.save(snapshot)
    }

    /// Returns the stored value for `key`, or computes and stores it. With
    /// `refresh` the stored value is discarded and always recomputed.
    pub fn get_or_compute<E>(
        &self,
        key: &CacheKey,
        refresh: bool,
        compute: impl FnOnce() -> Result<String, E>,
    ) -> Result<(String, Lookup), E> {
        if refresh {
            if let Err(e) = self.invalidate(key) {
                self.warn(format!("cache invalidation failed: {e}"));
            }
        } else if let Some(hit) = self.get(key) {
            return Ok((hit, Lookup::Hit));
        }
        let value = compute()?;
        if let Err(e) = self.put(key.clone(), value.clone()) {
            self.warn(format!("cache write failed: {e}"));
        }
        Ok((value, if refresh { Lookup::Refreshed } else { Lookup::Miss }))
    }

    pub fn take_warnings(&self) -> Vec<String> {
        std::mem::take(&mut *self.warnings.lock().expect("warning lock"))
    }

    fn warn(&self, message: String) {
        self.warnings.lock().expect("warning lock").push(message);
    }

    /// Least recently used first, so reloading restores the same order.
    fn serialize(entries: &LruCache<CacheKey, String>) -> String {
        let mut out = String::new();
        for (key, value) in entries.iter().rev() {
            let record = Record {
                key: key.clone(),
                value: value.clone(),
                sha256: checksum(value),
            };
            out.push_str(&serde_json::to_string(&record).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    fn save(&self, snapshot: Option<String>) -> io::Result<()> {
        let (Some(path), Some(text)) = (&self.file, snapshot) else {
            return Ok(());
        };
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        fs::write(&tmp, text)?;
        fs::rename(&tmp, path)
    }
}
