//! Per-lambda result slots on disk, so interrupted runs resume where they stopped.
//!
//! Each slot is one JSON file written atomically (temp file + rename). The
//! manifest records the config fingerprint and the completed slots; a slot
//! directory left by a different config is discarded.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub config: String,
    pub total: usize,
    pub completed: Vec<usize>,
}

pub struct SlotStore {
    dir: PathBuf,
    manifest_path: PathBuf,
    command: String,
    config: String,
    total: usize,
}

/// How a slot run ended.
pub enum SlotRun<T> {
    Complete(Vec<T>),
    Partial { done: usize, total: usize },
}

impl SlotStore {
    pub fn open(out: &Path, command: &str, config: String, total: usize) -> CliResult<Self> {
        let dir = out.join(format!("{command}.slots"));
        let manifest_path = out.join(format!("{command}.manifest.json"));
        std::fs::create_dir_all(out)?;
        let stale = match std::fs::read_to_string(&manifest_path) {
            Ok(text) => match serde_json::from_str::<Manifest>(&text) {
                Ok(m) => m.config != config || m.total != total,
                Err(_) => true,
            },
            Err(_) => dir.exists(),
        };
        if stale && dir.exists() {
            std::fs::remove_dir_all(&dir)?;
        }
        std::fs::create_dir_all(&dir)?;
        let store = Self {
            dir,
            manifest_path,
            command: command.to_string(),
            config,
            total,
        };
        Ok(store)
    }

    fn slot_path(&self, i: usize) -> PathBuf {
        self.dir.join(format!("slot-{i:06}.json"))
    }

    pub fn load<T: DeserializeOwned>(&self, i: usize) -> Option<T> {
        let text = std::fs::read_to_string(self.slot_path(i)).ok()?;
        serde_json::from_str(&text).ok()
    }

    pub fn store<T: Serialize>(&self, i: usize, value: &T) -> CliResult<()> {
        let path = self.slot_path(i);
        let tmp = path.with_extension("json.tmp");
        let text = serde_json::to_string(value).map_err(|e| CliError::Io(e.to_string()))?;
        std::fs::write(&tmp, text)?;
        std::fs::rename(&tmp, &path)?;
        Ok(())
    }

    fn write_manifest(&self, completed: Vec<usize>) -> CliResult<()> {
        let m = Manifest {
            command: self.command.clone(),
            config: self.config.clone(),
            total: self.total,
            completed,
        };
        let text = serde_json::to_string_pretty(&m).map_err(|e| CliError::Io(e.to_string()))?;
        std::fs::write(&self.manifest_path, text)?;
        Ok(())
    }

    /// Fills the missing slots with `f`, at most `max_new` of them (lowest
    /// indices first), on a pool of `workers` threads. Results come back in
    /// slot order whatever the worker count.
    pub fn run<T, F>(&self, workers: usize, max_new: Option<usize>, f: F) -> CliResult<SlotRun<T>>
    where
        T: Serialize + DeserializeOwned + Send,
        F: Fn(usize) -> CliResult<T> + Sync,
    {
        let mut have: Vec<Option<T>> = (0..self.total).map(|i| self.load(i)).collect();
        let mut pending: Vec<usize> = (0..self.total).filter(|&i| have[i].is_none()).collect();
        if let Some(k) = max_new {
            pending.truncate(k);
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
        let computed: Vec<CliResult<(usize, T)>> = pool.install(|| {
            pending
                .par_iter()
                .map(|&i| {
                    let v = f(i)?;
                    self.store(i, &v)?;
                    Ok((i, v))
                })
                .collect()
        });
        let mut first_err = None;
        for r in computed {
            match r {
                Ok((i, v)) => have[i] = Some(v),
                Err(e) => {
                    first_err.get_or_insert(e);
                }
            }
        }
        let completed: Vec<usize> = (0..self.total).filter(|&i| have[i].is_some()).collect();
        self.write_manifest(completed.clone())?;
        if let Some(e) = first_err {
            return Err(e);
        }
        if completed.len() == self.total {
            Ok(SlotRun::Complete(
                have.into_iter().map(|v| v.expect("complete")).collect(),
            ))
        } else {
            Ok(SlotRun::Partial {
                done: completed.len(),
                total: self.total,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resume_fills_only_missing_slots() {
        let dir = tempfile::tempdir().unwrap();
        let calls = std::sync::atomic::AtomicUsize::new(0);
        let f = |i: usize| {
            calls.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
            Ok(i as f64 * 0.5)
        };
        let s = SlotStore::open(dir.path(), "t", "cfg".into(), 5).unwrap();
        assert!(matches!(
            s.run(1, Some(2), f).unwrap(),
            SlotRun::Partial { done: 2, total: 5 }
        ));
        let s = SlotStore::open(dir.path(), "t", "cfg".into(), 5).unwrap();
        match s.run(3, None, f).unwrap() {
            SlotRun::Complete(v) => assert_eq!(v, vec![0.0, 0.5, 1.0, 1.5, 2.0]),
            SlotRun::Partial { .. } => panic!("incomplete"),
        }
        assert_eq!(calls.load(std::sync::atomic::Ordering::SeqCst), 5);
    }

    #[test]
    fn changed_config_discards_slots() {
        let dir = tempfile::tempdir().unwrap();
        let s = SlotStore::open(dir.path(), "t", "a".into(), 2).unwrap();
        s.run(1, None, Ok).unwrap();
        let s = SlotStore::open(dir.path(), "t", "b".into(), 2).unwrap();
        assert!(s.load::<usize>(0).is_none());
    }
}
