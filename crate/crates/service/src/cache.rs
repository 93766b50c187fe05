//! Keyed store of finished class grids with expiry and a size bound.

use std::fmt;
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use lru::LruCache;
use pixdrive_core::{ClassGrid, TileKey};

/// Canonical identity of a render: the grid depends on nothing else.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TaskKey {
    pub dataset: String,
    pub tile: TileKey,
    pub width: u32,
}

impl fmt::Display for TaskKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}@{}", self.dataset, self.tile, self.width)
    }
}

struct Entry {
    grid: Arc<ClassGrid>,
    created_at: Instant,
}

/// Result pool. Entries expire `ttl` after insertion; when full, expired
/// entries are dropped first and then the least recently used one.
pub struct ResultPool {
    entries: Mutex<LruCache<TaskKey, Entry>>,
    ttl: Duration,
    capacity: usize,
}

impl ResultPool {
    pub fn new(capacity: usize, ttl: Duration) -> Self {
        let cap = NonZeroUsize::new(capacity.max(1)).unwrap();
        ResultPool { entries: Mutex::new(LruCache::new(cap)), ttl, capacity: cap.get() }
    }

    pub fn get(&self, key: &TaskKey) -> Option<Arc<ClassGrid>> {
        let mut entries = self.entries.lock().unwrap();
        let expired = entries.peek(key)?.created_at.elapsed() >= self.ttl;
        if expired {
            entries.pop(key);
            return None;
        }
        entries.get(key).map(|e| Arc::clone(&e.grid))
    }

    pub fn insert(&self, key: TaskKey, grid: Arc<ClassGrid>) {
        let mut entries = self.entries.lock().unwrap();
        if entries.len() >= self.capacity && !entries.contains(&key) {
            Self::purge_expired(&mut entries, self.ttl);
        }
        entries.put(key, Entry { grid, created_at: Instant::now() });
    }

    fn purge_expired(entries: &mut LruCache<TaskKey, Entry>, ttl: Duration) {
        let stale: Vec<TaskKey> =
            entries.iter().filter(|(_, e)| e.created_at.elapsed() >= ttl).map(|(k, _)| k.clone()).collect();
        for k in stale {
            entries.pop(&k);
        }
    }

    /// Drops every expired entry.
    pub fn purge(&self) {
        Self::purge_expired(&mut self.entries.lock().unwrap(), self.ttl);
    }

    pub fn len(&self) -> usize {
        self.entries.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(x: u32) -> TaskKey {
        TaskKey { dataset: "d".into(), tile: TileKey::new(5, x, 0).unwrap(), width: 1 }
    }

    #[test]
    fn bounded_lru() {
        let pool = ResultPool::new(2, Duration::from_secs(60));
        let g = Arc::new(ClassGrid::new());
        pool.insert(key(0), g.clone());
        pool.insert(key(1), g.clone());
        assert!(pool.get(&key(0)).is_some());
        pool.insert(key(2), g);
        assert_eq!(pool.len(), 2);
        assert!(pool.get(&key(1)).is_none());
        assert!(pool.get(&key(0)).is_some());
    }

    #[test]
    fn expired_entries_go_first() {
        let pool = ResultPool::new(2, Duration::from_millis(200));
        let g = Arc::new(ClassGrid::new());
        pool.insert(key(0), g.clone());
        std::thread::sleep(Duration::from_millis(120));
        pool.insert(key(1), g.clone());
        // key(0) becomes most recently used, then expires
        assert!(pool.get(&key(0)).is_some());
        std::thread::sleep(Duration::from_millis(120));
        pool.insert(key(2), g);
        assert!(pool.get(&key(1)).is_some());
        assert!(pool.get(&key(2)).is_some());
        assert_eq!(pool.len(), 2);
    }

    #[test]
    fn ttl_expiry() {
        let pool = ResultPool::new(4, Duration::from_millis(20));
        pool.insert(key(0), Arc::new(ClassGrid::new()));
        assert!(pool.get(&key(0)).is_some());
        std::thread::sleep(Duration::from_millis(30));
        assert!(pool.get(&key(0)).is_none());
        assert!(pool.is_empty());
    }
}
