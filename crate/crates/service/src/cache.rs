use std::sync::Arc;

use bivmap::data_model::Dataset;
use lru::LruCache;

pub const DEFAULT_CAPACITY_BYTES: usize = 256 * 1024 * 1024;

/// Content-addressed uploaded datasets, evicted least-recently-used once the
/// byte budget is exceeded. Sizes are the canonical serialization length.
pub struct DatasetCache {
    entries: LruCache<String, (Arc<Dataset>, usize)>,
    bytes: usize,
    capacity: usize,
}

impl DatasetCache {
    pub fn new(capacity: usize) -> Self {
        Self {
            entries: LruCache::unbounded(),
            bytes: 0,
            capacity,
        }
    }

    /// Inserts a dataset; returns false if it alone exceeds the capacity.
    pub fn insert(&mut self, id: String, dataset: Arc<Dataset>, size: usize) -> bool {
        if size > self.capacity {
            return false;
        }
        if let Some((_, old)) = self.entries.pop(&id) {
            self.bytes -= old;
        }
        while self.bytes + size > self.capacity {
            match self.entries.pop_lru() {
                Some((_, (_, evicted))) => self.bytes -= evicted,
                None => break,
            }
        }
        self.entries.put(id, (dataset, size));
        self.bytes += size;
        true
    }

    pub fn get(&mut self, id: &str) -> Option<Arc<Dataset>> {
        self.entries.get(id).map(|(d, _)| Arc::clone(d))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn bytes(&self) -> usize {
        self.bytes
    }
}

impl Default for DatasetCache {
    fn default() -> Self {
        Self::new(DEFAULT_CAPACITY_BYTES)
    }
}
