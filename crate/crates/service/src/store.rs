use std::collections::HashMap;
use std::sync::Arc;
use std::time::SystemTime;

use jalgo_core::Trace;

/// An immutable compiled-and-traced program.
#[derive(Debug)]
pub struct ProgramRecord {
    pub program_id: String,
    pub source: String,
    pub trace: Trace,
    pub created_at: SystemTime,
}

/// In-memory records with least-recently-used eviction.
#[derive(Debug)]
pub struct ProgramStore {
    capacity: usize,
    clock: u64,
    records: HashMap<String, (u64, Arc<ProgramRecord>)>,
}

impl ProgramStore {
    pub const DEFAULT_CAPACITY: usize = 256;

    pub fn with_capacity(capacity: usize) -> Self {
        Self {
            capacity: capacity.max(1),
            clock: 0,
            records: HashMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    fn tick(&mut self) -> u64 {
        self.clock += 1;
        self.clock
    }

    pub fn insert(
        &mut self,
        source: String,
        trace: Trace,
        created_at: SystemTime,
    ) -> Arc<ProgramRecord> {
        let record = Arc::new(ProgramRecord {
            program_id: uuid::Uuid::new_v4().simple().to_string(),
            source,
            trace,
            created_at,
        });
        while self.records.len() >= self.capacity {
            let oldest = self
                .records
                .iter()
                .min_by_key(|(_, (used, _))| *used)
                .map(|(id, _)| id.clone())
                .expect("store is non-empty");
            self.records.remove(&oldest);
        }
        let now = self.tick();
        self.records
            .insert(record.program_id.clone(), (now, Arc::clone(&record)));
        record
    }

    /// Looks up a record and marks it as recently used.
    pub fn get(&mut self, id: &str) -> Option<Arc<ProgramRecord>> {
        let now = self.tick();
        let (used, record) = self.records.get_mut(id)?;
        *used = now;
        Some(Arc::clone(record))
    }
}

impl Default for ProgramStore {
    fn default() -> Self {
        Self::with_capacity(Self::DEFAULT_CAPACITY)
    }
}
