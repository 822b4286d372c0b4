//! Hash-consing support: a table that maps structurally equal values to a
//! single shared allocation, so equality on interned handles is pointer
//! equality.

use std::collections::HashSet;
use std::hash::Hash;
use std::sync::{Arc, Mutex};

pub struct Interner<T> {
    table: Mutex<HashSet<Arc<T>>>,
}

impl<T: Eq + Hash> Interner<T> {
    pub fn new() -> Self {
        Interner {
            table: Mutex::new(HashSet::new()),
        }
    }

    pub fn intern(&self, value: T) -> Arc<T> {
        let mut table = self.table.lock().unwrap();
        if let Some(existing) = table.get(&value) {
            return Arc::clone(existing);
        }
        let entry = Arc::new(value);
        table.insert(Arc::clone(&entry));
        entry
    }
}

impl<T: Eq + Hash> Default for Interner<T> {
    fn default() -> Self {
        Self::new()
    }
}
