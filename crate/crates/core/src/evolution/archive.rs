use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchiveEntry {
    pub x: Vec<f64>,
    pub f: Vec<f64>,
}

/// Append-only store of truly evaluated designs.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Archive {
    entries: Vec<ArchiveEntry>,
}

impl Archive {
    pub fn new() -> Self {
        Self::default()
    }

    /// Append `(x, f)`; returns `false` (and stores nothing) if `x` is already archived.
    pub fn push(&mut self, x: Vec<f64>, f: Vec<f64>) -> bool {
        if self.contains(&x) {
            return false;
        }
        self.entries.push(ArchiveEntry { x, f });
        true
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.entries.iter().any(|e| e.x == x)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[ArchiveEntry] {
        &self.entries
    }

    pub fn get(&self, i: usize) -> &ArchiveEntry {
        &self.entries[i]
    }
}
