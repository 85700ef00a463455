//! Ordered set of `(key, feature)` entries with a total order on float keys.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use crate::counters::FeatureId;

/// `f64` ordered by `total_cmp`. Keys are never NaN in practice.
#[derive(Debug, Clone, Copy)]
pub struct OrdKey(pub f64);

impl PartialEq for OrdKey {
    fn eq(&self, other: &Self) -> bool {
        self.0.total_cmp(&other.0) == Ordering::Equal
    }
}

impl Eq for OrdKey {}

impl PartialOrd for OrdKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Features ordered by `(key, id)`. A feature id may appear at most once per
/// set in the engines, but the set itself does not enforce that.
#[derive(Debug, Clone, Default)]
pub struct KeyedSet {
    entries: BTreeSet<(OrdKey, FeatureId)>,
}

impl KeyedSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn insert(&mut self, key: f64, id: FeatureId) -> bool {
        debug_assert!(!key.is_nan());
        self.entries.insert((OrdKey(key), id))
    }

    pub fn remove(&mut self, key: f64, id: FeatureId) -> bool {
        self.entries.remove(&(OrdKey(key), id))
    }

    pub fn first(&self) -> Option<(f64, FeatureId)> {
        self.entries.first().map(|&(k, id)| (k.0, id))
    }

    pub fn last(&self) -> Option<(f64, FeatureId)> {
        self.entries.last().map(|&(k, id)| (k.0, id))
    }

    /// Ids of every entry with key strictly below `bound`, smallest first.
    pub fn ids_below(&self, bound: f64) -> Vec<FeatureId> {
        self.entries
            .iter()
            .take_while(|(k, _)| k.0 < bound)
            .map(|&(_, id)| id)
            .collect()
    }

    /// Ids of every entry with key strictly above `bound`, largest first.
    pub fn ids_above(&self, bound: f64) -> Vec<FeatureId> {
        self.entries
            .iter()
            .rev()
            .take_while(|(k, _)| k.0 > bound)
            .map(|&(_, id)| id)
            .collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, FeatureId)> + '_ {
        self.entries.iter().map(|&(k, id)| (k.0, id))
    }
}
