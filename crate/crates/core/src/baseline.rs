//! Exact split selection by scanning every tracked feature.

use crate::counters::{CounterStore, Measure, SparsePoint, SplitCounts};
use crate::engine::{SplitDecision, SplitEngine};

/// Exact argmin of the conditional impurity over all tracked features, ties
/// broken by the smallest id.
pub fn exact_best(store: &CounterStore, measure: Measure) -> SplitDecision {
    let globals = store.globals();
    let mut best = SplitDecision::NONE;
    for (j, one) in store.features() {
        best.candidates += 1;
        let score = SplitCounts::new(globals, one).cond_impurity(measure);
        let better = match best.feature {
            None => true,
            Some(b) => score < best.score || (score == best.score && j < b),
        };
        if better {
            best.feature = Some(j);
            best.score = score;
        }
    }
    best
}

/// `O(d)` per update: ingest, then scan.
#[derive(Debug, Clone)]
pub struct Baseline {
    store: CounterStore,
    measure: Measure,
}

impl Baseline {
    pub fn new(measure: Measure) -> Self {
        Self {
            store: CounterStore::new(),
            measure,
        }
    }
}

impl SplitEngine for Baseline {
    fn process(&mut self, p: &SparsePoint) -> SplitDecision {
        self.store.ingest(p);
        self.current_best()
    }

    fn current_best(&self) -> SplitDecision {
        exact_best(&self.store, self.measure)
    }

    fn store(&self) -> &CounterStore {
        &self.store
    }

    fn measure(&self) -> Measure {
        self.measure
    }

    fn nonempty_trees(&self) -> usize {
        0
    }
}
