use crate::counters::{CounterStore, FeatureId, Measure, SparsePoint};

/// Outcome of a split query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitDecision {
    /// `None` until some feature has been seen with value 1.
    pub feature: Option<FeatureId>,
    /// Exact conditional impurity of `feature`; `f64::INFINITY` when absent.
    pub score: f64,
    /// Number of buckets (or features, for the exact baseline) examined.
    pub candidates: usize,
}

impl SplitDecision {
    pub const NONE: SplitDecision = SplitDecision {
        feature: None,
        score: f64::INFINITY,
        candidates: 0,
    };
}

/// A streaming split selector.
pub trait SplitEngine {
    /// Consumes one point and returns the split for the data seen so far.
    fn process(&mut self, p: &SparsePoint) -> SplitDecision;

    fn current_best(&self) -> SplitDecision;

    fn store(&self) -> &CounterStore;

    fn measure(&self) -> Measure;

    /// Number of buckets whose candidate tree is non-empty; 0 for the baseline.
    fn nonempty_trees(&self) -> usize;
}

/// Exact argmin over `candidates`, ties broken by the smallest id.
pub(crate) fn pick_best<I>(store: &CounterStore, measure: Measure, candidates: I) -> SplitDecision
where
    I: IntoIterator<Item = FeatureId>,
{
    let globals = store.globals();
    let mut best = SplitDecision::NONE;
    for j in candidates {
        best.candidates += 1;
        let Some(one) = store.feature(j) else {
            continue;
        };
        let score = crate::counters::SplitCounts::new(globals, one).cond_impurity(measure);
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
