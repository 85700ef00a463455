//! Streaming split selection for sparse binary data.
//!
//! Two approximate engines, [`UpdEnt`] (conditional entropy) and
//! [`UpdGini`] (Gini index), return after every point a feature whose
//! impurity is within a factor `1 + alpha` of the best tracked feature. Their
//! per-update cost depends on the number of active features in the point and
//! on `alpha`, not on the total number of features. [`Baseline`] scans every
//! tracked feature and doubles as the exact oracle.

pub mod approx_ent;
pub mod approx_gini;
pub mod baseline;
pub mod binning;
pub mod counters;
pub mod datagen;
mod engine;
mod error;
pub mod keyed;
pub mod stream_io;

pub use approx_ent::{EntStats, FeatureSlot, UpdEnt};
pub use approx_gini::{GiniStats, UpdGini};
pub use baseline::{exact_best, Baseline};
pub use binning::{Bin, EntBinId, GiniBinId, Scheme};
pub use counters::{
    decomp_terms, one_branch_cost, CounterStore, FeatureId, FeatureOneSide, GlobalCounts, Measure,
    SparsePoint, SplitCounts,
};
pub use datagen::{generate, generate_with_thetas, Dataset, GenConfig};
pub use engine::{SplitDecision, SplitEngine};
pub use error::{Error, Result};
