//! Dataset counters and the impurity measures computed from them.
//!
//! Only the one-side counters of a feature (the points where it equals 1) are
//! stored. Zero-side counters are derived from the global counts at use sites,
//! so a feature's state changes only when it is active in a point.

use std::collections::HashMap;

use crate::error::{Error, Result};

pub type FeatureId = u64;

/// Impurity measure used to score a split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Measure {
    Entropy,
    Gini,
}

impl Measure {
    pub fn name(self) -> &'static str {
        match self {
            Measure::Entropy => "entropy",
            Measure::Gini => "gini",
        }
    }
}

/// One stream element: the features equal to 1 plus a binary label.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct SparsePoint {
    ones: Vec<FeatureId>,
    label: bool,
}

impl SparsePoint {
    /// Builds a point from strictly increasing feature ids.
    pub fn new(ones: Vec<FeatureId>, label: bool) -> Result<Self> {
        if let Some(w) = ones.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPoint(format!(
                "feature ids must be strictly increasing, found {} before {}",
                w[0], w[1]
            )));
        }
        Ok(Self { ones, label })
    }

    /// Sorts the ids first; duplicates are still rejected.
    pub fn from_unsorted(mut ones: Vec<FeatureId>, label: bool) -> Result<Self> {
        ones.sort_unstable();
        Self::new(ones, label)
    }

    pub fn ones(&self) -> &[FeatureId] {
        &self.ones
    }

    pub fn label(&self) -> bool {
        self.label
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GlobalCounts {
    pub n: u64,
    pub c0: u64,
    pub c1: u64,
}

/// Counts over the points where a feature equals 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FeatureOneSide {
    pub n1: u64,
    pub c10: u64,
    pub c11: u64,
}

/// Full counter view of one feature, with the zero side derived on demand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitCounts {
    pub n: u64,
    pub c0: u64,
    pub c1: u64,
    pub n1: u64,
    pub c10: u64,
    pub c11: u64,
}

impl SplitCounts {
    pub fn new(globals: GlobalCounts, one: FeatureOneSide) -> Self {
        Self {
            n: globals.n,
            c0: globals.c0,
            c1: globals.c1,
            n1: one.n1,
            c10: one.c10,
            c11: one.c11,
        }
    }

    pub fn n0(&self) -> u64 {
        self.n - self.n1
    }

    pub fn c00(&self) -> u64 {
        self.c0 - self.c10
    }

    pub fn c01(&self) -> u64 {
        self.c1 - self.c11
    }

    /// Positive-label rate on the zero branch; 0 when the zero branch is empty.
    pub fn rho(&self) -> f64 {
        let n0 = self.n0();
        if n0 == 0 {
            0.0
        } else {
            self.c01() as f64 / n0 as f64
        }
    }

    pub fn cond_entropy(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        (branch_cost(self.c10, self.c11) + branch_cost(self.c00(), self.c01())) / self.n as f64
    }

    pub fn cond_gini(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        (branch_gini_mass(self.c10, self.c11) + branch_gini_mass(self.c00(), self.c01()))
            / self.n as f64
    }

    pub fn cond_impurity(&self, measure: Measure) -> f64 {
        match measure {
            Measure::Entropy => self.cond_entropy(),
            Measure::Gini => self.cond_gini(),
        }
    }
}

/// `count * ln(count / total)` with the `0 ln 0 = 0` convention.
#[inline]
pub(crate) fn xlogx_ratio(count: u64, total: u64) -> f64 {
    if count == 0 {
        0.0
    } else {
        let c = count as f64;
        c * (c / total as f64).ln()
    }
}

/// Unnormalized entropy of a branch holding `a` and `b` points of each label.
#[inline]
pub(crate) fn branch_cost(a: u64, b: u64) -> f64 {
    let total = a + b;
    if total == 0 {
        return 0.0;
    }
    -(xlogx_ratio(a, total) + xlogx_ratio(b, total))
}

/// Unnormalized Gini mass `2ab / (a + b)` of a branch.
#[inline]
pub(crate) fn branch_gini_mass(a: u64, b: u64) -> f64 {
    let total = a + b;
    if total == 0 {
        return 0.0;
    }
    2.0 * a as f64 * b as f64 / total as f64
}

/// `-count * ln(p)`, where `ln_p` is supplied; zero counts contribute 0 and a
/// positive count against `p = 0` diverges.
#[inline]
fn neg_count_log(count: u64, ln_p: f64) -> f64 {
    if count == 0 {
        0.0
    } else {
        -(count as f64) * ln_p
    }
}

/// Cost of the `x_j = 1` branch alone: `n_j1` times its label entropy.
///
/// This is the key used by the infinite entropy buckets, where every member
/// shares a pure zero branch.
pub fn one_branch_cost(c10: u64, c11: u64) -> Result<f64> {
    if c10 + c11 == 0 {
        return Err(Error::InconsistentCounts(
            "one-branch cost needs at least one point".into(),
        ));
    }
    Ok(branch_cost(c10, c11))
}

/// Entropy key `K(c10, c11, theta)` from precomputed `ln(theta)` and `ln(1 - theta)`.
#[inline]
pub(crate) fn entropy_key(c10: u64, c11: u64, ln_theta: f64, ln_one_minus: f64) -> f64 {
    branch_cost(c10, c11) + c10 as f64 * ln_one_minus + c11 as f64 * ln_theta
}

#[inline]
pub(crate) fn gini_key(c10: u64, c11: u64, theta: f64) -> f64 {
    let n1 = c10 + c11;
    if n1 == 0 {
        return 0.0;
    }
    let cross = 2.0 * c10 as f64 * c11 as f64 / n1 as f64;
    if theta >= 0.5 {
        cross - 2.0 * c10 as f64 * theta
    } else {
        cross - 2.0 * c11 as f64 * (1.0 - theta)
    }
}

#[inline]
fn gini_offset(c0: u64, c1: u64, theta: f64) -> f64 {
    if theta >= 0.5 {
        2.0 * c0 as f64 * theta
    } else {
        2.0 * c1 as f64 * (1.0 - theta)
    }
}

/// Splits `n * impurity(D | j, theta)` into a feature-independent part `C`
/// and a part `K` that depends only on the one-side counters.
pub fn decomp_terms(
    c0: u64,
    c1: u64,
    c10: u64,
    c11: u64,
    theta: f64,
    measure: Measure,
) -> Result<(f64, f64)> {
    if c10 > c0 || c11 > c1 {
        return Err(Error::InconsistentCounts(format!(
            "one-side counts ({c10}, {c11}) exceed label counts ({c0}, {c1})"
        )));
    }
    check_ratio(theta)?;
    match measure {
        Measure::Entropy => {
            if theta == 0.0 || theta == 1.0 {
                return Err(Error::BoundaryTheta(theta));
            }
            let ln_t = theta.ln();
            let ln_1mt = (-theta).ln_1p();
            let c = -(c0 as f64) * ln_1mt - c1 as f64 * ln_t;
            Ok((c, entropy_key(c10, c11, ln_t, ln_1mt)))
        }
        Measure::Gini => Ok((gini_offset(c0, c1, theta), gini_key(c10, c11, theta))),
    }
}

fn check_ratio(theta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&theta) {
        Ok(())
    } else {
        Err(Error::RatioOutOfRange(theta))
    }
}

/// Global counts plus one-side counts for every feature seen with value 1.
#[derive(Debug, Clone, Default)]
pub struct CounterStore {
    globals: GlobalCounts,
    features: HashMap<FeatureId, FeatureOneSide>,
}

impl CounterStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn ingest(&mut self, p: &SparsePoint) {
        let g = &mut self.globals;
        g.n += 1;
        if p.label {
            g.c1 += 1;
        } else {
            g.c0 += 1;
        }
        for &j in &p.ones {
            let f = self.features.entry(j).or_default();
            f.n1 += 1;
            if p.label {
                f.c11 += 1;
            } else {
                f.c10 += 1;
            }
        }
    }

    pub fn globals(&self) -> GlobalCounts {
        self.globals
    }

    pub fn feature(&self, j: FeatureId) -> Option<FeatureOneSide> {
        self.features.get(&j).copied()
    }

    pub fn is_tracked(&self, j: FeatureId) -> bool {
        self.features.contains_key(&j)
    }

    pub fn tracked(&self) -> usize {
        self.features.len()
    }

    /// Tracked features in unspecified order.
    pub fn features(&self) -> impl Iterator<Item = (FeatureId, FeatureOneSide)> + '_ {
        self.features.iter().map(|(&j, &f)| (j, f))
    }

    pub fn counts(&self, j: FeatureId) -> Result<SplitCounts> {
        self.feature(j)
            .map(|f| SplitCounts::new(self.globals, f))
            .ok_or(Error::UnknownFeature(j))
    }

    pub fn rho(&self, j: FeatureId) -> Result<f64> {
        Ok(self.counts(j)?.rho())
    }

    pub fn impurity(&self, measure: Measure) -> Result<f64> {
        let GlobalCounts { n, c0, c1 } = self.globals;
        if n == 0 {
            return Err(Error::EmptyStore);
        }
        Ok(match measure {
            Measure::Entropy => branch_cost(c0, c1) / n as f64,
            Measure::Gini => branch_gini_mass(c0, c1) / n as f64,
        })
    }

    pub fn cond_impurity(&self, j: FeatureId, measure: Measure) -> Result<f64> {
        Ok(self.counts(j)?.cond_impurity(measure))
    }

    /// Conditional impurity with the zero-branch label rate fixed to `theta`.
    ///
    /// For entropy, a positive count against a zero probability yields
    /// `f64::INFINITY`.
    pub fn cond_impurity_at(&self, j: FeatureId, theta: f64, measure: Measure) -> Result<f64> {
        check_ratio(theta)?;
        let s = self.counts(j)?;
        let n = s.n as f64;
        Ok(match measure {
            Measure::Entropy => {
                let zero_side =
                    neg_count_log(s.c00(), (-theta).ln_1p()) + neg_count_log(s.c01(), theta.ln());
                (zero_side + branch_cost(s.c10, s.c11)) / n
            }
            Measure::Gini => {
                let zero_side = if theta >= 0.5 {
                    s.c00() as f64 * theta
                } else {
                    s.c01() as f64 * (1.0 - theta)
                };
                branch_gini_mass(s.c10, s.c11) / n + 2.0 * zero_side / n
            }
        })
    }

    pub fn info_gain(&self, j: FeatureId) -> Result<f64> {
        let s = self.counts(j)?;
        Ok(self.impurity(Measure::Entropy)? - s.cond_entropy())
    }
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    /// Consistent counters: label counts plus one-side counts bounded by them.
    fn counters() -> impl Strategy<Value = (u64, u64, u64, u64)> {
        (0u64..5000, 0u64..5000)
            .prop_filter("non-empty", |(c0, c1)| c0 + c1 > 0)
            .prop_flat_map(|(c0, c1)| (Just(c0), Just(c1), 0..=c0, 0..=c1))
            .prop_filter("tracked", |(_, _, a, b)| a + b > 0)
    }

    fn store_from(c0: u64, c1: u64, c10: u64, c11: u64) -> CounterStore {
        let mut s = CounterStore::new();
        s.globals = GlobalCounts { n: c0 + c1, c0, c1 };
        s.features.insert(
            0,
            FeatureOneSide {
                n1: c10 + c11,
                c10,
                c11,
            },
        );
        s
    }

    proptest! {
        #[test]
        fn decomposition_identity((c0, c1, c10, c11) in counters(), theta in 0.01f64..0.99) {
            let s = store_from(c0, c1, c10, c11);
            let n = (c0 + c1) as f64;
            for m in [Measure::Entropy, Measure::Gini] {
                let (c, k) = decomp_terms(c0, c1, c10, c11, theta, m).unwrap();
                let direct = n * s.cond_impurity_at(0, theta, m).unwrap();
                prop_assert!((direct - (c + k)).abs() <= 1e-9 * n.max(1.0));
            }
        }

        #[test]
        fn fixed_theta_at_rho_is_exact((c0, c1, c10, c11) in counters()) {
            let s = store_from(c0, c1, c10, c11);
            let rho = s.rho(0).unwrap();
            for m in [Measure::Entropy, Measure::Gini] {
                let a = s.cond_impurity_at(0, rho, m).unwrap();
                let b = s.cond_impurity(0, m).unwrap();
                prop_assert!((a - b).abs() <= 1e-12 * b.max(f64::MIN_POSITIVE));
            }
        }

        #[test]
        fn fixed_theta_bounds_entropy((c0, c1, c10, c11) in counters(), theta in 0.0f64..=1.0) {
            let s = store_from(c0, c1, c10, c11);
            let exact = s.cond_impurity(0, Measure::Entropy).unwrap();
            let at = s.cond_impurity_at(0, theta, Measure::Entropy).unwrap();
            prop_assert!(at >= exact - 1e-12 * exact.max(1.0));
        }

        #[test]
        fn conditioning_reduces_entropy((c0, c1, c10, c11) in counters()) {
            let s = store_from(c0, c1, c10, c11);
            let h = s.impurity(Measure::Entropy).unwrap();
            let hc = s.cond_impurity(0, Measure::Entropy).unwrap();
            prop_assert!(hc <= h + 1e-12);
        }
    }
}
