//! Streaming (1+alpha)-approximate split selection under conditional entropy.
//!
//! Every tracked feature `j` owns a residency range `[a(j), b(j)]` of entropy
//! buckets, at least one of which contains its zero-branch label rate. The
//! feature sits in the candidate tree `T_i` of every bucket in that range,
//! keyed by the feature-local part of the entropy evaluated at the bucket
//! centroid. Two more trees per bucket detect when the rate drifts out of the
//! range: `L_{a(j)}` keyed `s_a n_j1 - c_j11` and `U_{b(j)}` keyed
//! `t_b n_j1 - c_j11`. Comparing those keys against `s n - c1` (resp.
//! `t n - c1`) is equivalent to comparing the rate with `s` (resp. `t`), so
//! the check never touches the derived zero-side counters.
//!
//! The infinite buckets hold features whose zero branch is pure. Their
//! centroid key diverges, so they are keyed by the finite one-branch cost,
//! which orders members the same way as their exact scores.

use std::collections::{BTreeMap, HashMap};
use std::ops::Bound::Excluded;

use crate::binning::{EntBinId, Scheme};
use crate::counters::{
    branch_cost, entropy_key, CounterStore, FeatureId, FeatureOneSide, GlobalCounts, Measure,
    SparsePoint, SplitCounts,
};
use crate::engine::{pick_best, SplitDecision, SplitEngine};
use crate::error::Result;
use crate::keyed::KeyedSet;

/// Residency range of one feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureSlot {
    pub a: EntBinId,
    pub b: EntBinId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EntStats {
    pub nonempty_t: usize,
    /// Placements at `ind(rho)`: active features plus departures from the
    /// infinite buckets.
    pub relocations: u64,
    /// One-bucket extensions of `a(j)` or `b(j)` by the finite sweeps.
    pub extensions: u64,
}

#[derive(Debug, Clone, Copy)]
struct BucketConsts {
    s: f64,
    t: f64,
    ln_mu: f64,
    ln_one_minus_mu: f64,
}

/// Constants of the finite buckets, indexed by depth `|i|`.
#[derive(Debug, Clone)]
struct ConstTable {
    scheme: Scheme,
    neg: Vec<BucketConsts>,
    pos: Vec<BucketConsts>,
}

impl ConstTable {
    /// Rates reachable with 64-bit counters are at least `2^-64` away from 0
    /// and 1, so depths beyond `log_{1+alpha}(64)` never occur.
    fn new(scheme: Scheme) -> Self {
        let max_depth = (64f64.ln() / scheme.alpha().ln_1p()).ceil() as i32 + 2;
        let build = |sign: i32| {
            (1..=max_depth)
                .map(|k| Self::compute(&scheme, sign * k))
                .collect::<Vec<_>>()
        };
        Self {
            scheme,
            neg: build(-1),
            pos: build(1),
        }
    }

    fn compute(scheme: &Scheme, i: i32) -> BucketConsts {
        let bin = scheme
            .ent_bin(EntBinId::Finite(i))
            .expect("finite non-zero bucket");
        let (ln_mu, ln_one_minus_mu) = scheme.ent_centroid_logs(i);
        BucketConsts {
            s: bin.s,
            t: bin.t,
            ln_mu,
            ln_one_minus_mu,
        }
    }

    fn get(&self, i: i32) -> BucketConsts {
        let table = if i < 0 { &self.neg } else { &self.pos };
        match table.get(i.unsigned_abs() as usize - 1) {
            Some(c) => *c,
            None => Self::compute(&self.scheme, i),
        }
    }

    fn bounds(&self, bin: EntBinId) -> (f64, f64) {
        match bin {
            EntBinId::NegInf => (0.0, 0.0),
            EntBinId::PosInf => (1.0, 1.0),
            EntBinId::Finite(i) => {
                let c = self.get(i);
                (c.s, c.t)
            }
        }
    }

    fn t_key(&self, bin: EntBinId, f: FeatureOneSide) -> f64 {
        match bin {
            EntBinId::Finite(i) => {
                let c = self.get(i);
                entropy_key(f.c10, f.c11, c.ln_mu, c.ln_one_minus_mu)
            }
            _ => branch_cost(f.c10, f.c11),
        }
    }

    fn l_key(&self, bin: EntBinId, f: FeatureOneSide) -> f64 {
        self.bounds(bin).0 * f.n1 as f64 - f.c11 as f64
    }

    fn u_key(&self, bin: EntBinId, f: FeatureOneSide) -> f64 {
        self.bounds(bin).1 * f.n1 as f64 - f.c11 as f64
    }

    fn l_threshold(&self, bin: EntBinId, g: GlobalCounts) -> f64 {
        self.bounds(bin).0 * g.n as f64 - g.c1 as f64
    }

    fn u_threshold(&self, bin: EntBinId, g: GlobalCounts) -> f64 {
        self.bounds(bin).1 * g.n as f64 - g.c1 as f64
    }
}

fn insert_into(trees: &mut BTreeMap<EntBinId, KeyedSet>, bin: EntBinId, key: f64, j: FeatureId) {
    trees.entry(bin).or_default().insert(key, j);
}

fn remove_from(trees: &mut BTreeMap<EntBinId, KeyedSet>, bin: EntBinId, key: f64, j: FeatureId) {
    if let Some(set) = trees.get_mut(&bin) {
        set.remove(key, j);
        if set.is_empty() {
            trees.remove(&bin);
        }
    }
}

/// The entropy split engine.
#[derive(Debug, Clone)]
pub struct UpdEnt {
    scheme: Scheme,
    consts: ConstTable,
    store: CounterStore,
    slots: HashMap<FeatureId, FeatureSlot>,
    t_trees: BTreeMap<EntBinId, KeyedSet>,
    l_trees: BTreeMap<EntBinId, KeyedSet>,
    u_trees: BTreeMap<EntBinId, KeyedSet>,
    relocations: u64,
    extensions: u64,
}

impl UpdEnt {
    pub fn new(alpha: f64) -> Result<Self> {
        let scheme = Scheme::new(alpha)?;
        Ok(Self {
            scheme,
            consts: ConstTable::new(scheme),
            store: CounterStore::new(),
            slots: HashMap::new(),
            t_trees: BTreeMap::new(),
            l_trees: BTreeMap::new(),
            u_trees: BTreeMap::new(),
            relocations: 0,
            extensions: 0,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.scheme.alpha()
    }

    pub fn slot(&self, j: FeatureId) -> Option<FeatureSlot> {
        self.slots.get(&j).copied()
    }

    /// Members of `T_bin` in key order.
    pub fn tree_members(&self, bin: EntBinId) -> Vec<(f64, FeatureId)> {
        self.t_trees
            .get(&bin)
            .map(|t| t.iter().collect())
            .unwrap_or_default()
    }

    pub fn nonempty_buckets(&self) -> Vec<EntBinId> {
        self.t_trees.keys().copied().collect()
    }

    pub fn stats(&self) -> EntStats {
        EntStats {
            nonempty_t: self.t_trees.len(),
            relocations: self.relocations,
            extensions: self.extensions,
        }
    }

    fn one_side(&self, j: FeatureId) -> FeatureOneSide {
        self.store.feature(j).expect("slotted features are tracked")
    }

    /// Removes `j` from every tree. Keys are recomputed from the current
    /// counters, so this must run before those counters change.
    fn detach(&mut self, j: FeatureId) {
        let Some(slot) = self.slots.remove(&j) else {
            return;
        };
        let f = self.one_side(j);
        for bin in EntBinId::range(slot.a, slot.b) {
            remove_from(&mut self.t_trees, bin, self.consts.t_key(bin, f), j);
        }
        remove_from(&mut self.l_trees, slot.a, self.consts.l_key(slot.a, f), j);
        remove_from(&mut self.u_trees, slot.b, self.consts.u_key(slot.b, f), j);
    }

    /// Places a detached `j` in the single bucket containing its current rate.
    fn attach(&mut self, j: FeatureId) {
        let f = self.one_side(j);
        let rho = SplitCounts::new(self.store.globals(), f).rho();
        let bin = self.scheme.ent_index(rho).expect("rates lie in [0, 1]");
        insert_into(&mut self.t_trees, bin, self.consts.t_key(bin, f), j);
        insert_into(&mut self.l_trees, bin, self.consts.l_key(bin, f), j);
        insert_into(&mut self.u_trees, bin, self.consts.u_key(bin, f), j);
        self.slots.insert(j, FeatureSlot { a: bin, b: bin });
        self.relocations += 1;
    }

    fn lower_a(&mut self, j: FeatureId, from: EntBinId) {
        let f = self.one_side(j);
        let to = from.lower();
        remove_from(&mut self.l_trees, from, self.consts.l_key(from, f), j);
        insert_into(&mut self.t_trees, to, self.consts.t_key(to, f), j);
        insert_into(&mut self.l_trees, to, self.consts.l_key(to, f), j);
        self.slots.get_mut(&j).expect("slotted").a = to;
        self.extensions += 1;
    }

    fn raise_b(&mut self, j: FeatureId, from: EntBinId) {
        let f = self.one_side(j);
        let to = from.higher();
        remove_from(&mut self.u_trees, from, self.consts.u_key(from, f), j);
        insert_into(&mut self.t_trees, to, self.consts.t_key(to, f), j);
        insert_into(&mut self.u_trees, to, self.consts.u_key(to, f), j);
        self.slots.get_mut(&j).expect("slotted").b = to;
        self.extensions += 1;
    }

    fn relocate_all(&mut self, ids: Vec<FeatureId>) {
        for j in ids {
            self.detach(j);
            self.attach(j);
        }
    }

    /// Features leave the point buckets directly for `ind(rho)`.
    fn sweep_infinite(&mut self) {
        let g = self.store.globals();
        let leaving = self
            .u_trees
            .get(&EntBinId::NegInf)
            .map(|u| u.ids_above(self.consts.u_threshold(EntBinId::NegInf, g)))
            .unwrap_or_default();
        self.relocate_all(leaving);

        let leaving = self
            .l_trees
            .get(&EntBinId::PosInf)
            .map(|l| l.ids_below(self.consts.l_threshold(EntBinId::PosInf, g)))
            .unwrap_or_default();
        self.relocate_all(leaving);
    }

    /// Descending over finite `L` buckets, lowering `a(j)` one bucket per
    /// violation. A lowered feature lands in a bucket the sweep visits later.
    fn sweep_lower(&mut self) {
        let g = self.store.globals();
        let mut cursor = self
            .l_trees
            .range((Excluded(EntBinId::NegInf), Excluded(EntBinId::PosInf)))
            .next_back()
            .map(|(b, _)| *b);
        while let Some(bin) = cursor {
            let violators = self
                .l_trees
                .get(&bin)
                .map(|l| l.ids_below(self.consts.l_threshold(bin, g)))
                .unwrap_or_default();
            for j in violators {
                self.lower_a(j, bin);
            }
            cursor = self
                .l_trees
                .range((Excluded(EntBinId::NegInf), Excluded(bin)))
                .next_back()
                .map(|(b, _)| *b);
        }
    }

    fn sweep_raise(&mut self) {
        let g = self.store.globals();
        let mut cursor = self
            .u_trees
            .range((Excluded(EntBinId::NegInf), Excluded(EntBinId::PosInf)))
            .next()
            .map(|(b, _)| *b);
        while let Some(bin) = cursor {
            let violators = self
                .u_trees
                .get(&bin)
                .map(|u| u.ids_above(self.consts.u_threshold(bin, g)))
                .unwrap_or_default();
            for j in violators {
                self.raise_b(j, bin);
            }
            cursor = self
                .u_trees
                .range((Excluded(bin), Excluded(EntBinId::PosInf)))
                .next()
                .map(|(b, _)| *b);
        }
    }

    /// Checks residency, tree membership and key freshness. Returns one
    /// message per problem found.
    pub fn check_invariants(&self) -> Vec<String> {
        let mut problems = Vec::new();
        let g = self.store.globals();
        let mut expect_t: BTreeMap<EntBinId, Vec<(f64, FeatureId)>> = BTreeMap::new();
        let mut expect_l: BTreeMap<EntBinId, Vec<(f64, FeatureId)>> = BTreeMap::new();
        let mut expect_u: BTreeMap<EntBinId, Vec<(f64, FeatureId)>> = BTreeMap::new();

        for (j, f) in self.store.features() {
            let Some(slot) = self.slots.get(&j) else {
                problems.push(format!("feature {j} is tracked but has no slot"));
                continue;
            };
            let FeatureSlot { a, b } = *slot;
            if a > b {
                problems.push(format!("feature {j}: a = {a} > b = {b}"));
                continue;
            }
            if (a.is_infinite() || b.is_infinite()) && a != b {
                problems.push(format!("feature {j}: infinite range [{a}, {b}]"));
            }
            let below = self.consts.l_key(a, f) < self.consts.l_threshold(a, g);
            let above = self.consts.u_key(b, f) > self.consts.u_threshold(b, g);
            if below || above {
                let rho = SplitCounts::new(g, f).rho();
                problems.push(format!(
                    "feature {j}: rate {rho} outside buckets [{a}, {b}]"
                ));
            }
            for bin in EntBinId::range(a, b) {
                expect_t
                    .entry(bin)
                    .or_default()
                    .push((self.consts.t_key(bin, f), j));
            }
            expect_l
                .entry(a)
                .or_default()
                .push((self.consts.l_key(a, f), j));
            expect_u
                .entry(b)
                .or_default()
                .push((self.consts.u_key(b, f), j));
        }
        for &j in self.slots.keys() {
            if !self.store.is_tracked(j) {
                problems.push(format!("slot for untracked feature {j}"));
            }
        }
        for (name, actual, expected) in [
            ("T", &self.t_trees, expect_t),
            ("L", &self.l_trees, expect_l),
            ("U", &self.u_trees, expect_u),
        ] {
            compare_trees(name, actual, expected, &mut problems);
        }
        problems
    }
}

pub(crate) fn compare_trees<B: Ord + Copy + std::fmt::Display>(
    name: &str,
    actual: &BTreeMap<B, KeyedSet>,
    mut expected: BTreeMap<B, Vec<(f64, FeatureId)>>,
    problems: &mut Vec<String>,
) {
    for (bin, set) in actual {
        if set.is_empty() {
            problems.push(format!("{name}_{bin} is empty but not pruned"));
        }
        let mut want = expected.remove(bin).unwrap_or_default();
        want.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        let have: Vec<_> = set.iter().collect();
        let same = have.len() == want.len()
            && have
                .iter()
                .zip(&want)
                .all(|(h, w)| h.1 == w.1 && h.0.to_bits() == w.0.to_bits());
        if !same {
            problems.push(format!("{name}_{bin} holds {have:?}, expected {want:?}"));
        }
    }
    for (bin, want) in expected {
        problems.push(format!("{name}_{bin} missing, expected {want:?}"));
    }
}

impl SplitEngine for UpdEnt {
    fn process(&mut self, p: &SparsePoint) -> SplitDecision {
        for &j in p.ones() {
            self.detach(j);
        }
        self.store.ingest(p);
        for &j in p.ones() {
            self.attach(j);
        }
        self.sweep_infinite();
        self.sweep_lower();
        self.sweep_raise();
        self.current_best()
    }

    /// Minimum-key member of each candidate tree, then the exact argmin.
    fn current_best(&self) -> SplitDecision {
        let firsts = self
            .t_trees
            .values()
            .filter_map(|t| t.first().map(|(_, j)| j));
        pick_best(&self.store, Measure::Entropy, firsts)
    }

    fn store(&self) -> &CounterStore {
        &self.store
    }

    fn measure(&self) -> Measure {
        Measure::Entropy
    }

    fn nonempty_trees(&self) -> usize {
        self.t_trees.len()
    }
}
