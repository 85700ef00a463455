//! Interval schemes over the zero-branch label rate `rho`.
//!
//! The entropy scheme uses doubly-exponential intervals that get finer towards
//! 0 and 1, mirrored around 1/2, plus the point buckets `{0}` and `{1}`. The
//! Gini scheme uses equal-width intervals of width `beta`, overlapping by
//! `beta / 2`.

use std::fmt;

use crate::error::{Error, Result};

/// Index of an entropy bucket. Finite indices are never zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EntBinId {
    NegInf,
    Finite(i32),
    PosInf,
}

impl EntBinId {
    pub fn finite(i: i32) -> Result<Self> {
        if i == 0 {
            Err(Error::InvalidBin("entropy bucket 0 does not exist".into()))
        } else {
            Ok(EntBinId::Finite(i))
        }
    }

    pub fn is_infinite(self) -> bool {
        !matches!(self, EntBinId::Finite(_))
    }

    /// Next finite bucket towards 0 on the rho axis, skipping index 0.
    /// Infinite buckets have no finite neighbours and return themselves.
    pub fn lower(self) -> Self {
        match self {
            EntBinId::Finite(1) => EntBinId::Finite(-1),
            EntBinId::Finite(i) => EntBinId::Finite(i - 1),
            other => other,
        }
    }

    pub fn higher(self) -> Self {
        match self {
            EntBinId::Finite(-1) => EntBinId::Finite(1),
            EntBinId::Finite(i) => EntBinId::Finite(i + 1),
            other => other,
        }
    }

    /// Every bucket in `[lo, hi]`, skipping 0. A range with an infinite
    /// endpoint has no finite interior and yields only its endpoints.
    pub fn range(lo: Self, hi: Self) -> impl Iterator<Item = EntBinId> {
        let mut next = (lo <= hi).then_some(lo);
        std::iter::from_fn(move || {
            let cur = next?;
            next = match (cur, hi) {
                _ if cur == hi => None,
                (EntBinId::Finite(_), EntBinId::Finite(_)) => Some(cur.higher()),
                _ => Some(hi),
            };
            Some(cur)
        })
    }
}

impl fmt::Display for EntBinId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntBinId::NegInf => f.write_str("-inf"),
            EntBinId::Finite(i) => write!(f, "{i}"),
            EntBinId::PosInf => f.write_str("+inf"),
        }
    }
}

/// Index of a Gini bucket, `0 ..= Scheme::gini_max_index()`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GiniBinId(pub u32);

impl fmt::Display for GiniBinId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Closed interval `[s, t]` with its centroid `mu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bin {
    pub s: f64,
    pub t: f64,
    pub mu: f64,
}

impl Bin {
    pub fn contains(&self, rho: f64) -> bool {
        self.s <= rho && rho <= self.t
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scheme {
    alpha: f64,
    beta: f64,
    ln_growth: f64,
}

impl Scheme {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidAlpha(alpha));
        }
        Ok(Self {
            alpha,
            beta: alpha / (alpha + 2.0),
            ln_growth: alpha.ln_1p(),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `(1 + alpha)^k` for the exponent of a depth-`k` entropy bucket.
    fn growth(&self, k: i32) -> f64 {
        (k as f64 * self.ln_growth).exp()
    }

    /// `2^{-(1+alpha)^k}`: lower bound of bucket `-k`, upper bound of `-(k-1)`.
    fn neg_bound(&self, k: i32) -> f64 {
        (-self.growth(k)).exp2()
    }

    pub fn ent_bin(&self, i: EntBinId) -> Result<Bin> {
        Ok(match i {
            EntBinId::NegInf => Bin {
                s: 0.0,
                t: 0.0,
                mu: 0.0,
            },
            EntBinId::PosInf => Bin {
                s: 1.0,
                t: 1.0,
                mu: 1.0,
            },
            EntBinId::Finite(0) => {
                return Err(Error::InvalidBin("entropy bucket 0 does not exist".into()))
            }
            EntBinId::Finite(i) if i < 0 => {
                let k = -i;
                let s = self.neg_bound(k);
                Bin {
                    s,
                    t: self.neg_bound(k - 1),
                    mu: s,
                }
            }
            EntBinId::Finite(k) => {
                let t = 1.0 - self.neg_bound(k);
                Bin {
                    s: 1.0 - self.neg_bound(k - 1),
                    t,
                    mu: t,
                }
            }
        })
    }

    /// `ln(mu)` and `ln(1 - mu)` of a finite entropy bucket, computed without
    /// cancellation near 0 or 1.
    pub(crate) fn ent_centroid_logs(&self, i: i32) -> (f64, f64) {
        debug_assert!(i != 0);
        let k = i.abs();
        let ln_small = -self.growth(k) * std::f64::consts::LN_2;
        let ln_large = (-self.neg_bound(k)).ln_1p();
        if i < 0 {
            (ln_small, ln_large)
        } else {
            (ln_large, ln_small)
        }
    }

    /// Locates an entropy bucket containing `rho`.
    pub fn ent_index(&self, rho: f64) -> Result<EntBinId> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::RatioOutOfRange(rho));
        }
        if rho == 0.0 {
            return Ok(EntBinId::NegInf);
        }
        if rho == 1.0 {
            return Ok(EntBinId::PosInf);
        }
        if rho == 0.5 {
            return Ok(EntBinId::Finite(1));
        }
        let (tail, sign) = if rho < 0.5 { (rho, -1) } else { (1.0 - rho, 1) };
        let depth = ((-tail.log2()).ln() / self.ln_growth).ceil();
        let k = (depth as i32).max(1);
        let guess = EntBinId::Finite(sign * k);
        if self.ent_bin(guess)?.contains(rho) {
            return Ok(guess);
        }
        // libm rounding at a bucket edge; the true bucket is adjacent
        for k in [k - 1, k + 1, k - 2, k + 2] {
            if k >= 1 {
                let id = EntBinId::Finite(sign * k);
                if self.ent_bin(id)?.contains(rho) {
                    return Ok(id);
                }
            }
        }
        Ok(guess)
    }

    /// Largest valid Gini index, `floor(2 (alpha + 2) / alpha)`.
    pub fn gini_max_index(&self) -> u32 {
        (2.0 * (self.alpha + 2.0) / self.alpha).floor() as u32
    }

    pub fn gini_bin_count(&self) -> usize {
        self.gini_max_index() as usize + 1
    }

    pub fn gini_bin(&self, i: GiniBinId) -> Result<Bin> {
        if i.0 > self.gini_max_index() {
            return Err(Error::InvalidBin(format!(
                "Gini bucket {} exceeds {}",
                i.0,
                self.gini_max_index()
            )));
        }
        let half = i.0 as f64 / 2.0;
        Ok(Bin {
            s: (half - 0.25) * self.beta,
            t: (half + 0.75) * self.beta,
            mu: (half + 0.25) * self.beta,
        })
    }

    pub fn gini_index(&self, rho: f64) -> Result<GiniBinId> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::RatioOutOfRange(rho));
        }
        let max = self.gini_max_index();
        let raw = (2.0 * rho * (self.alpha + 2.0) / self.alpha).floor() as u32;
        let guess = raw.min(max);
        if self.gini_bin(GiniBinId(guess))?.contains(rho) {
            return Ok(GiniBinId(guess));
        }
        let neighbours = [guess.checked_sub(1), Some(guess + 1)];
        for i in neighbours.into_iter().flatten().filter(|&i| i <= max) {
            if self.gini_bin(GiniBinId(i))?.contains(rho) {
                return Ok(GiniBinId(i));
            }
        }
        Ok(GiniBinId(guess))
    }
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn index_lands_in_its_bucket(rho in 0.0f64..=1.0, a in 0usize..4) {
            let alpha = [0.01, 0.1, 1.0, 5.0][a];
            let s = Scheme::new(alpha).unwrap();
            let e = s.ent_index(rho).unwrap();
            prop_assert!(s.ent_bin(e).unwrap().contains(rho));
            let g = s.gini_index(rho).unwrap();
            prop_assert!(s.gini_bin(g).unwrap().contains(rho));
        }

        #[test]
        fn rational_rates_land_in_their_bucket(num in 0u64..100_000, extra in 0u64..100_000, alpha in 0.005f64..8.0) {
            let rho = num as f64 / (num + extra).max(1) as f64;
            let s = Scheme::new(alpha).unwrap();
            prop_assert!(s.ent_bin(s.ent_index(rho).unwrap()).unwrap().contains(rho));
            prop_assert!(s.gini_bin(s.gini_index(rho).unwrap()).unwrap().contains(rho));
        }
    }
}
