//! Synthetic `sparse(n, d1, d2, q)` streams.
//!
//! Each informative feature copies the label and is flipped with its own
//! probability `theta_j ~ U[0, 1)`; noise features are independent
//! `Bernoulli(q)` draws. Informative ids are `0..d1`, noise ids
//! `d1..d1 + d2`.
//!
//! Draw order is fixed so a seed always yields the same stream: all `theta_j`
//! in id order, then per point the label, the `d1` flips in id order, and the
//! noise block as geometric gaps between active ids.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};

use crate::counters::{FeatureId, SparsePoint};
use crate::error::{Error, Result};

/// Name recorded in dataset headers; bump when the draw order changes.
pub const GENERATOR: &str = "sparse-chacha8-v1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenConfig {
    pub n: usize,
    pub d1: usize,
    pub d2: usize,
    pub q: f64,
    pub seed: u64,
}

impl GenConfig {
    /// `sparse(10000, 10, 10000, 10/10000)`.
    pub fn default_synthetic(seed: u64) -> Self {
        Self {
            n: 10_000,
            d1: 10,
            d2: 10_000,
            q: 0.001,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("n must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.q) {
            return Err(Error::InvalidConfig(format!(
                "q = {} is outside [0, 1]",
                self.q
            )));
        }
        Ok(())
    }

    pub fn dims(&self) -> usize {
        self.d1 + self.d2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub points: Vec<SparsePoint>,
    pub thetas: Vec<f64>,
}

pub fn generate(config: &GenConfig) -> Result<Dataset> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let thetas: Vec<f64> = (0..config.d1).map(|_| rng.gen::<f64>()).collect();
    let points = draw_points(config, &thetas, &mut rng)?;
    Ok(Dataset { points, thetas })
}

/// Like [`generate`] but with caller-chosen flip probabilities, which must
/// number `d1` and lie in `[0, 1]`.
pub fn generate_with_thetas(config: &GenConfig, thetas: &[f64]) -> Result<Dataset> {
    config.validate()?;
    if thetas.len() != config.d1 || thetas.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(Error::InvalidConfig(format!(
            "expected {} flip probabilities in [0, 1]",
            config.d1
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let points = draw_points(config, thetas, &mut rng)?;
    Ok(Dataset {
        points,
        thetas: thetas.to_vec(),
    })
}

fn draw_points(
    config: &GenConfig,
    thetas: &[f64],
    rng: &mut ChaCha8Rng,
) -> Result<Vec<SparsePoint>> {
    let gaps = if config.q > 0.0 && config.q < 1.0 {
        Some(Geometric::new(config.q).map_err(|e| Error::InvalidConfig(e.to_string()))?)
    } else {
        None
    };
    let d1 = config.d1 as FeatureId;
    let d2 = config.d2 as u64;
    let mut points = Vec::with_capacity(config.n);
    for _ in 0..config.n {
        let label = rng.gen_bool(0.5);
        let mut ones = Vec::new();
        for (j, &theta) in thetas.iter().enumerate() {
            let flip = rng.gen::<f64>() < theta;
            if label ^ flip {
                ones.push(j as FeatureId);
            }
        }
        match &gaps {
            Some(geo) => {
                let mut pos = 0u64;
                loop {
                    pos = pos.saturating_add(geo.sample(rng));
                    if pos >= d2 {
                        break;
                    }
                    ones.push(d1 + pos);
                    pos += 1;
                }
            }
            None if config.q == 1.0 => ones.extend(d1..d1 + d2),
            None => {}
        }
        points.push(SparsePoint::new(ones, label)?);
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize, d1: usize, d2: usize, q: f64, seed: u64) -> GenConfig {
        GenConfig { n, d1, d2, q, seed }
    }

    #[test]
    fn rejects_invalid_config() {
        assert!(generate(&cfg(0, 1, 1, 0.1, 0)).is_err());
        assert!(generate(&cfg(10, 1, 1, 1.5, 0)).is_err());
        assert!(generate(&cfg(10, 1, 1, -0.1, 0)).is_err());
        assert!(generate_with_thetas(&cfg(10, 2, 1, 0.1, 0), &[0.5]).is_err());
    }

    #[test]
    fn zero_density_has_no_noise() {
        let ds = generate(&cfg(500, 3, 100, 0.0, 1)).unwrap();
        assert!(ds.points.iter().all(|p| p.ones().iter().all(|&j| j < 3)));
    }

    #[test]
    fn full_density_activates_every_noise_feature() {
        let ds = generate(&cfg(20, 2, 30, 1.0, 1)).unwrap();
        for p in &ds.points {
            assert_eq!(p.ones().iter().filter(|&&j| j >= 2).count(), 30);
        }
    }

    #[test]
    fn zero_flip_copies_label() {
        let ds = generate_with_thetas(&cfg(300, 2, 50, 0.05, 4), &[0.0, 1.0]).unwrap();
        for p in &ds.points {
            assert_eq!(p.ones().contains(&0), p.label());
            assert_eq!(p.ones().contains(&1), !p.label());
        }
    }

    #[test]
    fn same_seed_same_stream() {
        let a = generate(&cfg(200, 5, 300, 0.02, 42)).unwrap();
        let b = generate(&cfg(200, 5, 300, 0.02, 42)).unwrap();
        let c = generate(&cfg(200, 5, 300, 0.02, 43)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.thetas.len(), 5);
    }

    #[test]
    fn ids_are_in_range_and_sorted() {
        let ds = generate(&cfg(300, 4, 200, 0.05, 9)).unwrap();
        for p in &ds.points {
            assert!(p.ones().windows(2).all(|w| w[0] < w[1]));
            assert!(p.ones().iter().all(|&j| j < 204));
        }
    }

    /// Noise activations over 30 seeds are Binomial(30 n d2, q); allow three
    /// standard errors.
    #[test]
    fn noise_density_matches_q() {
        let (n, d1, d2, q) = (10_000usize, 10usize, 10_000usize, 0.001);
        let seeds = 30;
        let trials = (seeds * n * d2) as f64;
        let mut active = 0usize;
        for seed in 0..seeds as u64 {
            let ds = generate(&cfg(n, d1, d2, q, seed)).unwrap();
            active += ds
                .points
                .iter()
                .map(|p| p.ones().iter().filter(|&&j| j >= d1 as u64).count())
                .sum::<usize>();
        }
        let se = (q * (1.0 - q) / trials).sqrt();
        let density = active as f64 / trials;
        assert!((density - q).abs() <= 3.0 * se, "{density}");
    }

    #[test]
    fn labels_are_balanced() {
        let (n, seeds) = (10_000usize, 30);
        let mut c1 = 0usize;
        for seed in 0..seeds as u64 {
            let ds = generate(&cfg(n, 1, 0, 0.0, seed)).unwrap();
            c1 += ds.points.iter().filter(|p| p.label()).count();
        }
        let total = (n * seeds) as f64;
        let bound = 3.0 * (0.25 / total).sqrt();
        assert!((c1 as f64 / total - 0.5).abs() <= bound);
    }
}
