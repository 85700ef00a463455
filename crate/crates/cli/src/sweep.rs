use std::time::Instant;

use clap::ValueEnum;
use rayon::prelude::*;
use serde::Serialize;
use sparsesplit::{generate, GenConfig};

use crate::{Algorithm, CliError, Clock};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepAxis {
    Alpha,
    N,
    /// Noise dimension `d2`; density follows `q = noise_per_point / d2`.
    Dim,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Alpha => "alpha",
            SweepAxis::N => "n",
            SweepAxis::Dim => "dim",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub algorithms: Vec<Algorithm>,
    pub repeats: usize,
    /// Repeat `r` uses seed `seed + r`.
    pub seed: u64,
    /// Base stream; the swept field overrides it.
    pub base: GenConfig,
    pub alpha: f64,
    pub noise_per_point: f64,
    pub clock: Clock,
    /// Worker threads; 0 lets rayon decide.
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub axis: &'static str,
    pub value: f64,
    pub algo: &'static str,
    pub repeats: usize,
    pub mean_total_ns: f64,
    pub mean_point_ns: f64,
    #[serde(rename = "mean_nonempty_T")]
    pub mean_nonempty_t: f64,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.values.is_empty() || self.algorithms.is_empty() {
            return Err(CliError::Usage(
                "sweep needs at least one value and one algorithm".into(),
            ));
        }
        if self.repeats == 0 {
            return Err(CliError::Usage("repeats must be at least 1".into()));
        }
        for &v in &self.values {
            let ok = match self.axis {
                SweepAxis::Alpha => v > 0.0 && v.is_finite(),
                SweepAxis::N | SweepAxis::Dim => v >= 1.0 && v.fract() == 0.0,
            };
            if !ok {
                return Err(CliError::Usage(format!(
                    "invalid {} value {v}",
                    self.axis.name()
                )));
            }
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(CliError::Usage(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        Ok(())
    }

    fn cell(&self, value: f64, repeat: usize) -> (GenConfig, f64) {
        let mut g = self.base;
        g.seed = self.seed.wrapping_add(repeat as u64);
        let mut alpha = self.alpha;
        match self.axis {
            SweepAxis::Alpha => alpha = value,
            SweepAxis::N => g.n = value as usize,
            SweepAxis::Dim => {
                g.d2 = value as usize;
                g.q = (self.noise_per_point / value).min(1.0);
            }
        }
        (g, alpha)
    }
}

struct CellResult {
    total_ns: u64,
    points: usize,
    nonempty_t: usize,
}

fn run_cell(
    points: &[sparsesplit::SparsePoint],
    algorithm: Algorithm,
    alpha: f64,
    clock: Clock,
) -> Result<CellResult, CliError> {
    let mut engine = algorithm.engine(alpha)?;
    let total_ns = match clock {
        Clock::Monotonic => {
            let start = Instant::now();
            for p in points {
                engine.process(p);
            }
            start.elapsed().as_nanos() as u64
        }
        Clock::Off => {
            for p in points {
                engine.process(p);
            }
            0
        }
    };
    Ok(CellResult {
        total_ns,
        points: points.len(),
        nonempty_t: engine.nonempty_trees(),
    })
}

/// Runs every (value, repeat) cell in parallel and averages per algorithm.
///
/// `mean_nonempty_T` is the tree count after the last point.
pub fn sweep(config: &SweepConfig) -> Result<Vec<SweepRow>, CliError> {
    config.validate()?;
    let cells: Vec<(usize, usize)> = (0..config.values.len())
        .flat_map(|v| (0..config.repeats).map(move |r| (v, r)))
        .collect();
    let work = || {
        cells
            .par_iter()
            .map(|&(v, r)| {
                let (g, alpha) = config.cell(config.values[v], r);
                let points = generate(&g)?.points;
                config
                    .algorithms
                    .iter()
                    .map(|&a| run_cell(&points, a, alpha, config.clock))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, CliError>>()
    };
    let results = if config.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))?
            .install(work)?
    } else {
        work()?
    };

    let mut rows = Vec::with_capacity(config.values.len() * config.algorithms.len());
    let reps = config.repeats as f64;
    for (v, &value) in config.values.iter().enumerate() {
        for (k, &algo) in config.algorithms.iter().enumerate() {
            let cell = |r: usize| &results[v * config.repeats + r][k];
            let (mut total, mut per_point, mut trees) = (0.0, 0.0, 0.0);
            for r in 0..config.repeats {
                let c = cell(r);
                total += c.total_ns as f64;
                per_point += c.total_ns as f64 / c.points as f64;
                trees += c.nonempty_t as f64;
            }
            rows.push(SweepRow {
                axis: config.axis.name(),
                value,
                algo: algo.name(),
                repeats: config.repeats,
                mean_total_ns: total / reps,
                mean_point_ns: per_point / reps,
                mean_nonempty_t: trees / reps,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(axis: SweepAxis, values: Vec<f64>) -> SweepConfig {
        SweepConfig {
            axis,
            values,
            algorithms: vec![Algorithm::UpdEnt, Algorithm::BaseGini],
            repeats: 2,
            seed: 7,
            base: GenConfig {
                n: 300,
                d1: 5,
                d2: 200,
                q: 0.02,
                seed: 0,
            },
            alpha: 0.1,
            noise_per_point: 4.0,
            clock: Clock::Off,
            threads: 1,
        }
    }

    #[test]
    fn one_row_per_value_and_algorithm() {
        let rows = sweep(&config(SweepAxis::Alpha, vec![0.1, 1.0])).unwrap();
        let keys: Vec<_> = rows.iter().map(|r| (r.value, r.algo)).collect();
        assert_eq!(
            keys,
            vec![
                (0.1, "upd-ent"),
                (0.1, "base-gini"),
                (1.0, "upd-ent"),
                (1.0, "base-gini")
            ]
        );
        assert!(rows
            .iter()
            .all(|r| r.repeats == 2 && r.mean_total_ns == 0.0));
        assert!(rows
            .iter()
            .filter(|r| r.algo == "base-gini")
            .all(|r| r.mean_nonempty_t == 0.0));
    }

    #[test]
    fn dim_axis_scales_density() {
        let cfg = config(SweepAxis::Dim, vec![400.0]);
        let (g, alpha) = cfg.cell(400.0, 3);
        assert_eq!((g.d2, g.q, g.seed, alpha), (400, 0.01, 10, 0.1));
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let mut a = config(SweepAxis::N, vec![100.0, 250.0]);
        let b = a.clone();
        a.threads = 3;
        assert_eq!(sweep(&a).unwrap(), sweep(&b).unwrap());
    }

    #[test]
    fn rejects_bad_values() {
        assert!(sweep(&config(SweepAxis::Alpha, vec![0.0])).is_err());
        assert!(sweep(&config(SweepAxis::N, vec![2.5])).is_err());
        assert!(sweep(&config(SweepAxis::Dim, vec![])).is_err());
    }
}
