use std::fs::File;
use std::io::{BufReader, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::ValueEnum;
use serde::Serialize;
use sparsesplit::stream_io::read_dataset;
use sparsesplit::{
    exact_best, generate, Baseline, GenConfig, Measure, SparsePoint, SplitDecision, SplitEngine,
    UpdEnt, UpdGini,
};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum)]
pub enum Algorithm {
    UpdEnt,
    UpdGini,
    BaseEnt,
    BaseGini,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::UpdEnt,
        Algorithm::UpdGini,
        Algorithm::BaseEnt,
        Algorithm::BaseGini,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::UpdEnt => "upd-ent",
            Algorithm::UpdGini => "upd-gini",
            Algorithm::BaseEnt => "base-ent",
            Algorithm::BaseGini => "base-gini",
        }
    }

    pub fn measure(self) -> Measure {
        match self {
            Algorithm::UpdEnt | Algorithm::BaseEnt => Measure::Entropy,
            Algorithm::UpdGini | Algorithm::BaseGini => Measure::Gini,
        }
    }

    pub fn engine(self, alpha: f64) -> Result<Box<dyn SplitEngine + Send>, sparsesplit::Error> {
        Ok(match self {
            Algorithm::UpdEnt => Box::new(UpdEnt::new(alpha)?),
            Algorithm::UpdGini => Box::new(UpdGini::new(alpha)?),
            Algorithm::BaseEnt => Box::new(Baseline::new(Measure::Entropy)),
            Algorithm::BaseGini => Box::new(Baseline::new(Measure::Gini)),
        })
    }
}

/// Whether per-update wall time is measured. `Off` writes zeros, which makes
/// the CSV a pure function of the input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Clock {
    #[default]
    Monotonic,
    Off,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    File(PathBuf),
    Generated(GenConfig),
}

impl Source {
    pub fn load(&self) -> Result<Vec<SparsePoint>, CliError> {
        match self {
            Source::File(path) => {
                let file = File::open(path).map_err(|e| CliError::Io {
                    context: path.display().to_string(),
                    source: e,
                })?;
                read_dataset(BufReader::new(file))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(CliError::from)
            }
            Source::Generated(cfg) => Ok(generate(cfg)?.points),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub source: Source,
    pub algorithm: Algorithm,
    pub alpha: f64,
    pub oracle: bool,
    pub report_every: usize,
    pub clock: Clock,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(CliError::Usage(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        if self.report_every == 0 {
            return Err(CliError::Usage("report-every must be at least 1".into()));
        }
        Ok(())
    }
}

/// One CSV row. Column order is part of the output format.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricRow {
    /// Points processed so far, or `summary` for the closing row.
    pub point_index: String,
    pub algo: &'static str,
    pub alpha: f64,
    /// Wall time of this update; the mean update time on the summary row.
    pub point_ns: u64,
    pub cum_ns: u64,
    #[serde(rename = "nonempty_T")]
    pub nonempty_t: usize,
    pub best_feature: Option<u64>,
    pub best_score: Option<f64>,
    pub oracle_feature: Option<u64>,
    pub oracle_score: Option<f64>,
    /// `best_score / oracle_score`; the largest ratio seen on the summary row.
    pub ratio: Option<f64>,
}

pub const CSV_COLUMNS: [&str; 11] = [
    "point_index",
    "algo",
    "alpha",
    "point_ns",
    "cum_ns",
    "nonempty_T",
    "best_feature",
    "best_score",
    "oracle_feature",
    "oracle_score",
    "ratio",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub rows: Vec<MetricRow>,
    /// Updates whose score exceeded `(1 + alpha)` times the exact optimum.
    pub violations: usize,
    /// Updates whose score equalled the exact optimum.
    pub optimal: usize,
    pub updates: usize,
    pub total_ns: u64,
}

/// Whether `score` is within `1 + alpha` of `optimum`. NaN fails.
pub fn within_bound(score: f64, optimum: f64, alpha: f64) -> bool {
    score <= (1.0 + alpha) * optimum
}

/// Approximate over exact score; 1 when both are zero.
pub fn score_ratio(best: f64, oracle: f64) -> f64 {
    if oracle > 0.0 {
        best / oracle
    } else if best == 0.0 {
        1.0
    } else {
        f64::INFINITY
    }
}

fn decision_fields(d: &SplitDecision) -> (Option<u64>, Option<f64>) {
    (d.feature, d.feature.map(|_| d.score))
}

/// Replays `points` through a fresh engine, querying after every update.
pub fn run_experiment(config: &RunConfig, points: &[SparsePoint]) -> Result<RunReport, CliError> {
    config.validate()?;
    let mut engine = config.algorithm.engine(config.alpha)?;
    let algo = config.algorithm.name();
    let mut rows = Vec::with_capacity(points.len() / config.report_every + 1);
    let mut cum_ns = 0u64;
    let mut violations = 0;
    let mut optimal = 0;
    let mut max_ratio: Option<f64> = None;
    let mut last = SplitDecision::NONE;
    let mut last_oracle = None;

    for (i, p) in points.iter().enumerate() {
        let (decision, point_ns) = match config.clock {
            Clock::Monotonic => {
                let start = Instant::now();
                let d = engine.process(p);
                (d, start.elapsed().as_nanos() as u64)
            }
            Clock::Off => (engine.process(p), 0),
        };
        cum_ns += point_ns;
        last = decision;

        let mut ratio = None;
        if config.oracle {
            let oracle = exact_best(engine.store(), engine.measure());
            if oracle.feature.is_some() {
                let r = score_ratio(decision.score, oracle.score);
                if !within_bound(decision.score, oracle.score, config.alpha) {
                    violations += 1;
                }
                if decision.score <= oracle.score {
                    optimal += 1;
                }
                max_ratio = Some(max_ratio.map_or(r, |m: f64| m.max(r)));
                ratio = Some(r);
            } else {
                optimal += 1;
            }
            last_oracle = Some(oracle);
        }

        if (i + 1) % config.report_every == 0 {
            let (best_feature, best_score) = decision_fields(&decision);
            let (oracle_feature, oracle_score) =
                last_oracle.as_ref().map_or((None, None), decision_fields);
            rows.push(MetricRow {
                point_index: (i + 1).to_string(),
                algo,
                alpha: config.alpha,
                point_ns,
                cum_ns,
                nonempty_t: engine.nonempty_trees(),
                best_feature,
                best_score,
                oracle_feature,
                oracle_score,
                ratio,
            });
        }
    }

    let updates = points.len();
    let (best_feature, best_score) = decision_fields(&last);
    let (oracle_feature, oracle_score) = last_oracle.as_ref().map_or((None, None), decision_fields);
    rows.push(MetricRow {
        point_index: "summary".into(),
        algo,
        alpha: config.alpha,
        point_ns: if updates == 0 {
            0
        } else {
            cum_ns / updates as u64
        },
        cum_ns,
        nonempty_t: engine.nonempty_trees(),
        best_feature,
        best_score,
        oracle_feature,
        oracle_score,
        ratio: max_ratio,
    });

    Ok(RunReport {
        rows,
        violations,
        optimal,
        updates,
        total_ns: cum_ns,
    })
}

pub fn write_rows<W: Write, T: Serialize>(sink: W, rows: &[T]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(sink);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| CliError::Io {
        context: "writing CSV".into(),
        source: e,
    })?;
    Ok(())
}
