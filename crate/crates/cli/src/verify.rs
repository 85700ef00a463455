use sparsesplit::{exact_best, generate, GenConfig, SplitEngine, UpdEnt, UpdGini};

use crate::{within_bound, CliError};

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub base: GenConfig,
    pub seeds: u64,
    pub alphas: Vec<f64>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            base: GenConfig {
                n: 1000,
                d1: 10,
                d2: 300,
                q: 0.02,
                seed: 0,
            },
            seeds: 3,
            alphas: vec![0.01, 0.1, 1.0, 5.0],
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerifyReport {
    pub updates: usize,
    /// Broken structural invariants, one message per update and engine.
    pub invariant_failures: Vec<String>,
    /// Updates whose answer exceeded `(1 + alpha)` times the optimum.
    pub guarantee_failures: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.invariant_failures.is_empty() && self.guarantee_failures.is_empty()
    }
}

fn check<E: SplitEngine>(
    engine: &E,
    name: &str,
    alpha: f64,
    tag: &str,
    invariants: Vec<String>,
    report: &mut VerifyReport,
) {
    if !invariants.is_empty() {
        report
            .invariant_failures
            .push(format!("{name} {tag}: {}", invariants.join("; ")));
    }
    let best = engine.current_best();
    let oracle = exact_best(engine.store(), engine.measure());
    if oracle.feature.is_some() && !within_bound(best.score, oracle.score, alpha) {
        report.guarantee_failures.push(format!(
            "{name} {tag}: score {} exceeds (1+{alpha}) * {}",
            best.score, oracle.score
        ));
    }
}

/// Replays generated streams through both approximate engines, checking
/// structural invariants and the approximation bound after every update.
pub fn verify(config: &VerifyConfig) -> Result<VerifyReport, CliError> {
    let mut report = VerifyReport::default();
    for s in 0..config.seeds {
        let mut g = config.base;
        g.seed = g.seed.wrapping_add(s);
        let points = generate(&g)?.points;
        for &alpha in &config.alphas {
            let mut ent = UpdEnt::new(alpha)?;
            let mut gini = UpdGini::new(alpha)?;
            for (i, p) in points.iter().enumerate() {
                ent.process(p);
                gini.process(p);
                let tag = format!("seed={} alpha={alpha} step={}", g.seed, i + 1);
                check(
                    &ent,
                    "upd-ent",
                    alpha,
                    &tag,
                    ent.check_invariants(),
                    &mut report,
                );
                check(
                    &gini,
                    "upd-gini",
                    alpha,
                    &tag,
                    gini.check_invariants(),
                    &mut report,
                );
                report.updates += 2;
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        let cfg = VerifyConfig {
            base: GenConfig {
                n: 200,
                d1: 4,
                d2: 50,
                q: 0.05,
                seed: 1,
            },
            seeds: 2,
            alphas: vec![0.1, 1.0],
        };
        let report = verify(&cfg).unwrap();
        assert!(report.passed(), "{report:?}");
        assert_eq!(report.updates, 2 * 2 * 2 * 200);
    }
}
