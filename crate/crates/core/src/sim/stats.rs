use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{invalid, Result};
use crate::sim::engine::{run_with, Metrics, RunOptions, RunOutput};
use crate::sim::scenario::Scenario;

/// Sample mean with a two-sided Student-t confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryStats {
    pub mean: f64,
    pub ci_half_width: f64,
    pub n: usize,
    pub level: f64,
}

pub fn confidence_interval(samples: &[f64], level: f64) -> Result<SummaryStats> {
    let n = samples.len();
    if n < 2 {
        return Err(invalid(format!("need at least 2 samples, got {n}")));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(invalid(format!("confidence level must be in (0, 1), got {level}")));
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .expect("degrees of freedom are positive")
        .inverse_cdf(0.5 + level / 2.0);
    Ok(SummaryStats { mean, ci_half_width: t * (var / n as f64).sqrt(), n, level })
}

/// Replicated results for one scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicatedSummary {
    pub mean_delay: SummaryStats,
    pub sleep_fraction: SummaryStats,
    pub mean_q_w: SummaryStats,
    /// Any replication was saturated.
    pub saturated: bool,
}

pub fn summarize(runs: &[Metrics], level: f64) -> Result<ReplicatedSummary> {
    let col = |f: fn(&Metrics) -> f64| runs.iter().map(f).collect::<Vec<_>>();
    Ok(ReplicatedSummary {
        mean_delay: confidence_interval(&col(|m| m.mean_delay), level)?,
        sleep_fraction: confidence_interval(&col(|m| m.sleep_fraction), level)?,
        mean_q_w: confidence_interval(&col(|m| m.mean_q_w), level)?,
        saturated: runs.iter().any(|m| m.saturated),
    })
}

/// Run one replication per seed in parallel. Output order follows `seeds`.
pub fn run_many(scenario: &Scenario, seeds: &[u64], opts: &RunOptions) -> Result<Vec<RunOutput>> {
    seeds.par_iter().map(|&s| run_with(scenario, s, opts)).collect()
}

/// Replicate over `seeds` and report 95% intervals.
pub fn run_replicated(scenario: &Scenario, seeds: &[u64]) -> Result<ReplicatedSummary> {
    if seeds.len() < 2 {
        return Err(invalid(format!("need at least 2 seeds, got {}", seeds.len())));
    }
    let runs = run_many(scenario, seeds, &RunOptions::default())?;
    let metrics: Vec<Metrics> = runs.into_iter().map(|r| r.metrics).collect();
    summarize(&metrics, 0.95)
}
