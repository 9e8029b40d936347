use std::fs::File;
use std::io::{BufReader, Write};
use std::sync::Arc;

use rayon::prelude::*;

use crate::drx::Policy;
use crate::error::{invalid, Error, Result};
use crate::experiment::spec::{ExperimentSpec, TrafficSpec};
use crate::sim::{
    confidence_interval, run_many, summarize, Metrics, RunOptions, Scenario, SummaryStats, Traffic, WindowMetrics,
};
use crate::traffic::{load_trace, ArrivalStream};

pub const CSV_HEADER: &str =
    "scenario,policy,rate,q_w,w_star,mean_delay_ms,ci_delay_ms,sleep_frac,ci_sleep,mean_qw,ci_qw,saturated";

/// One line of the result table.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scenario: String,
    pub policy: Policy,
    pub rate: f64,
    pub mean_delay: SummaryStats,
    pub sleep_fraction: SummaryStats,
    pub mean_q_w: SummaryStats,
    pub saturated: bool,
}

impl ResultRow {
    pub fn q_w(&self) -> Option<f64> {
        match self.policy {
            Policy::FixedCoalescing { q_w } => Some(q_w),
            _ => None,
        }
    }

    pub fn w_star(&self) -> Option<f64> {
        match self.policy {
            Policy::AdaptiveCoalescing { w_star, .. } => Some(w_star),
            _ => None,
        }
    }
}

fn build_traffic(spec: &ExperimentSpec, rate: Option<f64>, trace: &Option<Arc<ArrivalStream>>) -> Traffic {
    match (&spec.traffic, rate) {
        (TrafficSpec::Poisson { .. }, Some(rate)) => Traffic::Poisson { rate },
        (TrafficSpec::Pareto { shape, .. }, Some(rate)) => Traffic::Pareto { rate, shape: *shape },
        (TrafficSpec::Schedule { schedule, .. }, _) => Traffic::Schedule(schedule.clone()),
        (TrafficSpec::Trace { .. }, _) => Traffic::Trace(trace.clone().expect("trace loaded up front")),
        _ => unreachable!("sweep rate missing for a rate-swept traffic kind"),
    }
}

/// Run every grid point of `spec`, replicated over its seeds. Rows come
/// back in grid order whatever the scheduling.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    let trace = match &spec.traffic {
        TrafficSpec::Trace { path } => Some(Arc::new(load_trace(BufReader::new(File::open(path)?))?)),
        _ => None,
    };
    let (windows, skip) = match &spec.traffic {
        TrafficSpec::Schedule { schedule, skip } => (schedule.windows(), *skip),
        _ => (Vec::new(), 0.0),
    };
    let opts = RunOptions {
        record_packets: false,
        windows: windows.iter().map(|&(a, b, _)| (a + skip, b)).collect(),
    };

    let per_point: Vec<Vec<ResultRow>> = spec
        .grid()
        .into_par_iter()
        .map(|(rate, policy)| -> Result<Vec<ResultRow>> {
            let traffic = build_traffic(spec, rate, &trace);
            let nominal = match &traffic {
                Traffic::Trace(t) => t.truncated(spec.horizon).rate(),
                other => other.mean_rate(),
            };
            let scenario = Scenario::new(spec.cfg, policy, traffic)
                .with_horizon(spec.horizon)
                .with_psf(spec.psf);
            let outs = run_many(&scenario, &spec.seeds, &opts)?;
            let metrics: Vec<Metrics> = outs.iter().map(|o| o.metrics.clone()).collect();
            let whole = summarize(&metrics, spec.level)?;
            let mut rows = Vec::with_capacity(1 + windows.len());
            for (i, &(_, _, seg_rate)) in windows.iter().enumerate() {
                let col = |f: fn(&WindowMetrics) -> f64| outs.iter().map(|o| f(&o.windows[i])).collect::<Vec<_>>();
                rows.push(ResultRow {
                    scenario: format!("{}/seg{}", spec.name, i + 1),
                    policy,
                    rate: seg_rate,
                    mean_delay: confidence_interval(&col(|w| w.mean_delay), spec.level)?,
                    sleep_fraction: confidence_interval(&col(|w| w.sleep_fraction), spec.level)?,
                    mean_q_w: confidence_interval(&col(|w| w.mean_q_w), spec.level)?,
                    saturated: whole.saturated,
                });
            }
            rows.push(ResultRow {
                scenario: spec.name.clone(),
                policy,
                rate: nominal,
                mean_delay: whole.mean_delay,
                sleep_fraction: whole.sleep_fraction,
                mean_q_w: whole.mean_q_w,
                saturated: whole.saturated,
            });
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    Ok(per_point.into_iter().flatten().collect())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Write `rows` as CSV. Floats use the shortest representation that parses
/// back to the same value; columns that do not apply are left empty.
pub fn emit_csv<W: Write>(rows: &[ResultRow], sink: W) -> Result<()> {
    if rows.is_empty() {
        return Err(invalid("result table is empty"));
    }
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(CSV_HEADER.split(',')).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.scenario.clone(),
            r.policy.name().to_string(),
            r.rate.to_string(),
            opt(r.q_w()),
            opt(r.w_star()),
            r.mean_delay.mean.to_string(),
            r.mean_delay.ci_half_width.to_string(),
            r.sleep_fraction.mean.to_string(),
            r.sleep_fraction.ci_half_width.to_string(),
            r.mean_q_w.mean.to_string(),
            r.mean_q_w.ci_half_width.to_string(),
            r.saturated.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io.into(),
        other => Error::Validation(format!("csv: {other:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(mean: f64, hw: f64) -> SummaryStats {
        SummaryStats { mean, ci_half_width: hw, n: 10, level: 0.95 }
    }

    fn row() -> ResultRow {
        ResultRow {
            scenario: "s".into(),
            policy: Policy::FixedCoalescing { q_w: 8.0 },
            rate: 0.1,
            mean_delay: stats(33.769157853319, 0.1 + 0.2),
            sleep_fraction: stats(1.0 / 3.0, 1e-17),
            mean_q_w: stats(8.0, 0.0),
            saturated: false,
        }
    }

    #[test]
    fn one_row_gives_two_lines() {
        let mut buf = Vec::new();
        emit_csv(&[row()], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[1].split(',').nth(4), Some(""));
    }

    #[test]
    fn floats_round_trip() {
        let mut buf = Vec::new();
        emit_csv(&[row()], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let f: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(f[5].parse::<f64>().unwrap(), 33.769157853319);
        assert_eq!(f[6].parse::<f64>().unwrap(), 0.1 + 0.2);
        assert_eq!(f[7].parse::<f64>().unwrap(), 1.0 / 3.0);
        assert_eq!(f[8].parse::<f64>().unwrap(), 1e-17);
    }

    #[test]
    fn empty_table_is_an_error() {
        assert!(emit_csv(&[], Vec::new()).is_err());
    }
}
