//! Downlink arrival processes and the online arrival-rate estimator.
//!
//! Generators draw from a ChaCha8 stream seeded with `seed_from_u64`, so a
//! given `(parameters, seed)` produces the same arrivals on every platform.
//! Both samplers use inverse transforms of `u = 1 - U`, with `U` the 53-bit
//! uniform in `[0, 1)` that `rand` derives from one 64-bit draw:
//! exponential gaps are `-ln(u) / rate` and Pareto gaps `x_m * u^(-1/shape)`.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::drx::check_positive;
use crate::error::{invalid, Error, Result};

/// Time-ordered packet arrival instants (ms) over `[0, horizon]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ArrivalStream {
    arrivals: Vec<f64>,
    horizon: f64,
}

impl ArrivalStream {
    pub fn new(arrivals: Vec<f64>, horizon: f64) -> Result<Self> {
        if !(horizon >= 0.0 && horizon.is_finite()) {
            return Err(Error::Validation(format!("horizon must be finite and >= 0, got {horizon}")));
        }
        if let Some(i) = arrivals.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::Validation(format!(
                "arrival {} at {} ms precedes arrival {} at {} ms",
                i + 2,
                arrivals[i + 1],
                i + 1,
                arrivals[i]
            )));
        }
        if let Some(t) = arrivals.iter().find(|t| !(**t >= 0.0 && **t <= horizon)) {
            return Err(Error::Validation(format!("arrival {t} ms lies outside [0, {horizon}]")));
        }
        Ok(Self { arrivals, horizon })
    }

    pub fn arrivals(&self) -> &[f64] {
        &self.arrivals
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.arrivals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arrivals.is_empty()
    }

    /// Empirical rate in packets/ms.
    pub fn rate(&self) -> f64 {
        if self.horizon > 0.0 {
            self.arrivals.len() as f64 / self.horizon
        } else {
            0.0
        }
    }

    /// Gaps between consecutive arrivals.
    pub fn gaps(&self) -> impl Iterator<Item = f64> + '_ {
        self.arrivals.windows(2).map(|w| w[1] - w[0])
    }

    /// Keep only arrivals up to `horizon`.
    pub fn truncated(&self, horizon: f64) -> ArrivalStream {
        let end = self.arrivals.partition_point(|t| *t <= horizon);
        ArrivalStream { arrivals: self.arrivals[..end].to_vec(), horizon }
    }
}

fn uniform_open_closed(rng: &mut ChaCha8Rng) -> f64 {
    1.0 - rng.random::<f64>()
}

fn renewal(horizon: f64, seed: u64, mut gap: impl FnMut(&mut ChaCha8Rng) -> f64) -> ArrivalStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut arrivals = Vec::new();
    let mut t = 0.0;
    loop {
        t += gap(&mut rng);
        if t > horizon {
            break;
        }
        arrivals.push(t);
    }
    ArrivalStream { arrivals, horizon }
}

/// Poisson arrivals with `rate` packets/ms.
pub fn gen_poisson(rate: f64, horizon: f64, seed: u64) -> Result<ArrivalStream> {
    check_positive("rate", rate)?;
    check_positive("horizon", horizon)?;
    Ok(renewal(horizon, seed, |rng| -uniform_open_closed(rng).ln() / rate))
}

/// Scale of a Pareto distribution with the given shape and mean `1 / rate`.
pub fn pareto_scale(rate: f64, shape: f64) -> f64 {
    (shape - 1.0) / (shape * rate)
}

/// Renewal process with Pareto inter-arrival gaps of mean `1 / rate`.
pub fn gen_pareto(rate: f64, shape: f64, horizon: f64, seed: u64) -> Result<ArrivalStream> {
    check_positive("rate", rate)?;
    check_positive("horizon", horizon)?;
    if !(shape > 1.0 && shape.is_finite()) {
        return Err(invalid(format!("Pareto shape must exceed 1 for a finite mean, got {shape}")));
    }
    let x_m = pareto_scale(rate, shape);
    let inv_shape = 1.0 / shape;
    Ok(renewal(horizon, seed, |rng| x_m * uniform_open_closed(rng).powf(-inv_shape)))
}

/// Piecewise-constant arrival rate: consecutive `(duration ms, rate pkt/ms)` segments.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSchedule {
    segments: Vec<(f64, f64)>,
}

impl RateSchedule {
    pub fn new(segments: Vec<(f64, f64)>) -> Result<Self> {
        if segments.is_empty() {
            return Err(invalid("rate schedule needs at least one segment"));
        }
        for &(d, r) in &segments {
            check_positive("segment duration", d)?;
            check_positive("segment rate", r)?;
        }
        Ok(Self { segments })
    }

    pub fn segments(&self) -> &[(f64, f64)] {
        &self.segments
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.0).sum()
    }

    /// `(start, end, rate)` for every segment.
    pub fn windows(&self) -> Vec<(f64, f64, f64)> {
        let mut start = 0.0;
        self.segments
            .iter()
            .map(|&(d, r)| {
                let w = (start, start + d, r);
                start += d;
                w
            })
            .collect()
    }

    /// Time-averaged rate over the whole schedule.
    pub fn mean_rate(&self) -> f64 {
        self.segments.iter().map(|(d, r)| d * r).sum::<f64>() / self.total_duration()
    }
}

/// Poisson arrivals following `schedule`; memorylessness lets each segment
/// restart its gap sequence at the boundary.
pub fn gen_schedule(schedule: &RateSchedule, seed: u64) -> ArrivalStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut arrivals = Vec::new();
    for (start, end, rate) in schedule.windows() {
        let mut t = start;
        loop {
            t += -uniform_open_closed(&mut rng).ln() / rate;
            if t > end {
                break;
            }
            arrivals.push(t);
        }
    }
    ArrivalStream { arrivals, horizon: schedule.total_duration() }
}

/// Parse a packet trace: one `timestamp_ms[,size_bytes]` per line, `#`
/// comments and blank lines ignored. Sizes are accepted but unused, every
/// packet occupies one service quantum.
pub fn load_trace<R: BufRead>(source: R) -> Result<ArrivalStream> {
    let mut arrivals = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split(',');
        let ts = fields.next().unwrap_or("").trim();
        let t: f64 = ts
            .parse()
            .map_err(|_| Error::Parse { line: line_no, msg: format!("bad timestamp {ts:?}") })?;
        if !t.is_finite() || t < 0.0 {
            return Err(Error::Parse { line: line_no, msg: format!("timestamp must be finite and >= 0, got {ts}") });
        }
        if let Some(size) = fields.next() {
            let size = size.trim();
            size.parse::<u64>()
                .map_err(|_| Error::Parse { line: line_no, msg: format!("bad size {size:?}") })?;
        }
        if fields.next().is_some() {
            return Err(Error::Parse { line: line_no, msg: "too many fields".into() });
        }
        if let Some(&prev) = arrivals.last() {
            if t < prev {
                return Err(Error::Validation(format!(
                    "line {line_no}: timestamp {t} precedes previous timestamp {prev}"
                )));
            }
        }
        arrivals.push(t);
    }
    let horizon = arrivals.last().copied().unwrap_or(0.0);
    Ok(ArrivalStream { arrivals, horizon })
}

/// Write `stream` in the trace format accepted by [`load_trace`].
pub fn write_trace<W: Write>(stream: &ArrivalStream, mut sink: W) -> Result<()> {
    for t in &stream.arrivals {
        writeln!(sink, "{t}")?;
    }
    Ok(())
}

/// Exponentially weighted arrival-rate estimate with averaging constant `k` ms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    /// packets/ms
    pub lambda_hat: f64,
    pub k: f64,
}

/// Fold one inter-arrival gap into the estimate. The weight of the old value,
/// `exp(-gap / k)`, shrinks with the gap so the average tracks elapsed time
/// rather than packet count.
pub fn ema_rate_update(est: RateEstimate, gap: f64) -> Result<RateEstimate> {
    if !(gap > 0.0) {
        return Err(invalid(format!("inter-arrival gap must be > 0, got {gap}")));
    }
    let w = (-gap / est.k).exp();
    Ok(RateEstimate { lambda_hat: (1.0 - w) / gap + w * est.lambda_hat, k: est.k })
}

/// Per-UE arrival-rate tracker. The average starts from zero, so early
/// estimates undershoot and ramp up over roughly `k` ms. Zero gaps
/// (simultaneous trace arrivals) are skipped.
#[derive(Debug, Clone)]
pub struct RateTracker {
    k: f64,
    estimate: Option<RateEstimate>,
    last_arrival: Option<f64>,
}

impl RateTracker {
    pub fn new(k: f64) -> Self {
        Self { k, estimate: None, last_arrival: None }
    }

    pub fn observe(&mut self, t: f64) {
        if let Some(prev) = self.last_arrival {
            let gap = t - prev;
            if gap > 0.0 {
                let est = self.estimate.unwrap_or(RateEstimate { lambda_hat: 0.0, k: self.k });
                // gap > 0 is checked above
                self.estimate = Some(ema_rate_update(est, gap).expect("positive gap"));
            }
        }
        self.last_arrival = Some(t);
    }

    pub fn lambda_hat(&self) -> Option<f64> {
        self.estimate.map(|e| e.lambda_hat)
    }
}
