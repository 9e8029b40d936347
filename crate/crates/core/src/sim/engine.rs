//! Single-UE event loop.
//!
//! Three event sources are live at any time: the next arrival, the UE's
//! pending DRX timer and the end of the packet in service. At equal
//! timestamps they fire in that order (arrival, timer, completion).

use std::collections::VecDeque;

use crate::controller::{q_max_from_bound, update_threshold, ControllerState};
use crate::drx::{advance, release_condition, DrxEvent, Mode, Policy, ReleaseRule, UeState};
use crate::error::Result;
use crate::sim::scenario::Scenario;
use crate::traffic::RateTracker;

/// One packet's passage through the eNB queue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketRecord {
    pub arrival: f64,
    pub tx_start: f64,
    pub tx_end: f64,
    /// Coalescing cycle in which the transmission started.
    pub cycle_index: u64,
}

impl PacketRecord {
    pub fn queueing_delay(&self) -> f64 {
        self.tx_start - self.arrival
    }
}

/// A completed coalescing cycle: from one DRX-enable instant to the next.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleRecord {
    pub start: f64,
    pub end: f64,
    /// Packets whose transmission started in the cycle.
    pub packets: usize,
    /// Their mean queueing delay (0 when `packets == 0`).
    pub mean_delay: f64,
    /// Threshold in force during the cycle.
    pub q_w: f64,
}

/// Per-run results over `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    /// Mean queueing delay (arrival to start of transmission), ms.
    pub mean_delay: f64,
    /// Fraction of the horizon spent in `Sleeping`.
    pub sleep_fraction: f64,
    /// Time-averaged coalescing threshold.
    pub mean_q_w: f64,
    pub arrivals: usize,
    /// Packets whose transmission started before the horizon.
    pub packets_served: usize,
    /// Packets still queued at the horizon.
    pub backlog: usize,
    /// Offered load reached one packet per sub-frame.
    pub saturated: bool,
    pub per_cycle: Vec<CycleRecord>,
}

/// Metrics restricted to `[start, end)`. Delay counts packets arriving in
/// the window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowMetrics {
    pub start: f64,
    pub end: f64,
    pub mean_delay: f64,
    pub packets: usize,
    pub sleep_fraction: f64,
    pub mean_q_w: f64,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub record_packets: bool,
    pub windows: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub metrics: Metrics,
    /// Empty unless `RunOptions::record_packets` was set.
    pub packets: Vec<PacketRecord>,
    pub windows: Vec<WindowMetrics>,
}

/// Simulate `scenario` with arrivals drawn from `seed`.
pub fn run(scenario: &Scenario, seed: u64) -> Result<Metrics> {
    Ok(run_with(scenario, seed, &RunOptions::default())?.metrics)
}

pub fn run_with(scenario: &Scenario, seed: u64, opts: &RunOptions) -> Result<RunOutput> {
    scenario.validate()?;
    let stream = scenario.traffic.arrivals(scenario.horizon, seed)?;
    let mut engine = Engine::new(scenario, stream.arrivals(), opts)?;
    engine.run()?;
    Ok(engine.finish())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Next {
    Arrival,
    Timer,
    Completion,
}

#[derive(Default)]
struct WindowAcc {
    delay_sum: f64,
    packets: usize,
    sleep: f64,
    q_w_area: f64,
}

struct Engine<'a> {
    sc: &'a Scenario,
    arrivals: &'a [f64],
    next_arrival: usize,
    now: f64,
    ue: UeState,
    mode_since: f64,
    queue: VecDeque<f64>,
    in_service_until: Option<f64>,

    controller: Option<ControllerState>,
    rate: RateTracker,
    q_w: f64,
    q_w_since: f64,

    sleep_time: f64,
    q_w_area: f64,
    delay_sum: f64,
    served: usize,

    cycle_number: u64,
    cycle_start: f64,
    cycle_packets: usize,
    cycle_delay_sum: f64,
    per_cycle: Vec<CycleRecord>,

    windows: Vec<(f64, f64)>,
    window_acc: Vec<WindowAcc>,
    record: bool,
    packets: Vec<PacketRecord>,
}

fn overlap(a: f64, b: f64, lo: f64, hi: f64) -> f64 {
    (b.min(hi) - a.max(lo)).max(0.0)
}

impl<'a> Engine<'a> {
    fn new(sc: &'a Scenario, arrivals: &'a [f64], opts: &RunOptions) -> Result<Self> {
        let (controller, rate_k) = match sc.policy {
            Policy::AdaptiveCoalescing { w_star, w_max } => {
                let q_max = q_max_from_bound(w_max, sc.psf)?;
                (Some(ControllerState::new(w_star, q_max)?), 2.0 * w_max)
            }
            _ => (None, f64::INFINITY),
        };
        let q_w = match sc.policy {
            Policy::Standard => 1.0,
            Policy::FixedCoalescing { q_w } => q_w,
            Policy::AdaptiveCoalescing { .. } => controller.map(|c| c.q_w).unwrap_or(1.0),
        };
        Ok(Self {
            sc,
            arrivals,
            next_arrival: 0,
            now: 0.0,
            // as if the queue had just drained at t = 0
            ue: UeState::idle_since(0.0, &sc.cfg),
            mode_since: 0.0,
            queue: VecDeque::new(),
            in_service_until: None,
            controller,
            rate: RateTracker::new(rate_k),
            q_w,
            q_w_since: 0.0,
            sleep_time: 0.0,
            q_w_area: 0.0,
            delay_sum: 0.0,
            served: 0,
            cycle_number: 0,
            cycle_start: 0.0,
            cycle_packets: 0,
            cycle_delay_sum: 0.0,
            per_cycle: Vec::new(),
            windows: opts.windows.clone(),
            window_acc: opts.windows.iter().map(|_| WindowAcc::default()).collect(),
            record: opts.record_packets,
            packets: Vec::new(),
        })
    }

    fn next_event(&self) -> Option<(f64, Next)> {
        let candidates = [
            (self.arrivals.get(self.next_arrival).copied(), Next::Arrival),
            (self.ue.pending_timer(), Next::Timer),
            (self.in_service_until, Next::Completion),
        ];
        let mut best: Option<(f64, Next)> = None;
        for (t, kind) in candidates {
            if let Some(t) = t {
                // strict comparison keeps the earlier source on ties
                if best.is_none_or(|(bt, _)| t < bt) {
                    best = Some((t, kind));
                }
            }
        }
        best
    }

    fn run(&mut self) -> Result<()> {
        while let Some((t, kind)) = self.next_event() {
            if t > self.sc.horizon {
                break;
            }
            self.now = t;
            match kind {
                Next::Arrival => self.on_arrival()?,
                Next::Timer => self.on_timer()?,
                Next::Completion => self.on_completion()?,
            }
        }
        Ok(())
    }

    fn rule(&self) -> ReleaseRule {
        ReleaseRule::for_policy(&self.sc.policy, self.q_w)
    }

    fn on_arrival(&mut self) -> Result<()> {
        let t = self.arrivals[self.next_arrival];
        self.next_arrival += 1;
        self.rate.observe(t);
        self.queue.push_back(t);
        match self.ue.mode {
            Mode::Active | Mode::Sleeping => Ok(()),
            // DRX not yet enabled: send right away whatever the policy
            Mode::InactivityCountdown => self.start_transmission(),
            Mode::OnDuration => {
                if release_condition(self.queue.len(), self.rule()) {
                    self.start_transmission()
                } else {
                    Ok(())
                }
            }
        }
    }

    fn on_timer(&mut self) -> Result<()> {
        let event = self.ue.timer_event().expect("timer fired in Active mode");
        self.apply(event)?;
        match event {
            DrxEvent::InactivityExpiry => self.on_drx_enabled(),
            DrxEvent::OnDurationStart => {
                if release_condition(self.queue.len(), self.rule()) {
                    self.start_transmission()?;
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn on_completion(&mut self) -> Result<()> {
        self.in_service_until = None;
        if self.queue.is_empty() {
            self.apply(DrxEvent::QueueDrained)
        } else {
            self.start_transmission()
        }
    }

    fn apply(&mut self, event: DrxEvent) -> Result<()> {
        let next = advance(self.ue, event, self.now, &self.sc.cfg)?;
        if self.ue.mode == Mode::Sleeping && next.mode != Mode::Sleeping {
            self.close_sleep(self.now);
        }
        if next.mode != self.ue.mode {
            self.mode_since = self.now;
        }
        self.ue = next;
        Ok(())
    }

    fn close_sleep(&mut self, until: f64) {
        let (a, b) = (self.mode_since, until.min(self.sc.horizon));
        self.sleep_time += overlap(a, b, 0.0, self.sc.horizon);
        for (w, acc) in self.windows.iter().zip(self.window_acc.iter_mut()) {
            acc.sleep += overlap(a, b, w.0, w.1);
        }
    }

    fn close_q_w(&mut self, until: f64) {
        let (a, b) = (self.q_w_since, until.min(self.sc.horizon));
        self.q_w_area += self.q_w * overlap(a, b, 0.0, self.sc.horizon);
        for (w, acc) in self.windows.iter().zip(self.window_acc.iter_mut()) {
            acc.q_w_area += self.q_w * overlap(a, b, w.0, w.1);
        }
        self.q_w_since = until;
    }

    fn start_transmission(&mut self) -> Result<()> {
        let arrival = self.queue.pop_front().expect("transmission started with empty queue");
        self.apply(DrxEvent::ReleaseTriggered)?;
        let delay = self.now - arrival;
        self.delay_sum += delay;
        self.served += 1;
        self.cycle_packets += 1;
        self.cycle_delay_sum += delay;
        for (w, acc) in self.windows.iter().zip(self.window_acc.iter_mut()) {
            if arrival >= w.0 && arrival < w.1 {
                acc.delay_sum += delay;
                acc.packets += 1;
            }
        }
        let tx_end = self.now + self.sc.psf;
        if self.record {
            self.packets.push(PacketRecord {
                arrival,
                tx_start: self.now,
                tx_end,
                cycle_index: self.cycle_number,
            });
        }
        self.in_service_until = Some(tx_end);
        Ok(())
    }

    /// Coalescing-cycle boundary: close the cycle and retune the threshold.
    fn on_drx_enabled(&mut self) {
        let mean_delay = if self.cycle_packets > 0 {
            self.cycle_delay_sum / self.cycle_packets as f64
        } else {
            0.0
        };
        self.per_cycle.push(CycleRecord {
            start: self.cycle_start,
            end: self.now,
            packets: self.cycle_packets,
            mean_delay,
            q_w: self.q_w,
        });
        if let (Some(cs), Some(lambda_hat)) = (self.controller, self.rate.lambda_hat()) {
            // an empty cycle carries no delay measurement
            if self.cycle_packets > 0 {
                let cs = update_threshold(cs, lambda_hat, mean_delay)
                    .expect("positive rate estimate and non-negative delay");
                self.close_q_w(self.now);
                self.q_w = cs.q_w;
                self.controller = Some(cs);
            }
        }
        self.cycle_number += 1;
        self.cycle_start = self.now;
        self.cycle_packets = 0;
        self.cycle_delay_sum = 0.0;
    }

    fn finish(mut self) -> RunOutput {
        let horizon = self.sc.horizon;
        if self.ue.mode == Mode::Sleeping {
            self.close_sleep(horizon);
        }
        self.close_q_w(horizon);
        let arrivals = self.next_arrival;
        let metrics = Metrics {
            mean_delay: if self.served > 0 { self.delay_sum / self.served as f64 } else { 0.0 },
            sleep_fraction: self.sleep_time / horizon,
            mean_q_w: self.q_w_area / horizon,
            arrivals,
            packets_served: self.served,
            backlog: self.queue.len(),
            saturated: arrivals as f64 * self.sc.psf >= horizon,
            per_cycle: self.per_cycle,
        };
        let windows = self
            .windows
            .iter()
            .zip(&self.window_acc)
            .map(|(&(start, end), acc)| {
                let span = overlap(start, end, 0.0, horizon);
                WindowMetrics {
                    start,
                    end,
                    mean_delay: if acc.packets > 0 { acc.delay_sum / acc.packets as f64 } else { 0.0 },
                    packets: acc.packets,
                    sleep_fraction: if span > 0.0 { acc.sleep / span } else { 0.0 },
                    mean_q_w: if span > 0.0 { acc.q_w_area / span } else { 0.0 },
                }
            })
            .collect();
        RunOutput { metrics, packets: self.packets, windows }
    }
}
