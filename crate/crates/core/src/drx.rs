//! DRX timers, release disciplines and the UE sleep-schedule state machine.
//!
//! The state machine is a pure function over [`UeState`] values. Every mode
//! owns at most one pending deadline (`next_event_at`), which is what the
//! simulator uses as its timer slot:
//!
//! ```text
//!              ReleaseTriggered                 QueueDrained
//!   OnDuration ---------------> Active <------------------------+
//!     ^    |                     |  ^ ReleaseTriggered (re-arm) |
//!     |    | OnDurationEnd       |  |                           |
//!     |    v                     +--+--------------------> InactivityCountdown
//!   Sleeping <--------------------------------------------------+
//!     (OnDurationStart)              InactivityExpiry
//! ```
//!
//! `ReleaseTriggered` from `InactivityCountdown` covers a packet that shows
//! up before DRX is enabled: it is sent right away under every policy.

use crate::error::{invalid, Error, Result};

/// Configuration of the UE sleep schedule. All durations are in ms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrxConfig {
    /// Inactivity timer: idle time before DRX is enabled.
    pub t_in: f64,
    /// On-duration timer: awake window at the start of every DRX cycle.
    pub t_on: f64,
    /// Short DRX cycle length.
    pub t_short: f64,
    /// Long DRX cycle length.
    pub t_long: f64,
    /// Number of short cycles before switching to long ones.
    pub n_short: u32,
}

impl DrxConfig {
    pub fn new(t_in: f64, t_on: f64, t_short: f64, t_long: f64, n_short: u32) -> Result<Self> {
        let cfg = Self { t_in, t_on, t_short, t_long, n_short };
        cfg.validate()?;
        Ok(cfg)
    }

    /// The configuration used throughout the coalescing experiments:
    /// `T_in = 10`, `T_on = 2`, `T_s = T_l = 32`.
    pub fn reference() -> Self {
        Self { t_in: 10.0, t_on: 2.0, t_short: 32.0, t_long: 32.0, n_short: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.t_in, self.t_on, self.t_short, self.t_long]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Validation("DRX timers must be finite".into()));
        }
        if self.t_in < 0.0 {
            return Err(Error::Validation(format!("t_in must be >= 0, got {}", self.t_in)));
        }
        if self.t_on <= 0.0 {
            return Err(Error::Validation(format!("t_on must be > 0, got {}", self.t_on)));
        }
        if self.t_on >= self.t_short {
            return Err(Error::Validation(format!(
                "t_on ({}) must be shorter than t_short ({})",
                self.t_on, self.t_short
            )));
        }
        if self.t_short > self.t_long {
            return Err(Error::Validation(format!(
                "t_short ({}) must not exceed t_long ({})",
                self.t_short, self.t_long
            )));
        }
        Ok(())
    }

    /// Cycle length when every cycle has the same duration, `None` otherwise.
    pub fn uniform_cycle(&self) -> Option<f64> {
        if self.n_short == 0 {
            Some(self.t_long)
        } else if self.t_short == self.t_long {
            Some(self.t_short)
        } else {
            None
        }
    }
}

/// Length of DRX cycle number `cycle_index` (0-based) since DRX was enabled.
pub fn next_cycle_length(cycle_index: u32, cfg: &DrxConfig) -> f64 {
    if cycle_index < cfg.n_short {
        cfg.t_short
    } else {
        cfg.t_long
    }
}

/// Downlink release discipline applied at the eNB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Policy {
    /// Conventional DRX: any backlog is sent at the next on-duration.
    Standard,
    /// Hold traffic until `q_w` packets are queued.
    FixedCoalescing { q_w: f64 },
    /// Threshold tuned online to keep the mean queueing delay near
    /// `w_star`, never letting the threshold imply more than `w_max` ms.
    AdaptiveCoalescing { w_star: f64, w_max: f64 },
}

impl Policy {
    pub fn fixed(q_w: f64) -> Result<Self> {
        let p = Policy::FixedCoalescing { q_w };
        p.validate()?;
        Ok(p)
    }

    pub fn adaptive(w_star: f64, w_max: f64) -> Result<Self> {
        let p = Policy::AdaptiveCoalescing { w_star, w_max };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Policy::Standard => Ok(()),
            Policy::FixedCoalescing { q_w } => {
                if q_w.is_finite() && q_w >= 1.0 {
                    Ok(())
                } else {
                    Err(Error::Validation(format!("q_w must be >= 1, got {q_w}")))
                }
            }
            Policy::AdaptiveCoalescing { w_star, w_max } => {
                if w_star > 0.0 && w_max >= w_star && w_max.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Validation(format!(
                        "adaptive policy needs w_max >= w_star > 0, got w_star={w_star} w_max={w_max}"
                    )))
                }
            }
        }
    }

    /// Short identifier used in result tables.
    pub fn name(&self) -> &'static str {
        match self {
            Policy::Standard => "standard",
            Policy::FixedCoalescing { .. } => "fixed",
            Policy::AdaptiveCoalescing { .. } => "adaptive",
        }
    }
}

/// The rule deciding whether a backlog may be released to a listening UE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReleaseRule {
    AnyBacklog,
    /// Release once the queue holds `ceil(q_w)` packets.
    Threshold(f64),
}

impl ReleaseRule {
    /// Rule in force for `policy` while the coalescing threshold is `q_w`.
    /// `q_w` is ignored by the standard policy and by fixed coalescing.
    pub fn for_policy(policy: &Policy, q_w: f64) -> Self {
        match *policy {
            Policy::Standard => ReleaseRule::AnyBacklog,
            Policy::FixedCoalescing { q_w } => ReleaseRule::Threshold(q_w),
            Policy::AdaptiveCoalescing { .. } => ReleaseRule::Threshold(q_w),
        }
    }
}

pub fn release_condition(queue_len: usize, rule: ReleaseRule) -> bool {
    match rule {
        ReleaseRule::AnyBacklog => queue_len >= 1,
        ReleaseRule::Threshold(q_w) => queue_len as f64 >= q_w.ceil(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Transmitting to the UE.
    Active,
    /// Awake and idle, waiting for the inactivity timer.
    InactivityCountdown,
    /// DRX enabled, radio off.
    Sleeping,
    /// DRX enabled, monitoring the PDCCH.
    OnDuration,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Active, Mode::InactivityCountdown, Mode::Sleeping, Mode::OnDuration];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DrxEvent {
    InactivityExpiry,
    OnDurationStart,
    OnDurationEnd,
    /// A downlink transmission starts. The inactivity timer is held until
    /// the queue drains.
    ReleaseTriggered,
    /// The last queued packet finished transmission.
    QueueDrained,
}

impl DrxEvent {
    pub const ALL: [DrxEvent; 5] = [
        DrxEvent::InactivityExpiry,
        DrxEvent::OnDurationStart,
        DrxEvent::OnDurationEnd,
        DrxEvent::ReleaseTriggered,
        DrxEvent::QueueDrained,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UeState {
    pub mode: Mode,
    /// Completed DRX cycles since DRX was last enabled.
    pub cycle_index: u32,
    /// Pending deadline of the current mode: inactivity expiry, on-duration
    /// start or on-duration end. Not scheduled in `Active`.
    pub next_event_at: f64,
}

impl UeState {
    /// DRX enabled at `now`: zero-length sleep, on-duration begins at `now`.
    pub fn drx_enabled_at(now: f64) -> Self {
        Self { mode: Mode::Sleeping, cycle_index: 0, next_event_at: now }
    }

    /// The eNB queue went empty at `now`: inactivity countdown running.
    pub fn idle_since(now: f64, cfg: &DrxConfig) -> Self {
        Self { mode: Mode::InactivityCountdown, cycle_index: 0, next_event_at: now + cfg.t_in }
    }

    /// Deadline the simulator must schedule, if any.
    pub fn pending_timer(&self) -> Option<f64> {
        match self.mode {
            Mode::Active => None,
            _ => Some(self.next_event_at),
        }
    }

    /// The timer event that fires at `pending_timer()`.
    pub fn timer_event(&self) -> Option<DrxEvent> {
        match self.mode {
            Mode::Active => None,
            Mode::InactivityCountdown => Some(DrxEvent::InactivityExpiry),
            Mode::Sleeping => Some(DrxEvent::OnDurationStart),
            Mode::OnDuration => Some(DrxEvent::OnDurationEnd),
        }
    }
}

/// Apply `event` at time `now`.
pub fn advance(state: UeState, event: DrxEvent, now: f64, cfg: &DrxConfig) -> Result<UeState> {
    use DrxEvent::*;
    use Mode::*;
    let next = match (state.mode, event) {
        (InactivityCountdown, InactivityExpiry) => UeState::drx_enabled_at(now),
        (Sleeping, OnDurationStart) => UeState {
            mode: OnDuration,
            cycle_index: state.cycle_index,
            next_event_at: now + cfg.t_on,
        },
        (OnDuration, OnDurationEnd) => {
            // The window opened t_on ago at the start of the cycle.
            let cycle_start = now - cfg.t_on;
            UeState {
                mode: Sleeping,
                cycle_index: state.cycle_index.saturating_add(1),
                next_event_at: cycle_start + next_cycle_length(state.cycle_index, cfg),
            }
        }
        (OnDuration | Active | InactivityCountdown, ReleaseTriggered) => UeState {
            mode: Active,
            cycle_index: 0,
            next_event_at: now + cfg.t_in,
        },
        (Active, QueueDrained) => UeState::idle_since(now, cfg),
        (mode, event) => return Err(Error::ProtocolViolation { mode, event }),
    };
    Ok(next)
}

pub(crate) fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n_short: u32, t_short: f64, t_long: f64) -> DrxConfig {
        DrxConfig { t_in: 10.0, t_on: 2.0, t_short, t_long, n_short }
    }

    #[test]
    fn cycle_length_switches_after_short_cycles() {
        assert_eq!(next_cycle_length(0, &cfg(3, 32.0, 64.0)), 32.0);
        assert_eq!(next_cycle_length(2, &cfg(3, 32.0, 64.0)), 32.0);
        assert_eq!(next_cycle_length(3, &cfg(3, 32.0, 64.0)), 64.0);
        assert_eq!(next_cycle_length(5, &cfg(0, 32.0, 32.0)), 32.0);
    }

    #[test]
    fn cycle_length_constant_without_short_cycles() {
        let c = cfg(0, 16.0, 64.0);
        assert!((0..100).all(|i| next_cycle_length(i, &c) == 64.0));
        let c = cfg(7, 32.0, 32.0);
        assert!((0..100).all(|i| next_cycle_length(i, &c) == 32.0));
    }

    #[test]
    fn release_thresholds() {
        assert!(release_condition(1, ReleaseRule::AnyBacklog));
        assert!(!release_condition(0, ReleaseRule::AnyBacklog));
        assert!(!release_condition(2, ReleaseRule::Threshold(3.0)));
        assert!(release_condition(3, ReleaseRule::Threshold(3.0)));
        // real thresholds compare against their ceiling
        assert!(!release_condition(3, ReleaseRule::Threshold(3.2)));
        assert!(release_condition(4, ReleaseRule::Threshold(3.2)));
    }

    #[test]
    fn config_invariants() {
        assert!(DrxConfig::new(10.0, 2.0, 32.0, 32.0, 0).is_ok());
        assert!(DrxConfig::new(0.0, 2.0, 32.0, 64.0, 3).is_ok());
        assert!(DrxConfig::new(10.0, 40.0, 32.0, 32.0, 0).is_err());
        assert!(DrxConfig::new(10.0, 32.0, 32.0, 32.0, 0).is_err());
        assert!(DrxConfig::new(10.0, 2.0, 64.0, 32.0, 0).is_err());
        assert!(DrxConfig::new(-1.0, 2.0, 32.0, 32.0, 0).is_err());
        assert!(DrxConfig::new(10.0, 0.0, 32.0, 32.0, 0).is_err());
    }

    #[test]
    fn policy_invariants() {
        assert!(Policy::fixed(1.0).is_ok());
        assert!(Policy::fixed(0.5).is_err());
        assert!(Policy::adaptive(64.0, 128.0).is_ok());
        assert!(Policy::adaptive(64.0, 64.0).is_ok());
        assert!(Policy::adaptive(64.0, 32.0).is_err());
        assert!(Policy::adaptive(0.0, 32.0).is_err());
    }

    #[test]
    fn expiry_enables_drx() {
        let c = DrxConfig::reference();
        let s = UeState { mode: Mode::InactivityCountdown, cycle_index: 4, next_event_at: 50.0 };
        let s = advance(s, DrxEvent::InactivityExpiry, 50.0, &c).unwrap();
        assert_eq!(s.mode, Mode::Sleeping);
        assert_eq!(s.cycle_index, 0);
        assert_eq!(s.next_event_at, 50.0);
    }

    #[test]
    fn on_duration_schedule_follows_cycle() {
        let c = cfg(1, 16.0, 32.0);
        let mut s = UeState::drx_enabled_at(100.0);
        s = advance(s, DrxEvent::OnDurationStart, 100.0, &c).unwrap();
        assert_eq!((s.mode, s.next_event_at), (Mode::OnDuration, 102.0));
        s = advance(s, DrxEvent::OnDurationEnd, 102.0, &c).unwrap();
        assert_eq!((s.mode, s.cycle_index, s.next_event_at), (Mode::Sleeping, 1, 116.0));
        s = advance(s, DrxEvent::OnDurationStart, 116.0, &c).unwrap();
        s = advance(s, DrxEvent::OnDurationEnd, 118.0, &c).unwrap();
        // second cycle is a long one
        assert_eq!((s.cycle_index, s.next_event_at), (2, 148.0));
    }

    #[test]
    fn release_during_on_duration_finishes_cycle() {
        let c = DrxConfig::reference();
        let s = UeState { mode: Mode::OnDuration, cycle_index: 3, next_event_at: 12.0 };
        let s = advance(s, DrxEvent::ReleaseTriggered, 11.0, &c).unwrap();
        assert_eq!(s.mode, Mode::Active);
        assert_eq!(s.cycle_index, 0);
        assert_eq!(s.next_event_at, 21.0);
    }

    #[test]
    fn drained_queue_starts_inactivity_countdown() {
        let c = DrxConfig::reference();
        let s = UeState { mode: Mode::Active, cycle_index: 0, next_event_at: 21.0 };
        let s = advance(s, DrxEvent::QueueDrained, 12.0, &c).unwrap();
        assert_eq!((s.mode, s.next_event_at), (Mode::InactivityCountdown, 22.0));
    }

    #[test]
    fn illegal_pairs_are_rejected() {
        let c = DrxConfig::reference();
        let s = UeState { mode: Mode::Sleeping, cycle_index: 0, next_event_at: 0.0 };
        assert!(matches!(
            advance(s, DrxEvent::OnDurationEnd, 0.0, &c),
            Err(Error::ProtocolViolation { mode: Mode::Sleeping, event: DrxEvent::OnDurationEnd })
        ));
    }

    #[test]
    fn transition_table_is_exactly_the_documented_graph() {
        use DrxEvent::*;
        use Mode::*;
        let legal = [
            (InactivityCountdown, InactivityExpiry, Sleeping),
            (Sleeping, OnDurationStart, OnDuration),
            (OnDuration, OnDurationEnd, Sleeping),
            (OnDuration, ReleaseTriggered, Active),
            (Active, ReleaseTriggered, Active),
            (InactivityCountdown, ReleaseTriggered, Active),
            (Active, QueueDrained, InactivityCountdown),
        ];
        let c = DrxConfig::reference();
        for mode in Mode::ALL {
            for event in DrxEvent::ALL {
                let s = UeState { mode, cycle_index: 2, next_event_at: 5.0 };
                let got = advance(s, event, 5.0, &c);
                match legal.iter().find(|(m, e, _)| *m == mode && *e == event) {
                    Some((_, _, to)) => assert_eq!(got.unwrap().mode, *to, "{mode:?} {event:?}"),
                    None => assert!(got.is_err(), "{mode:?} {event:?} should be illegal"),
                }
            }
        }
    }

    #[test]
    fn disabling_drx_resets_cycle_index() {
        let c = DrxConfig::reference();
        for mode in [Mode::OnDuration, Mode::InactivityCountdown, Mode::Active] {
            let s = UeState { mode, cycle_index: 9, next_event_at: 1.0 };
            assert_eq!(advance(s, DrxEvent::ReleaseTriggered, 1.0, &c).unwrap().cycle_index, 0);
        }
    }
}
