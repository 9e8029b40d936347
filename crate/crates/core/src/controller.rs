//! Closed-loop tuning of the coalescing threshold.
//!
//! Run once per coalescing cycle, just before DRX is re-enabled:
//! `q_w <- clamp(q_w + 2 lambda_hat (w_star - w_hat), 1, q_max)`.
//! The gain `2 lambda_hat` inverts the asymptotic slope `1 / (2 lambda)` of
//! the mean-delay curve, so one step nearly cancels the observed error.

use crate::drx::check_positive;
use crate::error::{invalid, Result};

/// Largest threshold whose backlog can be drained within `w_max`.
pub fn q_max_from_bound(w_max: f64, s_max: f64) -> Result<f64> {
    check_positive("w_max", w_max)?;
    check_positive("s_max", s_max)?;
    Ok(w_max / s_max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerState {
    /// Threshold in force for the next cycle, packets.
    pub q_w: f64,
    pub q_max: f64,
    /// Target mean queueing delay, ms.
    pub w_star: f64,
    /// Updates applied so far.
    pub cycle_count: u64,
}

impl ControllerState {
    /// Starts at `q_w = 1`, i.e. behaves like standard DRX until the first
    /// measurement arrives.
    pub fn new(w_star: f64, q_max: f64) -> Result<Self> {
        check_positive("w_star", w_star)?;
        if !(q_max >= 1.0 && q_max.is_finite()) {
            return Err(invalid(format!("q_max must be >= 1, got {q_max}")));
        }
        Ok(Self { q_w: 1.0, q_max, w_star, cycle_count: 0 })
    }
}

/// One controller step from the current rate estimate (packets/ms) and the
/// mean queueing delay measured over the cycle that just ended (ms).
pub fn update_threshold(cs: ControllerState, lambda_hat: f64, w_hat: f64) -> Result<ControllerState> {
    if !(lambda_hat > 0.0) {
        return Err(invalid(format!("rate estimate must be positive, got {lambda_hat}")));
    }
    if !(w_hat >= 0.0) {
        return Err(invalid(format!("measured delay must be >= 0, got {w_hat}")));
    }
    let raw = cs.q_w + 2.0 * lambda_hat * (cs.w_star - w_hat);
    Ok(ControllerState {
        q_w: raw.clamp(1.0, cs.q_max),
        cycle_count: cs.cycle_count + 1,
        ..cs
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn state(q_w: f64, w_star: f64, q_max: f64) -> ControllerState {
        ControllerState { q_w, q_max, w_star, cycle_count: 0 }
    }

    #[test]
    fn q_max_examples() {
        assert_eq!(q_max_from_bound(1024.0, 1.0).unwrap(), 1024.0);
        assert_eq!(q_max_from_bound(128.0, 1.0).unwrap(), 128.0);
        assert_eq!(q_max_from_bound(100.0, 2.0).unwrap(), 50.0);
        assert!(q_max_from_bound(0.0, 1.0).is_err());
        assert!(q_max_from_bound(10.0, 0.0).is_err());
    }

    #[test]
    fn update_examples() {
        let s = update_threshold(state(10.0, 64.0, 128.0), 0.5, 60.0).unwrap();
        assert_eq!(s.q_w, 14.0);
        assert_eq!(s.cycle_count, 1);
        // raw -134
        assert_eq!(update_threshold(state(2.0, 64.0, 128.0), 0.5, 200.0).unwrap().q_w, 1.0);
        // raw 532
        assert_eq!(update_threshold(state(120.0, 512.0, 128.0), 0.5, 100.0).unwrap().q_w, 128.0);
    }

    #[test]
    fn preconditions() {
        assert!(update_threshold(state(2.0, 64.0, 128.0), 0.0, 1.0).is_err());
        assert!(update_threshold(state(2.0, 64.0, 128.0), 0.1, -1.0).is_err());
        assert!(ControllerState::new(64.0, 0.5).is_err());
        assert_eq!(ControllerState::new(64.0, 128.0).unwrap().q_w, 1.0);
    }

    proptest! {
        #[test]
        fn output_always_clamped(q in 1.0f64..500.0, l in 1e-4f64..2.0, w_star in 1.0f64..1000.0,
                                  w_hat in 0.0f64..1e5, q_max in 1.0f64..500.0) {
            let q = q.min(q_max);
            let s = update_threshold(state(q, w_star, q_max), l, w_hat).unwrap();
            prop_assert!(s.q_w >= 1.0 && s.q_w <= q_max);
        }

        #[test]
        fn target_is_a_fixed_point(q in 1.0f64..128.0, l in 1e-4f64..2.0, w_star in 1.0f64..1000.0) {
            let s = update_threshold(state(q, w_star, 128.0), l, w_star).unwrap();
            prop_assert_eq!(s.q_w, q);
        }

        #[test]
        fn moves_against_the_error(q in 1.0f64..128.0, l in 1e-4f64..2.0, w_star in 1.0f64..1000.0,
                                   w_hat in 0.0f64..2000.0) {
            let s = update_threshold(state(q, w_star, 128.0), l, w_hat).unwrap();
            if w_hat > w_star {
                prop_assert!(s.q_w <= q);
            } else {
                prop_assert!(s.q_w >= q);
            }
        }
    }
}
