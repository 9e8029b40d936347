use std::sync::Arc;

use coalesced_drx::drx::{DrxConfig, Policy};
use coalesced_drx::sim::{run, run_with, RunOptions, Scenario, Traffic};
use coalesced_drx::traffic::{ArrivalStream, RateSchedule};
use proptest::prelude::*;

fn recording() -> RunOptions {
    RunOptions { record_packets: true, windows: Vec::new() }
}

fn arb_cfg() -> impl Strategy<Value = DrxConfig> {
    (0.0..40.0f64, 1.0..4.0f64, 5.0..80.0f64, 0.0..80.0f64, 0u32..4).prop_map(|(t_in, t_on, t_short, extra, n)| {
        DrxConfig::new(t_in, t_on, t_short, t_short + extra, n).unwrap()
    })
}

fn arb_policy() -> impl Strategy<Value = Policy> {
    prop_oneof![
        Just(Policy::Standard),
        (1.0..200.0f64).prop_map(|q| Policy::fixed(q).unwrap()),
        (8.0..512.0f64).prop_map(|w| Policy::adaptive(w, 2.0 * w).unwrap()),
    ]
}

fn arb_traffic() -> impl Strategy<Value = Traffic> {
    prop_oneof![
        (0.01..0.95f64).prop_map(|rate| Traffic::Poisson { rate }),
        (0.01..0.9f64, 1.2..3.0f64).prop_map(|(rate, shape)| Traffic::Pareto { rate, shape }),
        (0.01..0.9f64).prop_map(|r| Traffic::Schedule(
            RateSchedule::new(vec![(2_000.0, r), (2_000.0, r / 3.0), (2_000.0, r)]).unwrap()
        )),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn packet_invariants(cfg in arb_cfg(), policy in arb_policy(), traffic in arb_traffic(), seed in any::<u64>()) {
        let sc = Scenario::new(cfg, policy, traffic).with_horizon(6_000.0);
        let out = run_with(&sc, seed, &recording()).unwrap();
        let m = &out.metrics;
        prop_assert_eq!(m.arrivals, m.packets_served + m.backlog);
        prop_assert_eq!(out.packets.len(), m.packets_served);
        prop_assert!((0.0..=1.0).contains(&m.sleep_fraction));
        for p in &out.packets {
            prop_assert!(p.tx_start >= p.arrival);
            prop_assert!((p.tx_end - p.tx_start - 1.0).abs() < 1e-9);
        }
        for w in out.packets.windows(2) {
            prop_assert!(w[1].arrival >= w[0].arrival);
            prop_assert!(w[1].tx_start >= w[0].tx_end - 1e-9);
        }
    }

    #[test]
    fn runs_are_reproducible(cfg in arb_cfg(), policy in arb_policy(), traffic in arb_traffic(), seed in any::<u64>()) {
        let sc = Scenario::new(cfg, policy, traffic).with_horizon(6_000.0);
        let a = run_with(&sc, seed, &recording()).unwrap();
        let b = run_with(&sc, seed, &recording()).unwrap();
        prop_assert_eq!(a.metrics, b.metrics);
        prop_assert_eq!(a.packets, b.packets);
    }

    #[test]
    fn adaptive_threshold_stays_in_range(w_star in 8.0..512.0f64, rate in 0.01..0.95f64, seed in any::<u64>()) {
        let q_max = 2.0 * w_star;
        let sc = Scenario::new(DrxConfig::reference(), Policy::adaptive(w_star, q_max).unwrap(), Traffic::Poisson { rate })
            .with_horizon(20_000.0);
        let m = run(&sc, seed).unwrap();
        for c in &m.per_cycle {
            prop_assert!(c.q_w >= 1.0 && c.q_w <= q_max);
        }
        prop_assert!(m.mean_q_w >= 1.0 && m.mean_q_w <= q_max);
    }
}

#[test]
fn larger_threshold_sleeps_more() {
    let cfg = DrxConfig::reference();
    let sleep = |q: f64| {
        let sc = Scenario::new(cfg, Policy::fixed(q).unwrap(), Traffic::Poisson { rate: 0.2 });
        (1..=5).map(|s| run(&sc, s).unwrap().sleep_fraction).sum::<f64>() / 5.0
    };
    let fractions: Vec<f64> = [1.0, 4.0, 16.0, 64.0].into_iter().map(sleep).collect();
    assert!(fractions.windows(2).all(|w| w[1] > w[0]), "{fractions:?}");
}

#[test]
fn simultaneous_trace_arrivals_are_served_in_order() {
    let stream = ArrivalStream::new(vec![100.0, 100.0, 100.0, 400.0], 1_000.0).unwrap();
    let sc = Scenario::new(DrxConfig::reference(), Policy::Standard, Traffic::Trace(Arc::new(stream)))
        .with_horizon(1_000.0);
    let out = run_with(&sc, 0, &recording()).unwrap();
    assert_eq!(out.packets.len(), 4);
    let starts: Vec<f64> = out.packets.iter().map(|p| p.tx_start).collect();
    assert_eq!(starts[1] - starts[0], 1.0);
    assert_eq!(starts[2] - starts[1], 1.0);
    assert_eq!(out.metrics.backlog, 0);
}

#[test]
fn saturated_load_is_flagged() {
    let sc = Scenario::new(DrxConfig::reference(), Policy::Standard, Traffic::Poisson { rate: 1.2 })
        .with_horizon(5_000.0);
    let m = run(&sc, 3).unwrap();
    assert!(m.saturated);
    assert!(m.backlog > 0);
}

#[test]
fn trace_arrivals_ignore_the_seed() {
    let stream = Arc::new(ArrivalStream::new(vec![5.0, 90.0, 91.5, 300.0, 612.0], 800.0).unwrap());
    let sc = Scenario::new(DrxConfig::reference(), Policy::fixed(2.0).unwrap(), Traffic::Trace(stream))
        .with_horizon(800.0);
    assert_eq!(run(&sc, 1).unwrap(), run(&sc, 99).unwrap());
}
