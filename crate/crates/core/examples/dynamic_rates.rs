//! Adaptive coalescing under a stepped arrival rate: five 20 s segments at
//! 0.1, 0.2, 0.4, 0.2 and 0.1 packets per ms.

use coalesced_drx::drx::{DrxConfig, Policy};
use coalesced_drx::sim::{run_many, RunOptions, Scenario, Traffic};
use coalesced_drx::traffic::RateSchedule;

fn main() -> coalesced_drx::Result<()> {
    let schedule = RateSchedule::new([0.1, 0.2, 0.4, 0.2, 0.1].iter().map(|&r| (20_000.0, r)).collect())?;
    let skip = 2_000.0;
    let opts = RunOptions {
        record_packets: false,
        windows: schedule.windows().iter().map(|&(a, b, _)| (a + skip, b)).collect(),
    };
    let seeds: Vec<u64> = (1..=10).collect();
    for w_star in [64.0, 512.0] {
        let sc = Scenario::new(
            DrxConfig::reference(),
            Policy::adaptive(w_star, 2.0 * w_star)?,
            Traffic::Schedule(schedule.clone()),
        )
        .with_horizon(schedule.total_duration());
        let runs = run_many(&sc, &seeds, &opts)?;
        println!("W* = {w_star} ms");
        println!("{:>8} {:>6} {:>10} {:>9} {:>7}", "segment", "rate", "delay", "mean q_w", "sleep");
        for (i, &(_, _, rate)) in schedule.windows().iter().enumerate() {
            let n = runs.len() as f64;
            let avg = |f: fn(&coalesced_drx::sim::WindowMetrics) -> f64| runs.iter().map(|r| f(&r.windows[i])).sum::<f64>() / n;
            println!(
                "{:>8} {rate:>6.1} {:>10.2} {:>9.2} {:>7.4}",
                i + 1,
                avg(|w| w.mean_delay),
                avg(|w| w.mean_q_w),
                avg(|w| w.sleep_fraction)
            );
        }
        // threshold trajectory of the first replication around each rate step
        let cycles = &runs[0].metrics.per_cycle;
        for &(start, _, rate) in &schedule.windows()[1..] {
            let after: Vec<String> = cycles
                .iter()
                .filter(|c| c.start >= start)
                .take(12)
                .map(|c| format!("{:.0}", c.q_w))
                .collect();
            println!("step to {rate} at {:.0} s: q_w {}", start / 1000.0, after.join(" "));
        }
    }
    Ok(())
}
