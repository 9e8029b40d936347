//! Heavy-tailed Pareto arrivals (shape 1.5): adaptive coalescing against
//! standard DRX.

use coalesced_drx::drx::{DrxConfig, Policy};
use coalesced_drx::sim::{run_replicated, Scenario, Traffic};

fn main() -> coalesced_drx::Result<()> {
    let cfg = DrxConfig::reference();
    let seeds: Vec<u64> = (1..=10).collect();
    for w_star in [64.0, 512.0] {
        println!("W* = {w_star} ms");
        println!("{:>5} {:>10} {:>9} {:>10} {:>10}", "rate", "delay", "mean q_w", "sleep", "std sleep");
        for i in 1..=9 {
            let rate = i as f64 / 10.0;
            let traffic = Traffic::Pareto { rate, shape: 1.5 };
            let adaptive = Scenario::new(cfg, Policy::adaptive(w_star, 2.0 * w_star)?, traffic.clone());
            let standard = Scenario::new(cfg, Policy::Standard, traffic);
            let a = run_replicated(&adaptive, &seeds)?;
            let s = run_replicated(&standard, &seeds)?;
            println!(
                "{rate:>5.1} {:>10.2} {:>9.2} {:>10.4} {:>10.4}",
                a.mean_delay.mean, a.mean_q_w.mean, a.sleep_fraction.mean, s.sleep_fraction.mean
            );
        }
    }
    Ok(())
}
