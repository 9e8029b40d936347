//! The adaptive controller holding the mean queueing delay at a target
//! across a static Poisson sweep.

use coalesced_drx::analytic::PoissonModel;
use coalesced_drx::drx::{DrxConfig, Policy};
use coalesced_drx::sim::{run_replicated, Scenario, Traffic};

fn main() -> coalesced_drx::Result<()> {
    let cfg = DrxConfig::reference();
    let seeds: Vec<u64> = (1..=10).collect();
    for w_star in [64.0, 512.0] {
        let w_max = 2.0 * w_star;
        println!("W* = {w_star} ms, W_max = {w_max} ms");
        println!("{:>5} {:>10} {:>8} {:>9} {:>9} {:>7}", "rate", "delay", "ci", "mean q_w", "model Q*", "sleep");
        for i in 1..=9 {
            let rate = i as f64 / 10.0;
            let sc = Scenario::new(cfg, Policy::adaptive(w_star, w_max)?, Traffic::Poisson { rate });
            let r = run_replicated(&sc, &seeds)?;
            let q_star = PoissonModel::deterministic(rate, 1.0, cfg)?.equilibrium(w_star, w_max)?;
            let q_star = q_star.map_or("-".to_string(), |q| format!("{q:.1}"));
            println!(
                "{rate:>5.1} {:>10.2} {:>8.2} {:>9.2} {:>9} {:>7.4}",
                r.mean_delay.mean, r.mean_delay.ci_half_width, r.mean_q_w.mean, q_star, r.sleep_fraction.mean
            );
        }
    }
    Ok(())
}
