//! Compare simulated mean queueing delay with the closed-form model over a
//! static Poisson sweep.

use coalesced_drx::analytic::PoissonModel;
use coalesced_drx::drx::{DrxConfig, Policy};
use coalesced_drx::sim::{run_replicated, Scenario, Traffic};

fn main() -> coalesced_drx::Result<()> {
    let cfg = DrxConfig::reference();
    let seeds: Vec<u64> = (1..=10).collect();
    println!("{:>5} {:>5} {:>10} {:>10} {:>8} {:>7}", "rate", "q_w", "model", "sim", "ci", "sleep");
    for q_w in [8.0, 32.0, 128.0] {
        for i in 1..=9 {
            let rate = i as f64 / 10.0;
            let model = PoissonModel::deterministic(rate, 1.0, cfg)?.mean_wait(q_w)?;
            let sc = Scenario::new(cfg, Policy::fixed(q_w)?, Traffic::Poisson { rate });
            let r = run_replicated(&sc, &seeds)?;
            println!(
                "{rate:>5.1} {q_w:>5} {model:>10.3} {:>10.3} {:>8.3} {:>7.4}",
                r.mean_delay.mean, r.mean_delay.ci_half_width, r.sleep_fraction.mean
            );
        }
    }
    Ok(())
}
