//! Closed-form mean queueing delay, its slope in the threshold, and the
//! threshold that meets a delay target, across arrival rates.

use coalesced_drx::analytic::PoissonModel;
use coalesced_drx::drx::DrxConfig;

fn main() -> coalesced_drx::Result<()> {
    let cfg = DrxConfig::reference();
    let w_star = 64.0;
    println!("reference DRX: T_in 10 ms, T_on 2 ms, cycle 32 ms; target W* = {w_star} ms");
    println!("{:>5} {:>9} {:>10} {:>10} {:>10} {:>10}", "rate", "gamma", "E[W] q=8", "E[W] q=32", "slope q=32", "Q* (<=128)");
    for i in 1..=9 {
        let rate = i as f64 / 10.0;
        let m = PoissonModel::deterministic(rate, 1.0, cfg)?;
        let q_star = m.equilibrium(w_star, 128.0)?.map_or("-".into(), |q| format!("{q:.2}"));
        println!(
            "{rate:>5.1} {:>9.2} {:>10.3} {:>10.3} {:>10.4} {:>10}",
            m.gamma(),
            m.mean_wait(8.0)?,
            m.mean_wait(32.0)?,
            m.slope(32.0)?,
            q_star
        );
    }
    Ok(())
}
