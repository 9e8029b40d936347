//! Stability verdict of the threshold controller over (rate, Q*) for the
//! reference DRX configuration.

use coalesced_drx::analytic::{PoissonModel, StabilityVerdict};
use coalesced_drx::drx::DrxConfig;

fn main() -> coalesced_drx::Result<()> {
    let cfg = DrxConfig::reference();
    let qs = [1.0, 1.5, 2.0, 4.0, 16.0, 64.0, 256.0];
    print!("{:>5}", "rate");
    for q in qs {
        print!(" {:>8}", format!("Q*={q}"));
    }
    println!();
    for i in 1..=10 {
        let rate = i as f64 / 10.0;
        let m = PoissonModel::deterministic(rate.min(0.999), 1.0, cfg)?;
        print!("{rate:>5.1}");
        for q in qs {
            let cell = match m.stability(q)? {
                StabilityVerdict::Stable => "stable".to_string(),
                StabilityVerdict::Unstable => "UNSTABLE".to_string(),
                StabilityVerdict::ConditionallyStable(min) => format!(">={min:.2}"),
            };
            print!(" {cell:>8}");
        }
        println!();
    }
    Ok(())
}
