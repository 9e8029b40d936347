//! Replay a recorded downlink trace under standard DRX and adaptive
//! coalescing.
//!
//! Usage: `cargo run --example trace_replay [path]`; defaults to the sample
//! trace shipped in `traces/`.

use std::fs::File;
use std::io::BufReader;
use std::sync::Arc;

use coalesced_drx::drx::{DrxConfig, Policy};
use coalesced_drx::sim::{run, Scenario, Traffic};
use coalesced_drx::traffic::load_trace;

fn main() -> coalesced_drx::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/../../traces/streaming_sample.trace").into());
    let stream = Arc::new(load_trace(BufReader::new(File::open(&path)?))?);
    println!("{path}: {} packets over {:.1} s ({:.3} packets/ms)", stream.len(), stream.horizon() / 1000.0, stream.rate());
    let horizon = stream.horizon();
    let policies = [
        Policy::Standard,
        Policy::adaptive(64.0, 128.0)?,
        Policy::adaptive(512.0, 1024.0)?,
    ];
    println!("{:>9} {:>6} {:>10} {:>7} {:>9}", "policy", "W*", "delay", "sleep", "mean q_w");
    for p in policies {
        let sc = Scenario::new(DrxConfig::reference(), p, Traffic::Trace(stream.clone())).with_horizon(horizon);
        let m = run(&sc, 0)?;
        let w_star = match p {
            Policy::AdaptiveCoalescing { w_star, .. } => format!("{w_star}"),
            _ => "-".into(),
        };
        println!("{:>9} {w_star:>6} {:>10.2} {:>7.4} {:>9.2}", p.name(), m.mean_delay, m.sleep_fraction, m.mean_q_w);
    }
    Ok(())
}
