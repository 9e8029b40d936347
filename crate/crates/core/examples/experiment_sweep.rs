//! Drive a sweep from experiment-file text and print the CSV table.

use coalesced_drx::experiment::{emit_csv, parse_spec, run_experiment};

const SPEC: &str = "
[experiment]
name = quick
seeds = 1..4
horizon = 20000

[traffic]
kind = poisson
rate = 0.2, 0.5

[policy]
kinds = standard, fixed, adaptive
q_w = 16
w_star = 100
";

fn main() -> coalesced_drx::Result<()> {
    let spec = parse_spec(SPEC)?;
    let rows = run_experiment(&spec)?;
    emit_csv(&rows, std::io::stdout().lock())
}
