//! Experiment files, sweeps and CSV output.
//!
//! An experiment file is flat `key = value` text under four sections:
//!
//! ```text
//! [experiment]          # name, seeds (1..10), horizon, psf, level, output
//! [drx]                 # t_in, t_on, t_short, t_long, n_short
//! [traffic]             # kind = poisson | pareto | schedule | trace
//! rate = 0.1:0.9:0.1    # start:end:step, or a comma list
//! [policy]
//! kinds = standard, fixed, adaptive
//! q_w = 8, 32, 128
//! w_star = 64, 512      # w_max = w_max_ratio * w_star (default 2)
//! ```
//!
//! `#` starts a comment. Unspecified `[drx]` keys take the reference
//! configuration; horizon defaults to 100 s and seeds to `1..10`.

mod run;
mod spec;

pub use run::{emit_csv, run_experiment, ResultRow, CSV_HEADER};
pub use spec::{parse_spec, ExperimentSpec, TrafficSpec};
