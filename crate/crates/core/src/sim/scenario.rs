use std::sync::Arc;

use crate::drx::{check_positive, DrxConfig, Policy};
use crate::error::Result;
use crate::traffic::{gen_pareto, gen_poisson, gen_schedule, ArrivalStream, RateSchedule};

/// Downlink arrival process of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub enum Traffic {
    Poisson { rate: f64 },
    Pareto { rate: f64, shape: f64 },
    /// Poisson with a piecewise-constant rate.
    Schedule(RateSchedule),
    /// Pre-loaded trace, identical for every seed.
    Trace(Arc<ArrivalStream>),
}

impl Traffic {
    /// Arrivals over `[0, horizon]` for `seed`.
    pub fn arrivals(&self, horizon: f64, seed: u64) -> Result<ArrivalStream> {
        match self {
            Traffic::Poisson { rate } => gen_poisson(*rate, horizon, seed),
            Traffic::Pareto { rate, shape } => gen_pareto(*rate, *shape, horizon, seed),
            Traffic::Schedule(s) => Ok(gen_schedule(s, seed).truncated(horizon)),
            Traffic::Trace(t) => Ok(t.truncated(horizon)),
        }
    }

    /// Nominal mean rate in packets/ms.
    pub fn mean_rate(&self) -> f64 {
        match self {
            Traffic::Poisson { rate } | Traffic::Pareto { rate, .. } => *rate,
            Traffic::Schedule(s) => s.mean_rate(),
            Traffic::Trace(t) => t.rate(),
        }
    }
}

/// Everything a single simulation run needs besides the seed.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub cfg: DrxConfig,
    pub policy: Policy,
    pub traffic: Traffic,
    /// Simulated time, ms.
    pub horizon: f64,
    /// Transmission time of one packet, ms.
    pub psf: f64,
}

impl Scenario {
    /// 100 s with 1 ms sub-frames, as in the reference experiments.
    pub fn new(cfg: DrxConfig, policy: Policy, traffic: Traffic) -> Self {
        Self { cfg, policy, traffic, horizon: 100_000.0, psf: 1.0 }
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_psf(mut self, psf: f64) -> Self {
        self.psf = psf;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("horizon", self.horizon)?;
        check_positive("psf", self.psf)?;
        self.cfg.validate()?;
        self.policy.validate()
    }
}
