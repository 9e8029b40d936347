//! Closed-form mean queueing delay of coalesced DRX.
//!
//! The eNB queue is treated as a single-server queue with vacations: the
//! first packet of every coalescing cycle waits `W_f` (for the threshold to
//! fill and for the next on-duration), and a packet finding the eNB idle
//! sees DRX enabled with probability `1 / gamma`. For general renewal
//! traffic the caller supplies the empty-period and first-wait moments
//! ([`VacationMoments`]); for Poisson traffic every term has a closed form.
//!
//! `gamma = exp(lambda * t_in)` overflows long before it matters, so every
//! expression involving it switches to a form divided through by `gamma`
//! once `gamma > 1e12`; the two forms agree algebraically and the divided
//! one stays finite as `gamma -> inf`.

use crate::drx::DrxConfig;
use crate::error::{invalid, Error, Result};

const GAMMA_RESCALE: f64 = 1e12;

/// First two moments of the arrival and service processes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrafficMoments {
    /// Mean arrival rate, packets/ms.
    pub lambda: f64,
    /// Mean service rate, packets/ms.
    pub mu: f64,
    /// Inter-arrival variance, ms².
    pub var_a: f64,
    /// Service-time variance, ms².
    pub var_s: f64,
}

impl TrafficMoments {
    pub fn new(lambda: f64, mu: f64, var_a: f64, var_s: f64) -> Result<Self> {
        if !(lambda > 0.0 && mu > 0.0) {
            return Err(invalid(format!("rates must be positive, got lambda={lambda} mu={mu}")));
        }
        if !(var_a >= 0.0 && var_s >= 0.0) {
            return Err(invalid(format!("variances must be >= 0, got {var_a}, {var_s}")));
        }
        let tm = Self { lambda, mu, var_a, var_s };
        if tm.rho() >= 1.0 {
            return Err(Error::Unstable { rho: tm.rho() });
        }
        Ok(tm)
    }

    /// Poisson arrivals: `var_a = 1 / lambda²`.
    pub fn poisson(lambda: f64, mu: f64, var_s: f64) -> Result<Self> {
        Self::new(lambda, mu, 1.0 / (lambda * lambda), var_s)
    }

    pub fn rho(&self) -> f64 {
        self.lambda / self.mu
    }
}

/// Moments of the empty period `I` and of the first coalesced packet's
/// wait `W_f`, plus the `gamma` factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VacationMoments {
    pub e_i: f64,
    pub e_i2: f64,
    pub e_wf: f64,
    pub e_wf2: f64,
    /// Inverse of the fraction of eNB idle time spent with DRX enabled.
    pub gamma: f64,
}

impl VacationMoments {
    pub fn new(e_i: f64, e_i2: f64, e_wf: f64, e_wf2: f64, gamma: f64) -> Result<Self> {
        let vm = Self { e_i, e_i2, e_wf, e_wf2, gamma };
        vm.validate()?;
        Ok(vm)
    }

    pub fn validate(&self) -> Result<()> {
        // relative slack for moments computed in floating point
        let tol = 1e-12;
        if !(self.e_i >= 0.0 && self.e_wf >= 0.0) {
            return Err(invalid("moments must be non-negative"));
        }
        if self.e_i2 < self.e_i * self.e_i * (1.0 - tol) {
            return Err(invalid(format!("E[I^2]={} below E[I]^2={}", self.e_i2, self.e_i * self.e_i)));
        }
        if self.e_wf2 < self.e_wf * self.e_wf * (1.0 - tol) {
            return Err(invalid(format!("E[Wf^2]={} below E[Wf]^2={}", self.e_wf2, self.e_wf * self.e_wf)));
        }
        if !(self.gamma >= 1.0) {
            return Err(invalid(format!("gamma must be >= 1, got {}", self.gamma)));
        }
        Ok(())
    }

    /// Closed-form moments for Poisson arrivals at `lambda` with threshold
    /// `q_w`, on-duration offset `t_w` and inactivity timer `t_in`.
    pub fn poisson(lambda: f64, q_w: f64, t_w: f64, t_in: f64) -> Result<Self> {
        let (e_wf, e_wf2) = first_wait_moments_poisson(lambda, q_w, t_w)?;
        let gamma = gamma_poisson(lambda, t_in)?;
        Self::new(1.0 / lambda, 2.0 / (lambda * lambda), e_wf, e_wf2, gamma)
    }
}

/// Mean extra wait for the next on-duration once the threshold is reached,
/// assuming that instant is uniform over the cycle.
pub fn extra_wait_tw(t_short: f64, t_on: f64) -> Result<f64> {
    if !(t_on > 0.0 && t_on <= t_short && t_short.is_finite()) {
        return Err(invalid(format!("need 0 < t_on <= t_short, got t_on={t_on} t_short={t_short}")));
    }
    let sleep = t_short - t_on;
    Ok(sleep * sleep / (2.0 * t_short))
}

/// `gamma` for Poisson arrivals: `exp(lambda * t_in)`. May be `inf`.
pub fn gamma_poisson(lambda: f64, t_in: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(invalid(format!("lambda must be positive, got {lambda}")));
    }
    if !(t_in >= 0.0) {
        return Err(invalid(format!("t_in must be >= 0, got {t_in}")));
    }
    Ok((lambda * t_in).exp())
}

/// `(E[W_f], E[W_f²])` for Poisson arrivals: the first packet waits for
/// `q_w - 1` more arrivals (an Erlang sum) and then `t_w` on average.
pub fn first_wait_moments_poisson(lambda: f64, q_w: f64, t_w: f64) -> Result<(f64, f64)> {
    if !(lambda > 0.0) {
        return Err(invalid(format!("lambda must be positive, got {lambda}")));
    }
    if !(q_w >= 1.0) {
        return Err(invalid(format!("q_w must be >= 1, got {q_w}")));
    }
    let e_wf = (q_w - 1.0) / lambda + t_w;
    Ok((e_wf, (q_w - 1.0) / (lambda * lambda) + e_wf * e_wf))
}

/// Mean queueing delay for general renewal traffic.
pub fn mean_wait_general(tm: &TrafficMoments, q_w: f64, vm: &VacationMoments) -> Result<f64> {
    if !(q_w >= 1.0) {
        return Err(invalid(format!("q_w must be >= 1, got {q_w}")));
    }
    if tm.rho() >= 1.0 {
        return Err(Error::Unstable { rho: tm.rho() });
    }
    vm.validate()?;
    let TrafficMoments { lambda, var_a, var_s, .. } = *tm;
    let idle = 1.0 - tm.rho();

    let base = (lambda * lambda * (var_s + var_a) + idle * idle) / (2.0 * lambda * idle);

    let (num, den) = if vm.gamma > GAMMA_RESCALE {
        let inv = 1.0 / vm.gamma;
        (vm.e_wf2 * inv - vm.e_i2, 2.0 * (vm.e_wf * inv + vm.e_i))
    } else {
        (vm.e_wf2 - vm.gamma * vm.e_i2, 2.0 * (vm.e_wf + vm.gamma * vm.e_i))
    };
    if den == 0.0 {
        return Err(Error::Degenerate("E[Wf] + gamma E[I] is zero".into()));
    }
    let vacation = num / den;

    let cov_den = q_w - 1.0 + lambda * vm.e_i;
    let covariance = if q_w == 1.0 {
        0.0
    } else if cov_den == 0.0 {
        return Err(Error::Degenerate("q_w - 1 + lambda E[I] is zero".into()));
    } else {
        lambda * (q_w - 1.0) * var_a / cov_den
    };

    Ok(base + vacation - covariance)
}

fn poisson_cycle(cfg: &DrxConfig) -> Result<f64> {
    cfg.validate()?;
    cfg.uniform_cycle()
        .ok_or_else(|| invalid("the Poisson model needs equal short and long DRX cycles"))
}

/// Mean queueing delay for Poisson arrivals at `lambda` served at `mu`
/// with service variance `var_s`, threshold `q_w` and DRX timers `cfg`.
pub fn mean_wait_poisson(lambda: f64, mu: f64, var_s: f64, q_w: f64, cfg: &DrxConfig) -> Result<f64> {
    let tm = TrafficMoments::poisson(lambda, mu, var_s)?;
    if !(q_w >= 1.0) {
        return Err(invalid(format!("q_w must be >= 1, got {q_w}")));
    }
    let t_w = extra_wait_tw(poisson_cycle(cfg)?, cfg.t_on)?;
    let idle = 1.0 - tm.rho();
    let a = lambda * t_w;
    let base = (1.0 + lambda * lambda * var_s + idle * idle) / (2.0 * lambda * idle);
    let covariance = (q_w - 1.0) / (lambda * q_w);

    let lt = lambda * cfg.t_in;
    let head = (q_w + a) * (q_w + a) - q_w - 2.0 * a;
    let vacation = if lt > GAMMA_RESCALE.ln() {
        let inv = (-lt).exp();
        (head * inv - 2.0) / (2.0 * lambda * ((q_w + a - 1.0) * inv + 1.0))
    } else {
        let gamma = lt.exp();
        (head - 2.0 * gamma) / (2.0 * lambda * (q_w + a + gamma - 1.0))
    };
    Ok(base - covariance + vacation)
}

/// `(lambda t_w + 3 gamma - gamma²) / (q + lambda t_w + gamma - 1)²`, the
/// `gamma`-dependent part of the slope of the Poisson delay curve.
fn vacation_slope_term(lambda: f64, q_w: f64, t_w: f64, gamma: f64) -> f64 {
    let a = lambda * t_w;
    if gamma > GAMMA_RESCALE {
        let inv = 1.0 / gamma;
        let s = (q_w + a - 1.0) * inv + 1.0;
        (a * inv * inv + 3.0 * inv - 1.0) / (s * s)
    } else {
        let s = q_w + a + gamma - 1.0;
        (a + 3.0 * gamma - gamma * gamma) / (s * s)
    }
}

/// Slope of [`mean_wait_poisson`] with respect to the threshold.
///
/// Exact derivative of the closed form; it tends to `1 / (2 lambda)` as
/// `q_w` grows, which is what makes `2 lambda` the natural controller gain.
pub fn dmean_wait_dq(lambda: f64, q_w: f64, t_w: f64, gamma: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(invalid(format!("lambda must be positive, got {lambda}")));
    }
    if !(q_w >= 1.0) {
        return Err(invalid(format!("q_w must be >= 1, got {q_w}")));
    }
    let tail = vacation_slope_term(lambda, q_w, t_w, gamma);
    Ok((1.0 - 2.0 / (q_w * q_w) + tail) / (2.0 * lambda))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StabilityVerdict {
    Stable,
    Unstable,
    /// The linearised loop is only guaranteed stable for equilibria above `q`.
    ConditionallyStable(f64),
}

/// Left-hand sides of the two local stability conditions of the threshold
/// loop `q <- q + 2 lambda (W* - f(q))` at equilibrium `q`:
/// `(upper, lower)` where `upper < 1` means `f'(q) < 1/lambda` and
/// `lower < 1` means `f'(q) > 0`.
pub fn stability_conditions(lambda: f64, q: f64, t_w: f64, gamma: f64) -> (f64, f64) {
    let tail = vacation_slope_term(lambda, q, t_w, gamma);
    let quad = 2.0 / (q * q);
    (tail - quad, quad - tail)
}

const CROSSING_LO: f64 = 1.0;
const CROSSING_HI: f64 = 1024.0;
const CROSSING_TOL: f64 = 1e-6;

/// Local stability of the threshold controller around equilibrium `q_w_star`.
pub fn stability_verdict(lambda: f64, q_w_star: f64, t_w: f64, gamma: f64) -> Result<StabilityVerdict> {
    if !(lambda > 0.0) {
        return Err(invalid(format!("lambda must be positive, got {lambda}")));
    }
    if !(q_w_star >= 1.0) {
        return Err(invalid(format!("equilibrium threshold must be >= 1, got {q_w_star}")));
    }
    if !(gamma >= 1.0) {
        return Err(invalid(format!("gamma must be >= 1, got {gamma}")));
    }
    if !(t_w >= 0.0) {
        return Err(invalid(format!("t_w must be >= 0, got {t_w}")));
    }
    let (upper, lower) = stability_conditions(lambda, q_w_star, t_w, gamma);
    if upper >= 1.0 {
        return Ok(StabilityVerdict::Unstable);
    }
    if lower < 1.0 {
        return Ok(StabilityVerdict::Stable);
    }
    let lower_at = |q: f64| stability_conditions(lambda, q, t_w, gamma).1;
    if lower_at(CROSSING_HI) >= 1.0 {
        return Ok(StabilityVerdict::Unstable);
    }
    // lower_at(q) >= 1 at q_w_star and < 1 at the top of the range
    let (mut lo, mut hi) = (q_w_star.max(CROSSING_LO), CROSSING_HI);
    while hi - lo > CROSSING_TOL {
        let mid = 0.5 * (lo + hi);
        if lower_at(mid) < 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(StabilityVerdict::ConditionallyStable(hi))
}

/// Mean wait of an M/D/1 queue.
pub fn md1_wait(lambda: f64, mu: f64) -> Result<f64> {
    if !(lambda > 0.0 && mu > 0.0) {
        return Err(invalid(format!("rates must be positive, got lambda={lambda} mu={mu}")));
    }
    let rho = lambda / mu;
    if rho >= 1.0 {
        return Err(Error::Unstable { rho });
    }
    Ok(rho / (2.0 * mu * (1.0 - rho)))
}

/// The Poisson delay model bound to one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonModel {
    pub lambda: f64,
    pub mu: f64,
    pub var_s: f64,
    pub cfg: DrxConfig,
}

impl PoissonModel {
    /// Deterministic service of one packet per `psf` ms.
    pub fn deterministic(lambda: f64, psf: f64, cfg: DrxConfig) -> Result<Self> {
        let m = Self { lambda, mu: 1.0 / psf, var_s: 0.0, cfg };
        TrafficMoments::poisson(lambda, m.mu, 0.0)?;
        poisson_cycle(&cfg)?;
        Ok(m)
    }

    pub fn t_w(&self) -> f64 {
        let cycle = self.cfg.uniform_cycle().unwrap_or(self.cfg.t_long);
        extra_wait_tw(cycle, self.cfg.t_on).unwrap_or(0.0)
    }

    pub fn gamma(&self) -> f64 {
        (self.lambda * self.cfg.t_in).exp()
    }

    pub fn mean_wait(&self, q_w: f64) -> Result<f64> {
        mean_wait_poisson(self.lambda, self.mu, self.var_s, q_w, &self.cfg)
    }

    pub fn slope(&self, q_w: f64) -> Result<f64> {
        dmean_wait_dq(self.lambda, q_w, self.t_w(), self.gamma())
    }

    pub fn stability(&self, q_w_star: f64) -> Result<StabilityVerdict> {
        stability_verdict(self.lambda, q_w_star, self.t_w(), self.gamma())
    }

    /// Threshold in `[1, q_max]` at which the mean delay equals `w_star`:
    /// the largest root, or `None` when `w_star` is out of reach.
    pub fn equilibrium(&self, w_star: f64, q_max: f64) -> Result<Option<f64>> {
        let f = |q: f64| self.mean_wait(q).map(|w| w - w_star);
        if f(q_max)? < 0.0 {
            return Ok(None);
        }
        // scan down from q_max for the last sign change, then bisect
        let steps = 4096;
        let h = (q_max - 1.0) / steps as f64;
        let mut hi = q_max;
        let mut lo = None;
        for i in (0..steps).rev() {
            let q = 1.0 + h * i as f64;
            if f(q)? < 0.0 {
                lo = Some(q);
                break;
            }
            hi = q;
        }
        let Some(mut lo) = lo else {
            return Ok(None);
        };
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid)? < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(Some(0.5 * (lo + hi)))
    }
}
