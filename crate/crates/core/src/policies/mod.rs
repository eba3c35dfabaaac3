//! Caching policies driven one request at a time.

use alloc::boxed::Box;

use crate::theory::{self, LogBase};
use crate::trace::Trace;
use crate::{Error, Result};

mod ftpl;
mod lru;
mod ogb;
mod ogb_cl;
mod opt;

pub use ftpl::Ftpl;
pub use lru::Lru;
pub use ogb::Ogb;
pub use ogb_cl::{ogb_cl_run, OgbCl, OgbClRun};
pub use opt::{opt_hindsight, OptAllocation, OptStatic};

/// Result of serving one request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HitOutcome {
    /// Zero-based request index.
    pub t: u64,
    /// The item was in the integral cache on arrival.
    pub hit: bool,
    /// Fraction of the item held by the fractional state on arrival. Policies
    /// without a fractional state report the hit indicator.
    pub reward: f64,
}

pub trait Policy {
    fn name(&self) -> &'static str;

    /// Serves a request for `item`, scoring it against the state in force on
    /// arrival, then updates the state.
    fn request(&mut self, item: usize) -> Result<HitOutcome>;

    /// Items currently in the integral cache.
    fn occupancy(&self) -> usize;

    /// Items whose probability dropped to zero during the last request.
    fn removals_last(&self) -> usize {
        0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Integral,
    Fractional,
}

/// Explicit value or the regret-optimal default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tuning {
    Auto,
    /// Multiple of the automatic value.
    Scaled(f64),
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyKind {
    Ogb,
    OgbFrac,
    OgbCl,
    Ftpl,
    Lru,
    Lfu,
    Opt,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 7] = [
        PolicyKind::Ogb,
        PolicyKind::OgbFrac,
        PolicyKind::OgbCl,
        PolicyKind::Ftpl,
        PolicyKind::Lru,
        PolicyKind::Lfu,
        PolicyKind::Opt,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Ogb => "ogb",
            PolicyKind::OgbFrac => "ogb-frac",
            PolicyKind::OgbCl => "ogb-cl",
            PolicyKind::Ftpl => "ftpl",
            PolicyKind::Lru => "lru",
            PolicyKind::Lfu => "lfu",
            PolicyKind::Opt => "opt",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }

    /// Which reward the policy is judged by.
    pub fn mode(self) -> Mode {
        match self {
            PolicyKind::OgbFrac => Mode::Fractional,
            _ => Mode::Integral,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Seeds {
    pub sampler: u64,
    pub ftpl: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub capacity: f64,
    pub batch: u64,
    pub horizon: u64,
    pub eta: Tuning,
    pub zeta: Tuning,
    pub zeta_log: LogBase,
    pub seeds: Seeds,
    pub window: usize,
}

impl RunConfig {
    /// Defaults for a trace: B = 1, auto tuning, window 10^5.
    pub fn new(n: usize, capacity: f64, horizon: u64) -> Self {
        Self {
            n,
            capacity,
            batch: 1,
            horizon,
            eta: Tuning::Auto,
            zeta: Tuning::Auto,
            zeta_log: LogBase::Natural,
            seeds: Seeds::default(),
            window: 100_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.capacity > 0.0 && self.capacity < self.n as f64) {
            return Err(Error::InvalidConfig("capacity must satisfy 0 < C < N"));
        }
        if self.batch == 0 {
            return Err(Error::InvalidConfig("batch size must be at least 1"));
        }
        if self.horizon == 0 {
            return Err(Error::InvalidConfig("horizon must be at least 1"));
        }
        if self.window == 0 {
            return Err(Error::InvalidConfig("window must be at least 1"));
        }
        for t in [self.eta, self.zeta] {
            match t {
                Tuning::Fixed(v) if !(v >= 0.0 && v.is_finite()) => {
                    return Err(Error::InvalidConfig("explicit tuning values must be finite and >= 0"))
                }
                Tuning::Scaled(v) if !(v > 0.0 && v.is_finite()) => {
                    return Err(Error::InvalidConfig("tuning multipliers must be positive"))
                }
                _ => {}
            }
        }
        if let Tuning::Fixed(v) = self.eta {
            if v == 0.0 {
                return Err(Error::InvalidConfig("step size must be positive"));
            }
        }
        Ok(())
    }

    /// Resolved step size.
    pub fn resolved_eta(&self) -> Result<f64> {
        let auto = || theory::learning_rate(self.capacity, self.n, self.horizon, self.batch);
        Ok(match self.eta {
            Tuning::Auto => auto()?,
            Tuning::Scaled(k) => k * auto()?,
            Tuning::Fixed(v) => v,
        })
    }

    /// Resolved FTPL noise scale.
    pub fn resolved_zeta(&self) -> Result<f64> {
        let auto = || theory::ftpl_zeta(self.n, self.horizon, self.capacity, self.zeta_log);
        Ok(match self.zeta {
            Tuning::Auto => auto()?,
            Tuning::Scaled(k) => k * auto()?,
            Tuning::Fixed(v) => v,
        })
    }

    /// Capacity as a whole number of items, for policies that need one.
    pub fn integral_capacity(&self) -> Result<usize> {
        let c = libm::round(self.capacity);
        if (c - self.capacity).abs() > 1e-9 {
            return Err(Error::InvalidConfig("this policy needs an integral capacity"));
        }
        Ok(c as usize)
    }
}

/// Builds a policy for `trace` (OPT needs the whole trace up front).
pub fn build_policy(kind: PolicyKind, config: &RunConfig, trace: &Trace) -> Result<Box<dyn Policy + Send>> {
    config.validate()?;
    Ok(match kind {
        PolicyKind::Ogb | PolicyKind::OgbFrac => Box::new(Ogb::new(config)?),
        PolicyKind::OgbCl => Box::new(OgbCl::new(config)?),
        PolicyKind::Ftpl => Box::new(Ftpl::new(
            config.n,
            config.integral_capacity()?,
            config.resolved_zeta()?,
            config.seeds.ftpl,
        )?),
        PolicyKind::Lfu => Box::new(Ftpl::lfu(config.n, config.integral_capacity()?)?),
        PolicyKind::Lru => Box::new(Lru::new(config.n, config.integral_capacity()?)?),
        PolicyKind::Opt => Box::new(OptStatic::new(trace, config.integral_capacity()?)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        let mut c = RunConfig::new(10, 2.0, 100);
        assert!(c.validate().is_ok());
        c.batch = 0;
        assert!(c.validate().is_err());
        let mut c = RunConfig::new(10, 10.0, 100);
        assert!(c.validate().is_err());
        c.capacity = 2.0;
        c.eta = Tuning::Fixed(0.0);
        assert!(c.validate().is_err());
        c.eta = Tuning::Scaled(10.0);
        let auto = crate::theory::learning_rate(2.0, 10, 100, 1).unwrap();
        assert!((c.resolved_eta().unwrap() - 10.0 * auto).abs() < 1e-15);
        c.capacity = 2.5;
        assert!(c.integral_capacity().is_err());
    }

    #[test]
    fn kind_names_round_trip() {
        for k in PolicyKind::ALL {
            assert_eq!(PolicyKind::parse(k.as_str()), Some(k));
        }
        assert_eq!(PolicyKind::parse("arc"), None);
    }
}
