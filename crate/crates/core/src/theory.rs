//! Closed-form tuning and guarantees.

use crate::{Error, Result};

fn check_domain(capacity: f64, n: usize, horizon: u64, batch: u64) -> Result<()> {
    if !(capacity > 0.0 && capacity < n as f64) {
        return Err(Error::InvalidConfig("capacity must satisfy 0 < C < N"));
    }
    if horizon == 0 || batch == 0 {
        return Err(Error::InvalidConfig("horizon and batch size must be at least 1"));
    }
    Ok(())
}

/// `C (1 - C/N)`: squared diameter of the feasible set, halved.
fn spread(capacity: f64, n: usize) -> f64 {
    capacity * (1.0 - capacity / n as f64)
}

/// Step size minimizing the regret bound: `sqrt(C (1 - C/N) / (T B))`.
pub fn learning_rate(capacity: f64, n: usize, horizon: u64, batch: u64) -> Result<f64> {
    check_domain(capacity, n, horizon, batch)?;
    Ok(libm::sqrt(spread(capacity, n) / (horizon as f64 * batch as f64)))
}

/// Regret bound of the batched policy with the tuned step size:
/// `sqrt(C (1 - C/N) T B)`.
pub fn regret_bound(capacity: f64, n: usize, horizon: u64, batch: u64) -> Result<f64> {
    check_domain(capacity, n, horizon, batch)?;
    Ok(libm::sqrt(spread(capacity, n) * horizon as f64 * batch as f64))
}

/// Base of the logarithm in the FTPL noise scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogBase {
    #[default]
    Natural,
    Two,
    Ten,
}

impl LogBase {
    fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Natural => libm::log(x),
            LogBase::Two => libm::log2(x),
            LogBase::Ten => libm::log10(x),
        }
    }
}

/// FTPL noise scale `(4π log N)^{-1/4} sqrt(T / C)`.
pub fn ftpl_zeta(n: usize, horizon: u64, capacity: f64, base: LogBase) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidConfig("FTPL noise scale needs N >= 2"));
    }
    if capacity.is_nan() || capacity <= 0.0 || horizon == 0 {
        return Err(Error::InvalidConfig("capacity and horizon must be positive"));
    }
    let scale = 4.0 * core::f64::consts::PI * base.log(n as f64);
    Ok(libm::pow(scale, -0.25) * libm::sqrt(horizon as f64 / capacity))
}
