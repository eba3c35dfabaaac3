//! Online gradient caching with logarithmic amortized cost per request.
//!
//! The fractional cache state lives on the capped simplex
//! `{f in [0,1]^N : sum f = C}` and is kept in a lazy form (unadjusted
//! coefficients plus one shared offset) so that each projected gradient step
//! touches only a handful of entries in an ordered index. The integral cache
//! is drawn from it by Poisson sampling with permanent random numbers, which
//! keeps successive caches positively coordinated.
//!
//! The crate is `no_std` (it needs `alloc`); trace files, the CLI and result
//! files live in the `ogb-sim` companion crate.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

mod error;
mod ordered;

pub mod metrics;
pub mod policies;
pub mod projection;
pub mod run;
pub mod sampling;
pub mod theory;
pub mod trace;

pub use error::Error;
pub use policies::{HitOutcome, Policy};
pub use projection::{exact_projection, LazyState, UpdateReport};
pub use sampling::SamplerState;
pub use trace::Trace;

pub type Result<T, E = Error> = core::result::Result<T, E>;
