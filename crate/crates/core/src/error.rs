use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A configuration parameter is outside its domain.
    InvalidConfig(&'static str),
    /// An item id is not part of the catalog.
    ItemOutOfRange { item: usize, n: usize },
    /// A step size or other scalar argument is not usable.
    InvalidArgument(&'static str),
    /// The policy was asked to serve more requests than its horizon.
    HorizonExceeded { horizon: u64 },
    /// Two series that must be aligned have different lengths.
    LengthMismatch { left: usize, right: usize },
    EmptyTrace,
    /// The lazy state lost an invariant it relies on (should not happen).
    Inconsistent(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::ItemOutOfRange { item, n } => {
                write!(f, "item {item} out of range for catalog of {n} items")
            }
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::HorizonExceeded { horizon } => {
                write!(f, "request beyond the configured horizon of {horizon}")
            }
            Error::LengthMismatch { left, right } => {
                write!(f, "series length mismatch: {left} vs {right}")
            }
            Error::EmptyTrace => f.write_str("trace contains no requests"),
            Error::Inconsistent(msg) => write!(f, "internal inconsistency: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
