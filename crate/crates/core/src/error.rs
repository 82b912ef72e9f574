use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter violated its documented range.
    InvalidParameter {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    /// `k * eta_01` exceeded one.
    UnphysicalEfficiency { k: f64, eta_00: f64 },
    /// The signal gain is zero, so the QBER is undefined.
    DegenerateObservables,
    /// An operation that is only defined for one attack strategy got another.
    WrongStrategy { expected: &'static str },
    /// A search grid was empty or not strictly increasing.
    InvalidGrid { name: &'static str },
}

impl Error {
    pub(crate) fn param(name: &'static str, value: f64, expected: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            expected,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter {
                name,
                value,
                expected,
            } => write!(f, "invalid `{name}` = {value}: expected {expected}"),
            Error::UnphysicalEfficiency { k, eta_00 } => write!(
                f,
                "mismatch ratio k = {k} gives eta_00 = {eta_00}, which exceeds 1"
            ),
            Error::DegenerateObservables => {
                f.write_str("signal gain is zero; QBER is undefined")
            }
            Error::WrongStrategy { expected } => {
                write!(f, "operation requires the {expected} strategy")
            }
            Error::InvalidGrid { name } => {
                write!(f, "grid `{name}` must be non-empty and strictly increasing")
            }
        }
    }
}

impl core::error::Error for Error {}
